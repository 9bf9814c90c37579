#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "cbl/moments.hpp"
#include "cbl/params.hpp"

namespace cbl {

/// Conventions, pinned once: quadratures x = a + a†, p = -i(a - a†) so the
/// vacuum variance is 1; the DGCZ separable bound is 2; logarithmic
/// negativity uses the natural logarithm.
struct NonclassicalityReport {
    double n_total;
    double var_minus, var_plus;
    double dgcz;
    double log_neg;
    double g2_cross;
    double cs_ratio;
};

namespace detail {

struct CentralMoments {
    double n_a, n_b;
    cplx m;
};

inline CentralMoments centered(const SecondMoments& s, const FirstMoments& f) {
    CentralMoments c;
    c.n_a = s.n_a - std::norm(f.mean_a);
    c.n_b = s.n_b - std::norm(f.mean_b);
    c.m = s.m - f.mean_a * f.mean_b;
    return c;
}

/// 4x4 quadrature covariance in (x_a, p_a, x_b, p_b) for the state class
/// with <aa> = <bb> = <ab†> = 0.
inline Eigen::Matrix4d covariance(const CentralMoments& c) {
    const double va = 1.0 + 2.0 * c.n_a;
    const double vb = 1.0 + 2.0 * c.n_b;
    const double mr = 2.0 * c.m.real();
    const double mi = 2.0 * c.m.imag();
    Eigen::Matrix4d sig;
    sig << va, 0.0, mr, mi,
        0.0, va, mi, -mr,
        mr, mi, vb, 0.0,
        mi, -mr, 0.0, vb;
    return sig;
}

inline double min_symplectic_eigenvalue(const Eigen::Matrix4d& sig) {
    Eigen::Matrix4d omega;
    omega << 0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 0, 1, 0, 0, -1, 0;
    Eigen::EigenSolver<Eigen::Matrix4d> es(omega * sig);
    double nu = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) nu = std::min(nu, std::abs(es.eigenvalues()(i)));
    return nu;
}

}  // namespace detail

/// Combined-quadrature variances var((x_a - x_b)/sqrt2) + var((p_a + p_b)/sqrt2)
/// style pair, vacuum-normalized to (1, 1); squeezing iff a value < 1.
inline std::pair<double, double> quadrature_variances(const SecondMoments& s,
                                                      const FirstMoments& f) {
    const auto c = detail::centered(s, f);
    const double base = 1.0 + c.n_a + c.n_b;
    return {base - 2.0 * c.m.real(), base + 2.0 * c.m.real()};
}

/// DGCZ witness after optimizing the local phase rotation (which aligns m to
/// the real axis): separable states satisfy S >= 2.
inline double dgcz_witness(const SecondMoments& s, const FirstMoments& f) {
    const auto c = detail::centered(s, f);
    return 2.0 * (1.0 + c.n_a + c.n_b - 2.0 * std::abs(c.m));
}

/// Gaussian logarithmic negativity E_N = max(0, -ln(nu_tilde)) from the
/// smallest symplectic eigenvalue of the partially transposed covariance.
inline double log_negativity(const SecondMoments& s, const FirstMoments& f) {
    const auto c = detail::centered(s, f);
    const Eigen::Matrix4d sig = detail::covariance(c);
    if (detail::min_symplectic_eigenvalue(sig) < 1.0 - 1e-6)
        throw UnphysicalCovariance("covariance violates the uncertainty relation");
    const Eigen::Matrix4d pt = Eigen::Vector4d(1, 1, 1, -1).asDiagonal();
    const double nu = detail::min_symplectic_eigenvalue(pt * sig * pt);
    return std::max(0.0, -std::log(nu));
}

struct CrossCorrelation {
    double g2_cross;
    double cs_ratio;  // Cauchy-Schwarz ratio; classical bound is 1
};

/// Gaussian-factorized cross correlation: <a†b†ba> = n_a n_b + |m|^2 for the
/// zero-mean state class, g2_auto = 2 per mode.
inline CrossCorrelation gaussian_g2(const SecondMoments& s, const FirstMoments& f) {
    (void)f;  // validity requires zero means; the centered factorization is
              // only used in that regime
    if (s.n_a < 1e-12 || s.n_b < 1e-12)
        throw DegenerateIntensity("mode intensity too small for g2");
    CrossCorrelation cc;
    cc.g2_cross = 1.0 + std::norm(s.m) / (s.n_a * s.n_b);
    cc.cs_ratio = cc.g2_cross * cc.g2_cross / 4.0;
    return cc;
}

/// Full report; g2 fields are NaN when an intensity is degenerate.
inline NonclassicalityReport nonclassicality(const SecondMoments& s,
                                             const FirstMoments& f) {
    NonclassicalityReport r;
    r.n_total = s.n_a + s.n_b;
    std::tie(r.var_minus, r.var_plus) = quadrature_variances(s, f);
    r.dgcz = dgcz_witness(s, f);
    r.log_neg = log_negativity(s, f);
    try {
        const auto cc = gaussian_g2(s, f);
        r.g2_cross = cc.g2_cross;
        r.cs_ratio = cc.cs_ratio;
    } catch (const DegenerateIntensity&) {
        r.g2_cross = std::numeric_limits<double>::quiet_NaN();
        r.cs_ratio = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

}  // namespace cbl
