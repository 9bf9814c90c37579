#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "cbl/coeffs.hpp"
#include "cbl/params.hpp"

namespace cbl {

struct FirstMoments {
    cplx mean_a;
    cplx mean_b;
};

struct SecondMoments {
    double n_a = 0.0;
    double n_b = 0.0;
    cplx m;  // <a b>; <a† b†> is always conj(m)
};

struct MomentState {
    double t = 0.0;
    FirstMoments first{};
    SecondMoments second{};
};

/// Drift matrix of the first-moment vector (<a>, conj(<b>)). In averaged
/// mode its eigenvalues are -lambda +/- epsilon.
inline Eigen::Matrix2cd drift_first(const DerivedCoeffs& k) {
    Eigen::Matrix2cd m;
    m << -k.a_plus, -k.b_plus, -std::conj(k.b_minus), -std::conj(k.a_minus);
    return m;
}

/// Linear system u' = M u + s for the second-moment vector
/// u = (n_a, n_b, m, conj m), valid in both phase modes.
struct SecondDriftC {
    Eigen::Matrix4cd M;
    Eigen::Vector4cd s;
};

inline SecondDriftC drift_second_complex(const DerivedCoeffs& k) {
    const double c = k.c();
    const cplx Dsum = k.D_plus + k.D_minus;
    const double ga = k.kappa + (c * Dsum).real() - 2.0 * c * k.C_plus;
    const double gb = k.kappa + 2.0 * c * k.C_minus + (c * Dsum).real();
    const double gm = k.kappa + c * (k.C_minus - k.C_plus) + (c * Dsum).real();
    const double S = k.drive;
    SecondDriftC d;
    d.M << -ga, 0.0, c * (k.E_plus + S), c * (k.E_minus + S),
        0.0, -gb, -c * (k.E_minus - S), -c * (k.E_plus - S),
        -c * (k.E_plus - S), c * (k.E_minus + S), -gm, 0.0,
        -c * (k.E_minus - S), c * (k.E_plus + S), 0.0, -gm;
    d.s << c * (2.0 * k.C_plus - Dsum), 0.0, -c * (k.E_plus - S),
        -c * (k.E_minus - S);
    return d;
}

/// Real form of the second-moment system on (n_a, n_b, Re m, Im m);
/// averaged mode only (all coefficients real, Im m decouples).
struct SecondDrift {
    Eigen::Matrix4d M;
    Eigen::Vector4d s;
};

inline SecondDrift drift_second(const DerivedCoeffs& k) {
    const double c = k.c();
    const double D = k.D_plus.real();
    const double E = k.E_plus.real();
    const double S = k.drive;
    const double ga = k.kappa + 2.0 * c * (D - k.C_plus);
    const double gb = k.kappa + 2.0 * c * (k.C_minus + D);
    const double gm = k.kappa + c * (k.C_minus - k.C_plus) + 2.0 * c * D;
    SecondDrift d;
    d.M << -ga, 0.0, 2.0 * c * (E + S), 0.0,
        0.0, -gb, -2.0 * c * (E - S), 0.0,
        -c * (E - S), c * (E + S), -gm, 0.0,
        0.0, 0.0, 0.0, -gm;
    d.s << 2.0 * c * (k.C_plus - D), 0.0, -c * (E - S), 0.0;
    return d;
}

namespace detail {

/// Matrix exponential by Pade(13) with scaling and squaring (Higham 2005).
/// Hand-rolled: it works on defective matrices (the eps = 0 degeneracy) and
/// avoids heavyweight template machinery for these tiny dense systems.
inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
    static const double b[] = {64764752532480000.0, 32382376266240000.0,
                               7771770303897600.0,  1187353796428800.0,
                               129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,
                               1323241920.0,        40840800.0,
                               960960.0,            16380.0,
                               182.0,               1.0};
    const int n = static_cast<int>(a.rows());
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
    int squarings = 0;
    const double theta13 = 5.371920351148152;
    if (norm > theta13)
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    const Eigen::MatrixXcd m = a / std::pow(2.0, squarings);

    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd m2 = m * m;
    const Eigen::MatrixXcd m4 = m2 * m2;
    const Eigen::MatrixXcd m6 = m4 * m2;
    const Eigen::MatrixXcd u =
        m * (m6 * (b[13] * m6 + b[11] * m4 + b[9] * m2) + b[7] * m6 +
             b[5] * m4 + b[3] * m2 + b[1] * id);
    const Eigen::MatrixXcd v = m6 * (b[12] * m6 + b[10] * m4 + b[8] * m2) +
                               b[6] * m6 + b[4] * m4 + b[2] * m2 + b[0] * id;
    Eigen::MatrixXcd r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) r = r * r;
    return r;
}

struct MomentVec {
    Eigen::Vector2cd f;  // (<a>, conj <b>)
    Eigen::Vector4cd u;  // (n_a, n_b, m, conj m)
};

inline MomentVec pack(const MomentState& st) {
    MomentVec v;
    v.f << st.first.mean_a, std::conj(st.first.mean_b);
    v.u << st.second.n_a, st.second.n_b, st.second.m, std::conj(st.second.m);
    return v;
}

inline MomentState unpack(double t, const MomentVec& v) {
    MomentState st;
    st.t = t;
    st.first = {v.f(0), std::conj(v.f(1))};
    st.second = {v.u(0).real(), v.u(1).real(), v.u(2)};
    return st;
}

}  // namespace detail

/// Fixed-step RK4 over the linear moment systems. The trajectory is sampled
/// at every multiple of dt up to and including t_final.
inline std::vector<MomentState> integrate(const DerivedCoeffs& k,
                                          const MomentState& state0,
                                          double t_final, double dt) {
    if (!(dt > 0.0)) throw InvalidParams("dt must be > 0");
    if (!(t_final >= 0.0)) throw InvalidParams("t_final must be >= 0");
    const Eigen::Matrix2cd M1 = drift_first(k);
    const SecondDriftC d2 = drift_second_complex(k);

    auto rhs = [&](const detail::MomentVec& v) {
        detail::MomentVec r;
        r.f = M1 * v.f;
        r.u = d2.M * v.u + d2.s;
        return r;
    };
    auto axpy = [](const detail::MomentVec& v, double h, const detail::MomentVec& w) {
        detail::MomentVec r;
        r.f = v.f + h * w.f;
        r.u = v.u + h * w.u;
        return r;
    };

    std::vector<MomentState> out;
    detail::MomentVec v = detail::pack(state0);
    const double t0 = state0.t;
    out.push_back(detail::unpack(t0, v));
    const long n_steps = static_cast<long>(std::llround(t_final / dt));
    for (long i = 0; i < n_steps; ++i) {
        const auto k1 = rhs(v);
        const auto k2 = rhs(axpy(v, dt / 2.0, k1));
        const auto k3 = rhs(axpy(v, dt / 2.0, k2));
        const auto k4 = rhs(axpy(v, dt, k3));
        detail::MomentVec inc;
        inc.f = (dt / 6.0) * (k1.f + 2.0 * k2.f + 2.0 * k3.f + k4.f);
        inc.u = (dt / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
        v.f += inc.f;
        v.u += inc.u;
        if (!v.f.allFinite() || !v.u.allFinite())
            throw NonFinite("moment integration overflowed (above threshold?)");
        out.push_back(detail::unpack(t0 + (i + 1) * dt, v));
    }
    // land exactly on t_final if it is not a multiple of dt
    const double rem = t_final - n_steps * dt;
    if (std::abs(rem) > 1e-12 * std::max(1.0, t_final)) {
        const auto k1 = rhs(v);
        const auto k2 = rhs(axpy(v, rem / 2.0, k1));
        const auto k3 = rhs(axpy(v, rem / 2.0, k2));
        const auto k4 = rhs(axpy(v, rem, k3));
        v.f += (rem / 6.0) * (k1.f + 2.0 * k2.f + 2.0 * k3.f + k4.f);
        v.u += (rem / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
        out.push_back(detail::unpack(t0 + t_final, v));
    }
    return out;
}

/// Exact propagation by matrix exponential; validation route for integrate.
/// The inhomogeneous part uses the augmented-matrix trick
/// exp([[M, s], [0, 0]] t) = [[exp(Mt), int_0^t exp(M tau) s dtau], [0, 1]].
inline MomentState propagate_expm(const DerivedCoeffs& k, const MomentState& state0,
                                  double t) {
    if (!(t >= 0.0)) throw InvalidParams("t must be >= 0");
    detail::MomentVec v = detail::pack(state0);
    v.f = detail::expm(drift_first(k) * t) * v.f;

    const SecondDriftC d2 = drift_second_complex(k);
    Eigen::MatrixXcd aug = Eigen::MatrixXcd::Zero(5, 5);
    aug.topLeftCorner(4, 4) = d2.M;
    aug.topRightCorner(4, 1) = d2.s;
    const Eigen::MatrixXcd E = detail::expm(aug * t);
    v.u = E.topLeftCorner(4, 4) * v.u + E.topRightCorner(4, 1);
    return detail::unpack(state0.t + t, v);
}

/// Unique steady state of the second-moment system. Requires a positive
/// threshold margin and a strictly stable drift matrix.
inline SecondMoments steady_state(const DerivedCoeffs& k) {
    if (!(threshold_margin(k) > 0.0))
        throw Unstable("threshold margin is not positive");
    const SecondDriftC d = drift_second_complex(k);
    const Eigen::Vector4cd eigs = d.M.eigenvalues();
    for (int i = 0; i < 4; ++i)
        if (eigs(i).real() >= 0.0)
            throw Unstable("second-moment drift has a nonnegative eigenvalue");
    const Eigen::Vector4cd u = d.M.fullPivLu().solve(-d.s);
    return {u(0).real(), u(1).real(), u(2)};
}

}  // namespace cbl
