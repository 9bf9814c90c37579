#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <string>

#include "cbl/coeffs.hpp"
#include "cbl/moments.hpp"
#include "cbl/params.hpp"

namespace cbl {

struct FockConfig {
    int n_max_a = 8;             // inclusive photon-number cap, mode a
    int n_max_b = 8;             // inclusive photon-number cap, mode b
    double boundary_tol = 1e-3;  // max tolerated population in the top layer

    void validate() const {
        if (n_max_a < 1 || n_max_b < 1)
            throw InvalidParams("n_max must be >= 1");
        if (!(boundary_tol > 0.0))
            throw InvalidParams("boundary_tol must be > 0");
    }
};

/// Two-mode density operator truncated at |n_max_a, n_max_b>, row-major in
/// mode order: composite index i = ia * (n_max_b + 1) + ib.
struct DensityMatrix {
    int n_max_a = 0;
    int n_max_b = 0;
    double time = 0.0;
    Eigen::MatrixXcd mat;

    int da() const { return n_max_a + 1; }
    int db() const { return n_max_b + 1; }
    int dim() const { return da() * db(); }

    static DensityMatrix vacuum(int n_max_a, int n_max_b) {
        DensityMatrix r;
        r.n_max_a = n_max_a;
        r.n_max_b = n_max_b;
        r.mat = Eigen::MatrixXcd::Zero(r.dim(), r.dim());
        r.mat(0, 0) = 1.0;
        return r;
    }

    static DensityMatrix fock_state(int n_max_a, int n_max_b, int na, int nb) {
        DensityMatrix r = vacuum(n_max_a, n_max_b);
        r.mat(0, 0) = 0.0;
        const int i = na * r.db() + nb;
        r.mat(i, i) = 1.0;
        return r;
    }

    /// Population in the outermost Fock layer (n_a = n_max_a or n_b = n_max_b).
    double boundary_population() const {
        double pop = 0.0;
        for (int ib = 0; ib <= n_max_b; ++ib)
            pop += mat(n_max_a * db() + ib, n_max_a * db() + ib).real();
        for (int ia = 0; ia < n_max_a; ++ia)
            pop += mat(ia * db() + n_max_b, ia * db() + n_max_b).real();
        return pop;
    }
};

namespace detail {

// Ladder-operator action by index arithmetic; no supermatrix is ever built.
// Mode a shifts the composite index by db, mode b by 1.

inline Eigen::MatrixXcd lower_left(const DensityMatrix& r, bool mode_a) {
    // a rho (or b rho)
    const int da = r.da(), db = r.db(), dim = r.dim();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    const int nmax = mode_a ? r.n_max_a : r.n_max_b;
    const int stride = mode_a ? db : 1;
    for (int ia = 0; ia < da; ++ia)
        for (int ib = 0; ib < db; ++ib) {
            const int n = mode_a ? ia : ib;
            if (n == nmax) continue;
            const int i = ia * db + ib;
            out.row(i) = std::sqrt(double(n + 1)) * r.mat.row(i + stride);
        }
    return out;
}

inline Eigen::MatrixXcd raise_left(const DensityMatrix& r, bool mode_a) {
    // a† rho (or b† rho)
    const int da = r.da(), db = r.db(), dim = r.dim();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    const int stride = mode_a ? db : 1;
    for (int ia = 0; ia < da; ++ia)
        for (int ib = 0; ib < db; ++ib) {
            const int n = mode_a ? ia : ib;
            if (n == 0) continue;
            const int i = ia * db + ib;
            out.row(i) = std::sqrt(double(n)) * r.mat.row(i - stride);
        }
    return out;
}

inline Eigen::MatrixXcd lower_right(const DensityMatrix& r, bool mode_a) {
    // rho a
    const int da = r.da(), db = r.db(), dim = r.dim();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    const int stride = mode_a ? db : 1;
    for (int ja = 0; ja < da; ++ja)
        for (int jb = 0; jb < db; ++jb) {
            const int n = mode_a ? ja : jb;
            if (n == 0) continue;
            const int j = ja * db + jb;
            out.col(j) = std::sqrt(double(n)) * r.mat.col(j - stride);
        }
    return out;
}

inline Eigen::MatrixXcd raise_right(const DensityMatrix& r, bool mode_a) {
    // rho a†
    const int da = r.da(), db = r.db(), dim = r.dim();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    const int nmax = mode_a ? r.n_max_a : r.n_max_b;
    const int stride = mode_a ? db : 1;
    for (int ja = 0; ja < da; ++ja)
        for (int jb = 0; jb < db; ++jb) {
            const int n = mode_a ? ja : jb;
            if (n == nmax) continue;
            const int j = ja * db + jb;
            out.col(j) = std::sqrt(double(n + 1)) * r.mat.col(j + stride);
        }
    return out;
}

/// Scale row/column i by f(ia, ib); covers N rho, rho N, (N+1) rho, ...
template <class F>
inline Eigen::MatrixXcd scale_left(const DensityMatrix& r, F f) {
    Eigen::MatrixXcd out = r.mat;
    for (int ia = 0; ia < r.da(); ++ia)
        for (int ib = 0; ib < r.db(); ++ib)
            out.row(ia * r.db() + ib) *= f(ia, ib);
    return out;
}
template <class F>
inline Eigen::MatrixXcd scale_right(const DensityMatrix& r, F f) {
    Eigen::MatrixXcd out = r.mat;
    for (int ja = 0; ja < r.da(); ++ja)
        for (int jb = 0; jb < r.db(); ++jb)
            out.col(ja * r.db() + jb) *= f(ja, jb);
    return out;
}

inline DensityMatrix with_mat(const DensityMatrix& like, Eigen::MatrixXcd m) {
    DensityMatrix r = like;
    r.mat = std::move(m);
    return r;
}

}  // namespace detail

/// Right-hand side of the master equation: all eight dissipator groups with
/// their prefactors. Returns d(rho)/dt.
inline DensityMatrix liouvillian_apply(const DerivedCoeffs& k, const DensityMatrix& r) {
    if (r.mat.rows() != r.dim() || r.mat.cols() != r.dim())
        throw DimensionMismatch("density matrix does not match its Fock dims");
    using namespace detail;
    const double c = k.c();
    const double w_adamp = k.kappa / 2.0;
    const double w_again = c * k.C_plus;
    const double w_bdamp = 0.5 * (2.0 * c * k.C_minus + k.kappa);
    const cplx w_dp = c * k.D_plus;
    const cplx w_dm = c * k.D_minus;
    const cplx w_ep = c * k.E_plus;
    const cplx w_em = c * k.E_minus;
    const double w_drv = c * k.drive;

    // shared sub-expressions
    const Eigen::MatrixXcd a_r = lower_left(r, true);            // a rho
    const Eigen::MatrixXcd arad = raise_right(with_mat(r, a_r), true);   // a rho a†
    const Eigen::MatrixXcd ad_r = raise_left(r, true);           // a† rho
    const Eigen::MatrixXcd adra = lower_right(with_mat(r, ad_r), true);  // a† rho a
    const Eigen::MatrixXcd b_r = lower_left(r, false);           // b rho
    const Eigen::MatrixXcd brbd = raise_right(with_mat(r, b_r), false);  // b rho b†
    const Eigen::MatrixXcd adrbd = raise_right(with_mat(r, ad_r), false);  // a† rho b†
    const Eigen::MatrixXcd bra = lower_right(with_mat(r, b_r), true);    // b rho a
    const Eigen::MatrixXcd bdad_r = raise_left(with_mat(r, ad_r), false);  // b† a† rho
    const Eigen::MatrixXcd r_bdad =
        raise_right(with_mat(r, raise_right(r, false)), true);   // rho b† a†
    const Eigen::MatrixXcd ab_r = lower_left(with_mat(r, b_r), true);    // a b rho
    const Eigen::MatrixXcd r_ab =
        lower_right(with_mat(r, lower_right(r, true)), false);   // rho a b

    const Eigen::MatrixXcd na_r = scale_left(r, [](int ia, int) { return double(ia); });
    const Eigen::MatrixXcd r_na = scale_right(r, [](int ja, int) { return double(ja); });
    // a a† with the truncated ladder pair is (N_a + 1) capped to 0 on the top
    // layer; the cap keeps every dissipator group exactly trace-free.
    const int cap = r.n_max_a;
    const Eigen::MatrixXcd na1_r = scale_left(
        r, [cap](int ia, int) { return ia < cap ? double(ia + 1) : 0.0; });
    const Eigen::MatrixXcd r_na1 = scale_right(
        r, [cap](int ja, int) { return ja < cap ? double(ja + 1) : 0.0; });
    const Eigen::MatrixXcd nb_r = scale_left(r, [](int, int ib) { return double(ib); });
    const Eigen::MatrixXcd r_nb = scale_right(r, [](int, int jb) { return double(jb); });

    Eigen::MatrixXcd out = w_adamp * (2.0 * arad - na_r - r_na);
    out += w_again * (2.0 * adra - r_na1 - na1_r);
    out += w_bdamp * (2.0 * brbd - r_nb - nb_r);
    out += w_dp * (brbd - adra - nb_r + na1_r);
    out += w_dm * (brbd - adra - r_nb + r_na1);
    out += w_ep * (adrbd - bdad_r + bra - ab_r);
    out += w_em * (adrbd - r_bdad + bra - r_ab);
    out += w_drv * (bdad_r - r_bdad - ab_r + r_ab);
    return detail::with_mat(r, std::move(out));
}

/// Documented step-size heuristic for evolve(); overridable by passing an
/// explicit dt.
inline double default_fock_dt(const DerivedCoeffs& k) {
    const double rate =
        (k.A / k.B) * std::max({k.C_plus, k.C_minus, std::abs(k.E_plus)});
    return 0.01 / std::max(k.kappa, rate);
}

struct EvolveStats {
    double max_herm_correction = 0.0;  // largest re-symmetrization applied
    double trace_dev = 0.0;            // |trace - 1| at the end
    long steps = 0;
};

/// RK4 integration of the master equation. Re-symmetrizes each step and
/// records the applied correction; aborts if the top Fock layer exceeds
/// boundary_tol.
inline DensityMatrix evolve(const DerivedCoeffs& k, const FockConfig& cfg,
                            const DensityMatrix& rho0, double t_final, double dt,
                            EvolveStats* stats = nullptr) {
    cfg.validate();
    if (!(t_final >= 0.0)) throw InvalidParams("t_final must be >= 0");
    if (dt <= 0.0) dt = default_fock_dt(k);

    DensityMatrix r = rho0;
    EvolveStats st;
    const long n_steps = static_cast<long>(std::ceil(t_final / dt - 1e-12));
    for (long i = 0; i < n_steps; ++i) {
        const double h = std::min(dt, t_final - i * dt);
        const DensityMatrix k1 = liouvillian_apply(k, r);
        DensityMatrix tmp = detail::with_mat(r, r.mat + (h / 2.0) * k1.mat);
        const DensityMatrix k2 = liouvillian_apply(k, tmp);
        tmp.mat = r.mat + (h / 2.0) * k2.mat;
        const DensityMatrix k3 = liouvillian_apply(k, tmp);
        tmp.mat = r.mat + h * k3.mat;
        const DensityMatrix k4 = liouvillian_apply(k, tmp);
        r.mat += (h / 6.0) * (k1.mat + 2.0 * k2.mat + 2.0 * k3.mat + k4.mat);

        const Eigen::MatrixXcd herm = (r.mat + r.mat.adjoint()) / 2.0;
        st.max_herm_correction =
            std::max(st.max_herm_correction, (r.mat - herm).cwiseAbs().maxCoeff());
        r.mat = herm;
        r.time += h;
        ++st.steps;

        if (!r.mat.allFinite()) throw NonFinite("Fock evolution overflowed");
        if (r.boundary_population() > cfg.boundary_tol)
            throw TruncationOverflow("top Fock layer population exceeds boundary_tol");
    }
    st.trace_dev = std::abs(r.mat.trace() - 1.0);
    if (stats) *stats = st;
    return r;
}

/// First and second moments by direct trace against ladder matrix elements.
inline MomentState moments_of(const DensityMatrix& r) {
    const int da = r.da(), db = r.db();
    MomentState st;
    st.t = r.time;
    cplx ma = 0, mb = 0, m = 0;
    double na = 0, nb = 0;
    for (int ia = 0; ia < da; ++ia)
        for (int ib = 0; ib < db; ++ib) {
            const int i = ia * db + ib;
            const double diag = r.mat(i, i).real();
            na += ia * diag;
            nb += ib * diag;
            // <a> = tr(rho a) = sum sqrt(ia) rho[i, i - db]
            if (ia > 0) ma += std::sqrt(double(ia)) * r.mat(i, i - db);
            if (ib > 0) mb += std::sqrt(double(ib)) * r.mat(i, i - 1);
            // <a b> = tr(rho a b) = sum sqrt(ia ib) rho[i, i - db - 1]
            if (ia > 0 && ib > 0)
                m += std::sqrt(double(ia) * double(ib)) * r.mat(i, i - db - 1);
        }
    st.first = {ma, mb};
    st.second = {na, nb, m};
    return st;
}

struct FockDiagnostics {
    double trace_dev;
    double herm_dev;
    double min_eigenvalue;  // may be slightly negative; reported, not asserted
    double boundary_pop;
};

inline FockDiagnostics diagnostics(const DensityMatrix& r) {
    FockDiagnostics d;
    d.trace_dev = std::abs(r.mat.trace() - 1.0);
    d.herm_dev = (r.mat - r.mat.adjoint()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        (r.mat + r.mat.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    d.boundary_pop = r.boundary_population();
    return d;
}

/// Binary snapshot: int32 n_max_a, int32 n_max_b, float64 time, then the
/// row-major matrix as (re, im) float64 pairs. Little-endian host assumed.
inline void save_snapshot(const DensityMatrix& r, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open snapshot file: " + path);
    const std::int32_t na = r.n_max_a, nb = r.n_max_b;
    f.write(reinterpret_cast<const char*>(&na), 4);
    f.write(reinterpret_cast<const char*>(&nb), 4);
    f.write(reinterpret_cast<const char*>(&r.time), 8);
    for (int i = 0; i < r.dim(); ++i)
        for (int j = 0; j < r.dim(); ++j) {
            const double re = r.mat(i, j).real(), im = r.mat(i, j).imag();
            f.write(reinterpret_cast<const char*>(&re), 8);
            f.write(reinterpret_cast<const char*>(&im), 8);
        }
}

inline DensityMatrix load_snapshot(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open snapshot file: " + path);
    std::int32_t na = 0, nb = 0;
    double time = 0.0;
    f.read(reinterpret_cast<char*>(&na), 4);
    f.read(reinterpret_cast<char*>(&nb), 4);
    f.read(reinterpret_cast<char*>(&time), 8);
    DensityMatrix r = DensityMatrix::vacuum(na, nb);
    r.time = time;
    for (int i = 0; i < r.dim(); ++i)
        for (int j = 0; j < r.dim(); ++j) {
            double re = 0, im = 0;
            f.read(reinterpret_cast<char*>(&re), 8);
            f.read(reinterpret_cast<char*>(&im), 8);
            r.mat(i, j) = {re, im};
        }
    if (!f) throw std::runtime_error("truncated snapshot file: " + path);
    return r;
}

}  // namespace cbl
