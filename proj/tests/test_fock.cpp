#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <random>

#include "cbl/fock.hpp"

using namespace cbl;

namespace {

PhysicalParams reference_point() {
    PhysicalParams p;
    p.g = 0.2;
    p.r_a = 10.0;
    p.gamma = 1.0;
    p.Gamma = 1.0;
    p.Omega = 1.0;
    p.kappa = 0.2;
    return p;
}

DensityMatrix random_state(std::mt19937_64& rng, int na, int nb) {
    // random positive unit-trace Hermitian matrix
    DensityMatrix r = DensityMatrix::vacuum(na, nb);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXcd G(r.dim(), r.dim());
    for (int i = 0; i < r.dim(); ++i)
        for (int j = 0; j < r.dim(); ++j) G(i, j) = cplx(n(rng), n(rng));
    r.mat = G * G.adjoint();
    r.mat /= r.mat.trace();
    return r;
}

}  // namespace

TEST_CASE("the generator is trace-free") {
    std::mt19937_64 rng(51);
    for (int i = 0; i < 20; ++i) {
        PhysicalParams p = reference_point();
        p.eta = -1.0 + 0.1 * i;
        if (i % 2) p.phase = FixedPhase{0.3 * i};
        const auto k = derive_coeffs(p);
        const auto r = random_state(rng, 4, 4);
        const auto d = liouvillian_apply(k, r);
        CHECK(std::abs(d.mat.trace()) < 1e-13 * d.mat.cwiseAbs().maxCoeff() * d.dim());
    }
}

TEST_CASE("the generator preserves Hermiticity in both phase modes") {
    std::mt19937_64 rng(53);
    for (int i = 0; i < 20; ++i) {
        PhysicalParams p = reference_point();
        p.eta = 0.7 - 0.07 * i;
        p.phase = (i % 2) ? PhaseMode{FixedPhase{0.5 + 0.2 * i}}
                          : PhaseMode{GaussianAveraged{0.1 * i}};
        const auto k = derive_coeffs(p);
        const auto r = random_state(rng, 4, 3);
        const auto d = liouvillian_apply(k, r);
        CHECK((d.mat - d.mat.adjoint()).cwiseAbs().maxCoeff() <
              1e-13 * std::max(1.0, d.mat.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("with negligible gain the cavity decays at kappa") {
    PhysicalParams p = reference_point();
    p.g = 1e-120;  // A ~ 1e-240: pure cavity damping remains
    const auto k = derive_coeffs(p);
    const auto r = DensityMatrix::fock_state(5, 5, 1, 0);
    const auto d = liouvillian_apply(k, r);
    const auto rates = moments_of(d);
    CHECK(std::abs(rates.second.n_a - (-p.kappa * 1.0)) < 1e-12);
    CHECK(std::abs(rates.second.n_b) < 1e-12);
}

TEST_CASE("moment extraction on hand-built states") {
    const auto f21 = DensityMatrix::fock_state(4, 4, 2, 1);
    auto m = moments_of(f21);
    CHECK(std::abs(m.second.n_a - 2.0) < 1e-14);
    CHECK(std::abs(m.second.n_b - 1.0) < 1e-14);
    CHECK(std::abs(m.second.m) < 1e-14);
    CHECK(std::abs(m.first.mean_a) < 1e-14);

    // (|00> + |11>)/sqrt2: n_a = n_b = 1/2, <ab> = 1/2, <a> = 0
    DensityMatrix bell = DensityMatrix::vacuum(3, 3);
    bell.mat.setZero();
    const int i00 = 0, i11 = 1 * bell.db() + 1;
    bell.mat(i00, i00) = 0.5;
    bell.mat(i11, i11) = 0.5;
    bell.mat(i00, i11) = 0.5;
    bell.mat(i11, i00) = 0.5;
    m = moments_of(bell);
    CHECK(std::abs(m.second.n_a - 0.5) < 1e-14);
    CHECK(std::abs(m.second.n_b - 0.5) < 1e-14);
    CHECK(std::abs(m.second.m - cplx(0.5, 0.0)) < 1e-14);
    CHECK(std::abs(m.first.mean_a) < 1e-14);

    // coherent-superposition in one mode: (|0> + |1>)/sqrt2 (x) |0>
    DensityMatrix plus = DensityMatrix::vacuum(3, 3);
    plus.mat.setZero();
    const int i10 = 1 * plus.db();
    plus.mat(i00, i00) = 0.5;
    plus.mat(i10, i10) = 0.5;
    plus.mat(i00, i10) = 0.5;
    plus.mat(i10, i00) = 0.5;
    m = moments_of(plus);
    CHECK(std::abs(m.first.mean_a - cplx(0.5, 0.0)) < 1e-14);
    CHECK(std::abs(m.second.n_a - 0.5) < 1e-14);
}

TEST_CASE("short-time evolution tracks the moment ODEs") {
    const auto k = derive_coeffs(reference_point());
    FockConfig fc;
    fc.n_max_a = 8;
    fc.n_max_b = 8;
    EvolveStats st;
    const auto rho = evolve(k, fc, DensityMatrix::vacuum(8, 8), 2.0, 0.0, &st);
    const auto fm = moments_of(rho);
    const auto ode = propagate_expm(k, MomentState{}, 2.0);
    CHECK(std::abs(fm.second.n_a - ode.second.n_a) < 1e-5);
    CHECK(std::abs(fm.second.n_b - ode.second.n_b) < 1e-5);
    CHECK(std::abs(fm.second.m - ode.second.m) < 1e-5);
    CHECK(st.trace_dev < 1e-10);
    CHECK(st.max_herm_correction < 1e-12);

    const auto diag = diagnostics(rho);
    CHECK(diag.herm_dev < 1e-14);
    CHECK(diag.min_eigenvalue > -1e-10);
    CHECK(diag.boundary_pop < 1e-5);
}

TEST_CASE("fixed-phase evolution stays physical") {
    PhysicalParams p = reference_point();
    p.phase = FixedPhase{0.7};
    const auto k = derive_coeffs(p);
    FockConfig fc;
    fc.n_max_a = 7;
    fc.n_max_b = 7;
    const auto rho = evolve(k, fc, DensityMatrix::vacuum(7, 7), 2.0, 0.0);
    const auto diag = diagnostics(rho);
    CHECK(diag.trace_dev < 1e-10);
    CHECK(diag.min_eigenvalue > -1e-9);
    const auto fm = moments_of(rho);
    const auto ode = propagate_expm(k, MomentState{}, 2.0);
    CHECK(std::abs(fm.second.m - ode.second.m) < 1e-4);
}

TEST_CASE("a too-small truncation is detected, not silently wrong") {
    const auto k = derive_coeffs(reference_point());
    FockConfig fc;
    fc.n_max_a = 2;
    fc.n_max_b = 2;
    fc.boundary_tol = 1e-3;
    CHECK_THROWS_AS(evolve(k, fc, DensityMatrix::vacuum(2, 2), 20.0, 0.0),
                    TruncationOverflow);
}

TEST_CASE("boundary population bookkeeping") {
    CHECK(DensityMatrix::fock_state(4, 4, 4, 2).boundary_population() == 1.0);
    CHECK(DensityMatrix::fock_state(4, 4, 1, 4).boundary_population() == 1.0);
    CHECK(DensityMatrix::fock_state(4, 4, 1, 2).boundary_population() == 0.0);
}

TEST_CASE("snapshot round-trip is exact") {
    std::mt19937_64 rng(57);
    auto r = random_state(rng, 5, 3);
    r.time = 3.75;
    const std::string path = "snapshot_test.rho";
    save_snapshot(r, path);
    const auto back = load_snapshot(path);
    std::remove(path.c_str());
    REQUIRE(back.n_max_a == 5);
    REQUIRE(back.n_max_b == 3);
    CHECK(back.time == r.time);
    CHECK((back.mat - r.mat).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mismatched dimensions are rejected") {
    const auto k = derive_coeffs(reference_point());
    DensityMatrix r = DensityMatrix::vacuum(3, 3);
    r.mat = Eigen::MatrixXcd::Identity(5, 5);
    CHECK_THROWS_AS(liouvillian_apply(k, r), DimensionMismatch);
}
