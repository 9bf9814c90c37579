#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "cbl/analytic.hpp"
#include "cbl/moments.hpp"

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

PhysicalParams random_stable(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        PhysicalParams p;
        p.g = 0.05 + 0.3 * u(rng);
        p.r_a = 0.5 + 10.0 * u(rng);
        p.gamma = 0.3 + 1.5 * u(rng);
        p.Gamma = 0.3 + 1.5 * u(rng);
        p.Omega = 2.0 * u(rng);
        p.kappa = 0.1 + u(rng);
        p.eta = -1.0 + 2.0 * u(rng);
        p.phase = GaussianAveraged{1.5 * u(rng)};
        if (threshold_margin(derive_coeffs(p)) > 1e-3) return p;
    }
}

}  // namespace

TEST_CASE("kernels at t = 0 are the identity") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 50; ++i) {
        const auto k = derive_coeffs(random_stable(rng));
        const auto pk = kernels(k, 0.0);
        CHECK(std::abs(pk.F_plus - 1.0) < 1e-14);
        CHECK(std::abs(pk.F_minus - 1.0) < 1e-14);
        CHECK(std::abs(pk.G_plus) < 1e-14);
        CHECK(std::abs(pk.G_minus) < 1e-14);
    }
}

TEST_CASE("frozen kernel value at the reference point") {
    const auto k = derive_coeffs(reference_point());
    const auto pk = kernels(k, 5.0);
    // e^{-1.1} [cosh(0.2 sqrt 19) + (4 / sqrt 19) sinh(0.2 sqrt 19)]
    const double s19 = std::sqrt(19.0);
    const double expect = std::exp(-1.1) * (std::cosh(0.2 * s19) +
                                            (4.0 / s19) * std::sinh(0.2 * s19));
    CHECK(std::abs(pk.F_plus.real() - expect) < 1e-14);
    CHECK(std::abs(expect - 0.7689119380) < 1e-9);
}

TEST_CASE("kernels equal the exact first-moment propagator") {
    std::mt19937_64 rng(33);
    for (int i = 0; i < 50; ++i) {
        const auto k = derive_coeffs(random_stable(rng));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        MomentState s0;
        s0.first = {cplx(u(rng) - 0.5, u(rng) - 0.5),
                    cplx(u(rng) - 0.5, u(rng) - 0.5)};
        const double t = 8.0 * u(rng);
        const auto exact = propagate_expm(k, s0, t);
        const auto f = mean_field(k, s0.first, t);
        CHECK(std::abs(f.mean_a - exact.first.mean_a) < 1e-11);
        CHECK(std::abs(f.mean_b - exact.first.mean_b) < 1e-11);
    }
}

TEST_CASE("degenerate epsilon = 0 point has the algebraic limit form") {
    // Omega = 0, eta = 0, theta = 0, gamma = Gamma: epsilon vanishes exactly
    PhysicalParams p;
    p.g = 0.2;
    p.r_a = 10.0;
    p.gamma = 1.0;
    p.Gamma = 1.0;
    p.Omega = 0.0;
    p.kappa = 0.9;
    const auto k = derive_coeffs(p);
    REQUIRE(std::abs(k.epsilon) < 1e-9);
    for (double t : {0.5, 2.0, 7.0}) {
        const auto pk = kernels(k, t);
        const double lam = k.lambda.real();
        const double expect = std::exp(-lam * t) * (1.0 + (k.A / k.B) * t);
        CHECK(std::abs(pk.F_plus.real() - expect) < 1e-12);
    }
}

TEST_CASE("kernels and closed-form moments are continuous across Z^2 = 0") {
    PhysicalParams p;
    p.g = 0.2;
    p.r_a = 10.0;
    p.gamma = 1.0;
    p.Omega = 0.0;
    p.kappa = 0.9;
    // Gamma near gamma sweeps epsilon^2 through zero (sign flips with chi - 1)
    for (double t : {1.0, 6.0}) {
        PhysicalParams pm = p, pz = p, pp = p;
        pm.Gamma = 1.0 - 1e-7;
        pz.Gamma = 1.0;
        pp.Gamma = 1.0 + 1e-7;
        const auto km = derive_coeffs(pm);
        const auto kz = derive_coeffs(pz);
        const auto kp = derive_coeffs(pp);
        CHECK((km.epsilon * km.epsilon).real() *
                  (kp.epsilon * kp.epsilon).real() <
              0.0);
        const auto fm = kernels(km, t).F_plus;
        const auto fz = kernels(kz, t).F_plus;
        const auto fp = kernels(kp, t).F_plus;
        CHECK(std::abs(fm - fz) < 1e-6);
        CHECK(std::abs(fp - fz) < 1e-6);
        const auto sm = second_moments_closed(km, SecondMoments{}, t);
        const auto sz = second_moments_closed(kz, SecondMoments{}, t);
        const auto sp = second_moments_closed(kp, SecondMoments{}, t);
        CHECK(std::abs(sm.n_a - sz.n_a) < 1e-5);
        CHECK(std::abs(sp.n_a - sz.n_a) < 1e-5);
        CHECK(std::abs(sm.m - sz.m) < 1e-5);
        CHECK(std::abs(sp.m - sz.m) < 1e-5);
    }
}

TEST_CASE("noise-kernel primitives match direct quadrature") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const cplx lam(0.1 + u(rng), 0.0);
        cplx eps;
        switch (i % 3) {
            case 0: eps = cplx(0.3 * u(rng), 0.0); break;
            case 1: eps = cplx(0.0, 0.3 * u(rng)); break;  // Z^2 < 0
            case 2: eps = cplx(1e-6 * u(rng), 0.0); break;  // near-degenerate
        }
        const double t = 0.5 + 8.0 * u(rng);
        const auto ki = detail::kernel_integrals(lam, eps, t);
        // Simpson quadrature of the defining integrals
        const int n = 20000;
        const double h = t / n;
        cplx icc = 0, ics = 0, iss = 0;
        for (int j = 0; j <= n; ++j) {
            const double tau = j * h;
            const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            const cplx e = std::exp(-2.0 * lam * tau);
            const cplx ch = std::cosh(eps * tau);
            const cplx sc = detail::sinhc(eps, tau);
            icc += w * e * ch * ch;
            ics += w * e * ch * sc;
            iss += w * e * sc * sc;
        }
        icc *= h / 3.0;
        ics *= h / 3.0;
        iss *= h / 3.0;
        CHECK(std::abs(ki.Icc - icc) < 1e-8 * std::max(1.0, std::abs(icc)));
        CHECK(std::abs(ki.Ics - ics) < 1e-8 * std::max(1.0, std::abs(ics)));
        CHECK(std::abs(ki.Iss - iss) < 1e-8 * std::max(1.0, std::abs(iss)));
    }
}

TEST_CASE("closed-form second moments match the exact ODE solution") {
    std::mt19937_64 rng(41);
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
        const auto k = derive_coeffs(random_stable(rng));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        SecondMoments s0;
        if (i % 2) s0 = {0.8 * u(rng), 0.8 * u(rng), cplx(0.3 * u(rng), 0.0)};
        for (double t : {0.5, 3.0, 15.0}) {
            MomentState st0;
            st0.second = s0;
            const auto exact = propagate_expm(k, st0, t).second;
            const auto cf = second_moments_closed(k, s0, t);
            worst = std::max({worst, std::abs(cf.n_a - exact.n_a),
                              std::abs(cf.n_b - exact.n_b),
                              std::abs(cf.m - exact.m)});
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("closed form refuses fixed-phase mode") {
    PhysicalParams p = reference_point();
    p.phase = FixedPhase{0.4};
    const auto k = derive_coeffs(p);
    CHECK_THROWS_AS(second_moments_closed(k, SecondMoments{}, 1.0), InvalidParams);
}
