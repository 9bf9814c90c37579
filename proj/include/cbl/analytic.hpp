#pragma once

#include <cmath>
#include <complex>

#include "cbl/coeffs.hpp"
#include "cbl/moments.hpp"
#include "cbl/params.hpp"

namespace cbl {

struct PropagatorKernels {
    cplx F_plus, F_minus;
    cplx G_plus, G_minus;
};

namespace detail {

/// sinh(eps t) / eps, analytic in eps (series near eps t = 0, so the
/// Z^2 = 0 degeneracy is crossed smoothly).
inline cplx sinhc(cplx eps, double t) {
    const cplx x = eps * t;
    if (std::abs(x) < 1e-5) {
        const cplx x2 = x * x;
        return t * (1.0 + x2 / 6.0 + x2 * x2 / 120.0);
    }
    return std::sinh(x) / eps;
}

/// J(x, t) = int_0^t exp(x tau) dtau
inline cplx expint_j(cplx x, double t) {
    const cplx xt = x * t;
    if (std::abs(xt) < 1e-6)
        return t * (1.0 + xt / 2.0 + xt * xt / 6.0 + xt * xt * xt / 24.0);
    return (std::exp(xt) - 1.0) / x;
}

/// P_n(x, t) = int_0^t tau^n exp(x tau) dtau
inline cplx expint_p(int n, cplx x, double t) {
    if (std::abs(x * t) < 1e-3) {
        // P_n = t^{n+1} sum_k (x t)^k / (k! (n+k+1))
        cplx sum = 0.0, term = 1.0;
        for (int k = 0; k <= 8; ++k) {
            sum += term / double(n + k + 1);
            term *= x * t / double(k + 1);
        }
        return std::pow(t, n + 1) * sum;
    }
    cplx p = expint_j(x, t);
    double tn = 1.0;
    for (int j = 1; j <= n; ++j) {
        tn *= t;
        p = (tn * std::exp(x * t) - double(j) * p) / x;
    }
    return p;
}

/// The three primitive noise-kernel integrals with weight exp(-2 lambda tau):
/// Icc = int cosh^2(eps tau), Ics = int cosh sinh/eps, Iss = int (sinh/eps)^2.
struct KernelIntegrals {
    cplx Icc, Ics, Iss;
};

inline KernelIntegrals kernel_integrals(cplx lambda, cplx eps, double t) {
    const cplx c0 = -2.0 * lambda;
    const cplx mu = 2.0 * eps;
    const cplx J0 = expint_j(c0, t);
    KernelIntegrals ki;
    if (std::abs(mu * t) < 1e-4) {
        const cplx mu2 = mu * mu;
        // K1 = P1 + mu^2/6 P3, K2 = P2/2 + mu^2/24 P4
        ki.Ics = expint_p(1, c0, t) + mu2 / 6.0 * expint_p(3, c0, t);
        ki.Iss = 2.0 * (expint_p(2, c0, t) / 2.0 + mu2 / 24.0 * expint_p(4, c0, t));
        const cplx K0 = J0 + mu2 / 2.0 * expint_p(2, c0, t) +
                        mu2 * mu2 / 24.0 * expint_p(4, c0, t);
        ki.Icc = (K0 + J0) / 2.0;
    } else {
        const cplx Jp = expint_j(c0 + mu, t);
        const cplx Jm = expint_j(c0 - mu, t);
        const cplx K0 = (Jp + Jm) / 2.0;
        ki.Icc = (K0 + J0) / 2.0;
        ki.Ics = (Jp - Jm) / (2.0 * mu);
        ki.Iss = 2.0 * (K0 - J0) / (mu * mu);
    }
    return ki;
}

}  // namespace detail

/// Homogeneous propagator kernels F_pm(t), G_pm(t). Valid in both phase
/// modes (they are the exact 2x2 exponential of the first-moment drift);
/// the fixed-phase case is an extrapolation of the averaged-mode algebra.
inline PropagatorKernels kernels(const DerivedCoeffs& k, double t) {
    if (!(t >= 0.0)) throw InvalidParams("t must be >= 0");
    const cplx decay = std::exp(-k.lambda * t);
    const cplx ch = std::cosh(k.epsilon * t);
    const cplx sc = detail::sinhc(k.epsilon, t);
    const cplx d = (k.a_minus - k.a_plus) / 2.0;  // p * sinh = d * sinhc
    PropagatorKernels pk;
    pk.F_plus = decay * (ch + d * sc);
    pk.F_minus = decay * (ch - d * sc);
    pk.G_plus = -k.b_plus * decay * sc;
    pk.G_minus = -k.b_minus * decay * sc;
    return pk;
}

/// Mean-field evolution; the noise forces average to zero.
inline FirstMoments mean_field(const DerivedCoeffs& k, const FirstMoments& f0,
                               double t) {
    const PropagatorKernels pk = kernels(k, t);
    FirstMoments f;
    f.mean_a = pk.F_plus * f0.mean_a + pk.G_plus * std::conj(f0.mean_b);
    f.mean_b = pk.F_minus * f0.mean_b + pk.G_minus * std::conj(f0.mean_a);
    return f;
}

/// Closed-form second moments: homogeneous propagation plus the noise-kernel
/// integrals evaluated as sums of exponentials. Averaged mode only; this is
/// the independent analytic route against the moment ODEs.
inline SecondMoments second_moments_closed(const DerivedCoeffs& k,
                                           const SecondMoments& s0, double t) {
    if (!k.averaged)
        throw InvalidParams("closed-form second moments require averaged mode");
    if (!(t >= 0.0)) throw InvalidParams("t must be >= 0");

    const PropagatorKernels pk = kernels(k, t);
    const NoiseDiffusion nd = noise_diffusion(k);
    const double Daa = nd.D_aa.real();
    const double Dba = nd.D_ba.real();
    const double bp = k.b_plus.real();
    const double bm = k.b_minus.real();
    const cplx d = (k.a_minus - k.a_plus) / 2.0;

    const auto ki = detail::kernel_integrals(k.lambda, k.epsilon, t);
    // integrals of products of k_pm(tau) = e^{-l tau}(cosh + d sinhc) and
    // s(tau) = e^{-l tau} sinhc
    const double Ikk_p = (ki.Icc + 2.0 * d * ki.Ics + d * d * ki.Iss).real();
    const double Ikk_m = (ki.Icc - 2.0 * d * ki.Ics + d * d * ki.Iss).real();
    const double Ikk_pm = (ki.Icc - d * d * ki.Iss).real();
    const double Iks_p = (ki.Ics + d * ki.Iss).real();
    const double Iks_m = (ki.Ics - d * ki.Iss).real();
    const double Iss = ki.Iss.real();

    SecondMoments s;
    s.n_a = std::norm(pk.F_plus) * s0.n_a + std::norm(pk.G_plus) * s0.n_b +
            2.0 * std::real(std::conj(pk.F_plus) * pk.G_plus * std::conj(s0.m)) +
            Daa * Ikk_p - 2.0 * bp * Dba * Iks_p;
    s.n_b = std::norm(pk.F_minus) * s0.n_b + std::norm(pk.G_minus) * s0.n_a +
            2.0 * std::real(std::conj(pk.F_minus) * pk.G_minus * std::conj(s0.m)) +
            bm * bm * Daa * Iss - 2.0 * bm * Dba * Iks_m;
    s.m = pk.F_plus * pk.F_minus * s0.m + pk.G_plus * pk.G_minus * std::conj(s0.m) +
          pk.F_plus * pk.G_minus * s0.n_a + pk.G_plus * pk.F_minus * s0.n_b +
          Dba * Ikk_pm - bm * Daa * Iks_p + bp * bm * Dba * Iss;
    return s;
}

}  // namespace cbl
