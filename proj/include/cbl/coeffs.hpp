#pragma once

#include <cmath>
#include <complex>

#include "cbl/params.hpp"

namespace cbl {

/// All dimensionless/derived scalars of the master equation and the
/// Langevin system. In Gaussian-averaged mode every entry is real except
/// epsilon, which may be pure imaginary (Z^2 < 0 is legal below threshold
/// oscillation). In fixed-phase mode the coherence factors are complex and
/// the propagator scalars (lambda, epsilon, p, q_pm, Z) are populated with
/// the same algebra; treat those as extrapolated rather than derived.
struct DerivedCoeffs {
    bool averaged = true;
    double kappa = 0.0;

    double zeta = 0.0;   // Omega / gamma
    double zetap = 0.0;  // Omega / Gamma
    double chi = 0.0;    // gamma / Gamma
    double A = 0.0;      // 2 r_a g^2 / gamma^2
    double B = 0.0;      // (4 + zeta^2)(1 + zetap*zeta)

    cplx Theta_p;  // coherence factor on the exp(-i*phi) side
    cplx Theta_m;  // coherence factor on the exp(+i*phi) side

    double C_plus = 0.0;
    double C_minus = 0.0;
    cplx D_plus, D_minus;
    cplx E_plus, E_minus;
    double drive = 0.0;  // zetap * (1 + zetap*zeta), the driving-only term

    // Langevin drift scalars: d alpha = -a_plus alpha - b_plus beta* + f_a
    cplx a_plus, a_minus;
    cplx b_plus, b_minus;

    // Propagator scalars: lambda = (a_plus + a_minus)/2,
    // epsilon^2 = ((a_plus - a_minus)/2)^2 + b_plus*b_minus, Z = 2B eps / A.
    cplx lambda;
    cplx epsilon;
    cplx Z;
    cplx p;
    cplx q_plus, q_minus;

    /// A / 2B, the ubiquitous master-equation prefactor.
    double c() const { return A / (2.0 * B); }
};

/// Delta-correlation coefficients of the Langevin noise forces. All pairings
/// other than <f_a f_a*> and <f_b f_a> (plus the conjugate <f_b* f_a*>)
/// vanish identically.
struct NoiseDiffusion {
    cplx D_aa;  // <f_a(t') f_a*(t)> = D_aa delta(t - t')
    cplx D_ba;  // <f_b(t') f_a(t)> = D_ba delta(t - t')
};

inline DerivedCoeffs derive_coeffs(const PhysicalParams& par) {
    par.validate();
    DerivedCoeffs k;
    k.averaged = is_averaged(par.phase);
    k.kappa = par.kappa;
    k.zeta = par.Omega / par.gamma;
    k.zetap = par.Omega / par.Gamma;
    k.chi = par.gamma / par.Gamma;
    k.A = 2.0 * par.r_a * par.g * par.g / (par.gamma * par.gamma);
    k.B = (4.0 + k.zeta * k.zeta) * (1.0 + k.zetap * k.zeta);

    const double root = std::sqrt(std::max(0.0, 1.0 - par.eta * par.eta));
    const cplx pv = phase_value(par.phase);
    k.Theta_p = pv * root;
    k.Theta_m = std::conj(pv) * root;

    const double zz = k.zetap * k.zeta;
    const double cross = zz - 2.0 * k.chi;
    k.C_plus = 2.0 * k.zetap * k.zetap + 2.0 * k.chi + par.eta * cross;
    k.C_minus = 2.0 * k.zetap * k.zetap + 2.0 * k.chi - par.eta * cross;
    k.D_plus = (2.0 * k.zetap + k.zeta) * k.Theta_m;
    k.D_minus = (2.0 * k.zetap + k.zeta) * k.Theta_p;
    k.E_plus = 3.0 * par.eta * k.zetap - (2.0 - zz) * k.Theta_m;
    k.E_minus = 3.0 * par.eta * k.zetap - (2.0 - zz) * k.Theta_p;
    k.drive = k.zetap * (1.0 + zz);

    const double c = k.c();
    const double sq = 2.0 * (k.zetap * k.zetap + k.chi);
    k.a_plus = par.kappa / 2.0 + c * (k.D_minus - sq - par.eta * cross);
    k.a_minus = par.kappa / 2.0 + c * (k.D_plus + sq - par.eta * cross);
    k.b_plus = -c * (k.drive + k.E_minus);
    k.b_minus = -c * (k.drive - k.E_plus);

    k.lambda = (k.a_plus + k.a_minus) / 2.0;
    const cplx half_diff = (k.a_plus - k.a_minus) / 2.0;
    k.epsilon = std::sqrt(half_diff * half_diff + k.b_plus * k.b_minus);
    k.Z = 2.0 * k.B * k.epsilon / k.A;
    // p and q_pm carry a removable 1/epsilon; downstream kernel evaluation
    // always multiplies them back by sinh(eps t).
    k.p = (k.a_minus - k.a_plus) / (2.0 * k.epsilon);
    k.q_plus = k.b_plus / k.epsilon;
    k.q_minus = k.b_minus / k.epsilon;
    return k;
}

/// Stability margin lambda - Re(epsilon); positive means the propagators
/// decay and a steady state exists. For pure-imaginary epsilon the margin
/// is lambda itself.
inline double threshold_margin(const DerivedCoeffs& k) {
    return k.lambda.real() - k.epsilon.real();
}

inline NoiseDiffusion noise_diffusion(const DerivedCoeffs& k) {
    const double c = k.c();
    NoiseDiffusion nd;
    // D_aa = (A/B)[C_plus - (2 zetap + zeta) Theta]; written via the
    // symmetrized D so it stays real in fixed mode as well.
    nd.D_aa = c * (2.0 * k.C_plus - k.D_plus - k.D_minus);
    nd.D_ba = c * (k.drive - k.E_plus);
    return nd;
}

}  // namespace cbl
