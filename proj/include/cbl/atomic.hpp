#pragma once

#include <array>
#include <complex>

#include "cbl/coeffs.hpp"
#include "cbl/params.hpp"

namespace cbl {

/// Adiabatic atomic-population/coherence coefficients per unit field
/// density operator: rho_aa = c_aa * rho, etc.
struct AtomicCoeffs {
    cplx c_aa;
    cplx c_cc;
    cplx c_ac;
};

/// Coefficients of a-hat and b-hat-dagger inside rho_ab and rho_cb, each in
/// units of -g r_a / [gamma^2 (4+zeta^2)(1+zeta*zetap)].
struct CrossCoeffs {
    cplx ab_a;
    cplx ab_bdag;
    cplx cb_a;
    cplx cb_bdag;
};

inline AtomicCoeffs adiabatic_populations(const PhysicalParams& p, cplx phase_value) {
    p.validate();
    const double root = std::sqrt(std::max(0.0, 1.0 - p.eta * p.eta));
    const double gG = p.gamma * p.Gamma;
    const double O2 = p.Omega * p.Omega;
    const double denom = gG + O2;
    AtomicCoeffs a;
    a.c_aa = p.r_a * (gG * (1.0 - p.eta) - p.Gamma * p.Omega * root * phase_value + O2) /
             (2.0 * p.Gamma * denom);
    a.c_cc = p.r_a * (gG * (1.0 + p.eta) + p.Gamma * p.Omega * root * phase_value + O2) /
             (2.0 * p.Gamma * denom);
    a.c_ac = p.r_a * (p.Gamma * root * phase_value - p.Omega * p.eta) / (2.0 * denom);
    return a;
}

inline CrossCoeffs adiabatic_cross(const PhysicalParams& p, cplx phase_value) {
    p.validate();
    const double zeta = p.Omega / p.gamma;
    const double zetap = p.Omega / p.Gamma;
    const double chi = p.gamma / p.Gamma;
    const double zz = zetap * zeta;
    const double root = std::sqrt(std::max(0.0, 1.0 - p.eta * p.eta));
    const cplx coh = root * phase_value;
    CrossCoeffs x;
    x.ab_a = 2.0 * (zetap * zetap + chi) + p.eta * (zz - 2.0 * chi) -
             (2.0 * zetap + zeta) * coh;
    x.ab_bdag = zetap * (1.0 + zz) + 3.0 * p.eta * zetap - (2.0 - zz) * coh;
    x.cb_a = zetap * (1.0 + zz) - 3.0 * p.eta * zetap + (2.0 - zz) * coh;
    x.cb_bdag = -(2.0 * (zetap * zetap + chi) - p.eta * (zz - 2.0 * chi) +
                  (2.0 * zetap + zeta) * coh);
    return x;
}

/// Residuals of the adiabatic balance equations; all three vanish for
/// coefficients produced by adiabatic_populations.
inline std::array<cplx, 3> adiabatic_residuals(const PhysicalParams& p,
                                               const AtomicCoeffs& c,
                                               cplx phase_value) {
    const InitialAtom ia = initial_atom(p);
    return {
        p.r_a * ia.rho_aa0 - p.Omega * c.c_ac - p.Gamma * c.c_aa,
        p.r_a * ia.rho_cc0 + p.Omega * c.c_ac - p.Gamma * c.c_cc,
        p.r_a * ia.rho_ac0 * phase_value - (p.Omega / 2.0) * (c.c_cc - c.c_aa) -
            p.gamma * c.c_ac,
    };
}

}  // namespace cbl
