#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <variant>

namespace cbl {

using cplx = std::complex<double>;

struct InvalidParams : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct Unstable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncationOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnphysicalCovariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateIntensity : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FactorizationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Preparation-phase model: either a Gaussian-distributed phase averaged
/// out (leaving only its variance theta), or a deterministic locked phase.
struct GaussianAveraged {
    double theta = 0.0;  // phase variance, >= 0
};
struct FixedPhase {
    double phi = 0.0;  // locked phase angle in [0, 2pi)
};
using PhaseMode = std::variant<GaussianAveraged, FixedPhase>;

inline bool is_averaged(const PhaseMode& m) {
    return std::holds_alternative<GaussianAveraged>(m);
}

/// Raw model knobs. All rates are conventionally quoted in units of the
/// dephasing rate gamma (i.e. gamma = 1); this is a documentation
/// convention, not enforced.
struct PhysicalParams {
    double g = 1.0;       // atom-field coupling
    double r_a = 1.0;     // atomic injection rate
    double gamma = 1.0;   // dephasing rate of atomic coherences
    double Gamma = 1.0;   // atomic population decay rate
    double Omega = 0.0;   // driving amplitude, >= 0
    double kappa = 1.0;   // cavity damping, > 0
    double eta = 0.0;     // initial inversion parameter, in [-1, 1]
    PhaseMode phase = GaussianAveraged{0.0};

    void validate() const {
        auto bad = [](const std::string& msg) { throw InvalidParams(msg); };
        if (!(eta >= -1.0 && eta <= 1.0)) bad("eta must satisfy -1 <= eta <= 1");
        if (!(g > 0.0)) bad("g must be > 0");
        if (!(r_a > 0.0)) bad("r_a must be > 0");
        if (!(gamma > 0.0)) bad("gamma must be > 0");
        if (!(Gamma > 0.0)) bad("Gamma must be > 0");
        if (!(kappa > 0.0)) bad("kappa must be > 0");
        if (!(Omega >= 0.0)) bad("Omega must be >= 0");
        if (const auto* ga = std::get_if<GaussianAveraged>(&phase)) {
            if (!(ga->theta >= 0.0)) bad("theta must be >= 0");
        }
    }
};

struct InitialAtom {
    double rho_aa0;  // upper-level population
    double rho_cc0;  // lower-level population
    double rho_ac0;  // coherence magnitude (phase factored out)
};

/// Initial atomic density-matrix elements from the inversion parameter.
inline InitialAtom initial_atom(const PhysicalParams& p) {
    p.validate();
    const double eta = p.eta;
    return {(1.0 - eta) / 2.0, (1.0 + eta) / 2.0,
            std::sqrt(std::max(0.0, 1.0 - eta * eta)) / 2.0};
}

/// Unit phase factor standing in for exp(-i*phi): exp(-theta) in averaged
/// mode, exp(-i*phi) in fixed mode.
inline cplx phase_value(const PhaseMode& m) {
    if (const auto* ga = std::get_if<GaussianAveraged>(&m))
        return {std::exp(-ga->theta), 0.0};
    return std::exp(cplx{0.0, -std::get<FixedPhase>(m).phi});
}

}  // namespace cbl
