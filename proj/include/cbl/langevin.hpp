#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <thread>
#include <vector>

#include "cbl/coeffs.hpp"
#include "cbl/params.hpp"

namespace cbl {

/// One trajectory of the doubled phase space. alpha_plus/beta_plus are
/// independent conjugate variables; only ensemble averages like
/// <alpha_plus * alpha> have physical meaning (normal-ordered moments).
struct DoubledState {
    cplx alpha, beta, alpha_plus, beta_plus;
};

namespace detail {

/// Counter-based per-trajectory RNG stream: a splitmix64 generator seeded
/// from (master seed, trajectory index), so results are independent of any
/// parallel schedule.
struct TrajectoryRng {
    std::uint64_t state;

    TrajectoryRng(std::uint64_t seed, std::uint64_t traj) {
        state = seed ^ (traj * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
        next();
        next();
    }
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() {  // in (0, 1]
        return (next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }
    /// Box-Muller; stdlib-independent so streams are bit-reproducible.
    void normal_pair(double& z0, double& z1) {
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        z0 = r * std::cos(2.0 * M_PI * u2);
        z1 = r * std::sin(2.0 * M_PI * u2);
    }
};

}  // namespace detail

/// Symmetric diffusion matrix D over (f_a, f_b, f_a+, f_b+) and a complex
/// factor R with R * R^T = D. D is indefinite (zero diagonal), so R is
/// genuinely complex: the trajectories are nonclassical bookkeeping.
inline Eigen::Matrix4cd diffusion_factor(const DerivedCoeffs& k) {
    if (!k.averaged)
        throw InvalidParams("Langevin simulation supports averaged mode only");
    const NoiseDiffusion nd = noise_diffusion(k);
    const double daa = nd.D_aa.real();
    const double dba = nd.D_ba.real();
    Eigen::Matrix4d D;
    D << 0.0, dba, daa, 0.0,
        dba, 0.0, 0.0, 0.0,
        daa, 0.0, 0.0, dba,
        0.0, 0.0, dba, 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(D);
    Eigen::Matrix4cd R;
    for (int j = 0; j < 4; ++j)
        R.col(j) = es.eigenvectors().col(j).cast<cplx>() *
                   std::sqrt(cplx(es.eigenvalues()(j)));
    const double err = (R * R.transpose() - D.cast<cplx>()).cwiseAbs().maxCoeff();
    if (err > 1e-10 * std::max(1.0, D.cwiseAbs().maxCoeff()))
        throw FactorizationFailure("diffusion factorization residual " +
                                   std::to_string(err));
    return R;
}

struct McEstimates {
    double n_a = 0.0, n_b = 0.0;
    cplx m;
    double se_n_a = 0.0, se_n_b = 0.0;
    double se_m_re = 0.0, se_m_im = 0.0;
    long n_traj = 0;
};

/// Euler-Maruyama ensemble over the doubled-phase-space Langevin equations,
/// from the two-mode vacuum. Deterministic for fixed (seed, n_traj, dt)
/// under any thread count: trajectories own counter-based RNG streams and
/// the reduction runs in fixed chunk order. Standard errors are
/// delete-one-chunk jackknife estimates.
inline McEstimates simulate_ensemble(const DerivedCoeffs& k, long n_traj,
                                     double t_final, double dt,
                                     std::uint64_t seed) {
    if (n_traj < 100) throw InvalidParams("n_traj must be >= 100");
    if (!(dt > 0.0) || !(t_final >= 0.0)) throw InvalidParams("bad dt/t_final");
    if (!(threshold_margin(k) > 0.0))
        throw Unstable("threshold margin is not positive");

    const Eigen::Matrix4cd R = diffusion_factor(k);
    Eigen::Matrix4cd drift;  // state (alpha, beta, alpha_plus, beta_plus)
    drift << -k.a_plus, 0.0, 0.0, -k.b_plus,
        0.0, -k.a_minus, -k.b_minus, 0.0,
        0.0, -std::conj(k.b_plus), -std::conj(k.a_plus), 0.0,
        -std::conj(k.b_minus), 0.0, 0.0, -std::conj(k.a_minus);

    const long n_steps = static_cast<long>(std::llround(t_final / dt));
    const double sq_dt = std::sqrt(dt);

    constexpr long kChunk = 1024;  // fixed chunk size keeps reductions deterministic
    const long n_chunks = (n_traj + kChunk - 1) / kChunk;
    struct ChunkSums {
        cplx na, nb, m;
        long count = 0;
    };
    std::vector<ChunkSums> chunks(n_chunks);

    std::atomic<long> next_chunk{0};
    auto worker = [&]() {
        for (;;) {
            const long c = next_chunk.fetch_add(1);
            if (c >= n_chunks) return;
            ChunkSums sums{};
            const long lo = c * kChunk;
            const long hi = std::min(n_traj, lo + kChunk);
            for (long traj = lo; traj < hi; ++traj) {
                detail::TrajectoryRng rng(seed, static_cast<std::uint64_t>(traj));
                Eigen::Vector4cd x = Eigen::Vector4cd::Zero();
                for (long s = 0; s < n_steps; ++s) {
                    Eigen::Vector4d xi;
                    rng.normal_pair(xi(0), xi(1));
                    rng.normal_pair(xi(2), xi(3));
                    x += dt * (drift * x) + sq_dt * (R * xi.cast<cplx>());
                }
                if (!x.allFinite()) throw NonFinite("Langevin trajectory overflowed");
                sums.na += x(2) * x(0);  // alpha_plus * alpha
                sums.nb += x(3) * x(1);
                sums.m += x(0) * x(1);
                ++sums.count;
            }
            chunks[c] = sums;
        }
    };

    unsigned n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_chunks));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    cplx tot_na = 0, tot_nb = 0, tot_m = 0;
    for (const auto& cs : chunks) {  // fixed order
        tot_na += cs.na;
        tot_nb += cs.nb;
        tot_m += cs.m;
    }
    McEstimates est;
    est.n_traj = n_traj;
    est.n_a = tot_na.real() / n_traj;
    est.n_b = tot_nb.real() / n_traj;
    est.m = tot_m / double(n_traj);

    // delete-one-chunk jackknife
    if (n_chunks > 1) {
        auto jackknife = [&](auto value_of) {
            const double full = value_of(tot_na, tot_nb, tot_m) / n_traj;
            double mean = 0.0;
            std::vector<double> loo(n_chunks);
            for (long c = 0; c < n_chunks; ++c) {
                const auto& cs = chunks[c];
                loo[c] = value_of(tot_na - cs.na, tot_nb - cs.nb, tot_m - cs.m) /
                         double(n_traj - cs.count);
                mean += loo[c];
            }
            mean /= n_chunks;
            double var = 0.0;
            for (double v : loo) var += (v - mean) * (v - mean);
            var *= double(n_chunks - 1) / n_chunks;
            (void)full;
            return std::sqrt(var);
        };
        est.se_n_a = jackknife([](cplx na, cplx, cplx) { return na.real(); });
        est.se_n_b = jackknife([](cplx, cplx nb, cplx) { return nb.real(); });
        est.se_m_re = jackknife([](cplx, cplx, cplx m) { return m.real(); });
        est.se_m_im = jackknife([](cplx, cplx, cplx m) { return m.imag(); });
    }
    return est;
}

}  // namespace cbl
