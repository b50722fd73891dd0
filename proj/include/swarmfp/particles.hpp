#pragma once

#include <cstdint>

#include "swarmfp/grid.hpp"
#include "swarmfp/model.hpp"

namespace swarmfp {

/// Interacting-particle ensemble for the mean-field Monte Carlo oracle.
struct ParticleEnsemble {
    Eigen::ArrayXd positions;
    double t = 0;
    std::uint64_t seed = 0;
    std::int64_t step_index = 0;
};

/// Stateless counter-based generators: every draw is a pure function of
/// (seed, stream, index), so per-particle parallelism cannot reorder results.
double counter_uniform(std::uint64_t seed, std::int64_t stream,
                       std::int64_t index);
double counter_normal(std::uint64_t seed, std::int64_t stream,
                      std::int64_t index);

/// Stratified inverse-CDF sampling on the piecewise-constant density:
/// particle k lands at quantile (k + jitter_k)/n. Deterministic given seed.
ParticleEnsemble sample_initial(const DensityField& f0, int n,
                                std::uint64_t seed);

/// Arithmetic mean of the positions, accumulated in fixed-size chunks in a
/// deterministic order.
double empirical_mean(const ParticleEnsemble& e);

/// One Euler-Maruyama step of dX = -(X - c) dt + sqrt(2 kappa(X - c)) dW,
/// where c is the attraction center built from the ensemble's own empirical
/// mean, frozen for the whole step.
ParticleEnsemble em_step(const ParticleEnsemble& e, double dt,
                         const ModelParams& p);

/// Empirical density on a grid; particles outside the grid are tallied, not
/// dropped, so the field mass is 1 - overflow/n.
struct Histogram {
    DensityField field;
    long overflow = 0;
};

Histogram histogram_density(const ParticleEnsemble& e, const Grid1D& grid);

}  // namespace swarmfp
