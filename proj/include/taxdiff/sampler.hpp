#ifndef TAXDIFF_SAMPLER_HPP
#define TAXDIFF_SAMPLER_HPP

#include <vector>

#include "taxdiff/denoiser.hpp"
#include "taxdiff/diffusion.hpp"
#include "taxdiff/rng.hpp"

namespace taxdiff {

// Ancestral sampling chain: x_T ~ N(0, I); each step predicts noise (two
// model passes combined by the guidance scale unless s == 1), forms the
// reverse Gaussian, and draws x_{t-1}; the final step takes the mean.
// Per-sample sub-streams are seeded up front from `rng`, so results depend
// only on (model, sched, guidance, y, seed, count), not on execution order.
std::vector<Matrix> sample_loop(const DenoiserParams& model, const NoiseSchedule& sched,
                                const GuidanceConfig& guidance, const TaxLabel& y, Rng& rng,
                                int count);

// Single chain from an explicit seed (the unit sample_loop operates over).
Matrix sample_chain(const DenoiserParams& model, const NoiseSchedule& sched,
                    const GuidanceConfig& guidance, const TaxLabel& y, std::uint64_t seed);

}  // namespace taxdiff

#endif
