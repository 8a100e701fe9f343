#include "taxdiff/sampler.hpp"

#include <cmath>

#include "taxdiff/errors.hpp"

namespace taxdiff {

Matrix sample_chain(const DenoiserParams& model, const NoiseSchedule& sched,
                    const GuidanceConfig& guidance, const TaxLabel& y, std::uint64_t seed) {
    const DenoiserConfig& cfg = model.cfg;
    if (model.empty()) throw UntrainedModel("model has no parameters");
    if (y.num_classes != cfg.num_classes || y.class_id < 0 || y.class_id > cfg.num_classes)
        throw InvalidLabel("label does not fit a model with " +
                           std::to_string(cfg.num_classes) + " classes");
    if (sched.T() != cfg.T)
        throw InvalidConfig("schedule has " + std::to_string(sched.T()) +
                            " steps, model expects " + std::to_string(cfg.T));
    const TaxLabel null_label = TaxLabel::null(cfg.num_classes);
    const bool two_pass = guidance.scale != 1.0 || guidance.force_two_pass;

    Rng rng(seed);
    Matrix x = rng.normal_matrix(cfg.L, cfg.D_in);
    for (int t = sched.T(); t >= 1; --t) {
        const DenoiserOutput cond = forward(x, t, y, model);
        Matrix eps = cond.eps_pred;
        if (two_pass) {
            const DenoiserOutput uncond = forward(x, t, null_label, model);
            eps = guided_epsilon(cond.eps_pred, uncond.eps_pred, guidance.scale);
        }
        // variance channel always comes from the conditional pass
        const ReverseParams rev = p_mean_variance(eps, cond.v_raw, x, t, sched);
        if (t == 1) {
            x = rev.mean;
        } else {
            const Matrix z = rng.normal_matrix(cfg.L, cfg.D_in);
            x = rev.mean + rev.var.cwiseSqrt().cwiseProduct(z);
        }
    }
    return x;
}

std::vector<Matrix> sample_loop(const DenoiserParams& model, const NoiseSchedule& sched,
                                const GuidanceConfig& guidance, const TaxLabel& y, Rng& rng,
                                int count) {
    if (count < 0) throw InvalidConfig("sample count must be >= 0");
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
    for (auto& s : seeds) s = rng.next_u64();
    std::vector<Matrix> out;
    out.reserve(seeds.size());
    for (const std::uint64_t s : seeds)
        out.push_back(sample_chain(model, sched, guidance, y, s));
    return out;
}

}  // namespace taxdiff
