#include "taxdiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "taxdiff/errors.hpp"

namespace taxdiff {

double training_loss(const DenoiserParams& params, const Matrix& x0, const Matrix& x_t, int t,
                     const TaxLabel& y, const Matrix& eps, const NoiseSchedule& sched,
                     double lambda_vlb, const Matrix* frozen_mean) {
    const DenoiserOutput out = forward(x_t, t, y, params);
    ReverseParams rev = p_mean_variance(out.eps_pred, out.v_raw, x_t, t, sched);
    if (frozen_mean) rev.mean = *frozen_mean;
    return loss_mse(out.eps_pred, eps) + lambda_vlb * loss_vlb(x0, x_t, t, rev, sched);
}

double training_loss_grads(const DenoiserParams& params, const Matrix& x0, const Matrix& x_t,
                           int t, const TaxLabel& y, const Matrix& eps,
                           const NoiseSchedule& sched, double lambda_vlb, DenoiserParams& grads,
                           Matrix& mean_out) {
    DenoiserTrace trace;
    const DenoiserOutput out = forward_traced(x_t, t, y, params, trace);
    const ReverseParams rev = p_mean_variance(out.eps_pred, out.v_raw, x_t, t, sched);
    mean_out = rev.mean;
    const double mse = loss_mse(out.eps_pred, eps);
    const double vlb = loss_vlb(x0, x_t, t, rev, sched);

    const double norm = static_cast<double>(x0.rows()) * static_cast<double>(x0.cols());
    const Matrix d_eps = (2.0 / norm) * (out.eps_pred - eps);
    const Matrix d_logvar = lambda_vlb * loss_vlb_grad_logvar(x0, x_t, t, rev, sched);
    const double span = std::log(sched.beta(t)) - sched.log_posterior_variance_clipped(t);
    const Matrix interior =
        ((out.v_raw.array() > -1.0) && (out.v_raw.array() < 1.0)).cast<double>().matrix();
    const Matrix d_v_raw = 0.5 * span * d_logvar.cwiseProduct(interior);
    backward(params, trace, d_eps, d_v_raw, grads);
    return mse + lambda_vlb * vlb;
}

GradCheckResult gradcheck_denoiser(const DenoiserConfig& cfg, std::uint64_t seed,
                                   double lambda_vlb, double h, int t,
                                   const std::string& inject_sign_bug) {
    cfg.validate();
    Rng rng(splitmix64(seed));
    DenoiserParams params = DenoiserParams::init(cfg, rng);
    params.randomize(rng);  // gates and head included: every path must carry gradient

    const NoiseSchedule sched = NoiseSchedule::build(cfg.T, ScheduleKind::Linear, 1e-4, 0.02);
    if (t == 0) t = std::max(1, cfg.T / 2 + 1);  // default: a KL (t > 1) step
    const TaxLabel y = TaxLabel::of(0, cfg.num_classes);
    const Matrix x0 = rng.normal_matrix(cfg.L, cfg.D_in);
    const Matrix eps = rng.normal_matrix(cfg.L, cfg.D_in);
    const Matrix x_t = q_sample(x0, t, eps, sched);

    DenoiserParams grads = DenoiserParams::zeros_like(params);
    Matrix base_mean;
    training_loss_grads(params, x0, x_t, t, y, eps, sched, lambda_vlb, grads, base_mean);

    if (!inject_sign_bug.empty()) {
        bool hit = false;
        for (auto& [name, g] : grads.named_params())
            if (name.rfind(inject_sign_bug, 0) == 0) {
                *g = -*g;
                hit = true;
            }
        if (!hit) throw InvalidConfig("no parameter named '" + inject_sign_bug + "'");
    }

    GradCheckResult res;
    auto named = params.named_params();
    auto grad_list = grads.named_params();
    for (std::size_t pi = 0; pi < named.size(); ++pi) {
        Matrix& theta = *named[pi].second;
        const Matrix& g = *grad_list[pi].second;
        for (Eigen::Index i = 0; i < theta.rows(); ++i) {
            for (Eigen::Index j = 0; j < theta.cols(); ++j) {
                const double saved = theta(i, j);
                theta(i, j) = saved + h;
                const double fp =
                    training_loss(params, x0, x_t, t, y, eps, sched, lambda_vlb, &base_mean);
                theta(i, j) = saved - h;
                const double fm =
                    training_loss(params, x0, x_t, t, y, eps, sched, lambda_vlb, &base_mean);
                theta(i, j) = saved;
                const double fd = (fp - fm) / (2.0 * h);
                const double a = g(i, j);
                const double rel =
                    // Floor keeps fp64 cancellation noise in the central
                    // difference (~|loss|*1e-16/h) from dominating entries
                    // whose true gradient is negligibly small.
                    std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
                ++res.scalars_checked;
                if (rel > res.max_rel_err) {
                    res.max_rel_err = rel;
                    res.worst_param = named[pi].first;
                }
            }
        }
    }
    return res;
}

}  // namespace taxdiff
