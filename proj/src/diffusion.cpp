#include "taxdiff/diffusion.hpp"

#include <cmath>
#include <numbers>

#include "taxdiff/errors.hpp"

namespace taxdiff {

Matrix q_sample(const Matrix& x0, int t, const Matrix& eps, const NoiseSchedule& sched) {
    sched.check_timestep(t);
    if (!same_shape(x0, eps)) throw ShapeMismatch("q_sample: x0 and eps shapes differ");
    const double abar = sched.alpha_bar(t);
    return std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * eps;
}

ReverseParams posterior_mean_variance(const Matrix& x0, const Matrix& x_t, int t,
                                      const NoiseSchedule& sched) {
    sched.check_timestep(t);
    if (!same_shape(x0, x_t)) throw ShapeMismatch("posterior: x0 and x_t shapes differ");
    ReverseParams out;
    if (t == 1) {
        // alpha_bar_0 = 1: the x_t coefficient is exactly 0 and the x0
        // coefficient exactly 1; avoid the cancellation in the general form
        out.mean = x0;
        out.var = Matrix::Zero(x0.rows(), x0.cols());
        return out;
    }
    const double abar = sched.alpha_bar(t);
    const double abar_prev = sched.alpha_bar(t - 1);
    const double coef_x0 = std::sqrt(abar_prev) * sched.beta(t) / (1.0 - abar);
    const double coef_xt = std::sqrt(sched.alpha(t)) * (1.0 - abar_prev) / (1.0 - abar);
    out.mean = coef_x0 * x0 + coef_xt * x_t;
    out.var = Matrix::Constant(x0.rows(), x0.cols(), sched.posterior_variance(t));
    return out;
}

ReverseParams p_mean_variance(const Matrix& eps_pred, const Matrix& v_raw, const Matrix& x_t,
                              int t, const NoiseSchedule& sched) {
    sched.check_timestep(t);
    if (!same_shape(eps_pred, x_t) || !same_shape(v_raw, x_t))
        throw ShapeMismatch("p_mean_variance: input shapes differ");
    const double alpha = sched.alpha(t);
    const double beta = sched.beta(t);
    const double abar = sched.alpha_bar(t);
    const double log_beta = std::log(beta);
    const double log_beta_tilde = sched.log_posterior_variance_clipped(t);
    ReverseParams out;
    out.mean = (x_t - (beta / std::sqrt(1.0 - abar)) * eps_pred) / std::sqrt(alpha);
    const Matrix v = ((v_raw.array() + 1.0) / 2.0).cwiseMax(0.0).cwiseMin(1.0);
    out.var = (v.array() * log_beta + (1.0 - v.array()) * log_beta_tilde).exp();
    return out;
}

Matrix predict_x0_from_eps(const Matrix& x_t, int t, const Matrix& eps_pred,
                           const NoiseSchedule& sched) {
    sched.check_timestep(t);
    const double abar = sched.alpha_bar(t);
    return (x_t - std::sqrt(1.0 - abar) * eps_pred) / std::sqrt(abar);
}

Matrix guided_epsilon(const Matrix& eps_cond, const Matrix& eps_uncond, double s) {
    if (!same_shape(eps_cond, eps_uncond))
        throw ShapeMismatch("guided_epsilon: branch shapes differ");
    if (s == 1.0) return eps_cond;  // exact reversion, no roundoff
    return eps_uncond + s * (eps_cond - eps_uncond);
}

double kl_gaussian_diag(const Matrix& mean1, const Matrix& var1, const Matrix& mean2,
                        const Matrix& var2) {
    if (!same_shape(mean1, var1) || !same_shape(mean1, mean2) || !same_shape(mean1, var2))
        throw ShapeMismatch("kl_gaussian_diag: shapes differ");
    if ((var1.array() <= 0.0).any() || (var2.array() <= 0.0).any())
        throw NonPositiveVariance("kl_gaussian_diag: variances must be > 0");
    const auto delta2 = (mean1 - mean2).array().square();
    return 0.5 * ((var2.array() / var1.array()).log() + (var1.array() + delta2) / var2.array() -
                  1.0)
                     .sum();
}

double loss_mse(const Matrix& eps_pred, const Matrix& eps) {
    if (!same_shape(eps_pred, eps)) throw ShapeMismatch("loss_mse: shapes differ");
    return (eps_pred - eps).array().square().mean();
}

double loss_vlb(const Matrix& x0, const Matrix& x_t, int t, const ReverseParams& reverse,
                const NoiseSchedule& sched) {
    sched.check_timestep(t);
    if ((reverse.var.array() <= 0.0).any())
        throw NonPositiveVariance("loss_vlb: reverse variance must be > 0");
    if (t == 1) {
        // -log N(x0; mean, var), summed
        const auto delta2 = (x0 - reverse.mean).array().square();
        return 0.5 * (std::log(2.0 * std::numbers::pi) + reverse.var.array().log() +
                      delta2 / reverse.var.array())
                         .sum();
    }
    const ReverseParams post = posterior_mean_variance(x0, x_t, t, sched);
    return kl_gaussian_diag(post.mean, post.var, reverse.mean, reverse.var);
}

Matrix loss_vlb_grad_logvar(const Matrix& x0, const Matrix& x_t, int t,
                            const ReverseParams& reverse, const NoiseSchedule& sched) {
    sched.check_timestep(t);
    Matrix target_mean;
    double target_var = 0.0;
    if (t == 1) {
        target_mean = x0;
    } else {
        const ReverseParams post = posterior_mean_variance(x0, x_t, t, sched);
        target_mean = post.mean;
        target_var = sched.posterior_variance(t);
    }
    const auto delta2 = (target_mean - reverse.mean).array().square();
    return 0.5 * (1.0 - (target_var + delta2) / reverse.var.array());
}

}  // namespace taxdiff
