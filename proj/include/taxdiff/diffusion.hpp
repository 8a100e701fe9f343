#ifndef TAXDIFF_DIFFUSION_HPP
#define TAXDIFF_DIFFUSION_HPP

#include "taxdiff/schedule.hpp"
#include "taxdiff/tensor.hpp"

namespace taxdiff {

// Reverse-step Gaussian N(mean, diag(var)); var is per-entry.
struct ReverseParams {
    Matrix mean;  // [L, D]
    Matrix var;   // [L, D]
};

struct GuidanceConfig {
    double scale = 1.0;
    // evaluate the unconditional branch even at scale == 1 (the s=1
    // single-pass/two-pass equivalence is a tested identity)
    bool force_two_pass = false;
};

// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps
Matrix q_sample(const Matrix& x0, int t, const Matrix& eps, const NoiseSchedule& sched);

// Closed-form q(x_{t-1} | x_t, x0). At t=1 the variance is 0 and mean = x0.
ReverseParams posterior_mean_variance(const Matrix& x0, const Matrix& x_t, int t,
                                      const NoiseSchedule& sched);

// Model parameterization: mu from predicted noise, variance by per-entry
// log-domain interpolation between beta_t and the (clipped) posterior variance
// with coefficient v = clamp((v_raw + 1)/2, 0, 1).
ReverseParams p_mean_variance(const Matrix& eps_pred, const Matrix& v_raw, const Matrix& x_t,
                              int t, const NoiseSchedule& sched);

// x0 implied by a noise prediction: (x_t - sqrt(1-abar_t) eps) / sqrt(abar_t)
Matrix predict_x0_from_eps(const Matrix& x_t, int t, const Matrix& eps_pred,
                           const NoiseSchedule& sched);

// eps_uncond + s * (eps_cond - eps_uncond)
Matrix guided_epsilon(const Matrix& eps_cond, const Matrix& eps_uncond, double s);

// KL(N(mean1, var1) || N(mean2, var2)), diagonal, summed over entries, nats
double kl_gaussian_diag(const Matrix& mean1, const Matrix& var1, const Matrix& mean2,
                        const Matrix& var2);

// mean over entries of (eps_pred - eps)^2
double loss_mse(const Matrix& eps_pred, const Matrix& eps);

// t > 1: KL(q(x_{t-1}|x_t,x0) || N(reverse)); t = 1: Gaussian NLL of x0 under
// N(reverse). Summed over entries, nats. Training treats reverse.mean as
// constant here (only the variance channel receives gradient).
double loss_vlb(const Matrix& x0, const Matrix& x_t, int t, const ReverseParams& reverse,
                const NoiseSchedule& sched);

// d loss_vlb / d log(reverse.var), per entry, under the frozen-mean convention.
// Same shape for both branches: 0.5 * (1 - (var_target + delta^2) / var)
// with var_target = 0 at t = 1.
Matrix loss_vlb_grad_logvar(const Matrix& x0, const Matrix& x_t, int t,
                            const ReverseParams& reverse, const NoiseSchedule& sched);

}  // namespace taxdiff

#endif
