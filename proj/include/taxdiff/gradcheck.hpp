#ifndef TAXDIFF_GRADCHECK_HPP
#define TAXDIFF_GRADCHECK_HPP

#include <cstdint>
#include <string>

#include "taxdiff/denoiser.hpp"
#include "taxdiff/diffusion.hpp"

namespace taxdiff {

// Training loss at one (x0, t, y, eps) point: L_MSE + lambda * L_vlb where the
// vlb term sees a frozen reverse mean (gradient reaches the variance channel
// only). `frozen_mean` substitutes for the model's own mean so central
// differences measure exactly what backward computes.
double training_loss(const DenoiserParams& params, const Matrix& x0, const Matrix& x_t, int t,
                     const TaxLabel& y, const Matrix& eps, const NoiseSchedule& sched,
                     double lambda_vlb, const Matrix* frozen_mean = nullptr);

// Same loss; also fills `grads` (accumulating) and reports the reverse mean
// of this evaluation for later freezing.
double training_loss_grads(const DenoiserParams& params, const Matrix& x0, const Matrix& x_t,
                           int t, const TaxLabel& y, const Matrix& eps,
                           const NoiseSchedule& sched, double lambda_vlb, DenoiserParams& grads,
                           Matrix& mean_out);

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t scalars_checked = 0;
    bool pass(double tol = 1e-4) const { return max_rel_err < tol; }
};

// Randomizes every parameter, picks a fixed (x0, t, y, eps), and compares
// backward against central finite differences entry by entry.
// `inject_sign_bug` flips the analytic gradient of parameters whose name
// starts with the given prefix (fault-injection hook for the self-check
// contract); empty means no injection.
GradCheckResult gradcheck_denoiser(const DenoiserConfig& cfg, std::uint64_t seed,
                                   double lambda_vlb = 1e-3, double h = 1e-5, int t = 0,
                                   const std::string& inject_sign_bug = "");

}  // namespace taxdiff

#endif
