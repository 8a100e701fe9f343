#include "taxdiff/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "taxdiff/errors.hpp"

namespace taxdiff {

std::string to_string(ScheduleKind kind) {
    return kind == ScheduleKind::Linear ? "linear" : "cosine";
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "linear") return ScheduleKind::Linear;
    if (s == "cosine") return ScheduleKind::Cosine;
    throw InvalidScheduleParams("unknown schedule kind '" + s + "'");
}

namespace {

std::vector<double> linear_betas(int T, double beta_start, double beta_end) {
    if (beta_start <= 0.0 || beta_end >= 1.0 || beta_start > beta_end)
        throw InvalidScheduleParams("linear schedule requires 0 < beta_start <= beta_end < 1");
    std::vector<double> betas(static_cast<std::size_t>(T));
    if (T == 1) {
        betas[0] = beta_start;
        return betas;
    }
    // inclusive endpoints: beta(1) = beta_start, beta(T) = beta_end
    const double step = (beta_end - beta_start) / static_cast<double>(T - 1);
    for (int t = 0; t < T; ++t) betas[static_cast<std::size_t>(t)] = beta_start + step * t;
    return betas;
}

std::vector<double> cosine_betas(int T) {
    // alpha_bar follows the squared-cosine ramp f(t) = cos^2((t/T + s)/(1 + s) * pi/2)
    // with offset s = 0.008; betas derived as 1 - abar(t)/abar(t-1), clipped at 0.999
    const double s = 0.008;
    auto f = [&](double t) {
        const double x = (t / T + s) / (1.0 + s) * std::numbers::pi / 2.0;
        const double c = std::cos(x);
        return c * c;
    };
    const double f0 = f(0.0);
    std::vector<double> betas(static_cast<std::size_t>(T));
    double prev = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double abar = f(static_cast<double>(t)) / f0;
        betas[static_cast<std::size_t>(t - 1)] = std::min(1.0 - abar / prev, 0.999);
        prev = abar;
    }
    return betas;
}

}  // namespace

NoiseSchedule NoiseSchedule::build(int T, ScheduleKind kind, double beta_start, double beta_end) {
    if (T < 1) throw InvalidScheduleParams("schedule needs T >= 1");
    NoiseSchedule s;
    s.kind_ = kind;
    s.beta_start_ = beta_start;
    s.beta_end_ = beta_end;
    s.beta_ = kind == ScheduleKind::Linear ? linear_betas(T, beta_start, beta_end) : cosine_betas(T);
    s.derive();
    return s;
}

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas, ScheduleKind kind,
                                        double beta_start, double beta_end) {
    if (betas.empty()) throw InvalidScheduleParams("schedule needs T >= 1");
    NoiseSchedule s;
    s.kind_ = kind;
    s.beta_start_ = beta_start;
    s.beta_end_ = beta_end;
    s.beta_ = std::move(betas);
    s.derive();
    return s;
}

void NoiseSchedule::derive() {
    const std::size_t T = beta_.size();
    alpha_.resize(T);
    alpha_bar_.resize(T);
    posterior_variance_.resize(T);
    log_post_var_clipped_.resize(T);
    double abar = 1.0;
    for (std::size_t i = 0; i < T; ++i) {
        const double b = beta_[i];
        if (!(b > 0.0 && b < 1.0))
            throw InvalidScheduleParams("beta(" + std::to_string(i + 1) + ") out of (0,1)");
        const double abar_prev = abar;
        alpha_[i] = 1.0 - b;
        abar *= alpha_[i];
        alpha_bar_[i] = abar;
        // beta_tilde(t) = beta(t) * (1 - abar(t-1)) / (1 - abar(t)); zero at t=1
        posterior_variance_[i] = b * (1.0 - abar_prev) / (1.0 - abar);
    }
    for (std::size_t i = 0; i < T; ++i) {
        const double v = (i == 0) ? (T > 1 ? posterior_variance_[1] : beta_[0])
                                  : posterior_variance_[i];
        log_post_var_clipped_[i] = std::log(v);
    }
}

bool NoiseSchedule::well_mixed() const { return alpha_bar_.back() < 0.01; }

void NoiseSchedule::check_timestep(int t) const {
    if (t < 1 || t > T())
        throw TimestepOutOfRange("timestep " + std::to_string(t) + " outside [1, " +
                                 std::to_string(T()) + "]");
}

std::size_t NoiseSchedule::index(int t) const {
    check_timestep(t);
    return static_cast<std::size_t>(t - 1);
}

}  // namespace taxdiff
