#ifndef TAXDIFF_SCHEDULE_HPP
#define TAXDIFF_SCHEDULE_HPP

#include <string>
#include <vector>

namespace taxdiff {

enum class ScheduleKind { Linear, Cosine };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& s);

// Per-timestep noise schedule. Timesteps are 1-based: beta(1)..beta(T).
// alpha_bar(0) == 1 by convention, so posterior_variance(1) == 0.
class NoiseSchedule {
public:
    NoiseSchedule() = default;

    static NoiseSchedule build(int T, ScheduleKind kind, double beta_start = 1e-4,
                               double beta_end = 0.02);
    // Rebuild the derived arrays from explicit beta values (checkpoint load).
    static NoiseSchedule from_betas(std::vector<double> betas, ScheduleKind kind,
                                    double beta_start, double beta_end);

    int T() const { return static_cast<int>(beta_.size()); }
    ScheduleKind kind() const { return kind_; }
    double beta_start() const { return beta_start_; }
    double beta_end() const { return beta_end_; }

    double beta(int t) const { return beta_[index(t)]; }
    double alpha(int t) const { return alpha_[index(t)]; }
    double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bar_[index(t)]; }
    double posterior_variance(int t) const { return posterior_variance_[index(t)]; }
    // log posterior variance with the t=1 value clipped to the t=2 one, so the
    // learned-variance interpolation stays finite at the last denoising step
    double log_posterior_variance_clipped(int t) const { return log_post_var_clipped_[index(t)]; }

    const std::vector<double>& betas() const { return beta_; }

    // true when alpha_bar(T) < 0.01, i.e. the terminal state is close to pure
    // noise; desk-scale schedules (tiny T) legitimately fail this
    bool well_mixed() const;

    void check_timestep(int t) const;

private:
    std::size_t index(int t) const;
    void derive();

    std::vector<double> beta_, alpha_, alpha_bar_, posterior_variance_, log_post_var_clipped_;
    ScheduleKind kind_ = ScheduleKind::Linear;
    double beta_start_ = 0.0, beta_end_ = 0.0;
};

}  // namespace taxdiff

#endif
