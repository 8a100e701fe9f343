#ifndef TAXDIFF_TRAINING_HPP
#define TAXDIFF_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "taxdiff/denoiser.hpp"
#include "taxdiff/diffusion.hpp"
#include "taxdiff/rng.hpp"

namespace taxdiff {

struct TrainConfig {
    double learning_rate = 1e-4;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 16;
    double ema_decay = 0.9999;
    double label_dropout_p = 0.1;
    long steps = 1000;
    std::uint64_t seed = 0;
    double lambda_vlb = 1e-3;
    double grad_clip = 0.0;  // global-norm clip; 0 disables

    void validate() const;
};

struct TrainingState {
    DenoiserParams params;
    DenoiserParams ema;
    DenoiserParams adam_m, adam_v;
    long step = 0;
    Rng rng;

    static TrainingState init(const DenoiserConfig& cfg, std::uint64_t seed);
};

struct TrainExample {
    Matrix x0;  // [L, D_in]
    TaxLabel y;
};

struct StepMetrics {
    double mse = 0.0, vlb = 0.0, total = 0.0;
};

// each label independently replaced by the null label with probability p
std::vector<TaxLabel> dropout_labels(const std::vector<TaxLabel>& labels, double p, Rng& rng);

// ema' = d * ema + (1 - d) * params, elementwise over every parameter
void ema_update(DenoiserParams& ema, const DenoiserParams& params, double d);

// One optimization step over the batch: per-example t and noise draws,
// forward, L_MSE + lambda_vlb * L_vlb (variance channel only), AdamW, EMA.
StepMetrics train_step(const std::vector<TrainExample>& batch, TrainingState& state,
                       const NoiseSchedule& sched, const TrainConfig& cfg);

using MetricsHook = std::function<void(long step, const StepMetrics&, double wall_ms)>;

// Seeded-epoch-shuffle batching over `data` for cfg.steps steps.
void run_training(TrainingState& state, const NoiseSchedule& sched, const TrainConfig& cfg,
                  const std::vector<TrainExample>& data, const MetricsHook& hook = nullptr);

// --- checkpointing ---

struct Checkpoint {
    TrainingState state;
    NoiseSchedule sched;
};

void save_checkpoint(const TrainingState& state, const NoiseSchedule& sched,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace taxdiff

#endif
