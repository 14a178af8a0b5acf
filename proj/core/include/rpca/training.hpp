#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rpca/datagen.hpp"
#include "rpca/net.hpp"
#include "rpca/solvers.hpp"

namespace rpca {

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 200;
    std::size_t epochs = 50;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t depth = 1;
    Variant variant = Variant::RefRPCA;
    std::size_t kernel_size = 5;
    /// Clip the global gradient norm to this value when enabled.
    bool clip_gradients = false;
    double clip_norm = 10.0;
    bool detach_reference = false;
    /// Worker threads for per-sample forward/backward inside a batch.
    std::size_t threads = 1;
    /// When false the `seconds` column is written as 0 so metrics files are
    /// byte-reproducible.
    bool record_wallclock = true;

    void validate() const;
};

/// Adam moments, one buffer per parameter tensor in for_each_tensor order.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::uint64_t step = 0;
};

struct MetricsRow {
    std::size_t epoch = 0;
    std::string split;
    double mse_L = 0;
    double mse_S = 0;
    double mse_avg = 0;
    double seconds = 0;
};

struct LossResult {
    double loss = 0;
    std::vector<Matrix> dL;
    std::vector<Matrix> dS;
};

/// (1/2N) sum ||L_i - Lhat_i||_F^2 + (1/2N) sum ||S_i - Shat_i||_F^2 and its
/// cotangents (Lhat_i - L_i)/N, (Shat_i - S_i)/N.
LossResult compound_mse_loss(std::span<const DecompositionState> preds, std::span<const DataSample> targets);

/// Allocates zero moments matching `params`.
AdamState make_adam_state(const NetworkParams& params);

/// Bias-corrected Adam update of every parameter tensor, in place.
void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state, const TrainConfig& config);

struct EvalResult {
    double mse_L = 0;
    double mse_S = 0;
    double mse_avg = 0;
};

/// Mean over samples of per-element squared error ||X - Xhat||_F^2 / (n m).
EvalResult evaluate(const NetworkParams& params, std::span<const DataSample> samples, std::size_t threads = 1);
EvalResult mse_of(std::span<const DecompositionState> preds, std::span<const DataSample> targets);

struct TrainResult {
    NetworkParams params;  ///< parameters of the epoch with the best validation mse_avg
    std::vector<MetricsRow> metrics;
    std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const MetricsRow&)>;

/// Epoch loop with seeded shuffling, Adam, per-epoch train/val metrics and
/// best-validation model selection. Throws NumericalError when the loss
/// becomes non-finite.
TrainResult train(const Dataset& data, const TrainConfig& config, const EpochCallback& on_row = {});

/// Same, starting from explicit parameters.
TrainResult train_from(NetworkParams initial, const Dataset& data, const TrainConfig& config,
                       const EpochCallback& on_row = {});

struct SweepRow {
    Variant variant = Variant::RefRPCA;
    std::size_t depth = 0;
    EvalResult val;
    bool failed = false;
    std::string error;
};

/// Seed of one sweep cell; depends only on (base seed, variant, depth).
std::uint64_t sweep_cell_seed(std::uint64_t base, Variant variant, std::size_t depth);

/// Trains every (variant, depth) cell independently and reports validation
/// MSE of the selected parameters. Failed cells are marked and the sweep goes on.
std::vector<SweepRow> depth_sweep(const Dataset& data, std::span<const std::size_t> depths,
                                  std::span<const Variant> variants, const TrainConfig& config,
                                  const std::function<void(const SweepRow&)>& on_row = {});

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
/// Fixed-precision decimal used by every CSV writer.
std::string format_number(double v);

}  // namespace rpca
