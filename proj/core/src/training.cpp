#include "rpca/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "rpca/errors.hpp"

namespace rpca {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ParameterError("train: learning_rate must be positive");
    if (batch_size == 0) throw ParameterError("train: batch_size must be positive");
    if (depth == 0) throw ParameterError("train: depth must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ParameterError("train: betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw ParameterError("train: adam eps must be positive");
    if (clip_gradients && !(clip_norm > 0.0)) throw ParameterError("train: clip_norm must be positive");
    if (threads == 0) throw ParameterError("train: threads must be >= 1");
}

LossResult compound_mse_loss(std::span<const DecompositionState> preds, std::span<const DataSample> targets) {
    if (preds.empty()) throw ParameterError("compound_mse_loss: empty batch");
    if (preds.size() != targets.size()) throw ShapeError("compound_mse_loss: prediction/target count mismatch");
    const double inv_n = 1.0 / static_cast<double>(preds.size());
    LossResult out;
    out.dL.reserve(preds.size());
    out.dS.reserve(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        Matrix eL = preds[i].L - targets[i].L.matrix();
        Matrix eS = preds[i].S - targets[i].S.matrix();
        out.loss += 0.5 * inv_n * (squared_norm(eL) + squared_norm(eS));
        eL *= inv_n;
        eS *= inv_n;
        out.dL.push_back(std::move(eL));
        out.dS.push_back(std::move(eS));
    }
    return out;
}

AdamState make_adam_state(const NetworkParams& params) {
    AdamState state;
    for (const auto& layer : params.layers) {
        for_each_tensor(layer, [&](const char*, std::span<const double> values) {
            state.m.emplace_back(values.size(), 0.0);
            state.v.emplace_back(values.size(), 0.0);
        });
    }
    return state;
}

void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state, const TrainConfig& config) {
    if (grads.layers.size() != params.layers.size()) throw ShapeError("adam_step: gradient depth mismatch");
    std::vector<std::span<double>> p;
    std::vector<std::span<const double>> g;
    for (auto& layer : params.layers) for_each_tensor(layer, [&](const char*, std::span<double> v) { p.push_back(v); });
    for (const auto& layer : grads.layers)
        for_each_tensor(layer, [&](const char*, std::span<const double> v) { g.push_back(v); });
    if (p.size() != g.size() || p.size() != state.m.size()) throw ShapeError("adam_step: tensor count mismatch");
    for (std::size_t t = 0; t < p.size(); ++t)
        if (p[t].size() != g[t].size() || p[t].size() != state.m[t].size())
            throw ShapeError("adam_step: tensor size mismatch");

    ++state.step;
    const double b1 = config.beta1, b2 = config.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t t = 0; t < p.size(); ++t) {
        auto& m = state.m[t];
        auto& v = state.v[t];
        for (std::size_t i = 0; i < p[t].size(); ++i) {
            const double gi = g[t][i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            p[t][i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
        }
    }
}

EvalResult mse_of(std::span<const DecompositionState> preds, std::span<const DataSample> targets) {
    if (preds.empty()) throw ParameterError("mse_of: empty set");
    if (preds.size() != targets.size()) throw ShapeError("mse_of: count mismatch");
    EvalResult r;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double elems = static_cast<double>(preds[i].L.size());
        r.mse_L += squared_norm(preds[i].L - targets[i].L.matrix()) / elems;
        r.mse_S += squared_norm(preds[i].S - targets[i].S.matrix()) / elems;
    }
    r.mse_L /= static_cast<double>(preds.size());
    r.mse_S /= static_cast<double>(preds.size());
    r.mse_avg = 0.5 * (r.mse_L + r.mse_S);
    return r;
}

namespace {

// Runs fn(begin, end, worker) over contiguous chunks of [0, count).
template <class Fn>
void parallel_chunks(std::size_t count, std::size_t threads, Fn&& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
    if (workers == 1) {
        fn(0, count, 0);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t per = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = std::min(count, w * per), e = std::min(count, b + per);
        pool.emplace_back([&, b, e, w] {
            try {
                fn(b, e, w);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

void add_into(NetworkGradients& acc, const NetworkGradients& other) {
    for (std::size_t l = 0; l < acc.layers.size(); ++l) {
        std::vector<std::span<double>> dst;
        for_each_tensor(acc.layers[l], [&](const char*, std::span<double> v) { dst.push_back(v); });
        std::size_t t = 0;
        for_each_tensor(other.layers[l], [&](const char*, std::span<const double> v) {
            for (std::size_t i = 0; i < v.size(); ++i) dst[t][i] += v[i];
            ++t;
        });
    }
}

NetworkGradients zero_gradients(const NetworkParams& params, std::size_t rows, std::size_t cols) {
    NetworkGradients g;
    for (const auto& l : params.layers) g.layers.push_back(l.zeros_like());
    g.dM = Matrix(rows, cols);
    return g;
}

double global_norm(const NetworkGradients& g) {
    double acc = 0.0;
    for (const auto& layer : g.layers)
        for_each_tensor(layer, [&](const char*, std::span<const double> v) {
            for (double x : v) acc += x * x;
        });
    return std::sqrt(acc);
}

void scale_gradients(NetworkGradients& g, double s) {
    for (auto& layer : g.layers)
        for_each_tensor(layer, [&](const char*, std::span<double> v) {
            for (double& x : v) x *= s;
        });
}

struct BatchOutcome {
    double loss = 0;
    EvalResult mse;
};

// Forward + backward over one batch; gradients of the compound loss land in `grads`.
BatchOutcome run_batch(const NetworkParams& params, std::span<const DataSample* const> batch, const TrainConfig& config,
                       NetworkGradients& grads) {
    const std::size_t count = batch.size();
    const double inv_n = 1.0 / static_cast<double>(count);
    const std::size_t rows = batch.front()->M.pixels(), cols = batch.front()->M.frames();
    const std::size_t workers = std::max<std::size_t>(1, std::min(config.threads, count));
    std::vector<NetworkGradients> partial;
    partial.reserve(workers);
    partial.push_back(std::move(grads));
    for (std::size_t w = 1; w < workers; ++w) partial.push_back(zero_gradients(params, rows, cols));
    std::vector<double> loss(count), mse_L(count), mse_S(count);
    const BackwardOptions options{config.detach_reference, 1e-12};

    parallel_chunks(count, workers, [&](std::size_t b, std::size_t e, std::size_t w) {
        for (std::size_t i = b; i < e; ++i) {
            const DataSample& s = *batch[i];
            auto fwd = network_forward(s.M.matrix(), params);
            Matrix eL = fwd.L - s.L.matrix();
            Matrix eS = fwd.S - s.S.matrix();
            const double sqL = squared_norm(eL), sqS = squared_norm(eS);
            loss[i] = 0.5 * inv_n * (sqL + sqS);
            mse_L[i] = sqL / static_cast<double>(eL.size());
            mse_S[i] = sqS / static_cast<double>(eS.size());
            eL *= inv_n;
            eS *= inv_n;
            network_backward_accumulate(fwd.tape, params, eL, eS, partial[w], options);
        }
    });
    grads = std::move(partial[0]);
    for (std::size_t w = 1; w < partial.size(); ++w) add_into(grads, partial[w]);

    BatchOutcome out;
    for (std::size_t i = 0; i < count; ++i) {
        out.loss += loss[i];
        out.mse.mse_L += mse_L[i];
        out.mse.mse_S += mse_S[i];
    }
    return out;
}

MetricsRow make_row(std::size_t epoch, const char* split, const EvalResult& r, double seconds) {
    return {epoch, split, r.mse_L, r.mse_S, r.mse_avg, seconds};
}

}  // namespace

EvalResult evaluate(const NetworkParams& params, std::span<const DataSample> samples, std::size_t threads) {
    if (samples.empty()) throw ParameterError("evaluate: empty dataset");
    std::vector<double> mse_L(samples.size()), mse_S(samples.size());
    parallel_chunks(samples.size(), threads, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i) {
            const auto fwd = network_forward(samples[i].M.matrix(), params);
            const double elems = static_cast<double>(fwd.L.size());
            mse_L[i] = squared_norm(fwd.L - samples[i].L.matrix()) / elems;
            mse_S[i] = squared_norm(fwd.S - samples[i].S.matrix()) / elems;
        }
    });
    EvalResult r;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        r.mse_L += mse_L[i];
        r.mse_S += mse_S[i];
    }
    r.mse_L /= static_cast<double>(samples.size());
    r.mse_S /= static_cast<double>(samples.size());
    r.mse_avg = 0.5 * (r.mse_L + r.mse_S);
    return r;
}

TrainResult train_from(NetworkParams initial, const Dataset& data, const TrainConfig& config, const EpochCallback& on_row) {
    config.validate();
    if (data.train.empty() || data.val.empty()) throw ParameterError("train: train and validation splits must be non-empty");
    if (config.batch_size > data.train.size()) throw ParameterError("train: batch_size exceeds training set size");

    TrainResult result;
    result.params = initial;
    if (config.epochs == 0) return result;

    NetworkParams params = std::move(initial);
    AdamState adam = make_adam_state(params);
    std::mt19937_64 shuffler(config.seed ^ 0x5DEECE66DULL);
    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t rows = data.train.front().M.pixels(), cols = data.train.front().M.frames();
    double best = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), shuffler);
        EvalResult train_mse;
        std::size_t batch_index = 0;
        for (std::size_t b = 0; b < order.size(); b += config.batch_size, ++batch_index) {
            const std::size_t e = std::min(order.size(), b + config.batch_size);
            std::vector<const DataSample*> batch;
            for (std::size_t i = b; i < e; ++i) batch.push_back(&data.train[order[i]]);
            NetworkGradients grads = zero_gradients(params, rows, cols);
            const auto outcome = run_batch(params, batch, config, grads);
            if (!std::isfinite(outcome.loss)) {
                throw NumericalError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(batch_index) + " (depth " + std::to_string(params.depth()) +
                                     ", variant " + to_string(params.variant) + ")");
            }
            train_mse.mse_L += outcome.mse.mse_L;
            train_mse.mse_S += outcome.mse.mse_S;
            if (config.clip_gradients) {
                const double norm = global_norm(grads);
                if (norm > config.clip_norm) scale_gradients(grads, config.clip_norm / norm);
            }
            NetworkParams grad_params{params.variant, params.geometry, std::move(grads.layers)};
            adam_step(params, grad_params, adam, config);
        }
        train_mse.mse_L /= static_cast<double>(order.size());
        train_mse.mse_S /= static_cast<double>(order.size());
        train_mse.mse_avg = 0.5 * (train_mse.mse_L + train_mse.mse_S);

        const EvalResult val = evaluate(params, data.val, config.threads);
        const double seconds =
            config.record_wallclock
                ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
                : 0.0;
        for (const auto& row : {make_row(epoch, "train", train_mse, seconds), make_row(epoch, "val", val, seconds)}) {
            result.metrics.push_back(row);
            if (on_row) on_row(row);
        }
        if (!std::isfinite(val.mse_avg)) throw NumericalError("training diverged: non-finite validation MSE", static_cast<long>(epoch));
        if (val.mse_avg < best) {
            best = val.mse_avg;
            result.params = params;
            result.best_epoch = epoch;
        }
    }
    return result;
}

TrainResult train(const Dataset& data, const TrainConfig& config, const EpochCallback& on_row) {
    config.validate();
    if (data.train.empty()) throw ParameterError("train: empty training split");
    const auto& first = data.train.front();
    const NetworkGeometry geometry{first.M.shape(), first.M.frames(), config.kernel_size};
    return train_from(init_params(config.depth, geometry, config.variant, config.seed), data, config, on_row);
}

std::uint64_t sweep_cell_seed(std::uint64_t base, Variant variant, std::size_t depth) {
    std::uint64_t z = base ^ (static_cast<std::uint64_t>(depth) << 8) ^ (variant == Variant::RefRPCA ? 0x1ULL : 0x2ULL);
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<SweepRow> depth_sweep(const Dataset& data, std::span<const std::size_t> depths, std::span<const Variant> variants,
                                  const TrainConfig& config, const std::function<void(const SweepRow&)>& on_row) {
    if (depths.empty()) throw ParameterError("depth_sweep: no depths given");
    if (variants.empty()) throw ParameterError("depth_sweep: no variants given");
    std::vector<SweepRow> rows;
    for (Variant variant : variants) {
        for (std::size_t depth : depths) {
            SweepRow row;
            row.variant = variant;
            row.depth = depth;
            try {
                TrainConfig cell = config;
                cell.variant = variant;
                cell.depth = depth;
                cell.seed = sweep_cell_seed(config.seed, variant, depth);
                const auto trained = train(data, cell);
                row.val = evaluate(trained.params, data.val, config.threads);
            } catch (const Error& e) {
                row.failed = true;
                row.error = e.what();
                const double nan = std::numeric_limits<double>::quiet_NaN();
                row.val = {nan, nan, nan};
            }
            rows.push_back(row);
            if (on_row) on_row(row);
        }
    }
    return rows;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
    out << "epoch,split,mse_L,mse_S,mse_avg,seconds\n";
    for (const auto& r : rows) {
        out << r.epoch << ',' << r.split << ',' << format_number(r.mse_L) << ',' << format_number(r.mse_S) << ','
            << format_number(r.mse_avg) << ',' << format_number(r.seconds) << '\n';
    }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "variant,depth,mse_L,mse_S,mse_avg\n";
    for (const auto& r : rows) {
        out << to_string(r.variant) << ',' << r.depth << ',' << format_number(r.val.mse_L) << ','
            << format_number(r.val.mse_S) << ',' << format_number(r.val.mse_avg) << '\n';
    }
}

}  // namespace rpca
