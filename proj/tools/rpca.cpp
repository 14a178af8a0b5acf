// rpca: dataset generation, classical solving, training, evaluation and
// operator export for robust PCA video separation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "rpca/datagen.hpp"
#include "rpca/errors.hpp"
#include "rpca/net.hpp"
#include "rpca/prox.hpp"
#include "rpca/selftest.hpp"
#include "rpca/solvers.hpp"
#include "rpca/tensor_io.hpp"
#include "rpca/training.hpp"

namespace fs = std::filesystem;
using namespace rpca;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

/// Resolved settings of one run, echoed to stderr and written beside the outputs
/// in the same key = value form that --config accepts.
class Resolved {
public:
    template <class T>
    void add(const std::string& key, const T& value) {
        std::ostringstream s;
        s << value;
        entries_.emplace_back(key, s.str());
    }
    void add(const std::string& key, double value) { entries_.emplace_back(key, format_number(value)); }
    void add(const std::string& key, bool value) { entries_.emplace_back(key, value ? "true" : "false"); }
    void add(const std::string& key, const fs::path& value) { entries_.emplace_back(key, value.string()); }

    std::string text() const {
        std::string out;
        for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
        return out;
    }
    void emit(const fs::path& file) const {
        std::cerr << text();
        std::ofstream out(file);
        if (!out) throw IoError("cannot write resolved config: " + file.string());
        out << text();
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void ensure_parent(const fs::path& file) {
    if (file.has_parent_path()) ensure_dir(file.parent_path());
}

std::ofstream open_out(const fs::path& file) {
    ensure_parent(file);
    std::ofstream out(file);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    return out;
}

void add_config_option(CLI::App* sub) {
    sub->add_option("--config", "Flat key = value file; command line flags take precedence");
}

bool names_option(const std::string& arg, const std::string& flag) {
    return arg == flag || arg.rfind(flag + "=", 0) == 0;
}

/// Expands `--config FILE` of the selected subcommand into explicit `--key=value`
/// arguments placed before the user's own. Keys also given on the command line are
/// dropped so the flag wins. Unknown keys are a configuration error.
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
    if (args.empty()) return args;
    CLI::App* sub = app.get_subcommand_no_throw(args.front());
    if (sub == nullptr) return args;

    std::string file;
    std::vector<std::string> rest;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            file = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (file.empty()) return args;
    if (!fs::exists(file)) throw IoError("cannot open config file: " + file);

    std::vector<std::string> out{args.front()};
    for (const auto& item : CLI::ConfigINI().from_file(file)) {
        if (item.name == "++" || item.name == "--") continue;  // section markers
        if (!item.parents.empty()) throw ConfigError("config: sections are not supported (key '" + item.fullname() + "')");
        const std::string flag = "--" + item.name;
        if (sub->get_option_no_throw(flag) == nullptr || item.name == "config")
            throw ConfigError("config: unknown key '" + item.name + "' for " + sub->get_name());
        bool overridden = false;
        for (const auto& a : rest) overridden = overridden || names_option(a, flag);
        if (overridden) continue;
        std::string value;
        for (std::size_t k = 0; k < item.inputs.size(); ++k) value += (k ? "," : "") + item.inputs[k];
        out.push_back(flag + "=" + value);
    }
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + items[i];
    return s;
}

// Training options shared by train and sweep.
struct TrainOptions {
    TrainConfig cfg;
    std::string variant = "refrpca";
    double clip_norm = 0.0;
    bool wallclock = false;
    CLI::Option* clip = nullptr;

    void attach(CLI::App* sub, bool with_variant_depth) {
        if (with_variant_depth) {
            sub->add_option("--variant", variant, "refrpca or corona")
                ->check(CLI::IsMember({"refrpca", "corona"}, CLI::ignore_case));
            sub->add_option("--depth", cfg.depth, "Number of unfolded layers")->check(CLI::PositiveNumber);
        }
        sub->add_option("--epochs", cfg.epochs, "Training epochs");
        sub->add_option("--batch-size", cfg.batch_size, "Samples per Adam step")->check(CLI::PositiveNumber);
        sub->add_option("--lr", cfg.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
        sub->add_option("--seed", cfg.seed, "Seed for initialization and shuffling");
        sub->add_option("--threads", cfg.threads, "Worker threads (1 = fully deterministic)")->check(CLI::PositiveNumber);
        sub->add_option("--kernel-size", cfg.kernel_size, "Odd convolution kernel size");
        clip = sub->add_option("--clip-norm", clip_norm, "Clip the global gradient norm to this value");
        sub->add_flag("--detach-reference", cfg.detach_reference, "Treat the reference frames as constants in backprop");
        sub->add_flag("--wallclock", wallclock, "Record elapsed seconds in metrics (otherwise 0 for reproducible files)");
    }

    TrainConfig resolve() {
        cfg.variant = parse_variant(variant);
        cfg.clip_gradients = clip->count() > 0;
        if (cfg.clip_gradients) cfg.clip_norm = clip_norm;
        cfg.record_wallclock = wallclock;
        cfg.validate();
        return cfg;
    }

    void describe(Resolved& r, bool with_variant_depth) const {
        if (with_variant_depth) {
            r.add("variant", to_string(cfg.variant));
            r.add("depth", cfg.depth);
        }
        r.add("epochs", cfg.epochs);
        r.add("batch-size", cfg.batch_size);
        r.add("lr", cfg.learning_rate);
        r.add("seed", cfg.seed);
        r.add("threads", cfg.threads);
        r.add("kernel-size", cfg.kernel_size);
        if (cfg.clip_gradients) r.add("clip-norm", cfg.clip_norm);
        r.add("detach-reference", cfg.detach_reference);
        r.add("wallclock", cfg.record_wallclock);
    }
};

// ---------------------------------------------------------------- gen

struct GenCommand {
    fs::path out;
    std::string preset;
    std::string source = "sprites";
    fs::path mnist_dir, mnist_images, mnist_labels;
    DataGenConfig cfg;
    CLI::App* app = nullptr;

    void attach(CLI::App& root) {
        app = root.add_subcommand("gen", "Generate a train/val/test dataset");
        add_config_option(app);
        app->add_option("--out", out, "Dataset file to write")->required();
        app->add_option("--preset", preset, "desk (800/100/100 sprites) or full (8000/1000/1000 MNIST)")
            ->check(CLI::IsMember({"desk", "full", "paper"}));
        app->add_option("--source", source, "Foreground source")->check(CLI::IsMember({"sprites", "mnist"}));
        app->add_option("--mnist-dir", mnist_dir, "Directory holding train-images-idx3-ubyte and train-labels-idx1-ubyte");
        app->add_option("--mnist-images", mnist_images, "IDX image file");
        app->add_option("--mnist-labels", mnist_labels, "IDX label file");
        app->add_option("--height", cfg.height, "Frame height");
        app->add_option("--width", cfg.width, "Frame width");
        app->add_option("--frames", cfg.frames, "Frames per sequence");
        app->add_option("--rank", cfg.rank, "Background rank");
        app->add_option("--n-train", cfg.n_train, "Training sequences");
        app->add_option("--n-val", cfg.n_val, "Validation sequences");
        app->add_option("--n-test", cfg.n_test, "Test sequences");
        app->add_option("--seed", cfg.seed, "Master seed");
    }

    bool given(const char* name) const { return app->get_option(name)->count() > 0; }

    int run() {
        if (preset == "paper") preset = "full";  // accepted alias
        if (preset == "full") {
            if (!given("--n-train")) cfg.n_train = 8000;
            if (!given("--n-val")) cfg.n_val = 1000;
            if (!given("--n-test")) cfg.n_test = 1000;
            if (!given("--source")) source = "mnist";
        }
        if (!mnist_dir.empty()) {
            if (mnist_images.empty()) mnist_images = mnist_dir / "train-images-idx3-ubyte";
            if (mnist_labels.empty()) mnist_labels = mnist_dir / "train-labels-idx1-ubyte";
        }
        cfg.source = source == "mnist" ? ForegroundSource::Mnist : ForegroundSource::Sprites;
        cfg.mnist_images = mnist_images;
        cfg.mnist_labels = mnist_labels;
        cfg.validate();

        Resolved r;
        r.add("out", out);
        if (!preset.empty()) r.add("preset", preset);
        r.add("source", source);
        if (cfg.source == ForegroundSource::Mnist) {
            r.add("mnist-images", cfg.mnist_images);
            r.add("mnist-labels", cfg.mnist_labels);
        }
        r.add("height", cfg.height);
        r.add("width", cfg.width);
        r.add("frames", cfg.frames);
        r.add("rank", cfg.rank);
        r.add("n-train", cfg.n_train);
        r.add("n-val", cfg.n_val);
        r.add("n-test", cfg.n_test);
        r.add("seed", cfg.seed);
        ensure_parent(out);
        r.emit(fs::path(out.string() + ".config"));

        const Dataset data = generate_dataset(cfg);
        save_dataset(out, data);
        std::cerr << "wrote " << data.train.size() << "/" << data.val.size() << "/" << data.test.size()
                  << " sequences to " << out.string() << "\n";
        return 0;
    }
};

// ---------------------------------------------------------------- solve

struct SolveCommand {
    fs::path input, out_dir;
    std::string solver = "refrpca", threshold = "scalar";
    int iters = 100;
    double c = 2.0, lambda1 = 0, lambda2 = 0, lambda3 = 0;
    bool consistent = false;
    CLI::App* app = nullptr;

    void attach(CLI::App& root) {
        app = root.add_subcommand("solve", "Run a classical solver on one data matrix");
        add_config_option(app);
        app->add_option("--input", input, "URPC matrix file holding M (n x m, one frame per column)")->required();
        app->add_option("--out-dir", out_dir, "Directory for L.urpc, S.urpc and trace.csv")->required();
        app->add_option("--solver", solver, "refrpca or corona")->check(CLI::IsMember({"refrpca", "corona"}));
        app->add_option("--iters", iters, "Iterations")->check(CLI::PositiveNumber);
        app->add_option("--c", c, "Step constant")->check(CLI::PositiveNumber);
        app->add_option("--lambda1", lambda1, "Nuclear norm weight (default 1/sqrt(max(n, m)))");
        app->add_option("--lambda2", lambda2, "Sparsity weight (default lambda1)");
        app->add_option("--lambda3", lambda3, "Reference weight (default lambda2 / 2)");
        app->add_flag("--consistent-step", consistent, "Scale cross and data terms by 1/c");
        app->add_option("--threshold", threshold, "CORONA sparse shrinkage")->check(CLI::IsMember({"scalar", "l12"}));
    }

    bool given(const char* name) const { return app->get_option(name)->count() > 0; }

    int run() {
        const Matrix M = read_matrix_file(input);
        SolverConfig cfg = SolverConfig::defaults(M.rows(), M.cols());
        cfg.c = c;
        if (given("--lambda1")) cfg.lambda1 = lambda1;
        cfg.lambda2 = given("--lambda2") ? lambda2 : cfg.lambda1;
        cfg.lambda3 = given("--lambda3") ? lambda3 : cfg.lambda2 / 2.0;
        cfg.max_iters = iters;
        cfg.consistent_step = consistent;
        cfg.corona_threshold = threshold == "l12" ? SparseThreshold::MixedL12 : SparseThreshold::Scalar;
        cfg.validate(M.rows(), M.cols());

        Resolved r;
        r.add("input", input);
        r.add("out-dir", out_dir);
        r.add("solver", solver);
        r.add("iters", iters);
        r.add("c", cfg.c);
        r.add("lambda1", cfg.lambda1);
        r.add("lambda2", cfg.lambda2);
        r.add("lambda3", cfg.lambda3);
        r.add("consistent-step", consistent);
        r.add("threshold", threshold);
        ensure_dir(out_dir);
        r.emit(out_dir / "config.ini");

        const SolveResult res = solver == "refrpca" ? ref_rpca_solve(M, cfg) : corona_ista_solve(M, cfg);
        write_matrix_file(out_dir / "L.urpc", res.state.L);
        write_matrix_file(out_dir / "S.urpc", res.state.S);
        std::ofstream trace = open_out(out_dir / "trace.csv");
        std::ostringstream csv;
        csv << "iter,objective,residual\n";
        for (const auto& row : res.trace)
            csv << row.iteration << ',' << format_number(row.objective) << ',' << format_number(row.residual) << '\n';
        trace << csv.str();
        std::cout << csv.str();
        return 0;
    }
};

// ---------------------------------------------------------------- train

struct TrainCommand {
    fs::path data_path, out_dir;
    TrainOptions opts;

    void attach(CLI::App& root) {
        CLI::App* app = root.add_subcommand("train", "Train one unfolded network");
        add_config_option(app);
        app->add_option("--data", data_path, "Dataset file from `gen`")->required();
        app->add_option("--out-dir", out_dir, "Directory for model.urpc and metrics.csv")->required();
        opts.attach(app, true);
    }

    int run() {
        const TrainConfig cfg = opts.resolve();
        Resolved r;
        r.add("data", data_path);
        r.add("out-dir", out_dir);
        opts.describe(r, true);
        ensure_dir(out_dir);
        r.emit(out_dir / "config.ini");

        const Dataset data = load_dataset(data_path);
        std::cout << "epoch,split,mse_L,mse_S,mse_avg,seconds\n";
        const TrainResult res = train(data, cfg, [](const MetricsRow& row) {
            std::cout << row.epoch << ',' << row.split << ',' << format_number(row.mse_L) << ','
                      << format_number(row.mse_S) << ',' << format_number(row.mse_avg) << ','
                      << format_number(row.seconds) << std::endl;
        });
        std::ofstream metrics = open_out(out_dir / "metrics.csv");
        write_metrics_csv(metrics, res.metrics);
        save_network(out_dir / "model.urpc", res.params);
        std::cerr << "best validation epoch " << res.best_epoch << "\n";
        return 0;
    }
};

// ---------------------------------------------------------------- eval

struct EvalCommand {
    fs::path model_path, data_path, dump_dir;
    std::string split = "val";
    std::vector<std::size_t> sequences{0};
    std::size_t threads = 1;
    CLI::Option* dump = nullptr;

    void attach(CLI::App& root) {
        CLI::App* app = root.add_subcommand("eval", "Evaluate a trained network on one split");
        add_config_option(app);
        app->add_option("--model", model_path, "Checkpoint from `train`")->required();
        app->add_option("--data", data_path, "Dataset file")->required();
        app->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
        app->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
        dump = app->add_option("--dump-frames", dump_dir, "Write PGM frames of M, L and S estimates here");
        app->add_option("--sequences", sequences, "Sequence indices to dump")->delimiter(',');
    }

    int run() {
        const NetworkParams params = load_network(model_path);
        const Dataset data = load_dataset(data_path);
        const auto& samples = split == "train" ? data.train : split == "val" ? data.val : data.test;
        if (samples.empty()) throw ConfigError("eval: split '" + split + "' is empty");
        if (!(params.geometry.frame == data.config.frame()) || params.geometry.frames != data.config.frames)
            throw ShapeError("eval: network geometry does not match the dataset");

        const EvalResult res = evaluate(params, samples, threads);
        std::cout << "split,mse_L,mse_S,mse_avg\n"
                  << split << ',' << format_number(res.mse_L) << ',' << format_number(res.mse_S) << ','
                  << format_number(res.mse_avg) << '\n';

        if (dump->count() > 0) {
            ensure_dir(dump_dir);
            for (std::size_t i : sequences) {
                if (i >= samples.size()) throw ConfigError("eval: sequence index " + std::to_string(i) + " out of range");
                const auto& s = samples[i];
                const auto f = network_forward(s.M.matrix(), params);
                const VideoMatrix L(f.L, s.M.shape()), S(f.S, s.M.shape());
                for (std::size_t t = 0; t < s.M.frames(); ++t) {
                    const std::string stem = split + "_seq" + std::to_string(i) + "_t" + std::to_string(t);
                    write_pgm(dump_dir / (stem + "_M.pgm"), s.M, t);
                    write_pgm(dump_dir / (stem + "_L.pgm"), L, t);
                    write_pgm(dump_dir / (stem + "_S.pgm"), S, t);
                }
            }
            std::cerr << "frames written to " << dump_dir.string() << "\n";
        }
        return 0;
    }
};

// ---------------------------------------------------------------- sweep

struct SweepCommand {
    fs::path data_path, out;
    std::vector<std::size_t> depths{1, 2, 4};
    std::vector<std::string> variants{"refrpca", "corona"};
    TrainOptions opts;

    void attach(CLI::App& root) {
        CLI::App* app = root.add_subcommand("sweep", "Train every (variant, depth) cell and report validation MSE");
        add_config_option(app);
        app->add_option("--data", data_path, "Dataset file")->required();
        app->add_option("--out", out, "Sweep CSV to write")->required();
        app->add_option("--depths", depths, "Comma separated depths")->delimiter(',');
        app->add_option("--variants", variants, "Comma separated variants")
            ->delimiter(',')
            ->check(CLI::IsMember({"refrpca", "corona"}, CLI::ignore_case));
        opts.attach(app, false);
    }

    int run() {
        const TrainConfig cfg = opts.resolve();
        std::vector<Variant> vs;
        for (const auto& v : variants) vs.push_back(parse_variant(v));
        if (depths.empty() || vs.empty()) throw ConfigError("sweep: need at least one depth and one variant");
        for (std::size_t d : depths)
            if (d == 0) throw ConfigError("sweep: depths must be positive");

        Resolved r;
        r.add("data", data_path);
        r.add("out", out);
        std::vector<std::string> ds;
        for (std::size_t d : depths) ds.push_back(std::to_string(d));
        r.add("depths", join(ds));
        r.add("variants", join(variants));
        opts.describe(r, false);
        ensure_parent(out);
        r.emit(fs::path(out.string() + ".config"));

        const Dataset data = load_dataset(data_path);
        std::cout << "variant,depth,mse_L,mse_S,mse_avg\n";
        const auto rows = depth_sweep(data, depths, vs, cfg, [](const SweepRow& row) {
            if (row.failed) {
                std::cerr << "cell " << to_string(row.variant) << " d=" << row.depth << " failed: " << row.error << "\n";
            }
            std::cout << to_string(row.variant) << ',' << row.depth << ',' << format_number(row.val.mse_L) << ','
                      << format_number(row.val.mse_S) << ',' << format_number(row.val.mse_avg) << std::endl;
        });
        std::ofstream csv = open_out(out);
        write_sweep_csv(csv, rows);
        bool any_failed = false;
        for (const auto& row : rows) any_failed = any_failed || row.failed;
        return any_failed ? kExitNumerical : 0;
    }
};

// ---------------------------------------------------------------- prox-plot

struct ProxPlotCommand {
    std::string op = "refrpca";
    double tau = 0.2, a2 = 0.2, a3 = 0.1, q = 1.0, s_p = 1.0, lo = -4.0, hi = 4.0, step = 1e-3;
    fs::path out;
    CLI::Option* out_opt = nullptr;

    void attach(CLI::App& root) {
        CLI::App* app = root.add_subcommand("prox-plot", "Sample a scalar shrinkage operator as x,y CSV");
        add_config_option(app);
        app->add_option("--operator", op, "soft or refrpca")->check(CLI::IsMember({"soft", "refrpca"}));
        app->add_option("--tau", tau, "Soft threshold level")->check(CLI::NonNegativeNumber);
        app->add_option("--a2", a2, "Sparsity threshold")->check(CLI::NonNegativeNumber);
        app->add_option("--a3", a3, "Reference threshold")->check(CLI::NonNegativeNumber);
        app->add_option("--q", q, "Entry weight");
        app->add_option("--sp", s_p, "Reference value");
        app->add_option("--min", lo, "Range start");
        app->add_option("--max", hi, "Range end");
        app->add_option("--step", step, "Sample spacing")->check(CLI::PositiveNumber);
        out_opt = app->add_option("--out", out, "CSV file (default: stdout)");
    }

    int run() {
        if (!(hi > lo)) throw ConfigError("prox-plot: --max must exceed --min");
        const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        std::ostringstream csv;
        csv << "x,y\n";
        const ProxParams p{a2, a3, q, s_p};
        for (std::size_t k = 0; k < count; ++k) {
            const double x = lo + step * static_cast<double>(k);
            const double y = op == "soft" ? soft_threshold(x, tau) : reweighted_l1l1_prox(x, p);
            csv << format_number(x) << ',' << format_number(y) << '\n';
        }
        if (out_opt->count() > 0) {
            std::ofstream f = open_out(out);
            f << csv.str();
        } else {
            std::cout << csv.str();
        }
        return 0;
    }
};

// ---------------------------------------------------------------- selftest

struct SelftestCommand {
    std::uint64_t seed = 1;
    fs::path out;
    CLI::Option* out_opt = nullptr;

    void attach(CLI::App& root) {
        CLI::App* app = root.add_subcommand("selftest", "Run the built-in oracle suites");
        add_config_option(app);
        app->add_option("--seed", seed, "Seed for all suites");
        out_opt = app->add_option("--out", out, "CSV file (default: stdout)");
    }

    int run() {
        const auto rows = run_selftest(seed);
        std::ostringstream csv;
        write_selftest_csv(csv, rows);
        if (out_opt->count() > 0) {
            std::ofstream f = open_out(out);
            f << csv.str();
        } else {
            std::cout << csv.str();
        }
        std::size_t failed = 0;
        for (const auto& r : rows) failed += r.passed ? 0 : 1;
        std::cerr << rows.size() - failed << "/" << rows.size() << " checks passed\n";
        return failed == 0 ? 0 : kExitNumerical;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust PCA video separation: classical solvers and unfolded networks"};
    app.require_subcommand(1);

    GenCommand gen;
    SolveCommand solve;
    TrainCommand train_cmd;
    EvalCommand eval;
    SweepCommand sweep;
    ProxPlotCommand prox_plot;
    SelftestCommand selftest;
    gen.attach(app);
    solve.attach(app);
    train_cmd.attach(app);
    eval.attach(app);
    sweep.attach(app);
    prox_plot.attach(app);
    selftest.attach(app);

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = expand_config(app, std::move(args));
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CLI::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector

    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "gen") return gen.run();
        if (name == "solve") return solve.run();
        if (name == "train") return train_cmd.run();
        if (name == "eval") return eval.run();
        if (name == "sweep") return sweep.run();
        if (name == "prox-plot") return prox_plot.run();
        return selftest.run();
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
}
