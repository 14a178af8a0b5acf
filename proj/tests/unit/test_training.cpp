#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "rpca/errors.hpp"
#include "rpca/training.hpp"

using namespace rpca;
using testutil::random_matrix;

namespace {

Dataset tiny_dataset(std::size_t n_train = 6, std::size_t n_val = 3) {
    DataGenConfig cfg;
    cfg.height = 8;
    cfg.width = 8;
    cfg.frames = 5;
    cfg.rank = 2;
    cfg.n_train = n_train;
    cfg.n_val = n_val;
    cfg.n_test = 2;
    cfg.seed = 3;
    return generate_dataset(cfg);
}

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.depth = 2;
    cfg.kernel_size = 3;
    cfg.batch_size = 3;
    cfg.epochs = 3;
    cfg.learning_rate = 1e-2;
    cfg.seed = 5;
    cfg.record_wallclock = false;
    return cfg;
}

DataSample sample_from(const Matrix& L, const Matrix& S, FrameShape f) {
    DataSample d;
    d.L = VideoMatrix(L, f);
    d.S = VideoMatrix(S, f);
    d.M = VideoMatrix(L + S, f);
    return d;
}

}  // namespace

TEST_CASE("compound loss examples") {
    const FrameShape f{2, 1};
    const Matrix L = random_matrix(2, 2, 1), S = random_matrix(2, 2, 2);
    const std::vector<DataSample> targets{sample_from(L, S, f)};
    std::vector<DecompositionState> preds{{L, S}};
    auto r = compound_mse_loss(preds, targets);
    CHECK(r.loss == 0.0);
    CHECK(all_zero(r.dL[0]));
    CHECK(all_zero(r.dS[0]));

    preds[0].L = L + Matrix(2, 2, 1.0);
    r = compound_mse_loss(preds, targets);
    CHECK(r.loss == doctest::Approx(2.0));
    CHECK(r.dL[0] == Matrix(2, 2, 1.0));
    CHECK_THROWS_AS(compound_mse_loss(std::span<const DecompositionState>{}, std::span<const DataSample>{}), ParameterError);
}

TEST_CASE("compound loss term-by-term and cotangent finite differences") {
    const FrameShape f{3, 2};
    std::vector<DataSample> targets;
    std::vector<DecompositionState> preds;
    for (std::uint64_t k = 0; k < 4; ++k) {
        targets.push_back(sample_from(random_matrix(6, 3, 10 + k), random_matrix(6, 3, 20 + k), f));
        preds.push_back({random_matrix(6, 3, 30 + k), random_matrix(6, 3, 40 + k)});
    }
    double expect = 0;
    for (std::size_t k = 0; k < 4; ++k)
        expect += squared_norm(targets[k].L.matrix() - preds[k].L) + squared_norm(targets[k].S.matrix() - preds[k].S);
    expect /= 2.0 * 4;
    const auto r = compound_mse_loss(preds, targets);
    CHECK(r.loss == doctest::Approx(expect).epsilon(1e-14));

    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t e = 0; e < 18; e += 5) {
            auto p = preds, m = preds;
            p[k].S.flat()[e] += 1e-6;
            m[k].S.flat()[e] -= 1e-6;
            const double fd = (compound_mse_loss(p, targets).loss - compound_mse_loss(m, targets).loss) / 2e-6;
            CHECK(fd == doctest::Approx(r.dS[k].flat()[e]).epsilon(1e-6));
            p = preds;
            m = preds;
            p[k].L.flat()[e] += 1e-6;
            m[k].L.flat()[e] -= 1e-6;
            const double fdl = (compound_mse_loss(p, targets).loss - compound_mse_loss(m, targets).loss) / 2e-6;
            CHECK(fdl == doctest::Approx(r.dL[k].flat()[e]).epsilon(1e-6));
        }
    }
}

TEST_CASE("adam single step from zero state") {
    NetworkParams params = init_params(1, {{4, 4}, 2, 3}, Variant::Corona, 1);
    const NetworkParams before = params;
    NetworkParams grads = params.zeros_like();
    for_each_tensor(grads.layers[0], [](const char*, std::span<double> v) {
        for (double& x : v) x = 1.0;
    });
    AdamState st = make_adam_state(params);
    TrainConfig cfg;
    adam_step(params, grads, st, cfg);
    CHECK(st.step == 1);
    // Hand-stepped: m = 0.1, v = 0.001, mhat = 1, vhat = 1, delta = -lr / (1 + eps).
    const double delta = -1e-3 * 1.0 / (1.0 + 1e-8);
    CHECK(params.layers[0].lambda1 == doctest::Approx(before.layers[0].lambda1 + delta).epsilon(1e-14));
    CHECK(params.layers[0].W[3].weights()[4] ==
          doctest::Approx(before.layers[0].W[3].weights()[4] + delta).epsilon(1e-14));
    CHECK(st.m[0][0] == doctest::Approx(0.1));
    CHECK(st.v[0][0] == doctest::Approx(0.001));
}

TEST_CASE("adam with zero gradient and constant gradient") {
    NetworkParams params = init_params(1, {{4, 4}, 2, 3}, Variant::RefRPCA, 1);
    AdamState st = make_adam_state(params);
    TrainConfig cfg;
    NetworkParams g = params.zeros_like();
    g.layers[0].lambda2 = 2.0;
    adam_step(params, g, st, cfg);
    const double m_after = st.m[7][0];
    const NetworkParams snapshot = params;
    adam_step(params, params.zeros_like(), st, cfg);
    // Zero gradient: moments decay; lambda2 still moves from momentum, every other value stays.
    CHECK(st.m[7][0] == doctest::Approx(0.9 * m_after));
    CHECK(params.layers[0].lambda1 == snapshot.layers[0].lambda1);
    CHECK(params.layers[0].P == snapshot.layers[0].P);

    NetworkParams p2 = init_params(1, {{4, 4}, 2, 3}, Variant::RefRPCA, 1);
    AdamState s2 = make_adam_state(p2);
    double last = p2.layers[0].lambda1;
    double step = 0;
    for (int k = 0; k < 2000; ++k) {
        NetworkParams gc = p2.zeros_like();
        gc.layers[0].lambda1 = 0.37;
        adam_step(p2, gc, s2, cfg);
        step = last - p2.layers[0].lambda1;
        last = p2.layers[0].lambda1;
    }
    CHECK(step == doctest::Approx(1e-3).epsilon(1e-4));
}

TEST_CASE("evaluate and mse_of") {
    const Dataset data = tiny_dataset();
    std::vector<DecompositionState> perfect, zero;
    for (const auto& s : data.val) {
        perfect.push_back({s.L.matrix(), s.S.matrix()});
        zero.push_back({Matrix(s.M.pixels(), s.M.frames()), Matrix(s.M.pixels(), s.M.frames())});
    }
    const auto p = mse_of(perfect, data.val);
    CHECK(p.mse_L == 0.0);
    CHECK(p.mse_S == 0.0);
    const auto z = mse_of(zero, data.val);
    double eL = 0, eS = 0;
    for (const auto& s : data.val) {
        eL += squared_norm(s.L.matrix()) / static_cast<double>(s.L.matrix().size());
        eS += squared_norm(s.S.matrix()) / static_cast<double>(s.S.matrix().size());
    }
    CHECK(z.mse_L == doctest::Approx(eL / 3).epsilon(1e-14));
    CHECK(z.mse_S == doctest::Approx(eS / 3).epsilon(1e-14));
    CHECK(z.mse_avg == doctest::Approx(0.5 * (z.mse_L + z.mse_S)));

    // Two-pass oracle through the network, and the per-element relation to the loss.
    const NetworkParams params = init_params(2, {data.config.frame(), 5, 3}, Variant::RefRPCA, 4);
    std::vector<DecompositionState> preds;
    for (const auto& s : data.val) {
        const auto f = network_forward(s.M.matrix(), params);
        preds.push_back({f.L, f.S});
    }
    const auto direct = mse_of(preds, data.val);
    const auto ev = evaluate(params, data.val);
    CHECK(ev.mse_L == doctest::Approx(direct.mse_L).epsilon(1e-14));
    CHECK(ev.mse_S == doctest::Approx(direct.mse_S).epsilon(1e-14));
    const double per_sample = static_cast<double>(data.val[0].M.matrix().size());
    CHECK(compound_mse_loss(preds, data.val).loss * 2.0 / per_sample ==
          doctest::Approx(ev.mse_L + ev.mse_S).epsilon(1e-12));
    const auto threaded = evaluate(params, data.val, 3);
    CHECK(threaded.mse_avg == ev.mse_avg);
}

TEST_CASE("train config validation") {
    const Dataset data = tiny_dataset();
    TrainConfig cfg = tiny_config();
    cfg.batch_size = 100;
    CHECK_THROWS_AS(train(data, cfg), ParameterError);
    cfg = tiny_config();
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(train(data, cfg), ParameterError);
}

TEST_CASE("train with zero epochs returns the initial parameters") {
    const Dataset data = tiny_dataset();
    TrainConfig cfg = tiny_config();
    cfg.epochs = 0;
    const auto r = train(data, cfg);
    CHECK(r.metrics.empty());
    const auto init = init_params(cfg.depth, {data.config.frame(), 5, 3}, cfg.variant, cfg.seed);
    CHECK(r.params.layers[0].W[2] == init.layers[0].W[2]);
}

TEST_CASE("training reduces the loss and is deterministic") {
    const Dataset data = tiny_dataset();
    for (Variant v : {Variant::RefRPCA, Variant::Corona}) {
        TrainConfig cfg = tiny_config();
        cfg.variant = v;
        cfg.epochs = 4;
        const auto a = train(data, cfg);
        REQUIRE(a.metrics.size() == 8);
        CHECK(a.metrics[0].split == "train");
        CHECK(a.metrics[1].split == "val");
        CHECK(a.metrics[6].mse_avg < a.metrics[0].mse_avg);
        CHECK(a.best_epoch >= 1);

        const auto b = train(data, cfg);
        std::ostringstream ca, cb;
        write_metrics_csv(ca, a.metrics);
        write_metrics_csv(cb, b.metrics);
        CHECK(ca.str() == cb.str());
        CHECK(ca.str().rfind("epoch,split,mse_L,mse_S,mse_avg,seconds\n", 0) == 0);

        // Threads only change scheduling, not the reduction order.
        cfg.threads = 3;
        const auto c = train(data, cfg);
        std::ostringstream cc;
        write_metrics_csv(cc, c.metrics);
        CHECK(cc.str() == ca.str());
    }
}

TEST_CASE("best validation epoch is selected") {
    const Dataset data = tiny_dataset();
    TrainConfig cfg = tiny_config();
    const auto r = train(data, cfg);
    double best = 1e300;
    std::size_t epoch = 0;
    for (const auto& row : r.metrics)
        if (row.split == "val" && row.mse_avg < best) {
            best = row.mse_avg;
            epoch = row.epoch;
        }
    CHECK(r.best_epoch == epoch);
    CHECK(evaluate(r.params, data.val).mse_avg == doctest::Approx(best).epsilon(1e-14));
    for (const auto& row : r.metrics) CHECK(row.mse_avg == doctest::Approx(0.5 * (row.mse_L + row.mse_S)));
}

TEST_CASE("divergence is reported") {
    const Dataset data = tiny_dataset();
    TrainConfig cfg = tiny_config();
    cfg.learning_rate = 1e200;
    CHECK_THROWS_AS(train(data, cfg), NumericalError);
}

TEST_CASE("depth sweep") {
    const Dataset data = tiny_dataset();
    TrainConfig cfg = tiny_config();
    cfg.epochs = 1;
    const std::vector<std::size_t> one{1};
    const std::vector<Variant> corona{Variant::Corona};
    const auto single = depth_sweep(data, one, corona, cfg);
    REQUIRE(single.size() == 1);
    CHECK(single[0].variant == Variant::Corona);
    CHECK(!single[0].failed);

    const std::vector<std::size_t> depths{1, 2};
    const std::vector<Variant> both{Variant::RefRPCA, Variant::Corona};
    const auto rows = depth_sweep(data, depths, both, cfg);
    REQUIRE(rows.size() == 4);
    const std::vector<std::size_t> reversed{2, 1};
    const auto rev = depth_sweep(data, reversed, both, cfg);
    for (const auto& a : rows)
        for (const auto& b : rev)
            if (a.variant == b.variant && a.depth == b.depth) CHECK(a.val.mse_avg == b.val.mse_avg);
    for (const auto& a : rows)
        if (a.variant == Variant::Corona && a.depth == 1) CHECK(a.val.mse_avg == single[0].val.mse_avg);

    std::ostringstream out;
    write_sweep_csv(out, rows);
    CHECK(out.str().rfind("variant,depth,mse_L,mse_S,mse_avg\n", 0) == 0);

    cfg.learning_rate = 1e200;
    const auto failed = depth_sweep(data, one, corona, cfg);
    REQUIRE(failed.size() == 1);
    CHECK(failed[0].failed);
    CHECK(!failed[0].error.empty());
    CHECK(sweep_cell_seed(1, Variant::RefRPCA, 2) != sweep_cell_seed(1, Variant::Corona, 2));
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(1e-12) == "1e-12");
}
