#include "rpca/selftest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "rpca/datagen.hpp"
#include "rpca/gradcheck.hpp"
#include "rpca/prox.hpp"
#include "rpca/solvers.hpp"
#include "rpca/svd.hpp"
#include "rpca/training.hpp"

namespace rpca {

namespace {

CheckResult check(std::string suite, std::string name, double value, double threshold) {
    return {std::move(suite), std::move(name), value, threshold, std::isfinite(value) && value <= threshold};
}

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> normal(0.0, sd);
    Matrix m(r, c);
    for (double& v : m.flat()) v = normal(rng);
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double d = 0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a.flat()[k] - b.flat()[k]));
    return d;
}

ProxParams random_prox_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ProxParams p;
    p.a2 = 1.0 * u(rng);
    p.a3 = 1.0 * u(rng);
    p.q = 4.0 * u(rng) - 2.0;
    p.s_p = 4.0 * u(rng) - 2.0;
    return p;
}

std::array<double, 4> breakpoints(const ProxParams& p) {
    const double t2 = p.a2 * std::abs(p.q), t3 = p.a3 * std::abs(p.q), s = p.s_p;
    if (s >= 0) return {s + t2 + t3, s + t2 - t3, t2 - t3, -t2 - t3};
    return {t2 + t3, -t2 + t3, s - t2 + t3, s - t2 - t3};
}

}  // namespace

std::vector<CheckResult> selftest_prox(std::uint64_t seed, std::size_t draws) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_oracle = 0, worst_gap = 0;
    std::size_t n_neg = 0, n_inverted = 0, n_near = 0;
    for (std::size_t k = 0; k < draws; ++k) {
        const ProxParams p = random_prox_params(rng);
        double x;
        if (k % 4 == 0) {
            // Near a breakpoint, on either side.
            const auto bps = breakpoints(p);
            x = bps[k / 4 % 4] + (u(rng) - 0.5) * 2e-7;
            ++n_near;
        } else {
            x = 6.0 * u(rng) - 3.0;
        }
        n_neg += p.s_p < 0;
        n_inverted += p.a2 < p.a3;
        const double closed = reweighted_l1l1_prox(x, p);
        const double halfwidth = std::abs(x) + std::abs(p.s_p) + 1.0;
        const double oracle = prox_brute_oracle(x, p, halfwidth, 6);
        worst_oracle = std::max(worst_oracle, std::abs(closed - oracle));
        worst_gap = std::max(worst_gap, prox_optimality_gap(closed, x, p));
    }
    const double nd = static_cast<double>(draws);
    return {
        check("prox", "closed_form_vs_brute_oracle_max_abs", worst_oracle, 1e-6),
        check("prox", "subgradient_certificate_max_gap", worst_gap, 1e-9),
        // Coverage: each regime must be hit by at least a fifth of the draws.
        check("prox", "coverage_negative_reference_shortfall", std::max(0.0, 0.2 - n_neg / nd), 0.0),
        check("prox", "coverage_a2_below_a3_shortfall", std::max(0.0, 0.2 - n_inverted / nd), 0.0),
        check("prox", "coverage_near_breakpoint_shortfall", std::max(0.0, 0.2 - n_near / nd), 0.0),
    };
}

std::vector<CheckResult> selftest_reductions(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<CheckResult> out;

    // lambda3 = 0, q = 1: refRPCA and CORONA iterate identically.
    const std::size_t n = 24, m = 8;
    const Matrix M = random_matrix(n, m, rng);
    for (bool consistent : {false, true}) {
        SolverConfig cfg = SolverConfig::defaults(n, m);
        cfg.lambda3 = 0.0;
        cfg.consistent_step = consistent;
        cfg.P = random_matrix(n, n, rng, 0.3);
        Matrix Lr(n, m), Sr(n, m), Lc(n, m), Sc(n, m);
        double worst = 0;
        for (int it = 0; it < 50; ++it) {
            auto r = ref_rpca_step(Lr, Sr, M, cfg);
            auto c = corona_step(Lc, Sc, M, cfg);
            Lr = std::move(r.L);
            Sr = std::move(r.S);
            Lc = std::move(c.L);
            Sc = std::move(c.S);
            worst = std::max({worst, max_abs_diff(Lr, Lc), max_abs_diff(Sr, Sc)});
        }
        out.push_back(check("reductions", consistent ? "lambda3_zero_solver_equiv_consistent"
                                                     : "lambda3_zero_solver_equiv_literal",
                            worst, 1e-12));
    }

    // s_p = 0: prox equals the soft threshold at (a2 + a3)|q|.
    double worst = 0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        ProxParams p = random_prox_params(rng);
        p.s_p = 0.0;
        const double x = 6.0 * u(rng) - 3.0;
        const double a = reweighted_l1l1_prox(x, p);
        const double b = soft_threshold(x, (p.a2 + p.a3) * std::abs(p.q));
        worst = std::max(worst, std::abs(a - b));
    }
    out.push_back(check("reductions", "zero_reference_equals_soft_threshold", worst, 1e-12));
    return out;
}

std::vector<CheckResult> selftest_gradients(std::uint64_t seed) {
    std::vector<CheckResult> out;
    for (Variant v : {Variant::RefRPCA, Variant::Corona}) {
        const auto inst = make_gradcheck_instance({4, 4}, 3, 2, 3, v, seed);
        out.push_back(check("gradients", to_string(v) + "/kink_margin_deficit", std::max(0.0, 1e-5 - inst.margin), 0.0));
        for (const auto& g : finite_difference_check(inst.params, inst.M, inst.R_L, inst.R_S, 1e-6)) {
            if (g.analytic_norm == 0.0 && g.rel_error == 0.0 && g.group == "lambda3") continue;  // unused by CORONA
            out.push_back(check("gradients", to_string(v) + "/" + g.group, g.rel_error, 1e-4));
        }
    }
    return out;
}

std::vector<CheckResult> selftest_descent(std::uint64_t seed, std::size_t instances) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < instances; ++k) {
        const std::size_t n = 8 + k % 9, m = 3 + k % 5;
        SolverConfig cfg = SolverConfig::defaults(n, m);
        cfg.consistent_step = true;
        cfg.lambda1 = 0.5 * u(rng);
        cfg.lambda2 = 0.5 * u(rng);
        cfg.lambda3 = 0.5 * u(rng);
        for (double& q : cfg.q) q = 4.0 * u(rng) - 2.0;
        cfg.P = random_matrix(n, n, rng, 0.5);
        if (k % 2 == 1) {
            cfg.H1 = random_matrix(n, n, rng, 0.3);
            cfg.H2 = random_matrix(n, n, rng, 0.3);
        }
        cfg.c = lipschitz_constant(cfg, n) * (1.0 + u(rng));
        const Matrix M = random_matrix(n, m, rng);
        const Matrix L = random_matrix(n, m, rng);
        const Matrix S = random_matrix(n, m, rng);
        const Matrix ref = build_reference(S, cfg.P);
        const double before = refrpca_objective(M, L, S, ref, cfg);
        const auto next = ref_rpca_step(L, S, M, cfg, &ref);
        const double after = refrpca_objective(M, next.L, next.S, ref, cfg);
        worst = std::max(worst, (after - before) / std::max(std::abs(before), 1e-300));
    }
    return {check("descent", "max_relative_objective_increase", std::max(worst, 0.0), 1e-10)};
}

std::vector<CheckResult> selftest_recovery(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 64, m = 20;
    const Matrix L_star = matmul(random_matrix(n, 2, rng), transpose(random_matrix(m, 2, rng)));
    Matrix S_star(n, m);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::size_t> idx(n * m);
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t nnz = idx.size() / 20;
    for (std::size_t k = 0; k < nnz; ++k) S_star.flat()[idx[k]] = (u(rng) < 0.5 ? -1.0 : 1.0) * (2.0 + 3.0 * u(rng));
    const Matrix M = L_star + S_star;

    // PCP weight ratio lambda2 / lambda1 = 1 / sqrt(max(n, m)) at overall scale 0.5;
    // c = 1 with H = I alternates exact block minimizations.
    SolverConfig cfg = SolverConfig::defaults(n, m);
    cfg.lambda1 = 0.5;
    cfg.lambda2 = cfg.lambda1 / std::sqrt(static_cast<double>(std::max(n, m)));
    cfg.lambda3 = cfg.lambda2 / 2.0;
    cfg.c = 1.0;
    cfg.consistent_step = false;
    cfg.max_iters = 500;
    const auto res = ref_rpca_solve(M, cfg);
    const double rel = frobenius_norm(res.state.L - L_star) / frobenius_norm(L_star);
    return {check("recovery", "planted_rank2_relative_error", rel, 5e-2)};
}

std::vector<CheckResult> selftest_data(std::uint64_t seed) {
    std::vector<CheckResult> out;
    DataGenConfig cfg;
    cfg.n_train = 12;
    cfg.n_val = 4;
    cfg.n_test = 4;
    cfg.seed = seed;
    const Dataset data = generate_dataset(cfg);
    double worst_add = 0, range_violation = 0, worst_rank = 0;
    for (const auto* split : {&data.train, &data.val, &data.test}) {
        for (const auto& s : *split) {
            const Matrix& M = s.M.matrix();
            worst_add = std::max(worst_add, max_abs(M - s.L.matrix() - s.S.matrix()));
            range_violation = std::max({range_violation, -min_value(M), max_value(M) - 1.0});
            const auto f = svd(s.L.matrix());
            worst_rank = std::max(worst_rank, f.sigma[cfg.rank + 1] / f.sigma[0]);
        }
    }
    out.push_back(check("data", "additivity_max_abs", worst_add, 1e-12));
    out.push_back(check("data", "range_violation", std::max(range_violation, 0.0), 0.0));
    out.push_back(check("data", "rank_tail_ratio", worst_rank, 1e-10));

    // IDX fixture: write, parse, write again; both byte streams and the parsed data must agree.
    std::mt19937_64 rng(seed);
    DigitSet digits;
    for (int k = 0; k < 5; ++k) {
        std::vector<std::uint8_t> img(28 * 28);
        for (auto& b : img) b = static_cast<std::uint8_t>(rng() & 0xFF);
        digits.images.push_back(std::move(img));
        digits.labels.push_back(static_cast<std::uint8_t>(k));
    }
    std::ostringstream img1, lab1, img2, lab2;
    write_idx_images(img1, digits);
    write_idx_labels(lab1, digits.labels);
    std::istringstream img_in(img1.str()), lab_in(lab1.str());
    DigitSet parsed = parse_idx_images(img_in);
    parsed.labels = parse_idx_labels(lab_in);
    write_idx_images(img2, parsed);
    write_idx_labels(lab2, parsed.labels);
    const bool same = parsed.images == digits.images && parsed.labels == digits.labels && img1.str() == img2.str() &&
                      lab1.str() == lab2.str();
    out.push_back(check("data", "idx_round_trip_mismatch", same ? 0.0 : 1.0, 0.0));
    return out;
}

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
    std::vector<CheckResult> all;
    for (auto&& part : {selftest_prox(seed), selftest_reductions(seed + 1), selftest_gradients(seed + 2),
                        selftest_descent(seed + 3), selftest_recovery(seed + 4), selftest_data(seed + 5)})
        all.insert(all.end(), part.begin(), part.end());
    return all;
}

void write_selftest_csv(std::ostream& out, std::span<const CheckResult> rows) {
    out << "suite,check,value,threshold,status\n";
    for (const auto& r : rows)
        out << r.suite << ',' << r.check << ',' << format_number(r.value) << ',' << format_number(r.threshold) << ','
            << (r.passed ? "pass" : "fail") << '\n';
}

}  // namespace rpca
