#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "rpca/errors.hpp"
#include "rpca/prox.hpp"
#include "rpca/solvers.hpp"
#include "rpca/svd.hpp"

using namespace rpca;
using testutil::max_abs_diff;
using testutil::random_matrix;

namespace {

Matrix unit_column(std::size_t n, std::size_t k) {
    Matrix e(n, 1);
    e(k, 0) = 1.0;
    return e;
}

SolverConfig random_config(std::size_t n, std::size_t m, std::uint64_t seed) {
    SolverConfig cfg = SolverConfig::defaults(n, m);
    cfg.H1 = random_matrix(n, n, seed, 0.4);
    cfg.H2 = random_matrix(n, n, seed + 1, 0.4);
    cfg.P = random_matrix(n, n, seed + 2, 0.5);
    const Matrix q = random_matrix(n, 1, seed + 3);
    cfg.q.assign(q.flat().begin(), q.flat().end());
    cfg.c = 3.0;
    cfg.lambda1 = 0.3;
    cfg.lambda2 = 0.2;
    cfg.lambda3 = 0.15;
    return cfg;
}

}  // namespace

TEST_CASE("build_reference") {
    const Matrix S = random_matrix(5, 4, 1);
    const Matrix r = build_reference(S, Matrix::identity(5));
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(r(i, 0) == S(i, 0));
        for (std::size_t t = 1; t < 4; ++t) CHECK(r(i, t) == S(i, t - 1));
    }
    CHECK(all_zero(build_reference(Matrix(5, 4), random_matrix(5, 5, 2))));

    Matrix E(3, 3);
    for (std::size_t k = 0; k < 3; ++k) E(k, k) = 1.0;
    const Matrix two = 2.0 * Matrix::identity(3);
    const Matrix out = build_reference(E, two);
    CHECK(out == Matrix::from_rows({{1, 2, 0}, {0, 0, 2}, {0, 0, 0}}));

    const Matrix P = random_matrix(5, 5, 3);
    const Matrix rr = build_reference(S, P);
    for (std::size_t t = 1; t < 4; ++t) {
        Matrix prev(5, 1);
        for (std::size_t i = 0; i < 5; ++i) prev(i, 0) = S(i, t - 1);
        const Matrix expect = matmul(P, prev);
        for (std::size_t i = 0; i < 5; ++i) CHECK(rr(i, t) == doctest::Approx(expect(i, 0)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(build_reference(S, Matrix(4, 4)), ShapeError);
    (void)unit_column;
}

TEST_CASE("gradient steps") {
    const std::size_t n = 6, m = 4;
    const Matrix M = random_matrix(n, m, 5);
    SolverConfig cfg = SolverConfig::defaults(n, m);
    cfg.consistent_step = true;
    const Matrix zero(n, m);
    CHECK(max_abs_diff(gradient_step_L(zero, zero, M, cfg), 0.5 * M) < 1e-15);

    cfg.consistent_step = false;
    cfg.c = 1.0;
    const Matrix S = random_matrix(n, m, 6);
    CHECK(max_abs_diff(gradient_step_L(zero, S, M, cfg), M - S) < 1e-15);

    // Dense expression oracle with explicit H.
    SolverConfig r = random_config(n, m, 10);
    const Matrix L = random_matrix(n, m, 20);
    const Matrix& H1 = *r.H1;
    const Matrix& H2 = *r.H2;
    for (bool consistent : {false, true}) {
        r.consistent_step = consistent;
        Matrix eL, eS;
        if (consistent) {
            const Matrix resid = matmul(H1, L) + matmul(H2, S) - M;
            eL = L - (1.0 / r.c) * matmul(transpose(H1), resid);
            eS = S - (1.0 / r.c) * matmul(transpose(H2), resid);
        } else {
            eL = L - (1.0 / r.c) * matmul(matmul(transpose(H1), H1), L) - matmul(matmul(transpose(H1), H2), S) +
                 matmul(transpose(H1), M);
            eS = S - (1.0 / r.c) * matmul(matmul(transpose(H2), H2), S) - matmul(matmul(transpose(H2), H1), L) +
                 matmul(transpose(H2), M);
        }
        CHECK(max_abs_diff(gradient_step_L(L, S, M, r), eL) < 1e-12);
        CHECK(max_abs_diff(gradient_step_S(L, S, M, r), eS) < 1e-12);
    }
}

TEST_CASE("solver config validation") {
    SolverConfig cfg = SolverConfig::defaults(4, 3);
    CHECK_NOTHROW(cfg.validate(4, 3));
    CHECK(cfg.lambda1 == doctest::Approx(0.5));
    CHECK(cfg.lambda2 == cfg.lambda1);
    CHECK(cfg.lambda3 == doctest::Approx(0.25));
    cfg.c = 0.0;
    CHECK_THROWS_AS(cfg.validate(4, 3), ParameterError);
    cfg = SolverConfig::defaults(4, 3);
    cfg.max_iters = 0;
    CHECK_THROWS_AS(cfg.validate(4, 3), ParameterError);
    cfg = SolverConfig::defaults(4, 3);
    cfg.lambda2 = -1;
    CHECK_THROWS_AS(cfg.validate(4, 3), ParameterError);
    cfg = SolverConfig::defaults(4, 3);
    cfg.q.pop_back();
    CHECK_THROWS_AS(cfg.validate(4, 3), ShapeError);
    cfg = SolverConfig::defaults(4, 3);
    cfg.H1 = Matrix(3, 3);
    CHECK_THROWS_AS(cfg.validate(4, 3), ShapeError);
}

TEST_CASE("solvers on zero input") {
    SolverConfig cfg = SolverConfig::defaults(6, 4);
    cfg.max_iters = 5;
    const Matrix M(6, 4);
    for (const auto& res : {ref_rpca_solve(M, cfg), corona_ista_solve(M, cfg)}) {
        CHECK(all_zero(res.state.L));
        CHECK(all_zero(res.state.S));
        CHECK(res.trace.size() == 5);
        CHECK(res.trace.front().iteration == 1);
        CHECK(res.trace.back().objective == 0.0);
    }
}

TEST_CASE("large sparse penalties push everything into L") {
    const Matrix M = random_matrix(8, 5, 3);
    SolverConfig cfg = SolverConfig::defaults(8, 5);
    cfg.consistent_step = true;
    cfg.lambda1 = 0.0;
    cfg.lambda2 = 1e6;
    cfg.lambda3 = 1e6;
    cfg.max_iters = 200;
    const auto res = ref_rpca_solve(M, cfg);
    CHECK(all_zero(res.state.S));
    CHECK(max_abs_diff(res.state.L, M) < 1e-12);
}

TEST_CASE("first corona iteration in closed form") {
    const Matrix M = random_matrix(7, 5, 8);
    SolverConfig cfg = SolverConfig::defaults(7, 5);
    cfg.c = 1.0;
    cfg.max_iters = 1;
    const auto res = corona_ista_solve(M, cfg);
    CHECK(max_abs_diff(res.state.L, svt(M, cfg.lambda1)) < 1e-12);
    CHECK(max_abs_diff(res.state.S, soft_threshold(M, cfg.lambda2)) < 1e-15);

    cfg.corona_threshold = SparseThreshold::MixedL12;
    const auto grp = corona_ista_solve(M, cfg);
    CHECK(max_abs_diff(grp.state.S, mixed_l12_threshold(M, cfg.lambda2)) < 1e-15);
}

TEST_CASE("lambda3 = 0 and q = 1 reduce refRPCA to CORONA bit for bit") {
    const Matrix M = random_matrix(12, 6, 4);
    for (bool consistent : {false, true}) {
        SolverConfig cfg = SolverConfig::defaults(12, 6);
        cfg.consistent_step = consistent;
        cfg.lambda3 = 0.0;
        cfg.P = random_matrix(12, 12, 9);
        cfg.max_iters = 30;
        const auto a = ref_rpca_solve(M, cfg);
        const auto b = corona_ista_solve(M, cfg);
        CHECK(a.state.L == b.state.L);
        CHECK(a.state.S == b.state.S);
        for (std::size_t k = 0; k < a.trace.size(); ++k) CHECK(a.trace[k].residual == b.trace[k].residual);
    }
}

TEST_CASE("objective four-term oracle") {
    const std::size_t n = 5, m = 4;
    const Matrix M = random_matrix(n, m, 1), L = random_matrix(n, m, 2), S = random_matrix(n, m, 3);
    const SolverConfig cfg = random_config(n, m, 30);
    const Matrix ref = build_reference(S, cfg.P);
    const double fit = 0.5 * squared_norm(M - matmul(*cfg.H1, L) - matmul(*cfg.H2, S));
    double l1 = 0, l1ref = 0;
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            l1 += std::abs(cfg.q[i] * S(i, j));
            l1ref += std::abs(cfg.q[i] * (S(i, j) - ref(i, j)));
        }
    }
    double nuc = 0;
    for (double s : svd(L).sigma) nuc += s;
    const double expect = fit + cfg.lambda1 * nuc + cfg.lambda2 * l1 + cfg.lambda3 * l1ref;
    CHECK(refrpca_objective(M, L, S, cfg) == doctest::Approx(expect).epsilon(1e-12));

    SolverConfig id = SolverConfig::defaults(n, m);
    CHECK(refrpca_objective(Matrix(n, m), Matrix(n, m), Matrix(n, m), id) == 0.0);
    id.lambda1 = 0.0;
    CHECK(refrpca_objective(M, M, Matrix(n, m), id) == 0.0);
}

TEST_CASE("conditional descent with frozen reference") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 6 + seed % 4, m = 3 + seed % 3;
        SolverConfig cfg = random_config(n, m, 100 + seed);
        cfg.consistent_step = true;
        cfg.c = lipschitz_constant(cfg, n);
        const Matrix M = random_matrix(n, m, 200 + seed), L = random_matrix(n, m, 300 + seed),
                     S = random_matrix(n, m, 400 + seed);
        const Matrix ref = build_reference(S, cfg.P);
        const auto next = ref_rpca_step(L, S, M, cfg, &ref);
        const double before = refrpca_objective(M, L, S, ref, cfg);
        const double after = refrpca_objective(M, next.L, next.S, ref, cfg);
        CHECK(after <= before * (1 + 1e-10));
    }
}

TEST_CASE("lipschitz constant") {
    SolverConfig cfg = SolverConfig::defaults(4, 3);
    CHECK(lipschitz_constant(cfg, 4) == doctest::Approx(2.0).epsilon(1e-12));
    cfg.H1 = 3.0 * Matrix::identity(4);
    CHECK(lipschitz_constant(cfg, 4) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("iterate stays put at a fixed point") {
    const Matrix M = random_matrix(10, 6, 12);
    SolverConfig cfg = SolverConfig::defaults(10, 6);
    cfg.consistent_step = true;
    cfg.lambda3 = 0.0;
    cfg.max_iters = 3000;
    const auto res = ref_rpca_solve(M, cfg);
    const auto next = ref_rpca_step(res.state.L, res.state.S, M, cfg);
    CHECK(max_abs_diff(next.L, res.state.L) < 1e-12);
    CHECK(max_abs_diff(next.S, res.state.S) < 1e-12);
}

TEST_CASE("iterates stay finite and trace residuals match") {
    const Matrix M = random_matrix(9, 5, 13);
    SolverConfig cfg = SolverConfig::defaults(9, 5);
    cfg.max_iters = 20;
    const auto res = ref_rpca_solve(M, cfg);
    CHECK(all_finite(res.state.L));
    CHECK(all_finite(res.state.S));
    CHECK(res.trace.back().residual == doctest::Approx(frobenius_norm(M - res.state.L - res.state.S)));
    CHECK(res.trace.back().objective == doctest::Approx(refrpca_objective(M, res.state.L, res.state.S, cfg)));
}
