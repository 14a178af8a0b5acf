#include "rpca/solvers.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "rpca/errors.hpp"
#include "rpca/prox.hpp"
#include "rpca/svd.hpp"

namespace rpca {

namespace {

Matrix apply(const std::optional<Matrix>& h, const Matrix& x) { return h ? matmul(*h, x) : x; }
Matrix apply_t(const std::optional<Matrix>& h, const Matrix& x) { return h ? matmul_tn(*h, x) : x; }

// Shared body of the two gradient steps: `self` is the component being
// updated (measured by h_self), `other` the remaining one.
Matrix gradient_step(const Matrix& self, const Matrix& other, const Matrix& M, const std::optional<Matrix>& h_self,
                     const std::optional<Matrix>& h_other, const SolverConfig& cfg) {
    require_same_shape(self, M, "gradient_step");
    require_same_shape(other, M, "gradient_step");
    const double inv_c = 1.0 / cfg.c;
    if (cfg.consistent_step) {
        Matrix residual = apply(h_self, self) + apply(h_other, other) - M;
        Matrix out = self;
        out.add_scaled(apply_t(h_self, residual), -inv_c);
        return out;
    }
    Matrix out = self;
    out.add_scaled(apply_t(h_self, apply(h_self, self)), -inv_c);
    out -= apply_t(h_self, apply(h_other, other));
    out += apply_t(h_self, M);
    return out;
}

double weighted_l1(const Matrix& x, const std::vector<double>& q) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j)
        for (std::size_t i = 0; i < x.rows(); ++i) acc += std::abs(q[i] * x(i, j));
    return acc;
}

template <class Step>
SolveResult run(const Matrix& M, const SolverConfig& cfg, Step&& step) {
    cfg.validate(M.rows(), M.cols());
    SolveResult result{{Matrix(M.rows(), M.cols()), Matrix(M.rows(), M.cols())}, {}};
    result.trace.reserve(static_cast<std::size_t>(cfg.max_iters));
    for (int k = 1; k <= cfg.max_iters; ++k) {
        try {
            result.state = step(result.state.L, result.state.S);
        } catch (const NumericalError& e) {
            throw NumericalError(e.what(), k);
        }
        if (!all_finite(result.state.L) || !all_finite(result.state.S))
            throw NumericalError("solver produced a non-finite iterate", k);
        const Matrix fit = M - apply(cfg.H1, result.state.L) - apply(cfg.H2, result.state.S);
        result.trace.push_back(
            {k, refrpca_objective(M, result.state.L, result.state.S, cfg), frobenius_norm(fit)});
    }
    return result;
}

}  // namespace

SolverConfig SolverConfig::defaults(std::size_t n, std::size_t m) {
    SolverConfig cfg;
    cfg.c = 2.0;
    cfg.lambda1 = 1.0 / std::sqrt(static_cast<double>(std::max(n, m)));
    cfg.lambda2 = cfg.lambda1;
    cfg.lambda3 = cfg.lambda2 / 2.0;
    cfg.q.assign(n, 1.0);
    cfg.P = Matrix::identity(n);
    return cfg;
}

void SolverConfig::validate(std::size_t n, std::size_t m) const {
    if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("solver: c must be positive and finite");
    if (max_iters < 1) throw ParameterError("solver: max_iters must be >= 1");
    for (double l : {lambda1, lambda2, lambda3})
        if (!(l >= 0.0) || !std::isfinite(l)) throw ParameterError("solver: lambdas must be nonnegative and finite");
    if (q.size() != n) throw ShapeError("solver: q must have length n = " + std::to_string(n));
    if (P.rows() != n || P.cols() != n) throw ShapeError("solver: P must be n x n");
    for (const auto* h : {&H1, &H2})
        if (*h && ((*h)->rows() != n || (*h)->cols() != n)) throw ShapeError("solver: H must be n x n");
    if (m == 0) throw ShapeError("solver: M has no frames");
}

Matrix build_reference(const Matrix& S, const Matrix& P) {
    if (P.rows() != S.rows() || P.cols() != S.rows()) throw ShapeError("build_reference: P must be n x n");
    Matrix out(S.rows(), S.cols());
    if (S.cols() == 0) return out;
    std::copy(S.col(0).begin(), S.col(0).end(), out.col(0).begin());
    const std::size_t n = S.rows();
    // One pass over P; every output frame stays cache resident.
    for (std::size_t k = 0; k < n; ++k) {
        const double* pk = P.col(k).data();
        for (std::size_t t = 1; t < S.cols(); ++t) {
            const double s = S(k, t - 1);
            if (s == 0.0) continue;
            double* dst = out.col(t).data();
            for (std::size_t i = 0; i < n; ++i) dst[i] += pk[i] * s;
        }
    }
    return out;
}

Matrix gradient_step_L(const Matrix& L, const Matrix& S, const Matrix& M, const SolverConfig& cfg) {
    return gradient_step(L, S, M, cfg.H1, cfg.H2, cfg);
}

Matrix gradient_step_S(const Matrix& L, const Matrix& S, const Matrix& M, const SolverConfig& cfg) {
    return gradient_step(S, L, M, cfg.H2, cfg.H1, cfg);
}

DecompositionState ref_rpca_step(const Matrix& L, const Matrix& S, const Matrix& M, const SolverConfig& cfg,
                                 const Matrix* frozen_reference) {
    const Matrix l_tilde = gradient_step_L(L, S, M, cfg);
    const Matrix s_tilde = gradient_step_S(L, S, M, cfg);
    DecompositionState next;
    next.L = svt(l_tilde, cfg.lambda1 / cfg.c);
    const Matrix reference = frozen_reference ? *frozen_reference : build_reference(S, cfg.P);
    next.S = reweighted_l1l1_prox_matrix(s_tilde, cfg.lambda2 / cfg.c, cfg.lambda3 / cfg.c, cfg.q, reference);
    return next;
}

DecompositionState corona_step(const Matrix& L, const Matrix& S, const Matrix& M, const SolverConfig& cfg) {
    const Matrix l_tilde = gradient_step_L(L, S, M, cfg);
    const Matrix s_tilde = gradient_step_S(L, S, M, cfg);
    DecompositionState next;
    next.L = svt(l_tilde, cfg.lambda1 / cfg.c);
    next.S = cfg.corona_threshold == SparseThreshold::Scalar ? soft_threshold(s_tilde, cfg.lambda2 / cfg.c)
                                                             : mixed_l12_threshold(s_tilde, cfg.lambda2 / cfg.c);
    return next;
}

SolveResult ref_rpca_solve(const Matrix& M, const SolverConfig& cfg) {
    return run(M, cfg, [&](const Matrix& L, const Matrix& S) { return ref_rpca_step(L, S, M, cfg); });
}

SolveResult corona_ista_solve(const Matrix& M, const SolverConfig& cfg) {
    return run(M, cfg, [&](const Matrix& L, const Matrix& S) { return corona_step(L, S, M, cfg); });
}

double refrpca_objective(const Matrix& M, const Matrix& L, const Matrix& S, const Matrix& reference,
                         const SolverConfig& cfg) {
    require_same_shape(M, L, "refrpca_objective");
    require_same_shape(M, S, "refrpca_objective");
    require_same_shape(M, reference, "refrpca_objective");
    if (cfg.q.size() != M.rows()) throw ShapeError("refrpca_objective: q length");
    const Matrix fit = M - apply(cfg.H1, L) - apply(cfg.H2, S);
    double value = 0.5 * squared_norm(fit);
    if (cfg.lambda1 != 0.0) value += cfg.lambda1 * nuclear_norm(L);
    value += cfg.lambda2 * weighted_l1(S, cfg.q);
    if (cfg.lambda3 != 0.0) value += cfg.lambda3 * weighted_l1(S - reference, cfg.q);
    return value;
}

double refrpca_objective(const Matrix& M, const Matrix& L, const Matrix& S, const SolverConfig& cfg) {
    return refrpca_objective(M, L, S, build_reference(S, cfg.P), cfg);
}

double lipschitz_constant(const SolverConfig& cfg, std::size_t n) {
    if (!cfg.H1 && !cfg.H2) return 2.0;
    Matrix stacked(n, 2 * n);
    const Matrix h1 = cfg.H1 ? *cfg.H1 : Matrix::identity(n);
    const Matrix h2 = cfg.H2 ? *cfg.H2 : Matrix::identity(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::copy(h1.col(j).begin(), h1.col(j).end(), stacked.col(j).begin());
        std::copy(h2.col(j).begin(), h2.col(j).end(), stacked.col(n + j).begin());
    }
    const double s = svd(stacked).sigma.front();
    return s * s;
}

}  // namespace rpca
