#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rpca/matrix.hpp"

namespace rpca {

/// Sparse-component shrinkage used by the CORONA-style iteration.
enum class SparseThreshold { Scalar, MixedL12 };

/// Parameters of the classical (non-learned) proximal-gradient solvers.
///
/// H1/H2 left empty mean the identity; storing nothing keeps n x n
/// identities out of memory at n = 1024.
struct SolverConfig {
    std::optional<Matrix> H1;
    std::optional<Matrix> H2;
    double c = 2.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    std::vector<double> q;  ///< length n
    Matrix P;               ///< n x n temporal projection
    int max_iters = 100;
    /// false: the iteration exactly as printed (no 1/c on the cross and data
    /// terms). true: L - (1/c) H1^T (H1 L + H2 S - M), which is a genuine
    /// proximal-gradient step.
    bool consistent_step = false;
    SparseThreshold corona_threshold = SparseThreshold::Scalar;

    /// H = I, c = 2, lambda1 = 1/sqrt(max(n, m)), lambda2 = lambda1,
    /// lambda3 = lambda2 / 2, q = 1, P = I.
    static SolverConfig defaults(std::size_t n, std::size_t m);

    /// Throws ParameterError / ShapeError.
    void validate(std::size_t n, std::size_t m) const;
};

struct DecompositionState {
    Matrix L;
    Matrix S;
};

struct IterationRecord {
    int iteration = 0;     ///< 1-based
    double objective = 0;  ///< refRPCA objective at the new iterate
    double residual = 0;   ///< ||M - H1 L - H2 S||_F
};

struct SolveResult {
    DecompositionState state;
    std::vector<IterationRecord> trace;
};

/// Reference frames [s_1, P s_1, ..., P s_{m-1}].
Matrix build_reference(const Matrix& S, const Matrix& P);

Matrix gradient_step_L(const Matrix& L, const Matrix& S, const Matrix& M, const SolverConfig& cfg);
Matrix gradient_step_S(const Matrix& L, const Matrix& S, const Matrix& M, const SolverConfig& cfg);

/// One refRPCA iteration from (L, S). When `frozen_reference` is given it
/// replaces the reference rebuilt from S.
DecompositionState ref_rpca_step(const Matrix& L, const Matrix& S, const Matrix& M, const SolverConfig& cfg,
                                 const Matrix* frozen_reference = nullptr);

/// One CORONA-style iteration (scalar or mixed l1,2 shrinkage of S).
DecompositionState corona_step(const Matrix& L, const Matrix& S, const Matrix& M, const SolverConfig& cfg);

/// Runs cfg.max_iters iterations from L = S = 0. SVD failures are rethrown
/// as NumericalError carrying the iteration index.
SolveResult ref_rpca_solve(const Matrix& M, const SolverConfig& cfg);
SolveResult corona_ista_solve(const Matrix& M, const SolverConfig& cfg);

/// 1/2 ||M - H1 L - H2 S||_F^2 + lambda1 ||L||_* + lambda2 ||Q o S||_1
///   + lambda3 ||Q o (S - S_P)||_1, with S_P = build_reference(S, P).
double refrpca_objective(const Matrix& M, const Matrix& L, const Matrix& S, const SolverConfig& cfg);
/// Same objective with an explicitly supplied reference.
double refrpca_objective(const Matrix& M, const Matrix& L, const Matrix& S, const Matrix& reference,
                         const SolverConfig& cfg);

/// ||[H1 H2]||_2^2, the smallest c for which the consistent step descends.
double lipschitz_constant(const SolverConfig& cfg, std::size_t n);

}  // namespace rpca
