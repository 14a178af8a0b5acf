#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rpca/matrix.hpp"
#include "rpca/svd.hpp"

namespace rpca {

/// Scalar soft threshold sign(x) * max(|x| - tau, 0). Throws ParameterError for tau < 0.
double soft_threshold(double x, double tau);
Matrix soft_threshold(const Matrix& x, double tau);

/// Row-group shrinkage: row s_i -> s_i * max(1 - tau / ||s_i||_2, 0).
Matrix mixed_l12_threshold(const Matrix& x, double tau);

/// Singular value thresholding U diag(max(sigma - tau, 0)) V^T.
Matrix svt(const Matrix& x, double tau);
/// Same, reusing precomputed factors of x.
Matrix svt(const SvdFactors& factors, double tau);

/// Arguments of the scalar reweighted l1-l1 proximal operator
///   argmin_u  a2*|q*u| + a3*|q*(u - s_p)| + (u - x)^2 / 2.
struct ProxParams {
    double a2 = 0.0;   ///< weight of the sparsity term (lambda2 / c)
    double a3 = 0.0;   ///< weight of the reference term (lambda3 / c)
    double q = 1.0;    ///< per-entry weight; only |q| matters
    double s_p = 0.0;  ///< reference value
};

/// Which piece of the piecewise-linear operator produced the output.
///   ShiftDown    u = x - (a2 + a3)|q|
///   RefPlateau   u = s_p
///   Between      u strictly between 0 and s_p
///   ZeroPlateau  u = 0
///   ShiftUp      u = x + (a2 + a3)|q|
enum class ProxBranch : std::uint8_t { ShiftDown, RefPlateau, Between, ZeroPlateau, ShiftUp };

struct ProxResult {
    double value;
    ProxBranch branch;
};

/// Closed-form evaluation with branch tag. Throws ParameterError for a2 < 0 or a3 < 0.
ProxResult reweighted_l1l1_prox_eval(double x, const ProxParams& p);
double reweighted_l1l1_prox(double x, const ProxParams& p);

/// Entrywise application; entry (i, j) uses q[i] and reference S_P(i, j).
Matrix reweighted_l1l1_prox_matrix(const Matrix& x, double a2, double a3, std::span<const double> q,
                                   const Matrix& reference);

/// Same, also returning the branch of each entry (column-major, like Matrix).
Matrix reweighted_l1l1_prox_matrix(const Matrix& x, double a2, double a3, std::span<const double> q,
                                   const Matrix& reference, std::vector<ProxBranch>& branches);

/// Value of the scalar objective minimized by reweighted_l1l1_prox.
double prox_objective(double u, double x, const ProxParams& p);

/// Independent minimizer of prox_objective: multilevel grid search on
/// [-grid_halfwidth, grid_halfwidth], followed by comparison against the
/// kink candidates {0, s_p, x +- (a2 +- a3)|q|}. Uses no branch logic.
double prox_brute_oracle(double x, const ProxParams& p, double grid_halfwidth, int refinement_levels);

/// Distance from 0 to the subdifferential of prox_objective at u:
/// zero means u is the exact minimizer.
double prox_optimality_gap(double u, double x, const ProxParams& p);

}  // namespace rpca
