#pragma once

#include <vector>

#include "rpca/matrix.hpp"

namespace rpca {

/// Thin SVD X = U diag(sigma) V^T with p = min(rows, cols).
struct SvdFactors {
    Matrix U;                   ///< rows x p, orthonormal columns
    std::vector<double> sigma;  ///< p values, non-increasing, >= 0
    Matrix V;                   ///< cols x p, orthonormal columns

    Matrix reconstruct() const;
};

/// One-sided (Hestenes) Jacobi SVD in fp64.
///
/// Deterministic: singular values sorted non-increasing and the
/// largest-magnitude entry of every column of U made positive.
/// Columns of U belonging to (numerically) zero singular values are
/// completed to an orthonormal set by Gram-Schmidt on the canonical basis.
/// Throws NumericalError when the sweep budget is exhausted.
SvdFactors svd(const Matrix& x, int max_sweeps = 80);

/// Nuclear norm: sum of singular values.
double nuclear_norm(const Matrix& x);

}  // namespace rpca
