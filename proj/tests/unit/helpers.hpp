#pragma once

#include <cstdint>
#include <random>

#include "rpca/matrix.hpp"

namespace testutil {

inline rpca::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sd);
    rpca::Matrix m(r, c);
    for (double& v : m.flat()) v = normal(rng);
    return m;
}

inline double max_abs_diff(const rpca::Matrix& a, const rpca::Matrix& b) { return rpca::max_abs(a - b); }

inline double orthonormality_error(const rpca::Matrix& q) {
    return rpca::frobenius_norm(rpca::matmul_tn(q, q) - rpca::Matrix::identity(q.cols()));
}

}  // namespace testutil
