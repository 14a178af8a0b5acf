#include "rpca/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rpca/errors.hpp"

namespace rpca {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void rotate(double* a, double* b, std::size_t n, double c, double s) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ai = a[i];
        const double bi = b[i];
        a[i] = c * ai - s * bi;
        b[i] = s * ai + c * bi;
    }
}

// Orthonormalizes column j of `u` against columns [0, j) and the already
// accepted columns flagged in `valid`, seeding from canonical basis vectors.
void complete_column(Matrix& u, std::size_t j, const std::vector<bool>& valid) {
    const std::size_t n = u.rows();
    for (std::size_t e = 0; e < n; ++e) {
        std::vector<double> v(n, 0.0);
        v[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < u.cols(); ++k) {
                if (k == j || !valid[k]) continue;
                const double* uk = u.col(k).data();
                const double proj = dot(uk, v.data(), n);
                for (std::size_t i = 0; i < n; ++i) v[i] -= proj * uk[i];
            }
        }
        const double norm = std::sqrt(dot(v.data(), v.data(), n));
        if (norm > 0.5) {
            auto col = u.col(j);
            for (std::size_t i = 0; i < n; ++i) col[i] = v[i] / norm;
            return;
        }
    }
    throw NumericalError("svd: could not complete orthonormal basis");
}

// Tall case: rows >= cols.
SvdFactors svd_tall(const Matrix& x, int max_sweeps) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    Matrix w = x;
    Matrix v = Matrix::identity(p);
    constexpr double tol = 1e-15;

    std::vector<double> norms(p);
    for (std::size_t j = 0; j < p; ++j) norms[j] = dot(w.col(j).data(), w.col(j).data(), n);

    bool converged = p < 2;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t a = 0; a + 1 < p; ++a) {
            for (std::size_t b = a + 1; b < p; ++b) {
                const double alpha = norms[a];
                const double beta = norms[b];
                if (alpha == 0.0 || beta == 0.0) continue;
                double* wa = w.col(a).data();
                double* wb = w.col(b).data();
                const double gamma = dot(wa, wb, n);
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate(wa, wb, n, c, s);
                rotate(v.col(a).data(), v.col(b).data(), p, c, s);
                norms[a] = dot(wa, wa, n);
                norms[b] = dot(wb, wb, n);
            }
        }
    }
    if (!converged) throw NumericalError("svd: one-sided Jacobi did not converge");

    std::vector<double> sig(p);
    for (std::size_t j = 0; j < p; ++j) sig[j] = std::sqrt(dot(w.col(j).data(), w.col(j).data(), n));
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return sig[i] > sig[j]; });

    SvdFactors out{Matrix(n, p), std::vector<double>(p), Matrix(p, p)};
    const double smax = p == 0 ? 0.0 : sig[order[0]];
    const double cutoff = smax * static_cast<double>(std::max(n, p)) * std::numeric_limits<double>::epsilon();
    std::vector<bool> valid(p, false);
    for (std::size_t j = 0; j < p; ++j) {
        const std::size_t src = order[j];
        out.sigma[j] = sig[src];
        std::copy(v.col(src).begin(), v.col(src).end(), out.V.col(j).begin());
        if (sig[src] > cutoff && sig[src] > 0.0) {
            auto dst = out.U.col(j);
            const double* ws = w.col(src).data();
            for (std::size_t i = 0; i < n; ++i) dst[i] = ws[i] / sig[src];
            valid[j] = true;
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        if (!valid[j]) {
            complete_column(out.U, j, valid);
            valid[j] = true;
        }
    }

    for (std::size_t j = 0; j < p; ++j) {
        auto u = out.U.col(j);
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(u[i]) > std::abs(u[arg])) arg = i;
        if (u[arg] < 0.0) {
            for (double& e : u) e = -e;
            for (double& e : out.V.col(j)) e = -e;
        }
    }
    return out;
}

}  // namespace

SvdFactors svd(const Matrix& x, int max_sweeps) {
    if (!all_finite(x)) throw NumericalError("svd: non-finite input");
    if (x.rows() >= x.cols()) return svd_tall(x, max_sweeps);
    // Wide: decompose X^T = V S U^T, then swap roles. The sign convention is
    // re-applied on the new U.
    SvdFactors t = svd_tall(transpose(x), max_sweeps);
    SvdFactors out{std::move(t.V), std::move(t.sigma), std::move(t.U)};
    for (std::size_t j = 0; j < out.sigma.size(); ++j) {
        auto u = out.U.col(j);
        std::size_t arg = 0;
        for (std::size_t i = 1; i < u.size(); ++i)
            if (std::abs(u[i]) > std::abs(u[arg])) arg = i;
        if (u[arg] < 0.0) {
            for (double& e : u) e = -e;
            for (double& e : out.V.col(j)) e = -e;
        }
    }
    return out;
}

Matrix SvdFactors::reconstruct() const {
    Matrix us = U;
    for (std::size_t j = 0; j < sigma.size(); ++j)
        for (double& e : us.col(j)) e *= sigma[j];
    return matmul_nt(us, V);
}

double nuclear_norm(const Matrix& x) {
    const auto f = svd(x);
    return std::accumulate(f.sigma.begin(), f.sigma.end(), 0.0);
}

}  // namespace rpca
