#include "rpca/prox.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "rpca/errors.hpp"

namespace rpca {

namespace {

void require_nonnegative(double v, const char* what) {
    if (!(v >= 0.0)) throw ParameterError(std::string(what) + " must be nonnegative, got " + std::to_string(v));
}

}  // namespace

double soft_threshold(double x, double tau) {
    require_nonnegative(tau, "soft_threshold: tau");
    if (x > tau) return x - tau;
    if (x < -tau) return x + tau;
    return 0.0;
}

Matrix soft_threshold(const Matrix& x, double tau) {
    require_nonnegative(tau, "soft_threshold: tau");
    Matrix out = x;
    for (double& v : out.flat()) v = v > tau ? v - tau : (v < -tau ? v + tau : 0.0);
    return out;
}

Matrix mixed_l12_threshold(const Matrix& x, double tau) {
    require_nonnegative(tau, "mixed_l12_threshold: tau");
    Matrix out = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double norm2 = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) norm2 += x(i, j) * x(i, j);
        const double norm = std::sqrt(norm2);
        const double scale = norm > 0.0 ? std::max(1.0 - tau / norm, 0.0) : 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(i, j) * scale;
    }
    return out;
}

Matrix svt(const SvdFactors& f, double tau) {
    require_nonnegative(tau, "svt: tau");
    Matrix us = f.U;
    for (std::size_t j = 0; j < f.sigma.size(); ++j) {
        const double s = std::max(f.sigma[j] - tau, 0.0);
        for (double& e : us.col(j)) e *= s;
    }
    return matmul_nt(us, f.V);
}

Matrix svt(const Matrix& x, double tau) {
    require_nonnegative(tau, "svt: tau");
    return svt(svd(x), tau);
}

ProxResult reweighted_l1l1_prox_eval(double x, const ProxParams& p) {
    require_nonnegative(p.a2, "reweighted prox: a2");
    require_nonnegative(p.a3, "reweighted prox: a3");
    const double aq = std::abs(p.q);
    const double t2 = p.a2 * aq;
    const double t3 = p.a3 * aq;
    const double s = p.s_p;
    if (s >= 0.0) {
        if (x > s + t2 + t3) return {x - t2 - t3, ProxBranch::ShiftDown};
        if (s + t2 - t3 <= x && x <= s + t2 + t3) return {s, ProxBranch::RefPlateau};
        if (t2 - t3 < x && x < s + t2 - t3) return {x - t2 + t3, ProxBranch::Between};
        if (-t2 - t3 <= x && x <= t2 - t3) return {0.0, ProxBranch::ZeroPlateau};
        return {x + t2 + t3, ProxBranch::ShiftUp};
    }
    if (x > t2 + t3) return {x - t2 - t3, ProxBranch::ShiftDown};
    if (-t2 + t3 <= x && x <= t2 + t3) return {0.0, ProxBranch::ZeroPlateau};
    if (s - t2 + t3 < x && x < -t2 + t3) return {x + t2 - t3, ProxBranch::Between};
    if (s - t2 - t3 <= x && x <= s - t2 + t3) return {s, ProxBranch::RefPlateau};
    return {x + t2 + t3, ProxBranch::ShiftUp};
}

double reweighted_l1l1_prox(double x, const ProxParams& p) { return reweighted_l1l1_prox_eval(x, p).value; }

Matrix reweighted_l1l1_prox_matrix(const Matrix& x, double a2, double a3, std::span<const double> q,
                                   const Matrix& reference, std::vector<ProxBranch>& branches) {
    require_same_shape(x, reference, "reweighted_l1l1_prox_matrix");
    if (q.size() != x.rows()) throw ShapeError("reweighted_l1l1_prox_matrix: q length must equal row count");
    require_nonnegative(a2, "reweighted prox: a2");
    require_nonnegative(a3, "reweighted prox: a3");
    Matrix out(x.rows(), x.cols());
    branches.resize(x.size());
    for (std::size_t j = 0; j < x.cols(); ++j) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const auto r = reweighted_l1l1_prox_eval(x(i, j), {a2, a3, q[i], reference(i, j)});
            out(i, j) = r.value;
            branches[j * x.rows() + i] = r.branch;
        }
    }
    return out;
}

Matrix reweighted_l1l1_prox_matrix(const Matrix& x, double a2, double a3, std::span<const double> q,
                                   const Matrix& reference) {
    std::vector<ProxBranch> unused;
    return reweighted_l1l1_prox_matrix(x, a2, a3, q, reference, unused);
}

double prox_objective(double u, double x, const ProxParams& p) {
    return p.a2 * std::abs(p.q * u) + p.a3 * std::abs(p.q * (u - p.s_p)) + 0.5 * (u - x) * (u - x);
}

double prox_brute_oracle(double x, const ProxParams& p, double grid_halfwidth, int refinement_levels) {
    constexpr int kPoints = 200;
    double lo = -grid_halfwidth;
    double hi = grid_halfwidth;
    double best = x;
    double best_val = prox_objective(x, x, p);
    for (int level = 0; level < std::max(refinement_levels, 1); ++level) {
        const double step = (hi - lo) / kPoints;
        for (int k = 0; k <= kPoints; ++k) {
            const double u = lo + step * k;
            const double val = prox_objective(u, x, p);
            if (val < best_val) {
                best_val = val;
                best = u;
            }
        }
        // The objective is convex, so the minimizer lies within one step of the best grid point.
        lo = best - step;
        hi = best + step;
    }
    const double aq = std::abs(p.q);
    const std::array<double, 6> candidates{0.0,
                                           p.s_p,
                                           x - (p.a2 + p.a3) * aq,
                                           x - (p.a2 - p.a3) * aq,
                                           x + (p.a2 - p.a3) * aq,
                                           x + (p.a2 + p.a3) * aq};
    for (double u : candidates) {
        const double val = prox_objective(u, x, p);
        if (val < best_val) {
            best_val = val;
            best = u;
        }
    }
    return best;
}

double prox_optimality_gap(double u, double x, const ProxParams& p) {
    // 0 in (u - x) + t2*d|u| + t3*d|u - s_p|  <=>  x - u in [lo, hi]
    const double aq = std::abs(p.q);
    const double t2 = p.a2 * aq;
    const double t3 = p.a3 * aq;
    auto range = [](double z, double t) -> std::array<double, 2> {
        if (z > 0) return {t, t};
        if (z < 0) return {-t, -t};
        return {-t, t};
    };
    const auto r2 = range(u, t2);
    const auto r3 = range(u - p.s_p, t3);
    const double lo = r2[0] + r3[0];
    const double hi = r2[1] + r3[1];
    const double target = x - u;
    if (target < lo) return lo - target;
    if (target > hi) return target - hi;
    return 0.0;
}

}  // namespace rpca
