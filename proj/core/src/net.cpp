#include "rpca/net.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "rpca/errors.hpp"
#include "rpca/solvers.hpp"

namespace rpca {

std::string to_string(Variant v) { return v == Variant::RefRPCA ? "refrpca" : "corona"; }

Variant parse_variant(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "refrpca" || lower == "refrpca-net") return Variant::RefRPCA;
    if (lower == "corona") return Variant::Corona;
    throw ConfigError("unknown network variant '" + name + "' (expected refrpca or corona)");
}

LayerParams LayerParams::zeros_like() const {
    LayerParams out;
    for (std::size_t i = 0; i < 6; ++i) out.W[i] = ConvKernel(W[i].size());
    out.q.assign(q.size(), 0.0);
    out.P = Matrix(P.rows(), P.cols());
    return out;
}

NetworkParams NetworkParams::zeros_like() const {
    NetworkParams out{variant, geometry, {}};
    out.layers.reserve(layers.size());
    for (const auto& l : layers) out.layers.push_back(l.zeros_like());
    return out;
}

namespace {

// Delta scales of W1..W6 at initialization. With L_in = S_in = 0 only W1/W2
// act, so layer 1 computes SVT(M) and the shrunk M. Later layers start as the
// literal step with c = 1: pre_L = M - S, pre_S = M - L, which maps an exact
// split M = L + S to (L, S).
constexpr std::array<double, 6> kInitScale{1.0, 1.0, -1.0, 0.0, 0.0, -1.0};
constexpr double kInitNoise = 1e-3;

void require_tape_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b)) throw ShapeError(std::string("network_backward: ") + what + " shape mismatch");
}

}  // namespace

NetworkParams init_params(std::size_t depth, const NetworkGeometry& geometry, Variant variant, std::uint64_t seed) {
    if (depth < 1) throw ParameterError("init_params: depth must be >= 1");
    const std::size_t k = geometry.kernel_size;
    if (k == 0 || k % 2 == 0) throw ParameterError("init_params: kernel size must be odd");
    if (k > std::min(geometry.frame.height, geometry.frame.width)) throw ShapeError("init_params: kernel larger than frame");
    const std::size_t n = geometry.frame.pixels();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, kInitNoise);
    NetworkParams params{variant, geometry, {}};
    params.layers.reserve(depth);
    for (std::size_t d = 0; d < depth; ++d) {
        LayerParams layer;
        for (std::size_t i = 0; i < 6; ++i) {
            layer.W[i] = ConvKernel::delta(k, kInitScale[i]);
            if (i >= 2)
                for (double& w : layer.W[i].weights()) w += noise(rng);
        }
        layer.lambda1 = 0.1;
        layer.lambda2 = 0.1;
        layer.lambda3 = 0.05;
        if (variant == Variant::RefRPCA) {
            layer.q.assign(n, 1.0);
            layer.P = Matrix::identity(n);
        }
        params.layers.push_back(std::move(layer));
    }
    return params;
}

LayerOutput layer_forward(const Matrix& M, const Matrix& L_in, const Matrix& S_in, const LayerParams& params,
                          Variant variant, FrameShape frame) {
    require_same_shape(M, L_in, "layer_forward");
    require_same_shape(M, S_in, "layer_forward");
    LayerOutput out;
    LayerTape& tape = out.tape;
    tape.L_in = L_in;
    tape.S_in = S_in;
    const bool l_zero = all_zero(L_in);
    const bool s_zero = all_zero(S_in);

    tape.pre_L = conv2d_same(M, frame, params.W[0]);
    if (!s_zero) conv2d_same_accumulate(S_in, frame, params.W[2], tape.pre_L);
    if (!l_zero) conv2d_same_accumulate(L_in, frame, params.W[4], tape.pre_L);
    tape.pre_S = conv2d_same(M, frame, params.W[1]);
    if (!s_zero) conv2d_same_accumulate(S_in, frame, params.W[3], tape.pre_S);
    if (!l_zero) conv2d_same_accumulate(L_in, frame, params.W[5], tape.pre_S);

    tape.tau_L = std::max(params.lambda1, 0.0);
    tape.tau_2 = std::max(params.lambda2, 0.0);
    tape.tau_3 = std::max(params.lambda3, 0.0);

    tape.factors = svd(tape.pre_L);
    tape.L_out = svt(tape.factors, tape.tau_L);

    if (variant == Variant::RefRPCA) {
        if (params.q.size() != M.rows() || params.P.rows() != M.rows() || params.P.cols() != M.rows())
            throw ShapeError("layer_forward: refRPCA layer needs q (n) and P (n x n)");
        tape.reference = s_zero ? Matrix(M.rows(), M.cols()) : build_reference(S_in, params.P);
        tape.S_out = reweighted_l1l1_prox_matrix(tape.pre_S, tape.tau_2, tape.tau_3, params.q, tape.reference,
                                                 tape.branches);
    } else {
        tape.S_out = soft_threshold(tape.pre_S, tape.tau_2);
    }
    out.L = tape.L_out;
    out.S = tape.S_out;
    return out;
}

ForwardResult network_forward(const Matrix& M, const NetworkParams& params) {
    if (params.layers.empty()) throw ParameterError("network_forward: no layers");
    if (M.rows() != params.geometry.frame.pixels()) throw ShapeError("network_forward: M rows != frame pixels");
    ForwardResult result{Matrix(M.rows(), M.cols()), Matrix(M.rows(), M.cols()), {}};
    result.tape.M = M;
    result.tape.variant = params.variant;
    result.tape.frame = params.geometry.frame;
    result.tape.layers.reserve(params.layers.size());
    for (const auto& layer : params.layers) {
        auto out = layer_forward(M, result.L, result.S, layer, params.variant, params.geometry.frame);
        result.L = std::move(out.L);
        result.S = std::move(out.S);
        result.tape.layers.push_back(std::move(out.tape));
    }
    return result;
}

Matrix svd_backward(const SvdFactors& f, const Matrix& dU, std::span<const double> dSigma, const Matrix& dV,
                    double eps) {
    const std::size_t p = f.sigma.size();
    require_same_shape(f.U, dU, "svd_backward dU");
    require_same_shape(f.V, dV, "svd_backward dV");
    if (dSigma.size() != p) throw ShapeError("svd_backward: dSigma length");
    auto guard = [eps](double d) { return std::abs(d) < eps ? (d < 0 ? -eps : eps) : d; };

    const Matrix J = matmul_tn(f.U, dU);
    const Matrix K = matmul_tn(f.V, dV);
    Matrix inner(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < p; ++i) {
            if (i == j) {
                inner(i, i) = dSigma[i];
                continue;
            }
            const double F = 1.0 / guard(f.sigma[j] * f.sigma[j] - f.sigma[i] * f.sigma[i]);
            inner(i, j) = F * (J(i, j) - J(j, i)) * f.sigma[j] + f.sigma[i] * F * (K(i, j) - K(j, i));
        }
    }
    Matrix out = matmul_nt(matmul(f.U, inner), f.V);

    // (I - U U^T) dU S^-1 V^T
    Matrix perp_u = dU - matmul(f.U, J);
    for (std::size_t j = 0; j < p; ++j) {
        const double inv = 1.0 / std::max(f.sigma[j], eps);
        for (double& e : perp_u.col(j)) e *= inv;
    }
    out += matmul_nt(perp_u, f.V);

    // U S^-1 dV^T (I - V V^T)
    Matrix perp_v = dV - matmul(f.V, K);
    for (std::size_t j = 0; j < p; ++j) {
        const double inv = 1.0 / std::max(f.sigma[j], eps);
        for (double& e : perp_v.col(j)) e *= inv;
    }
    out += matmul_nt(f.U, perp_v);
    return out;
}

Matrix svt_backward(const SvdFactors& f, double tau, const Matrix& dY, double eps, double& dtau) {
    // Closed form of the SVD adjoint specialised to Y = U diag(g(sigma)) V^T,
    // g(s) = max(s - tau, 0). Pairs above the threshold use the cancelled
    // ratios 1 - tau/(s_i + s_j) and tau/(s_i + s_j), so nearly equal singular
    // values do not amplify rounding.
    const std::size_t p = f.sigma.size();
    if (dY.rows() != f.U.rows() || dY.cols() != f.V.rows()) throw ShapeError("svt_backward: dY shape");
    auto guard = [eps](double d) { return std::abs(d) < eps ? (d < 0 ? -eps : eps) : d; };
    std::vector<double> g(p), ratio(p);
    std::vector<bool> active(p);
    for (std::size_t i = 0; i < p; ++i) {
        active[i] = f.sigma[i] > tau;
        g[i] = active[i] ? f.sigma[i] - tau : 0.0;
        ratio[i] = active[i] ? g[i] / f.sigma[i] : 0.0;
    }

    const Matrix dYV = matmul(dY, f.V);      // n x p
    const Matrix G = matmul_tn(f.U, dYV);    // p x p
    Matrix inner(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < p; ++i) {
            const double si = f.sigma[i], sj = f.sigma[j];
            if (i == j) {
                if (active[i]) {
                    inner(i, i) = G(i, i);
                    dtau -= G(i, i);
                }
                continue;
            }
            double alpha = 0.0, beta = 0.0;
            if (active[i] && active[j]) {
                const double sum = si + sj;
                alpha = 1.0 - tau / sum;
                beta = tau / sum;
            } else if (active[i] || active[j]) {
                const double denom = guard(sj * sj - si * si);
                alpha = (g[j] * sj - g[i] * si) / denom;
                beta = (si * g[j] - sj * g[i]) / denom;
            }
            inner(i, j) = G(i, j) * alpha + G(j, i) * beta;
        }
    }
    Matrix out = matmul_nt(matmul(f.U, inner), f.V);

    // (I - U U^T) dY V diag(g/s) V^T
    Matrix perp_u = dYV - matmul(f.U, G);
    for (std::size_t j = 0; j < p; ++j)
        for (double& e : perp_u.col(j)) e *= ratio[j];
    out += matmul_nt(perp_u, f.V);

    // U diag(g/s) U^T dY (I - V V^T)
    if (f.V.rows() > p) {
        const Matrix dYtU = matmul_tn(dY, f.U);  // m x p
        Matrix perp_v = dYtU - matmul(f.V, transpose(G));
        for (std::size_t j = 0; j < p; ++j)
            for (double& e : perp_v.col(j)) e *= ratio[j];
        out += matmul_nt(f.U, perp_v);
    }
    return out;
}

namespace {

// Adjoint of the reweighted prox for one layer. Writes the cotangent of the
// pre-activation into d_pre and of the reference into d_ref; accumulates
// threshold and weight gradients (with respect to the clamped thresholds).
void prox_backward(const LayerTape& tape, const LayerParams& params, const Matrix& dS, Matrix& d_pre, Matrix& d_ref,
                   double& d_tau2, double& d_tau3, std::vector<double>& dq) {
    const std::size_t n = dS.rows();
    const double a2 = tape.tau_2, a3 = tape.tau_3;
    for (std::size_t j = 0; j < dS.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double g = dS(i, j);
            if (g == 0.0) continue;
            const double q = params.q[i];
            const double aq = std::abs(q);
            const double sq = q > 0 ? 1.0 : (q < 0 ? -1.0 : 0.0);
            // u = x - a2|q| s2 - a3|q| s3 on the linear pieces
            double s2 = 0.0, s3 = 0.0;
            switch (tape.branches[j * n + i]) {
                case ProxBranch::ShiftDown: s2 = 1.0; s3 = 1.0; break;
                case ProxBranch::ShiftUp: s2 = -1.0; s3 = -1.0; break;
                case ProxBranch::Between:
                    if (tape.reference(i, j) >= 0.0) { s2 = 1.0; s3 = -1.0; }
                    else { s2 = -1.0; s3 = 1.0; }
                    break;
                case ProxBranch::RefPlateau: d_ref(i, j) = g; continue;
                case ProxBranch::ZeroPlateau: continue;
            }
            d_pre(i, j) = g;
            d_tau2 -= aq * s2 * g;
            d_tau3 -= aq * s3 * g;
            dq[i] -= (a2 * s2 + a3 * s3) * sq * g;
        }
    }
}

void soft_backward(const LayerTape& tape, const Matrix& dS, Matrix& d_pre, double& d_tau2) {
    const double t = tape.tau_2;
    auto x = tape.pre_S.flat();
    auto g = dS.flat();
    auto out = d_pre.flat();
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] > t) { out[k] = g[k]; d_tau2 -= g[k]; }
        else if (x[k] < -t) { out[k] = g[k]; d_tau2 += g[k]; }
    }
}

// Reference S_P = [s_1, P s_1, ..., P s_{m-1}] adjoint.
void reference_backward(const Matrix& d_ref, const Matrix& S_in, const Matrix& P, Matrix& dS_in, Matrix& dP) {
    const std::size_t n = S_in.rows();
    const std::size_t m = S_in.cols();
    for (std::size_t i = 0; i < n; ++i) dS_in(i, 0) += d_ref(i, 0);
    std::vector<std::size_t> live;
    for (std::size_t t = 1; t < m; ++t)
        if (!std::all_of(d_ref.col(t).begin(), d_ref.col(t).end(), [](double v) { return v == 0.0; }))
            live.push_back(t);
    if (live.empty()) return;
    // One pass over P and dP: column k needs P(:, k)^T g_t and g_t s_{t-1}(k) for every frame.
    for (std::size_t k = 0; k < n; ++k) {
        const double* pk = P.col(k).data();
        double* dpk = dP.col(k).data();
        for (std::size_t t : live) {
            const double* g = d_ref.col(t).data();
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += pk[i] * g[i];
            dS_in(k, t - 1) += acc;
            const double s = S_in(k, t - 1);
            if (s == 0.0) continue;
            for (std::size_t i = 0; i < n; ++i) dpk[i] += g[i] * s;
        }
    }
}

}  // namespace

NetworkGradients network_backward(const Tape& tape, const NetworkParams& params, const Matrix& dL, const Matrix& dS,
                                  const BackwardOptions& options) {
    NetworkGradients grads;
    grads.layers.reserve(params.layers.size());
    for (const auto& l : params.layers) grads.layers.push_back(l.zeros_like());
    grads.dM = Matrix(tape.M.rows(), tape.M.cols());
    network_backward_accumulate(tape, params, dL, dS, grads, options);
    return grads;
}

void network_backward_accumulate(const Tape& tape, const NetworkParams& params, const Matrix& dL, const Matrix& dS,
                                 NetworkGradients& grads, const BackwardOptions& options) {
    if (tape.layers.size() != params.layers.size()) throw ShapeError("network_backward: tape/parameter depth mismatch");
    if (tape.variant != params.variant) throw ShapeError("network_backward: tape/parameter variant mismatch");
    require_tape_shape(dL, tape.M, "dL");
    require_tape_shape(dS, tape.M, "dS");
    if (grads.layers.size() != params.layers.size()) throw ShapeError("network_backward: gradient depth mismatch");
    require_tape_shape(grads.dM, tape.M, "dM");

    const FrameShape frame = tape.frame;
    Matrix gL = dL;
    Matrix gS = dS;
    for (std::size_t k = params.layers.size(); k-- > 0;) {
        const LayerTape& lt = tape.layers[k];
        const LayerParams& lp = params.layers[k];
        LayerParams& gp = grads.layers[k];
        require_tape_shape(lt.L_out, gL, "layer output");

        Matrix dS_in(gS.rows(), gS.cols());
        Matrix dL_in(gL.rows(), gL.cols());

        // Sparse branch.
        Matrix d_pre_S(gS.rows(), gS.cols());
        double d_tau2 = 0.0, d_tau3 = 0.0;
        if (params.variant == Variant::RefRPCA) {
            Matrix d_ref(gS.rows(), gS.cols());
            prox_backward(lt, lp, gS, d_pre_S, d_ref, d_tau2, d_tau3, gp.q);
            if (!options.detach_reference) reference_backward(d_ref, lt.S_in, lp.P, dS_in, gp.P);
        } else {
            soft_backward(lt, gS, d_pre_S, d_tau2);
        }
        if (lp.lambda2 > 0.0) gp.lambda2 += d_tau2;
        if (lp.lambda3 > 0.0) gp.lambda3 += d_tau3;

        // Low-rank branch.
        double d_tau1 = 0.0;
        const Matrix d_pre_L = svt_backward(lt.factors, lt.tau_L, gL, options.svd_eps, d_tau1);
        if (lp.lambda1 > 0.0) gp.lambda1 += d_tau1;

        // Convolutions.
        const bool s_zero = all_zero(lt.S_in);
        const bool l_zero = all_zero(lt.L_in);
        conv2d_kernel_grad_accumulate(tape.M, d_pre_L, frame, gp.W[0]);
        conv2d_kernel_grad_accumulate(tape.M, d_pre_S, frame, gp.W[1]);
        if (!s_zero) {
            conv2d_kernel_grad_accumulate(lt.S_in, d_pre_L, frame, gp.W[2]);
            conv2d_kernel_grad_accumulate(lt.S_in, d_pre_S, frame, gp.W[3]);
        }
        if (!l_zero) {
            conv2d_kernel_grad_accumulate(lt.L_in, d_pre_L, frame, gp.W[4]);
            conv2d_kernel_grad_accumulate(lt.L_in, d_pre_S, frame, gp.W[5]);
        }
        conv2d_adjoint_accumulate(d_pre_L, frame, lp.W[0], grads.dM);
        conv2d_adjoint_accumulate(d_pre_S, frame, lp.W[1], grads.dM);
        if (k > 0) {
            conv2d_adjoint_accumulate(d_pre_L, frame, lp.W[2], dS_in);
            conv2d_adjoint_accumulate(d_pre_S, frame, lp.W[3], dS_in);
            conv2d_adjoint_accumulate(d_pre_L, frame, lp.W[4], dL_in);
            conv2d_adjoint_accumulate(d_pre_S, frame, lp.W[5], dL_in);
        }
        gL = std::move(dL_in);
        gS = std::move(dS_in);
    }
}

}  // namespace rpca
