#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rpca/conv.hpp"
#include "rpca/matrix.hpp"
#include "rpca/prox.hpp"
#include "rpca/svd.hpp"
#include "rpca/video.hpp"

namespace rpca {

enum class Variant { RefRPCA, Corona };

std::string to_string(Variant v);
/// Accepts "refrpca" / "corona" (case-insensitive); throws ConfigError otherwise.
Variant parse_variant(const std::string& name);

/// Learnables of one unfolded layer.
///
/// Kernels are ordered W1..W6: W1, W3, W5 feed the low-rank branch (from M,
/// S, L), W2, W4, W6 the sparse branch. `q` and `P` are empty for CORONA
/// layers, which have no reference path.
struct LayerParams {
    std::array<ConvKernel, 6> W;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    std::vector<double> q;
    Matrix P;

    /// Same structure with every value zero (gradient accumulator).
    LayerParams zeros_like() const;
};

struct NetworkGeometry {
    FrameShape frame;
    std::size_t frames = 0;
    std::size_t kernel_size = 5;

    friend bool operator==(const NetworkGeometry&, const NetworkGeometry&) = default;
};

struct NetworkParams {
    Variant variant = Variant::RefRPCA;
    NetworkGeometry geometry;
    std::vector<LayerParams> layers;

    std::size_t depth() const noexcept { return layers.size(); }
    NetworkParams zeros_like() const;
};

/// Deterministic initialization for a fixed seed.
///
/// W1 = W2 = delta, W3 = W6 = -delta, W4 = W5 = 0 (the literal step with
/// c = 1), with N(0, 1e-3^2) noise on W3..W6. lambda1 = lambda2 = 0.1,
/// lambda3 = 0.05, q = 1, P = I.
NetworkParams init_params(std::size_t depth, const NetworkGeometry& geometry, Variant variant, std::uint64_t seed);

/// Everything a layer's backward pass needs.
struct LayerTape {
    Matrix L_in;
    Matrix S_in;
    Matrix pre_L;       ///< W1*M + W3*S + W5*L
    Matrix pre_S;       ///< W2*M + W4*S + W6*L
    SvdFactors factors; ///< of pre_L
    double tau_L = 0;   ///< clamped lambda1
    double tau_2 = 0;   ///< clamped lambda2
    double tau_3 = 0;   ///< clamped lambda3
    Matrix reference;   ///< S_P (refRPCA only)
    std::vector<ProxBranch> branches;  ///< refRPCA only, column-major
    Matrix L_out;
    Matrix S_out;
};

struct Tape {
    Matrix M;
    Variant variant = Variant::RefRPCA;
    FrameShape frame;
    std::vector<LayerTape> layers;
};

struct LayerOutput {
    Matrix L;
    Matrix S;
    LayerTape tape;
};

/// One layer: L_out = SVT(W1*M + W3*S + W5*L, lambda1); S_out from the
/// sparse pre-activation through the reweighted reference prox (refRPCA)
/// or scalar soft threshold (CORONA). Negative thresholds are clamped to 0.
LayerOutput layer_forward(const Matrix& M, const Matrix& L_in, const Matrix& S_in, const LayerParams& params,
                          Variant variant, FrameShape frame);

struct ForwardResult {
    Matrix L;
    Matrix S;
    Tape tape;
};

/// Applies all layers from L = S = 0.
ForwardResult network_forward(const Matrix& M, const NetworkParams& params);

struct BackwardOptions {
    /// Treat the reference S_P as a constant (no gradient into P or S_in through it).
    bool detach_reference = false;
    /// Guard for the 1/(sigma_i^2 - sigma_j^2) and 1/sigma terms of the SVD adjoint.
    double svd_eps = 1e-12;
};

struct NetworkGradients {
    std::vector<LayerParams> layers;
    Matrix dM;
};

/// Exact reverse-mode gradients of the recorded forward computation.
NetworkGradients network_backward(const Tape& tape, const NetworkParams& params, const Matrix& dL, const Matrix& dS,
                                  const BackwardOptions& options = {});

/// Adds the gradients of one more sample into `grads` (same layout as network_backward's result).
void network_backward_accumulate(const Tape& tape, const NetworkParams& params, const Matrix& dL, const Matrix& dS,
                                 NetworkGradients& grads, const BackwardOptions& options = {});

/// Reverse-mode adjoint of the thin SVD X = U diag(sigma) V^T.
/// Denominators smaller than eps in magnitude are replaced by +-eps.
Matrix svd_backward(const SvdFactors& factors, const Matrix& dU, std::span<const double> dSigma, const Matrix& dV,
                    double eps);

/// Adjoint of Y = SVT(X, tau) given the factors of X. Adds d<dY, Y>/dtau to `dtau`.
Matrix svt_backward(const SvdFactors& factors, double tau, const Matrix& dY, double eps, double& dtau);

/// Visits every parameter tensor of a layer in declaration order:
/// W1..W6, lambda1, lambda2, lambda3, q, P. Empty tensors are skipped.
template <class Layer, class Fn>
void for_each_tensor(Layer& layer, Fn&& fn) {
    static constexpr const char* kNames[6] = {"W1", "W2", "W3", "W4", "W5", "W6"};
    for (std::size_t i = 0; i < 6; ++i) fn(kNames[i], layer.W[i].weights());
    fn("lambda1", std::span(&layer.lambda1, 1));
    fn("lambda2", std::span(&layer.lambda2, 1));
    fn("lambda3", std::span(&layer.lambda3, 1));
    if (!layer.q.empty()) fn("q", std::span(layer.q));
    if (!layer.P.empty()) fn("P", layer.P.flat());
}

void save_network(const std::filesystem::path& path, const NetworkParams& params);
NetworkParams load_network(const std::filesystem::path& path);

}  // namespace rpca
