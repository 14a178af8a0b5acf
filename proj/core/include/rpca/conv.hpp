#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rpca/matrix.hpp"
#include "rpca/video.hpp"

namespace rpca {

/// Square k x k filter with odd k, stored row-major (ky, kx).
class ConvKernel {
public:
    ConvKernel() = default;
    /// Zero kernel; throws ParameterError for even or zero k.
    explicit ConvKernel(std::size_t k);
    ConvKernel(std::size_t k, std::vector<double> weights);

    /// Scaled centered delta: the identity filter when scale == 1.
    static ConvKernel delta(std::size_t k, double scale = 1.0);

    std::size_t size() const noexcept { return k_; }
    std::size_t radius() const noexcept { return k_ / 2; }
    double& operator()(std::size_t ky, std::size_t kx) noexcept { return w_[ky * k_ + kx]; }
    double operator()(std::size_t ky, std::size_t kx) const noexcept { return w_[ky * k_ + kx]; }
    std::span<double> weights() noexcept { return w_; }
    std::span<const double> weights() const noexcept { return w_; }

    friend bool operator==(const ConvKernel&, const ConvKernel&) = default;

private:
    std::size_t k_ = 0;
    std::vector<double> w_;
};

// Convolution here is cross-correlation with zero padding:
//   out(y, x) = sum_{dy,dx} K(r+dy, r+dx) * in(y+dy, x+dx),   r = k/2,
// applied independently to every frame (column).

VideoMatrix conv2d_same(const VideoMatrix& video, const ConvKernel& kernel);
Matrix conv2d_same(const Matrix& video, FrameShape shape, const ConvKernel& kernel);
/// out += conv2d_same(video, kernel)
void conv2d_same_accumulate(const Matrix& video, FrameShape shape, const ConvKernel& kernel,
                            Matrix& out);

/// Adjoint of conv2d_same in its video argument: correlation with the flipped kernel.
Matrix conv2d_adjoint(const Matrix& cotangent, FrameShape shape, const ConvKernel& kernel);
void conv2d_adjoint_accumulate(const Matrix& cotangent, FrameShape shape, const ConvKernel& kernel,
                               Matrix& out);

/// Gradient of <cotangent, conv2d_same(video, K)> with respect to K, added into `grad`.
void conv2d_kernel_grad_accumulate(const Matrix& video, const Matrix& cotangent, FrameShape shape,
                                   ConvKernel& grad);

}  // namespace rpca
