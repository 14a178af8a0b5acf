#include "rpca/conv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rpca/errors.hpp"

namespace rpca {

VideoMatrix::VideoMatrix(Matrix data, FrameShape shape) : data_(std::move(data)), shape_(shape) {
    if (data_.rows() != shape_.pixels()) {
        throw ShapeError("VideoMatrix: " + std::to_string(data_.rows()) + " rows but frame is " +
                         std::to_string(shape_.height) + "x" + std::to_string(shape_.width));
    }
    if (!all_finite(data_)) throw ParameterError("VideoMatrix: non-finite entry");
}

VideoMatrix VideoMatrix::zeros(FrameShape shape, std::size_t frames) {
    return VideoMatrix(Matrix(shape.pixels(), frames), shape);
}

ConvKernel::ConvKernel(std::size_t k) : k_(k), w_(k * k, 0.0) {
    if (k == 0 || k % 2 == 0) throw ParameterError("ConvKernel: size must be odd, got " + std::to_string(k));
}

ConvKernel::ConvKernel(std::size_t k, std::vector<double> weights) : ConvKernel(k) {
    if (weights.size() != k * k) throw ShapeError("ConvKernel: expected k*k weights");
    w_ = std::move(weights);
}

ConvKernel ConvKernel::delta(std::size_t k, double scale) {
    ConvKernel out(k);
    out(k / 2, k / 2) = scale;
    return out;
}

namespace {

void check_geometry(const Matrix& video, FrameShape shape, const ConvKernel& kernel) {
    if (video.rows() != shape.pixels()) throw ShapeError("conv2d: rows != height*width");
    if (kernel.size() == 0) throw ParameterError("conv2d: empty kernel");
    if (kernel.size() > std::min(shape.height, shape.width)) {
        throw ShapeError("conv2d: kernel " + std::to_string(kernel.size()) + " larger than frame " +
                         std::to_string(shape.height) + "x" + std::to_string(shape.width));
    }
}

// Visits every (offset, weight) pair together with the clipped row/column ranges
// for which both y and y+dy lie inside the frame.
template <class Fn>
void for_each_tap(FrameShape shape, const ConvKernel& kernel, Fn&& fn) {
    const long r = static_cast<long>(kernel.radius());
    const long h = static_cast<long>(shape.height);
    const long w = static_cast<long>(shape.width);
    for (long dy = -r; dy <= r; ++dy) {
        for (long dx = -r; dx <= r; ++dx) {
            const double weight = kernel(static_cast<std::size_t>(dy + r), static_cast<std::size_t>(dx + r));
            const long y0 = std::max(0L, -dy), y1 = std::min(h, h - dy);
            const long x0 = std::max(0L, -dx), x1 = std::min(w, w - dx);
            fn(dy, dx, weight, y0, y1, x0, x1);
        }
    }
}

}  // namespace

void conv2d_same_accumulate(const Matrix& video, FrameShape shape, const ConvKernel& kernel, Matrix& out) {
    check_geometry(video, shape, kernel);
    require_same_shape(video, out, "conv2d_same_accumulate");
    const long w = static_cast<long>(shape.width);
    for (std::size_t t = 0; t < video.cols(); ++t) {
        const double* in = video.col(t).data();
        double* o = out.col(t).data();
        for_each_tap(shape, kernel, [&](long dy, long dx, double weight, long y0, long y1, long x0, long x1) {
            if (weight == 0.0) return;
            for (long y = y0; y < y1; ++y) {
                double* orow = o + y * w;
                const double* irow = in + (y + dy) * w + dx;
                for (long x = x0; x < x1; ++x) orow[x] += weight * irow[x];
            }
        });
    }
}

Matrix conv2d_same(const Matrix& video, FrameShape shape, const ConvKernel& kernel) {
    Matrix out(video.rows(), video.cols());
    conv2d_same_accumulate(video, shape, kernel, out);
    return out;
}

VideoMatrix conv2d_same(const VideoMatrix& video, const ConvKernel& kernel) {
    return VideoMatrix(conv2d_same(video.matrix(), video.shape(), kernel), video.shape());
}

void conv2d_adjoint_accumulate(const Matrix& cotangent, FrameShape shape, const ConvKernel& kernel, Matrix& out) {
    check_geometry(cotangent, shape, kernel);
    require_same_shape(cotangent, out, "conv2d_adjoint_accumulate");
    const long w = static_cast<long>(shape.width);
    for (std::size_t t = 0; t < cotangent.cols(); ++t) {
        const double* g = cotangent.col(t).data();
        double* o = out.col(t).data();
        for_each_tap(shape, kernel, [&](long dy, long dx, double weight, long y0, long y1, long x0, long x1) {
            if (weight == 0.0) return;
            for (long y = y0; y < y1; ++y) {
                const double* grow = g + y * w;
                double* orow = o + (y + dy) * w + dx;
                for (long x = x0; x < x1; ++x) orow[x] += weight * grow[x];
            }
        });
    }
}

Matrix conv2d_adjoint(const Matrix& cotangent, FrameShape shape, const ConvKernel& kernel) {
    Matrix out(cotangent.rows(), cotangent.cols());
    conv2d_adjoint_accumulate(cotangent, shape, kernel, out);
    return out;
}

void conv2d_kernel_grad_accumulate(const Matrix& video, const Matrix& cotangent, FrameShape shape,
                                   ConvKernel& grad) {
    check_geometry(video, shape, grad);
    require_same_shape(video, cotangent, "conv2d_kernel_grad");
    const long r = static_cast<long>(grad.radius());
    const long w = static_cast<long>(shape.width);
    for (std::size_t t = 0; t < video.cols(); ++t) {
        const double* in = video.col(t).data();
        const double* g = cotangent.col(t).data();
        for_each_tap(shape, grad, [&](long dy, long dx, double, long y0, long y1, long x0, long x1) {
            double acc = 0.0;
            for (long y = y0; y < y1; ++y) {
                const double* grow = g + y * w;
                const double* irow = in + (y + dy) * w + dx;
                for (long x = x0; x < x1; ++x) acc += grow[x] * irow[x];
            }
            grad(static_cast<std::size_t>(dy + r), static_cast<std::size_t>(dx + r)) += acc;
        });
    }
}

}  // namespace rpca
