#pragma once

#include <cstddef>

#include "rpca/matrix.hpp"

namespace rpca {

struct FrameShape {
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t pixels() const noexcept { return height * width; }
    friend bool operator==(const FrameShape&, const FrameShape&) = default;
};

/// An n x m matrix whose columns are vectorized h x w frames (n = h*w).
/// Pixel (y, x) of frame t lives at row y*w + x, column t.
class VideoMatrix {
public:
    VideoMatrix() = default;
    /// Throws ShapeError when rows != h*w and ParameterError on non-finite data.
    VideoMatrix(Matrix data, FrameShape shape);
    static VideoMatrix zeros(FrameShape shape, std::size_t frames);

    const Matrix& matrix() const noexcept { return data_; }
    Matrix& matrix() noexcept { return data_; }
    FrameShape shape() const noexcept { return shape_; }
    std::size_t frames() const noexcept { return data_.cols(); }
    std::size_t pixels() const noexcept { return data_.rows(); }

    double& at(std::size_t y, std::size_t x, std::size_t t) noexcept {
        return data_(y * shape_.width + x, t);
    }
    double at(std::size_t y, std::size_t x, std::size_t t) const noexcept {
        return data_(y * shape_.width + x, t);
    }

    friend bool operator==(const VideoMatrix&, const VideoMatrix&) = default;

private:
    Matrix data_;
    FrameShape shape_;
};

}  // namespace rpca
