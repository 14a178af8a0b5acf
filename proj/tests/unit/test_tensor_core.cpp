#include <cstring>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "rpca/conv.hpp"
#include "rpca/errors.hpp"
#include "rpca/svd.hpp"
#include "rpca/tensor_io.hpp"
#include "rpca/video.hpp"

using namespace rpca;
using testutil::random_matrix;

TEST_CASE("matrix basics") {
    CHECK(frobenius_norm(Matrix(3, 2)) == 0.0);
    CHECK(frobenius_norm(Matrix::from_rows({{3, 0}, {0, 4}})) == doctest::Approx(5.0));
    const Matrix x = random_matrix(5, 3, 1);
    CHECK(matmul(Matrix::identity(5), x) == x);
    CHECK_THROWS_AS(matmul(x, x), ShapeError);
    CHECK_THROWS_AS(elementwise_mul(x, Matrix(3, 5)), ShapeError);
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    CHECK(elementwise_mul(a, a) == Matrix::from_rows({{1, 4}, {9, 16}}));
    CHECK(matmul_tn(x, x) == matmul(transpose(x), x));
    CHECK(testutil::max_abs_diff(matmul_nt(x, x), matmul(x, transpose(x))) < 1e-14);
}

TEST_CASE("video matrix validates shape and finiteness") {
    CHECK_THROWS_AS(VideoMatrix(Matrix(15, 2), {4, 4}), ShapeError);
    Matrix bad(16, 1);
    bad(3, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(VideoMatrix(bad, {4, 4}), ParameterError);
    VideoMatrix v = VideoMatrix::zeros({4, 5}, 2);
    v.at(2, 3, 1) = 7.0;
    CHECK(v.matrix()(2 * 5 + 3, 1) == 7.0);
}

TEST_CASE("svd of diagonal and zero matrices") {
    const auto f = svd(Matrix::from_rows({{3, 0}, {0, 1}}));
    CHECK(f.sigma == std::vector<double>{3.0, 1.0});
    CHECK(f.U == Matrix::identity(2));
    CHECK(f.V == Matrix::identity(2));

    const auto z = svd(Matrix(4, 4));
    CHECK(z.sigma == std::vector<double>(4, 0.0));
    CHECK(testutil::orthonormality_error(z.U) < 1e-12);
    CHECK(testutil::orthonormality_error(z.V) < 1e-12);
}

TEST_CASE("svd reconstruction and orthonormality on random matrices") {
    const std::size_t shapes[][2] = {{8, 5}, {5, 8}, {1, 1}, {1, 7}, {7, 1}, {20, 20}, {64, 20}, {64, 64}, {33, 47}};
    std::uint64_t seed = 10;
    for (const auto& s : shapes) {
        CAPTURE(s[0]);
        CAPTURE(s[1]);
        const Matrix x = random_matrix(s[0], s[1], seed++);
        const auto f = svd(x);
        const std::size_t p = std::min(s[0], s[1]);
        REQUIRE(f.sigma.size() == p);
        CHECK(frobenius_norm(f.reconstruct() - x) / frobenius_norm(x) < 1e-10);
        CHECK(testutil::orthonormality_error(f.U) <= 1e-10 * p);
        CHECK(testutil::orthonormality_error(f.V) <= 1e-10 * p);
        for (std::size_t i = 0; i + 1 < p; ++i) CHECK(f.sigma[i] >= f.sigma[i + 1]);
        CHECK(f.sigma.back() >= 0.0);
    }
}

TEST_CASE("svd example 8x5 and sign convention") {
    const Matrix x = random_matrix(8, 5, 42);
    const auto f = svd(x);
    CHECK(frobenius_norm(f.reconstruct() - x) < 1e-10);
    for (std::size_t j = 0; j < f.U.cols(); ++j) {
        std::size_t arg = 0;
        for (std::size_t i = 0; i < f.U.rows(); ++i)
            if (std::abs(f.U(i, j)) > std::abs(f.U(arg, j))) arg = i;
        CHECK(f.U(arg, j) > 0.0);
    }
    // Deterministic for a fixed input.
    const auto g = svd(x);
    CHECK(g.U == f.U);
    CHECK(g.sigma == f.sigma);
    CHECK(g.V == f.V);
}

TEST_CASE("svd of rank-deficient input keeps orthonormal factors") {
    const Matrix x = matmul_nt(random_matrix(30, 2, 3), random_matrix(10, 2, 4));
    const auto f = svd(x);
    CHECK(f.sigma[2] < 1e-12 * f.sigma[0]);
    CHECK(testutil::orthonormality_error(f.U) < 1e-10);
    CHECK(frobenius_norm(f.reconstruct() - x) < 1e-10 * frobenius_norm(x));
    CHECK(nuclear_norm(x) == doctest::Approx(f.sigma[0] + f.sigma[1]).epsilon(1e-12));
}

TEST_CASE("svd rejects non-finite input") {
    Matrix x(3, 3);
    x(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(svd(x), NumericalError);
}

TEST_CASE("convolution examples") {
    const FrameShape shape{4, 4};
    const VideoMatrix ones(Matrix(16, 1, 1.0), shape);
    ConvKernel box(3, std::vector<double>(9, 1.0));
    const VideoMatrix out = conv2d_same(ones, box);
    CHECK(out.at(0, 0, 0) == 4.0);
    CHECK(out.at(0, 3, 0) == 4.0);
    CHECK(out.at(3, 3, 0) == 4.0);
    CHECK(out.at(0, 1, 0) == 6.0);
    CHECK(out.at(2, 0, 0) == 6.0);
    CHECK(out.at(1, 1, 0) == 9.0);
    CHECK(out.at(2, 2, 0) == 9.0);

    const VideoMatrix v(random_matrix(20, 3, 5), {4, 5});
    CHECK(conv2d_same(v, ConvKernel::delta(3)) == v);
    CHECK(all_zero(conv2d_same(v, ConvKernel(3)).matrix()));
    CHECK_THROWS_AS(conv2d_same(v, ConvKernel(5)), ShapeError);
    CHECK_THROWS_AS(ConvKernel(4), ParameterError);
}

TEST_CASE("convolution is cross-correlation") {
    // Kernel with a single 1 right of center shifts content left: out(y, x) = in(y, x + 1).
    const FrameShape shape{3, 4};
    Matrix in(12, 1);
    for (std::size_t k = 0; k < 12; ++k) in(k, 0) = static_cast<double>(k + 1);
    ConvKernel k(3);
    k(1, 2) = 1.0;
    const Matrix out = conv2d_same(in, shape, k);
    CHECK(out(0, 0) == 2.0);
    CHECK(out(3, 0) == 0.0);
}

TEST_CASE("convolution linearity and adjoint") {
    const FrameShape shape{6, 5};
    const Matrix a = random_matrix(30, 4, 1), b = random_matrix(30, 4, 2);
    ConvKernel k(5), k2(5);
    const Matrix kw = random_matrix(25, 1, 3), kw2 = random_matrix(25, 1, 4);
    std::copy(kw.flat().begin(), kw.flat().end(), k.weights().begin());
    std::copy(kw2.flat().begin(), kw2.flat().end(), k2.weights().begin());
    const double alpha = 0.7, beta = -1.3;

    const Matrix lhs = conv2d_same(alpha * a + beta * b, shape, k);
    const Matrix rhs = alpha * conv2d_same(a, shape, k) + beta * conv2d_same(b, shape, k);
    CHECK(testutil::max_abs_diff(lhs, rhs) < 1e-12);

    // Linear in the kernel too.
    ConvKernel sum(5);
    for (std::size_t i = 0; i < 25; ++i) sum.weights()[i] = k.weights()[i] + k2.weights()[i];
    CHECK(testutil::max_abs_diff(conv2d_same(a, shape, sum), conv2d_same(a, shape, k) + conv2d_same(a, shape, k2)) <
          1e-12);

    CHECK(inner(conv2d_same(a, shape, k), b) == doctest::Approx(inner(a, conv2d_adjoint(b, shape, k))).epsilon(1e-12));
    CHECK(std::abs(inner(conv2d_same(a, shape, k), b) - inner(a, conv2d_adjoint(b, shape, k))) < 1e-10);

    // Kernel gradient of <conv(a, K), b> is linear in K, so it equals the coefficients of each tap.
    ConvKernel grad(5);
    conv2d_kernel_grad_accumulate(a, b, shape, grad);
    for (std::size_t i = 0; i < 25; ++i) {
        ConvKernel e(5);
        e.weights()[i] = 1.0;
        CHECK(grad.weights()[i] == doctest::Approx(inner(conv2d_same(a, shape, e), b)).epsilon(1e-12));
    }
}

TEST_CASE("tensor file round trip") {
    const Matrix x = random_matrix(4, 3, 9);
    std::stringstream buf;
    write_tensor(buf, to_tensor(x));
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 4) == "URPC");
    CHECK(bytes.size() == 4 + 2 + 2 + 2 * 8 + 12 * 8);
    // Row-major payload: the second value is x(0, 1).
    double second;
    std::memcpy(&second, bytes.data() + 24 + 8, 8);
    CHECK(second == x(0, 1));
    const Matrix y = to_matrix(read_tensor(buf));
    CHECK(y == x);
}

TEST_CASE("tensor file errors") {
    std::stringstream bad("XXXX\x01\x00\x02\x00");
    CHECK_THROWS_AS(read_tensor(bad), BadMagicError);

    std::stringstream buf;
    write_tensor(buf, to_tensor(random_matrix(3, 3, 1)));
    std::string bytes = buf.str();
    std::stringstream cut(bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(read_tensor(cut), TruncatedError);

    bytes[4] = 9;
    std::stringstream ver(bytes);
    CHECK_THROWS_AS(read_tensor(ver), VersionError);

    std::stringstream empty;
    CHECK_THROWS_AS(read_tensor(empty), TruncatedError);
}

TEST_CASE("container round trip") {
    Container c;
    c.header = R"({"k": 1})";
    c.tensors.push_back(to_tensor(random_matrix(2, 5, 1)));
    c.tensors.push_back(Tensor{{3}, {1, 2, 3}});
    std::stringstream buf;
    write_container(buf, c);
    const Container d = read_container(buf);
    CHECK(d.header == c.header);
    REQUIRE(d.tensors.size() == 2);
    CHECK(d.tensors[0].dims == c.tensors[0].dims);
    CHECK(d.tensors[0].values == c.tensors[0].values);
    CHECK(to_matrix(d.tensors[1]).rows() == 3);
}
