#include "rpca/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rpca/errors.hpp"

namespace rpca {

static_assert(std::endian::native == std::endian::little, "URPC I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 4> kMagic{'U', 'R', 'P', 'C'};

template <class T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in, const char* what) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
        throw TruncatedError(std::string("URPC: truncated while reading ") + what);
    return value;
}

void put_header(std::ostream& out, std::uint16_t rank) {
    out.write(kMagic.data(), kMagic.size());
    put<std::uint16_t>(out, kUrpcVersion);
    put<std::uint16_t>(out, rank);
}

std::uint16_t get_header(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size())) throw TruncatedError("URPC: truncated magic");
    if (magic != kMagic) {
        throw BadMagicError("URPC: bad magic, expected \"URPC\", found \"" +
                            std::string(magic.data(), magic.size()) + "\"");
    }
    const auto version = get<std::uint16_t>(in, "version");
    if (version != kUrpcVersion) {
        throw VersionError("URPC: unsupported version " + std::to_string(version) + " (expected " +
                           std::to_string(kUrpcVersion) + ")");
    }
    return get<std::uint16_t>(in, "rank");
}

Tensor read_tensor_body(std::istream& in, std::uint16_t rank) {
    Tensor t;
    t.dims.resize(rank);
    for (auto& d : t.dims) d = get<std::uint64_t>(in, "dims");
    const std::uint64_t count = t.element_count();
    constexpr std::uint64_t kLimit = std::uint64_t{1} << 34;
    if (count > kLimit) throw FormatError("URPC: implausible element count");
    t.values.resize(count);
    if (count > 0 && !in.read(reinterpret_cast<char*>(t.values.data()),
                              static_cast<std::streamsize>(count * sizeof(double)))) {
        throw TruncatedError("URPC: truncated payload");
    }
    return t;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    return in;
}

}  // namespace

std::uint64_t Tensor::element_count() const {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

void write_tensor(std::ostream& out, const Tensor& tensor) {
    if (tensor.dims.size() >= kUrpcContainerRank) throw ShapeError("URPC: rank too large");
    if (tensor.element_count() != tensor.values.size()) throw ShapeError("URPC: dims do not match payload");
    put_header(out, static_cast<std::uint16_t>(tensor.dims.size()));
    for (auto d : tensor.dims) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(tensor.values.data()),
              static_cast<std::streamsize>(tensor.values.size() * sizeof(double)));
}

Tensor read_tensor(std::istream& in) {
    const auto rank = get_header(in);
    if (rank == kUrpcContainerRank) throw FormatError("URPC: expected a tensor, found a container");
    return read_tensor_body(in, rank);
}

Tensor to_tensor(const Matrix& m) {
    Tensor t{{m.rows(), m.cols()}, std::vector<double>(m.size())};
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t.values[i * m.cols() + j] = m(i, j);
    return t;
}

Matrix to_matrix(const Tensor& t) {
    if (t.dims.size() == 1) {
        Matrix m(t.dims[0], 1);
        std::copy(t.values.begin(), t.values.end(), m.flat().begin());
        return m;
    }
    if (t.dims.size() != 2) throw ShapeError("URPC: expected a rank-2 tensor, got rank " + std::to_string(t.dims.size()));
    Matrix m(t.dims[0], t.dims[1]);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = t.values[i * m.cols() + j];
    return m;
}

void write_matrix_file(const std::filesystem::path& path, const Matrix& m) {
    auto out = open_out(path);
    write_tensor(out, to_tensor(m));
    if (!out) throw IoError("write failed: " + path.string());
}

Matrix read_matrix_file(const std::filesystem::path& path) {
    auto in = open_in(path);
    return to_matrix(read_tensor(in));
}

void write_container(std::ostream& out, const Container& c) {
    put_header(out, kUrpcContainerRank);
    put<std::uint64_t>(out, c.header.size());
    out.write(c.header.data(), static_cast<std::streamsize>(c.header.size()));
    put<std::uint64_t>(out, c.tensors.size());
    for (const auto& t : c.tensors) write_tensor(out, t);
}

Container read_container(std::istream& in) {
    if (get_header(in) != kUrpcContainerRank) throw FormatError("URPC: expected a container, found a tensor");
    const auto header_len = get<std::uint64_t>(in, "header length");
    if (header_len > (std::uint64_t{1} << 30)) throw FormatError("URPC: implausible header length");
    Container c;
    c.header.resize(header_len);
    if (header_len > 0 && !in.read(c.header.data(), static_cast<std::streamsize>(header_len)))
        throw TruncatedError("URPC: truncated container header");
    const auto count = get<std::uint64_t>(in, "tensor count");
    c.tensors.reserve(std::min<std::uint64_t>(count, 4096));
    for (std::uint64_t i = 0; i < count; ++i) c.tensors.push_back(read_tensor(in));
    return c;
}

void write_container_file(const std::filesystem::path& path, const Container& c) {
    auto out = open_out(path);
    write_container(out, c);
    if (!out) throw IoError("write failed: " + path.string());
}

Container read_container_file(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_container(in);
}

}  // namespace rpca
