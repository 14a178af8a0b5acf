#include <array>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "rpca/datagen.hpp"
#include "rpca/errors.hpp"

namespace rpca {

namespace {

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08X", v);
    return buf;
}

std::uint32_t read_be32(std::istream& in, const char* what) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4))
        throw TruncatedError(std::string("IDX: truncated while reading ") + what);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                                static_cast<char>(v)};
    out.write(b.data(), 4);
}

void expect_magic(std::uint32_t found, std::uint32_t expected) {
    if (found != expected)
        throw BadMagicError("IDX: bad magic, expected " + hex32(expected) + ", found " + hex32(found));
}

}  // namespace

DigitSet parse_idx_images(std::istream& in) {
    expect_magic(read_be32(in, "magic"), kIdxImageMagic);
    const std::uint32_t count = read_be32(in, "image count");
    const std::uint32_t rows = read_be32(in, "row count");
    const std::uint32_t cols = read_be32(in, "column count");
    if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096) throw FormatError("IDX: implausible image size");
    DigitSet set;
    set.rows = rows;
    set.cols = cols;
    const std::size_t pixels = std::size_t{rows} * cols;
    std::vector<std::vector<std::uint8_t>> images;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::vector<std::uint8_t> img(pixels);
        if (!in.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(pixels)))
            throw TruncatedError("IDX: truncated payload at image " + std::to_string(i) + " of " +
                                 std::to_string(count));
        images.push_back(std::move(img));
    }
    set.images = std::move(images);
    return set;
}

std::vector<std::uint8_t> parse_idx_labels(std::istream& in) {
    expect_magic(read_be32(in, "magic"), kIdxLabelMagic);
    const std::uint32_t count = read_be32(in, "label count");
    std::vector<std::uint8_t> labels(count);
    if (count > 0 && !in.read(reinterpret_cast<char*>(labels.data()), count))
        throw TruncatedError("IDX: truncated label payload (expected " + std::to_string(count) + " labels)");
    return labels;
}

DigitSet ingest_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
    std::ifstream img_in(images, std::ios::binary);
    if (!img_in) throw IoError("cannot open IDX images: " + images.string());
    std::ifstream lbl_in(labels, std::ios::binary);
    if (!lbl_in) throw IoError("cannot open IDX labels: " + labels.string());
    DigitSet set = parse_idx_images(img_in);
    auto lbl = parse_idx_labels(lbl_in);
    if (lbl.size() != set.images.size()) {
        throw CountMismatchError("IDX: " + std::to_string(set.images.size()) + " images but " +
                                 std::to_string(lbl.size()) + " labels");
    }
    set.labels = std::move(lbl);
    return set;
}

void write_idx_images(std::ostream& out, const DigitSet& digits) {
    write_be32(out, kIdxImageMagic);
    write_be32(out, static_cast<std::uint32_t>(digits.images.size()));
    write_be32(out, static_cast<std::uint32_t>(digits.rows));
    write_be32(out, static_cast<std::uint32_t>(digits.cols));
    for (const auto& img : digits.images) {
        if (img.size() != digits.rows * digits.cols) throw ShapeError("write_idx_images: image size");
        out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
    }
}

void write_idx_labels(std::ostream& out, const std::vector<std::uint8_t>& labels) {
    write_be32(out, kIdxLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

}  // namespace rpca
