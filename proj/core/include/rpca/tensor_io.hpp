#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rpca/matrix.hpp"

namespace rpca {

// URPC binary tensor format (all integers little-endian):
//   "URPC" | u16 version | u16 rank | rank x u64 dims | row-major f64 payload
//
// URPC container (used for datasets and network checkpoints):
//   "URPC" | u16 version | u16 0xFFFF | u64 header bytes | UTF-8 JSON header
//   | u64 tensor count | tensor records in declared order

inline constexpr std::uint16_t kUrpcVersion = 1;
inline constexpr std::uint16_t kUrpcContainerRank = 0xFFFF;

struct Tensor {
    std::vector<std::uint64_t> dims;
    std::vector<double> values;  ///< row-major

    std::uint64_t element_count() const;
};

void write_tensor(std::ostream& out, const Tensor& tensor);
Tensor read_tensor(std::istream& in);

/// Rank-2 tensor [rows, cols]; converts from column-major storage.
Tensor to_tensor(const Matrix& m);
/// Accepts rank 2, or rank 1 as a column vector.
Matrix to_matrix(const Tensor& t);

void write_matrix_file(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_file(const std::filesystem::path& path);

struct Container {
    std::string header;  ///< JSON text
    std::vector<Tensor> tensors;
};

void write_container(std::ostream& out, const Container& c);
Container read_container(std::istream& in);
void write_container_file(const std::filesystem::path& path, const Container& c);
Container read_container_file(const std::filesystem::path& path);

}  // namespace rpca
