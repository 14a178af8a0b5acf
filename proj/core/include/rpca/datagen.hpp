#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rpca/matrix.hpp"
#include "rpca/video.hpp"

namespace rpca {

enum class ForegroundSource { Sprites, Mnist };

struct DataGenConfig {
    std::size_t height = 32;
    std::size_t width = 32;
    std::size_t frames = 20;
    std::size_t rank = 5;
    std::size_t n_train = 800;
    std::size_t n_val = 100;
    std::size_t n_test = 100;
    std::uint64_t seed = 1;
    ForegroundSource source = ForegroundSource::Sprites;
    std::filesystem::path mnist_images;
    std::filesystem::path mnist_labels;

    FrameShape frame() const { return {height, width}; }
    void validate() const;
};

/// One training example. M lies in [0, 1] and M = L + S up to round-off:
/// M and S are normalized and L is set to M - S.
struct DataSample {
    VideoMatrix M;
    VideoMatrix L;
    VideoMatrix S;
    double scale = 1.0;   ///< max(M_raw) - min(M_raw), guarded >= 1e-12
    double offset = 0.0;  ///< min(M_raw), absorbed into L
    std::uint64_t seed = 0;
};

struct Dataset {
    DataGenConfig config;
    std::vector<DataSample> train;
    std::vector<DataSample> val;
    std::vector<DataSample> test;
};

/// L = U V^T with U (n x r), V (m x r) i.i.d. standard normal.
Matrix gen_low_rank_background(std::size_t n, std::size_t m, std::size_t r, std::uint64_t seed);

enum class SpriteKind { Rectangle, Ellipse };

struct Sprite {
    SpriteKind kind = SpriteKind::Rectangle;
    double height = 4;
    double width = 4;
    double intensity = 1.0;
    double y = 0;  ///< top-left corner, pixels
    double x = 0;
    double vy = 0;  ///< pixels per frame
    double vx = 0;
};

/// Per-frame state of one moving object (position before moving on).
struct TrajectoryPoint {
    double y = 0;
    double x = 0;
    double vy = 0;
    double vx = 0;
};
using Trajectory = std::vector<TrajectoryPoint>;

struct SpriteVideo {
    VideoMatrix video;
    std::vector<Sprite> sprites;             ///< initial state
    std::vector<Trajectory> trajectories;    ///< one per sprite, one point per frame
};

/// Advances a position by one frame with mirror reflection on [0, max_pos].
void bounce(double& pos, double& vel, double max_pos);

/// Renders sprites with 4x4 supersampled coverage and max compositing.
SpriteVideo render_sprites(FrameShape frame, std::size_t frames, std::vector<Sprite> sprites);

/// One or two seeded sprites bouncing inside the frame; background exactly 0.
SpriteVideo gen_moving_sprites(FrameShape frame, std::size_t frames, std::uint64_t seed);

struct DigitSet {
    std::size_t rows = 28;
    std::size_t cols = 28;
    std::vector<std::vector<std::uint8_t>> images;
    std::vector<std::uint8_t> labels;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Big-endian IDX parsing. Throws BadMagicError, TruncatedError or
/// CountMismatchError; never returns a partial result.
DigitSet parse_idx_images(std::istream& in);
std::vector<std::uint8_t> parse_idx_labels(std::istream& in);
DigitSet ingest_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Writes an IDX image/label pair (used for fixtures and round trips).
void write_idx_images(std::ostream& out, const DigitSet& digits);
void write_idx_labels(std::ostream& out, const std::vector<std::uint8_t>& labels);

struct DigitVideo {
    VideoMatrix video;
    std::vector<std::size_t> digit_indices;
    std::size_t digit_size = 0;
    std::vector<Trajectory> trajectories;
};

/// Two seeded digits resized to fit, bouncing with reflection, composited by
/// per-pixel max, intensities in [0, 1].
DigitVideo gen_moving_mnist(const DigitSet& digits, FrameShape frame, std::size_t frames, std::uint64_t seed);

/// Normalizes M_raw = L_bg + S_fg to [0, 1] with one shared affine map:
/// L absorbs the offset, S is only scaled.
DataSample compose_sample(const VideoMatrix& S_fg, const VideoMatrix& L_bg);

/// Per-sample seed from a splittable counter; distinct across splits.
std::uint64_t sample_seed(std::uint64_t master, int split, std::size_t index);

/// Generates one sample (foreground + background) for the given seed.
DataSample generate_sample(const DataGenConfig& config, std::uint64_t seed, const DigitSet* digits = nullptr);
Dataset generate_dataset(const DataGenConfig& config);

/// FNV-1a over the M, L, S payloads and the scale.
std::uint64_t sample_hash(const DataSample& sample);

void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

/// 8-bit binary PGM (P5) of one frame; values clamped from [lo, hi] to [0, 255].
void write_pgm(const std::filesystem::path& path, const VideoMatrix& video, std::size_t frame, double lo = 0.0,
               double hi = 1.0);

}  // namespace rpca
