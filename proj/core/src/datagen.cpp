#include <algorithm>
#include <cmath>
#include <random>

#include "rpca/datagen.hpp"
#include "rpca/errors.hpp"

namespace rpca {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr int kSuper = 4;

double coverage(const Sprite& s, double py, double px) {
    int hits = 0;
    const double cy = s.y + s.height / 2, cx = s.x + s.width / 2;
    for (int a = 0; a < kSuper; ++a) {
        const double sy = py + (a + 0.5) / kSuper;
        for (int b = 0; b < kSuper; ++b) {
            const double sx = px + (b + 0.5) / kSuper;
            bool inside;
            if (s.kind == SpriteKind::Rectangle) {
                inside = sy >= s.y && sy < s.y + s.height && sx >= s.x && sx < s.x + s.width;
            } else {
                const double ny = (sy - cy) / (s.height / 2), nx = (sx - cx) / (s.width / 2);
                inside = ny * ny + nx * nx <= 1.0;
            }
            hits += inside ? 1 : 0;
        }
    }
    return static_cast<double>(hits) / (kSuper * kSuper);
}

std::size_t footprint(const Sprite& s) {
    return static_cast<std::size_t>((std::ceil(s.height) + 1) * (std::ceil(s.width) + 1));
}

// Bilinear resize of a u8 image to size x size, returned in [0, 1].
std::vector<double> resize_digit(const std::vector<std::uint8_t>& img, std::size_t rows, std::size_t cols,
                                 std::size_t size) {
    std::vector<double> out(size * size);
    for (std::size_t y = 0; y < size; ++y) {
        const double fy = std::clamp((y + 0.5) * rows / size - 0.5, 0.0, rows - 1.0);
        const std::size_t y0 = static_cast<std::size_t>(fy), y1 = std::min(y0 + 1, rows - 1);
        const double wy = fy - y0;
        for (std::size_t x = 0; x < size; ++x) {
            const double fx = std::clamp((x + 0.5) * cols / size - 0.5, 0.0, cols - 1.0);
            const std::size_t x0 = static_cast<std::size_t>(fx), x1 = std::min(x0 + 1, cols - 1);
            const double wx = fx - x0;
            const double v = (1 - wy) * ((1 - wx) * img[y0 * cols + x0] + wx * img[y0 * cols + x1]) +
                             wy * ((1 - wx) * img[y1 * cols + x0] + wx * img[y1 * cols + x1]);
            out[y * size + x] = v / 255.0;
        }
    }
    return out;
}

}  // namespace

void DataGenConfig::validate() const {
    if (height < 4 || width < 4) throw ParameterError("datagen: frames must be at least 4x4");
    if (frames < 1) throw ParameterError("datagen: need at least one frame");
    if (rank > std::min(height * width, frames)) throw ParameterError("datagen: rank exceeds min(n, m)");
    if (source == ForegroundSource::Mnist && (mnist_images.empty() || mnist_labels.empty()))
        throw ConfigError("datagen: MNIST source selected but no IDX paths given");
}

Matrix gen_low_rank_background(std::size_t n, std::size_t m, std::size_t r, std::uint64_t seed) {
    if (r > std::min(n, m)) throw ParameterError("gen_low_rank_background: r > min(n, m)");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix U(n, r), V(m, r);
    for (double& v : U.flat()) v = normal(rng);
    for (double& v : V.flat()) v = normal(rng);
    if (r == 0) return Matrix(n, m);
    return matmul_nt(U, V);
}

void bounce(double& pos, double& vel, double max_pos) {
    pos += vel;
    if (pos < 0.0) {
        pos = -pos;
        vel = -vel;
    } else if (pos > max_pos) {
        pos = 2 * max_pos - pos;
        vel = -vel;
    }
    pos = std::clamp(pos, 0.0, max_pos);
}

SpriteVideo render_sprites(FrameShape frame, std::size_t frames, std::vector<Sprite> sprites) {
    Matrix video(frame.pixels(), frames);
    SpriteVideo out;
    out.sprites = sprites;
    out.trajectories.assign(sprites.size(), {});
    for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t k = 0; k < sprites.size(); ++k) {
            Sprite& s = sprites[k];
            out.trajectories[k].push_back({s.y, s.x, s.vy, s.vx});
            const long y0 = static_cast<long>(std::floor(s.y)), y1 = static_cast<long>(std::ceil(s.y + s.height));
            const long x0 = static_cast<long>(std::floor(s.x)), x1 = static_cast<long>(std::ceil(s.x + s.width));
            for (long py = std::max(0L, y0); py < std::min<long>(y1, static_cast<long>(frame.height)); ++py) {
                for (long px = std::max(0L, x0); px < std::min<long>(x1, static_cast<long>(frame.width)); ++px) {
                    const double v = s.intensity * coverage(s, static_cast<double>(py), static_cast<double>(px));
                    double& dst = video(static_cast<std::size_t>(py) * frame.width + static_cast<std::size_t>(px), t);
                    dst = std::max(dst, v);
                }
            }
            bounce(s.y, s.vy, static_cast<double>(frame.height) - s.height);
            bounce(s.x, s.vx, static_cast<double>(frame.width) - s.width);
        }
    }
    out.video = VideoMatrix(std::move(video), frame);
    return out;
}

SpriteVideo gen_moving_sprites(FrameShape frame, std::size_t frames, std::uint64_t seed) {
    if (frame.height < 4 || frame.width < 4) throw ParameterError("gen_moving_sprites: frame smaller than 4x4");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t count = unit(rng) < 0.5 ? 1 : 2;
    const double hmin = std::max(2.0, frame.height / 8.0), hmax = std::max(2.0, frame.height / 4.0);
    const double wmin = std::max(2.0, frame.width / 8.0), wmax = std::max(2.0, frame.width / 4.0);
    std::vector<Sprite> sprites;
    for (std::size_t k = 0; k < count; ++k) {
        Sprite s;
        s.kind = unit(rng) < 0.5 ? SpriteKind::Rectangle : SpriteKind::Ellipse;
        s.height = hmin + (hmax - hmin) * unit(rng);
        s.width = wmin + (wmax - wmin) * unit(rng);
        s.intensity = 0.3 + 0.7 * unit(rng);
        s.y = (frame.height - s.height) * unit(rng);
        s.x = (frame.width - s.width) * unit(rng);
        s.vy = (0.5 + 1.5 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
        s.vx = (0.5 + 1.5 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
        sprites.push_back(s);
    }
    // Keep the summed bounding footprint within a quarter of the frame.
    const double budget = 0.25 * static_cast<double>(frame.pixels());
    auto total = [&] {
        std::size_t sum = 0;
        for (const auto& s : sprites) sum += footprint(s);
        return static_cast<double>(sum);
    };
    if (sprites.size() > 1 && total() > budget) sprites.pop_back();
    while (total() > budget && sprites.front().height > 1.0) {
        sprites.front().height = std::max(1.0, sprites.front().height * 0.8);
        sprites.front().width = std::max(1.0, sprites.front().width * 0.8);
    }
    return render_sprites(frame, frames, std::move(sprites));
}

DigitVideo gen_moving_mnist(const DigitSet& digits, FrameShape frame, std::size_t frames, std::uint64_t seed) {
    if (digits.images.empty()) throw ParameterError("gen_moving_mnist: empty digit set");
    const std::size_t side = std::min(frame.height, frame.width);
    const std::size_t size = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(28.0 * side / 64.0)), 2, side);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, digits.images.size() - 1);

    DigitVideo out;
    out.digit_size = size;
    Matrix video(frame.pixels(), frames);
    const double max_y = static_cast<double>(frame.height - size);
    const double max_x = static_cast<double>(frame.width - size);
    constexpr double kPi = 3.14159265358979323846;
    for (int k = 0; k < 2; ++k) {
        const std::size_t idx = pick(rng);
        out.digit_indices.push_back(idx);
        const auto glyph = resize_digit(digits.images[idx], digits.rows, digits.cols, size);
        double y = max_y * unit(rng), x = max_x * unit(rng);
        const double angle = 2 * kPi * unit(rng);
        const double speed = 1.0 + 2.0 * unit(rng);
        double vy = speed * std::sin(angle), vx = speed * std::cos(angle);
        Trajectory traj;
        for (std::size_t t = 0; t < frames; ++t) {
            traj.push_back({y, x, vy, vx});
            const auto oy = static_cast<std::size_t>(std::lround(y));
            const auto ox = static_cast<std::size_t>(std::lround(x));
            for (std::size_t gy = 0; gy < size; ++gy) {
                for (std::size_t gx = 0; gx < size; ++gx) {
                    double& dst = video((oy + gy) * frame.width + ox + gx, t);
                    dst = std::max(dst, glyph[gy * size + gx]);
                }
            }
            bounce(y, vy, max_y);
            bounce(x, vx, max_x);
        }
        out.trajectories.push_back(std::move(traj));
    }
    out.video = VideoMatrix(std::move(video), frame);
    return out;
}

DataSample compose_sample(const VideoMatrix& S_fg, const VideoMatrix& L_bg) {
    if (!(S_fg.shape() == L_bg.shape()) || S_fg.frames() != L_bg.frames())
        throw ShapeError("compose_sample: foreground/background shapes differ");
    const Matrix raw = L_bg.matrix() + S_fg.matrix();
    const double lo = min_value(raw);
    const double hi = max_value(raw);
    const double scale = std::max(hi - lo, 1e-12);
    // M is mapped into [0, 1] exactly; L takes the remainder so M - L - S is pure round-off.
    Matrix M = raw;
    for (double& v : M.flat()) v = std::clamp((v - lo) / scale, 0.0, 1.0);
    Matrix S = S_fg.matrix();
    for (double& v : S.flat()) v = v / scale;
    Matrix L = M - S;
    DataSample out;
    out.M = VideoMatrix(std::move(M), S_fg.shape());
    out.L = VideoMatrix(std::move(L), S_fg.shape());
    out.S = VideoMatrix(std::move(S), S_fg.shape());
    out.scale = scale;
    out.offset = lo;
    return out;
}

std::uint64_t sample_seed(std::uint64_t master, int split, std::size_t index) {
    // splitmix64 is a bijection, so distinct (split, index) pairs map to distinct seeds.
    const std::uint64_t key = (static_cast<std::uint64_t>(split + 1) << 56) ^ static_cast<std::uint64_t>(index);
    return splitmix64(splitmix64(master) ^ key);
}

DataSample generate_sample(const DataGenConfig& config, std::uint64_t seed, const DigitSet* digits) {
    const FrameShape frame = config.frame();
    const std::uint64_t fg_seed = splitmix64(seed ^ 0xF0F0F0F0ULL);
    const std::uint64_t bg_seed = splitmix64(seed ^ 0x0B0B0B0BULL);
    VideoMatrix fg;
    if (config.source == ForegroundSource::Mnist) {
        if (!digits) throw ConfigError("generate_sample: MNIST source needs a digit set");
        fg = gen_moving_mnist(*digits, frame, config.frames, fg_seed).video;
    } else {
        fg = gen_moving_sprites(frame, config.frames, fg_seed).video;
    }
    VideoMatrix bg(gen_low_rank_background(frame.pixels(), config.frames, config.rank, bg_seed), frame);
    DataSample sample = compose_sample(fg, bg);
    sample.seed = seed;
    return sample;
}

Dataset generate_dataset(const DataGenConfig& config) {
    config.validate();
    DigitSet digits;
    if (config.source == ForegroundSource::Mnist) digits = ingest_mnist_idx(config.mnist_images, config.mnist_labels);
    Dataset data;
    data.config = config;
    auto fill = [&](std::vector<DataSample>& split, int id, std::size_t count) {
        split.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
            split.push_back(generate_sample(config, sample_seed(config.seed, id, i), &digits));
    };
    fill(data.train, 0, config.n_train);
    fill(data.val, 1, config.n_val);
    fill(data.test, 2, config.n_test);
    return data;
}

std::uint64_t sample_hash(const DataSample& sample) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 0x100000001B3ULL;
        }
    };
    for (const VideoMatrix* v : {&sample.M, &sample.L, &sample.S})
        mix(v->matrix().data(), v->matrix().size() * sizeof(double));
    mix(&sample.scale, sizeof sample.scale);
    return h;
}

}  // namespace rpca
