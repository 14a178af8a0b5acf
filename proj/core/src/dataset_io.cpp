#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "rpca/datagen.hpp"
#include "rpca/errors.hpp"
#include "rpca/tensor_io.hpp"

namespace rpca {

using nlohmann::json;

namespace {

constexpr const char* kSplitNames[3] = {"train", "val", "test"};

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
    const auto& cfg = data.config;
    json manifest{{"format", "rpca.dataset"},
                  {"height", cfg.height},
                  {"width", cfg.width},
                  {"frames", cfg.frames},
                  {"rank", cfg.rank},
                  {"seed", cfg.seed},
                  {"source", cfg.source == ForegroundSource::Mnist ? "mnist" : "sprites"},
                  {"normalization", "per-sequence"},
                  {"tensors_per_sample", {"M", "L", "S"}}};
    Container c;
    const std::vector<DataSample>* splits[3] = {&data.train, &data.val, &data.test};
    json split_info = json::object();
    for (int s = 0; s < 3; ++s) {
        json seeds = json::array(), scales = json::array(), offsets = json::array(), hashes = json::array();
        for (const auto& sample : *splits[s]) {
            seeds.push_back(sample.seed);
            scales.push_back(sample.scale);
            offsets.push_back(sample.offset);
            hashes.push_back(hex64(sample_hash(sample)));
            c.tensors.push_back(to_tensor(sample.M.matrix()));
            c.tensors.push_back(to_tensor(sample.L.matrix()));
            c.tensors.push_back(to_tensor(sample.S.matrix()));
        }
        split_info[kSplitNames[s]] = {{"count", splits[s]->size()},
                                      {"seeds", seeds},
                                      {"scales", scales},
                                      {"offsets", offsets},
                                      {"hashes", hashes}};
    }
    manifest["splits"] = split_info;
    c.header = manifest.dump();
    write_container_file(path, c);
}

Dataset load_dataset(const std::filesystem::path& path) {
    const Container c = read_container_file(path);
    json manifest;
    try {
        manifest = json::parse(c.header);
    } catch (const json::exception& e) {
        throw FormatError(std::string("dataset: bad manifest JSON: ") + e.what());
    }
    try {
        if (manifest.at("format") != "rpca.dataset") throw FormatError("dataset: wrong container format");
        Dataset data;
        auto& cfg = data.config;
        cfg.height = manifest.at("height").get<std::size_t>();
        cfg.width = manifest.at("width").get<std::size_t>();
        cfg.frames = manifest.at("frames").get<std::size_t>();
        cfg.rank = manifest.at("rank").get<std::size_t>();
        cfg.seed = manifest.at("seed").get<std::uint64_t>();
        cfg.source = manifest.at("source") == "mnist" ? ForegroundSource::Mnist : ForegroundSource::Sprites;
        const auto& splits = manifest.at("splits");
        std::size_t expected = 0;
        for (const char* name : kSplitNames) expected += 3 * splits.at(name).at("count").get<std::size_t>();
        if (expected != c.tensors.size()) {
            throw CountMismatchError("dataset: manifest declares " + std::to_string(expected / 3) + " samples but file holds " +
                                     std::to_string(c.tensors.size()) + " tensors");
        }
        std::vector<DataSample>* dst[3] = {&data.train, &data.val, &data.test};
        std::size_t next = 0;
        const FrameShape frame = cfg.frame();
        for (int s = 0; s < 3; ++s) {
            const auto& info = splits.at(kSplitNames[s]);
            const auto count = info.at("count").get<std::size_t>();
            cfg.n_train = s == 0 ? count : cfg.n_train;
            cfg.n_val = s == 1 ? count : cfg.n_val;
            cfg.n_test = s == 2 ? count : cfg.n_test;
            for (std::size_t i = 0; i < count; ++i) {
                DataSample sample;
                Matrix parts[3];
                for (auto& part : parts) {
                    part = to_matrix(c.tensors[next++]);
                    if (part.rows() != frame.pixels() || part.cols() != cfg.frames)
                        throw ShapeError("dataset: sample tensor shape does not match manifest geometry");
                }
                sample.M = VideoMatrix(std::move(parts[0]), frame);
                sample.L = VideoMatrix(std::move(parts[1]), frame);
                sample.S = VideoMatrix(std::move(parts[2]), frame);
                sample.scale = info.at("scales").at(i).get<double>();
                sample.offset = info.at("offsets").at(i).get<double>();
                sample.seed = info.at("seeds").at(i).get<std::uint64_t>();
                if (info.at("hashes").at(i).get<std::string>() != hex64(sample_hash(sample)))
                    throw FormatError("dataset: hash mismatch for " + std::string(kSplitNames[s]) + " sample " +
                                      std::to_string(i));
                dst[s]->push_back(std::move(sample));
            }
        }
        return data;
    } catch (const json::exception& e) {
        throw FormatError(std::string("dataset: malformed manifest: ") + e.what());
    }
}

void write_pgm(const std::filesystem::path& path, const VideoMatrix& video, std::size_t frame, double lo, double hi) {
    if (frame >= video.frames()) throw ShapeError("write_pgm: frame index out of range");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    const FrameShape shape = video.shape();
    out << "P5\n" << shape.width << " " << shape.height << "\n255\n";
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t y = 0; y < shape.height; ++y) {
        for (std::size_t x = 0; x < shape.width; ++x) {
            const double v = std::clamp((video.at(y, x, frame) - lo) / span, 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace rpca
