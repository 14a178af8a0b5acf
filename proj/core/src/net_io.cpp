#include <json.hpp>

#include "rpca/errors.hpp"
#include "rpca/net.hpp"
#include "rpca/tensor_io.hpp"

namespace rpca {

using nlohmann::json;

void save_network(const std::filesystem::path& path, const NetworkParams& params) {
    Container c;
    json names = json::array();
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        for_each_tensor(params.layers[l], [&](const char* name, std::span<const double> values) {
            Tensor t;
            const std::string key(name);
            if (key.front() == 'W') {
                const std::uint64_t k = params.geometry.kernel_size;
                t.dims = {k, k};
                t.values.assign(values.begin(), values.end());
            } else if (key == "P") {
                t = to_tensor(params.layers[l].P);
            } else {
                t.dims = {values.size()};
                t.values.assign(values.begin(), values.end());
            }
            names.push_back({{"layer", l}, {"name", key}, {"dims", t.dims}});
            c.tensors.push_back(std::move(t));
        });
    }
    const json header{{"format", "rpca.network"},
                      {"variant", to_string(params.variant)},
                      {"depth", params.layers.size()},
                      {"height", params.geometry.frame.height},
                      {"width", params.geometry.frame.width},
                      {"frames", params.geometry.frames},
                      {"kernel_size", params.geometry.kernel_size},
                      {"tensors", names}};
    c.header = header.dump();
    write_container_file(path, c);
}

NetworkParams load_network(const std::filesystem::path& path) {
    const Container c = read_container_file(path);
    json header;
    try {
        header = json::parse(c.header);
    } catch (const json::exception& e) {
        throw FormatError(std::string("network file: bad JSON header: ") + e.what());
    }
    try {
        if (header.at("format") != "rpca.network") throw FormatError("network file: wrong container format");
        NetworkGeometry g;
        g.frame = {header.at("height").get<std::size_t>(), header.at("width").get<std::size_t>()};
        g.frames = header.at("frames").get<std::size_t>();
        g.kernel_size = header.at("kernel_size").get<std::size_t>();
        const auto variant = parse_variant(header.at("variant").get<std::string>());
        const auto depth = header.at("depth").get<std::size_t>();
        NetworkParams params = init_params(depth, g, variant, 0);
        std::size_t next = 0;
        for (auto& layer : params.layers) {
            for_each_tensor(layer, [&](const char* name, std::span<double> values) {
                if (next >= c.tensors.size()) throw CountMismatchError("network file: missing tensors");
                const Tensor& t = c.tensors[next];
                const auto& entry = header.at("tensors").at(next);
                if (entry.at("name") != name) throw FormatError(std::string("network file: expected tensor ") + name);
                ++next;
                if (t.values.size() != values.size()) throw ShapeError(std::string("network file: size of ") + name);
                if (std::string(name) == "P") {
                    layer.P = to_matrix(t);
                } else {
                    std::copy(t.values.begin(), t.values.end(), values.begin());
                }
            });
        }
        if (next != c.tensors.size()) throw CountMismatchError("network file: trailing tensors");
        return params;
    } catch (const json::exception& e) {
        throw FormatError(std::string("network file: malformed header: ") + e.what());
    }
}

}  // namespace rpca
