#pragma once

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cfkit/net.hpp"

// Versioned structured-text checkpoint: all trainable parameters plus the
// geometry, keyed by a hash of the configuration so a stale file cannot be
// loaded into a mismatched model.

namespace cfkit {

constexpr int kCheckpointVersion = 1;

namespace detail {

inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash(const NetModel& m) {
    std::string key = std::to_string(m.geom.feature_side) + "/" +
                      std::to_string(m.geom.kernel_size) + "/" +
                      std::to_string(m.geom.stride) + "/" +
                      std::to_string(m.feat.in_channels) + "/" +
                      std::to_string(m.feat.out_channels) + "/" +
                      std::to_string(m.cf.lambda) + "/" + std::to_string(m.cf.crop_margin) +
                      "/" + (m.learn_y ? "y" : "-") + "/" +
                      (m.constant_alpha ? "a" : "-");
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(key)));
    return buf;
}

inline nlohmann::json grid_to_json(const Grid& g) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < g.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < g.cols(); ++c) row.push_back(g(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Grid grid_from_json(const nlohmann::json& j, int rows, int cols) {
    if (static_cast<int>(j.size()) != rows)
        throw BadCheckpoint("checkpoint grid has wrong row count");
    Grid g(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols)
            throw BadCheckpoint("checkpoint grid has wrong column count");
        for (int c = 0; c < cols; ++c) g(r, c) = j[r][c].get<double>();
    }
    return g;
}

}  // namespace detail

inline void save_checkpoint(const NetModel& m, const std::string& path) {
    nlohmann::json j;
    j["version"] = kCheckpointVersion;
    j["config_hash"] = detail::config_hash(m);
    j["geometry"] = {{"feature_side", m.geom.feature_side},
                     {"kernel_size", m.geom.kernel_size},
                     {"stride", m.geom.stride}};
    j["cf"] = {{"lambda", m.cf.lambda},
               {"crop_margin", m.cf.crop_margin},
               {"response", detail::grid_to_json(m.cf.response.data)},
               {"window", detail::grid_to_json(m.cf.window.data)}};
    j["feat"] = {{"in_channels", m.feat.in_channels},
                 {"out_channels", m.feat.out_channels},
                 {"biases", std::vector<double>(m.feat.biases.data(),
                                                m.feat.biases.data() + m.feat.biases.size())}};
    nlohmann::json kernels = nlohmann::json::array();
    for (const Grid& k : m.feat.kernels) kernels.push_back(detail::grid_to_json(k));
    j["feat"]["kernels"] = std::move(kernels);
    j["cal"] = {{"s", m.cal.s}, {"b", m.cal.b}};
    j["learn_y"] = m.learn_y;
    j["constant_alpha"] = m.constant_alpha;
    if (m.constant_alpha) j["alpha"] = detail::grid_to_json(m.alpha.data);

    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << j.dump(1) << "\n";
    }
    fs::rename(tmp, target);
}

inline NetModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadCheckpoint("cannot open checkpoint " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw BadCheckpoint(std::string("checkpoint parse error: ") + e.what());
    }

    if (j.value("version", -1) != kCheckpointVersion)
        throw BadCheckpoint("unsupported checkpoint version");

    NetGeometry geom;
    geom.feature_side = j["geometry"]["feature_side"].get<int>();
    geom.kernel_size = j["geometry"]["kernel_size"].get<int>();
    geom.stride = j["geometry"]["stride"].get<int>();

    const int m = geom.feature_side;
    FeatureNetParams feat;
    feat.in_channels = j["feat"]["in_channels"].get<int>();
    feat.out_channels = j["feat"]["out_channels"].get<int>();
    feat.kernel_size = geom.kernel_size;
    feat.stride = geom.stride;
    const auto biases = j["feat"]["biases"].get<std::vector<double>>();
    if (static_cast<int>(biases.size()) != feat.out_channels)
        throw BadCheckpoint("bias count differs from out_channels");
    feat.biases = Eigen::Map<const Eigen::VectorXd>(biases.data(),
                                                    static_cast<long>(biases.size()));
    const auto& kernels = j["feat"]["kernels"];
    if (static_cast<int>(kernels.size()) != feat.in_channels * feat.out_channels)
        throw BadCheckpoint("kernel count differs from channel product");
    for (const auto& k : kernels)
        feat.kernels.push_back(detail::grid_from_json(k, feat.kernel_size, feat.kernel_size));

    CFConfig cf(m, j["cf"]["lambda"].get<double>(),
                Plane(detail::grid_from_json(j["cf"]["response"], m, m)),
                Plane(detail::grid_from_json(j["cf"]["window"], m, m)),
                j["cf"]["crop_margin"].get<int>());

    NetModel model(geom, std::move(feat), std::move(cf));
    model.cal.s = j["cal"]["s"].get<double>();
    model.cal.b = j["cal"]["b"].get<double>();
    model.learn_y = j.value("learn_y", false);
    model.constant_alpha = j.value("constant_alpha", false);
    if (model.constant_alpha)
        model.alpha = Plane(detail::grid_from_json(j["alpha"], m, m));

    if (j.value("config_hash", "") != detail::config_hash(model))
        throw BadCheckpoint("config hash mismatch");
    return model;
}

}  // namespace cfkit
