#ifndef REGIONS_NETWORK_IO_HPP
#define REGIONS_NETWORK_IO_HPP

// JSON network documents:
//   {"input_dim": n0,
//    "layers": [{"type": "relu", "weights": [[...], ...], "bias": [...]},
//               {"type": "maxout", "rank": k, "weights": [W_1, ..., W_k], "bias": [b_1, ..., b_k]}],
//    "output": {"weights": [[...]], "bias": [...]}}        (optional)
// Weight matrices are row-major: one inner array per neuron.

#include "regions/network.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace regions {

/// Malformed document or schema violation; `path()` names the offending field.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// A network file could not be opened or written.
class FileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline const json& require(const json& object, const std::string& key, const std::string& path) {
    if (!object.is_object()) {
        throw SchemaError(path, "expected an object");
    }
    auto it = object.find(key);
    if (it == object.end()) {
        throw SchemaError(path, "missing \"" + key + "\"");
    }
    return *it;
}

inline double read_number(const json& value, const std::string& path) {
    if (!value.is_number()) {
        throw SchemaError(path, "expected a number");
    }
    return value.get<double>();
}

inline Vector read_vector(const json& value, const std::string& path) {
    if (!value.is_array()) {
        throw SchemaError(path, "expected an array of numbers");
    }
    Vector v(static_cast<Eigen::Index>(value.size()));
    for (std::size_t i = 0; i < value.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = read_number(value[i], path + "[" + std::to_string(i) + "]");
    }
    return v;
}

inline Matrix read_matrix(const json& value, const std::string& path, std::size_t fan_in) {
    if (!value.is_array()) {
        throw SchemaError(path, "expected an array of rows");
    }
    const std::size_t rows = value.size();
    const std::size_t cols = rows == 0 ? fan_in : (value[0].is_array() ? value[0].size() : 0);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string row_path = path + "[" + std::to_string(r) + "]";
        const Vector row = read_vector(value[r], row_path);
        if (static_cast<std::size_t>(row.size()) != cols) {
            throw SchemaError(row_path, "ragged matrix: row has " + std::to_string(row.size()) +
                                            " entries, expected " + std::to_string(cols));
        }
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

inline json write_matrix(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json write_vector(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

} // namespace detail

inline Network network_from_json(const nlohmann::json& doc) {
    using detail::require;
    Network network;
    const auto& n0 = require(doc, "input_dim", "");
    if (!n0.is_number_integer() || n0.get<long long>() <= 0) {
        throw SchemaError("input_dim", "expected a positive integer");
    }
    network.input_dim = n0.get<std::size_t>();
    const auto& layers = require(doc, "layers", "");
    if (!layers.is_array()) {
        throw SchemaError("layers", "expected an array");
    }
    std::size_t fan_in = network.input_dim;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string path = "layers[" + std::to_string(l) + "]";
        const auto& spec = layers[l];
        const auto& type = require(spec, "type", path);
        if (!type.is_string()) {
            throw SchemaError(path + ".type", "expected a string");
        }
        const auto kind = type.get<std::string>();
        if (kind == "relu") {
            ReluLayer layer;
            layer.weights = detail::read_matrix(require(spec, "weights", path), path + ".weights", fan_in);
            layer.bias = detail::read_vector(require(spec, "bias", path), path + ".bias");
            fan_in = static_cast<std::size_t>(layer.weights.rows());
            network.layers.emplace_back(std::move(layer));
        } else if (kind == "maxout") {
            const auto& rank = require(spec, "rank", path);
            if (!rank.is_number_integer()) {
                throw SchemaError(path + ".rank", "expected an integer");
            }
            if (rank.get<long long>() < 2) {
                throw SchemaError(path + ".rank", "rank must be >= 2");
            }
            const auto k = rank.get<std::size_t>();
            const auto& weights = require(spec, "weights", path);
            const auto& bias = require(spec, "bias", path);
            if (!weights.is_array() || weights.size() != k) {
                throw SchemaError(path + ".weights", "expected " + std::to_string(k) + " matrices");
            }
            if (!bias.is_array() || bias.size() != k) {
                throw SchemaError(path + ".bias", "expected " + std::to_string(k) + " vectors");
            }
            MaxoutLayer layer;
            for (std::size_t j = 0; j < k; ++j) {
                const std::string idx = "[" + std::to_string(j) + "]";
                layer.weights.push_back(detail::read_matrix(weights[j], path + ".weights" + idx, fan_in));
                layer.bias.push_back(detail::read_vector(bias[j], path + ".bias" + idx));
            }
            fan_in = static_cast<std::size_t>(layer.weights.front().rows());
            network.layers.emplace_back(std::move(layer));
        } else {
            throw SchemaError(path + ".type", "unknown layer type \"" + kind + "\"");
        }
    }
    if (auto it = doc.find("output"); it != doc.end() && !it->is_null()) {
        LinearOutput out;
        out.weights = detail::read_matrix(require(*it, "weights", "output"), "output.weights", fan_in);
        out.bias = detail::read_vector(require(*it, "bias", "output"), "output.bias");
        network.output = std::move(out);
    }
    auto violations = validate(network);
    if (!violations.empty()) {
        const auto& v = violations.front();
        const std::string path = v.layer == 0 ? std::string()
                                 : v.layer > network.depth() ? std::string("output")
                                                             : "layers[" + std::to_string(v.layer - 1) + "]";
        throw SchemaError(path, v.message);
    }
    return network;
}

inline nlohmann::json network_to_json(const Network& network) {
    nlohmann::json doc;
    doc["input_dim"] = network.input_dim;
    doc["layers"] = nlohmann::json::array();
    for (const auto& layer : network.layers) {
        nlohmann::json spec;
        if (const auto* relu = std::get_if<ReluLayer>(&layer)) {
            spec["type"] = "relu";
            spec["weights"] = detail::write_matrix(relu->weights);
            spec["bias"] = detail::write_vector(relu->bias);
        } else {
            const auto& maxout = std::get<MaxoutLayer>(layer);
            spec["type"] = "maxout";
            spec["rank"] = maxout.rank();
            spec["weights"] = nlohmann::json::array();
            spec["bias"] = nlohmann::json::array();
            for (std::size_t j = 0; j < maxout.rank(); ++j) {
                spec["weights"].push_back(detail::write_matrix(maxout.weights[j]));
                spec["bias"].push_back(detail::write_vector(maxout.bias[j]));
            }
        }
        doc["layers"].push_back(std::move(spec));
    }
    if (network.output) {
        doc["output"] = {{"weights", detail::write_matrix(network.output->weights)},
                         {"bias", detail::write_vector(network.output->bias)}};
    }
    return doc;
}

inline Network parse_network(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("", std::string("malformed JSON: ") + e.what());
    }
    return network_from_json(doc);
}

inline Network read_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw FileError("cannot open network file: " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_network(buffer.str());
}

inline void write_network(const Network& network, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw FileError("cannot write network file: " + path);
    }
    out << network_to_json(network).dump(2) << '\n';
}

} // namespace regions

#endif
