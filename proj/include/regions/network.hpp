#ifndef REGIONS_NETWORK_HPP
#define REGIONS_NETWORK_HPP

// Layered piecewise-linear networks (ReLU and rank-k maxout), forward
// evaluation, and the affine maps that a fixed activation prefix induces on
// the input space.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace regions {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ReluLayer {
    Matrix weights; // n_l x n_{l-1}
    Vector bias;    // n_l
};

struct MaxoutLayer {
    std::vector<Matrix> weights; // k stacks, each n_l x n_{l-1}
    std::vector<Vector> bias;    // k vectors of length n_l

    std::size_t rank() const { return weights.size(); }
};

using Layer = std::variant<ReluLayer, MaxoutLayer>;

/// Linear read-out after the last hidden layer; carries no activation.
struct LinearOutput {
    Matrix weights;
    Vector bias;
};

inline bool is_maxout(const Layer& layer) { return std::holds_alternative<MaxoutLayer>(layer); }

inline std::size_t layer_width(const Layer& layer) {
    if (const auto* relu = std::get_if<ReluLayer>(&layer)) {
        return static_cast<std::size_t>(relu->weights.rows());
    }
    const auto& maxout = std::get<MaxoutLayer>(layer);
    return maxout.weights.empty() ? 0 : static_cast<std::size_t>(maxout.weights.front().rows());
}

inline std::size_t layer_fan_in(const Layer& layer) {
    if (const auto* relu = std::get_if<ReluLayer>(&layer)) {
        return static_cast<std::size_t>(relu->weights.cols());
    }
    const auto& maxout = std::get<MaxoutLayer>(layer);
    return maxout.weights.empty() ? 0 : static_cast<std::size_t>(maxout.weights.front().cols());
}

struct Network {
    std::size_t input_dim = 1;
    std::vector<Layer> layers;
    std::optional<LinearOutput> output;

    std::size_t depth() const { return layers.size(); }
    std::size_t width(std::size_t layer) const { return layer_width(layers.at(layer)); }

    std::size_t total_units() const {
        std::size_t n = 0;
        for (const auto& layer : layers) {
            n += layer_width(layer);
        }
        return n;
    }

    bool has_maxout() const { return std::any_of(layers.begin(), layers.end(), is_maxout); }

    std::vector<std::size_t> widths() const {
        std::vector<std::size_t> w;
        for (const auto& layer : layers) {
            w.push_back(layer_width(layer));
        }
        return w;
    }
};

/// Per-layer activation record. For a ReLU layer entry i is 1 when neuron i is
/// active (preactivation strictly positive) and 0 otherwise; for a maxout layer
/// it is the 0-based index of the winning affine piece.
struct ActivationPattern {
    std::vector<std::vector<int>> layers;

    auto operator<=>(const ActivationPattern&) const = default;
    bool operator==(const ActivationPattern&) const = default;

    std::size_t depth() const { return layers.size(); }

    /// 0-based indices of active ReLUs in layer l.
    std::vector<std::size_t> active_set(std::size_t l) const {
        std::vector<std::size_t> active;
        for (std::size_t i = 0; i < layers.at(l).size(); ++i) {
            if (layers[l][i] != 0) {
                active.push_back(i);
            }
        }
        return active;
    }
};

struct Box {
    Vector lower;
    Vector upper;
};

struct Unrestricted {};

using InputDomain = std::variant<Box, Unrestricted>;

inline Box uniform_box(std::size_t dim, double lo, double hi) {
    return Box{Vector::Constant(static_cast<Eigen::Index>(dim), lo),
               Vector::Constant(static_cast<Eigen::Index>(dim), hi)};
}

/// Input-space affine form x -> matrix * x + offset.
struct AffineMap {
    Matrix matrix;
    Vector offset;

    Eigen::Index rows() const { return matrix.rows(); }
    Vector apply(const Vector& x) const { return matrix * x + offset; }
};

struct Violation {
    std::size_t layer; // 1-based; 0 for network-level problems, depth()+1 for the output layer
    std::string message;

    bool operator==(const Violation&) const = default;
};

namespace detail {

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void check_block(std::vector<Violation>& out, std::size_t layer, const std::string& what,
                        const Matrix& w, const Vector& b, Eigen::Index rows, Eigen::Index cols) {
    if (w.cols() != cols) {
        out.push_back({layer, what + " weights have " + std::to_string(w.cols()) +
                                  " columns, expected " + std::to_string(cols)});
    }
    if (rows >= 0 && w.rows() != rows) {
        out.push_back({layer, what + " weights have " + std::to_string(w.rows()) +
                                  " rows, expected " + std::to_string(rows)});
    }
    if (b.size() != w.rows()) {
        out.push_back({layer, what + " bias has length " + std::to_string(b.size()) +
                                  ", expected " + std::to_string(w.rows())});
    }
    if (!all_finite(w) || !all_finite(b)) {
        out.push_back({layer, what + " contains a non-finite value"});
    }
}

} // namespace detail

/// Every shape or finiteness problem, tagged with its layer. Empty iff valid.
inline std::vector<Violation> validate(const Network& network) {
    std::vector<Violation> out;
    if (network.input_dim == 0) {
        out.push_back({0, "input_dim must be positive"});
    }
    auto fan_in = static_cast<Eigen::Index>(network.input_dim);
    for (std::size_t l = 0; l < network.layers.size(); ++l) {
        const std::size_t tag = l + 1;
        if (const auto* relu = std::get_if<ReluLayer>(&network.layers[l])) {
            detail::check_block(out, tag, "relu", relu->weights, relu->bias, -1, fan_in);
            fan_in = relu->weights.rows();
        } else {
            const auto& maxout = std::get<MaxoutLayer>(network.layers[l]);
            if (maxout.weights.size() < 2) {
                out.push_back({tag, "maxout rank must be >= 2"});
            }
            if (maxout.bias.size() != maxout.weights.size()) {
                out.push_back({tag, "maxout has " + std::to_string(maxout.weights.size()) +
                                        " weight stacks but " + std::to_string(maxout.bias.size()) +
                                        " bias vectors"});
            }
            if (maxout.weights.empty()) {
                continue;
            }
            const Eigen::Index rows = maxout.weights.front().rows();
            for (std::size_t j = 0; j < maxout.weights.size(); ++j) {
                const Vector& b = j < maxout.bias.size() ? maxout.bias[j] : Vector();
                detail::check_block(out, tag, "maxout piece " + std::to_string(j + 1),
                                    maxout.weights[j], b, rows, fan_in);
            }
            fan_in = rows;
        }
    }
    if (network.output) {
        detail::check_block(out, network.layers.size() + 1, "output", network.output->weights,
                            network.output->bias, -1, fan_in);
    }
    return out;
}

inline void require_valid(const Network& network) {
    auto violations = validate(network);
    if (!violations.empty()) {
        throw std::invalid_argument("invalid network: layer " +
                                    std::to_string(violations.front().layer) + ": " +
                                    violations.front().message);
    }
}

struct ForwardResult {
    Vector output;
    ActivationPattern pattern;
};

/// Evaluates the network at x. A ReLU is active iff its preactivation is
/// strictly positive; a maxout unit reports the lowest index attaining the max.
inline ForwardResult forward(const Network& network, const Vector& x) {
    if (static_cast<std::size_t>(x.size()) != network.input_dim) {
        throw std::invalid_argument("input has dimension " + std::to_string(x.size()) +
                                    ", network expects " + std::to_string(network.input_dim));
    }
    ForwardResult result;
    Vector h = x;
    for (const auto& layer : network.layers) {
        std::vector<int> entry;
        if (const auto* relu = std::get_if<ReluLayer>(&layer)) {
            Vector pre = relu->weights * h + relu->bias;
            entry.resize(static_cast<std::size_t>(pre.size()));
            for (Eigen::Index i = 0; i < pre.size(); ++i) {
                const bool active = pre[i] > 0.0;
                entry[static_cast<std::size_t>(i)] = active ? 1 : 0;
                pre[i] = active ? pre[i] : 0.0;
            }
            h = std::move(pre);
        } else {
            const auto& maxout = std::get<MaxoutLayer>(layer);
            Vector best = maxout.weights[0] * h + maxout.bias[0];
            entry.assign(static_cast<std::size_t>(best.size()), 0);
            for (std::size_t j = 1; j < maxout.rank(); ++j) {
                const Vector piece = maxout.weights[j] * h + maxout.bias[j];
                for (Eigen::Index i = 0; i < piece.size(); ++i) {
                    if (piece[i] > best[i]) {
                        best[i] = piece[i];
                        entry[static_cast<std::size_t>(i)] = static_cast<int>(j);
                    }
                }
            }
            h = std::move(best);
        }
        result.pattern.layers.push_back(std::move(entry));
    }
    result.output = network.output ? Vector(network.output->weights * h + network.output->bias) : h;
    return result;
}

/// Input-space preactivation map of the first layer.
inline AffineMap first_layer_map(const Network& network) {
    const auto& layer = network.layers.front();
    if (const auto* relu = std::get_if<ReluLayer>(&layer)) {
        return {relu->weights, relu->bias};
    }
    const auto& maxout = std::get<MaxoutLayer>(layer);
    const Eigen::Index n = maxout.weights.front().rows();
    const Eigen::Index k = static_cast<Eigen::Index>(maxout.rank());
    AffineMap map{Matrix(n * k, maxout.weights.front().cols()), Vector(n * k)};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            map.matrix.row(i * k + j) = maxout.weights[static_cast<std::size_t>(j)].row(i);
            map.offset[i * k + j] = maxout.bias[static_cast<std::size_t>(j)][i];
        }
    }
    return map;
}

/// Restricts a layer's preactivation map to one activation entry, giving the
/// input-space affine form of the layer output h^l (sigma for ReLU, phi for maxout).
inline AffineMap select_outputs(const Layer& layer, const AffineMap& preactivations,
                                const std::vector<int>& entry) {
    const Eigen::Index n = static_cast<Eigen::Index>(layer_width(layer));
    if (static_cast<Eigen::Index>(entry.size()) != n) {
        throw std::invalid_argument("pattern entry length does not match layer width");
    }
    AffineMap out{Matrix::Zero(n, preactivations.matrix.cols()), Vector::Zero(n)};
    if (!is_maxout(layer)) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (entry[static_cast<std::size_t>(i)] != 0) {
                out.matrix.row(i) = preactivations.matrix.row(i);
                out.offset[i] = preactivations.offset[i];
            }
        }
        return out;
    }
    const Eigen::Index k = static_cast<Eigen::Index>(std::get<MaxoutLayer>(layer).rank());
    for (Eigen::Index i = 0; i < n; ++i) {
        const int winner = entry[static_cast<std::size_t>(i)];
        if (winner < 0 || winner >= k) {
            throw std::invalid_argument("maxout winner index out of range");
        }
        out.matrix.row(i) = preactivations.matrix.row(i * k + winner);
        out.offset[i] = preactivations.offset[i * k + winner];
    }
    return out;
}

/// Preactivation map of `layer` given the input-space map of the previous layer's output.
inline AffineMap next_layer_map(const Layer& layer, const AffineMap& previous_output) {
    if (const auto* relu = std::get_if<ReluLayer>(&layer)) {
        return {relu->weights * previous_output.matrix,
                relu->weights * previous_output.offset + relu->bias};
    }
    const auto& maxout = std::get<MaxoutLayer>(layer);
    const Eigen::Index n = maxout.weights.front().rows();
    const Eigen::Index k = static_cast<Eigen::Index>(maxout.rank());
    AffineMap map{Matrix(n * k, previous_output.matrix.cols()), Vector(n * k)};
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto& w = maxout.weights[static_cast<std::size_t>(j)];
        const Matrix composed = w * previous_output.matrix;
        const Vector shifted = w * previous_output.offset + maxout.bias[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < n; ++i) {
            map.matrix.row(i * k + j) = composed.row(i);
            map.offset[i * k + j] = shifted[i];
        }
    }
    return map;
}

/// Input-space preactivations of layer `layer` (1-based) inside the region
/// selected by `prefix`, which must cover exactly layers 1..layer-1.
/// For a maxout layer the rows are neuron-major: row i*k + j is piece j of unit i.
inline AffineMap compose_region_map(const Network& network, const ActivationPattern& prefix,
                                    std::size_t layer) {
    if (layer < 1 || layer > network.depth()) {
        throw std::invalid_argument("layer index out of range");
    }
    if (prefix.depth() != layer - 1) {
        throw std::invalid_argument("prefix covers " + std::to_string(prefix.depth()) +
                                    " layers, expected " + std::to_string(layer - 1));
    }
    AffineMap map = first_layer_map(network);
    for (std::size_t l = 1; l < layer; ++l) {
        const AffineMap out = select_outputs(network.layers[l - 1], map, prefix.layers[l - 1]);
        map = next_layer_map(network.layers[l], out);
    }
    return map;
}

/// Input-space affine form of h^l for the pattern's deepest layer l.
inline AffineMap region_output_map(const Network& network, const ActivationPattern& pattern) {
    if (pattern.depth() == 0) {
        const auto n = static_cast<Eigen::Index>(network.input_dim);
        return {Matrix::Identity(n, n), Vector::Zero(n)};
    }
    ActivationPattern prefix{{pattern.layers.begin(), pattern.layers.end() - 1}};
    const AffineMap pre = compose_region_map(network, prefix, pattern.depth());
    return select_outputs(network.layers[pattern.depth() - 1], pre, pattern.layers.back());
}

inline constexpr double kDefaultRankTolerance = 1e-8;

/// Numerical rank: singular values <= tol * max(largest singular value, 1) count as zero.
inline std::size_t numerical_rank(const Matrix& m, double tol = kDefaultRankTolerance) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& s = svd.singularValues();
    const double threshold = tol * std::max(s.size() > 0 ? s[0] : 0.0, 1.0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > threshold) {
            ++rank;
        }
    }
    return rank;
}

/// dim h^l(S) = rank(sigma_{S^l}(W^l) ... sigma_{S^1}(W^1)) for the pattern's deepest layer l.
inline std::size_t region_image_dimension(const Network& network, const ActivationPattern& pattern,
                                          double tol = kDefaultRankTolerance) {
    return numerical_rank(region_output_map(network, pattern).matrix, tol);
}

/// Preactivations of every layer at x when every unit is forced to follow
/// `pattern` (a full-depth pattern) instead of its own sign. For maxout layers
/// the entries are neuron-major as in compose_region_map.
inline std::vector<Vector> forced_preactivations(const Network& network,
                                                 const ActivationPattern& pattern,
                                                 const Vector& x) {
    std::vector<Vector> pres;
    Vector h = x;
    for (std::size_t l = 0; l < network.depth(); ++l) {
        const auto& entry = pattern.layers.at(l);
        if (const auto* relu = std::get_if<ReluLayer>(&network.layers[l])) {
            Vector pre = relu->weights * h + relu->bias;
            pres.push_back(pre);
            for (Eigen::Index i = 0; i < pre.size(); ++i) {
                if (entry[static_cast<std::size_t>(i)] == 0) {
                    pre[i] = 0.0;
                }
            }
            h = std::move(pre);
        } else {
            const auto& maxout = std::get<MaxoutLayer>(network.layers[l]);
            const Eigen::Index n = maxout.weights.front().rows();
            const Eigen::Index k = static_cast<Eigen::Index>(maxout.rank());
            Vector all(n * k);
            Vector out(n);
            for (Eigen::Index j = 0; j < k; ++j) {
                const Vector piece =
                    maxout.weights[static_cast<std::size_t>(j)] * h + maxout.bias[static_cast<std::size_t>(j)];
                for (Eigen::Index i = 0; i < n; ++i) {
                    all[i * k + j] = piece[i];
                    if (entry[static_cast<std::size_t>(i)] == j) {
                        out[i] = piece[i];
                    }
                }
            }
            pres.push_back(std::move(all));
            h = std::move(out);
        }
    }
    return pres;
}

} // namespace regions

#endif
