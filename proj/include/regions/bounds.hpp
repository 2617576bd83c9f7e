#ifndef REGIONS_BOUNDS_HPP
#define REGIONS_BOUNDS_HPP

// Closed-form and recursive bounds on the maximal number of linear regions
// of rectifier and maxout networks. Everything is exact except
// depth_independent_cap, which is a real-valued envelope.

#include "regions/big_count.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace regions {

/// Shape of a fully connected network as far as the bounds are concerned.
struct NetConfig {
    std::uint64_t input_dim = 1;
    std::vector<std::uint64_t> widths;
    /// Optional per-layer caps on rank(W^l); same length as widths.
    std::optional<std::vector<std::uint64_t>> rank_caps;
    /// Maxout rank k, when the layers are maxout units.
    std::optional<std::uint64_t> maxout_rank;

    std::uint64_t total_units() const {
        std::uint64_t n = 0;
        for (auto w : widths) {
            n += w;
        }
        return n;
    }

    void validate() const {
        if (input_dim == 0) {
            throw std::invalid_argument("input dimension must be positive");
        }
        for (std::size_t l = 0; l < widths.size(); ++l) {
            if (widths[l] == 0) {
                throw std::invalid_argument("layer " + std::to_string(l + 1) + " has zero width");
            }
        }
        if (rank_caps) {
            if (rank_caps->size() != widths.size()) {
                throw std::invalid_argument("rank caps must have one entry per layer");
            }
            for (std::size_t l = 0; l < widths.size(); ++l) {
                if ((*rank_caps)[l] > widths[l]) {
                    throw std::invalid_argument("rank cap of layer " + std::to_string(l + 1) +
                                                " exceeds its width");
                }
            }
        }
        if (maxout_rank && *maxout_rank < 2) {
            throw std::invalid_argument("maxout rank must be >= 2");
        }
    }
};

/// Regions cut out of R^d by m hyperplanes in general position.
inline BigCount zaslavsky(std::uint64_t m, std::uint64_t d) { return binomial_prefix_sum(m, d); }

/// Upper bound summing prod C(n_l, j_l) over the index set
/// 0 <= j_l <= min{n_0, n_1 - j_1, ..., n_{l-1} - j_{l-1}, n_l},
/// evaluated through the recurrence on (layer, remaining image dimension).
/// With rank caps, j_l is further capped by rank(W^l).
inline BigCount relu_upper_bound(const NetConfig& config) {
    config.validate();
    if (config.widths.empty()) {
        throw std::invalid_argument("at least one layer is required");
    }
    const auto& n = config.widths;
    const std::size_t layers = n.size();
    const std::uint64_t max_dim =
        std::min<std::uint64_t>(config.input_dim, *std::max_element(n.begin(), n.end()));

    auto cap = [&](std::size_t l) { return config.rank_caps ? (*config.rank_caps)[l] : n[l]; };

    // table[d] holds R(l + 1, d) while layer l is being filled in.
    std::vector<BigCount> next(max_dim + 1);
    for (std::uint64_t d = 0; d <= max_dim; ++d) {
        next[d] = binomial_prefix_sum(n[layers - 1], std::min(cap(layers - 1), d));
    }
    for (std::size_t l = layers - 1; l-- > 0;) {
        std::vector<BigCount> current(max_dim + 1);
        for (std::uint64_t d = 0; d <= max_dim; ++d) {
            BigCount sum = 0;
            const std::uint64_t top = std::min(cap(l), d);
            for (std::uint64_t j = 0; j <= top; ++j) {
                sum += binomial(n[l], j) * next[std::min(n[l] - j, d)];
            }
            current[d] = std::move(sum);
        }
        next = std::move(current);
    }
    return next[std::min(config.input_dim, max_dim)];
}

/// prod_l sum_{j <= d_l} C(n_l, j) with d_l = min{n_0, ..., n_l}.
inline BigCount relu_upper_bound_product(const NetConfig& config) {
    config.validate();
    if (config.widths.empty()) {
        throw std::invalid_argument("at least one layer is required");
    }
    BigCount product = 1;
    std::uint64_t d = config.input_dim;
    for (auto width : config.widths) {
        d = std::min(d, width);
        product *= binomial_prefix_sum(width, d);
    }
    return product;
}

/// 2^N for N hidden units: one region per activation pattern at most.
inline BigCount naive_upper_bound(const NetConfig& config) {
    return power(BigCount(2), config.total_units());
}

/// (prod_{l<L} floor(n_l/n_0)^{n_0}) * sum_{j<=n_0} C(n_L, j), valid when n_l >= n_0.
inline BigCount floor_replicated_lower_bound(const NetConfig& config) {
    config.validate();
    if (config.widths.empty()) {
        throw std::invalid_argument("at least one layer is required");
    }
    const auto n0 = config.input_dim;
    for (auto width : config.widths) {
        if (width < n0) {
            throw std::invalid_argument("every layer must be at least as wide as the input");
        }
    }
    BigCount product = 1;
    for (std::size_t l = 0; l + 1 < config.widths.size(); ++l) {
        product *= power(BigCount(config.widths[l] / n0), n0);
    }
    return product * zaslavsky(config.widths.back(), n0);
}

/// (prod_{l<L} (floor(n_l/n_0) + 1)^{n_0}) * sum_{j<=n_0} C(n_L, j), valid when n_l >= 3 n_0.
/// Attained by constructions::multi_dim.
inline BigCount replicated_lower_bound(const NetConfig& config) {
    config.validate();
    if (config.widths.empty()) {
        throw std::invalid_argument("at least one layer is required");
    }
    const auto n0 = config.input_dim;
    for (auto width : config.widths) {
        if (width < 3 * n0) {
            throw std::invalid_argument("every layer must have at least 3 * input_dim units");
        }
    }
    BigCount product = 1;
    for (std::size_t l = 0; l + 1 < config.widths.size(); ++l) {
        product *= power(BigCount(config.widths[l] / n0 + 1), n0);
    }
    return product * zaslavsky(config.widths.back(), n0);
}

/// 2 * sum_{j<n_0} C(m-1, j) * (w+1)^{L-1} for a network with a 2m-unit first
/// layer followed by L-1 one-dimensional layers of width w.
inline BigCount wide_first_layer_lower_bound(std::uint64_t input_dim, std::uint64_t m,
                                             std::uint64_t w, std::uint64_t layers) {
    if (input_dim == 0 || m < 1 || w < 2 || layers < 1) {
        throw std::invalid_argument("requires input_dim >= 1, m >= 1, w >= 2, L >= 1");
    }
    return 2 * binomial_prefix_sum(m - 1, input_dim - 1) * power(BigCount(w + 1), layers - 1);
}

/// prod_l sum_{j<=d_l} C(k(k-1)/2 * n_l, j) for rank-k maxout layers.
inline BigCount maxout_upper_bound(const NetConfig& config) {
    config.validate();
    if (!config.maxout_rank) {
        throw std::invalid_argument("maxout rank is required");
    }
    if (config.widths.empty()) {
        throw std::invalid_argument("at least one layer is required");
    }
    const std::uint64_t k = *config.maxout_rank;
    const std::uint64_t pairs = k * (k - 1) / 2;
    BigCount product = 1;
    std::uint64_t d = config.input_dim;
    for (auto width : config.widths) {
        d = std::min(d, width);
        product *= binomial_prefix_sum(pairs * width, d);
    }
    return product;
}

/// sum_{j<=n_1} C(n_1 + n_2, j); coincides with relu_upper_bound when n_0 >= n_1, n_2.
inline BigCount two_layer_upper_bound(std::uint64_t n0, std::uint64_t n1, std::uint64_t n2) {
    if (n0 < std::max(n1, n2)) {
        throw std::invalid_argument("closed form requires n0 >= max(n1, n2)");
    }
    return binomial_prefix_sum(n1 + n2, n1);
}

/// 2^{Ln} (1/2 + 1/(2 sqrt(pi n)))^{L/2} sqrt(2): dominates relu_upper_bound for
/// L layers of width n and any input dimension.
inline double depth_independent_cap(std::uint64_t n, std::uint64_t layers) {
    if (n < 1 || layers < 1) {
        throw std::invalid_argument("requires n >= 1 and L >= 1");
    }
    const double nn = static_cast<double>(n);
    const double ll = static_cast<double>(layers);
    const double base = 0.5 + 1.0 / (2.0 * std::sqrt(std::numbers::pi * nn));
    return std::exp2(ll * nn) * std::pow(base, ll / 2.0) * std::numbers::sqrt2;
}

/// (floor(n / floor(n/3)) + 1)^{L floor(n/3)}: exponential lower bound for L
/// layers of width n whenever n_0 >= n/3.
inline BigCount large_input_lower_bound(std::uint64_t n, std::uint64_t layers) {
    if (n < 3) {
        throw std::invalid_argument("requires n >= 3");
    }
    const std::uint64_t third = n / 3;
    return power(BigCount(n / third + 1), layers * third);
}

} // namespace regions

#endif
