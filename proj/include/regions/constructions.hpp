#ifndef REGIONS_CONSTRUCTIONS_HPP
#define REGIONS_CONSTRUCTIONS_HPP

// Networks with known region counts: a one-input zigzag layer with n + 1
// pieces, deep stacks of zigzags on [0,1], and n0 independent stacks topped by
// a hyperplane arrangement in general position.

#include "regions/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace regions {

/// One zigzag layer on [0,1]. Unit i computes max{0, weights[i] x + bias[i]}
/// and the readout signs . h + offset oscillates 0, 1, 0, 1, ... across the
/// breakpoints. Every unit switches on to the right of its breakpoint except
/// the third, which is active to the left of it.
struct ZigzagSpec {
    std::size_t n = 0;
    std::vector<double> breakpoints;
    std::vector<double> weights;
    std::vector<double> bias;
    std::vector<double> signs;
    double offset = 0.0;

    double readout(double x) const {
        double y = offset;
        for (std::size_t i = 0; i < n; ++i) {
            y += signs[i] * std::max(0.0, weights[i] * x + bias[i]);
        }
        return y;
    }

    Network to_network() const {
        Network net;
        net.input_dim = 1;
        ReluLayer layer;
        layer.weights = Matrix(static_cast<Eigen::Index>(n), 1);
        layer.bias = Vector(static_cast<Eigen::Index>(n));
        LinearOutput out;
        out.weights = Matrix(1, static_cast<Eigen::Index>(n));
        out.bias = Vector::Constant(1, offset);
        for (std::size_t i = 0; i < n; ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            layer.weights(e, 0) = weights[i];
            layer.bias[e] = bias[i];
            out.weights(0, e) = signs[i];
        }
        net.layers.emplace_back(std::move(layer));
        net.output = std::move(out);
        return net;
    }
};

inline ZigzagSpec zigzag_layer(std::size_t n) {
    if (n < 3) {
        throw std::invalid_argument("zigzag layer needs at least 3 units");
    }
    ZigzagSpec spec;
    spec.n = n;
    const double denom = static_cast<double>(2 * n + 1);
    spec.breakpoints.push_back(1.0 / denom);
    for (std::size_t i = 2; i <= n; ++i) {
        spec.breakpoints.push_back(static_cast<double>(2 * i - 1) / denom);
    }
    // Target pieces on [t_{k-1}, t_k], t_0 = 0, t_{n+1} = 1: odd pieces rise 0 -> 1, even pieces fall.
    std::vector<double> t{0.0};
    t.insert(t.end(), spec.breakpoints.begin(), spec.breakpoints.end());
    t.push_back(1.0);
    struct Affine {
        double slope, intercept;
    };
    std::vector<Affine> piece(n + 2);
    for (std::size_t k = 1; k <= n + 1; ++k) {
        const double width = t[k] - t[k - 1];
        piece[k] = (k % 2 == 1) ? Affine{1.0 / width, -t[k - 1] / width} : Affine{-1.0 / width, t[k] / width};
    }
    auto diff = [](Affine a, Affine b) { return Affine{a.slope - b.slope, a.intercept - b.intercept}; };
    // Signed unit contributions u_i read off differences of consecutive pieces:
    // active sets are {3}, {1,3}, {1,2,3}, {1,2}, {1,2,4}, ...
    std::vector<Affine> u(n + 1);
    u[1] = diff(piece[2], piece[1]);
    u[2] = diff(piece[3], piece[2]);
    u[3] = diff(piece[3], piece[4]);
    for (std::size_t i = 4; i <= n; ++i) {
        u[i] = diff(piece[i + 1], piece[i]);
    }
    if (std::abs(piece[1].slope - u[3].slope) > 1e-9 * std::abs(piece[1].slope)) {
        throw std::logic_error("zigzag breakpoints violate the slope consistency condition");
    }
    spec.offset = piece[1].intercept - u[3].intercept;
    for (std::size_t i = 1; i <= n; ++i) {
        const bool points_left = (i == 3);
        double s = u[i].slope >= 0 ? 1.0 : -1.0;
        if (points_left) {
            s = -s;
        }
        spec.signs.push_back(s);
        spec.weights.push_back(s * u[i].slope);
        spec.bias.push_back(s * u[i].intercept);
    }
    return spec;
}

namespace detail {

// Zigzag layer fed by the readout of a previous zigzag (signs, offset) over
// the given input columns: w (signs . h + offset) + b folded into one row each.
inline void place_zigzag(ReluLayer& layer, Eigen::Index row0, const ZigzagSpec& zig, const std::vector<Eigen::Index>& columns,
                         const std::vector<double>& in_signs, double in_offset) {
    for (std::size_t i = 0; i < zig.n; ++i) {
        const Eigen::Index r = row0 + static_cast<Eigen::Index>(i);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            layer.weights(r, columns[c]) = zig.weights[i] * in_signs[c];
        }
        layer.bias[r] = zig.weights[i] * in_offset + zig.bias[i];
    }
}

} // namespace detail

/// Stack of zigzag layers on one input; the count on [0,1] is the product of (n_l + 1).
inline Network deep_1d(const std::vector<std::size_t>& widths) {
    if (widths.empty()) {
        throw std::invalid_argument("deep_1d needs at least one layer");
    }
    for (auto w : widths) {
        if (w < 3) {
            throw std::invalid_argument("every zigzag width must be >= 3");
        }
    }
    Network net;
    net.input_dim = 1;
    std::vector<double> in_signs{1.0};
    double in_offset = 0.0;
    std::vector<Eigen::Index> columns{0};
    for (auto width : widths) {
        const auto zig = zigzag_layer(width);
        ReluLayer layer;
        layer.weights = Matrix::Zero(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(columns.size()));
        layer.bias = Vector::Zero(static_cast<Eigen::Index>(width));
        detail::place_zigzag(layer, 0, zig, columns, in_signs, in_offset);
        net.layers.emplace_back(std::move(layer));
        in_signs = zig.signs;
        in_offset = zig.offset;
        columns.clear();
        for (std::size_t i = 0; i < width; ++i) {
            columns.push_back(static_cast<Eigen::Index>(i));
        }
    }
    LinearOutput out;
    out.weights = Matrix(1, static_cast<Eigen::Index>(in_signs.size()));
    for (std::size_t i = 0; i < in_signs.size(); ++i) {
        out.weights(0, static_cast<Eigen::Index>(i)) = in_signs[i];
    }
    out.bias = Vector::Constant(1, in_offset);
    net.output = std::move(out);
    return net;
}

namespace detail {

inline void for_each_subset(std::size_t m, std::size_t size, const std::function<bool(const std::vector<std::size_t>&)>& visit) {
    if (size > m) {
        return;
    }
    std::vector<std::size_t> pick(size);
    for (std::size_t i = 0; i < size; ++i) {
        pick[i] = i;
    }
    for (;;) {
        if (!visit(pick)) {
            return;
        }
        std::size_t i = size;
        while (i > 0 && pick[i - 1] == m - size + i - 1) {
            --i;
        }
        if (i == 0) {
            return;
        }
        ++pick[i - 1];
        for (std::size_t j = i; j < size; ++j) {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

// Hyperplanes a_j . y + c_j = 0 are in general position and every
// intersection of at most n0 of them meets the open unit cube.
inline bool arrangement_is_generic(const Matrix& A, const Vector& c, double tol) {
    const auto m = static_cast<std::size_t>(A.rows());
    const auto n0 = static_cast<std::size_t>(A.cols());
    const Vector center = Vector::Constant(A.cols(), 0.5);
    bool ok = true;
    for (std::size_t size = 1; size <= std::min(m, n0) && ok; ++size) {
        for_each_subset(m, size, [&](const std::vector<std::size_t>& pick) {
            Matrix As(static_cast<Eigen::Index>(size), A.cols());
            Vector cs(static_cast<Eigen::Index>(size));
            for (std::size_t r = 0; r < size; ++r) {
                As.row(static_cast<Eigen::Index>(r)) = A.row(static_cast<Eigen::Index>(pick[r]));
                cs[static_cast<Eigen::Index>(r)] = c[static_cast<Eigen::Index>(pick[r])];
            }
            const Matrix gram = As * As.transpose();
            if (std::abs(gram.determinant()) <= tol) {
                ok = false;
                return false;
            }
            // Point of the flat closest to the cube center.
            const Vector residual = As * center + cs;
            const Vector point = center - As.transpose() * gram.ldlt().solve(residual);
            if ((point.array() <= 0.0).any() || (point.array() >= 1.0).any()) {
                ok = false;
                return false;
            }
            return true;
        });
    }
    if (ok && m > n0) {
        for_each_subset(m, n0 + 1, [&](const std::vector<std::size_t>& pick) {
            Matrix aug(static_cast<Eigen::Index>(n0 + 1), static_cast<Eigen::Index>(n0 + 1));
            for (std::size_t r = 0; r <= n0; ++r) {
                const auto e = static_cast<Eigen::Index>(pick[r]);
                aug.row(static_cast<Eigen::Index>(r)) << A.row(e), c[e];
            }
            if (std::abs(aug.determinant()) <= tol) {
                ok = false;
                return false;
            }
            return true;
        });
    }
    return ok;
}

} // namespace detail

/// n0 independent zigzag stacks, one per input coordinate, followed by a last
/// layer of hyperplanes in general position over the n0 stack readouts. Counted
/// on [0,1]^n0. The hyperplanes come from a seeded generator and are re-drawn
/// until generic.
inline Network multi_dim(std::size_t n0, const std::vector<std::size_t>& widths, std::uint64_t seed) {
    if (n0 == 0) {
        throw std::invalid_argument("input dimension must be positive");
    }
    if (widths.empty()) {
        throw std::invalid_argument("multi_dim needs at least one layer");
    }
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        if (widths[l] < 3 * n0) {
            throw std::invalid_argument("hidden width " + std::to_string(widths[l]) + " is below 3 * n0 = " +
                                        std::to_string(3 * n0));
        }
    }
    if (widths.back() == 0) {
        throw std::invalid_argument("last layer must have at least one unit");
    }
    Network net;
    net.input_dim = n0;
    const auto N0 = static_cast<Eigen::Index>(n0);

    // Per coordinate: columns of the previous layer feeding its block and the readout.
    std::vector<std::vector<Eigen::Index>> columns(n0);
    std::vector<std::vector<double>> signs(n0, std::vector<double>{1.0});
    std::vector<double> offsets(n0, 0.0);
    for (std::size_t c = 0; c < n0; ++c) {
        columns[c] = {static_cast<Eigen::Index>(c)};
    }
    Eigen::Index fan_in = N0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const std::size_t block = widths[l] / n0;
        const auto zig = zigzag_layer(block);
        ReluLayer layer;
        layer.weights = Matrix::Zero(static_cast<Eigen::Index>(widths[l]), fan_in);
        layer.bias = Vector::Zero(static_cast<Eigen::Index>(widths[l]));
        for (std::size_t c = 0; c < n0; ++c) {
            const auto row0 = static_cast<Eigen::Index>(c * block);
            detail::place_zigzag(layer, row0, zig, columns[c], signs[c], offsets[c]);
            columns[c].clear();
            for (std::size_t i = 0; i < block; ++i) {
                columns[c].push_back(row0 + static_cast<Eigen::Index>(i));
            }
            signs[c] = zig.signs;
            offsets[c] = zig.offset;
        }
        net.layers.emplace_back(std::move(layer));
        fan_in = static_cast<Eigen::Index>(widths[l]);
    }

    const auto m = static_cast<Eigen::Index>(widths.back());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> shift(-0.15, 0.15);
    Matrix A(m, N0);
    Vector c(m);
    bool generic = false;
    for (int attempt = 0; attempt < 10000 && !generic; ++attempt) {
        for (Eigen::Index j = 0; j < m; ++j) {
            Vector normal_vec(N0);
            for (Eigen::Index d = 0; d < N0; ++d) {
                normal_vec[d] = normal(rng);
            }
            normal_vec /= std::max(normal_vec.norm(), 1e-12);
            Vector anchor(N0);
            for (Eigen::Index d = 0; d < N0; ++d) {
                anchor[d] = 0.5 + shift(rng);
            }
            A.row(j) = normal_vec.transpose();
            c[j] = -normal_vec.dot(anchor);
        }
        generic = detail::arrangement_is_generic(A, c, 1e-9);
    }
    if (!generic) {
        throw std::runtime_error("could not draw a generic hyperplane arrangement");
    }

    ReluLayer last;
    last.weights = Matrix::Zero(m, fan_in);
    last.bias = c;
    for (Eigen::Index j = 0; j < m; ++j) {
        for (std::size_t d = 0; d < n0; ++d) {
            const double a = A(j, static_cast<Eigen::Index>(d));
            for (std::size_t k = 0; k < columns[d].size(); ++k) {
                last.weights(j, columns[d][k]) += a * signs[d][k];
            }
            last.bias[j] += a * offsets[d];
        }
    }
    net.layers.emplace_back(std::move(last));
    return net;
}

} // namespace regions

#endif
