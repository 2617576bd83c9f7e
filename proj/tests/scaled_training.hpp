#ifndef REGIONS_TESTS_SCALED_TRAINING_HPP
#define REGIONS_TESTS_SCALED_TRAINING_HPP

// Small rectifier classifiers on synthetic 8x8 images, trained with plain
// minibatch SGD on softmax cross-entropy. Everything is seeded.

#include "regions/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace regions::testing {

struct Dataset {
    Matrix inputs;              // one sample per column, pixels in [0,1]
    std::vector<int> labels;    // 0..9
};

// Ten stroke prototypes on an 8x8 grid, each sample a prototype with random
// shift and pixel noise.
inline Dataset synthetic_digits(std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::array<std::array<double, 64>, 10> prototypes{};
    std::mt19937_64 shape_rng(1234);
    for (auto& proto : prototypes) {
        proto.fill(0.0);
        for (int stroke = 0; stroke < 3; ++stroke) {
            int r = static_cast<int>(shape_rng() % 8);
            int c = static_cast<int>(shape_rng() % 8);
            const int dr = static_cast<int>(shape_rng() % 3) - 1;
            const int dc = static_cast<int>(shape_rng() % 3) - 1;
            for (int k = 0; k < 6; ++k) {
                proto[static_cast<std::size_t>(r * 8 + c)] = 1.0;
                r = std::clamp(r + dr, 0, 7);
                c = std::clamp(c + dc, 0, 7);
            }
        }
    }
    std::uniform_real_distribution<double> noise(0.0, 0.3);
    Dataset data;
    data.inputs = Matrix::Zero(64, static_cast<Eigen::Index>(samples));
    for (std::size_t s = 0; s < samples; ++s) {
        const int label = static_cast<int>(rng() % 10);
        const int shift_r = static_cast<int>(rng() % 3) - 1;
        const int shift_c = static_cast<int>(rng() % 3) - 1;
        for (int r = 0; r < 8; ++r) {
            for (int c = 0; c < 8; ++c) {
                const int sr = std::clamp(r - shift_r, 0, 7);
                const int sc = std::clamp(c - shift_c, 0, 7);
                const double v = prototypes[static_cast<std::size_t>(label)][static_cast<std::size_t>(sr * 8 + sc)];
                data.inputs(r * 8 + c, static_cast<Eigen::Index>(s)) = std::min(1.0, v * 0.8 + noise(rng));
            }
        }
        data.labels.push_back(label);
    }
    return data;
}

struct TrainedModel {
    Network network; // hidden ReLU layers plus a 10-way linear output
    double train_cross_entropy = 0.0;
    double test_error_rate = 0.0;
};

namespace detail {

struct Dense {
    Matrix W;
    Vector b;
};

inline Matrix softmax_columns(const Matrix& logits) {
    Matrix p = logits;
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
        p.col(c).array() -= p.col(c).maxCoeff();
        p.col(c) = p.col(c).array().exp();
        p.col(c) /= p.col(c).sum();
    }
    return p;
}

inline Matrix evaluate(const std::vector<Dense>& layers, const Matrix& x) {
    Matrix h = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        h = (layers[l].W * h).colwise() + layers[l].b;
        if (l + 1 < layers.size()) {
            h = h.cwiseMax(0.0);
        }
    }
    return h;
}

} // namespace detail

inline TrainedModel train_small(const std::vector<std::size_t>& widths, std::uint64_t seed, std::size_t epochs = 20,
                                double learning_rate = 0.1, std::size_t batch = 32) {
    const Dataset train = synthetic_digits(1000, 100 + seed);
    const Dataset test = synthetic_digits(300, 900 + seed);
    std::mt19937_64 rng(seed);
    std::vector<detail::Dense> layers;
    Eigen::Index fan_in = 64;
    std::vector<std::size_t> sizes = widths;
    sizes.push_back(10);
    for (auto w : sizes) {
        std::normal_distribution<double> init(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        detail::Dense d{Matrix(static_cast<Eigen::Index>(w), fan_in), Vector::Zero(static_cast<Eigen::Index>(w))};
        for (Eigen::Index i = 0; i < d.W.size(); ++i) {
            d.W.data()[i] = init(rng);
        }
        layers.push_back(std::move(d));
        fan_in = static_cast<Eigen::Index>(w);
    }

    const auto n = static_cast<std::size_t>(train.inputs.cols());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t m = std::min(batch, n - start);
            Matrix x(64, static_cast<Eigen::Index>(m));
            Matrix y = Matrix::Zero(10, static_cast<Eigen::Index>(m));
            for (std::size_t k = 0; k < m; ++k) {
                const auto s = static_cast<Eigen::Index>(order[start + k]);
                x.col(static_cast<Eigen::Index>(k)) = train.inputs.col(s);
                y(train.labels[static_cast<std::size_t>(s)], static_cast<Eigen::Index>(k)) = 1.0;
            }
            std::vector<Matrix> acts{x};
            for (std::size_t l = 0; l < layers.size(); ++l) {
                Matrix z = (layers[l].W * acts.back()).colwise() + layers[l].b;
                acts.push_back(l + 1 < layers.size() ? Matrix(z.cwiseMax(0.0)) : z);
            }
            Matrix delta = (detail::softmax_columns(acts.back()) - y) / static_cast<double>(m);
            for (std::size_t l = layers.size(); l-- > 0;) {
                const Matrix grad_W = delta * acts[l].transpose();
                const Vector grad_b = delta.rowwise().sum();
                if (l > 0) {
                    delta = (layers[l].W.transpose() * delta).cwiseProduct(
                        (acts[l].array() > 0.0).cast<double>().matrix());
                }
                layers[l].W -= learning_rate * grad_W;
                layers[l].b -= learning_rate * grad_b;
            }
        }
    }

    TrainedModel model;
    const Matrix p = detail::softmax_columns(detail::evaluate(layers, train.inputs));
    double ce = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        ce -= std::log(std::max(1e-300, p(train.labels[s], static_cast<Eigen::Index>(s))));
    }
    model.train_cross_entropy = ce / static_cast<double>(n);
    const Matrix logits = detail::evaluate(layers, test.inputs);
    std::size_t wrong = 0;
    for (Eigen::Index s = 0; s < logits.cols(); ++s) {
        Eigen::Index best = 0;
        logits.col(s).maxCoeff(&best);
        if (best != test.labels[static_cast<std::size_t>(s)]) {
            ++wrong;
        }
    }
    model.test_error_rate = static_cast<double>(wrong) / static_cast<double>(logits.cols());

    model.network.input_dim = 64;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        model.network.layers.emplace_back(ReluLayer{layers[l].W, layers[l].b});
    }
    model.network.output = LinearOutput{layers.back().W, layers.back().b};
    return model;
}

} // namespace regions::testing

#endif
