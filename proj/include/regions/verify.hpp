#ifndef REGIONS_VERIFY_HPP
#define REGIONS_VERIFY_HPP

// Self-check suites run by `regions verify`: bound properties, tree counter
// against exhaustive enumeration, and region counts of the constructions.

#include "regions/bounds.hpp"
#include "regions/constructions.hpp"
#include "regions/counter.hpp"

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace regions {

/// Dense ReLU network with standard normal weights and biases.
inline Network random_relu_network(std::size_t n0, const std::vector<std::size_t>& widths, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Network net;
    net.input_dim = n0;
    auto fan_in = static_cast<Eigen::Index>(n0);
    for (auto w : widths) {
        ReluLayer layer;
        layer.weights = Matrix(static_cast<Eigen::Index>(w), fan_in);
        layer.bias = Vector(static_cast<Eigen::Index>(w));
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < fan_in; ++c) {
                layer.weights(r, c) = normal(rng);
            }
            layer.bias[r] = normal(rng);
        }
        fan_in = static_cast<Eigen::Index>(w);
        net.layers.emplace_back(std::move(layer));
    }
    return net;
}

inline Network random_maxout_network(std::size_t n0, const std::vector<std::size_t>& widths, std::size_t rank,
                                     std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Network net;
    net.input_dim = n0;
    auto fan_in = static_cast<Eigen::Index>(n0);
    for (auto w : widths) {
        MaxoutLayer layer;
        for (std::size_t j = 0; j < rank; ++j) {
            Matrix W(static_cast<Eigen::Index>(w), fan_in);
            Vector b(static_cast<Eigen::Index>(w));
            for (Eigen::Index r = 0; r < W.rows(); ++r) {
                for (Eigen::Index c = 0; c < fan_in; ++c) {
                    W(r, c) = normal(rng);
                }
                b[r] = normal(rng);
            }
            layer.weights.push_back(std::move(W));
            layer.bias.push_back(std::move(b));
        }
        fan_in = static_cast<Eigen::Index>(w);
        net.layers.emplace_back(std::move(layer));
    }
    return net;
}

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckResult> checks;
    double seconds = 0.0;

    bool passed() const {
        for (const auto& c : checks) {
            if (!c.passed) {
                return false;
            }
        }
        return true;
    }
};

namespace detail {

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline NetConfig config_of(std::uint64_t n0, std::vector<std::uint64_t> widths) {
    NetConfig c;
    c.input_dim = n0;
    c.widths = std::move(widths);
    return c;
}

} // namespace detail

inline SuiteReport verify_bounds(std::uint64_t seed = 0) {
    detail::Timer timer;
    SuiteReport report{"bounds", {}, 0.0};
    std::mt19937_64 rng(seed);
    auto uniform = [&](std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
    };

    CheckResult chain{"upper bounds ordered (recurrence <= product <= 2^N)", true, ""};
    for (int trial = 0; trial < 500 && chain.passed; ++trial) {
        std::vector<std::uint64_t> widths(uniform(1, 5));
        for (auto& w : widths) {
            w = uniform(1, 30);
        }
        const auto cfg = detail::config_of(uniform(1, 1000), widths);
        const auto a = relu_upper_bound(cfg);
        const auto b = relu_upper_bound_product(cfg);
        const auto c = naive_upper_bound(cfg);
        if (!(a <= b && b <= c)) {
            chain.passed = false;
            chain.detail = "n0=" + std::to_string(cfg.input_dim) + ": " + to_string(a) + ", " + to_string(b) + ", " +
                           to_string(c);
        }
    }
    report.checks.push_back(chain);

    CheckResult bottleneck{"narrow first layer lowers the bound", true, ""};
    for (int trial = 0; trial < 200 && bottleneck.passed; ++trial) {
        const auto n1 = uniform(1, 12);
        const auto n2 = uniform(1, 12);
        const auto n0 = std::max(n1, n2) + uniform(1, 10);
        const auto wide_first = relu_upper_bound(detail::config_of(n0, {n1 + 1, n2}));
        const auto wide_second = relu_upper_bound(detail::config_of(n0, {n1, n2 + 1}));
        if (!(wide_first > wide_second)) {
            bottleneck.passed = false;
            bottleneck.detail = "n0=" + std::to_string(n0) + " n1=" + std::to_string(n1) + " n2=" + std::to_string(n2);
        }
    }
    report.checks.push_back(bottleneck);

    CheckResult shallow{"deep equal-width bound stays below 2^(Ln) when n0 >= Ln", true, ""};
    for (std::uint64_t n = 1; n <= 6 && shallow.passed; ++n) {
        for (std::uint64_t L = 2; L <= 5; ++L) {
            const auto cfg = detail::config_of(L * n + uniform(0, 5), std::vector<std::uint64_t>(L, n));
            if (!(relu_upper_bound(cfg) < power(2, L * n))) {
                shallow.passed = false;
                shallow.detail = "n=" + std::to_string(n) + " L=" + std::to_string(L);
                break;
            }
        }
    }
    report.checks.push_back(shallow);

    CheckResult counterexample{"B(4;3,2,1) = 47 > 46 = B(4;4,1,1)", true, ""};
    const auto b321 = relu_upper_bound(detail::config_of(4, {3, 2, 1}));
    const auto b411 = relu_upper_bound(detail::config_of(4, {4, 1, 1}));
    counterexample.passed = (b321 == 47 && b411 == 46);
    counterexample.detail = to_string(b321) + " vs " + to_string(b411);
    report.checks.push_back(counterexample);

    CheckResult single{"single layer bound equals the arrangement count", true, ""};
    for (std::uint64_t n0 = 1; n0 <= 8; ++n0) {
        for (std::uint64_t n = 1; n <= 12; ++n) {
            if (relu_upper_bound(detail::config_of(n0, {n})) != zaslavsky(n, std::min(n0, n))) {
                single.passed = false;
                single.detail = "n0=" + std::to_string(n0) + " n=" + std::to_string(n);
            }
        }
    }
    report.checks.push_back(single);

    CheckResult lower{"lower bounds below the recurrence bound", true, ""};
    for (int trial = 0; trial < 200 && lower.passed; ++trial) {
        const auto n0 = uniform(1, 4);
        std::vector<std::uint64_t> widths(uniform(1, 4));
        for (auto& w : widths) {
            w = 3 * n0 + uniform(0, 8);
        }
        const auto cfg = detail::config_of(n0, widths);
        const auto upper = relu_upper_bound(cfg);
        const auto replicated = replicated_lower_bound(cfg);
        const auto floor_replicated = floor_replicated_lower_bound(cfg);
        if (!(replicated <= upper && floor_replicated <= replicated)) {
            lower.passed = false;
            lower.detail = "n0=" + std::to_string(n0) + ": " + to_string(floor_replicated) + ", " +
                           to_string(replicated) + ", " + to_string(upper);
        }
    }
    report.checks.push_back(lower);

    report.seconds = timer.seconds();
    return report;
}

/// Tree counter against exhaustive enumeration on seeded random ReLU networks
/// (n0 <= 3, L <= 3, N <= 12), plus the recurrence bound on every count.
inline SuiteReport verify_oracle(std::size_t seeds = 50, std::uint64_t base_seed = 0) {
    detail::Timer timer;
    SuiteReport report{"oracle", {}, 0.0};
    for (std::size_t s = 0; s < seeds; ++s) {
        std::mt19937_64 rng(base_seed + s);
        const std::size_t n0 = 1 + rng() % 3;
        const std::size_t depth = 1 + rng() % 3;
        std::vector<std::size_t> widths(depth);
        std::size_t total = 0;
        for (auto& w : widths) {
            w = 1 + rng() % 5;
            total += w;
        }
        while (total > 12) {
            for (auto& w : widths) {
                if (w > 1 && total > 12) {
                    --w;
                    --total;
                }
            }
        }
        const auto net = random_relu_network(n0, widths, rng);
        CounterOptions options;
        options.domain = uniform_box(n0, -3.0, 3.0);
        const auto tree = count_regions_relu(net, options);
        const auto brute = brute_force_count(net, options);
        std::vector<std::uint64_t> cfg_widths(widths.begin(), widths.end());
        const auto bound = relu_upper_bound(detail::config_of(n0, cfg_widths));
        CheckResult check{"seed " + std::to_string(base_seed + s), tree.count == brute.count && tree.count <= bound,
                          "tree " + to_string(tree.count) + ", exhaustive " + to_string(brute.count) + ", bound " +
                              to_string(bound)};
        report.checks.push_back(std::move(check));
    }
    report.seconds = timer.seconds();
    return report;
}

/// Rank-2 maxout networks: tree counter against exhaustive enumeration and the
/// maxout bound; plus the rank-3 unit {x, 0, -x}.
inline SuiteReport verify_maxout(std::size_t instances = 20, std::uint64_t base_seed = 0) {
    detail::Timer timer;
    SuiteReport report{"maxout", {}, 0.0};
    for (std::size_t s = 0; s < instances; ++s) {
        std::mt19937_64 rng(base_seed + 1000 + s);
        const std::size_t n0 = 1 + rng() % 3;
        const std::size_t depth = 1 + rng() % 2;
        std::vector<std::size_t> widths(depth);
        std::size_t total = 0;
        for (auto& w : widths) {
            w = 1 + rng() % 6;
            total += w;
        }
        while (total > 12) { // 2^12 = 4096 patterns
            for (auto& w : widths) {
                if (w > 1 && total > 12) {
                    --w;
                    --total;
                }
            }
        }
        const auto net = random_maxout_network(n0, widths, 2, rng);
        CounterOptions options;
        options.domain = uniform_box(n0, -3.0, 3.0);
        const auto tree = count_regions_maxout(net, options);
        const auto brute = brute_force_count(net, options);
        NetConfig cfg = detail::config_of(n0, std::vector<std::uint64_t>(widths.begin(), widths.end()));
        cfg.maxout_rank = 2;
        const auto bound = maxout_upper_bound(cfg);
        report.checks.push_back({"seed " + std::to_string(base_seed + 1000 + s),
                                 tree.count == brute.count && tree.count <= bound,
                                 "tree " + to_string(tree.count) + ", exhaustive " + to_string(brute.count) +
                                     ", bound " + to_string(bound)});
    }
    Network unit;
    unit.input_dim = 1;
    MaxoutLayer layer;
    layer.weights = {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.0), Matrix::Constant(1, 1, -1.0)};
    layer.bias = {Vector::Zero(1), Vector::Zero(1), Vector::Zero(1)};
    unit.layers.emplace_back(std::move(layer));
    CounterOptions options;
    options.domain = uniform_box(1, -1.0, 1.0);
    const auto count = count_regions_maxout(unit, options).count;
    report.checks.push_back({"rank-3 unit {x, 0, -x}", count == 2, "count " + to_string(count)});
    report.seconds = timer.seconds();
    return report;
}

/// Region counts of the constructions: zigzag layers, deep stacks over
/// widths {3,4,5} with L <= 3, and the two-input replication.
inline SuiteReport verify_constructions(std::uint64_t seed = 7) {
    detail::Timer timer;
    SuiteReport report{"constructions", {}, 0.0};
    CounterOptions unit_interval;
    unit_interval.domain = uniform_box(1, 0.0, 1.0);
    for (std::size_t n = 3; n <= 12; ++n) {
        const auto count = count_regions_relu(zigzag_layer(n).to_network(), unit_interval).count;
        report.checks.push_back({"zigzag " + std::to_string(n), count == n + 1, "count " + to_string(count)});
    }
    std::vector<std::vector<std::size_t>> lists{{}};
    for (std::size_t depth = 1; depth <= 3; ++depth) {
        std::vector<std::vector<std::size_t>> next;
        for (const auto& prefix : lists) {
            for (std::size_t w : {3, 4, 5}) {
                auto grown = prefix;
                grown.push_back(w);
                next.push_back(grown);
            }
        }
        lists = next;
        for (const auto& widths : lists) {
            BigCount expected = 1;
            std::string name = "deep";
            for (auto w : widths) {
                expected *= w + 1;
                name += " " + std::to_string(w);
            }
            const auto count = count_regions_relu(deep_1d(widths), unit_interval).count;
            report.checks.push_back({name, count == expected,
                                     "count " + to_string(count) + ", expected " + to_string(expected)});
        }
    }
    CounterOptions square;
    square.domain = uniform_box(2, 0.0, 1.0);
    const auto deep2 = count_regions_relu(multi_dim(2, {6, 6}, seed), square).count;
    const auto lower = replicated_lower_bound(detail::config_of(2, {6, 6}));
    report.checks.push_back({"two-input replication 6,6", deep2 >= lower,
                             "count " + to_string(deep2) + ", lower bound " + to_string(lower)});
    const auto shallow = count_regions_relu(multi_dim(2, {6}, seed), square).count;
    report.checks.push_back({"two-input arrangement of 6 lines", shallow == zaslavsky(6, 2),
                             "count " + to_string(shallow)});
    report.seconds = timer.seconds();
    return report;
}

} // namespace regions

#endif
