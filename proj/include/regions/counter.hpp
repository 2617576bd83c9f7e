#ifndef REGIONS_COUNTER_HPP
#define REGIONS_COUNTER_HPP

// Exact linear-region counting by depth-first search over activation
// patterns. Every node adds the rows of one unit to an LP query; a node
// survives only while its maximal margin exceeds epsilon, and every surviving
// leaf is one region: active preactivations > epsilon, inactive ones <= 0.

#include "regions/big_count.hpp"
#include "regions/feasibility.hpp"
#include "regions/network.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace regions {

/// A size guard (enumeration or grid too large) was hit.
class GuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CounterOptions {
    InputDomain domain = Unrestricted{};
    /// A region counts only if its active units clear this margin.
    double epsilon = 1e-6;
    std::optional<std::uint64_t> region_cap = 100'000'000;
    bool collect_witnesses = false;
    std::size_t workers = 1;
    /// Units decided sequentially before subtrees are handed to workers.
    std::size_t split_depth = 6;
    double feasibility_tol = kDefaultFeasibilityTolerance;
    /// Re-solve every n-th counted leaf in exact rational arithmetic (0 = never).
    std::size_t certify_every = 0;

    void validate(const Network& network) const {
        if (!(epsilon > 0.0)) {
            throw std::invalid_argument("epsilon must be positive");
        }
        if (workers == 0) {
            throw std::invalid_argument("workers must be >= 1");
        }
        if (const auto* box = std::get_if<Box>(&domain)) {
            if (static_cast<std::size_t>(box->lower.size()) != network.input_dim ||
                static_cast<std::size_t>(box->upper.size()) != network.input_dim) {
                throw std::invalid_argument("box dimension does not match the network input");
            }
            if ((box->lower.array() > box->upper.array()).any()) {
                throw std::invalid_argument("box lower bound exceeds upper bound");
            }
        }
    }
};

struct RegionWitness {
    ActivationPattern pattern;
    Vector point;
    double margin = 0.0; // +infinity when unbounded
};

struct CountResult {
    BigCount count = 0;
    std::optional<std::vector<RegionWitness>> witnesses;
    std::uint64_t nodes_explored = 0;
    std::uint64_t nodes_pruned = 0;
    double seconds = 0.0;
    /// Set when the region cap stopped the search; count is then a lower bound.
    bool partial = false;
    std::uint64_t certified = 0;
    std::uint64_t certification_mismatches = 0;
};

namespace detail {

struct SearchNode {
    std::size_t layer = 0;
    std::size_t unit = 0;
    AffineMap preactivations;
    ActivationPattern pattern;
    FeasibilityQuery query;
    Verdict verdict;
};

struct SubtreeResult {
    std::uint64_t count = 0;
    std::vector<RegionWitness> witnesses;
    std::uint64_t explored = 0;
    std::uint64_t pruned = 0;
    std::uint64_t certified = 0;
    std::uint64_t mismatches = 0;
};

class RegionSearch {
public:
    RegionSearch(const Network& network, const CounterOptions& options)
        : network_(network), options_(options) {}

    CountResult run() {
        const auto start = std::chrono::steady_clock::now();
        SearchNode root;
        root.query.dimension = network_.input_dim;
        root.query.domain = options_.domain;
        if (network_.depth() > 0) {
            root.preactivations = first_layer_map(network_);
            root.pattern.layers.emplace_back();
        }
        root.verdict = max_margin(root.query, options_.feasibility_tol);

        SubtreeResult head;
        head.explored = 1;
        std::vector<SearchNode> frontier;
        if (!root.verdict.strictly_feasible(options_.epsilon)) {
            head.pruned = 1;
        } else {
            expand(std::move(root), 0, head, &frontier);
        }

        std::vector<SubtreeResult> parts(frontier.size());
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= frontier.size() || stop_.load()) {
                    return;
                }
                expand(std::move(frontier[i]), 0, parts[i], nullptr);
            }
        };
        const std::size_t workers = std::min(options_.workers, std::max<std::size_t>(frontier.size(), 1));
        if (workers <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back(work);
            }
            for (auto& t : pool) {
                t.join();
            }
        }

        CountResult result;
        if (options_.collect_witnesses) {
            result.witnesses.emplace();
        }
        auto merge = [&](SubtreeResult& part) {
            result.count += part.count;
            result.nodes_explored += part.explored;
            result.nodes_pruned += part.pruned;
            result.certified += part.certified;
            result.certification_mismatches += part.mismatches;
            if (result.witnesses) {
                for (auto& w : part.witnesses) {
                    result.witnesses->push_back(std::move(w));
                }
            }
        };
        merge(head);
        for (auto& part : parts) {
            merge(part);
        }
        result.partial = stop_.load();
        if (result.partial && options_.region_cap) {
            // Subtrees finish their current leaf before noticing the stop flag.
            result.count = std::min<BigCount>(result.count, BigCount(*options_.region_cap));
            if (result.witnesses && result.witnesses->size() > *options_.region_cap) {
                result.witnesses->resize(*options_.region_cap);
            }
        }
        result.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result;
    }

private:
    std::size_t decided_units(const SearchNode& node) const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < node.layer; ++l) {
            n += network_.width(l);
        }
        return n + node.unit;
    }

    void record_leaf(SearchNode& node, SubtreeResult& out) {
        if (options_.region_cap) {
            const auto total = counted_.fetch_add(1) + 1;
            if (total > *options_.region_cap) {
                stop_.store(true);
                return;
            }
        }
        ++out.count;
        if (options_.certify_every > 0 && (out.count - 1) % options_.certify_every == 0) {
            ++out.certified;
            if (!max_margin_exact(node.query).strictly_feasible(options_.epsilon)) {
                ++out.mismatches;
            }
        }
        if (options_.collect_witnesses) {
            node.pattern.layers.resize(network_.depth());
            out.witnesses.push_back({node.pattern, node.verdict.witness, node.verdict.margin});
        }
    }

    // Children of a node, each with its rows appended but not yet solved.
    std::vector<SearchNode> children(const SearchNode& node) const {
        const auto& layer = network_.layers[node.layer];
        const auto i = static_cast<Eigen::Index>(node.unit);
        std::vector<SearchNode> out;
        if (!is_maxout(layer)) {
            const Vector row = node.preactivations.matrix.row(i).transpose();
            const double bound = -node.preactivations.offset[i];
            for (int state : {0, 1}) {
                SearchNode child = node;
                child.pattern.layers.back().push_back(state);
                if (state == 1) {
                    child.query.margin.push_back({row, bound});
                } else {
                    child.query.hard.push_back({row, bound});
                }
                out.push_back(std::move(child));
            }
            return out;
        }
        const auto k = static_cast<Eigen::Index>(std::get<MaxoutLayer>(layer).rank());
        for (Eigen::Index j = 0; j < k; ++j) {
            SearchNode child = node;
            child.pattern.layers.back().push_back(static_cast<int>(j));
            for (Eigen::Index other = 0; other < k; ++other) {
                if (other == j) {
                    continue;
                }
                const Vector row = (node.preactivations.matrix.row(i * k + j) -
                                    node.preactivations.matrix.row(i * k + other))
                                       .transpose();
                const double bound =
                    -(node.preactivations.offset[i * k + j] - node.preactivations.offset[i * k + other]);
                child.query.margin.push_back({row, bound});
            }
            out.push_back(std::move(child));
        }
        return out;
    }

    void advance_layer(SearchNode& node) const {
        const auto& layer = network_.layers[node.layer];
        if (node.unit < layer_width(layer)) {
            return;
        }
        const AffineMap out = select_outputs(layer, node.preactivations, node.pattern.layers.back());
        ++node.layer;
        node.unit = 0;
        if (node.layer < network_.depth()) {
            node.preactivations = next_layer_map(network_.layers[node.layer], out);
            node.pattern.layers.emplace_back();
        }
    }

    // Depth-first expansion of a node whose verdict already cleared epsilon.
    // With a frontier, nodes reaching split_depth are handed back instead.
    void expand(SearchNode node, std::size_t, SubtreeResult& out, std::vector<SearchNode>* frontier) {
        if (stop_.load()) {
            return;
        }
        if (node.layer >= network_.depth()) {
            record_leaf(node, out);
            return;
        }
        if (frontier && decided_units(node) >= options_.split_depth) {
            frontier->push_back(std::move(node));
            return;
        }
        for (auto& child : children(node)) {
            ++out.explored;
            child.verdict = max_margin(child.query, options_.feasibility_tol);
            if (!child.verdict.strictly_feasible(options_.epsilon)) {
                ++out.pruned;
                continue;
            }
            ++child.unit;
            advance_layer(child);
            expand(std::move(child), 0, out, frontier);
        }
    }

    const Network& network_;
    const CounterOptions& options_;
    std::atomic<bool> stop_{false};
    std::atomic<std::uint64_t> counted_{0};
};

} // namespace detail

/// Counts regions of any ReLU/maxout network.
inline CountResult count_regions(const Network& network, const CounterOptions& options) {
    require_valid(network);
    options.validate(network);
    detail::RegionSearch search(network, options);
    return search.run();
}

/// Counts the linear regions of a rectifier network inside options.domain.
inline CountResult count_regions_relu(const Network& network, const CounterOptions& options) {
    if (network.has_maxout()) {
        throw std::invalid_argument("network has maxout layers; use count_regions_maxout");
    }
    return count_regions(network, options);
}

/// Counts regions of a network with maxout layers: each unit branches over its
/// winning piece, which must beat every other piece by more than epsilon.
inline CountResult count_regions_maxout(const Network& network, const CounterOptions& options) {
    return count_regions(network, options);
}

namespace detail {

// Input-space affine form of every preactivation under a forced pattern,
// recovered by evaluating the forced network at 0 and at each unit vector.
inline std::vector<AffineMap> forced_affine_forms(const Network& network, const ActivationPattern& pattern) {
    const auto n0 = static_cast<Eigen::Index>(network.input_dim);
    const auto at_origin = forced_preactivations(network, pattern, Vector::Zero(n0));
    std::vector<AffineMap> forms;
    for (const auto& v : at_origin) {
        forms.push_back({Matrix(v.size(), n0), v});
    }
    for (Eigen::Index c = 0; c < n0; ++c) {
        const auto at_unit = forced_preactivations(network, pattern, Vector::Unit(n0, c));
        for (std::size_t l = 0; l < forms.size(); ++l) {
            forms[l].matrix.col(c) = at_unit[l] - at_origin[l];
        }
    }
    return forms;
}

inline std::uint64_t pattern_space_size(const Network& network) {
    long double total = 1;
    for (const auto& layer : network.layers) {
        const long double choices = is_maxout(layer) ? std::get<MaxoutLayer>(layer).rank() : 2;
        for (std::size_t i = 0; i < layer_width(layer); ++i) {
            total *= choices;
            if (total > 1e18L) {
                return std::numeric_limits<std::uint64_t>::max();
            }
        }
    }
    return static_cast<std::uint64_t>(total);
}

} // namespace detail

/// Independent oracle: one max-margin LP per complete pattern, with every
/// constraint rebuilt from forced forward evaluations instead of the search's
/// incremental maps. Guarded to N <= 20 ReLUs or at most 10^6 maxout patterns.
inline CountResult brute_force_count(const Network& network, const CounterOptions& options) {
    require_valid(network);
    options.validate(network);
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t space = detail::pattern_space_size(network);
    if (network.has_maxout() ? space > 1'000'000 : network.total_units() > 20) {
        throw GuardError("pattern space too large for exhaustive enumeration");
    }
    CountResult result;
    if (options.collect_witnesses) {
        result.witnesses.emplace();
    }
    std::vector<std::size_t> radix;
    for (const auto& layer : network.layers) {
        const std::size_t choices = is_maxout(layer) ? std::get<MaxoutLayer>(layer).rank() : 2;
        radix.insert(radix.end(), layer_width(layer), choices);
    }
    std::vector<std::size_t> digits(radix.size(), 0);
    for (std::uint64_t index = 0; index < space; ++index) {
        ActivationPattern pattern;
        std::size_t pos = 0;
        for (const auto& layer : network.layers) {
            std::vector<int> entry;
            for (std::size_t i = 0; i < layer_width(layer); ++i) {
                entry.push_back(static_cast<int>(digits[pos++]));
            }
            pattern.layers.push_back(std::move(entry));
        }
        const auto forms = detail::forced_affine_forms(network, pattern);
        FeasibilityQuery query;
        query.dimension = network.input_dim;
        query.domain = options.domain;
        for (std::size_t l = 0; l < network.depth(); ++l) {
            const auto& entry = pattern.layers[l];
            const auto& form = forms[l];
            if (!is_maxout(network.layers[l])) {
                for (std::size_t i = 0; i < entry.size(); ++i) {
                    const auto r = static_cast<Eigen::Index>(i);
                    Halfspace h{form.matrix.row(r).transpose(), -form.offset[r]};
                    (entry[i] != 0 ? query.margin : query.hard).push_back(std::move(h));
                }
            } else {
                const auto k = static_cast<Eigen::Index>(std::get<MaxoutLayer>(network.layers[l]).rank());
                for (std::size_t i = 0; i < entry.size(); ++i) {
                    const Eigen::Index base = static_cast<Eigen::Index>(i) * k;
                    const Eigen::Index win = base + entry[i];
                    for (Eigen::Index other = base; other < base + k; ++other) {
                        if (other != win) {
                            query.margin.push_back({(form.matrix.row(win) - form.matrix.row(other)).transpose(),
                                                    form.offset[other] - form.offset[win]});
                        }
                    }
                }
            }
        }
        ++result.nodes_explored;
        const Verdict verdict = max_margin(query, options.feasibility_tol);
        if (verdict.strictly_feasible(options.epsilon)) {
            ++result.count;
            if (result.witnesses) {
                result.witnesses->push_back({pattern, verdict.witness, verdict.margin});
            }
        } else {
            ++result.nodes_pruned;
        }
        for (std::size_t d = digits.size(); d-- > 0;) {
            if (++digits[d] < radix[d]) {
                break;
            }
            digits[d] = 0;
        }
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

/// Distinct activation patterns seen at the points of a regular grid over the
/// box, keeping only points whose active units clear epsilon. Each such point
/// certifies its region, so the result never exceeds the exact count.
inline BigCount grid_sample_count(const Network& network, const Box& box, std::size_t resolution,
                                  double epsilon = 1e-6) {
    require_valid(network);
    if (resolution == 0) {
        throw std::invalid_argument("resolution must be >= 1");
    }
    if (static_cast<std::size_t>(box.lower.size()) != network.input_dim ||
        static_cast<std::size_t>(box.upper.size()) != network.input_dim) {
        throw std::invalid_argument("box dimension does not match the network input");
    }
    long double points = 1;
    for (std::size_t d = 0; d < network.input_dim; ++d) {
        points *= static_cast<long double>(resolution);
    }
    if (points > 5e7L) {
        throw GuardError("grid has too many points");
    }
    const auto n0 = static_cast<Eigen::Index>(network.input_dim);
    std::set<ActivationPattern> seen;
    std::vector<std::size_t> index(network.input_dim, 0);
    const auto total = static_cast<std::uint64_t>(points);
    for (std::uint64_t p = 0; p < total; ++p) {
        Vector x(n0);
        for (Eigen::Index d = 0; d < n0; ++d) {
            const double lo = box.lower[d];
            const double hi = box.upper[d];
            x[d] = resolution == 1 ? 0.5 * (lo + hi)
                                   : lo + (hi - lo) * static_cast<double>(index[static_cast<std::size_t>(d)]) /
                                              static_cast<double>(resolution - 1);
        }
        auto fwd = forward(network, x);
        const auto pres = forced_preactivations(network, fwd.pattern, x);
        bool clear = true;
        for (std::size_t l = 0; l < network.depth() && clear; ++l) {
            const auto& entry = fwd.pattern.layers[l];
            if (!is_maxout(network.layers[l])) {
                for (std::size_t i = 0; i < entry.size(); ++i) {
                    if (entry[i] != 0 && !(pres[l][static_cast<Eigen::Index>(i)] > epsilon)) {
                        clear = false;
                    }
                }
            } else {
                const auto k = static_cast<Eigen::Index>(std::get<MaxoutLayer>(network.layers[l]).rank());
                for (std::size_t i = 0; i < entry.size(); ++i) {
                    const Eigen::Index base = static_cast<Eigen::Index>(i) * k;
                    for (Eigen::Index o = 0; o < k; ++o) {
                        if (o != entry[i] && !(pres[l][base + entry[i]] - pres[l][base + o] > epsilon)) {
                            clear = false;
                        }
                    }
                }
            }
        }
        if (clear) {
            seen.insert(std::move(fwd.pattern));
        }
        for (std::size_t d = index.size(); d-- > 0;) {
            if (++index[d] < resolution) {
                break;
            }
            index[d] = 0;
        }
    }
    return BigCount(seen.size());
}

/// Histogram of dim h^L(S) over the counted regions (requires witnesses).
inline std::map<std::size_t, std::uint64_t> dimension_profile(const CountResult& result,
                                                              const Network& network,
                                                              double rank_tol = kDefaultRankTolerance) {
    if (!result.witnesses) {
        throw std::invalid_argument("dimension profile needs a count run with witnesses collected");
    }
    std::map<std::size_t, std::uint64_t> histogram;
    for (const auto& w : *result.witnesses) {
        ++histogram[region_image_dimension(network, w.pattern, rank_tol)];
    }
    return histogram;
}

} // namespace regions

#endif
