#include "regions/bounds.hpp"
#include "regions/counter.hpp"
#include "regions/network_io.hpp"
#include "regions/verify.hpp"
#include "sweep_1d.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

using regions::testing::sweep_count_1d;

using namespace regions;

namespace {

const std::string kFixtures = REGIONS_FIXTURE_DIR;

Network fixture(const std::string& name) { return read_network(kFixtures + "/" + name); }

CounterOptions in_box(std::size_t dim, double lo, double hi) {
    CounterOptions options;
    options.domain = uniform_box(dim, lo, hi);
    return options;
}

Network permute_layer(const Network& net, std::size_t l, const std::vector<Eigen::Index>& perm) {
    Network out = net;
    auto& layer = std::get<ReluLayer>(out.layers[l]);
    const auto& src = std::get<ReluLayer>(net.layers[l]);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        layer.weights.row(static_cast<Eigen::Index>(i)) = src.weights.row(perm[i]);
        layer.bias[static_cast<Eigen::Index>(i)] = src.bias[perm[i]];
    }
    if (l + 1 < net.depth()) {
        auto& next = std::get<ReluLayer>(out.layers[l + 1]);
        const auto& next_src = std::get<ReluLayer>(net.layers[l + 1]);
        for (std::size_t i = 0; i < perm.size(); ++i) {
            next.weights.col(static_cast<Eigen::Index>(i)) = next_src.weights.col(perm[i]);
        }
    }
    return out;
}

Network single_maxout_unit(std::vector<double> slopes) {
    Network net;
    net.input_dim = 1;
    MaxoutLayer layer;
    for (double s : slopes) {
        layer.weights.push_back(Matrix::Constant(1, 1, s));
        layer.bias.push_back(Vector::Zero(1));
    }
    net.layers.emplace_back(std::move(layer));
    return net;
}

} // namespace

TEST(CountRegions, PlanarThreeLayer) {
    const Network net = fixture("planar_three_layer.json");
    EXPECT_EQ(count_regions_relu(net, in_box(2, -50, 50)).count, 20);
    CounterOptions open;
    open.domain = Unrestricted{};
    EXPECT_EQ(count_regions_relu(net, open).count, 20);
}

TEST(CountRegions, LineThreeUnit) {
    const Network net = fixture("line_three_unit.json");
    EXPECT_EQ(sweep_count_1d(net, -2, 2), 5u);
    EXPECT_EQ(count_regions_relu(net, in_box(1, -2, 2)).count, 5);
}

TEST(CountRegions, ZeroHiddenLayers) {
    EXPECT_EQ(count_regions_relu(fixture("zero_layer.json"), in_box(2, 0, 1)).count, 1);
    CounterOptions open;
    EXPECT_EQ(count_regions_relu(fixture("zero_layer.json"), open).count, 1);
}

TEST(CountRegions, LineFourUnit) {
    const Network net = fixture("line_four_unit.json");
    EXPECT_EQ(sweep_count_1d(net, 0, 1), 5u);
    EXPECT_EQ(count_regions_relu(net, in_box(1, 0, 1)).count, 5);
}

TEST(CountRegions, RejectsMaxoutAndBadOptions) {
    EXPECT_THROW(count_regions_relu(fixture("maxout_abs.json"), in_box(1, -1, 1)), std::invalid_argument);
    auto options = in_box(2, -1, 1);
    options.epsilon = 0.0;
    EXPECT_THROW(count_regions_relu(fixture("planar_three_layer.json"), options), std::invalid_argument);
    EXPECT_THROW(count_regions_relu(fixture("planar_three_layer.json"), in_box(3, -1, 1)), std::invalid_argument);
    options = in_box(2, -1, 1);
    options.workers = 0;
    EXPECT_THROW(count_regions_relu(fixture("planar_three_layer.json"), options), std::invalid_argument);
}

TEST(CountRegions, WitnessesAreDistinctAndCertified) {
    const Network net = fixture("planar_three_layer.json");
    auto options = in_box(2, -50, 50);
    options.collect_witnesses = true;
    const auto result = count_regions_relu(net, options);
    ASSERT_TRUE(result.witnesses.has_value());
    ASSERT_EQ(result.witnesses->size(), 20u);
    std::set<ActivationPattern> patterns;
    for (const auto& w : *result.witnesses) {
        patterns.insert(w.pattern);
        EXPECT_GT(w.margin, options.epsilon);
        // Witnesses may sit on a region's boundary, so check the forced preactivations.
        const auto pres = forced_preactivations(net, w.pattern, w.point);
        for (std::size_t l = 0; l < pres.size(); ++l) {
            for (Eigen::Index i = 0; i < pres[l].size(); ++i) {
                if (w.pattern.layers[l][static_cast<std::size_t>(i)]) {
                    EXPECT_GT(pres[l][i], options.epsilon - 1e-9);
                } else {
                    EXPECT_LE(pres[l][i], 1e-7);
                }
            }
        }
    }
    EXPECT_EQ(patterns.size(), 20u);
    EXPECT_GE(result.nodes_explored, 20u);
}

TEST(CountRegions, ExactCertification) {
    auto options = in_box(2, -50, 50);
    options.certify_every = 1;
    const auto result = count_regions_relu(fixture("planar_three_layer.json"), options);
    EXPECT_EQ(result.certified, 20u);
    EXPECT_EQ(result.certification_mismatches, 0u);
}

TEST(CountRegions, RegionCapFlagsPartial) {
    auto options = in_box(2, -50, 50);
    options.region_cap = 7;
    options.collect_witnesses = true;
    const auto result = count_regions_relu(fixture("planar_three_layer.json"), options);
    EXPECT_TRUE(result.partial);
    EXPECT_EQ(result.count, 7);
    EXPECT_EQ(result.witnesses->size(), 7u);
    options.region_cap = 20;
    EXPECT_FALSE(count_regions_relu(fixture("planar_three_layer.json"), options).partial);
}

TEST(CountRegions, WorkerCountDoesNotChangeResult) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const Network net = random_relu_network(3, {6, 5, 4}, rng);
        auto options = in_box(3, -3, 3);
        options.collect_witnesses = true;
        options.split_depth = 4;
        const auto serial = count_regions_relu(net, options);
        options.workers = 4;
        const auto parallel = count_regions_relu(net, options);
        EXPECT_EQ(serial.count, parallel.count);
        EXPECT_EQ(serial.nodes_explored, parallel.nodes_explored);
        ASSERT_EQ(serial.witnesses->size(), parallel.witnesses->size());
        for (std::size_t i = 0; i < serial.witnesses->size(); ++i) {
            EXPECT_EQ((*serial.witnesses)[i].pattern, (*parallel.witnesses)[i].pattern);
        }
    }
}

TEST(CountMaxout, AbsoluteValue) {
    EXPECT_EQ(count_regions_maxout(fixture("maxout_abs.json"), in_box(1, -1, 1)).count, 2);
}

TEST(CountMaxout, ConstantPieceNeverWins) {
    EXPECT_EQ(count_regions_maxout(fixture("maxout_rank3.json"), in_box(1, -1, 1)).count, 2);
    EXPECT_EQ(brute_force_count(fixture("maxout_rank3.json"), in_box(1, -1, 1)).count, 2);
}

TEST(CountMaxout, SingleLayerWithinBound) {
    std::mt19937_64 rng(32);
    NetConfig cfg;
    cfg.input_dim = 2;
    cfg.widths = {3};
    cfg.maxout_rank = 2;
    for (int trial = 0; trial < 10; ++trial) {
        const Network net = random_maxout_network(2, {3}, 2, rng);
        const auto tree = count_regions_maxout(net, in_box(2, -10, 10));
        EXPECT_EQ(tree.count, brute_force_count(net, in_box(2, -10, 10)).count);
        EXPECT_LE(tree.count, maxout_upper_bound(cfg));
    }
}

TEST(CountMaxout, RankThreeOneDimensional) {
    // max{x, 0.5x + 0.5, -x} on [-3, 3]: three pieces; a dominated line adds none.
    Network net = single_maxout_unit({1.0, 0.5, -1.0});
    std::get<MaxoutLayer>(net.layers[0]).bias[1][0] = 0.5;
    EXPECT_EQ(count_regions_maxout(net, in_box(1, -3, 3)).count, 3);
    Network dominated = single_maxout_unit({1.0, 0.0, -1.0});
    std::get<MaxoutLayer>(dominated.layers[0]).bias[1][0] = -1.0;
    EXPECT_EQ(count_regions_maxout(dominated, in_box(1, -3, 3)).count, 2);
}

TEST(BruteForce, Examples) {
    EXPECT_EQ(brute_force_count(fixture("planar_three_layer.json"), in_box(2, -50, 50)).count, 20);
    EXPECT_EQ(brute_force_count(fixture("one_neuron.json"), in_box(2, -1, 1)).count, 2);
    const auto result = brute_force_count(fixture("planar_three_layer.json"), in_box(2, -50, 50));
    EXPECT_EQ(result.nodes_explored, 64u);
}

TEST(BruteForce, Guards) {
    std::mt19937_64 rng(33);
    EXPECT_THROW(brute_force_count(random_relu_network(2, {11, 10}, rng), in_box(2, -1, 1)), GuardError);
    EXPECT_THROW(brute_force_count(random_maxout_network(1, {13}, 3, rng), in_box(1, -1, 1)), GuardError);
}

TEST(GridSample, PlanarThreeLayer) {
    const Network net = fixture("planar_three_layer.json");
    Box box = uniform_box(2, -1, 5);
    const auto grid = grid_sample_count(net, box, 512);
    EXPECT_LE(grid, 20);
    EXPECT_GE(grid, 15);
    EXPECT_EQ(grid, 20); // every region of the caption network is wide enough for this grid
    EXPECT_EQ(grid_sample_count(net, box, 1), 1);
    EXPECT_THROW(grid_sample_count(net, box, 0), std::invalid_argument);
    EXPECT_THROW(grid_sample_count(net, box, 100000), GuardError);
}

TEST(DimensionProfile, Examples) {
    auto options = in_box(2, -50, 50);
    options.collect_witnesses = true;
    const Network planar = fixture("planar_three_layer.json");
    const auto profile = dimension_profile(count_regions_relu(planar, options), planar);
    EXPECT_EQ(profile.rbegin()->first, 2u);
    std::uint64_t total = 0;
    for (const auto& [dim, n] : profile) {
        EXPECT_LE(dim, 2u);
        total += n;
    }
    EXPECT_EQ(total, 20u);

    const Network affine = fixture("zero_layer.json");
    const auto single = dimension_profile(count_regions_relu(affine, options), affine);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single.begin()->first, 2u);
    EXPECT_EQ(single.begin()->second, 1u);

    EXPECT_THROW(dimension_profile(count_regions_relu(planar, in_box(2, -1, 1)), planar), std::invalid_argument);
}

// Properties over random networks.

TEST(CounterProperties, TreeEqualsExhaustive) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(seed + 500);
        const std::size_t n0 = 1 + rng() % 3;
        std::vector<std::size_t> widths(1 + rng() % 3);
        for (auto& w : widths) {
            w = 1 + rng() % 4;
        }
        const Network net = random_relu_network(n0, widths, rng);
        const auto options = in_box(n0, -3, 3);
        EXPECT_EQ(count_regions_relu(net, options).count, brute_force_count(net, options).count) << "seed " << seed;
    }
}

TEST(CounterProperties, OneDimensionalSweepAgrees) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::size_t> widths(1 + rng() % 3);
        for (auto& w : widths) {
            w = 1 + rng() % 5;
        }
        const Network net = random_relu_network(1, widths, rng);
        EXPECT_EQ(count_regions_relu(net, in_box(1, -3, 3)).count, sweep_count_1d(net, -3, 3)) << "trial " << trial;
    }
}

TEST(CounterProperties, NeverExceedsRecurrenceBound) {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n0 = 1 + rng() % 4;
        std::vector<std::size_t> widths(1 + rng() % 3);
        for (auto& w : widths) {
            w = 1 + rng() % 6;
        }
        const Network net = random_relu_network(n0, widths, rng);
        NetConfig cfg;
        cfg.input_dim = n0;
        cfg.widths.assign(widths.begin(), widths.end());
        CounterOptions open;
        EXPECT_LE(count_regions_relu(net, open).count, relu_upper_bound(cfg));
    }
}

TEST(CounterProperties, NestedBoxesMonotone) {
    std::mt19937_64 rng(36);
    for (int trial = 0; trial < 10; ++trial) {
        const Network net = random_relu_network(2, {5, 4}, rng);
        BigCount previous = 0;
        for (double r : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            const auto count = count_regions_relu(net, in_box(2, -r, r)).count;
            EXPECT_GE(count, previous);
            previous = count;
        }
        CounterOptions open;
        EXPECT_GE(count_regions_relu(net, open).count, previous);
    }
}

TEST(CounterProperties, NeuronOrderInvariant) {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        const Network net = random_relu_network(2, {5, 4, 3}, rng);
        const auto base = count_regions_relu(net, in_box(2, -3, 3)).count;
        for (std::size_t l = 0; l < net.depth(); ++l) {
            std::vector<Eigen::Index> perm(net.width(l));
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            EXPECT_EQ(count_regions_relu(permute_layer(net, l, perm), in_box(2, -3, 3)).count, base);
        }
    }
}

TEST(CounterProperties, PositiveRescalingInvariant) {
    std::mt19937_64 rng(38);
    std::uniform_real_distribution<double> scale(0.2, 5.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Network net = random_relu_network(2, {5, 4}, rng);
        Network scaled = net;
        const auto i = static_cast<Eigen::Index>(rng() % 5);
        const double c = scale(rng);
        std::get<ReluLayer>(scaled.layers[0]).weights.row(i) *= c;
        std::get<ReluLayer>(scaled.layers[0]).bias[i] *= c;
        std::get<ReluLayer>(scaled.layers[1]).weights.col(i) /= c;
        EXPECT_EQ(count_regions_relu(net, in_box(2, -3, 3)).count,
                  count_regions_relu(scaled, in_box(2, -3, 3)).count);
    }
}

TEST(CounterProperties, GridNeverExceedsExact) {
    std::mt19937_64 rng(39);
    for (int trial = 0; trial < 10; ++trial) {
        const Network net = random_relu_network(2, {4, 4}, rng);
        const Box box = uniform_box(2, -2, 2);
        CounterOptions options;
        options.domain = box;
        EXPECT_LE(grid_sample_count(net, box, 200), count_regions_relu(net, options).count);
    }
}

TEST(CounterProperties, UnrestrictedMatchesLargeBox) {
    CounterOptions open;
    const Network net = fixture("planar_three_layer.json");
    EXPECT_EQ(count_regions_relu(net, open).count, count_regions_relu(net, in_box(2, -50, 50)).count);
}
