// regions: bounds, counting, constructions, MILP export, SVG rendering and
// self-checks for ReLU and maxout networks.
//
// Exit codes: 0 success, 1 user error, 2 internal error or failed verification,
// 3 region cap or size guard hit.

#include "regions/bounds.hpp"
#include "regions/constructions.hpp"
#include "regions/counter.hpp"
#include "regions/milp.hpp"
#include "regions/network_io.hpp"
#include "regions/render.hpp"
#include "regions/report.hpp"
#include "regions/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace regions;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;
constexpr int kExitGuard = 3;

class UserError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DomainFlags {
    std::string box;
    std::string bounds_file;
    bool unrestricted = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--box", box, "uniform box lo,hi applied to every input");
        cmd->add_option("--bounds-file", bounds_file, "JSON file {\"lower\": [...], \"upper\": [...]}");
        cmd->add_flag("--unrestricted", unrestricted, "count over all of R^n0");
    }

    InputDomain resolve(std::size_t dim) const {
        const int chosen = (!box.empty()) + (!bounds_file.empty()) + (unrestricted ? 1 : 0);
        if (chosen != 1) {
            throw UserError("give exactly one of --box, --bounds-file, --unrestricted");
        }
        if (unrestricted) {
            return Unrestricted{};
        }
        Box b;
        if (!box.empty()) {
            std::istringstream in(box);
            double lo = 0;
            double hi = 0;
            char comma = 0;
            if (!(in >> lo >> comma >> hi) || comma != ',' || !(in >> std::ws).eof()) {
                throw UserError("--box expects lo,hi");
            }
            b = uniform_box(dim, lo, hi);
        } else {
            std::ifstream in(bounds_file);
            if (!in) {
                throw UserError("cannot open bounds file: " + bounds_file);
            }
            json doc;
            try {
                doc = json::parse(in);
                auto lower = doc.at("lower").get<std::vector<double>>();
                auto upper = doc.at("upper").get<std::vector<double>>();
                b.lower = Eigen::Map<Vector>(lower.data(), static_cast<Eigen::Index>(lower.size()));
                b.upper = Eigen::Map<Vector>(upper.data(), static_cast<Eigen::Index>(upper.size()));
            } catch (const json::exception& e) {
                throw UserError(std::string("bad bounds file: ") + e.what());
            }
            if (static_cast<std::size_t>(b.lower.size()) != dim || static_cast<std::size_t>(b.upper.size()) != dim) {
                throw UserError("bounds file dimension does not match the network input");
            }
        }
        if ((b.lower.array() > b.upper.array()).any()) {
            throw UserError("box lower bound exceeds upper bound");
        }
        return b;
    }
};

std::string join(const std::vector<std::size_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i ? "," : "") + std::to_string(values[i]);
    }
    return out;
}

// ---- bounds ---------------------------------------------------------------

struct BoundsArgs {
    std::uint64_t n0 = 0;
    std::vector<std::uint64_t> widths;
    std::optional<std::uint64_t> output;
    bool include_output = false;
    std::optional<std::uint64_t> maxout_rank;
    std::vector<std::uint64_t> rank_caps;
    bool json_out = false;
};

int run_bounds(const BoundsArgs& args) {
    NetConfig cfg;
    cfg.input_dim = args.n0;
    cfg.widths = args.widths;
    if (args.include_output) {
        if (!args.output) {
            throw UserError("--include-output-layer needs --output");
        }
        cfg.widths.push_back(*args.output);
    }
    if (!args.rank_caps.empty()) {
        cfg.rank_caps = args.rank_caps;
    }
    cfg.validate();

    std::vector<std::pair<std::string, std::string>> rows;
    auto add = [&](const std::string& name, auto&& compute) {
        try {
            rows.emplace_back(name, to_string(compute()));
        } catch (const std::invalid_argument&) {
            // not applicable to this configuration
        }
    };
    add("recurrence_upper", [&] { return relu_upper_bound(cfg); });
    add("product_upper", [&] { return relu_upper_bound_product(cfg); });
    add("naive_upper", [&] { return naive_upper_bound(cfg); });
    add("replicated_lower", [&] { return replicated_lower_bound(cfg); });
    add("floor_replicated_lower", [&] { return floor_replicated_lower_bound(cfg); });
    const auto& w = cfg.widths;
    bool wide_first = !w.empty() && w[0] % 2 == 0;
    for (std::size_t l = 1; l < w.size(); ++l) {
        wide_first = wide_first && w[l] == w[1] && w[l] >= 2;
    }
    if (wide_first) {
        add("wide_first_layer_lower", [&] {
            return wide_first_layer_lower_bound(cfg.input_dim, w[0] / 2, w.size() > 1 ? w[1] : 2, w.size());
        });
    }
    if (args.maxout_rank) {
        NetConfig maxout = cfg;
        maxout.maxout_rank = args.maxout_rank;
        add("maxout_upper", [&] { return maxout_upper_bound(maxout); });
    }

    if (args.json_out) {
        json doc;
        doc["input_dim"] = cfg.input_dim;
        doc["widths"] = cfg.widths;
        doc["bounds"] = json::object();
        for (const auto& [name, value] : rows) {
            doc["bounds"][name] = value;
        }
        std::cout << doc.dump(2) << '\n';
        return kExitOk;
    }
    std::cout << "n0 = " << cfg.input_dim << ", widths = " << join(cfg.widths) << '\n';
    for (const auto& [name, value] : rows) {
        std::cout << "  " << name << std::string(name.size() < 24 ? 24 - name.size() : 1, ' ') << value << '\n';
    }
    return kExitOk;
}

// ---- count ------------------------------------------------------------------

struct CountArgs {
    std::string network;
    DomainFlags domain;
    double epsilon = 1e-6;
    std::size_t workers = 1;
    std::uint64_t cap = 100'000'000;
    bool witnesses = false;
    bool profile = false;
    bool brute_force = false;
    std::size_t certify = 0;
    bool json_out = false;
};

int run_count(const CountArgs& args) {
    const Network net = read_network(args.network);
    CounterOptions options;
    options.domain = args.domain.resolve(net.input_dim);
    options.epsilon = args.epsilon;
    options.workers = args.workers;
    if (args.cap > 0) {
        options.region_cap = args.cap;
    } else {
        options.region_cap.reset();
    }
    options.collect_witnesses = args.witnesses || args.profile;
    options.certify_every = args.certify;
    const CountResult result = args.brute_force ? brute_force_count(net, options) : count_regions(net, options);

    std::map<std::size_t, std::uint64_t> profile;
    if (args.profile) {
        profile = dimension_profile(result, net);
    }
    if (args.json_out) {
        json doc = count_result_to_json(result);
        if (!args.witnesses) {
            doc.erase("witnesses");
        }
        if (args.profile) {
            json hist = json::object();
            for (const auto& [dim, n] : profile) {
                hist[std::to_string(dim)] = n;
            }
            doc["dimension_profile"] = hist;
        }
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "regions: " << to_string(result.count) << (result.partial ? " (partial: cap reached)" : "")
                  << '\n';
        std::cout << "nodes: " << result.nodes_explored << ", pruned: " << result.nodes_pruned
                  << ", seconds: " << result.seconds << '\n';
        if (result.certified > 0) {
            std::cout << "certified leaves: " << result.certified
                      << ", mismatches: " << result.certification_mismatches << '\n';
        }
        if (args.profile) {
            std::cout << "image dimension histogram:";
            for (const auto& [dim, n] : profile) {
                std::cout << ' ' << dim << ':' << n;
            }
            std::cout << '\n';
        }
        if (args.witnesses && result.witnesses) {
            for (const auto& w : *result.witnesses) {
                std::cout << pattern_to_json(w.pattern).dump() << " at (";
                for (Eigen::Index i = 0; i < w.point.size(); ++i) {
                    std::cout << (i ? ", " : "") << w.point[i];
                }
                std::cout << ")\n";
            }
        }
    }
    return result.partial ? kExitGuard : kExitOk;
}

// ---- construct ----------------------------------------------------------

struct ConstructArgs {
    std::string kind;
    std::size_t n = 0;
    std::size_t n0 = 1;
    std::vector<std::size_t> widths;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool json_out = false;
};

int run_construct(const ConstructArgs& args) {
    Network net;
    std::string prediction;
    bool exact = true;
    if (args.kind == "zigzag") {
        if (args.n == 0) {
            throw UserError("zigzag needs --n");
        }
        net = zigzag_layer(args.n).to_network();
        prediction = std::to_string(args.n + 1);
    } else if (args.kind == "deep1d") {
        if (args.widths.empty()) {
            throw UserError("deep1d needs --widths");
        }
        net = deep_1d(args.widths);
        BigCount product = 1;
        for (auto w : args.widths) {
            product *= w + 1;
        }
        prediction = to_string(product);
    } else if (args.kind == "multidim") {
        if (args.widths.empty()) {
            throw UserError("multidim needs --widths");
        }
        if (!args.seed) {
            throw UserError("multidim draws random hyperplanes and needs --seed");
        }
        net = multi_dim(args.n0, args.widths, *args.seed);
        NetConfig cfg;
        cfg.input_dim = args.n0;
        cfg.widths.assign(args.widths.begin(), args.widths.end());
        prediction = to_string(replicated_lower_bound(cfg));
        exact = args.widths.size() == 1;
    } else {
        throw UserError("unknown construction \"" + args.kind + "\" (zigzag, deep1d, multidim)");
    }
    write_network(net, args.out);
    if (args.json_out) {
        std::cout << json{{"kind", args.kind}, {"path", args.out}, {"predicted", prediction}, {"exact", exact}}.dump(2)
                  << '\n';
    } else {
        std::cout << "wrote " << args.out << "; predicted regions on the unit "
                  << (net.input_dim == 1 ? "interval" : "cube") << ": " << (exact ? "" : ">= ") << prediction << '\n';
    }
    return kExitOk;
}

// ---- export-milp ----------------------------------------------------------

struct MilpArgs {
    std::string network;
    DomainFlags domain;
    std::string out;
    bool big_m_report = false;
    bool json_out = false;
};

int run_export_milp(const MilpArgs& args) {
    const Network net = read_network(args.network);
    const InputDomain domain = args.domain.resolve(net.input_dim);
    if (std::holds_alternative<Unrestricted>(domain)) {
        throw UserError("MILP export needs a bounded box for its big-M constants");
    }
    const MilpModel model = export_milp(net, domain);
    std::ofstream file(args.out);
    if (!file) {
        throw UserError("cannot write " + args.out);
    }
    file << to_lp_text(model);
    json doc{{"path", args.out},
             {"variables", model.variables.size()},
             {"rows", model.rows.size()},
             {"binaries", model.binary_count()}};
    if (args.big_m_report) {
        json layers = json::array();
        for (const auto& layer : model.big_m) {
            json units = json::array();
            for (const auto& m : layer) {
                units.push_back({{"H", m.H}, {"H_bar", m.H_bar}});
            }
            layers.push_back(units);
        }
        doc["big_m"] = layers;
    }
    if (args.json_out) {
        std::cout << doc.dump(2) << '\n';
        return kExitOk;
    }
    std::cout << "wrote " << args.out << ": " << model.variables.size() << " variables, " << model.rows.size()
              << " rows, " << model.binary_count() << " binaries\n";
    if (args.big_m_report) {
        for (std::size_t l = 0; l < model.big_m.size(); ++l) {
            for (std::size_t i = 0; i < model.big_m[l].size(); ++i) {
                std::cout << "  layer " << l + 1 << " unit " << i + 1 << ": H = " << model.big_m[l][i].H
                          << ", H_bar = " << model.big_m[l][i].H_bar << '\n';
            }
        }
    }
    return kExitOk;
}

// ---- render -------------------------------------------------------------

struct RenderArgs {
    std::string network;
    DomainFlags domain;
    std::string out;
    double epsilon = 1e-6;
    bool json_out = false;
};

int run_render(const RenderArgs& args) {
    const Network net = read_network(args.network);
    if (net.input_dim != 2) {
        throw UserError("render needs a network with exactly 2 inputs");
    }
    const InputDomain domain = args.domain.resolve(net.input_dim);
    const auto* box = std::get_if<Box>(&domain);
    if (!box) {
        throw UserError("render needs a bounded box");
    }
    const std::string svg = render_svg(net, *box, args.epsilon);
    std::ofstream file(args.out, std::ios::binary);
    if (!file) {
        throw UserError("cannot write " + args.out);
    }
    file << svg;
    std::size_t polygons = 0;
    for (std::size_t pos = svg.find("<polygon"); pos != std::string::npos; pos = svg.find("<polygon", pos + 1)) {
        ++polygons;
    }
    if (args.json_out) {
        std::cout << json{{"path", args.out}, {"polygons", polygons}}.dump(2) << '\n';
    } else {
        std::cout << "wrote " << args.out << " with " << polygons << " region polygons\n";
    }
    return kExitOk;
}

// ---- verify ---------------------------------------------------------------

struct VerifyArgs {
    std::vector<std::string> suites;
    std::size_t seeds = 50;
    std::uint64_t seed = 0;
    bool json_out = false;
};

int run_verify(const VerifyArgs& args) {
    std::vector<std::string> suites = args.suites;
    if (suites.empty() || std::find(suites.begin(), suites.end(), "all") != suites.end()) {
        suites = {"bounds", "oracle", "maxout", "constructions"};
    }
    std::vector<SuiteReport> reports;
    for (const auto& name : suites) {
        if (name == "bounds") {
            reports.push_back(verify_bounds(args.seed));
        } else if (name == "oracle") {
            reports.push_back(verify_oracle(args.seeds, args.seed));
        } else if (name == "maxout") {
            reports.push_back(verify_maxout(20, args.seed));
        } else if (name == "constructions") {
            reports.push_back(verify_constructions(7));
        } else {
            throw UserError("unknown suite \"" + name + "\" (bounds, oracle, maxout, constructions, all)");
        }
    }
    bool all_passed = true;
    json doc = json::array();
    for (const auto& r : reports) {
        all_passed = all_passed && r.passed();
        if (args.json_out) {
            doc.push_back(suite_to_json(r));
            continue;
        }
        std::size_t failed = 0;
        for (const auto& c : r.checks) {
            if (!c.passed) {
                ++failed;
                std::cout << "  FAIL " << r.suite << ": " << c.name << " (" << c.detail << ")\n";
            }
        }
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.suite << ": " << r.checks.size() - failed << "/"
                  << r.checks.size() << " checks, " << r.seconds << " s\n";
    }
    if (args.json_out) {
        std::cout << json{{"passed", all_passed}, {"suites", doc}}.dump(2) << '\n';
    }
    return all_passed ? kExitOk : kExitInternal;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear region bounds, constructions and exact counting for ReLU and maxout networks"};
    app.require_subcommand(1);

    BoundsArgs bounds;
    auto* bounds_cmd = app.add_subcommand("bounds", "evaluate region bounds for a layer configuration");
    bounds_cmd->add_option("--n0", bounds.n0, "input dimension")->required();
    bounds_cmd->add_option("--widths", bounds.widths, "hidden widths, comma separated")->required()->delimiter(',');
    bounds_cmd->add_option("--output", bounds.output, "width of the output layer");
    bounds_cmd->add_flag("--include-output-layer", bounds.include_output, "treat the output layer as a bounded layer");
    bounds_cmd->add_option("--maxout-rank", bounds.maxout_rank, "also bound rank-k maxout layers");
    bounds_cmd->add_option("--rank-caps", bounds.rank_caps, "per-layer weight rank caps")->delimiter(',');
    bounds_cmd->add_flag("--json", bounds.json_out);

    CountArgs count;
    auto* count_cmd = app.add_subcommand("count", "count the linear regions of a network file");
    count_cmd->add_option("network", count.network, "network JSON file")->required();
    count.domain.attach(count_cmd);
    count_cmd->add_option("--epsilon", count.epsilon, "margin an active unit must clear");
    count_cmd->add_option("--workers", count.workers, "worker threads");
    count_cmd->add_option("--cap", count.cap, "stop after this many regions (0 = no cap)");
    count_cmd->add_flag("--witnesses", count.witnesses, "list one interior point per region");
    count_cmd->add_flag("--profile", count.profile, "histogram of region image dimensions");
    count_cmd->add_flag("--brute-force", count.brute_force, "enumerate every pattern instead of searching");
    count_cmd->add_option("--certify", count.certify, "re-check every n-th region in exact arithmetic");
    count_cmd->add_flag("--json", count.json_out);

    ConstructArgs construct;
    auto* construct_cmd = app.add_subcommand("construct", "write a network with a known region count");
    construct_cmd->add_option("kind", construct.kind, "zigzag, deep1d or multidim")->required();
    construct_cmd->add_option("--n", construct.n, "zigzag units");
    construct_cmd->add_option("--n0", construct.n0, "input dimension (multidim)");
    construct_cmd->add_option("--widths", construct.widths, "layer widths")->delimiter(',');
    construct_cmd->add_option("--seed", construct.seed, "seed for the random last layer (multidim)");
    construct_cmd->add_option("-o,--out", construct.out, "output network file")->required();
    construct_cmd->add_flag("--json", construct.json_out);

    MilpArgs milp;
    auto* milp_cmd = app.add_subcommand("export-milp", "write the region-counting MILP in LP format");
    milp_cmd->add_option("network", milp.network, "network JSON file")->required();
    milp.domain.attach(milp_cmd);
    milp_cmd->add_option("-o,--out", milp.out, "output .lp file")->required();
    milp_cmd->add_flag("--big-m-report", milp.big_m_report, "print every H and H_bar");
    milp_cmd->add_flag("--json", milp.json_out);

    RenderArgs render;
    auto* render_cmd = app.add_subcommand("render", "draw the regions of a 2-input network as SVG");
    render_cmd->add_option("network", render.network, "network JSON file")->required();
    render.domain.attach(render_cmd);
    render_cmd->add_option("-o,--out", render.out, "output .svg file")->required();
    render_cmd->add_option("--epsilon", render.epsilon, "margin an active unit must clear");
    render_cmd->add_flag("--json", render.json_out);

    VerifyArgs verify;
    auto* verify_cmd = app.add_subcommand("verify", "run the self-check suites");
    verify_cmd->add_option("--suite", verify.suites, "bounds, oracle, maxout, constructions or all");
    verify_cmd->add_option("--seeds", verify.seeds, "random networks in the oracle suite");
    verify_cmd->add_option("--seed", verify.seed, "base seed");
    verify_cmd->add_flag("--json", verify.json_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUser;
    }

    try {
        if (*bounds_cmd) {
            return run_bounds(bounds);
        }
        if (*count_cmd) {
            return run_count(count);
        }
        if (*construct_cmd) {
            return run_construct(construct);
        }
        if (*milp_cmd) {
            return run_export_milp(milp);
        }
        if (*render_cmd) {
            return run_render(render);
        }
        if (*verify_cmd) {
            return run_verify(verify);
        }
    } catch (const GuardError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitGuard;
    } catch (const UserError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
