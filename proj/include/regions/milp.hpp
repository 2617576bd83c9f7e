#ifndef REGIONS_MILP_HPP
#define REGIONS_MILP_HPP

// Big-M constants by interval propagation over a box, and export of the
// region-counting mixed-integer model in LP file format.

#include "regions/network.hpp"
#include "regions/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace regions {

/// Output bounds of one neuron over the box. ReLU: 0 <= h <= H and
/// 0 <= h_bar <= H_bar, with h - h_bar the preactivation. Maxout: -H_bar <= h <= H,
/// and piece j's value lies in [piece_lower[j], piece_upper[j]].
struct NeuronBigM {
    double H = 0.0;
    double H_bar = 0.0;
    std::vector<double> piece_lower;
    std::vector<double> piece_upper;
};

using BigMTable = std::vector<std::vector<NeuronBigM>>;

namespace detail {

// Interval of w.v + b for v in [lo, hi].
inline std::pair<double, double> affine_interval(const Eigen::Ref<const Vector>& w, double b, const Vector& lo,
                                                 const Vector& hi) {
    double low = b;
    double high = b;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double a = w[j] * lo[j];
        const double c = w[j] * hi[j];
        low += std::min(a, c);
        high += std::max(a, c);
    }
    return {low, high};
}

} // namespace detail

inline BigMTable compute_bigM(const Network& network, const InputDomain& domain) {
    require_valid(network);
    const auto* box = std::get_if<Box>(&domain);
    if (!box) {
        throw std::invalid_argument("big-M constants need a box domain");
    }
    if (static_cast<std::size_t>(box->lower.size()) != network.input_dim ||
        static_cast<std::size_t>(box->upper.size()) != network.input_dim) {
        throw std::invalid_argument("box dimension does not match the network input");
    }
    BigMTable table;
    Vector lo = box->lower;
    Vector hi = box->upper;
    for (const auto& layer : network.layers) {
        std::vector<NeuronBigM> row;
        const auto width = static_cast<Eigen::Index>(layer_width(layer));
        Vector next_lo(width);
        Vector next_hi(width);
        if (const auto* relu = std::get_if<ReluLayer>(&layer)) {
            for (Eigen::Index i = 0; i < width; ++i) {
                const auto [low, high] = detail::affine_interval(relu->weights.row(i).transpose(), relu->bias[i], lo, hi);
                NeuronBigM m;
                m.H = std::max(0.0, high);
                m.H_bar = std::max(0.0, -low);
                next_lo[i] = 0.0;
                next_hi[i] = m.H;
                row.push_back(std::move(m));
            }
        } else {
            const auto& maxout = std::get<MaxoutLayer>(layer);
            for (Eigen::Index i = 0; i < width; ++i) {
                NeuronBigM m;
                double out_lo = -std::numeric_limits<double>::infinity();
                double out_hi = -std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < maxout.rank(); ++j) {
                    const auto [low, high] =
                        detail::affine_interval(maxout.weights[j].row(i).transpose(), maxout.bias[j][i], lo, hi);
                    m.piece_lower.push_back(low);
                    m.piece_upper.push_back(high);
                    out_lo = std::max(out_lo, low);
                    out_hi = std::max(out_hi, high);
                }
                m.H = std::max(0.0, out_hi);
                m.H_bar = std::max(0.0, -out_lo);
                next_lo[i] = out_lo;
                next_hi[i] = out_hi;
                row.push_back(std::move(m));
            }
        }
        table.push_back(std::move(row));
        lo = std::move(next_lo);
        hi = std::move(next_hi);
    }
    return table;
}

struct MilpTerm {
    std::string variable;
    double coeff = 0.0;
};

struct MilpRow {
    std::string name;
    std::vector<MilpTerm> terms;
    lp::Sense sense = lp::Sense::LessEqual;
    double rhs = 0.0;
};

struct MilpVariable {
    std::string name;
    std::optional<double> lower = 0.0; // nullopt = -infinity
    std::optional<double> upper;       // nullopt = +infinity
    bool binary = false;
};

struct MilpModel {
    std::vector<MilpVariable> variables;
    std::vector<MilpRow> rows;
    std::string objective = "f"; // maximized
    BigMTable big_m;

    std::size_t binary_count() const {
        return static_cast<std::size_t>(
            std::count_if(variables.begin(), variables.end(), [](const MilpVariable& v) { return v.binary; }));
    }
};

/// Slack added to H before it bounds f; keeps f > 0 reachable when a neuron's
/// output bound is tight or zero.
inline double fcut_constant(double H) { return H + std::max(1e-6, 1e-6 * H); }

/// Builds max f over the region-encoding constraints. ReLU neuron (l, i):
///   map:  W h_prev + b = h - hb        act: h <= H z        ina: hb <= H_bar (1 - z)
///   fcut: f <= h + (1 - z) F
/// Maxout neuron (l, i) with pieces g_j:
///   map_j: g_j = W_j h_prev + b_j       act_j: h >= g_j      ina_j: h <= g_j + M_j (1 - z_j)
///   sel:   sum_j z_j = 1                fcut_j: f <= h - g_j + F z_j
/// F is the upper bound of f, so f > 0 forces every active ReLU and every
/// winning margin to be positive.
inline MilpModel export_milp(const Network& network, const InputDomain& domain) {
    MilpModel model;
    model.big_m = compute_bigM(network, domain);
    const auto& box = std::get<Box>(domain);
    auto idx = [](std::size_t v) { return std::to_string(v + 1); };

    for (std::size_t c = 0; c < network.input_dim; ++c) {
        const auto e = static_cast<Eigen::Index>(c);
        model.variables.push_back({"x" + idx(c), box.lower[e], box.upper[e], false});
    }
    // Largest margin any row can certify, and at least 1 so a pattern with no
    // active unit clears any epsilon. Bounds f and relaxes the cut rows.
    double f_cap = 1.0;
    for (std::size_t l = 0; l < network.depth(); ++l) {
        for (const auto& m : model.big_m[l]) {
            f_cap = std::max(f_cap, fcut_constant(m.H));
            for (std::size_t j = 0; j < m.piece_lower.size(); ++j) {
                const double spread = *std::max_element(m.piece_upper.begin(), m.piece_upper.end()) - m.piece_lower[j];
                f_cap = std::max(f_cap, fcut_constant(std::max(0.0, spread)));
            }
        }
    }
    model.variables.push_back({"f", std::nullopt, f_cap, false});

    std::vector<std::string> previous;
    for (std::size_t c = 0; c < network.input_dim; ++c) {
        previous.push_back("x" + idx(c));
    }
    for (std::size_t l = 0; l < network.depth(); ++l) {
        const auto& layer = network.layers[l];
        const std::string L = idx(l);
        std::vector<std::string> current;
        auto map_terms = [&](const Matrix& W, Eigen::Index i) {
            std::vector<MilpTerm> terms;
            for (Eigen::Index j = 0; j < W.cols(); ++j) {
                if (W(i, j) != 0.0) {
                    terms.push_back({previous[static_cast<std::size_t>(j)], W(i, j)});
                }
            }
            return terms;
        };
        for (std::size_t n = 0; n < layer_width(layer); ++n) {
            const auto i = static_cast<Eigen::Index>(n);
            const std::string I = L + "_" + idx(n);
            const auto& bm = model.big_m[l][n];
            const std::string h = "h" + I;
            current.push_back(h);
            if (const auto* relu = std::get_if<ReluLayer>(&layer)) {
                const std::string hb = "hb" + I;
                const std::string z = "z" + I;
                model.variables.push_back({h, 0.0, std::nullopt, false});
                model.variables.push_back({hb, 0.0, std::nullopt, false});
                model.variables.push_back({z, 0.0, 1.0, true});
                auto terms = map_terms(relu->weights, i);
                terms.push_back({h, -1.0});
                terms.push_back({hb, 1.0});
                model.rows.push_back({"map" + I, std::move(terms), lp::Sense::Equal, -relu->bias[i]});
                model.rows.push_back({"act" + I, {{h, 1.0}, {z, -bm.H}}, lp::Sense::LessEqual, 0.0});
                model.rows.push_back({"ina" + I, {{hb, 1.0}, {z, bm.H_bar}}, lp::Sense::LessEqual, bm.H_bar});
                model.rows.push_back({"fcut" + I, {{"f", 1.0}, {h, -1.0}, {z, f_cap}}, lp::Sense::LessEqual, f_cap});
                continue;
            }
            const auto& maxout = std::get<MaxoutLayer>(layer);
            model.variables.push_back({h, std::nullopt, std::nullopt, false});
            const double top = *std::max_element(bm.piece_upper.begin(), bm.piece_upper.end());
            std::vector<MilpTerm> select;
            for (std::size_t j = 0; j < maxout.rank(); ++j) {
                const std::string J = I + "_" + idx(j);
                const std::string g = "g" + J;
                const std::string z = "z" + J;
                model.variables.push_back({g, std::nullopt, std::nullopt, false});
                model.variables.push_back({z, 0.0, 1.0, true});
                auto terms = map_terms(maxout.weights[j], i);
                terms.push_back({g, -1.0});
                model.rows.push_back({"map" + J, std::move(terms), lp::Sense::Equal, -maxout.bias[j][i]});
                model.rows.push_back({"act" + J, {{h, 1.0}, {g, -1.0}}, lp::Sense::GreaterEqual, 0.0});
                const double M = fcut_constant(std::max(0.0, top - bm.piece_lower[j]));
                model.rows.push_back({"ina" + J, {{h, 1.0}, {g, -1.0}, {z, M}}, lp::Sense::LessEqual, M});
                model.rows.push_back(
                    {"fcut" + J, {{"f", 1.0}, {h, -1.0}, {g, 1.0}, {z, -f_cap}}, lp::Sense::LessEqual, 0.0});
                select.push_back({z, 1.0});
            }
            model.rows.push_back({"sel" + I, std::move(select), lp::Sense::Equal, 1.0});
        }
        previous = std::move(current);
    }
    return model;
}

namespace detail {

inline std::string lp_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// LP file format text of the model.
inline std::string to_lp_text(const MilpModel& model) {
    using detail::lp_number;
    std::ostringstream out;
    out << "\\ linear region counting model: enumerate solutions with f > 0\n";
    out << "Maximize\n obj: " << model.objective << "\n";
    out << "Subject To\n";
    for (const auto& row : model.rows) {
        out << " " << row.name << ":";
        bool first = true;
        for (const auto& t : row.terms) {
            const double c = t.coeff;
            out << (c < 0 ? " - " : (first ? " " : " + "));
            if (std::abs(c) != 1.0) {
                out << lp_number(std::abs(c)) << " ";
            }
            out << t.variable;
            first = false;
        }
        if (row.terms.empty()) {
            out << " 0 " << model.objective;
        }
        const char* sense = row.sense == lp::Sense::LessEqual ? " <= " : row.sense == lp::Sense::GreaterEqual ? " >= " : " = ";
        out << sense << lp_number(row.rhs) << "\n";
    }
    out << "Bounds\n";
    for (const auto& v : model.variables) {
        if (v.binary) {
            continue;
        }
        const bool default_lower = v.lower && *v.lower == 0.0;
        if (default_lower && !v.upper) {
            continue;
        }
        if (!v.lower && !v.upper) {
            out << " " << v.name << " free\n";
            continue;
        }
        out << " " << (v.lower ? lp_number(*v.lower) : std::string("-inf")) << " <= " << v.name;
        out << " <= " << (v.upper ? lp_number(*v.upper) : std::string("+inf")) << "\n";
    }
    out << "Binaries\n";
    for (const auto& v : model.variables) {
        if (v.binary) {
            out << " " << v.name << "\n";
        }
    }
    out << "End\n";
    return out.str();
}

} // namespace regions

#endif
