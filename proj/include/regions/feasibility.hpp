#ifndef REGIONS_FEASIBILITY_HPP
#define REGIONS_FEASIBILITY_HPP

// The LP oracle behind region counting. A query holds hard rows a.x <= c and
// margin rows a.x - c >= f; max_margin maximizes f, the smallest slack of the
// margin rows, over the input domain.

#include "regions/network.hpp"
#include "regions/simplex.hpp"

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace regions {

/// a . x compared against c; the comparison depends on where the row is stored.
struct Halfspace {
    Vector normal;
    double bound = 0.0;
};

struct FeasibilityQuery {
    std::size_t dimension = 0;
    std::vector<Halfspace> hard;   // a . x <= c
    std::vector<Halfspace> margin; // a . x - c >= f
    InputDomain domain = Unrestricted{};
};

struct Verdict {
    enum class Kind { Infeasible, Feasible, MarginUnbounded };

    Kind kind = Kind::Infeasible;
    Vector witness;
    /// Optimal f for Feasible, +infinity for MarginUnbounded, NaN for Infeasible.
    double margin = std::numeric_limits<double>::quiet_NaN();

    bool infeasible() const { return kind == Kind::Infeasible; }

    /// Strictly feasible at threshold eps: margin > eps or unbounded.
    bool strictly_feasible(double eps) const {
        return kind == Kind::MarginUnbounded || (kind == Kind::Feasible && margin > eps);
    }

    bool operator==(const Verdict& other) const {
        if (kind != other.kind || witness.size() != other.witness.size()) {
            return false;
        }
        const bool same_margin = (margin == other.margin) || (margin != margin && other.margin != other.margin);
        return same_margin && witness == other.witness;
    }
};

inline constexpr double kDefaultFeasibilityTolerance = 1e-7;

namespace detail {

inline void check_query(const FeasibilityQuery& query) {
    auto check_rows = [&](const std::vector<Halfspace>& rows, const char* what) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<std::size_t>(rows[i].normal.size()) != query.dimension) {
                throw std::invalid_argument(std::string(what) + " row " + std::to_string(i) +
                                            " has the wrong dimension");
            }
            if (!rows[i].normal.allFinite() || !std::isfinite(rows[i].bound)) {
                throw std::invalid_argument(std::string(what) + " row " + std::to_string(i) +
                                            " has a non-finite coefficient");
            }
        }
    };
    check_rows(query.hard, "hard");
    check_rows(query.margin, "margin");
    if (const auto* box = std::get_if<Box>(&query.domain)) {
        if (static_cast<std::size_t>(box->lower.size()) != query.dimension ||
            static_cast<std::size_t>(box->upper.size()) != query.dimension) {
            throw std::invalid_argument("box dimension does not match the query");
        }
        if (!box->lower.allFinite() || !box->upper.allFinite()) {
            throw std::invalid_argument("box bounds must be finite");
        }
    }
}

// Variables: x_0..x_{n-1}, then f when with_margin_variable.
template <class Scalar>
lp::Problem<Scalar> build_problem(const FeasibilityQuery& query, bool with_margin_variable) {
    const std::size_t n = query.dimension;
    const std::size_t vars = n + (with_margin_variable ? 1 : 0);
    lp::Problem<Scalar> problem;
    problem.num_vars = vars;
    problem.objective.assign(vars, Scalar(0));
    if (with_margin_variable) {
        problem.objective[n] = Scalar(1);
    }
    problem.bounds.assign(vars, lp::Bound<Scalar>::free());
    if (const auto* box = std::get_if<Box>(&query.domain)) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto i = static_cast<Eigen::Index>(j);
            problem.bounds[j] = lp::Bound<Scalar>::between(Scalar(box->lower[i]), Scalar(box->upper[i]));
        }
    }
    for (const auto& h : query.hard) {
        lp::Row<Scalar> row;
        row.coeffs.assign(vars, Scalar(0));
        for (std::size_t j = 0; j < n; ++j) {
            row.coeffs[j] = Scalar(h.normal[static_cast<Eigen::Index>(j)]);
        }
        row.sense = lp::Sense::LessEqual;
        row.rhs = Scalar(h.bound);
        problem.rows.push_back(std::move(row));
    }
    for (const auto& h : query.margin) {
        lp::Row<Scalar> row;
        row.coeffs.assign(vars, Scalar(0));
        for (std::size_t j = 0; j < n; ++j) {
            row.coeffs[j] = Scalar(h.normal[static_cast<Eigen::Index>(j)]);
        }
        if (with_margin_variable) {
            // a.x - f >= c
            row.coeffs[n] = Scalar(-1);
        }
        row.sense = lp::Sense::GreaterEqual;
        row.rhs = Scalar(h.bound);
        problem.rows.push_back(std::move(row));
    }
    return problem;
}

template <class Scalar>
Vector to_vector(const std::vector<Scalar>& x, std::size_t n) {
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        v[static_cast<Eigen::Index>(j)] = static_cast<double>(x[j]);
    }
    return v;
}

} // namespace detail

/// Solves max f subject to the margin rows, the hard rows and the domain.
/// Infeasible means no point reaches f >= -tol (the closed region is empty);
/// MarginUnbounded means f can grow without limit, which only happens when the
/// region is unbounded along the margin rows or there are no margin rows.
inline Verdict max_margin(const FeasibilityQuery& query, double tol = kDefaultFeasibilityTolerance) {
    detail::check_query(query);
    const auto problem = detail::build_problem<double>(query, true);
    const auto solution = lp::solve(problem);
    Verdict verdict;
    switch (solution.status) {
    case lp::Status::Infeasible: return verdict;
    case lp::Status::Unbounded:
        verdict.kind = Verdict::Kind::MarginUnbounded;
        verdict.witness = detail::to_vector(solution.x, query.dimension);
        verdict.margin = std::numeric_limits<double>::infinity();
        return verdict;
    case lp::Status::Optimal: break;
    }
    const double f = solution.x[query.dimension];
    if (f < -tol) {
        return verdict;
    }
    verdict.kind = Verdict::Kind::Feasible;
    verdict.witness = detail::to_vector(solution.x, query.dimension);
    verdict.margin = f;
    return verdict;
}

/// True iff the hard rows and the margin rows taken with f = 0 share a point
/// of the domain. Margin rows are relaxed by tol, the same slack max_margin
/// grants before reporting Infeasible.
inline bool feasible_nonstrict(const FeasibilityQuery& query, double tol = kDefaultFeasibilityTolerance) {
    detail::check_query(query);
    auto problem = detail::build_problem<double>(query, false);
    for (std::size_t i = query.hard.size(); i < problem.rows.size(); ++i) {
        problem.rows[i].rhs -= tol;
    }
    return lp::solve(problem).status != lp::Status::Infeasible;
}

/// Exact-arithmetic solve of the same LP: every double coefficient converts to
/// a rational without rounding. Returns the verdict kind and, when feasible,
/// the exact optimal margin.
struct ExactVerdict {
    Verdict::Kind kind = Verdict::Kind::Infeasible;
    lp::Rational margin = 0;

    bool strictly_feasible(double eps) const {
        return kind == Verdict::Kind::MarginUnbounded ||
               (kind == Verdict::Kind::Feasible && margin > lp::Rational(eps));
    }
};

inline ExactVerdict max_margin_exact(const FeasibilityQuery& query) {
    detail::check_query(query);
    const auto problem = detail::build_problem<lp::Rational>(query, true);
    const auto solution = lp::solve(problem);
    ExactVerdict verdict;
    switch (solution.status) {
    case lp::Status::Infeasible: return verdict;
    case lp::Status::Unbounded: verdict.kind = Verdict::Kind::MarginUnbounded; return verdict;
    case lp::Status::Optimal: break;
    }
    const auto& f = solution.x[query.dimension];
    if (f < 0) {
        return verdict;
    }
    verdict.kind = Verdict::Kind::Feasible;
    verdict.margin = f;
    return verdict;
}

} // namespace regions

#endif
