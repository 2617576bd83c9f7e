#ifndef REGIONS_SIMPLEX_HPP
#define REGIONS_SIMPLEX_HPP

// Dense bounded-variable primal simplex (two phases, Bland's rule).
//
// Problems here have a few dozen rows and at most n0 + 1 structural columns,
// so the whole tableau is kept explicitly. The solver is a template over the
// scalar type: `double` for the search, an exact rational type for
// certification. Variable bounds are handled implicitly (nonbasic variables
// sit at a bound, or at zero when free), so box constraints cost no rows.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace regions::lp {

using Rational = boost::multiprecision::cpp_rational;

/// Tolerances of the floating-point solver; the rational solver uses none.
struct Tolerances {
    static constexpr double pivot = 1e-9;
    static constexpr double cost = 1e-10;
    static constexpr double primal = 1e-9;
};

enum class Sense { LessEqual, GreaterEqual, Equal };

template <class Scalar>
struct Bound {
    std::optional<Scalar> lower;
    std::optional<Scalar> upper;

    static Bound free() { return {}; }
    static Bound nonnegative() { return {Scalar(0), std::nullopt}; }
    static Bound between(Scalar lo, Scalar hi) { return {std::move(lo), std::move(hi)}; }
};

template <class Scalar>
struct Row {
    std::vector<Scalar> coeffs; // dense, one entry per variable
    Sense sense = Sense::LessEqual;
    Scalar rhs = 0;
};

/// maximize objective . x  subject to rows and per-variable bounds.
template <class Scalar>
struct Problem {
    std::size_t num_vars = 0;
    std::vector<Scalar> objective;
    std::vector<Row<Scalar>> rows;
    std::vector<Bound<Scalar>> bounds; // empty means all free
};

enum class Status { Optimal, Infeasible, Unbounded };

template <class Scalar>
struct Solution {
    Status status = Status::Infeasible;
    /// Optimal point, or the last feasible point when unbounded.
    std::vector<Scalar> x;
    Scalar objective = 0;
    std::size_t iterations = 0;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline Rational magnitude(const Rational& v) { return v < 0 ? Rational(-v) : v; }

template <class Scalar>
class Tableau {
public:
    Tableau(const Problem<Scalar>& problem, Scalar pivot_tol, Scalar cost_tol, Scalar primal_tol,
            std::size_t max_iterations)
        : n_(problem.num_vars), m_(problem.rows.size()), pivot_tol_(pivot_tol), cost_tol_(cost_tol),
          primal_tol_(primal_tol), max_iterations_(max_iterations) {
        if (problem.objective.size() != n_) {
            throw std::invalid_argument("objective length does not match variable count");
        }
        if (!problem.bounds.empty() && problem.bounds.size() != n_) {
            throw std::invalid_argument("bounds length does not match variable count");
        }
        cols_ = n_ + m_;
        lower_.resize(cols_);
        upper_.resize(cols_);
        value_.assign(cols_, Scalar(0));
        for (std::size_t j = 0; j < n_; ++j) {
            if (!problem.bounds.empty()) {
                lower_[j] = problem.bounds[j].lower;
                upper_[j] = problem.bounds[j].upper;
                if (lower_[j] && upper_[j] && *lower_[j] > *upper_[j]) {
                    inconsistent_bounds_ = true;
                }
            }
            if (lower_[j]) {
                value_[j] = *lower_[j];
            } else if (upper_[j]) {
                value_[j] = *upper_[j];
            }
        }
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& row = problem.rows[i];
            if (row.coeffs.size() != n_) {
                throw std::invalid_argument("row length does not match variable count");
            }
            const std::size_t s = n_ + i;
            switch (row.sense) {
            case Sense::LessEqual: lower_[s] = Scalar(0); break;
            case Sense::GreaterEqual: upper_[s] = Scalar(0); break;
            case Sense::Equal:
                lower_[s] = Scalar(0);
                upper_[s] = Scalar(0);
                break;
            }
        }

        // a_i . x + s_i = b_i with the slacks as the starting basis.
        std::vector<std::size_t> needs_artificial;
        std::vector<Scalar> beta(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            beta[i] = problem.rows[i].rhs;
            for (std::size_t j = 0; j < n_; ++j) {
                beta[i] -= problem.rows[i].coeffs[j] * value_[j];
            }
            const std::size_t s = n_ + i;
            if ((lower_[s] && beta[i] < *lower_[s] - primal_tol_) ||
                (upper_[s] && beta[i] > *upper_[s] + primal_tol_)) {
                needs_artificial.push_back(i);
            }
        }
        const std::size_t first_artificial = cols_;
        cols_ += needs_artificial.size();
        lower_.resize(cols_, Scalar(0));
        upper_.resize(cols_);
        value_.resize(cols_, Scalar(0));
        table_.assign(m_ * cols_, Scalar(0));
        rhs_.resize(m_);
        basis_.resize(m_);
        row_of_.assign(cols_, npos);
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                at(i, j) = problem.rows[i].coeffs[j];
            }
            at(i, n_ + i) = Scalar(1);
            rhs_[i] = problem.rows[i].rhs;
            basis_[i] = n_ + i;
            row_of_[n_ + i] = i;
        }
        for (std::size_t a = 0; a < needs_artificial.size(); ++a) {
            const std::size_t i = needs_artificial[a];
            const std::size_t s = n_ + i;
            const std::size_t art = first_artificial + a;
            // Slack leaves the basis at its violated bound (always zero here).
            value_[s] = Scalar(0);
            row_of_[s] = npos;
            const bool negate = beta[i] < Scalar(0);
            if (negate) {
                for (std::size_t j = 0; j < cols_; ++j) {
                    at(i, j) = -at(i, j);
                }
                rhs_[i] = -rhs_[i];
            }
            at(i, art) = Scalar(1);
            basis_[i] = art;
            row_of_[art] = i;
            artificials_.push_back(art);
        }
    }

    Solution<Scalar> solve(const std::vector<Scalar>& objective) {
        Solution<Scalar> result;
        if (inconsistent_bounds_) {
            result.status = Status::Infeasible;
            return result;
        }
        if (!artificials_.empty()) {
            std::vector<Scalar> phase_one(cols_, Scalar(0));
            for (auto a : artificials_) {
                phase_one[a] = Scalar(-1);
            }
            const Status status = iterate(phase_one, result.iterations);
            if (status != Status::Optimal) {
                throw std::runtime_error("simplex phase one did not terminate at an optimum");
            }
            refresh_basic_values();
            Scalar infeasibility = 0;
            for (auto a : artificials_) {
                infeasibility += value_[a];
            }
            if (infeasibility > primal_tol_ * Scalar(static_cast<long>(artificials_.size() + 1))) {
                result.status = Status::Infeasible;
                return result;
            }
            for (auto a : artificials_) {
                upper_[a] = Scalar(0);
                if (row_of_[a] != npos) {
                    drive_out(a);
                }
            }
        }
        std::vector<Scalar> cost(cols_, Scalar(0));
        for (std::size_t j = 0; j < n_; ++j) {
            cost[j] = objective[j];
        }
        result.status = iterate(cost, result.iterations);
        refresh_basic_values();
        result.x.assign(value_.begin(), value_.begin() + static_cast<std::ptrdiff_t>(n_));
        for (std::size_t j = 0; j < n_; ++j) {
            result.objective += objective[j] * result.x[j];
        }
        return result;
    }

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    Scalar& at(std::size_t i, std::size_t j) { return table_[i * cols_ + j]; }
    const Scalar& at(std::size_t i, std::size_t j) const { return table_[i * cols_ + j]; }

    void refresh_basic_values() {
        for (std::size_t i = 0; i < m_; ++i) {
            Scalar v = rhs_[i];
            for (std::size_t j = 0; j < cols_; ++j) {
                if (row_of_[j] == npos && value_[j] != Scalar(0)) {
                    v -= at(i, j) * value_[j];
                }
            }
            value_[basis_[i]] = v;
        }
    }

    void pivot(std::size_t r, std::size_t entering) {
        const Scalar p = at(r, entering);
        for (std::size_t j = 0; j < cols_; ++j) {
            at(r, j) /= p;
        }
        rhs_[r] /= p;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) {
                continue;
            }
            const Scalar factor = at(i, entering);
            if (factor == Scalar(0)) {
                continue;
            }
            for (std::size_t j = 0; j < cols_; ++j) {
                if (at(r, j) != Scalar(0)) {
                    at(i, j) -= factor * at(r, j);
                }
            }
            rhs_[i] -= factor * rhs_[r];
        }
        const std::size_t leaving = basis_[r];
        row_of_[leaving] = npos;
        basis_[r] = entering;
        row_of_[entering] = r;
    }

    bool is_artificial(std::size_t j) const { return j >= n_ + m_; }

    // Replaces a zero-valued basic artificial by any usable non-artificial column.
    void drive_out(std::size_t artificial) {
        const std::size_t r = row_of_[artificial];
        std::size_t best = npos;
        Scalar best_mag = pivot_tol_;
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (row_of_[j] != npos) {
                continue;
            }
            const Scalar mag = magnitude(at(r, j));
            if (mag > best_mag) {
                best_mag = mag;
                best = j;
            }
        }
        if (best == npos) {
            return; // redundant row; the artificial stays basic, fixed at zero
        }
        value_[artificial] = Scalar(0);
        pivot(r, best);
        refresh_basic_values();
    }

    Status iterate(const std::vector<Scalar>& cost, std::size_t& iterations) {
        for (;;) {
            if (++iterations > max_iterations_) {
                throw std::runtime_error("simplex iteration limit exceeded");
            }
            refresh_basic_values();

            // Bland: lowest-index improving nonbasic column.
            std::size_t entering = npos;
            int direction = 0;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (row_of_[j] != npos) {
                    continue;
                }
                if (lower_[j] && upper_[j] && *lower_[j] == *upper_[j]) {
                    continue;
                }
                Scalar d = cost[j];
                for (std::size_t i = 0; i < m_; ++i) {
                    const Scalar& c = cost[basis_[i]];
                    if (c != Scalar(0)) {
                        d -= c * at(i, j);
                    }
                }
                const bool can_increase = !upper_[j] || value_[j] < *upper_[j];
                const bool can_decrease = !lower_[j] || value_[j] > *lower_[j];
                if (d > cost_tol_ && can_increase) {
                    entering = j;
                    direction = 1;
                    break;
                }
                if (d < -cost_tol_ && can_decrease) {
                    entering = j;
                    direction = -1;
                    break;
                }
            }
            if (entering == npos) {
                return Status::Optimal;
            }

            std::optional<Scalar> step;
            std::size_t leave_row = npos;
            bool leave_at_lower = false;
            for (std::size_t i = 0; i < m_; ++i) {
                const Scalar alpha = direction > 0 ? at(i, entering) : Scalar(-at(i, entering));
                const std::size_t b = basis_[i];
                std::optional<Scalar> ratio;
                bool hits_lower = false;
                if (alpha > pivot_tol_ && lower_[b]) {
                    ratio = (value_[b] - *lower_[b]) / alpha;
                    hits_lower = true;
                } else if (alpha < -pivot_tol_ && upper_[b]) {
                    ratio = (*upper_[b] - value_[b]) / Scalar(-alpha);
                }
                if (!ratio) {
                    continue;
                }
                if (*ratio < Scalar(0)) {
                    ratio = Scalar(0);
                }
                const bool better = !step || *ratio < *step - primal_tol_ ||
                                    (!(*ratio > *step + primal_tol_) && b < basis_[leave_row]);
                if (better) {
                    step = *ratio;
                    leave_row = i;
                    leave_at_lower = hits_lower;
                }
            }

            std::optional<Scalar> span;
            if (lower_[entering] && upper_[entering]) {
                span = *upper_[entering] - *lower_[entering];
            }
            if (span && (!step || !(*span > *step))) {
                value_[entering] = direction > 0 ? *upper_[entering] : *lower_[entering];
                continue;
            }
            if (!step) {
                return Status::Unbounded;
            }
            const std::size_t leaving = basis_[leave_row];
            pivot(leave_row, entering);
            value_[leaving] = leave_at_lower ? *lower_[leaving] : *upper_[leaving];
        }
    }

    std::size_t n_;
    std::size_t m_;
    std::size_t cols_ = 0;
    Scalar pivot_tol_;
    Scalar cost_tol_;
    Scalar primal_tol_;
    std::size_t max_iterations_;
    bool inconsistent_bounds_ = false;
    std::vector<Scalar> table_;
    std::vector<Scalar> rhs_;
    std::vector<std::optional<Scalar>> lower_;
    std::vector<std::optional<Scalar>> upper_;
    std::vector<Scalar> value_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> row_of_;
    std::vector<std::size_t> artificials_;
};

} // namespace detail

inline Solution<double> solve(const Problem<double>& problem, std::size_t max_iterations = 100000) {
    detail::Tableau<double> tableau(problem, Tolerances::pivot, Tolerances::cost,
                                    Tolerances::primal, max_iterations);
    return tableau.solve(problem.objective);
}

inline Solution<Rational> solve(const Problem<Rational>& problem, std::size_t max_iterations = 100000) {
    detail::Tableau<Rational> tableau(problem, 0, 0, 0, max_iterations);
    return tableau.solve(problem.objective);
}

} // namespace regions::lp

#endif
