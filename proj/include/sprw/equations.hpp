#pragma once

#include <span>
#include <string>
#include <vector>

#include "sprw/common.hpp"
#include "sprw/matrix_io.hpp"

namespace sprw {

struct Term {
    Index index = 0;
    double coeff = 0.0;

    friend bool operator==(const Term&, const Term&) = default;
};

/// One row as a linear combination of right-hand-side and solution entries:
///
///     x[row] = sum_k b_terms[k].coeff * b[k] + sum_m x_terms[m].coeff * x[m]
///
/// Both term lists are sorted by index and hold at most one term per index.
/// Every x-term index is smaller than `row` and no coefficient is exactly 0.
struct Equation {
    Index row = 0;
    std::vector<Term> x_terms;
    std::vector<Term> b_terms;

    std::size_t term_count() const noexcept { return x_terms.size() + b_terms.size(); }

    /// Coefficient of x[m], or nullptr if the equation does not read x[m].
    const Term* find_x(Index m) const noexcept;

    double evaluate(std::span<const double> b, std::span<const double> x) const noexcept;

    friend bool operator==(const Equation&, const Equation&) = default;
};

/// The full set of row equations plus a per-row log of the substitutions
/// applied to it (source rows, in application order).
class EquationSystem {
public:
    EquationSystem() = default;

    /// Validates the per-equation invariants; throws ConsistencyError.
    explicit EquationSystem(std::vector<Equation> equations);

    Index size() const noexcept { return static_cast<Index>(equations_.size()); }
    const Equation& operator[](Index i) const noexcept { return equations_[i]; }
    std::span<const Equation> equations() const noexcept { return equations_; }
    std::span<const Index> provenance(Index i) const noexcept { return provenance_[i]; }

    /// Replaces x[j] inside equation i by the current equation of row j.
    /// Throws NoSuchTermError if equation i does not read x[j].
    void substitute(Index i, Index j);

    /// Puts back a snapshot of equation i and truncates its provenance log.
    void restore(Index i, Equation snapshot, std::size_t provenance_size);

    std::size_t max_term_count() const noexcept;

private:
    std::vector<Equation> equations_;
    std::vector<std::vector<Index>> provenance_;
};

/// Closed form of forward substitution: b-term {i: 1/d_i} and x-terms
/// {m: -L[i][m] / d_i}.
EquationSystem init_equations(const LowerTriangularSystem& lower);

inline void substitute(EquationSystem& sys, Index i, Index j) { sys.substitute(i, j); }

/// FLOPs to evaluate one equation: one multiply per term and one add between
/// consecutive terms.
inline std::int64_t equation_flops(std::size_t term_count) noexcept
{
    return term_count == 0 ? 0 : 2 * static_cast<std::int64_t>(term_count) - 1;
}

std::int64_t flop_count(const EquationSystem& sys) noexcept;

/// One "substitute i<-j" line per recorded step, rows ascending.
std::string provenance_trace(const EquationSystem& sys);

}  // namespace sprw
