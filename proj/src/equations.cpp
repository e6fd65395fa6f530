#include "sprw/equations.hpp"

#include <algorithm>
#include <sstream>

namespace sprw {

namespace {

// out = base (minus index `skip`) + scale * addend, merging equal indices
// and dropping coefficients that come out exactly zero.
void merge_scaled(const std::vector<Term>& base, const std::vector<Term>& addend,
                  double scale, Index skip, std::vector<Term>& out)
{
    out.clear();
    out.reserve(base.size() + addend.size());
    auto a = base.begin();
    auto b = addend.begin();
    auto push = [&out](Index index, double coeff) {
        if (coeff != 0.0)
            out.push_back({index, coeff});
    };
    while (a != base.end() || b != addend.end()) {
        if (a != base.end() && a->index == skip) {
            ++a;
            continue;
        }
        if (b == addend.end() || (a != base.end() && a->index < b->index)) {
            push(a->index, a->coeff);
            ++a;
        } else if (a == base.end() || b->index < a->index) {
            push(b->index, scale * b->coeff);
            ++b;
        } else {
            push(a->index, a->coeff + scale * b->coeff);
            ++a;
            ++b;
        }
    }
}

void check_terms(const std::vector<Term>& terms, Index row, Index limit, const char* kind)
{
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const auto& t = terms[k];
        if (t.index < 0 || t.index >= limit)
            throw ConsistencyError(std::string(kind) + "-term index " +
                                   std::to_string(t.index) + " out of range in equation " +
                                   std::to_string(row));
        if (k > 0 && terms[k - 1].index >= t.index)
            throw ConsistencyError(std::string(kind) + "-terms not strictly increasing in " +
                                   "equation " + std::to_string(row));
        if (t.coeff == 0.0)
            throw ConsistencyError("zero coefficient stored in equation " +
                                   std::to_string(row));
    }
}

}  // namespace

const Term* Equation::find_x(Index m) const noexcept
{
    auto it = std::lower_bound(x_terms.begin(), x_terms.end(), m,
                               [](const Term& t, Index key) { return t.index < key; });
    return (it != x_terms.end() && it->index == m) ? &*it : nullptr;
}

double Equation::evaluate(std::span<const double> b, std::span<const double> x) const noexcept
{
    double sum = 0.0;
    for (const auto& t : b_terms)
        sum += t.coeff * b[t.index];
    for (const auto& t : x_terms)
        sum += t.coeff * x[t.index];
    return sum;
}

EquationSystem::EquationSystem(std::vector<Equation> equations)
    : equations_(std::move(equations)), provenance_(equations_.size())
{
    const auto n = size();
    for (Index i = 0; i < n; ++i) {
        const auto& eq = equations_[i];
        if (eq.row != i)
            throw ConsistencyError("equation " + std::to_string(i) + " is labelled row " +
                                   std::to_string(eq.row));
        check_terms(eq.x_terms, i, i, "x");  // keys must be < i
        check_terms(eq.b_terms, i, n, "b");
    }
}

void EquationSystem::substitute(Index i, Index j)
{
    auto& target = equations_[i];
    const Term* term = target.find_x(j);
    if (term == nullptr)
        throw NoSuchTermError("equation " + std::to_string(i) + " has no term x[" +
                              std::to_string(j) + "]");
    const double c = term->coeff;
    const auto& source = equations_[j];

    std::vector<Term> merged;
    merge_scaled(target.x_terms, source.x_terms, c, j, merged);
    target.x_terms.swap(merged);
    merge_scaled(target.b_terms, source.b_terms, c, -1, merged);
    target.b_terms.swap(merged);

    provenance_[i].push_back(j);
}

void EquationSystem::restore(Index i, Equation snapshot, std::size_t provenance_size)
{
    equations_[i] = std::move(snapshot);
    provenance_[i].resize(std::min(provenance_size, provenance_[i].size()));
}

std::size_t EquationSystem::max_term_count() const noexcept
{
    std::size_t best = 0;
    for (const auto& eq : equations_)
        best = std::max(best, eq.term_count());
    return best;
}

EquationSystem init_equations(const LowerTriangularSystem& lower)
{
    const Index n = lower.n();
    std::vector<Equation> equations(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        auto& eq = equations[i];
        eq.row = i;
        const double d = lower.diag()[i];
        eq.b_terms.push_back({i, 1.0 / d});
        auto cols = lower.off_cols(i);
        auto vals = lower.off_values(i);
        eq.x_terms.reserve(cols.size());
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const double alpha = -vals[k] / d;
            if (alpha != 0.0)  // only on underflow
                eq.x_terms.push_back({cols[k], alpha});
        }
    }
    return EquationSystem(std::move(equations));
}

std::int64_t flop_count(const EquationSystem& sys) noexcept
{
    std::int64_t total = 0;
    for (const auto& eq : sys.equations())
        total += equation_flops(eq.term_count());
    return total;
}

std::string provenance_trace(const EquationSystem& sys)
{
    std::ostringstream out;
    for (Index i = 0; i < sys.size(); ++i)
        for (Index j : sys.provenance(i))
            out << "substitute " << i << "<-" << j << '\n';
    return out.str();
}

}  // namespace sprw
