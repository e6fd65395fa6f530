#pragma once

#include <span>
#include <vector>

#include "sprw/common.hpp"
#include "sprw/dag.hpp"
#include "sprw/equations.hpp"

namespace sprw {

/// 0 when equation i reads no x value, otherwise 1 + the deepest level among
/// the rows it reads.
Level recompute_level(const EquationSystem& sys, std::span<const Level> level_of, Index i);

enum class ElevateStatus { reached, budget_exceeded };

struct ElevateResult {
    ElevateStatus status = ElevateStatus::reached;
    Index substitutions = 0;  // kept; zero after a rollback
    Index attempted = 0;      // performed before reaching or rolling back
};

/// Substitutes dependencies of row i until it no longer reads any row at
/// level >= target, always expanding the deepest dependency first (larger
/// row index on ties). If the equation would grow past fill_budget terms it
/// is restored to its state on entry. On return level_of[i] holds the
/// row's recomputed level.
///
/// level_of must be an upper-bound labelling: every row sits strictly below
/// the rows that read it. Throws std::logic_error if the substitution count
/// passes its hard cap (i), which a consistent labelling rules out.
ElevateResult elevate_row(EquationSystem& sys, std::span<Level> level_of, Index i,
                          Level target, std::size_t fill_budget);

/// Bound on how many original levels a thin-level row may be lifted.
///
/// `balanced` caps each run of R consecutive thin levels at ceil(sqrt(R))
/// levels per segment; the first level past the cap is left in place and
/// becomes the target of the next segment. This trades about sqrt(R)
/// surviving levels for FLOP growth linear rather than quadratic in R.
struct LiftLimit {
    enum class Kind { unlimited, balanced, fixed };
    Kind kind = Kind::balanced;
    Level value = 0;  // only for fixed

    static LiftLimit unlimited() { return {Kind::unlimited, 0}; }
    static LiftLimit balanced() { return {Kind::balanced, 0}; }
    static LiftLimit fixed(Level levels) { return {Kind::fixed, levels}; }
};

struct RewriteOptions {
    Index thin_threshold = 2;
    std::size_t fill_budget = 256;
    Level min_levels_kept = 1;
    LiftLimit max_lift = LiftLimit::balanced();
};

struct TransformReport {
    Level levels_before = 0;
    Level levels_after = 0;
    std::int64_t flops_before = 0;
    std::int64_t flops_after = 0;
    double barrier_reduction = 0.0;  // (levels_before - levels_after) / levels_before
    Index rows_rewritten = 0;
    Index substitutions_performed = 0;
    Index rows_budget_exceeded = 0;
    Index anchor_levels = 0;  // thin levels kept because of the lift limit
    std::size_t max_terms_in_any_equation = 0;

    double flop_ratio() const noexcept
    {
        return flops_before == 0 ? 1.0
                                 : static_cast<double>(flops_after) /
                                       static_cast<double>(flops_before);
    }
};

/// Moves rows of thin levels (at most thin_threshold rows) up into the
/// closest earlier level that is kept, scanning levels in ascending order.
/// `schedule` must be current for `sys` on entry and is replaced by the
/// recomputed schedule on return.
TransformReport rewrite_thin_levels(EquationSystem& sys, LevelSchedule& schedule,
                                    const RewriteOptions& options = {});

/// Elevates exactly the given rows (ascending) to `target`. Same contract
/// for `schedule` as rewrite_thin_levels.
TransformReport elevate_rows(EquationSystem& sys, LevelSchedule& schedule,
                             std::span<const Index> rows, Level target,
                             std::size_t fill_budget);

}  // namespace sprw
