#include "sprw/rewrite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sprw {

Level recompute_level(const EquationSystem& sys, std::span<const Level> level_of, Index i)
{
    Level level = 0;
    for (const auto& t : sys[i].x_terms)
        level = std::max(level, level_of[t.index] + 1);
    return level;
}

ElevateResult elevate_row(EquationSystem& sys, std::span<Level> level_of, Index i,
                          Level target, std::size_t fill_budget)
{
    ElevateResult result;
    Equation snapshot = sys[i];
    const std::size_t provenance_size = sys.provenance(i).size();
    // Each row is expanded at most once: after expanding j, every remaining
    // or inherited dependency has level <= level_of[j], and those inherited
    // from j are strictly shallower, so j never comes back.
    const Index cap = i;

    for (;;) {
        const auto& eq = sys[i];
        Index pick = -1;
        Level pick_level = -1;
        for (const auto& t : eq.x_terms) {
            const Level l = level_of[t.index];
            if (l >= target && (l > pick_level || (l == pick_level && t.index > pick))) {
                pick = t.index;
                pick_level = l;
            }
        }
        if (pick < 0)
            break;

        if (result.attempted == cap)
            throw std::logic_error("elevate_row: substitution cap exceeded for row " +
                                   std::to_string(i));
        sys.substitute(i, pick);
        ++result.attempted;

        if (sys[i].term_count() > fill_budget) {
            sys.restore(i, std::move(snapshot), provenance_size);
            result.status = ElevateStatus::budget_exceeded;
            break;
        }
    }
    if (result.status == ElevateStatus::reached)
        result.substitutions = result.attempted;
    level_of[i] = recompute_level(sys, level_of, i);
    return result;
}

namespace {

// For every level, the length of the maximal run of consecutive thin levels
// containing it (0 for levels that are not thin).
std::vector<Level> thin_run_lengths(const std::vector<Index>& counts, Index tau)
{
    const auto levels = static_cast<Level>(counts.size());
    std::vector<Level> runs(counts.size(), 0);
    for (Level l = 0; l < levels;) {
        if (counts[l] > tau) {
            ++l;
            continue;
        }
        Level end = l;
        while (end < levels && counts[end] <= tau)
            ++end;
        std::fill(runs.begin() + l, runs.begin() + end, end - l);
        l = end;
    }
    return runs;
}

Level lift_cap(const LiftLimit& limit, Level run_length)
{
    switch (limit.kind) {
    case LiftLimit::Kind::unlimited:
        return std::numeric_limits<Level>::max();
    case LiftLimit::Kind::fixed:
        return std::max<Level>(limit.value, 1);
    case LiftLimit::Kind::balanced:
        break;
    }
    return std::max<Level>(1, static_cast<Level>(std::ceil(std::sqrt(static_cast<double>(run_length)))));
}

void finish_report(TransformReport& report, EquationSystem& sys, LevelSchedule& schedule)
{
    schedule = compute_levels(sys);
    report.levels_after = schedule.num_levels();
    report.flops_after = flop_count(sys);
    report.barrier_reduction =
        report.levels_before == 0
            ? 0.0
            : static_cast<double>(report.levels_before - report.levels_after) /
                  static_cast<double>(report.levels_before);
    report.max_terms_in_any_equation = sys.max_term_count();
}

}  // namespace

TransformReport rewrite_thin_levels(EquationSystem& sys, LevelSchedule& schedule,
                                    const RewriteOptions& options)
{
    if (static_cast<Index>(schedule.level_of.size()) != sys.size())
        throw ConsistencyError("schedule does not match the equation system");

    TransformReport report;
    report.levels_before = schedule.num_levels();
    report.flops_before = flop_count(sys);

    const Index tau = options.thin_threshold;
    const Level num_levels = schedule.num_levels();

    // Work in the original level numbering: processed rows get their
    // recomputed level, unprocessed rows keep theirs as an upper bound.
    std::vector<Level> level_of = schedule.level_of;
    std::vector<Index> count(static_cast<std::size_t>(num_levels));
    for (Level l = 0; l < num_levels; ++l)
        count[l] = static_cast<Index>(schedule.levels[l].size());
    const std::vector<Level> run_length = thin_run_lengths(count, tau);
    // Levels that must stay even if thin: landing spots of rows that were
    // not elevated.
    std::vector<char> kept(static_cast<std::size_t>(num_levels), 0);
    Level active = num_levels;
    Level segment_start = 0;

    auto move_row = [&](Level from, Level to) {
        if (from == to)
            return;
        if (--count[from] == 0)
            --active;
        if (count[to]++ == 0)
            ++active;
    };

    for (Level l = 0; l < num_levels; ++l) {
        if (count[l] == 0)
            continue;
        if (count[l] > tau) {
            segment_start = l;
            continue;
        }
        if (active <= options.min_levels_kept)
            break;

        Level target = l - 1;
        while (target >= 0 && count[target] <= tau && !kept[target])
            --target;
        target = std::max<Level>(target, 0);
        if (target >= l)
            continue;

        const bool anchor = l - segment_start > lift_cap(options.max_lift, run_length[l]);
        if (anchor) {
            ++report.anchor_levels;
            segment_start = l;
        }

        for (Index row : schedule.levels[l]) {
            const Level before = level_of[row];
            const Level now = recompute_level(sys, level_of, row);
            if (anchor || now <= target) {
                level_of[row] = now;
                if (anchor)
                    kept[now] = 1;
            } else {
                const auto result = elevate_row(sys, level_of, row, target, options.fill_budget);
                report.substitutions_performed += result.substitutions;
                if (result.substitutions > 0)
                    ++report.rows_rewritten;
                if (result.status == ElevateStatus::budget_exceeded) {
                    ++report.rows_budget_exceeded;
                    kept[level_of[row]] = 1;
                    segment_start = l;
                }
            }
            move_row(before, level_of[row]);
        }
    }

    finish_report(report, sys, schedule);
    return report;
}

TransformReport elevate_rows(EquationSystem& sys, LevelSchedule& schedule,
                             std::span<const Index> rows, Level target,
                             std::size_t fill_budget)
{
    if (static_cast<Index>(schedule.level_of.size()) != sys.size())
        throw ConsistencyError("schedule does not match the equation system");

    TransformReport report;
    report.levels_before = schedule.num_levels();
    report.flops_before = flop_count(sys);

    std::vector<char> selected(static_cast<std::size_t>(sys.size()), 0);
    for (Index row : rows) {
        if (row < 0 || row >= sys.size())
            throw BoundsError("row " + std::to_string(row) + " out of range");
        selected[row] = 1;
    }

    // Elevating a row only lowers the levels of later rows, so one ascending
    // pass keeps the labelling exact.
    std::vector<Level> level_of(static_cast<std::size_t>(sys.size()), 0);
    for (Index i = 0; i < sys.size(); ++i) {
        level_of[i] = recompute_level(sys, level_of, i);
        if (!selected[i] || level_of[i] <= target)
            continue;
        const auto result = elevate_row(sys, level_of, i, target, fill_budget);
        report.substitutions_performed += result.substitutions;
        if (result.substitutions > 0)
            ++report.rows_rewritten;
        if (result.status == ElevateStatus::budget_exceeded)
            ++report.rows_budget_exceeded;
    }

    finish_report(report, sys, schedule);
    return report;
}

}  // namespace sprw
