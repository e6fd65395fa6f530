#pragma once

#include <map>
#include <span>
#include <vector>

#include "sprw/common.hpp"
#include "sprw/equations.hpp"
#include "sprw/matrix_io.hpp"

namespace sprw {

/// Compressed adjacency lists: the neighbours of node i are
/// targets[offsets[i] .. offsets[i+1]).
struct Adjacency {
    std::vector<Index> offsets{0};
    std::vector<Index> targets;

    std::span<const Index> operator()(Index i) const noexcept
    {
        return std::span<const Index>(targets).subspan(offsets[i], offsets[i + 1] - offsets[i]);
    }
};

/// Row dependency graph of L. Every edge j -> i has j < i.
struct DependencyDag {
    Index n = 0;
    Adjacency deps;        // predecessors of i, ascending
    Adjacency dependents;  // successors of j, ascending

    Index num_edges() const noexcept { return static_cast<Index>(deps.targets.size()); }
};

DependencyDag build_dag(const LowerTriangularSystem& lower);

/// Level-set partition. level_of[i] is 0 for rows without dependencies and
/// 1 + the deepest dependency otherwise; levels[l] lists its rows ascending.
struct LevelSchedule {
    std::vector<Level> level_of;
    std::vector<std::vector<Index>> levels;

    Level num_levels() const noexcept { return static_cast<Level>(levels.size()); }
    Level num_barriers() const noexcept { return levels.empty() ? 0 : num_levels() - 1; }
};

LevelSchedule compute_levels(const DependencyDag& dag);

/// Levels of a (possibly rewritten) equation system, using x-terms as the
/// dependency edges.
LevelSchedule compute_levels(const EquationSystem& sys);

/// Groups rows by a per-row level assignment, dropping empty levels and
/// renumbering the rest densely in order.
LevelSchedule schedule_from_levels(std::span<const Level> level_of);

struct LevelInfo {
    Index rows = 0;
    std::int64_t nonzeros = 0;
    std::int64_t flops = 0;              // normalized form, 2*(p+q)-1 per row
    std::int64_t flops_csr = 0;          // classic CSR count, 2*k+1 per row
    std::int64_t mem_specialized = 0;    // constants embedded: q + p + 1
    std::int64_t mem_csr = 0;            // generic CSR kernel: 3*k + 4
};

struct LevelStats {
    std::vector<LevelInfo> per_level;
    Index n = 0;
    std::int64_t total_nonzeros = 0;
    std::int64_t total_flops = 0;
    std::int64_t total_flops_csr = 0;
    std::int64_t total_mem_specialized = 0;
    std::int64_t total_mem_csr = 0;
    double mean_rows_per_level = 0.0;
    double median_rows_per_level = 0.0;
    double mean_mem_specialized_per_level = 0.0;
    double mean_mem_csr_per_level = 0.0;
    Index max_rows_per_level = 0;
    std::map<Index, Index> width_histogram;  // rows-per-level -> number of levels

    Level num_levels() const noexcept { return static_cast<Level>(per_level.size()); }

    /// Levels holding at most `tau` rows.
    Index thin_levels(Index tau) const noexcept;
    /// Fraction of levels holding exactly `width` rows.
    double fraction_with_width(Index width) const noexcept;
};

/// Per-level and aggregate counts. Throws ConsistencyError if the schedule
/// does not cover exactly the rows of `sys` or violates its dependencies.
LevelStats level_stats(const LevelSchedule& schedule, const EquationSystem& sys);

}  // namespace sprw
