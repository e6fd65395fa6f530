#include "sprw/dag.hpp"

#include <algorithm>

namespace sprw {

namespace {

Adjacency transpose(Index n, const Adjacency& adj)
{
    Adjacency out;
    out.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    for (Index t : adj.targets)
        ++out.offsets[t + 1];
    for (Index i = 0; i < n; ++i)
        out.offsets[i + 1] += out.offsets[i];
    out.targets.resize(adj.targets.size());
    std::vector<Index> fill(out.offsets.begin(), out.offsets.end() - 1);
    // Sources visited in ascending order keep every list sorted.
    for (Index i = 0; i < n; ++i)
        for (Index t : adj(i))
            out.targets[fill[t]++] = i;
    return out;
}

}  // namespace

DependencyDag build_dag(const LowerTriangularSystem& lower)
{
    DependencyDag dag;
    dag.n = lower.n();
    dag.deps.offsets.assign(static_cast<std::size_t>(dag.n) + 1, 0);
    dag.deps.targets.reserve(static_cast<std::size_t>(lower.nnz() - lower.n()));
    for (Index i = 0; i < dag.n; ++i) {
        auto cols = lower.off_cols(i);
        dag.deps.targets.insert(dag.deps.targets.end(), cols.begin(), cols.end());
        dag.deps.offsets[i + 1] = static_cast<Index>(dag.deps.targets.size());
    }
    dag.dependents = transpose(dag.n, dag.deps);
    return dag;
}

LevelSchedule schedule_from_levels(std::span<const Level> level_of)
{
    const Level top = level_of.empty() ? -1 : *std::max_element(level_of.begin(), level_of.end());
    std::vector<std::vector<Index>> buckets(static_cast<std::size_t>(top + 1));
    for (std::size_t i = 0; i < level_of.size(); ++i)
        buckets[level_of[i]].push_back(static_cast<Index>(i));

    LevelSchedule schedule;
    schedule.level_of.resize(level_of.size());
    for (auto& bucket : buckets) {
        if (bucket.empty())
            continue;
        const auto level = static_cast<Level>(schedule.levels.size());
        for (Index row : bucket)
            schedule.level_of[row] = level;
        schedule.levels.push_back(std::move(bucket));
    }
    return schedule;
}

LevelSchedule compute_levels(const DependencyDag& dag)
{
    // One ascending pass: all dependencies of i have smaller indices.
    std::vector<Level> level_of(static_cast<std::size_t>(dag.n), 0);
    for (Index i = 0; i < dag.n; ++i) {
        Level level = 0;
        for (Index j : dag.deps(i))
            level = std::max(level, level_of[j] + 1);
        level_of[i] = level;
    }
    return schedule_from_levels(level_of);
}

LevelSchedule compute_levels(const EquationSystem& sys)
{
    std::vector<Level> level_of(static_cast<std::size_t>(sys.size()), 0);
    for (Index i = 0; i < sys.size(); ++i) {
        Level level = 0;
        for (const auto& t : sys[i].x_terms)
            level = std::max(level, level_of[t.index] + 1);
        level_of[i] = level;
    }
    return schedule_from_levels(level_of);
}

Index LevelStats::thin_levels(Index tau) const noexcept
{
    Index count = 0;
    for (const auto& info : per_level)
        count += info.rows <= tau ? 1 : 0;
    return count;
}

double LevelStats::fraction_with_width(Index width) const noexcept
{
    if (per_level.empty())
        return 0.0;
    auto it = width_histogram.find(width);
    const Index count = it == width_histogram.end() ? 0 : it->second;
    return static_cast<double>(count) / static_cast<double>(per_level.size());
}

LevelStats level_stats(const LevelSchedule& schedule, const EquationSystem& sys)
{
    const Index n = sys.size();
    if (static_cast<Index>(schedule.level_of.size()) != n)
        throw ConsistencyError("schedule covers " + std::to_string(schedule.level_of.size()) +
                               " rows, system has " + std::to_string(n));

    LevelStats stats;
    stats.n = n;
    stats.per_level.resize(schedule.levels.size());
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    Index covered = 0;

    for (std::size_t l = 0; l < schedule.levels.size(); ++l) {
        auto& info = stats.per_level[l];
        for (Index row : schedule.levels[l]) {
            if (row < 0 || row >= n || seen[row] ||
                schedule.level_of[row] != static_cast<Level>(l))
                throw ConsistencyError("schedule does not partition the rows (row " +
                                       std::to_string(row) + ")");
            seen[row] = 1;
            ++covered;
            const auto& eq = sys[row];
            for (const auto& t : eq.x_terms)
                if (schedule.level_of[t.index] >= static_cast<Level>(l))
                    throw ConsistencyError("schedule is stale: row " + std::to_string(row) +
                                           " reads x[" + std::to_string(t.index) +
                                           "] from its own or a later level");
            const auto p = static_cast<std::int64_t>(eq.b_terms.size());
            const auto q = static_cast<std::int64_t>(eq.x_terms.size());
            info.rows += 1;
            info.nonzeros += p + q;
            info.flops += equation_flops(eq.term_count());
            info.flops_csr += 2 * q + 1;
            info.mem_specialized += q + p + 1;
            info.mem_csr += 3 * q + 4;
        }
        stats.total_nonzeros += info.nonzeros;
        stats.total_flops += info.flops;
        stats.total_flops_csr += info.flops_csr;
        stats.total_mem_specialized += info.mem_specialized;
        stats.total_mem_csr += info.mem_csr;
        stats.max_rows_per_level = std::max(stats.max_rows_per_level, info.rows);
        stats.width_histogram[info.rows] += 1;
    }
    if (covered != n)
        throw ConsistencyError("schedule lists " + std::to_string(covered) + " of " +
                               std::to_string(n) + " rows");

    if (const auto levels = stats.per_level.size(); levels > 0) {
        const auto count = static_cast<double>(levels);
        stats.mean_rows_per_level = static_cast<double>(n) / count;
        stats.mean_mem_specialized_per_level =
            static_cast<double>(stats.total_mem_specialized) / count;
        stats.mean_mem_csr_per_level = static_cast<double>(stats.total_mem_csr) / count;

        std::vector<Index> widths;
        widths.reserve(levels);
        for (const auto& info : stats.per_level)
            widths.push_back(info.rows);
        std::sort(widths.begin(), widths.end());
        stats.median_rows_per_level =
            levels % 2 == 1 ? static_cast<double>(widths[levels / 2])
                            : 0.5 * static_cast<double>(widths[levels / 2 - 1] + widths[levels / 2]);
    }
    return stats;
}

}  // namespace sprw
