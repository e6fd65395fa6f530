#include "sprw/executor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace sprw {

namespace {

double max_abs_of(const std::vector<double>& x)
{
    double m = 0.0;
    for (double v : x)
        m = std::max(m, std::fabs(v));
    return m;
}

void require_length(std::span<const double> b, Index n)
{
    if (static_cast<Index>(b.size()) != n)
        throw ConsistencyError("right-hand side has " + std::to_string(b.size()) +
                               " entries, system has " + std::to_string(n) + " rows");
}

}  // namespace

SolveResult serial_sptrsv(const LowerTriangularSystem& lower, std::span<const double> b)
{
    const Index n = lower.n();
    require_length(b, n);
    SolveResult result;
    result.x.assign(static_cast<std::size_t>(n), 0.0);
    auto& x = result.x;
    for (Index i = 0; i < n; ++i) {
        double sum = b[i];
        auto cols = lower.off_cols(i);
        auto vals = lower.off_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k)
            sum -= vals[k] * x[cols[k]];
        x[i] = sum / lower.diag()[i];
    }
    result.max_abs = max_abs_of(x);
    return result;
}

SolveResult evaluate_equations(const EquationSystem& sys, const LevelSchedule& schedule,
                               std::span<const double> b)
{
    const Index n = sys.size();
    require_length(b, n);
    if (static_cast<Index>(schedule.level_of.size()) != n)
        throw ConsistencyError("schedule does not match the equation system");

    SolveResult result;
    result.x.assign(static_cast<std::size_t>(n), 0.0);
    for (std::size_t l = 0; l < schedule.levels.size(); ++l) {
        const auto level = static_cast<Level>(l);
        for (Index row : schedule.levels[l]) {
            const auto& eq = sys[row];
            for (const auto& t : eq.x_terms)
                if (schedule.level_of[t.index] >= level)
                    throw ScheduleViolation("row " + std::to_string(row) + " at level " +
                                            std::to_string(level) + " reads x[" +
                                            std::to_string(t.index) + "] at level " +
                                            std::to_string(schedule.level_of[t.index]));
            result.x[row] = eq.evaluate(b, result.x);
        }
    }
    result.max_abs = max_abs_of(result.x);
    return result;
}

SolutionError compare_solutions(const SolveResult& ref, const SolveResult& got)
{
    SolutionError out;
    const double scale = std::max(1.0, ref.max_abs);
    for (std::size_t i = 0; i < ref.x.size(); ++i) {
        if (!std::isfinite(ref.x[i]) || !std::isfinite(got.x[i])) {
            out.finite = false;
            out.error = std::numeric_limits<double>::infinity();
            out.worst_row = static_cast<Index>(i);
            return out;
        }
        const double e = std::fabs(got.x[i] - ref.x[i]) / scale;
        if (e > out.error || out.worst_row < 0) {
            out.error = std::max(out.error, e);
            out.worst_row = static_cast<Index>(i);
        }
    }
    return out;
}

std::vector<double> random_rhs(Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> b(static_cast<std::size_t>(n));
    for (auto& v : b)
        v = dist(rng);
    return b;
}

VerificationReport verify_transform(const LowerTriangularSystem& lower,
                                    const EquationSystem& sys, Index trials,
                                    double tolerance, std::uint64_t seed)
{
    if (trials < 1)
        throw ConsistencyError("verification needs at least one trial");
    if (lower.n() != sys.size())
        throw ConsistencyError("system and matrix differ in size");

    VerificationReport report;
    report.trials = trials;
    report.tolerance = tolerance;
    report.seed = seed;

    const LevelSchedule schedule = compute_levels(sys);
    std::mt19937_64 seeds(seed);
    for (Index t = 0; t < trials; ++t) {
        const auto b = random_rhs(lower.n(), seeds());
        const auto ref = serial_sptrsv(lower, b);
        const auto got = evaluate_equations(sys, schedule, b);
        const auto err = compare_solutions(ref, got);
        if (!err.finite) {
            std::ostringstream msg;
            msg << "non-finite value in row " << err.worst_row << " (trial " << t << ")";
            report.passed = false;
            report.worst_error = err.error;
            report.worst_row = err.worst_row;
            report.diagnostic = msg.str();
            return report;
        }
        if (err.error > report.worst_error || report.worst_row < 0) {
            report.worst_error = std::max(report.worst_error, err.error);
            report.worst_row = err.worst_row;
        }
    }
    report.passed = report.worst_error <= tolerance;
    if (!report.passed) {
        std::ostringstream msg;
        msg << "worst error " << report.worst_error << " at row " << report.worst_row
            << " exceeds tolerance " << tolerance;
        report.diagnostic = msg.str();
    }
    return report;
}

}  // namespace sprw
