#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sprw/dag.hpp"
#include "sprw/equations.hpp"
#include "sprw/matrix_io.hpp"

namespace sprw {

struct SolveResult {
    std::vector<double> x;
    double max_abs = 0.0;
};

/// Forward substitution in ascending row order:
/// x[i] = (b[i] - sum_j L[i][j] * x[j]) / d_i.
SolveResult serial_sptrsv(const LowerTriangularSystem& lower, std::span<const double> b);

/// Evaluates the equations level by level. Throws ScheduleViolation if a row
/// reads x from its own or a later level.
SolveResult evaluate_equations(const EquationSystem& sys, const LevelSchedule& schedule,
                               std::span<const double> b);

/// max_i |x_i - ref_i| / max(1, max_abs(ref)), with the row that attains it.
struct SolutionError {
    double error = 0.0;
    Index worst_row = -1;
    bool finite = true;
};

SolutionError compare_solutions(const SolveResult& ref, const SolveResult& got);

struct VerificationReport {
    bool passed = false;
    double worst_error = 0.0;
    Index worst_row = -1;
    Index trials = 0;
    double tolerance = 0.0;
    std::uint64_t seed = 0;
    std::string diagnostic;
};

inline constexpr double kTransformedTolerance = 1e-10;
inline constexpr double kUntransformedTolerance = 1e-14;

/// Deterministic right-hand side with entries uniform in [-1, 1].
std::vector<double> random_rhs(Index n, std::uint64_t seed);

/// Compares evaluate_equations(sys) with serial_sptrsv(lower) on `trials`
/// seeded random right-hand sides.
VerificationReport verify_transform(const LowerTriangularSystem& lower,
                                    const EquationSystem& sys, Index trials,
                                    double tolerance = kTransformedTolerance,
                                    std::uint64_t seed = 42);

}  // namespace sprw
