#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sprw/dag.hpp"
#include "sprw/equations.hpp"
#include "sprw/matrix_io.hpp"

namespace sprw {

struct CodegenOptions {
    Index split_threshold = 2048;      // max rows per generated function
    bool embed_rhs = false;            // fold b into literal constants
    bool parallel = false;             // OpenMP tasks per level
    std::int64_t statement_cap = 2'000'000;
    Index statements_per_file = 20'000;
    std::vector<double> rhs;           // required when embed_rhs is set
};

/// One generated function: a contiguous slice of one level's (ascending)
/// row list.
struct KernelFunction {
    std::string name;  // level{L}_part{P}
    Level level = 0;
    Index part = 0;
    std::vector<Index> rows;
    Index file = 0;    // kernels_<file>.c
};

struct CodegenPlan {
    Index n = 0;
    Index split_threshold = 0;
    bool embed_rhs = false;
    bool parallel = false;
    std::vector<double> rhs;
    Level num_levels = 0;
    Index num_kernel_files = 0;
    std::vector<KernelFunction> functions;  // level order, then part order
};

/// Splits every level into chunks of at most split_threshold rows. Throws
/// ConsistencyError if the schedule is stale for sys and CodegenError when
/// the statement cap is exceeded or an embedded right-hand side is missing.
CodegenPlan plan_codegen(const LevelSchedule& schedule, const EquationSystem& sys,
                         const CodegenOptions& options = {});

struct SourceFile {
    std::string name;
    std::string text;

    friend bool operator==(const SourceFile&, const SourceFile&) = default;
};

struct SourceBundle {
    std::vector<SourceFile> kernels;
    SourceFile driver;
    SourceFile fallback;
    SourceFile makefile;

    std::vector<const SourceFile*> files() const;

    friend bool operator==(const SourceBundle&, const SourceBundle&) = default;
};

inline constexpr const char* kBinaryName = "sptrsv_specialized";

/// Shortest decimal text that parses back to exactly `value`, always with a
/// '.' or exponent so C reads it as a double. Throws CodegenError for
/// non-finite values.
std::string format_double(double value);

/// One straight-line C statement for an equation.
std::string render_statement(const Equation& eq, const CodegenPlan& plan);

std::vector<SourceFile> emit_kernels(const CodegenPlan& plan, const EquationSystem& sys);
SourceFile emit_driver(const CodegenPlan& plan);
SourceFile emit_fallback(const CodegenPlan& plan, const LowerTriangularSystem& lower);
SourceFile emit_makefile(const CodegenPlan& plan);
SourceBundle emit_bundle(const CodegenPlan& plan, const EquationSystem& sys,
                         const LowerTriangularSystem& lower);

/// Writes the bundle into `dir`. Refuses a non-empty directory unless
/// `overwrite` is set; throws IoError on failure.
void write_bundle(const SourceBundle& bundle, const std::filesystem::path& dir,
                  bool overwrite = false);

/// Right-hand-side file read by the generated driver: n little-endian
/// IEEE-754 doubles, no header.
void write_rhs_file(const std::filesystem::path& path, std::span<const double> b);
std::vector<double> read_rhs_file(const std::filesystem::path& path);

}  // namespace sprw
