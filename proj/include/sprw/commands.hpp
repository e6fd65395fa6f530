#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sprw/report.hpp"

namespace sprw {

/// Flags shared by the analyze / transform / codegen subcommands.
struct CommandOptions {
    std::filesystem::path matrix;
    bool unit_diagonal = false;

    Index thin_threshold = 2;
    std::size_t fill_budget = 256;
    LiftLimit max_lift = LiftLimit::balanced();
    std::vector<Index> rows;  // explicit rows to elevate to level 0
    bool no_rewrite = false;

    std::uint64_t seed = 42;
    Index trials = 10;
    std::optional<double> tol;  // defaults by whether rows were rewritten
    std::optional<std::filesystem::path> trace;  // substitution log output

    bool parallel = false;
    bool embed_rhs = false;
    std::optional<std::filesystem::path> rhs;  // embedded b; all ones if unset
    Index split_threshold = 2048;
    std::int64_t statement_cap = 2'000'000;
    std::filesystem::path out = "generated";
    bool overwrite = false;
};

/// Matrix statistics only.
RunReport cmd_analyze(const CommandOptions& options);

/// Rewrites thin levels (or exactly `rows`), then verifies the result.
/// success is false when verification fails.
RunReport cmd_transform(const CommandOptions& options);

/// Transform (unless no_rewrite), verify, plan and write the source bundle.
/// Nothing is written when verification fails.
RunReport cmd_codegen(const CommandOptions& options);

/// Parses "auto", "none" or a positive level count.
LiftLimit parse_lift_limit(const std::string& text);

/// Parses a comma-separated row list such as "3,7,12".
std::vector<Index> parse_row_list(const std::string& text);

}  // namespace sprw
