#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sprw/codegen.hpp"
#include "sprw/dag.hpp"
#include "sprw/executor.hpp"
#include "sprw/matrix_io.hpp"
#include "sprw/rewrite.hpp"

namespace sprw {

inline constexpr const char* kToolName = "sprw";
inline constexpr const char* kToolVersion = "0.1.0";

struct MatrixIdentity {
    std::string path;
    Index n = 0;
    Index nnz = 0;        // stored entries of the full matrix
    Index nnz_lower = 0;  // entries of the extracted lower triangle
    std::string hash;     // FNV-1a over the lower triangle
};

/// FNV-1a (64 bit) over the CSR arrays, hex encoded.
std::string matrix_hash(const CsrMatrix& m);

struct CodegenSummary {
    std::string out_dir;
    Index functions = 0;
    Level levels = 0;
    Level barriers = 0;
    Index kernel_files = 0;
    Index split_threshold = 0;
    bool parallel = false;
    bool embed_rhs = false;
    std::vector<std::string> files;
};

CodegenSummary summarize(const CodegenPlan& plan, const std::string& out_dir);

struct RunReport {
    std::string command;
    MatrixIdentity matrix;
    nlohmann::json config = nlohmann::json::object();
    std::optional<LevelStats> before;
    std::optional<LevelStats> after;
    std::optional<TransformReport> transform;
    std::optional<VerificationReport> verification;
    std::optional<CodegenSummary> codegen;
    bool success = true;
    std::string error;
};

nlohmann::json to_json(const LevelStats& stats);
nlohmann::json to_json(const TransformReport& report);
nlohmann::json to_json(const VerificationReport& report);
nlohmann::json to_json(const CodegenSummary& summary);
nlohmann::json to_json(const RunReport& report);

/// Human-readable rendering of the same content.
std::string to_text(const RunReport& report);

}  // namespace sprw
