// Command-line front end: analyze, transform, codegen, fetch.

#include <iostream>

#include <CLI11.hpp>

#include "sprw/commands.hpp"
#include "sprw/fetch.hpp"

namespace {

enum class ReportFormat { text, structured };

void print(const sprw::RunReport& report, ReportFormat format)
{
    if (format == ReportFormat::structured)
        std::cout << sprw::to_json(report).dump(2) << "\n";
    else
        std::cout << sprw::to_text(report);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sparse triangular solve: level analysis, equation rewriting and "
                 "specialized code generation"};
    app.set_version_flag("--version", std::string(sprw::kToolName) + " " + sprw::kToolVersion);
    app.require_subcommand(1);

    sprw::CommandOptions opts;
    std::string report_format = "text";
    std::string rows_text;
    std::string lift_text = "auto";
    double tol = 0.0;

    const std::map<std::string, ReportFormat> formats = {
        {"text", ReportFormat::text}, {"structured", ReportFormat::structured},
        {"json", ReportFormat::structured}};

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--matrix,matrix", opts.matrix, "Matrix Market file")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_flag("--unit-diagonal", opts.unit_diagonal,
                      "Force every diagonal entry to 1.0 (inserting missing ones)");
        cmd->add_option("--report", report_format, "Report format: text or structured")
            ->check(CLI::IsMember({"text", "structured", "json"}));
    };
    auto add_transform = [&](CLI::App* cmd) {
        cmd->add_option("--thin-threshold", opts.thin_threshold,
                        "Levels with at most this many rows are rewritten (0 disables)")
            ->capture_default_str()
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--fill-budget", opts.fill_budget,
                        "Maximum number of terms in a rewritten equation")
            ->capture_default_str();
        cmd->add_option("--max-lift", lift_text,
                        "Levels a thin row may be lifted: auto (sqrt of the thin run), "
                        "none, or a count")
            ->capture_default_str();
        cmd->add_option("--rows", rows_text,
                        "Comma-separated 0-based rows to elevate to level 0 instead of the "
                        "thin-level heuristic");
        cmd->add_flag("--no-rewrite", opts.no_rewrite, "Skip equation rewriting");
        cmd->add_option("--seed", opts.seed, "Seed for verification right-hand sides")
            ->capture_default_str();
        cmd->add_option("--trials", opts.trials, "Verification trials")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        cmd->add_option("--tol", tol,
                        "Verification tolerance (default 1e-10 after rewriting, 1e-14 "
                        "otherwise)");
        cmd->add_option("--trace", opts.trace, "Write the substitution log to this file");
    };

    auto* analyze = app.add_subcommand("analyze", "Report level structure and statistics");
    add_common(analyze);

    auto* transform = app.add_subcommand("transform", "Rewrite thin levels and verify");
    add_common(transform);
    add_transform(transform);

    auto* codegen = app.add_subcommand("codegen", "Emit a matrix-specialized solver bundle");
    add_common(codegen);
    add_transform(codegen);
    codegen->add_flag("--parallel", opts.parallel, "Emit an OpenMP task-parallel driver");
    codegen->add_flag("--embed-rhs", opts.embed_rhs,
                      "Fold the right-hand side into the kernels as constants");
    codegen->add_option("--rhs", opts.rhs,
                        "Right-hand side to embed (little-endian doubles; default all ones)")
        ->check(CLI::ExistingFile);
    codegen->add_option("--split-threshold", opts.split_threshold,
                        "Maximum rows per generated function")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    codegen->add_option("--statement-cap", opts.statement_cap,
                        "Refuse to emit more statements than this")
        ->capture_default_str();
    codegen->add_option("--out", opts.out, "Output directory")->capture_default_str();
    codegen->add_flag("--overwrite", opts.overwrite, "Replace a non-empty output directory");

    auto* fetch = app.add_subcommand("fetch", "Download a SuiteSparse matrix into the cache");
    std::string fetch_name;
    sprw::FetchOptions fetch_opts;
    fetch->add_option("name", fetch_name, "Matrix name (e.g. lung2) or Group/name")->required();
    fetch->add_option("--cache-dir", fetch_opts.cache_dir, "Cache directory");
    fetch->add_option("--base-url", fetch_opts.base_url, "Collection base URL");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!rows_text.empty())
            opts.rows = sprw::parse_row_list(rows_text);
        opts.max_lift = sprw::parse_lift_limit(lift_text);
        if (tol > 0.0)
            opts.tol = tol;
        const ReportFormat format = formats.at(report_format);

        if (fetch->parsed()) {
            std::cout << sprw::fetch_matrix(fetch_name, fetch_opts).string() << "\n";
            return 0;
        }

        sprw::RunReport report;
        if (analyze->parsed())
            report = sprw::cmd_analyze(opts);
        else if (transform->parsed())
            report = sprw::cmd_transform(opts);
        else
            report = sprw::cmd_codegen(opts);
        print(report, format);
        return report.success ? 0 : 1;
    } catch (const sprw::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
