#include "sprw/commands.hpp"

#include <charconv>
#include <fstream>

namespace sprw {

namespace {

struct Pipeline {
    MatrixIdentity identity;
    LowerTriangularSystem lower;
    EquationSystem sys;
    LevelSchedule schedule;
};

Pipeline load(const CommandOptions& options)
{
    const auto data = read_matrix_market(options.matrix);
    const CsrMatrix full = to_csr(data.n, data.entries);
    LowerTriangularSystem lower = extract_lower(full, options.unit_diagonal);

    MatrixIdentity id;
    id.path = options.matrix.string();
    id.n = full.n();
    id.nnz = full.nnz();
    id.nnz_lower = lower.nnz();
    id.hash = matrix_hash(lower.matrix());

    EquationSystem sys = init_equations(lower);
    LevelSchedule schedule = compute_levels(build_dag(lower));
    return {std::move(id), std::move(lower), std::move(sys), std::move(schedule)};
}

nlohmann::json lift_json(const LiftLimit& limit)
{
    switch (limit.kind) {
    case LiftLimit::Kind::unlimited:
        return "none";
    case LiftLimit::Kind::fixed:
        return limit.value;
    case LiftLimit::Kind::balanced:
        break;
    }
    return "auto";
}

nlohmann::json config_json(const CommandOptions& o, bool transform, bool codegen)
{
    nlohmann::json c = {{"unit_diagonal", o.unit_diagonal}};
    if (transform) {
        c["thin_threshold"] = o.thin_threshold;
        c["fill_budget"] = o.fill_budget;
        c["max_lift"] = lift_json(o.max_lift);
        c["rows"] = o.rows;
        c["no_rewrite"] = o.no_rewrite;
        c["seed"] = o.seed;
        c["trials"] = o.trials;
        c["tol"] = o.tol ? nlohmann::json(*o.tol) : nlohmann::json("default");
    }
    if (codegen) {
        c["parallel"] = o.parallel;
        c["embed_rhs"] = o.embed_rhs;
        c["rhs"] = o.rhs ? o.rhs->string() : std::string("ones");
        c["split_threshold"] = o.split_threshold;
        c["statement_cap"] = o.statement_cap;
        c["out"] = o.out.string();
        c["overwrite"] = o.overwrite;
    }
    return c;
}

TransformReport identity_report(const EquationSystem& sys, const LevelSchedule& schedule)
{
    TransformReport r;
    r.levels_before = r.levels_after = schedule.num_levels();
    r.flops_before = r.flops_after = flop_count(sys);
    r.max_terms_in_any_equation = sys.max_term_count();
    return r;
}

// Shared transform + verify stage. Returns false when verification failed.
bool run_transform(const CommandOptions& options, Pipeline& p, RunReport& report)
{
    report.before = level_stats(p.schedule, p.sys);

    TransformReport t;
    if (options.no_rewrite || (options.rows.empty() && options.thin_threshold < 1)) {
        t = identity_report(p.sys, p.schedule);
    } else if (!options.rows.empty()) {
        t = elevate_rows(p.sys, p.schedule, options.rows, 0, options.fill_budget);
    } else {
        RewriteOptions ro;
        ro.thin_threshold = options.thin_threshold;
        ro.fill_budget = options.fill_budget;
        ro.max_lift = options.max_lift;
        t = rewrite_thin_levels(p.sys, p.schedule, ro);
    }
    report.transform = t;
    if (options.trace) {
        std::ofstream out(*options.trace, std::ios::trunc);
        out << provenance_trace(p.sys);
        if (!out)
            throw IoError("failed to write '" + options.trace->string() + "'");
    }
    report.after = level_stats(p.schedule, p.sys);

    const double tol = options.tol.value_or(
        t.substitutions_performed > 0 ? kTransformedTolerance : kUntransformedTolerance);
    report.verification = verify_transform(p.lower, p.sys, options.trials, tol, options.seed);
    if (!report.verification->passed) {
        report.success = false;
        report.error = "verification failed: " + report.verification->diagnostic;
        return false;
    }
    return true;
}

}  // namespace

RunReport cmd_analyze(const CommandOptions& options)
{
    Pipeline p = load(options);
    RunReport report;
    report.command = "analyze";
    report.matrix = p.identity;
    report.config = config_json(options, false, false);
    report.before = level_stats(p.schedule, p.sys);
    return report;
}

RunReport cmd_transform(const CommandOptions& options)
{
    Pipeline p = load(options);
    RunReport report;
    report.command = "transform";
    report.matrix = p.identity;
    report.config = config_json(options, true, false);
    run_transform(options, p, report);
    return report;
}

RunReport cmd_codegen(const CommandOptions& options)
{
    Pipeline p = load(options);
    RunReport report;
    report.command = "codegen";
    report.matrix = p.identity;
    report.config = config_json(options, true, true);
    if (!run_transform(options, p, report)) {
        report.error += " (no code emitted)";
        return report;
    }

    CodegenOptions co;
    co.split_threshold = options.split_threshold;
    co.embed_rhs = options.embed_rhs;
    co.parallel = options.parallel;
    co.statement_cap = options.statement_cap;
    if (options.embed_rhs) {
        co.rhs = options.rhs ? read_rhs_file(*options.rhs)
                             : std::vector<double>(static_cast<std::size_t>(p.sys.size()), 1.0);
    }
    const CodegenPlan plan = plan_codegen(p.schedule, p.sys, co);
    const SourceBundle bundle = emit_bundle(plan, p.sys, p.lower);
    write_bundle(bundle, options.out, options.overwrite);
    report.codegen = summarize(plan, options.out.string());
    return report;
}

LiftLimit parse_lift_limit(const std::string& text)
{
    if (text == "auto")
        return LiftLimit::balanced();
    if (text == "none")
        return LiftLimit::unlimited();
    Level value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || value < 1)
        throw Error("max lift must be 'auto', 'none' or a positive integer, got '" + text + "'");
    return LiftLimit::fixed(value);
}

std::vector<Index> parse_row_list(const std::string& text)
{
    std::vector<Index> rows;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find(',', pos);
        if (end == std::string::npos)
            end = text.size();
        const std::string_view token(text.data() + pos, end - pos);
        if (!token.empty()) {
            Index row = 0;
            auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), row);
            if (ec != std::errc{} || ptr != token.data() + token.size() || row < 0)
                throw Error("invalid row '" + std::string(token) + "' in row list");
            rows.push_back(row);
        }
        pos = end + 1;
    }
    return rows;
}

}  // namespace sprw
