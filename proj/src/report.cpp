#include "sprw/report.hpp"

#include <bit>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace sprw {

using nlohmann::json;

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

void fnv_mix(std::uint64_t& h, std::uint64_t word)
{
    for (int k = 0; k < 8; ++k) {
        h ^= (word >> (8 * k)) & 0xffu;
        h *= kFnvPrime;
    }
}

std::string percent(double fraction)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
    return buf;
}

const Index kThinTaus[] = {1, 2, 4, 8};

}  // namespace

std::string matrix_hash(const CsrMatrix& m)
{
    std::uint64_t h = kFnvOffset;
    fnv_mix(h, static_cast<std::uint64_t>(m.n()));
    for (Index v : m.row_ptr())
        fnv_mix(h, static_cast<std::uint64_t>(v));
    for (Index v : m.col_idx())
        fnv_mix(h, static_cast<std::uint64_t>(v));
    for (double v : m.values())
        fnv_mix(h, std::bit_cast<std::uint64_t>(v));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CodegenSummary summarize(const CodegenPlan& plan, const std::string& out_dir)
{
    CodegenSummary s;
    s.out_dir = out_dir;
    s.functions = static_cast<Index>(plan.functions.size());
    s.levels = plan.num_levels;
    s.barriers = plan.num_levels > 0 ? plan.num_levels - 1 : 0;
    s.kernel_files = plan.num_kernel_files;
    s.split_threshold = plan.split_threshold;
    s.parallel = plan.parallel;
    s.embed_rhs = plan.embed_rhs;
    for (Index f = 0; f < plan.num_kernel_files; ++f)
        s.files.push_back("kernels_" + std::to_string(f) + ".c");
    s.files.insert(s.files.end(), {"driver.c", "fallback.c", "Makefile"});
    return s;
}

json to_json(const LevelStats& stats)
{
    json thin = json::object();
    for (Index tau : kThinTaus) {
        const Index count = stats.thin_levels(tau);
        thin[std::to_string(tau)] = {
            {"levels", count},
            {"fraction", stats.num_levels() == 0
                             ? 0.0
                             : static_cast<double>(count) / static_cast<double>(stats.num_levels())}};
    }
    json histogram = json::array();
    for (const auto& [width, count] : stats.width_histogram)
        histogram.push_back({{"rows", width}, {"levels", count}});

    json rows = json::array();
    json flops = json::array();
    for (const auto& info : stats.per_level) {
        rows.push_back(info.rows);
        flops.push_back(info.flops);
    }
    return {
        {"n", stats.n},
        {"levels", stats.num_levels()},
        // Some sources count every level as a barrier; both are given.
        {"barriers", stats.num_levels() > 0 ? stats.num_levels() - 1 : 0},
        {"nonzeros", stats.total_nonzeros},
        {"flops", stats.total_flops},
        {"flops_csr", stats.total_flops_csr},
        {"memory_accesses_specialized", stats.total_mem_specialized},
        {"memory_accesses_csr", stats.total_mem_csr},
        {"mean_memory_accesses_specialized_per_level", stats.mean_mem_specialized_per_level},
        {"mean_memory_accesses_csr_per_level", stats.mean_mem_csr_per_level},
        {"mean_rows_per_level", stats.mean_rows_per_level},
        {"median_rows_per_level", stats.median_rows_per_level},
        {"max_rows_per_level", stats.max_rows_per_level},
        {"fraction_levels_with_2_rows", stats.fraction_with_width(2)},
        {"thin_levels", thin},
        {"width_histogram", histogram},
        {"rows_per_level", rows},
        {"flops_per_level", flops},
    };
}

json to_json(const TransformReport& r)
{
    return {
        {"levels_before", r.levels_before},
        {"levels_after", r.levels_after},
        {"flops_before", r.flops_before},
        {"flops_after", r.flops_after},
        {"flop_ratio", r.flop_ratio()},
        {"barrier_reduction", r.barrier_reduction},
        {"rows_rewritten", r.rows_rewritten},
        {"substitutions_performed", r.substitutions_performed},
        {"rows_budget_exceeded", r.rows_budget_exceeded},
        {"anchor_levels", r.anchor_levels},
        {"max_terms_in_any_equation", r.max_terms_in_any_equation},
    };
}

json to_json(const VerificationReport& r)
{
    return {
        {"passed", r.passed},
        {"worst_error", r.worst_error},
        {"worst_row", r.worst_row},
        {"trials", r.trials},
        {"tolerance", r.tolerance},
        {"seed", r.seed},
        {"diagnostic", r.diagnostic},
    };
}

json to_json(const CodegenSummary& s)
{
    return {
        {"out_dir", s.out_dir},
        {"functions", s.functions},
        {"levels", s.levels},
        {"barriers", s.barriers},
        {"kernel_files", s.kernel_files},
        {"split_threshold", s.split_threshold},
        {"parallel", s.parallel},
        {"embed_rhs", s.embed_rhs},
        {"files", s.files},
    };
}

json to_json(const RunReport& r)
{
    json out = {
        {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
        {"command", r.command},
        {"matrix",
         {{"path", r.matrix.path},
          {"n", r.matrix.n},
          {"nnz", r.matrix.nnz},
          {"nnz_lower", r.matrix.nnz_lower},
          {"hash", r.matrix.hash}}},
        {"config", r.config},
        {"success", r.success},
    };
    if (!r.error.empty())
        out["error"] = r.error;
    if (r.before)
        out["levels_before"] = to_json(*r.before);
    if (r.after)
        out["levels_after"] = to_json(*r.after);
    if (r.transform)
        out["transform"] = to_json(*r.transform);
    if (r.verification)
        out["verification"] = to_json(*r.verification);
    if (r.codegen)
        out["codegen"] = to_json(*r.codegen);
    return out;
}

namespace {

void write_stats(std::ostream& out, const char* title, const LevelStats& s)
{
    out << title << "\n"
        << "  levels:              " << s.num_levels() << " (barriers: "
        << (s.num_levels() > 0 ? s.num_levels() - 1 : 0) << ")\n"
        << "  rows per level:      mean " << std::fixed << std::setprecision(2)
        << s.mean_rows_per_level << ", median " << s.median_rows_per_level << ", max "
        << s.max_rows_per_level << "\n"
        << "  levels with 2 rows:  " << percent(s.fraction_with_width(2)) << "\n"
        << "  thin levels:        ";
    for (Index tau : kThinTaus)
        out << " <=" << tau << ": " << s.thin_levels(tau) << " ("
            << percent(s.num_levels() == 0 ? 0.0
                                          : static_cast<double>(s.thin_levels(tau)) /
                                                static_cast<double>(s.num_levels()))
            << ")";
    out << "\n"
        << "  flops:               " << s.total_flops << " (csr count " << s.total_flops_csr
        << ")\n"
        << "  memory accesses:     " << s.total_mem_specialized << " specialized, "
        << s.total_mem_csr << " csr\n"
        << "  level widths:       ";
    int shown = 0;
    for (const auto& [width, count] : s.width_histogram) {
        if (shown++ == 12) {
            out << " ...";
            break;
        }
        out << " " << width << "x" << count;
    }
    out << "\n";
}

}  // namespace

std::string to_text(const RunReport& r)
{
    std::ostringstream out;
    out << kToolName << " " << kToolVersion << " " << r.command << "\n"
        << "matrix: " << r.matrix.path << "\n"
        << "  n = " << r.matrix.n << ", nnz = " << r.matrix.nnz
        << ", nnz(lower) = " << r.matrix.nnz_lower << ", hash " << r.matrix.hash << "\n";
    if (r.before)
        write_stats(out, "before:", *r.before);
    if (r.transform) {
        const auto& t = *r.transform;
        out << "transform:\n"
            << "  levels:              " << t.levels_before << " -> " << t.levels_after << " ("
            << percent(t.barrier_reduction) << " fewer)\n"
            << "  flops:               " << t.flops_before << " -> " << t.flops_after << " ("
            << std::showpos << percent(t.flop_ratio() - 1.0) << std::noshowpos << ")\n"
            << "  rows rewritten:      " << t.rows_rewritten << " ("
            << t.substitutions_performed << " substitutions, " << t.rows_budget_exceeded
            << " over budget, " << t.anchor_levels << " anchor levels)\n"
            << "  max equation terms:  " << t.max_terms_in_any_equation << "\n";
    }
    if (r.after)
        write_stats(out, "after:", *r.after);
    if (r.verification) {
        const auto& v = *r.verification;
        out << "verification: " << (v.passed ? "PASS" : "FAIL") << " (worst error "
            << std::scientific << std::setprecision(3) << v.worst_error << " at row "
            << v.worst_row << ", tol " << v.tolerance << ", " << v.trials << " trials)"
            << std::defaultfloat << "\n";
        if (!v.diagnostic.empty())
            out << "  " << v.diagnostic << "\n";
    }
    if (r.codegen) {
        const auto& c = *r.codegen;
        out << "codegen: " << c.functions << " functions over " << c.levels << " levels ("
            << c.barriers << " barriers), " << c.kernel_files << " kernel file(s), "
            << (c.parallel ? "parallel" : "serial") << ", "
            << (c.embed_rhs ? "embedded rhs" : "runtime rhs") << "\n"
            << "  written to " << c.out_dir << "\n";
    }
    if (!r.error.empty())
        out << "error: " << r.error << "\n";
    return out.str();
}

}  // namespace sprw
