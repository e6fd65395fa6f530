// Acceptance suite: one PASS / FAIL / NOT RUN line per criterion.
//
// Exit status: 1 if any selected criterion failed, 77 if none failed but
// some could not run (missing data or toolchain), 0 otherwise.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "bundle_support.hpp"
#include "sprw/commands.hpp"
#include "sprw/executor.hpp"
#include "sprw/fetch.hpp"
#include "sprw/rewrite.hpp"

using namespace sprw;

namespace {

// Pinned tolerances and bands.
constexpr Index kLung2Rows = 109'460;
constexpr Index kLung2Nnz = 492'564;
constexpr Level kLung2Levels = 478;
constexpr double kTwoRowFractionLo = 0.90;
constexpr double kTwoRowFractionHi = 0.97;
constexpr double kAnalyzeSeconds = 10.0;
constexpr Level kMaxLevelsAfter = 96;
constexpr double kMaxFlopRatio = 1.25;
constexpr double kTransformSeconds = 60.0;
constexpr double kRewriteTolerance = 1e-10;
constexpr double kPropertySeconds = 120.0;
constexpr double kOracleTolerance = 1e-14;
constexpr double kSubstituteTolerance = 1e-12;
constexpr double kCompiledTolerance = 1e-10;

enum class Outcome { pass, fail, not_run };

struct Result {
    Outcome outcome = Outcome::pass;
    std::string detail;
};

Result pass(std::string d) { return {Outcome::pass, std::move(d)}; }
Result fail(std::string d) { return {Outcome::fail, std::move(d)}; }
Result not_run(std::string d) { return {Outcome::not_run, std::move(d)}; }

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Random system with n and density drawn from the criterion's ranges.
LowerTriangularSystem draw_system(std::mt19937_64& rng, Index n_lo, Index n_hi)
{
    std::uniform_int_distribution<Index> size(n_lo, n_hi);
    const Index n = size(rng);
    const double lo = std::min(1.0, 2.0 / static_cast<double>(n));
    const double hi = std::max(lo, 0.2);
    std::uniform_real_distribution<double> density(lo, hi);
    return testing::random_lower(rng, n, density(rng));
}

// ---- lung2 -----------------------------------------------------------------

struct Lung2 {
    std::filesystem::path path;
    std::string why_missing;
};

Lung2 locate_lung2(const std::string& explicit_path, bool allow_fetch)
{
    if (!explicit_path.empty())
        return {explicit_path, std::filesystem::exists(explicit_path)
                                   ? ""
                                   : "'" + explicit_path + "' does not exist"};
    if (const char* env = std::getenv("SPRW_LUNG2"); env && *env)
        return {env, std::filesystem::exists(env) ? "" : std::string("'") + env + "' does not exist"};
    const auto cached = cache_path(*resolve_matrix_name("lung2"), default_cache_dir());
    if (std::filesystem::exists(cached))
        return {cached, ""};
    if (!allow_fetch)
        return {{}, "not in the cache at " + cached.string()};
    try {
        FetchOptions opts;
        opts.timeout_seconds = 300;
        return {fetch_matrix("lung2", opts), ""};
    } catch (const FetchError& e) {
        return {{}, e.what()};
    }
}

Result criterion_1(const Lung2& lung2)
{
    if (lung2.path.empty() || !lung2.why_missing.empty())
        return not_run("lung2 unavailable: " + lung2.why_missing);
    CommandOptions o;
    o.matrix = lung2.path;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = cmd_analyze(o);
    const double elapsed = seconds_since(t0);
    const Level levels = r.before->num_levels();
    const double two = r.before->fraction_with_width(2);
    std::string d = fmt("n=%lld nnz=%lld levels=%lld two_row_fraction=%.4f time=%.2fs",
                        static_cast<long long>(r.matrix.n), static_cast<long long>(r.matrix.nnz),
                        static_cast<long long>(levels), two, elapsed);
    const bool levels_ok = levels == kLung2Levels || levels == kLung2Levels - 1;
    if (levels == kLung2Levels - 1)
        d += " (477 = barrier count convention)";
    const bool ok = r.matrix.n == kLung2Rows && r.matrix.nnz == kLung2Nnz && levels_ok &&
                    two >= kTwoRowFractionLo && two <= kTwoRowFractionHi &&
                    elapsed < kAnalyzeSeconds;
    return ok ? pass(d) : fail(d);
}

Result criterion_2(const Lung2& lung2)
{
    if (lung2.path.empty() || !lung2.why_missing.empty())
        return not_run("lung2 unavailable: " + lung2.why_missing);
    CommandOptions o;
    o.matrix = lung2.path;
    o.thin_threshold = 2;
    o.fill_budget = 256;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = cmd_transform(o);
    const double elapsed = seconds_since(t0);
    const auto& t = *r.transform;
    const std::string d =
        fmt("levels %lld -> %lld, flops %lld -> %lld (ratio %.4f), verified=%s, time=%.2fs",
            static_cast<long long>(t.levels_before), static_cast<long long>(t.levels_after),
            static_cast<long long>(t.flops_before), static_cast<long long>(t.flops_after),
            t.flop_ratio(), r.success ? "yes" : "no", elapsed);
    const bool ok = t.levels_after <= kMaxLevelsAfter && t.flop_ratio() <= kMaxFlopRatio &&
                    r.success && elapsed < kTransformSeconds;
    return ok ? pass(d) : fail(d);
}

// ---- synthetic criteria ----------------------------------------------------

Result criterion_3()
{
    std::mt19937_64 rng(2024);
    const Index taus[] = {1, 2, 4};
    std::uniform_int_distribution<int> pick(0, 2);
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    Index rewritten = 0;
    for (int k = 0; k < 50; ++k) {
        const auto lower = draw_system(rng, 10, 2000);
        auto sys = init_equations(lower);
        auto sched = compute_levels(sys);
        RewriteOptions opts;
        opts.thin_threshold = taus[pick(rng)];
        const auto rep = rewrite_thin_levels(sys, sched, opts);
        rewritten += rep.rows_rewritten;
        const auto v = verify_transform(lower, sys, 50, kRewriteTolerance, rng());
        worst = std::max(worst, v.worst_error);
        if (!v.passed)
            return fail(fmt("system %d (n=%lld): %s", k, static_cast<long long>(lower.n()),
                            v.diagnostic.c_str()));
    }
    const double elapsed = seconds_since(t0);
    const std::string d = fmt("50 systems x 50 rhs, worst error %.3e, %lld rows rewritten, %.1fs",
                              worst, static_cast<long long>(rewritten), elapsed);
    return elapsed < kPropertySeconds ? pass(d) : fail(d + " (too slow)");
}

Result criterion_4()
{
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const auto lower = draw_system(rng, 1, 64);
        const auto b = random_rhs(lower.n(), rng());
        const auto ref = testing::dense_forward(testing::to_dense(lower), b);
        worst = std::max(worst, testing::max_rel_error(ref, serial_sptrsv(lower, b).x));
    }
    const std::string d = fmt("200 systems, worst error %.3e", worst);
    return worst <= kOracleTolerance ? pass(d) : fail(d);
}

Result criterion_5()
{
    std::mt19937_64 rng(5);
    Index checked = 0;
    double worst = 0.0;
    for (int k = 0; k < 40; ++k) {
        const auto lower = draw_system(rng, 10, 200);
        auto sys = init_equations(lower);
        const auto dense = testing::to_dense(lower);
        std::uniform_int_distribution<Index> row(1, lower.n() - 1);
        for (int s = 0; s < 10; ++s) {
            const Index i = row(rng);
            if (sys[i].x_terms.empty())
                continue;
            std::uniform_int_distribution<std::size_t> term(0, sys[i].x_terms.size() - 1);
            const Index j = sys[i].x_terms[term(rng)].index;
            const Equation before = sys[i];
            substitute(sys, i, j);
            ++checked;
            const Equation& after = sys[i];
            if (after.find_x(j) != nullptr)
                return fail(fmt("x[%lld] still present in row %lld", static_cast<long long>(j),
                                static_cast<long long>(i)));
            auto strictly_increasing = [](const std::vector<Term>& terms) {
                return std::adjacent_find(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
                           return a.index >= b.index;
                       }) == terms.end();
            };
            if (!strictly_increasing(after.x_terms) || !strictly_increasing(after.b_terms))
                return fail(fmt("row %lld holds a duplicate index", static_cast<long long>(i)));
            for (int t = 0; t < 20; ++t) {
                const auto b = random_rhs(lower.n(), rng());
                const auto x = testing::dense_forward(dense, b);
                const double ref = before.evaluate(b, x);
                const double err = std::fabs(after.evaluate(b, x) - ref) / std::max(1.0, std::fabs(ref));
                worst = std::max(worst, err);
            }
        }
    }
    const std::string d = fmt("%lld substitutions, worst relative change %.3e",
                              static_cast<long long>(checked), worst);
    return worst <= kSubstituteTolerance ? pass(d) : fail(d);
}

std::vector<std::pair<std::string, LowerTriangularSystem>> test_matrices()
{
    std::vector<std::pair<std::string, LowerTriangularSystem>> out;
    out.emplace_back("four_row", testing::four_row_system());
    out.emplace_back("identity", testing::identity(1000));
    out.emplace_back("chain", testing::chain(5000));
    std::mt19937_64 rng(6);
    for (int k = 0; k < 40; ++k)
        out.emplace_back("random" + std::to_string(k), draw_system(rng, 2, 5000 / (k % 4 == 0 ? 1 : 10)));
    return out;
}

// Longest dependency path ending at every row, by iterative DFS over the
// matrix columns. Independent of build_dag / compute_levels.
std::vector<Index> longest_paths(const LowerTriangularSystem& lower)
{
    const Index n = lower.n();
    std::vector<Index> depth(static_cast<std::size_t>(n), -1);
    std::vector<std::pair<Index, std::size_t>> stack;
    for (Index root = 0; root < n; ++root) {
        if (depth[root] >= 0)
            continue;
        stack.push_back({root, 0});
        while (!stack.empty()) {
            auto& [i, next] = stack.back();
            const auto cols = lower.off_cols(i);
            if (next < cols.size()) {
                const Index j = cols[next++];
                if (depth[j] < 0)
                    stack.push_back({j, 0});
                continue;
            }
            Index d = 0;
            for (Index j : cols)
                d = std::max(d, depth[j] + 1);
            depth[i] = d;
            stack.pop_back();
        }
    }
    return depth;
}

Result criterion_6()
{
    Index matrices = 0;
    for (const auto& [name, lower] : test_matrices()) {
        const auto sched = compute_levels(build_dag(lower));
        const Index n = lower.n();
        for (Index i = 0; i < n; ++i) {
            Level expected = 0;
            for (Index j : lower.off_cols(i))
                expected = std::max(expected, sched.level_of[j] + 1);
            if (sched.level_of[i] != expected)
                return fail(name + ": wrong level for row " + std::to_string(i));
        }
        std::vector<int> seen(static_cast<std::size_t>(n), 0);
        for (Level l = 0; l < sched.num_levels(); ++l)
            for (Index i : sched.levels[l]) {
                if (sched.level_of[i] != l)
                    return fail(name + ": row listed under the wrong level");
                ++seen[i];
            }
        if (!std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }))
            return fail(name + ": levels do not partition the rows");
        const auto depth = longest_paths(lower);
        const Index longest = *std::max_element(depth.begin(), depth.end());
        if (sched.num_levels() != longest + 1)
            return fail(name + fmt(": %lld levels, longest path %lld",
                                   static_cast<long long>(sched.num_levels()),
                                   static_cast<long long>(longest)));
        ++matrices;
    }
    return pass(fmt("%lld matrices", static_cast<long long>(matrices)));
}

Result criterion_7()
{
    for (const auto& c : testing::golden_cases()) {
        const auto first = testing::golden_bundle(c);
        const auto second = testing::golden_bundle(c);
        if (!(first == second))
            return fail(c.dir + ": two emissions differ");
        const auto dir = testing::golden_root() / c.dir;
        for (const SourceFile* f : first.files()) {
            if (!std::filesystem::exists(dir / f->name))
                return fail(c.dir + "/" + f->name + " missing from the golden tree");
            if (testing::read_text(dir / f->name) != f->text)
                return fail(c.dir + "/" + f->name + " differs from the golden copy");
        }
    }
    return pass("4 bundles byte-identical to " + testing::golden_root().string());
}

Result criterion_8()
{
    if (!testing::have_c_toolchain())
        return not_run("no C compiler or make on PATH");
    const bool openmp = testing::have_openmp();
    testing::TempDir tmp("acceptance");
    std::mt19937_64 rng(8);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const auto lower = draw_system(rng, 2, 200);
        auto sys = init_equations(lower);
        auto sched = compute_levels(sys);
        rewrite_thin_levels(sys, sched, {});
        const auto b = random_rhs(lower.n(), rng());
        const auto expected = evaluate_equations(sys, sched, b);
        double sum = 0.0;
        for (double v : expected.x)
            sum += v;

        CodegenOptions opts;
        opts.embed_rhs = k % 4 >= 2;
        opts.parallel = openmp && k % 2 == 1;
        opts.split_threshold = 16;
        if (opts.embed_rhs)
            opts.rhs = b;
        const auto bundle = emit_bundle(plan_codegen(sched, sys, opts), sys, lower);
        const auto dir = tmp.path() / std::to_string(k);
        const auto run = testing::build_and_run(bundle, dir, b, opts.embed_rhs);
        if (!run)
            return fail(fmt("system %d: build failed: ", k) + testing::read_text(dir / "build.log"));
        if (run->exit_code != 0 || !run->checksum)
            return fail(fmt("system %d: exit %d: ", k, run->exit_code) + run->output);
        const double err = std::fabs(*run->checksum - sum) / std::max(1.0, std::fabs(sum));
        worst = std::max(worst, err);
        if (err > kCompiledTolerance)
            return fail(fmt("system %d: checksum %.17g, expected %.17g", k, *run->checksum, sum));
    }
    return pass(fmt("10 bundles built and run (OpenMP %s), worst checksum error %.3e",
                    openmp ? "on" : "off", worst));
}

Result criterion_9()
{
    auto sys = init_equations(testing::chain(10'000));
    auto levels = compute_levels(sys).level_of;
    const auto r = elevate_row(sys, levels, 9'999, 0, std::numeric_limits<std::size_t>::max());
    if (r.status != ElevateStatus::reached || r.substitutions != 9'999)
        return fail(fmt("chain: %lld substitutions", static_cast<long long>(r.substitutions)));

    Index rows = 0;
    try {
        for (const auto& [name, lower] : test_matrices()) {
            if (lower.n() > 600)
                continue;
            auto s = init_equations(lower);
            auto lv = compute_levels(s).level_of;
            for (Index i = 0; i < lower.n(); ++i) {
                const auto e = elevate_row(s, lv, i, 0, std::numeric_limits<std::size_t>::max());
                if (e.attempted > i)
                    return fail(name + ": row " + std::to_string(i) + " passed its cap");
                ++rows;
            }
            auto s2 = init_equations(lower);
            auto sched = compute_levels(s2);
            RewriteOptions opts;
            opts.thin_threshold = 4;
            opts.max_lift = LiftLimit::unlimited();
            rewrite_thin_levels(s2, sched, opts);
        }
    } catch (const std::logic_error& e) {
        return fail(e.what());
    }
    return pass(fmt("chain: 9999 substitutions; %lld rows fully elevated within the cap",
                    static_cast<long long>(rows)));
}

const char* label(Outcome o)
{
    switch (o) {
    case Outcome::pass:
        return "PASS";
    case Outcome::fail:
        return "FAIL";
    case Outcome::not_run:
        break;
    }
    return "NOT RUN";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    std::vector<int> selected;
    std::string lung2_path;
    bool fetch = false;
    app.add_option("--criteria", selected, "Criteria to run (default: all)")
        ->delimiter(',')
        ->check(CLI::Range(1, 9));
    app.add_option("--lung2", lung2_path, "Path to lung2.mtx");
    app.add_flag("--fetch", fetch, "Try to download lung2 when it is not cached");
    CLI11_PARSE(app, argc, argv);
    if (selected.empty())
        selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::sort(selected.begin(), selected.end());
    selected.erase(std::unique(selected.begin(), selected.end()), selected.end());

    std::optional<Lung2> lung2;
    auto lung2_data = [&]() -> const Lung2& {
        if (!lung2)
            lung2 = locate_lung2(lung2_path, fetch);
        return *lung2;
    };

    const std::map<int, std::pair<std::string, std::function<Result()>>> criteria = {
        {1, {"lung2 structure", [&] { return criterion_1(lung2_data()); }}},
        {2, {"lung2 thin-level elimination", [&] { return criterion_2(lung2_data()); }}},
        {3, {"value preservation after rewriting", criterion_3}},
        {4, {"serial solve vs dense oracle", criterion_4}},
        {5, {"substitution properties", criterion_5}},
        {6, {"level-schedule invariants", criterion_6}},
        {7, {"codegen determinism and golden files", criterion_7}},
        {8, {"compiled bundle equivalence", criterion_8}},
        {9, {"elevation termination", criterion_9}},
    };

    bool any_fail = false;
    bool any_not_run = false;
    for (int id : selected) {
        const auto& [name, run] = criteria.at(id);
        Result r;
        try {
            r = run();
        } catch (const std::exception& e) {
            r = fail(std::string("exception: ") + e.what());
        }
        any_fail |= r.outcome == Outcome::fail;
        any_not_run |= r.outcome == Outcome::not_run;
        std::cout << "criterion " << id << " [" << label(r.outcome) << "] " << name << ": "
                  << r.detail << std::endl;
    }
    return any_fail ? 1 : any_not_run ? 77 : 0;
}
