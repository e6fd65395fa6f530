#include <doctest.h>

#include <cstdlib>
#include <random>
#include <regex>

#include "bundle_support.hpp"
#include "sprw/executor.hpp"
#include "sprw/rewrite.hpp"

using namespace sprw;

namespace {

std::size_t count(const std::string& text, const std::string& needle)
{
    std::size_t n = 0;
    for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1))
        ++n;
    return n;
}

std::string all_kernels(const SourceBundle& bundle)
{
    std::string text;
    for (const auto& k : bundle.kernels)
        text += k.text;
    return text;
}

CodegenPlan plan_for(const EquationSystem& sys, CodegenOptions opts = {})
{
    return plan_codegen(compute_levels(sys), sys, opts);
}

}  // namespace

TEST_CASE("format_double")
{
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(2.0) == "2.0");
    CHECK(format_double(-3.0) == "-3.0");
    CHECK(format_double(1e300) == "1e+300");
    CHECK(format_double(0.1) == "0.1");
    CHECK_THROWS_AS(format_double(std::nan("")), CodegenError);

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unit(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
        const double v = unit(rng);
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("render_statement")
{
    const auto sys = init_equations(testing::four_row_system());
    SUBCASE("default mode reads b")
    {
        const auto plan = plan_for(sys);
        CHECK(render_statement(sys[2], plan) == "x[2] = 0.5*b[2] + 0.5*x[1];");
        CHECK(render_statement(sys[0], plan) == "x[0] = 0.5*b[0];");
    }
    SUBCASE("embed mode folds b into one constant")
    {
        CodegenOptions opts;
        opts.embed_rhs = true;
        opts.rhs = {1.0, 1.0, 4.0, 1.0};
        const auto plan = plan_for(sys, opts);
        CHECK(render_statement(sys[2], plan) == "x[2] = 2.0 + 0.5*x[1];");
    }
    SUBCASE("rewritten row with several b-terms")
    {
        auto rewritten = init_equations(testing::chain(3, 2.0, 1.0));
        substitute(rewritten, 2, 1);
        const auto plan = plan_for(rewritten);
        CHECK(render_statement(rewritten[2], plan) == "x[2] = -0.25*b[1] + 0.5*b[2] + 0.25*x[0];");
    }
}

TEST_CASE("plan_codegen splits thick levels")
{
    const auto sys = init_equations(testing::identity(5));
    CodegenOptions opts;
    opts.split_threshold = 2;
    const auto plan = plan_for(sys, opts);
    REQUIRE(plan.functions.size() == 3);
    CHECK(plan.functions[0].name == "level0_part0");
    CHECK(plan.functions[2].name == "level0_part2");
    CHECK(plan.functions[0].rows == std::vector<Index>{0, 1});
    CHECK(plan.functions[1].rows == std::vector<Index>{2, 3});
    CHECK(plan.functions[2].rows == std::vector<Index>{4});

    opts.split_threshold = 5;
    CHECK(plan_for(sys, opts).functions.size() == 1);
}

TEST_CASE("plan_codegen limits")
{
    const auto sys = init_equations(testing::chain(10));
    CodegenOptions opts;
    opts.statement_cap = 9;
    CHECK_THROWS_AS(plan_for(sys, opts), CodegenError);
    opts.statement_cap = 10;
    CHECK_NOTHROW(plan_for(sys, opts));

    CodegenOptions embed;
    embed.embed_rhs = true;
    CHECK_THROWS_AS(plan_for(sys, embed), CodegenError);

    CodegenOptions files;
    files.statements_per_file = 3;
    const auto plan = plan_for(sys, files);
    CHECK(plan.num_kernel_files == 4);

    const auto stale = schedule_from_levels(std::vector<Level>(10, 0));
    CHECK_THROWS_AS(plan_codegen(stale, sys, {}), ConsistencyError);
}

TEST_CASE("emitted kernels mirror the equations")
{
    std::mt19937_64 rng(43);
    const auto lower = testing::random_lower(rng, 80, 0.05);
    auto sys = init_equations(lower);
    auto sched = compute_levels(sys);
    rewrite_thin_levels(sys, sched, {});
    const auto plan = plan_codegen(sched, sys, {});
    const auto bundle = emit_bundle(plan, sys, lower);
    const auto text = all_kernels(bundle);

    std::size_t b_terms = 0;
    std::size_t x_terms = 0;
    for (const auto& eq : sys.equations()) {
        b_terms += eq.b_terms.size();
        x_terms += eq.x_terms.size();
    }
    CHECK(count(text, "b[") == b_terms);
    CHECK(count(text, "x[") == x_terms + 80);  // plus one assignment per row
    CHECK(count(text, "\nvoid level") == plan.functions.size());
}

TEST_CASE("driver structure")
{
    const auto sys = init_equations(testing::four_row_system());
    SUBCASE("serial calls every function in level order")
    {
        const auto driver = emit_driver(plan_for(sys)).text;
        CHECK(count(driver, "#pragma omp") == 0);
        const auto a = driver.find("    level0_part0(x, b);");
        const auto d = driver.find("    level3_part0(x, b);");
        REQUIRE(a != std::string::npos);
        REQUIRE(d != std::string::npos);
        CHECK(a < d);
    }
    SUBCASE("parallel uses one task per function and a taskwait between levels")
    {
        CodegenOptions opts;
        opts.parallel = true;
        opts.split_threshold = 1;
        const auto identity = init_equations(testing::identity(3));
        const auto driver = emit_driver(plan_for(identity, opts)).text;
        CHECK(count(driver, "#pragma omp task\n") == 3);
        CHECK(count(driver, "#pragma omp taskwait") == 0);

        const auto chain_driver = emit_driver(plan_for(sys, opts)).text;
        CHECK(count(chain_driver, "#pragma omp task\n") == 4);
        CHECK(count(chain_driver, "#pragma omp taskwait") == 3);
        CHECK(count(chain_driver, "#pragma omp parallel") == 1);
        CHECK(count(chain_driver, "#pragma omp single") == 1);
        CHECK(emit_makefile(plan_for(sys, opts)).text.find("-fopenmp") != std::string::npos);
    }
}

TEST_CASE("golden bundles are deterministic and match the checked-in copies")
{
    const bool update = std::getenv("SPRW_UPDATE_GOLDEN") != nullptr;
    for (const auto& c : testing::golden_cases()) {
        CAPTURE(c.dir);
        const auto bundle = testing::golden_bundle(c);
        CHECK(bundle == testing::golden_bundle(c));
        const auto dir = testing::golden_root() / c.dir;
        if (update)
            write_bundle(bundle, dir, true);
        for (const SourceFile* file : bundle.files()) {
            CAPTURE(file->name);
            REQUIRE(std::filesystem::exists(dir / file->name));
            CHECK(testing::read_text(dir / file->name) == file->text);
        }
        std::size_t on_disk = 0;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            (void)entry;
            ++on_disk;
        }
        CHECK(on_disk == bundle.files().size());
    }
}

TEST_CASE("write_bundle and right-hand-side files")
{
    testing::TempDir tmp("bundle");
    const auto bundle = testing::golden_bundle(testing::golden_cases()[0]);
    const auto out = tmp.path() / "out";
    write_bundle(bundle, out);
    CHECK(std::filesystem::exists(out / "kernels_0.c"));
    CHECK(std::filesystem::exists(out / "driver.c"));
    CHECK(std::filesystem::exists(out / "fallback.c"));
    CHECK(std::filesystem::exists(out / "Makefile"));
    CHECK_THROWS_AS(write_bundle(bundle, out), IoError);
    testing::write_text(out / "kernels_9.c", "stale");
    CHECK_NOTHROW(write_bundle(bundle, out, true));
    CHECK_FALSE(std::filesystem::exists(out / "kernels_9.c"));

    const std::vector<double> b = {1.0, -0.0, 1e-300, 3.141592653589793};
    write_rhs_file(tmp.path() / "b.bin", b);
    CHECK(std::filesystem::file_size(tmp.path() / "b.bin") == 32);
    const auto back = read_rhs_file(tmp.path() / "b.bin");
    CHECK(back == b);
    CHECK(std::signbit(back[1]));
    testing::write_text(tmp.path() / "bad.bin", "12345");
    CHECK_THROWS_AS(read_rhs_file(tmp.path() / "bad.bin"), IoError);
}

TEST_CASE("emitted bundle compiles and matches evaluate_equations")
{
    if (!testing::have_c_toolchain()) {
        MESSAGE("no C compiler or make; skipping");
        return;
    }
    testing::TempDir tmp("run");
    std::mt19937_64 rng(47);
    const auto lower = testing::random_lower(rng, 60, 0.05);
    auto sys = init_equations(lower);
    auto sched = compute_levels(sys);
    rewrite_thin_levels(sys, sched, {});
    const auto b = random_rhs(60, 5);
    const auto expected = evaluate_equations(sys, sched, b);
    double sum = 0.0;
    for (double v : expected.x)
        sum += v;

    for (bool embed : {false, true}) {
        for (bool parallel : {false, true}) {
            if (parallel && !testing::have_openmp())
                continue;
            CAPTURE(embed);
            CAPTURE(parallel);
            CodegenOptions opts;
            opts.embed_rhs = embed;
            opts.parallel = parallel;
            opts.split_threshold = 3;
            if (embed)
                opts.rhs = b;
            const auto bundle = emit_bundle(plan_codegen(sched, sys, opts), sys, lower);
            const auto dir = tmp.path() / (std::string(embed ? "e" : "d") + (parallel ? "p" : "s"));
            const auto run = testing::build_and_run(bundle, dir, b, embed);
            REQUIRE_MESSAGE(run.has_value(), testing::read_text(dir / "build.log"));
            CHECK(run->exit_code == 0);
            REQUIRE(run->checksum.has_value());
            CHECK(std::fabs(*run->checksum - sum) <= 1e-10 * std::max(1.0, std::fabs(sum)));
            REQUIRE(run->selfcheck_error.has_value());
            CHECK(*run->selfcheck_error <= 1e-10);
        }
    }
}
