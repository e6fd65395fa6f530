#include "sprw/codegen.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sprw {

namespace {

constexpr const char* kGeneratedBanner = "/* Generated by sprw. Do not edit. */\n";

std::string signature(const KernelFunction& fn, bool embed_rhs)
{
    return "void " + fn.name +
           (embed_rhs ? "(double *restrict x)" : "(double *restrict x, const double *restrict b)");
}

// Appends `values` as a C initializer list, eight per line.
template <typename T, typename Fmt>
void append_initializer(std::string& out, std::span<const T> values, Fmt fmt)
{
    out += "{";
    if (values.empty()) {
        out += "0};\n";
        return;
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
        out += (k % 8 == 0) ? "\n    " : " ";
        out += fmt(values[k]);
        if (k + 1 < values.size())
            out += ",";
    }
    out += "\n};\n";
}

}  // namespace

std::string format_double(double value)
{
    if (!std::isfinite(value))
        throw CodegenError("cannot emit non-finite constant");
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{})
        throw CodegenError("failed to format constant");
    std::string text(buf.data(), ptr);
    if (text.find_first_of(".e") == std::string::npos)
        text += ".0";
    return text;
}

CodegenPlan plan_codegen(const LevelSchedule& schedule, const EquationSystem& sys,
                         const CodegenOptions& options)
{
    if (options.split_threshold < 1)
        throw CodegenError("split threshold must be at least 1");
    if (options.statements_per_file < 1)
        throw CodegenError("statements per file must be at least 1");
    if (sys.size() > options.statement_cap)
        throw CodegenError("system needs " + std::to_string(sys.size()) +
                           " statements, above the cap of " +
                           std::to_string(options.statement_cap));
    if (options.embed_rhs && static_cast<Index>(options.rhs.size()) != sys.size())
        throw CodegenError("embedding the right-hand side needs " +
                           std::to_string(sys.size()) + " values, got " +
                           std::to_string(options.rhs.size()));
    // Validates that the schedule covers sys and respects its dependencies.
    (void)level_stats(schedule, sys);

    CodegenPlan plan;
    plan.n = sys.size();
    plan.split_threshold = options.split_threshold;
    plan.embed_rhs = options.embed_rhs;
    plan.parallel = options.parallel;
    if (options.embed_rhs)
        plan.rhs = options.rhs;
    plan.num_levels = schedule.num_levels();

    Index file = 0;
    Index in_file = 0;
    for (Level l = 0; l < schedule.num_levels(); ++l) {
        const auto& rows = schedule.levels[l];
        Index part = 0;
        for (std::size_t begin = 0; begin < rows.size();
             begin += static_cast<std::size_t>(options.split_threshold)) {
            const std::size_t end =
                std::min(rows.size(), begin + static_cast<std::size_t>(options.split_threshold));
            KernelFunction fn;
            fn.name = "level" + std::to_string(l) + "_part" + std::to_string(part);
            fn.level = l;
            fn.part = part++;
            fn.rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                           rows.begin() + static_cast<std::ptrdiff_t>(end));
            const auto size = static_cast<Index>(fn.rows.size());
            if (in_file > 0 && in_file + size > options.statements_per_file) {
                ++file;
                in_file = 0;
            }
            fn.file = file;
            in_file += size;
            plan.functions.push_back(std::move(fn));
        }
    }
    plan.num_kernel_files = plan.functions.empty() ? 0 : file + 1;
    return plan;
}

std::string render_statement(const Equation& eq, const CodegenPlan& plan)
{
    std::string out = "x[" + std::to_string(eq.row) + "] = ";
    bool first = true;
    auto sep = [&] {
        if (!first)
            out += " + ";
        first = false;
    };
    if (plan.embed_rhs) {
        double constant = 0.0;
        for (const auto& t : eq.b_terms)
            constant += t.coeff * plan.rhs[t.index];
        sep();
        out += format_double(constant);
    } else {
        for (const auto& t : eq.b_terms) {
            sep();
            out += format_double(t.coeff) + "*b[" + std::to_string(t.index) + "]";
        }
    }
    for (const auto& t : eq.x_terms) {
        sep();
        out += format_double(t.coeff) + "*x[" + std::to_string(t.index) + "]";
    }
    if (first)
        out += "0.0";
    out += ";";
    return out;
}

std::vector<SourceFile> emit_kernels(const CodegenPlan& plan, const EquationSystem& sys)
{
    if (plan.n != sys.size())
        throw ConsistencyError("plan and equation system differ in size");
    std::vector<SourceFile> files(static_cast<std::size_t>(plan.num_kernel_files));
    for (Index f = 0; f < plan.num_kernel_files; ++f) {
        files[f].name = "kernels_" + std::to_string(f) + ".c";
        files[f].text = kGeneratedBanner;
        files[f].text += "/* Specialized triangular solve kernels, file " + std::to_string(f + 1) +
                         " of " + std::to_string(plan.num_kernel_files) + ". */\n";
    }
    for (const auto& fn : plan.functions) {
        auto& text = files[fn.file].text;
        text += "\n" + signature(fn, plan.embed_rhs) + "\n{\n";
        for (Index row : fn.rows) {
            text += "    ";
            text += render_statement(sys[row], plan);
            text += "\n";
        }
        text += "}\n";
    }
    return files;
}

SourceFile emit_driver(const CodegenPlan& plan)
{
    std::ostringstream out;
    const char* args = plan.embed_rhs ? "x" : "x, b";

    out << kGeneratedBanner
        << "/* Driver: runs the specialized solve, times it and checks it against the\n"
           "   generic CSR solver in fallback.c. */\n"
           "#define _POSIX_C_SOURCE 199309L\n"
           "#include <math.h>\n"
           "#include <stdio.h>\n"
           "#include <stdlib.h>\n"
           "#include <string.h>\n"
           "#include <time.h>\n\n"
        << "#define N_ROWS " << plan.n << "L\n\n";

    for (const auto& fn : plan.functions)
        out << signature(fn, plan.embed_rhs) << ";\n";
    out << "void fallback_solve(const double *b, double *x);\n";
    if (plan.embed_rhs)
        out << "const double *fallback_rhs(void);\n";
    out << "\n";

    out << "static void solve(double *restrict x"
        << (plan.embed_rhs ? "" : ", const double *restrict b") << ")\n{\n";
    if (plan.parallel) {
        out << "#pragma omp parallel\n"
               "#pragma omp single\n"
               "    {\n";
        Level current = -1;
        for (const auto& fn : plan.functions) {
            if (fn.level != current) {
                if (current >= 0)
                    out << "#pragma omp taskwait\n";
                current = fn.level;
                out << "        /* level " << fn.level << " */\n";
            }
            out << "#pragma omp task\n"
                << "        " << fn.name << "(" << args << ");\n";
        }
        out << "    }\n";
    } else {
        for (const auto& fn : plan.functions)
            out << "    " << fn.name << "(" << args << ");\n";
    }
    if (plan.functions.empty())
        out << "    (void)x;\n";
    out << "}\n\n";

    out << "static double now_ms(void)\n"
           "{\n"
           "    struct timespec ts;\n"
           "    clock_gettime(CLOCK_MONOTONIC, &ts);\n"
           "    return (double)ts.tv_sec * 1e3 + (double)ts.tv_nsec * 1e-6;\n"
           "}\n\n";

    if (!plan.embed_rhs) {
        out << "/* Reads N_ROWS little-endian IEEE-754 doubles. */\n"
               "static int load_rhs(const char *path, double *b)\n"
               "{\n"
               "    FILE *f = fopen(path, \"rb\");\n"
               "    if (!f) {\n"
               "        perror(path);\n"
               "        return -1;\n"
               "    }\n"
               "    for (long i = 0; i < N_ROWS; ++i) {\n"
               "        unsigned char bytes[8];\n"
               "        unsigned long long bits = 0;\n"
               "        if (fread(bytes, 1, 8, f) != 8) {\n"
               "            fprintf(stderr, \"%s: expected %ld values\\n\", path, N_ROWS);\n"
               "            fclose(f);\n"
               "            return -1;\n"
               "        }\n"
               "        for (int k = 7; k >= 0; --k)\n"
               "            bits = (bits << 8) | bytes[k];\n"
               "        memcpy(&b[i], &bits, sizeof b[i]);\n"
               "    }\n"
               "    fclose(f);\n"
               "    return 0;\n"
               "}\n\n";
    }

    out << "int main(int argc, char **argv)\n{\n";
    if (plan.embed_rhs) {
        out << "    int repeats = argc > 1 ? atoi(argv[1]) : 10;\n"
               "    const double *b = fallback_rhs();\n";
    } else {
        out << "    if (argc < 2) {\n"
               "        fprintf(stderr, \"usage: %s <rhs.bin> [repeats]\\n\", argv[0]);\n"
               "        return 1;\n"
               "    }\n"
               "    int repeats = argc > 2 ? atoi(argv[2]) : 10;\n"
               "    double *b = malloc((N_ROWS + 1) * sizeof *b);\n"
               "    if (!b || load_rhs(argv[1], b) != 0)\n"
               "        return 1;\n";
    }
    out << "    if (repeats < 1)\n"
           "        repeats = 1;\n"
           "    double *x = calloc(N_ROWS + 1, sizeof *x);\n"
           "    double *ref = calloc(N_ROWS + 1, sizeof *ref);\n"
           "    if (!x || !ref)\n"
           "        return 1;\n\n"
           "    double start = now_ms();\n"
           "    for (int r = 0; r < repeats; ++r)\n"
        << "        solve(" << args << ");\n"
        << "    double elapsed = (now_ms() - start) / repeats;\n\n"
           "    double checksum = 0.0;\n"
           "    for (long i = 0; i < N_ROWS; ++i)\n"
           "        checksum += x[i];\n\n"
           "    fallback_solve(b, ref);\n"
           "    double scale = 1.0;\n"
           "    for (long i = 0; i < N_ROWS; ++i)\n"
           "        if (fabs(ref[i]) > scale)\n"
           "            scale = fabs(ref[i]);\n"
           "    double err = 0.0;\n"
           "    for (long i = 0; i < N_ROWS; ++i) {\n"
           "        double d = fabs(x[i] - ref[i]) / scale;\n"
           "        if (!(d <= err))\n"
           "            err = d;\n"
           "    }\n\n"
           "    printf(\"checksum=%.17g\\n\", checksum);\n"
           "    printf(\"time_ms=%.6f\\n\", elapsed);\n"
           "    printf(\"selfcheck_error=%.3e\\n\", err);\n\n"
           "    free(ref);\n"
           "    free(x);\n";
    if (!plan.embed_rhs)
        out << "    free(b);\n";
    out << "    return err <= 1e-10 ? 0 : 2;\n"
           "}\n";
    return {"driver.c", out.str()};
}

SourceFile emit_fallback(const CodegenPlan& plan, const LowerTriangularSystem& lower)
{
    if (plan.n != lower.n())
        throw ConsistencyError("plan and matrix differ in size");
    const auto& m = lower.matrix();
    std::string out = kGeneratedBanner;
    out += "/* Generic CSR forward substitution over the same matrix, used to\n"
           "   self-check the specialized kernels. The diagonal is the last entry\n"
           "   of every row. */\n\n";
    out += "#define N_ROWS " + std::to_string(plan.n) + "L\n\n";

    auto as_int = [](Index v) { return std::to_string(v); };
    out += "static const long row_ptr[" + std::to_string(m.row_ptr().size()) + "] = ";
    append_initializer<Index>(out, m.row_ptr(), as_int);
    out += "\nstatic const long col_idx[" + std::to_string(std::max<Index>(1, m.nnz())) + "] = ";
    append_initializer<Index>(out, m.col_idx(), as_int);
    out += "\nstatic const double values[" + std::to_string(std::max<Index>(1, m.nnz())) + "] = ";
    append_initializer<double>(out, m.values(), format_double);
    if (plan.embed_rhs) {
        out += "\nstatic const double rhs[" + std::to_string(std::max<Index>(1, plan.n)) + "] = ";
        append_initializer<double>(out, plan.rhs, format_double);
    }

    out += "\nvoid sptrsv_csr(long n, const long *rp, const long *ci, const double *v,\n"
           "                const double *b, double *x)\n"
           "{\n"
           "    for (long i = 0; i < n; ++i) {\n"
           "        double sum = b[i];\n"
           "        long diag = rp[i + 1] - 1;\n"
           "        for (long k = rp[i]; k < diag; ++k)\n"
           "            sum -= v[k] * x[ci[k]];\n"
           "        x[i] = sum / v[diag];\n"
           "    }\n"
           "}\n\n"
           "void fallback_solve(const double *b, double *x)\n"
           "{\n"
           "    sptrsv_csr(N_ROWS, row_ptr, col_idx, values, b, x);\n"
           "}\n";
    if (plan.embed_rhs)
        out += "\nconst double *fallback_rhs(void)\n"
               "{\n"
               "    return rhs;\n"
               "}\n";
    return {"fallback.c", std::move(out)};
}

SourceFile emit_makefile(const CodegenPlan& plan)
{
    std::string sources = "driver.c fallback.c";
    for (Index f = 0; f < plan.num_kernel_files; ++f)
        sources += " kernels_" + std::to_string(f) + ".c";

    std::string out;
    out += "# Generated by sprw. Do not edit.\n"
           "# Builds the specialized triangular solver with a single `make`.\n\n"
           "CC ?= cc\n"
           "CFLAGS ?= -O2\n";
    out += plan.parallel ? "OPENMP_FLAGS = -fopenmp\n" : "OPENMP_FLAGS =\n";
    out += "LDLIBS = -lm\n\n";
    out += "SOURCES = " + sources + "\n";
    out += "OBJECTS = $(SOURCES:.c=.o)\n\n"
           "all: " + std::string(kBinaryName) + "\n\n" +
           std::string(kBinaryName) + ": $(OBJECTS)\n"
           "\t$(CC) $(CFLAGS) $(OPENMP_FLAGS) -o $@ $(OBJECTS) $(LDLIBS)\n\n"
           "%.o: %.c\n"
           "\t$(CC) $(CFLAGS) $(OPENMP_FLAGS) -c -o $@ $<\n\n"
           "clean:\n"
           "\trm -f " + std::string(kBinaryName) + " $(OBJECTS)\n\n"
           ".PHONY: all clean\n";
    return {"Makefile", std::move(out)};
}

std::vector<const SourceFile*> SourceBundle::files() const
{
    std::vector<const SourceFile*> out;
    for (const auto& k : kernels)
        out.push_back(&k);
    out.push_back(&driver);
    out.push_back(&fallback);
    out.push_back(&makefile);
    return out;
}

SourceBundle emit_bundle(const CodegenPlan& plan, const EquationSystem& sys,
                         const LowerTriangularSystem& lower)
{
    SourceBundle bundle;
    bundle.kernels = emit_kernels(plan, sys);
    bundle.driver = emit_driver(plan);
    bundle.fallback = emit_fallback(plan, lower);
    bundle.makefile = emit_makefile(plan);
    return bundle;
}

void write_bundle(const SourceBundle& bundle, const std::filesystem::path& dir, bool overwrite)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::exists(dir, ec)) {
        if (!fs::is_directory(dir, ec))
            throw IoError("'" + dir.string() + "' exists and is not a directory");
        if (!fs::is_empty(dir, ec) && !overwrite)
            throw IoError("output directory '" + dir.string() +
                          "' is not empty (pass the overwrite flag to replace it)");
        // Stale kernel files from a larger previous bundle would be picked
        // up by a glob, so remove them.
        for (const auto& entry : fs::directory_iterator(dir, ec)) {
            const auto name = entry.path().filename().string();
            if (name.starts_with("kernels_") && name.ends_with(".c"))
                fs::remove(entry.path(), ec);
        }
    }
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create '" + dir.string() + "': " + ec.message());

    for (const SourceFile* file : bundle.files()) {
        const auto path = dir / file->name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(file->text.data(), static_cast<std::streamsize>(file->text.size()));
        if (!out)
            throw IoError("failed to write '" + path.string() + "'");
    }
}

void write_rhs_file(const std::filesystem::path& path, std::span<const double> b)
{
    std::string bytes;
    bytes.reserve(b.size() * 8);
    for (double v : b) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        for (int k = 0; k < 8; ++k) {
            bytes.push_back(static_cast<char>(bits & 0xffu));
            bits >>= 8;
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("failed to write '" + path.string() + "'");
}

std::vector<double> read_rhs_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0)
        throw IoError("'" + path.string() + "' is not a whole number of doubles");
    std::vector<double> b(bytes.size() / 8);
    for (std::size_t i = 0; i < b.size(); ++i) {
        std::uint64_t bits = 0;
        for (int k = 7; k >= 0; --k)
            bits = (bits << 8) | static_cast<unsigned char>(bytes[8 * i + static_cast<std::size_t>(k)]);
        b[i] = std::bit_cast<double>(bits);
    }
    return b;
}

}  // namespace sprw
