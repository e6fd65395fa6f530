#include "sprw/matrix_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace sprw {

namespace {

std::string lowercase(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
            ++pos;
        std::size_t start = pos;
        while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos])))
            ++pos;
        if (pos > start)
            tokens.push_back(line.substr(start, pos - start));
    }
    return tokens;
}

bool is_blank(std::string_view line)
{
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

template <typename T>
T parse_number(std::string_view token, std::int64_t line_no, const char* what)
{
    T value{};
    // from_chars rejects a leading '+', which some writers emit.
    if (!token.empty() && token.front() == '+')
        token.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw ParseError(std::string("invalid ") + what + " '" + std::string(token) + "'",
                         line_no);
    return value;
}

// Line cursor over an in-memory buffer that tracks 1-based line numbers.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    bool next(std::string_view& line)
    {
        if (pos_ >= text_.size())
            return false;
        auto end = text_.find('\n', pos_);
        if (end == std::string_view::npos)
            end = text_.size();
        line = text_.substr(pos_, end - pos_);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        pos_ = end + 1;
        ++line_no_;
        return true;
    }

    std::int64_t line_no() const noexcept { return line_no_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::int64_t line_no_ = 0;
};

}  // namespace

MatrixMarketData parse_matrix_market(std::string_view text)
{
    LineReader reader(text);
    std::string_view line;

    if (!reader.next(line))
        throw ParseError("empty input, expected %%MatrixMarket header", 1);

    auto header = split_ws(line);
    if (header.size() != 5 || lowercase(header[0]) != "%%matrixmarket")
        throw ParseError("malformed header, expected "
                         "'%%MatrixMarket matrix coordinate <field> <symmetry>'",
                         reader.line_no());
    if (lowercase(header[1]) != "matrix")
        throw ParseError("unsupported object '" + std::string(header[1]) + "'",
                         reader.line_no());
    if (lowercase(header[2]) != "coordinate")
        throw ParseError("unsupported format '" + std::string(header[2]) +
                             "', only coordinate is supported",
                         reader.line_no());

    MatrixMarketData data;
    const std::string field = lowercase(header[3]);
    if (field == "complex")
        throw UnsupportedFieldError("complex matrices are not supported");
    if (field == "pattern")
        data.pattern = true;
    else if (field != "real" && field != "integer" && field != "double")
        throw UnsupportedFieldError("unsupported field '" + std::string(header[3]) + "'");

    const std::string symmetry = lowercase(header[4]);
    if (symmetry == "general")
        data.symmetry = Symmetry::general;
    else if (symmetry == "symmetric")
        data.symmetry = Symmetry::symmetric;
    else
        throw UnsupportedFieldError("unsupported symmetry '" + std::string(header[4]) + "'");

    // Skip comments and blank lines up to the size line.
    bool have_size = false;
    while (reader.next(line)) {
        if (line.starts_with('%') || is_blank(line))
            continue;
        have_size = true;
        break;
    }
    if (!have_size)
        throw ParseError("missing size line", reader.line_no() + 1);

    auto dims = split_ws(line);
    if (dims.size() != 3)
        throw ParseError("size line must hold 'rows cols entries'", reader.line_no());
    const auto rows = parse_number<Index>(dims[0], reader.line_no(), "row count");
    const auto cols = parse_number<Index>(dims[1], reader.line_no(), "column count");
    const auto count = parse_number<Index>(dims[2], reader.line_no(), "entry count");
    if (rows < 0 || cols < 0 || count < 0)
        throw ParseError("negative size", reader.line_no());
    if (rows != cols)
        throw ShapeError("matrix is " + std::to_string(rows) + "x" + std::to_string(cols) +
                         ", only square matrices are supported");

    data.n = rows;
    data.declared_entries = count;
    data.entries.reserve(static_cast<std::size_t>(
        data.symmetry == Symmetry::symmetric ? 2 * count : count));

    const std::size_t expected_tokens = data.pattern ? 2 : 3;
    Index seen = 0;
    while (reader.next(line)) {
        if (line.starts_with('%') || is_blank(line))
            continue;
        if (seen == count)
            throw ParseError("more entries than declared (" + std::to_string(count) + ")",
                             reader.line_no());
        auto tokens = split_ws(line);
        if (tokens.size() != expected_tokens)
            throw ParseError("expected " + std::to_string(expected_tokens) +
                                 " fields, found " + std::to_string(tokens.size()),
                             reader.line_no());
        const auto i = parse_number<Index>(tokens[0], reader.line_no(), "row index");
        const auto j = parse_number<Index>(tokens[1], reader.line_no(), "column index");
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw ParseError("index (" + std::to_string(i) + ", " + std::to_string(j) +
                                 ") outside " + std::to_string(rows) + "x" +
                                 std::to_string(cols),
                             reader.line_no());
        const double v =
            data.pattern ? 1.0 : parse_number<double>(tokens[2], reader.line_no(), "value");

        data.entries.push_back({i - 1, j - 1, v});
        if (data.symmetry == Symmetry::symmetric && i != j)
            data.entries.push_back({j - 1, i - 1, v});
        ++seen;
    }
    if (seen != count)
        throw ParseError("expected " + std::to_string(count) + " entries, found " +
                             std::to_string(seen),
                         reader.line_no() + 1);
    return data;
}

MatrixMarketData read_matrix_market(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_matrix_market(buffer.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

CsrMatrix::CsrMatrix(Index n, std::vector<Index> row_ptr, std::vector<Index> col_idx,
                     std::vector<double> values)
    : n_(n), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values))
{
    if (n_ < 0)
        throw ShapeError("negative dimension");
    if (static_cast<Index>(row_ptr_.size()) != n_ + 1)
        throw ConsistencyError("row_ptr must hold n+1 offsets");
    if (col_idx_.size() != values_.size())
        throw ConsistencyError("col_idx and values differ in length");
    if (row_ptr_.front() != 0 || row_ptr_.back() != nnz())
        throw ConsistencyError("row_ptr must start at 0 and end at nnz");
    for (Index i = 0; i < n_; ++i) {
        if (row_ptr_[i] > row_ptr_[i + 1])
            throw ConsistencyError("row_ptr decreases at row " + std::to_string(i));
        for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (col_idx_[k] < 0 || col_idx_[k] >= n_)
                throw BoundsError("column " + std::to_string(col_idx_[k]) +
                                  " out of range in row " + std::to_string(i));
            if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1])
                throw ConsistencyError("columns not strictly increasing in row " +
                                       std::to_string(i));
            if (values_[k] == 0.0)
                throw ConsistencyError("explicit zero stored in row " + std::to_string(i));
        }
    }
}

std::vector<CooEntry> CsrMatrix::to_coo() const
{
    std::vector<CooEntry> out;
    out.reserve(col_idx_.size());
    for (Index i = 0; i < n_; ++i)
        for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            out.push_back({i, col_idx_[k], values_[k]});
    return out;
}

CsrMatrix to_csr(Index n, std::span<const CooEntry> entries)
{
    if (n < 0)
        throw ShapeError("negative dimension");

    // Counting sort by row, then sort each row by column and coalesce.
    std::vector<Index> counts(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& e : entries) {
        if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
            throw BoundsError("entry (" + std::to_string(e.row) + ", " +
                              std::to_string(e.col) + ") outside " + std::to_string(n) +
                              "x" + std::to_string(n));
        ++counts[e.row + 1];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());

    std::vector<std::pair<Index, double>> slots(entries.size());
    {
        std::vector<Index> fill(counts.begin(), counts.end() - 1);
        for (const auto& e : entries)
            slots[fill[e.row]++] = {e.col, e.value};
    }

    std::vector<Index> row_ptr(static_cast<std::size_t>(n) + 1, 0);
    std::vector<Index> col_idx;
    std::vector<double> values;
    col_idx.reserve(entries.size());
    values.reserve(entries.size());

    for (Index i = 0; i < n; ++i) {
        auto first = slots.begin() + counts[i];
        auto last = slots.begin() + counts[i + 1];
        // Stable so duplicates are summed in input order.
        std::stable_sort(first, last,
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto it = first; it != last;) {
            const Index col = it->first;
            double sum = 0.0;
            for (; it != last && it->first == col; ++it)
                sum += it->second;
            if (sum != 0.0) {
                col_idx.push_back(col);
                values.push_back(sum);
            }
        }
        row_ptr[i + 1] = static_cast<Index>(col_idx.size());
    }
    return CsrMatrix(n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

LowerTriangularSystem::LowerTriangularSystem(CsrMatrix lower)
    : matrix_(std::move(lower)), diag_(static_cast<std::size_t>(matrix_.n()))
{
    for (Index i = 0; i < matrix_.n(); ++i) {
        auto cols = matrix_.row_cols(i);
        // Columns are strictly increasing, so a trailing diagonal also rules
        // out entries above it.
        if (!cols.empty() && cols.back() > i)
            throw ConsistencyError("entry above the diagonal in row " + std::to_string(i));
        if (cols.empty() || cols.back() != i)
            throw SingularSystemError(i);
        diag_[i] = matrix_.row_values(i).back();
    }
}

LowerTriangularSystem extract_lower(const CsrMatrix& csr, bool unit_diagonal)
{
    const Index n = csr.n();
    std::vector<Index> row_ptr(static_cast<std::size_t>(n) + 1, 0);
    std::vector<Index> col_idx;
    std::vector<double> values;
    col_idx.reserve(static_cast<std::size_t>(csr.nnz()));
    values.reserve(static_cast<std::size_t>(csr.nnz()));

    for (Index i = 0; i < n; ++i) {
        auto cols = csr.row_cols(i);
        auto vals = csr.row_values(i);
        bool has_diag = false;
        for (std::size_t k = 0; k < cols.size() && cols[k] <= i; ++k) {
            if (cols[k] == i) {
                has_diag = true;
                col_idx.push_back(i);
                values.push_back(unit_diagonal ? 1.0 : vals[k]);
            } else {
                col_idx.push_back(cols[k]);
                values.push_back(vals[k]);
            }
        }
        if (!has_diag) {
            if (!unit_diagonal)
                throw SingularSystemError(i);
            col_idx.push_back(i);
            values.push_back(1.0);
        }
        row_ptr[i + 1] = static_cast<Index>(col_idx.size());
    }
    return LowerTriangularSystem(
        CsrMatrix(n, std::move(row_ptr), std::move(col_idx), std::move(values)));
}

}  // namespace sprw
