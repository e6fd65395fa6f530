#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "sprw/common.hpp"

namespace sprw {

struct CooEntry {
    Index row = 0;
    Index col = 0;
    double value = 0.0;

    friend bool operator==(const CooEntry&, const CooEntry&) = default;
};

enum class Symmetry { general, symmetric };

/// Result of reading a Matrix Market coordinate file.
///
/// Entries are 0-based, symmetric files are already expanded to both
/// triangles, and pattern files carry value 1.0. Duplicate coordinates are
/// left in place; to_csr() sums them.
struct MatrixMarketData {
    Index n = 0;
    std::vector<CooEntry> entries;
    Symmetry symmetry = Symmetry::general;
    bool pattern = false;
    Index declared_entries = 0;  // count on the size line
};

MatrixMarketData parse_matrix_market(std::string_view text);
MatrixMarketData read_matrix_market(const std::filesystem::path& path);

/// Square compressed-sparse-row matrix.
///
/// Invariants (checked on construction): row_ptr has n+1 non-decreasing
/// offsets starting at 0 and ending at nnz, columns are strictly increasing
/// within each row, and no stored value is exactly zero.
class CsrMatrix {
public:
    CsrMatrix() : row_ptr_{0} {}
    CsrMatrix(Index n, std::vector<Index> row_ptr, std::vector<Index> col_idx,
              std::vector<double> values);

    Index n() const noexcept { return n_; }
    Index nnz() const noexcept { return static_cast<Index>(col_idx_.size()); }

    std::span<const Index> row_ptr() const noexcept { return row_ptr_; }
    std::span<const Index> col_idx() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const Index> row_cols(Index i) const noexcept {
        return std::span<const Index>(col_idx_).subspan(
            row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
    }
    std::span<const double> row_values(Index i) const noexcept {
        return std::span<const double>(values_).subspan(
            row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
    }

    std::vector<CooEntry> to_coo() const;

    friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

private:
    Index n_ = 0;
    std::vector<Index> row_ptr_;
    std::vector<Index> col_idx_;
    std::vector<double> values_;
};

/// Builds CSR storage from unordered coordinates. Duplicates are summed and
/// entries whose (summed) value is exactly zero are dropped.
CsrMatrix to_csr(Index n, std::span<const CooEntry> entries);

/// Lower-triangular system L with its diagonal pulled out for O(1) access.
/// The last stored entry of every row is the (non-zero) diagonal.
class LowerTriangularSystem {
public:
    explicit LowerTriangularSystem(CsrMatrix lower);

    const CsrMatrix& matrix() const noexcept { return matrix_; }
    std::span<const double> diag() const noexcept { return diag_; }
    Index n() const noexcept { return matrix_.n(); }
    Index nnz() const noexcept { return matrix_.nnz(); }

    // Off-diagonal part of row i (everything but the trailing diagonal).
    std::span<const Index> off_cols(Index i) const noexcept {
        auto cols = matrix_.row_cols(i);
        return cols.first(cols.size() - 1);
    }
    std::span<const double> off_values(Index i) const noexcept {
        auto vals = matrix_.row_values(i);
        return vals.first(vals.size() - 1);
    }

private:
    CsrMatrix matrix_;
    std::vector<double> diag_;
};

/// Keeps entries with col <= row. With unit_diagonal every diagonal becomes
/// 1.0 (inserted where missing); otherwise a missing diagonal throws
/// SingularSystemError.
LowerTriangularSystem extract_lower(const CsrMatrix& csr, bool unit_diagonal = false);

}  // namespace sprw
