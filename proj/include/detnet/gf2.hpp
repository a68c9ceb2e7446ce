#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace detnet {

/// Bit vector over GF(2); every entry is 0 or 1.
using Bits = std::vector<std::uint8_t>;

/// Dense matrix over GF(2), row-major, each row packed into 64-bit words.
///
/// All arithmetic is modulo 2.  Dimensions may be zero; a 0 x n or n x 0
/// matrix has rank 0.
class GF2Matrix {
public:
    GF2Matrix() = default;
    GF2Matrix(std::size_t rows, std::size_t cols);

    static GF2Matrix identity(std::size_t n);
    /// Builds from explicit 0/1 rows; all rows must have equal length.
    static GF2Matrix from_rows(const std::vector<Bits>& rows);
    static GF2Matrix column(std::span<const std::uint8_t> bits);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    bool get(std::size_t r, std::size_t c) const;
    void set(std::size_t r, std::size_t c, bool value = true);
    void flip(std::size_t r, std::size_t c);

    bool is_zero() const;
    std::size_t rank() const;

    GF2Matrix transpose() const;
    GF2Matrix operator*(const GF2Matrix& rhs) const;
    GF2Matrix& operator+=(const GF2Matrix& rhs);
    GF2Matrix operator+(const GF2Matrix& rhs) const;
    Bits apply(std::span<const std::uint8_t> x) const;

    /// Copies `block` into this matrix with its top-left corner at (row, col).
    void set_block(std::size_t row, std::size_t col, const GF2Matrix& block);
    /// XORs `block` into this matrix at (row, col).
    void add_block(std::size_t row, std::size_t col, const GF2Matrix& block);
    GF2Matrix block(std::size_t row, std::size_t col, std::size_t rows, std::size_t cols) const;

    GF2Matrix select_columns(std::span<const std::size_t> columns) const;
    GF2Matrix select_rows(std::span<const std::size_t> rows) const;

    static GF2Matrix hstack(std::span<const GF2Matrix> parts, std::size_t rows);
    static GF2Matrix vstack(std::span<const GF2Matrix> parts, std::size_t cols);

    /// Reduced row echelon form with zero rows dropped: a canonical basis of
    /// the row space.
    GF2Matrix row_basis() const;
    /// Indices of pivot columns of the row echelon form, ascending.
    std::vector<std::size_t> pivot_columns() const;
    /// Basis of {x : A x = 0}, one basis vector per column.
    GF2Matrix null_space() const;
    /// Basis of {w : w A = 0}, one basis vector per row.
    GF2Matrix left_null_space() const;
    /// Inverse of a square nonsingular matrix; throws InvalidArgument otherwise.
    GF2Matrix inverse() const;
    /// C with C * A = I for A of full column rank; throws InvalidArgument otherwise.
    GF2Matrix left_inverse() const;

    /// True when every row of `other` lies in the row space of this matrix.
    bool row_space_contains(const GF2Matrix& other) const;

    /// Row `r` as a hex string, most significant nibble first; bit c is
    /// nibble c/4, position 3 - c%4.  The last nibble is zero padded.
    std::string row_hex(std::size_t r) const;
    static GF2Matrix from_hex_rows(const std::vector<std::string>& rows, std::size_t cols);

    std::string to_string() const;

    friend bool operator==(const GF2Matrix& a, const GF2Matrix& b) = default;
    friend auto operator<=>(const GF2Matrix& a, const GF2Matrix& b) = default;

private:
    std::uint64_t* row_ptr(std::size_t r) { return data_.data() + r * words_; }
    const std::uint64_t* row_ptr(std::size_t r) const { return data_.data() + r * words_; }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> data_;
};

}  // namespace detnet
