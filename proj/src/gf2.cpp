#include "detnet/gf2.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <utility>

#include "detnet/errors.hpp"

namespace detnet {

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t cols) { return (cols + kWordBits - 1) / kWordBits; }

// In-place Gauss-Jordan elimination on a row-major packed matrix.  Returns
// the pivot column of each pivot row; rows [0, pivots.size()) are the
// nonzero rows of the reduced form.
std::vector<std::size_t> eliminate(std::vector<std::uint64_t>& data, std::size_t rows, std::size_t cols,
                                   std::size_t words, bool full_reduce) {
    std::vector<std::size_t> pivots;
    std::size_t pivot_row = 0;
    for (std::size_t c = 0; c < cols && pivot_row < rows; ++c) {
        const std::size_t w = c / kWordBits;
        const std::uint64_t mask = std::uint64_t{1} << (c % kWordBits);
        std::size_t found = rows;
        for (std::size_t r = pivot_row; r < rows; ++r) {
            if (data[r * words + w] & mask) {
                found = r;
                break;
            }
        }
        if (found == rows) continue;
        if (found != pivot_row) {
            std::swap_ranges(data.begin() + static_cast<std::ptrdiff_t>(found * words),
                             data.begin() + static_cast<std::ptrdiff_t>((found + 1) * words),
                             data.begin() + static_cast<std::ptrdiff_t>(pivot_row * words));
        }
        const std::uint64_t* prow = data.data() + pivot_row * words;
        const std::size_t start = full_reduce ? 0 : pivot_row + 1;
        for (std::size_t r = start; r < rows; ++r) {
            if (r == pivot_row) continue;
            std::uint64_t* row = data.data() + r * words;
            if (row[w] & mask) {
                for (std::size_t k = w; k < words; ++k) row[k] ^= prow[k];
            }
        }
        pivots.push_back(c);
        ++pivot_row;
    }
    return pivots;
}

}  // namespace

GF2Matrix::GF2Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_(word_count(cols)), data_(rows * word_count(cols), 0) {}

GF2Matrix GF2Matrix::identity(std::size_t n) {
    GF2Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i);
    return m;
}

GF2Matrix GF2Matrix::from_rows(const std::vector<Bits>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    GF2Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw InvalidArgument("GF2Matrix::from_rows: ragged rows");
        for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rows[r][c] != 0);
    }
    return m;
}

GF2Matrix GF2Matrix::column(std::span<const std::uint8_t> bits) {
    GF2Matrix m(bits.size(), 1);
    for (std::size_t r = 0; r < bits.size(); ++r) m.set(r, 0, bits[r] != 0);
    return m;
}

bool GF2Matrix::get(std::size_t r, std::size_t c) const {
    return (row_ptr(r)[c / kWordBits] >> (c % kWordBits)) & 1U;
}

void GF2Matrix::set(std::size_t r, std::size_t c, bool value) {
    const std::uint64_t mask = std::uint64_t{1} << (c % kWordBits);
    if (value) {
        row_ptr(r)[c / kWordBits] |= mask;
    } else {
        row_ptr(r)[c / kWordBits] &= ~mask;
    }
}

void GF2Matrix::flip(std::size_t r, std::size_t c) {
    row_ptr(r)[c / kWordBits] ^= std::uint64_t{1} << (c % kWordBits);
}

bool GF2Matrix::is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](std::uint64_t w) { return w == 0; });
}

std::size_t GF2Matrix::rank() const {
    if (empty()) return 0;
    auto copy = data_;
    return eliminate(copy, rows_, cols_, words_, false).size();
}

GF2Matrix GF2Matrix::transpose() const {
    GF2Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        const std::uint64_t* row = row_ptr(r);
        for (std::size_t w = 0; w < words_; ++w) {
            std::uint64_t bits = row[w];
            while (bits != 0) {
                const auto b = static_cast<std::size_t>(std::countr_zero(bits));
                t.set(w * kWordBits + b, r);
                bits &= bits - 1;
            }
        }
    }
    return t;
}

GF2Matrix GF2Matrix::operator*(const GF2Matrix& rhs) const {
    if (cols_ != rhs.rows_) throw InvalidArgument("GF2Matrix::operator*: dimension mismatch");
    GF2Matrix out(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        const std::uint64_t* row = row_ptr(r);
        std::uint64_t* dst = out.row_ptr(r);
        for (std::size_t w = 0; w < words_; ++w) {
            std::uint64_t bits = row[w];
            while (bits != 0) {
                const auto k = w * kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
                const std::uint64_t* src = rhs.row_ptr(k);
                for (std::size_t j = 0; j < out.words_; ++j) dst[j] ^= src[j];
                bits &= bits - 1;
            }
        }
    }
    return out;
}

GF2Matrix& GF2Matrix::operator+=(const GF2Matrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw InvalidArgument("GF2Matrix::operator+: dimension mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] ^= rhs.data_[i];
    return *this;
}

GF2Matrix GF2Matrix::operator+(const GF2Matrix& rhs) const {
    GF2Matrix out = *this;
    out += rhs;
    return out;
}

Bits GF2Matrix::apply(std::span<const std::uint8_t> x) const {
    if (x.size() != cols_) throw InvalidArgument("GF2Matrix::apply: dimension mismatch");
    Bits y(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
        std::uint8_t acc = 0;
        for (std::size_t c = 0; c < cols_; ++c) acc ^= static_cast<std::uint8_t>(get(r, c) && x[c] != 0);
        y[r] = acc;
    }
    return y;
}

void GF2Matrix::set_block(std::size_t row, std::size_t col, const GF2Matrix& block) {
    if (row + block.rows_ > rows_ || col + block.cols_ > cols_) throw InvalidArgument("GF2Matrix::set_block: out of range");
    for (std::size_t r = 0; r < block.rows_; ++r)
        for (std::size_t c = 0; c < block.cols_; ++c) set(row + r, col + c, block.get(r, c));
}

void GF2Matrix::add_block(std::size_t row, std::size_t col, const GF2Matrix& block) {
    if (row + block.rows_ > rows_ || col + block.cols_ > cols_) throw InvalidArgument("GF2Matrix::add_block: out of range");
    for (std::size_t r = 0; r < block.rows_; ++r)
        for (std::size_t c = 0; c < block.cols_; ++c)
            if (block.get(r, c)) flip(row + r, col + c);
}

GF2Matrix GF2Matrix::block(std::size_t row, std::size_t col, std::size_t rows, std::size_t cols) const {
    if (row + rows > rows_ || col + cols > cols_) throw InvalidArgument("GF2Matrix::block: out of range");
    GF2Matrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out.set(r, c, get(row + r, col + c));
    return out;
}

GF2Matrix GF2Matrix::select_columns(std::span<const std::size_t> columns) const {
    GF2Matrix out(rows_, columns.size());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t j = 0; j < columns.size(); ++j) out.set(r, j, get(r, columns[j]));
    return out;
}

GF2Matrix GF2Matrix::select_rows(std::span<const std::size_t> rows) const {
    GF2Matrix out(rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy_n(row_ptr(rows[i]), words_, out.row_ptr(i));
    return out;
}

GF2Matrix GF2Matrix::hstack(std::span<const GF2Matrix> parts, std::size_t rows) {
    std::size_t cols = 0;
    for (const auto& p : parts) {
        if (p.rows_ != rows) throw InvalidArgument("GF2Matrix::hstack: row mismatch");
        cols += p.cols_;
    }
    GF2Matrix out(rows, cols);
    std::size_t offset = 0;
    for (const auto& p : parts) {
        out.set_block(0, offset, p);
        offset += p.cols_;
    }
    return out;
}

GF2Matrix GF2Matrix::vstack(std::span<const GF2Matrix> parts, std::size_t cols) {
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p.cols_ != cols) throw InvalidArgument("GF2Matrix::vstack: column mismatch");
        rows += p.rows_;
    }
    GF2Matrix out(rows, cols);
    std::size_t offset = 0;
    for (const auto& p : parts) {
        std::copy(p.data_.begin(), p.data_.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(offset * out.words_));
        offset += p.rows_;
    }
    return out;
}

GF2Matrix GF2Matrix::row_basis() const {
    auto copy = data_;
    const auto pivots = eliminate(copy, rows_, cols_, words_, true);
    GF2Matrix out(pivots.size(), cols_);
    std::copy_n(copy.begin(), pivots.size() * words_, out.data_.begin());
    return out;
}

std::vector<std::size_t> GF2Matrix::pivot_columns() const {
    auto copy = data_;
    return eliminate(copy, rows_, cols_, words_, false);
}

GF2Matrix GF2Matrix::null_space() const {
    auto copy = data_;
    const auto pivots = eliminate(copy, rows_, cols_, words_, true);
    std::vector<bool> is_pivot(cols_, false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < cols_; ++c)
        if (!is_pivot[c]) free_cols.push_back(c);
    GF2Matrix basis(cols_, free_cols.size());
    for (std::size_t j = 0; j < free_cols.size(); ++j) {
        const std::size_t f = free_cols[j];
        basis.set(f, j);
        for (std::size_t i = 0; i < pivots.size(); ++i) {
            const std::uint64_t* row = copy.data() + i * words_;
            if ((row[f / kWordBits] >> (f % kWordBits)) & 1U) basis.set(pivots[i], j);
        }
    }
    return basis;
}

GF2Matrix GF2Matrix::left_null_space() const { return transpose().null_space().transpose(); }

GF2Matrix GF2Matrix::inverse() const {
    if (rows_ != cols_) throw InvalidArgument("GF2Matrix::inverse: matrix is not square");
    const std::size_t n = rows_;
    GF2Matrix aug(n, 2 * n);
    aug.set_block(0, 0, *this);
    aug.set_block(0, n, identity(n));
    const auto pivots = eliminate(aug.data_, n, n, aug.words_, true);
    if (pivots.size() != n) throw InvalidArgument("GF2Matrix::inverse: matrix is singular");
    return aug.block(0, n, n, n);
}

GF2Matrix GF2Matrix::left_inverse() const {
    // Independent rows of A form an invertible square block R; C = R^-1 on
    // those rows, zero elsewhere.
    const auto independent_rows = transpose().pivot_columns();
    if (independent_rows.size() != cols_) throw InvalidArgument("GF2Matrix::left_inverse: not full column rank");
    const GF2Matrix inv = select_rows(independent_rows).inverse();
    GF2Matrix c(cols_, rows_);
    for (std::size_t i = 0; i < cols_; ++i)
        for (std::size_t j = 0; j < independent_rows.size(); ++j)
            if (inv.get(i, j)) c.set(i, independent_rows[j]);
    return c;
}

bool GF2Matrix::row_space_contains(const GF2Matrix& other) const {
    if (other.rows_ == 0) return true;
    if (other.cols_ != cols_) throw InvalidArgument("GF2Matrix::row_space_contains: column mismatch");
    const std::array<GF2Matrix, 2> both{*this, other};
    return vstack(both, cols_).rank() == rank();
}

std::string GF2Matrix::row_hex(std::size_t r) const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    for (std::size_t c = 0; c < cols_; c += 4) {
        unsigned nibble = 0;
        for (std::size_t b = 0; b < 4; ++b) {
            nibble <<= 1U;
            if (c + b < cols_ && get(r, c + b)) nibble |= 1U;
        }
        out.push_back(kDigits[nibble]);
    }
    return out;
}

GF2Matrix GF2Matrix::from_hex_rows(const std::vector<std::string>& rows, std::size_t cols) {
    GF2Matrix m(rows.size(), cols);
    const std::size_t digits = (cols + 3) / 4;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != digits) throw InvalidArgument("GF2Matrix::from_hex_rows: bad row length");
        for (std::size_t d = 0; d < digits; ++d) {
            const char ch = rows[r][d];
            unsigned nibble = 0;
            if (ch >= '0' && ch <= '9') {
                nibble = static_cast<unsigned>(ch - '0');
            } else if (ch >= 'a' && ch <= 'f') {
                nibble = static_cast<unsigned>(ch - 'a' + 10);
            } else if (ch >= 'A' && ch <= 'F') {
                nibble = static_cast<unsigned>(ch - 'A' + 10);
            } else {
                throw InvalidArgument("GF2Matrix::from_hex_rows: bad hex digit");
            }
            for (std::size_t b = 0; b < 4; ++b) {
                const bool bit = (nibble >> (3 - b)) & 1U;
                const std::size_t c = d * 4 + b;
                if (c < cols) {
                    m.set(r, c, bit);
                } else if (bit) {
                    throw InvalidArgument("GF2Matrix::from_hex_rows: nonzero padding");
                }
            }
        }
    }
    return m;
}

std::string GF2Matrix::to_string() const {
    std::string out;
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) out.push_back(get(r, c) ? '1' : '0');
        out.push_back('\n');
    }
    return out;
}

}  // namespace detnet
