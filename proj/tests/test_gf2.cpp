#include <doctest.h>

#include "detnet/errors.hpp"
#include "detnet/gf2.hpp"
#include "detnet/prng.hpp"
#include "support.hpp"

using namespace detnet;

namespace {

GF2Matrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols) {
    GF2Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rng.bit());
    return m;
}

oracle::Grid to_grid(const GF2Matrix& m) {
    oracle::Grid g(m.rows(), std::vector<int>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) g[r][c] = m.get(r, c) ? 1 : 0;
    return g;
}

}  // namespace

TEST_CASE("rank agrees with plain elimination on random matrices") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const auto rows = static_cast<std::size_t>(rng.below(9));
        const auto cols = static_cast<std::size_t>(rng.below(130));
        const GF2Matrix m = random_matrix(rng, rows, cols);
        CHECK(m.rank() == oracle::rank(to_grid(m)));
        CHECK(m.transpose().rank() == m.rank());
    }
}

TEST_CASE("empty and zero matrices have rank 0") {
    CHECK(GF2Matrix().rank() == 0);
    CHECK(GF2Matrix(0, 5).rank() == 0);
    CHECK(GF2Matrix(5, 0).rank() == 0);
    CHECK(GF2Matrix(3, 3).rank() == 0);
    CHECK(GF2Matrix::identity(70).rank() == 70);
}

TEST_CASE("product matches entrywise definition") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_matrix(rng, rng.below(7) + 1, rng.below(70) + 1);
        const auto b = random_matrix(rng, a.cols(), rng.below(7) + 1);
        const auto p = a * b;
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) {
                int s = 0;
                for (std::size_t k = 0; k < a.cols(); ++k) s ^= (a.get(i, k) && b.get(k, j)) ? 1 : 0;
                CHECK(p.get(i, j) == (s == 1));
            }
    }
}

TEST_CASE("null spaces annihilate and have complementary dimension") {
    SplitMix64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_matrix(rng, rng.below(8) + 1, rng.below(8) + 1);
        const auto n = a.null_space();
        CHECK(n.cols() == a.cols() - a.rank());
        if (n.cols()) CHECK((a * n).is_zero());
        CHECK(n.rank() == n.cols());
        const auto w = a.left_null_space();
        CHECK(w.rows() == a.rows() - a.rank());
        if (w.rows()) CHECK((w * a).is_zero());
    }
}

TEST_CASE("inverse and left inverse") {
    SplitMix64 rng(3);
    int inverted = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_matrix(rng, 6, 6);
        if (a.rank() == 6) {
            CHECK(a * a.inverse() == GF2Matrix::identity(6));
            ++inverted;
        } else {
            CHECK_THROWS_AS(a.inverse(), InvalidArgument);
        }
        const auto tall = random_matrix(rng, 9, 4);
        if (tall.rank() == 4) {
            CHECK(tall.left_inverse() * tall == GF2Matrix::identity(4));
        } else {
            CHECK_THROWS_AS(tall.left_inverse(), InvalidArgument);
        }
    }
    CHECK(inverted > 0);
}

TEST_CASE("row basis is canonical for the row space") {
    SplitMix64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_matrix(rng, 5, 7);
        const auto basis = a.row_basis();
        CHECK(basis.rows() == a.rank());
        CHECK(basis.row_space_contains(a));
        CHECK(a.row_space_contains(basis));
        // Any invertible row mix has the same basis.
        auto mix = random_matrix(rng, 5, 5);
        if (mix.rank() == 5) CHECK((mix * a).row_basis() == basis);
    }
}

TEST_CASE("pivot columns select an independent column set of full rank") {
    SplitMix64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_matrix(rng, 6, 9);
        const auto piv = a.pivot_columns();
        CHECK(piv.size() == a.rank());
        CHECK(a.select_columns(piv).rank() == piv.size());
    }
}

TEST_CASE("hex rows round trip") {
    SplitMix64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_matrix(rng, 4, rng.below(20) + 1);
        std::vector<std::string> rows;
        for (std::size_t r = 0; r < a.rows(); ++r) rows.push_back(a.row_hex(r));
        CHECK(GF2Matrix::from_hex_rows(rows, a.cols()) == a);
    }
    GF2Matrix m(1, 6);
    m.set(0, 0);
    m.set(0, 5);
    CHECK(m.row_hex(0) == "84");
}

TEST_CASE("blocks and stacking") {
    const auto i2 = GF2Matrix::identity(2);
    GF2Matrix big(4, 4);
    big.set_block(2, 0, i2);
    CHECK(big.block(2, 0, 2, 2) == i2);
    CHECK(big.block(0, 0, 2, 2).is_zero());
    big.add_block(2, 0, i2);
    CHECK(big.is_zero());
    const std::vector<GF2Matrix> parts{i2, i2};
    CHECK(GF2Matrix::hstack(parts, 2).rank() == 2);
    CHECK(GF2Matrix::vstack(parts, 2).rows() == 4);
}
