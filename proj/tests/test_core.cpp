#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "icmh/io.hpp"
#include "icmh/matrix.hpp"
#include "icmh/rng.hpp"
#include "icmh/synth.hpp"
#include "icmh/types.hpp"
#include "test_support.hpp"

using namespace icmh;
using testsup::TempDir;

namespace {

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

}  // namespace

// ---------------------------------------------------------------- matrix ----

TEST_CASE("matrix API matmul family matches naive loops") {
    Rng rng(7);
    auto a = testsup::random_matrix(4, 6, rng);
    auto b = testsup::random_matrix(6, 3, rng);
    auto c = testsup::random_matrix(5, 6, rng);

    CHECK(testsup::max_abs_diff(matmul(a, b), testsup::naive_matmul(a, b)) < 1e-12);
    CHECK(testsup::max_abs_diff(matmul_nt(a, c), testsup::naive_matmul_nt(a, c)) < 1e-12);
    CHECK(testsup::max_abs_diff(matmul_tn(a, matmul(a, b)),
                                testsup::naive_matmul_tn(a, matmul(a, b))) < 1e-12);

    auto at = transpose(a);
    REQUIRE(at.rows() == 6);
    REQUIRE(at.cols() == 4);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) CHECK(at(j, i) == a(i, j));
}

TEST_CASE("matrix reductions and elementwise helpers") {
    Matrix a(2, 2), b(2, 2);
    a(0, 0) = 1; a(0, 1) = -2; a(1, 0) = 3; a(1, 1) = 0.5;
    b(0, 0) = 0; b(0, 1) = 1; b(1, 0) = 1; b(1, 1) = 0.5;

    CHECK(frob_sq(a) == doctest::Approx(1 + 4 + 9 + 0.25));
    CHECK(frob_sq_diff(a, b) == doctest::Approx(1 + 9 + 4 + 0));
    CHECK(buffer_dot(a, b) == doctest::Approx(0 - 2 + 3 + 0.25));

    Matrix y = b;
    add_scaled(y, 2.0, a);
    CHECK(y(1, 0) == 7.0);
    scale_inplace(y, 0.5);
    CHECK(y(1, 0) == 3.5);

    Matrix c = a;
    clamp_unit_inplace(c);
    CHECK(within_unit_interval(c));
    CHECK(c(0, 1) == -1.0);
    CHECK(c(1, 0) == 1.0);
    CHECK(c(1, 1) == 0.5);
    CHECK_FALSE(within_unit_interval(a));

    CHECK(all_finite(a));
    a(0, 0) = std::nan("");
    CHECK_FALSE(all_finite(a));
}

TEST_CASE("take_rows and vstack") {
    Rng rng(8);
    auto a = testsup::random_matrix(5, 3, rng);
    auto sub = take_rows(a, {4, 0, 2});
    REQUIRE(sub.rows() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(sub(0, j) == a(4, j));
        CHECK(sub(1, j) == a(0, j));
        CHECK(sub(2, j) == a(2, j));
    }

    auto top = testsup::random_matrix(2, 3, rng);
    auto stacked = vstack(top, sub);
    REQUIRE(stacked.rows() == 5);
    CHECK(stacked(0, 0) == top(0, 0));
    CHECK(stacked(2, 1) == sub(0, 1));

    // empty top: identity on the bottom block
    auto from_empty = vstack(Matrix(), sub);
    CHECK(from_empty == sub);
}

TEST_CASE("cholesky solves SPD systems") {
    // A = M^T M + I is SPD by construction
    Rng rng(9);
    auto m = testsup::random_matrix(6, 6, rng);
    Matrix a = matmul_tn(m, m);
    for (std::size_t i = 0; i < 6; ++i) a(i, i) += 1.0;

    std::vector<double> want(6);
    for (std::size_t i = 0; i < 6; ++i) want[i] = rng.uniform_pm1();
    std::vector<double> rhs(6, 0.0);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) rhs[i] += a(i, j) * want[j];

    Matrix l = a;
    REQUIRE(cholesky_factor(l));
    auto got = cholesky_solve(l, rhs);
    for (std::size_t i = 0; i < 6; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));

    // indefinite input is reported, not mangled
    Matrix bad(2, 2);
    bad(0, 0) = 1; bad(0, 1) = 2; bad(1, 0) = 2; bad(1, 1) = 1;
    CHECK_FALSE(cholesky_factor(bad));
}

// -------------------------------------------------------------------- rng ----

TEST_CASE("rng streams are deterministic and in range") {
    Rng a(42), b(42), c(43);
    bool all_same = true;
    for (int i = 0; i < 100; ++i) {
        const double va = a.uniform01();
        CHECK(va >= 0.0);
        CHECK(va < 1.0);
        CHECK(b.uniform01() == va);
        if (c.uniform01() != va) all_same = false;
    }
    CHECK_FALSE(all_same);

    Rng r(7);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 300; ++i) {
        const auto v = r.bounded(5);
        CHECK(v < 5);
        seen.insert(v);
    }
    CHECK(seen.size() == 5);  // all residues reachable

    for (int i = 0; i < 50; ++i) CHECK(std::isfinite(r.normal()));

    std::vector<int> v1 = {0, 1, 2, 3, 4, 5, 6, 7}, v2 = v1;
    Rng s1(11), s2(11);
    s1.shuffle(v1);
    s2.shuffle(v2);
    CHECK(v1 == v2);
    std::vector<int> sorted = v1;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("derive_seed separates streams") {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 8; ++s)
        for (std::uint64_t t = 0; t < 64; ++t) seeds.insert(derive_seed(s, t));
    CHECK(seeds.size() == 8 * 64);
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

// --------------------------------------------------------------------- io ----

TEST_CASE("matrix file round trip is bit-exact") {
    TempDir tmp("icmh_test_io");
    Rng rng(3);
    auto m = testsup::random_matrix(7, 4, rng, -1e6, 1e6);
    m(0, 0) = 1.0 / 3.0;
    m(0, 1) = 1e-300;
    m(0, 2) = 0.0;
    io::save_matrix(tmp.file("m.txt"), m);
    auto back = io::load_matrix(tmp.file("m.txt"));
    REQUIRE(back.same_shape(m));
    CHECK(back == m);  // %.17g carries doubles exactly
}

TEST_CASE("matrix loader rejects malformed files") {
    TempDir tmp("icmh_test_io_bad");

    write_file(tmp.file("short_row.txt"), "2 2\n1 2\n3\n");
    CHECK_THROWS_WITH_AS(io::load_matrix(tmp.file("short_row.txt")),
                         doctest::Contains("row 2 has 1 token, expected 2"),
                         std::runtime_error);

    write_file(tmp.file("bad_tok.txt"), "1 2\n1 x2\n");
    CHECK_THROWS_WITH_AS(io::load_matrix(tmp.file("bad_tok.txt")),
                         doctest::Contains("unparseable token 'x2'"), std::runtime_error);

    write_file(tmp.file("nonfinite.txt"), "1 2\n1 nan\n");
    CHECK_THROWS_WITH_AS(io::load_matrix(tmp.file("nonfinite.txt")),
                         doctest::Contains("non-finite"), std::runtime_error);

    write_file(tmp.file("extra.txt"), "1 2\n1 2 3\n");
    CHECK_THROWS_AS(io::load_matrix(tmp.file("extra.txt")), std::runtime_error);

    write_file(tmp.file("no_header.txt"), "");
    CHECK_THROWS_AS(io::load_matrix(tmp.file("no_header.txt")), std::runtime_error);

    write_file(tmp.file("bad_header.txt"), "two cols\n");
    CHECK_THROWS_AS(io::load_matrix(tmp.file("bad_header.txt")), std::runtime_error);

    CHECK_THROWS_AS(io::load_matrix(tmp.file("absent.txt")), std::runtime_error);
}

TEST_CASE("label and keyvalue files round trip") {
    TempDir tmp("icmh_test_io_kv");

    LabelVector labels = {0, 2, 1, 1, 0, 3};
    io::save_labels(tmp.file("l.txt"), labels);
    CHECK(io::load_labels(tmp.file("l.txt")) == labels);

    write_file(tmp.file("neg.txt"), "0\n-1\n");
    CHECK_THROWS_WITH_AS(io::load_labels(tmp.file("neg.txt")),
                         doctest::Contains("negative label"), std::runtime_error);

    std::map<std::string, std::string> kv = {{"b", "2"}, {"a", "hello world"}, {"c", "x=y"}};
    io::save_keyvalue(tmp.file("kv.txt"), kv);
    CHECK(io::load_keyvalue(tmp.file("kv.txt")) == kv);

    write_file(tmp.file("kv2.txt"), "# comment\nkey = spaced value \n");
    auto loaded = io::load_keyvalue(tmp.file("kv2.txt"));
    REQUIRE(loaded.count("key"));
    CHECK(loaded.at("key") == "spaced value");
}

TEST_CASE("dataset manifest round trip") {
    TempDir tmp("icmh_test_io_ds");
    PairedDataset d = generate_synthetic(3, 4, 5, 2, 0.1, 99);
    io::save_dataset(tmp.path.string(), d);
    PairedDataset back = io::load_dataset(tmp.file("manifest.txt"));
    CHECK(back.x == d.x);
    CHECK(back.y == d.y);
    CHECK(back.labels == d.labels);
    CHECK(back.class_count == d.class_count);
}

// ------------------------------------------------------------------ types ----

TEST_CASE("similarity matrix matches label equality") {
    LabelVector labels = {0, 1, 0, 2, 1};
    auto s = build_similarity(labels);
    REQUIRE(s.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(s(i, i) == 1.0);
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(s(i, j) == (labels[i] == labels[j] ? 1.0 : 0.0));
            CHECK(s(i, j) == s(j, i));
        }
    }
    CHECK_THROWS_AS(build_similarity({}), std::invalid_argument);
}

TEST_CASE("binary codes pack, compare and round trip") {
    Rng rng(5);
    auto m = testsup::random_matrix(6, 70, rng);  // two words per row, 58 padding bits
    m(0, 0) = 0.0;                                // the boundary case
    auto codes = BinaryCodeMatrix::from_signs(m);
    REQUIRE(codes.rows() == 6);
    REQUIRE(codes.bits() == 70);
    REQUIRE(codes.words_per_row() == 2);
    CHECK(codes.sign(0, 0) == 1);  // >= 0 maps to +1

    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 70; ++j)
            CHECK(codes.sign(i, j) == (m(i, j) >= 0 ? 1 : -1));

    // hamming against a sign-comparison loop
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            std::uint32_t want = 0;
            for (std::size_t bit = 0; bit < 70; ++bit)
                want += codes.sign(i, bit) != codes.sign(j, bit);
            CHECK(codes.hamming(i, codes, j) == want);
        }

    auto dense = codes.to_matrix();
    CHECK(BinaryCodeMatrix::from_signs(dense) == codes);
    for (std::size_t i = 0; i < dense.size(); ++i)
        CHECK(std::abs(dense.data()[i]) == 1.0);

    auto other = codes;
    CHECK(other == codes);
    other.set(3, 69, codes.sign(3, 69) < 0);
    CHECK_FALSE(other == codes);
    CHECK(other.hamming(3, codes, 3) == 1);
}

TEST_CASE("dataset validation reports each violated invariant") {
    PairedDataset d = generate_synthetic(3, 2, 4, 3, 0.2, 1);
    CHECK_NOTHROW(validate_dataset(d));

    PairedDataset bad = d;
    bad.labels.pop_back();
    CHECK_THROWS_WITH_AS(validate_dataset(bad), doctest::Contains("disagree on sample count"),
                         std::invalid_argument);

    bad = d;
    bad.labels[0] = 7;
    CHECK_THROWS_WITH_AS(validate_dataset(bad), doctest::Contains("out of range"),
                         std::invalid_argument);

    bad = d;
    bad.class_count = 4;
    CHECK_THROWS_WITH_AS(validate_dataset(bad), doctest::Contains("class 3 has no samples"),
                         std::invalid_argument);

    bad = d;
    bad.x(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_WITH_AS(validate_dataset(bad), doctest::Contains("non-finite"),
                         std::invalid_argument);

    auto by_class = rows_by_class(d.labels, d.class_count);
    REQUIRE(by_class.size() == 3);
    for (int c = 0; c < 3; ++c)
        for (int r : by_class[static_cast<std::size_t>(c)]) CHECK(d.labels[static_cast<std::size_t>(r)] == c);
}

// ------------------------------------------------------------------ synth ----

TEST_CASE("synthetic generator is deterministic and well shaped") {
    PairedDataset d1 = generate_synthetic(4, 25, 16, 12, 0.3, 7);
    PairedDataset d2 = generate_synthetic(4, 25, 16, 12, 0.3, 7);
    PairedDataset d3 = generate_synthetic(4, 25, 16, 12, 0.3, 8);

    CHECK(d1.x == d2.x);
    CHECK(d1.y == d2.y);
    CHECK(d1.labels == d2.labels);
    CHECK_FALSE(d1.x == d3.x);

    REQUIRE(d1.size() == 100);
    CHECK(d1.x.cols() == 16);
    CHECK(d1.y.cols() == 12);
    CHECK(d1.class_count == 4);
    CHECK_NOTHROW(validate_dataset(d1));
    for (int c = 0; c < 4; ++c)
        CHECK(std::count(d1.labels.begin(), d1.labels.end(), c) == 25);
}

TEST_CASE("per-class split keeps fractions, order and disjointness") {
    PairedDataset d = generate_synthetic(5, 20, 6, 4, 0.2, 21);
    auto split = split_train_test(d, 0.7, 31);

    CHECK(split.train.size() == 70);
    CHECK(split.test.size() == 30);
    for (int c = 0; c < 5; ++c) {
        CHECK(std::count(split.train.labels.begin(), split.train.labels.end(), c) == 14);
        CHECK(std::count(split.test.labels.begin(), split.test.labels.end(), c) == 6);
    }

    // every row of either side appears in the source with identical features,
    // and the (train, test) multiset covers the source exactly once
    auto find_row = [&](const Matrix& xm, const Matrix& ym, std::size_t r) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            bool same = true;
            for (std::size_t j = 0; j < d.x.cols() && same; ++j) same = d.x(i, j) == xm(r, j);
            for (std::size_t j = 0; j < d.y.cols() && same; ++j) same = d.y(i, j) == ym(r, j);
            if (same) return static_cast<long>(i);
        }
        return -1L;
    };
    std::set<long> used;
    long prev = -1;
    bool train_order_ok = true;
    for (std::size_t r = 0; r < split.train.size(); ++r) {
        long src = find_row(split.train.x, split.train.y, r);
        REQUIRE(src >= 0);
        used.insert(src);
        // order preserved within a class: indices of one class ascend
        if (r > 0 && split.train.labels[r] == split.train.labels[r - 1] && src < prev)
            train_order_ok = false;
        prev = src;
    }
    CHECK(train_order_ok);
    for (std::size_t r = 0; r < split.test.size(); ++r) {
        long src = find_row(split.test.x, split.test.y, r);
        REQUIRE(src >= 0);
        CHECK(used.insert(src).second);  // disjoint from train
    }
    CHECK(used.size() == d.size());

    auto split2 = split_train_test(d, 0.7, 31);
    CHECK(split2.train.x == split.train.x);
    CHECK(split2.test.y == split.test.y);
}

TEST_CASE("standardization centers train and reuses train statistics on test") {
    PairedDataset d = generate_synthetic(3, 30, 5, 4, 0.4, 17);
    auto split = split_train_test(d, 0.7, 3);
    PairedDataset raw_test = split.test;

    standardize_features(split.train, split.test);

    for (std::size_t j = 0; j < split.train.x.cols(); ++j) {
        double mean = 0, var = 0;
        for (std::size_t i = 0; i < split.train.size(); ++i) mean += split.train.x(i, j);
        mean /= static_cast<double>(split.train.size());
        for (std::size_t i = 0; i < split.train.size(); ++i) {
            const double c = split.train.x(i, j) - mean;
            var += c * c;
        }
        var /= static_cast<double>(split.train.size());
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
    }

    // test side transformed by an affine map consistent across rows
    // (recover scale/shift from two rows, verify on the rest)
    const std::size_t jcol = 0;
    const double x0 = raw_test.x(0, jcol), x1 = raw_test.x(1, jcol);
    const double z0 = split.test.x(0, jcol), z1 = split.test.x(1, jcol);
    const double a = (z1 - z0) / (x1 - x0);
    const double b = z0 - a * x0;
    for (std::size_t i = 2; i < split.test.size(); ++i)
        CHECK(split.test.x(i, jcol) == doctest::Approx(a * raw_test.x(i, jcol) + b).epsilon(1e-8));
}
