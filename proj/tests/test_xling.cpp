#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "cogkit/error.hpp"
#include "cogkit/linalg.hpp"
#include "cogkit/rng.hpp"
#include "cogkit/xling.hpp"
#include "helpers.hpp"

using namespace cogkit;
using linalg::Matrix;
using testutil::TempDir;
using testutil::write_file;
using xling::EmbeddingTable;
using xling::OrthogonalMap;
using xling::ProcrustesOptions;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rng.normal();
    return m;
}

// Random orthogonal matrix by Gram-Schmidt on Gaussian columns. Independent
// of the SVD path used by the alignment code.
Matrix random_orthogonal(std::size_t d, Rng& rng) {
    Matrix q = random_matrix(d, d, rng);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t prev = 0; prev < c; ++prev) {
            double proj = 0.0;
            for (std::size_t r = 0; r < d; ++r)
                proj += q.at(r, c) * q.at(r, prev);
            for (std::size_t r = 0; r < d; ++r)
                q.at(r, c) -= proj * q.at(r, prev);
        }
        double norm = 0.0;
        for (std::size_t r = 0; r < d; ++r) norm += q.at(r, c) * q.at(r, c);
        norm = std::sqrt(norm);
        REQUIRE(norm > 1e-8);
        for (std::size_t r = 0; r < d; ++r) q.at(r, c) /= norm;
    }
    return q;
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
    double sum = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) {
            const double d = a.at(r, c) - b.at(r, c);
            sum += d * d;
        }
    return std::sqrt(sum);
}

const ProcrustesOptions kRawOptions{false, false, false};

std::string small_table_text() {
    return "3 2\n"
           "alpha 1 0\n"
           "beta 0 1\n"
           "gamma 0.5 -0.5\n";
}

}  // namespace

TEST_CASE("embedding load parses the text format") {
    TempDir tmp;
    write_file(tmp.file("emb.vec"), small_table_text());
    const EmbeddingTable t = EmbeddingTable::load(tmp.file("emb.vec"), "toy");
    CHECK(t.name() == "toy");
    CHECK(t.dim() == 2);
    CHECK(t.size() == 3);
    CHECK(t.words() == std::vector<std::string>{"alpha", "beta", "gamma"});
    CHECK(t.contains("beta"));
    CHECK_FALSE(t.contains("delta"));
    CHECK(t.row(2)[0] == 0.5);
    CHECK(t.row(2)[1] == -0.5);
    // Name falls back to the path when not given.
    CHECK(EmbeddingTable::load(tmp.file("emb.vec")).name() == tmp.file("emb.vec"));
}

TEST_CASE("embedding load rejects malformed input with line numbers") {
    TempDir tmp;

    CHECK_THROWS_AS(EmbeddingTable::load(tmp.file("missing.vec")), IoError);

    write_file(tmp.file("empty.vec"), "");
    CHECK_THROWS_AS(EmbeddingTable::load(tmp.file("empty.vec")), ParseError);

    write_file(tmp.file("header.vec"), "3\nfoo 1 2\n");
    CHECK_THROWS_AS(EmbeddingTable::load(tmp.file("header.vec")), ParseError);

    write_file(tmp.file("dims.vec"), "1 0\nfoo\n");
    CHECK_THROWS_AS(EmbeddingTable::load(tmp.file("dims.vec")), ParseError);

    write_file(tmp.file("arity.vec"), "1 3\nfoo 1 2\n");
    try {
        EmbeddingTable::load(tmp.file("arity.vec"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }

    write_file(tmp.file("nonnum.vec"), "1 2\nfoo 1 x\n");
    CHECK_THROWS_AS(EmbeddingTable::load(tmp.file("nonnum.vec")), ParseError);

    write_file(tmp.file("inf.vec"), "1 2\nfoo 1 1e999\n");
    CHECK_THROWS_AS(EmbeddingTable::load(tmp.file("inf.vec")), ParseError);

    write_file(tmp.file("nan.vec"), "1 2\nfoo 1 nan\n");
    CHECK_THROWS_AS(EmbeddingTable::load(tmp.file("nan.vec")), ParseError);

    write_file(tmp.file("count.vec"), "2 2\nfoo 1 2\n");
    CHECK_THROWS_AS(EmbeddingTable::load(tmp.file("count.vec")), ParseError);
}

TEST_CASE("duplicate words keep the first row") {
    TempDir tmp;
    write_file(tmp.file("dup.vec"), "3 2\nfoo 1 2\nbar 3 4\nfoo 5 6\n");
    const EmbeddingTable t = EmbeddingTable::load(tmp.file("dup.vec"));
    CHECK(t.size() == 2);
    CHECK(t.duplicates_dropped() == 1);
    CHECK(t.lookup("foo").vector == std::vector<double>{1.0, 2.0});
}

TEST_CASE("lookup trims and flags out-of-vocabulary words") {
    TempDir tmp;
    write_file(tmp.file("emb.vec"), small_table_text());
    const EmbeddingTable t = EmbeddingTable::load(tmp.file("emb.vec"));

    const EmbeddingTable::Lookup hit = t.lookup("  alpha ");
    CHECK_FALSE(hit.oov);
    CHECK(hit.vector == std::vector<double>{1.0, 0.0});

    const EmbeddingTable::Lookup miss = t.lookup("delta");
    CHECK(miss.oov);
    CHECK(miss.vector == std::vector<double>{0.0, 0.0});
}

TEST_CASE("avg_context_vector reports token coverage") {
    TempDir tmp;
    write_file(tmp.file("emb.vec"), small_table_text());
    const EmbeddingTable t = EmbeddingTable::load(tmp.file("emb.vec"));

    const EmbeddingTable::ContextVector cv =
        t.avg_context_vector("alpha delta beta");
    CHECK(cv.coverage == doctest::Approx(2.0 / 3.0));
    CHECK(cv.vector[0] == doctest::Approx(0.5));
    CHECK(cv.vector[1] == doctest::Approx(0.5));

    const EmbeddingTable::ContextVector none = t.avg_context_vector("delta eps");
    CHECK(none.coverage == 0.0);
    CHECK(none.vector == std::vector<double>{0.0, 0.0});

    CHECK(t.avg_context_vector("").coverage == 0.0);
}

TEST_CASE("save/load round trip is stable after the first quantization") {
    TempDir tmp;
    Rng rng(99);
    EmbeddingTable t("rt", 5);
    std::vector<double> v(5);
    for (int i = 0; i < 40; ++i) {
        for (double& x : v)
            x = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(7)) - 3.0);
        t.add("w" + std::to_string(i), v);
    }
    t.save(tmp.file("rt.vec"));
    const EmbeddingTable back = EmbeddingTable::load(tmp.file("rt.vec"));
    REQUIRE(back.size() == t.size());
    REQUIRE(back.dim() == t.dim());
    CHECK(back.words() == t.words());
    // The text format keeps 9 significant digits, so the first trip is only
    // approximate...
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < t.dim(); ++j)
            CHECK(back.row(i)[j] ==
                  doctest::Approx(t.row(i)[j]).epsilon(1e-8));

    // ...but once quantized, further trips are exact: the bytes and the
    // values both reproduce.
    back.save(tmp.file("rt2.vec"));
    CHECK(testutil::read_file(tmp.file("rt2.vec")) ==
          testutil::read_file(tmp.file("rt.vec")));
    const EmbeddingTable back2 = EmbeddingTable::load(tmp.file("rt2.vec"));
    for (std::size_t i = 0; i < back.size(); ++i)
        for (std::size_t j = 0; j < back.dim(); ++j)
            CHECK(back2.row(i)[j] == back.row(i)[j]);
}

TEST_CASE("procrustes recovers identity when inputs match") {
    Rng rng(7);
    const Matrix x = random_matrix(50, 6, rng);
    const OrthogonalMap map = xling::procrustes_align(x, x);
    CHECK(linalg::max_abs_diff(map.w, Matrix::identity(6)) < 1e-8);
}

TEST_CASE("procrustes recovers a planted rotation") {
    Rng rng(12345);
    const std::size_t d = 10;
    const Matrix r = random_orthogonal(d, rng);
    const Matrix x = random_matrix(200, d, rng);
    const Matrix z = linalg::matmul(x, r);

    const OrthogonalMap map = xling::procrustes_align(x, z, kRawOptions);
    CHECK(linalg::max_abs_diff(map.w, r) < 1e-8);
}

TEST_CASE("procrustes is robust to small noise") {
    Rng rng(4242);
    const std::size_t d = 10;
    const Matrix r = random_orthogonal(d, rng);
    const Matrix x = random_matrix(200, d, rng);
    Matrix z = linalg::matmul(x, r);
    for (double& v : z.data()) v += 0.01 * rng.normal();

    const OrthogonalMap map = xling::procrustes_align(x, z, kRawOptions);

    // The recovered map stays close to the planted rotation: column cosines
    // near 1 and a small Frobenius gap.
    for (std::size_t c = 0; c < d; ++c) {
        double cosine = 0.0;
        for (std::size_t rr = 0; rr < d; ++rr)
            cosine += map.w.at(rr, c) * r.at(rr, c);
        CHECK(cosine > 0.99);
    }
    CHECK(frobenius_distance(map.w, r) < 0.1);
}

TEST_CASE("procrustes result is orthogonal under every preprocessing mix") {
    Rng rng(31);
    for (int mask = 0; mask < 8; ++mask) {
        ProcrustesOptions opt{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
        const Matrix x = random_matrix(40, 5, rng);
        const Matrix z = random_matrix(40, 5, rng);
        const OrthogonalMap map = xling::procrustes_align(x, z, opt);
        const Matrix gram = linalg::matmul(linalg::transpose(map.w), map.w);
        CHECK(linalg::max_abs_diff(gram, Matrix::identity(5)) <= 1e-6);
    }
}

TEST_CASE("procrustes beats random orthogonal maps on its own objective") {
    Rng rng(555);
    const std::size_t d = 3;
    const Matrix x = random_matrix(8, d, rng);
    const Matrix z = random_matrix(8, d, rng);

    const OrthogonalMap best = xling::procrustes_align(x, z, kRawOptions);
    const double best_cost = frobenius_distance(linalg::matmul(x, best.w), z);

    for (int trial = 0; trial < 1000; ++trial) {
        const Matrix q = random_orthogonal(d, rng);
        const double cost = frobenius_distance(linalg::matmul(x, q), z);
        CHECK(best_cost <= cost + 1e-9);
    }
}

TEST_CASE("procrustes input validation") {
    CHECK_THROWS_AS(xling::procrustes_align(Matrix(), Matrix()), InvalidArgument);
    CHECK_THROWS_AS(xling::procrustes_align(Matrix(3, 2, 1.0), Matrix(4, 2, 1.0)),
                    InvalidArgument);
    CHECK_THROWS_AS(xling::procrustes_align(Matrix(3, 2, 1.0), Matrix(3, 3, 1.0)),
                    InvalidArgument);
}

TEST_CASE("apply_mapping preserves inner products") {
    Rng rng(88);
    const std::size_t d = 6;
    EmbeddingTable t("src", d);
    std::vector<double> v(d);
    for (int i = 0; i < 12; ++i) {
        for (double& x : v) x = rng.normal();
        t.add("w" + std::to_string(i), v);
    }
    const Matrix r = random_orthogonal(d, rng);
    const EmbeddingTable mapped = xling::apply_mapping(t, OrthogonalMap{r});
    CHECK(mapped.name() == "src-mapped");
    REQUIRE(mapped.size() == t.size());

    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i; j < t.size(); ++j) {
            const double before = linalg::dot(t.row(i), t.row(j));
            const double after = linalg::dot(mapped.row(i), mapped.row(j));
            CHECK(after == doctest::Approx(before).epsilon(1e-6));
        }

    CHECK_THROWS_AS(xling::apply_mapping(t, OrthogonalMap::identity(d + 1)),
                    InvalidArgument);
}

TEST_CASE("identity map leaves vectors unchanged") {
    const OrthogonalMap id = OrthogonalMap::identity(4);
    CHECK(id.dim() == 4);
    CHECK(id.w == Matrix::identity(4));
}

TEST_CASE("dictionary loading and matrix assembly") {
    TempDir tmp;
    write_file(tmp.file("src.vec"), "2 2\nuno 1 0\ndos 0 1\n");
    write_file(tmp.file("tgt.vec"), "2 2\none 2 0\ntwo 0 2\n");
    write_file(tmp.file("dict.tsv"), "uno\tone\ndos\ttwo\ntres\tthree\nuno\tmissing\n");

    const EmbeddingTable src = EmbeddingTable::load(tmp.file("src.vec"));
    const EmbeddingTable tgt = EmbeddingTable::load(tmp.file("tgt.vec"));
    const std::vector<xling::DictionaryEntry> dict =
        xling::load_dictionary(tmp.file("dict.tsv"));
    REQUIRE(dict.size() == 4);

    const xling::DictionaryMatrices dm = xling::dictionary_matrices(src, tgt, dict);
    CHECK(dm.skipped == 2);
    REQUIRE(dm.x.rows() == 2);
    CHECK(dm.x.at(0, 0) == 1.0);
    CHECK(dm.z.at(0, 0) == 2.0);
    CHECK(dm.x.at(1, 1) == 1.0);
    CHECK(dm.z.at(1, 1) == 2.0);

    write_file(tmp.file("bad.tsv"), "solo\n");
    CHECK_THROWS_AS(xling::load_dictionary(tmp.file("bad.tsv")), ParseError);
    write_file(tmp.file("blank.tsv"), "a\t \n");
    CHECK_THROWS_AS(xling::load_dictionary(tmp.file("blank.tsv")), ParseError);
}

TEST_CASE("pair features concatenate four vectors plus four flags") {
    TempDir tmp;
    write_file(tmp.file("src.vec"), "3 2\ncat 1 0\nbig 0 1\nsmall 1 1\n");
    write_file(tmp.file("tgt.vec"), "2 2\nchat 0 3\ngrand 3 0\n");
    const EmbeddingTable src = EmbeddingTable::load(tmp.file("src.vec"));
    const EmbeddingTable tgt = EmbeddingTable::load(tmp.file("tgt.vec"));

    corpus::Pair pair{"cat", "chat", 7, 1};
    corpus::ContextClues clues{"big", "small", "grand", "inconnu"};

    const xling::PairFeatureVector f =
        xling::pair_feature_vector(src, tgt, pair, &clues);
    const std::vector<double> cat = f.concatenated();
    REQUIRE(cat.size() == 4 * 2 + 4);
    CHECK(cat[0] == 1.0);  // wv_s
    CHECK(cat[1] == 0.0);
    CHECK(cat[2] == 0.0);  // wv_t
    CHECK(cat[3] == 3.0);
    CHECK(cat[4] == doctest::Approx(0.5));  // cv_s = mean(big, small)
    CHECK(cat[5] == doctest::Approx(1.0));
    CHECK(cat[6] == doctest::Approx(3.0));  // cv_t = grand alone, "inconnu" OOV
    CHECK(cat[7] == doctest::Approx(0.0));
    CHECK(cat[8] == 0.0);  // oov_s
    CHECK(cat[9] == 0.0);  // oov_t
    CHECK(cat[10] == 0.0); // no_context_s
    CHECK(cat[11] == 0.0); // no_context_t

    // OOV word and absent context set the matching flags.
    corpus::Pair oov_pair{"dog", "chien", 8, 0};
    const xling::PairFeatureVector g =
        xling::pair_feature_vector(src, tgt, oov_pair, nullptr);
    const std::vector<double> gcat = g.concatenated();
    CHECK(gcat[8] == 1.0);
    CHECK(gcat[9] == 1.0);
    CHECK(gcat[10] == 1.0);
    CHECK(gcat[11] == 1.0);
    CHECK(gcat[0] == 0.0);
    CHECK(gcat[4] == 0.0);

    // Mismatched table dimensions are rejected.
    TempDir tmp2;
    write_file(tmp2.file("t3.vec"), "1 3\nx 1 2 3\n");
    const EmbeddingTable t3 = EmbeddingTable::load(tmp2.file("t3.vec"));
    CHECK_THROWS_AS(xling::pair_feature_vector(src, t3, pair, nullptr),
                    InvalidArgument);
}
