#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>

#include "cogkit/error.hpp"
#include "cogkit/phonetics.hpp"
#include "helpers.hpp"

using namespace cogkit;
using phonetics::PhoneticTable;
using phonetics::PhoneticVector;
using testutil::TempDir;
using testutil::data_file;
using testutil::write_file;

namespace {

// Two-feature toy table over ASCII letters so expected means are easy to
// compute by hand. 'x' is deliberately absent.
std::string toy_table_text() {
    return "codepoint\tf1\tf2\n"
           "U+0061\t1\t0\n"    // a
           "U+0062\t0\t1\n"    // b
           "U+0063\t1\t1\n"    // c
           "U+0064\t0.5\t0\n"; // d
}

PhoneticTable toy_table(TempDir& tmp) {
    write_file(tmp.file("toy.tsv"), toy_table_text());
    return PhoneticTable::load(tmp.file("toy.tsv"));
}

}  // namespace

TEST_CASE("table load validates structure") {
    TempDir tmp;

    CHECK_THROWS_AS(PhoneticTable::load(tmp.file("missing.tsv")), IoError);

    write_file(tmp.file("empty.tsv"), "");
    CHECK_THROWS_AS(PhoneticTable::load(tmp.file("empty.tsv")), ParseError);

    // A header with no data rows is a legal, empty table.
    write_file(tmp.file("header_only.tsv"), "codepoint\tf1\n");
    const PhoneticTable empty_table = PhoneticTable::load(tmp.file("header_only.tsv"));
    CHECK(empty_table.size() == 0);
    CHECK(empty_table.dim() == 1);

    write_file(tmp.file("bad_cp.tsv"), "codepoint\tf1\nX+0061\t1\n");
    CHECK_THROWS_AS(PhoneticTable::load(tmp.file("bad_cp.tsv")), ParseError);

    write_file(tmp.file("arity.tsv"), "codepoint\tf1\tf2\nU+0061\t1\n");
    CHECK_THROWS_AS(PhoneticTable::load(tmp.file("arity.tsv")), ParseError);

    write_file(tmp.file("range.tsv"), "codepoint\tf1\nU+0061\t1.5\n");
    CHECK_THROWS_AS(PhoneticTable::load(tmp.file("range.tsv")), ParseError);

    write_file(tmp.file("negative.tsv"), "codepoint\tf1\nU+0061\t-0.1\n");
    CHECK_THROWS_AS(PhoneticTable::load(tmp.file("negative.tsv")), ParseError);

    write_file(tmp.file("nonnum.tsv"), "codepoint\tf1\nU+0061\tyes\n");
    CHECK_THROWS_AS(PhoneticTable::load(tmp.file("nonnum.tsv")), ParseError);

    write_file(tmp.file("dup.tsv"), "codepoint\tf1\nU+0061\t1\nU+0061\t0\n");
    CHECK_THROWS_AS(PhoneticTable::load(tmp.file("dup.tsv")), ParseError);

    // Errors name the offending line.
    write_file(tmp.file("line3.tsv"), "codepoint\tf1\nU+0061\t1\nU+0062\t2\n");
    try {
        PhoneticTable::load(tmp.file("line3.tsv"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("char_phonetic_vector looks up single codepoints") {
    TempDir tmp;
    const PhoneticTable table = toy_table(tmp);
    CHECK(table.dim() == 2);
    CHECK(table.size() == 4);
    CHECK(table.feature_names() == std::vector<std::string>{"f1", "f2"});

    const PhoneticVector a = phonetics::char_phonetic_vector(U'a', table);
    CHECK(a.known);
    CHECK(a.values == std::vector<double>{1.0, 0.0});

    const PhoneticVector unknown = phonetics::char_phonetic_vector(U'x', table);
    CHECK_FALSE(unknown.known);
    CHECK(unknown.values == std::vector<double>{0.0, 0.0});
}

TEST_CASE("avg_phonetic_vector averages covered codepoints only") {
    TempDir tmp;
    const PhoneticTable table = toy_table(tmp);

    const PhoneticVector ab = phonetics::avg_phonetic_vector("ab", table);
    CHECK(ab.known);
    CHECK(ab.values[0] == doctest::Approx(0.5));
    CHECK(ab.values[1] == doctest::Approx(0.5));

    // Uncovered codepoints do not enter the denominator: "axb" == "ab".
    const PhoneticVector axb = phonetics::avg_phonetic_vector("axb", table);
    CHECK(axb.values == ab.values);

    // The mean is order independent.
    const PhoneticVector ba = phonetics::avg_phonetic_vector("ba", table);
    CHECK(ba.values == ab.values);

    // Nothing covered at all.
    const PhoneticVector none = phonetics::avg_phonetic_vector("xyz", table);
    CHECK_FALSE(none.known);
    CHECK(none.values == std::vector<double>{0.0, 0.0});

    const PhoneticVector empty = phonetics::avg_phonetic_vector("", table);
    CHECK_FALSE(empty.known);
}

TEST_CASE("context_phonetic_vector averages per token, then over tokens") {
    TempDir tmp;
    const PhoneticTable table = toy_table(tmp);

    // Tokens "a" and "bc": per-token means are (1,0) and (0.5,1); their mean
    // is (0.75,0.5). A flat codepoint mean over "abc" would give
    // (2/3,2/3), so this distinguishes the two definitions.
    const PhoneticVector ctx = phonetics::context_phonetic_vector("a bc", table);
    CHECK(ctx.known);
    CHECK(ctx.values[0] == doctest::Approx(0.75));
    CHECK(ctx.values[1] == doctest::Approx(0.5));

    // Tokens with no covered codepoint are skipped entirely.
    const PhoneticVector skip =
        phonetics::context_phonetic_vector("a xx bc", table);
    CHECK(skip.values[0] == doctest::Approx(0.75));
    CHECK(skip.values[1] == doctest::Approx(0.5));

    // Whitespace runs and tabs both separate tokens.
    const PhoneticVector spaced =
        phonetics::context_phonetic_vector("  a \t bc  ", table);
    CHECK(spaced.values == ctx.values);

    const PhoneticVector none = phonetics::context_phonetic_vector("x y", table);
    CHECK_FALSE(none.known);
}

TEST_CASE("phonetic_pair_features concatenates four blocks of length P") {
    TempDir tmp;
    const PhoneticTable table = toy_table(tmp);

    corpus::Pair pair{"a", "b", 1, 1};
    corpus::ContextClues clues{"c", "d", "a b", "c d"};

    const phonetics::PhoneticPairFeatures f =
        phonetics::phonetic_pair_features(pair, &clues, table);
    const std::vector<double> cat = f.concatenated();
    REQUIRE(cat.size() == 4 * table.dim());

    // Block order is word-src, word-tgt, context-src, context-tgt.
    CHECK(cat[0] == doctest::Approx(1.0));   // pv_s = vec(a)
    CHECK(cat[1] == doctest::Approx(0.0));
    CHECK(cat[2] == doctest::Approx(0.0));   // pv_t = vec(b)
    CHECK(cat[3] == doctest::Approx(1.0));

    // pcv_s over gloss "c" + example "d": tokens c,(d) -> mean of (1,1),(0.5,0).
    CHECK(f.pcv_s.known);
    CHECK(cat[4] == doctest::Approx(0.75));
    CHECK(cat[5] == doctest::Approx(0.5));

    // pcv_t over "a b" + "c d": tokens a,b,c,d.
    CHECK(f.pcv_t.known);
    CHECK(cat[6] == doctest::Approx((1.0 + 0.0 + 1.0 + 0.5) / 4));
    CHECK(cat[7] == doctest::Approx((0.0 + 1.0 + 1.0 + 0.0) / 4));

    // Without clues the context halves are zero and flagged unknown.
    const phonetics::PhoneticPairFeatures bare =
        phonetics::phonetic_pair_features(pair, nullptr, table);
    CHECK_FALSE(bare.pcv_s.known);
    CHECK_FALSE(bare.pcv_t.known);
    const std::vector<double> bare_cat = bare.concatenated();
    CHECK(std::all_of(bare_cat.begin() + 4, bare_cat.end(),
                      [](double v) { return v == 0.0; }));
}

TEST_CASE("shipped Devanagari table") {
    const PhoneticTable table = PhoneticTable::load(data_file("phonetic_table.tsv"));
    CHECK(table.size() == 96);
    CHECK(table.dim() == 38);
    CHECK(table.feature_names().front() == "vowel");

    // Independent vowel A (U+0905) is a vowel; virama (U+094D) is the halant.
    const std::size_t vowel_idx = 0;
    const auto& names = table.feature_names();
    const std::size_t halant_idx = static_cast<std::size_t>(
        std::find(names.begin(), names.end(), "halant") - names.begin());
    REQUIRE(halant_idx < names.size());

    const PhoneticVector a = phonetics::char_phonetic_vector(U'अ', table);
    CHECK(a.known);
    CHECK(a.values[vowel_idx] == 1.0);

    const PhoneticVector halant = phonetics::char_phonetic_vector(U'्', table);
    CHECK(halant.known);
    CHECK(halant.values[halant_idx] == 1.0);
    CHECK(halant.values[vowel_idx] == 0.0);

    // Latin letters are outside the table.
    CHECK_FALSE(phonetics::char_phonetic_vector(U'Z', table).known);

    // Every value is a valid proportion.
    for (char32_t cp = 0x0900; cp <= 0x097F; ++cp) {
        const auto* row = table.find(cp);
        if (!row) continue;
        for (double v : *row) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}
