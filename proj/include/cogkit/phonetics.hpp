#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cogkit/corpus.hpp"

namespace cogkit::phonetics {

// Fixed-dimension character feature vector. known=false means the input was
// empty or contained no codepoint covered by the table; the values are then
// all zero.
struct PhoneticVector {
    std::vector<double> values;
    bool known = false;
};

// Codepoint feature table loaded from TSV. First row is a header naming the
// feature columns; data rows are `U+XXXX<TAB>f1..fP` with every value in
// [0,1]. Immutable after load.
class PhoneticTable {
public:
    static PhoneticTable load(const std::string& path);

    std::size_t dim() const { return feature_names_.size(); }
    std::size_t size() const { return rows_.size(); }
    const std::vector<std::string>& feature_names() const {
        return feature_names_;
    }
    // nullptr for codepoints the table does not cover.
    const std::vector<double>* find(char32_t cp) const;

private:
    std::vector<std::string> feature_names_;
    std::unordered_map<char32_t, std::vector<double>> rows_;
};

PhoneticVector char_phonetic_vector(char32_t cp, const PhoneticTable& table);

// Mean over the covered codepoints of text. Uncovered codepoints contribute
// to neither numerator nor denominator, so punctuation does not dilute the
// vector.
PhoneticVector avg_phonetic_vector(std::string_view text,
                                   const PhoneticTable& table);

// Token-level context mean: avg_phonetic_vector per whitespace token, then
// the mean over tokens that had at least one covered codepoint.
PhoneticVector context_phonetic_vector(std::string_view text,
                                       const PhoneticTable& table);

struct PhoneticPairFeatures {
    PhoneticVector pv_s;
    PhoneticVector pv_t;
    PhoneticVector pcv_s;
    PhoneticVector pcv_t;

    // [pv_s; pv_t; pcv_s; pcv_t], length 4P.
    std::vector<double> concatenated() const;
};

// Word vectors from the pair itself; context vectors from gloss+example of
// the matching side. clues may be null (context parts zero, flags unset).
PhoneticPairFeatures phonetic_pair_features(const corpus::Pair& pair,
                                            const corpus::ContextClues* clues,
                                            const PhoneticTable& table);

}  // namespace cogkit::phonetics
