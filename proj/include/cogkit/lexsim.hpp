#pragma once

#include <map>
#include <string>
#include <string_view>

namespace cogkit::lexsim {

/// Multiset profile of the length-q codepoint substrings of a word.
struct QGramProfile {
    int q = 2;
    std::map<std::u32string, long> counts;

    /// Total number of grams: max(|word| - q + 1, 0).
    long total() const;
};

QGramProfile qgram_profile(std::string_view word, int q);

/// Minimum number of single-codepoint insertions, deletions, and
/// substitutions transforming a into b. Operates on Unicode scalar values,
/// so combining marks count as characters.
long levenshtein(std::string_view a, std::string_view b);

/// levenshtein(a, b) / max(|a|, |b|) in codepoints, in [0, 1].
/// Two empty strings are identical, so the distance is defined as 0.
double ned(std::string_view a, std::string_view b);

/// L1 distance between the two q-gram profiles (multiset symmetric
/// difference size). Throws InvalidArgument when q < 1.
long qgram_distance(std::string_view a, std::string_view b, int q);

/// Weighted lexical similarity in [0, 1]:
///   alpha * (1 - ned) + (1 - alpha) * (1 - Qn)
/// where Qn = qgram_distance / (Pa + Pb) normalizes the q-gram distance by
/// the largest value it can take for these word lengths, and Qn := 0 when
/// both profiles are empty. The exact combination is this library's
/// reconstruction; q and alpha are configurable (defaults q=2, alpha=0.5).
double wls(std::string_view a, std::string_view b, int q = 2, double alpha = 0.5);

}  // namespace cogkit::lexsim
