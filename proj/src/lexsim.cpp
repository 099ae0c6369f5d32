#include "cogkit/lexsim.hpp"

#include <algorithm>
#include <vector>

#include "cogkit/error.hpp"
#include "cogkit/utf8.hpp"

namespace cogkit::lexsim {

long QGramProfile::total() const {
    long t = 0;
    for (const auto& [gram, count] : counts) t += count;
    return t;
}

QGramProfile qgram_profile(std::string_view word, int q) {
    if (q < 1) throw InvalidArgument("qgram_profile: q must be >= 1");
    QGramProfile p;
    p.q = q;
    const std::u32string cps = utf8_decode(word);
    if (cps.size() < static_cast<std::size_t>(q)) return p;
    for (std::size_t i = 0; i + q <= cps.size(); ++i) {
        p.counts[cps.substr(i, q)] += 1;
    }
    return p;
}

long levenshtein(std::string_view a, std::string_view b) {
    const std::u32string ca = utf8_decode(a);
    const std::u32string cb = utf8_decode(b);
    const std::size_t n = ca.size();
    const std::size_t m = cb.size();
    if (n == 0) return static_cast<long>(m);
    if (m == 0) return static_cast<long>(n);

    // Two-row dynamic program.
    std::vector<long> prev(m + 1);
    std::vector<long> curr(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<long>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        curr[0] = static_cast<long>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const long sub = prev[j - 1] + (ca[i - 1] == cb[j - 1] ? 0 : 1);
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
        }
        std::swap(prev, curr);
    }
    return prev[m];
}

double ned(std::string_view a, std::string_view b) {
    const std::size_t la = codepoint_length(a);
    const std::size_t lb = codepoint_length(b);
    const std::size_t longest = std::max(la, lb);
    if (longest == 0) return 0.0;
    return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

long qgram_distance(std::string_view a, std::string_view b, int q) {
    const QGramProfile pa = qgram_profile(a, q);
    const QGramProfile pb = qgram_profile(b, q);
    long dist = 0;
    auto ia = pa.counts.begin();
    auto ib = pb.counts.begin();
    while (ia != pa.counts.end() || ib != pb.counts.end()) {
        if (ib == pb.counts.end() || (ia != pa.counts.end() && ia->first < ib->first)) {
            dist += ia->second;
            ++ia;
        } else if (ia == pa.counts.end() || ib->first < ia->first) {
            dist += ib->second;
            ++ib;
        } else {
            dist += std::labs(ia->second - ib->second);
            ++ia;
            ++ib;
        }
    }
    return dist;
}

double wls(std::string_view a, std::string_view b, int q, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw InvalidArgument("wls: alpha must lie in [0, 1]");
    const double ned_term = 1.0 - ned(a, b);
    const long pa = qgram_profile(a, q).total();
    const long pb = qgram_profile(b, q).total();
    double qn = 0.0;
    if (pa + pb > 0)
        qn = static_cast<double>(qgram_distance(a, b, q)) / static_cast<double>(pa + pb);
    return alpha * ned_term + (1.0 - alpha) * (1.0 - qn);
}

}  // namespace cogkit::lexsim
