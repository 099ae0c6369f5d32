#include "cogkit/phonetics.hpp"

#include <cstdlib>

#include "cogkit/error.hpp"
#include "cogkit/tsv.hpp"
#include "cogkit/utf8.hpp"

namespace cogkit::phonetics {

namespace {

char32_t parse_codepoint(std::string_view field, const std::string& path,
                         long line) {
    const std::string_view t = trim(field);
    if (t.size() < 3 || t[0] != 'U' || t[1] != '+')
        throw ParseError(path + ": codepoint must look like U+0905", line);
    char* end = nullptr;
    const std::string hex(t.substr(2));
    const unsigned long cp = std::strtoul(hex.c_str(), &end, 16);
    if (end != hex.c_str() + hex.size() || cp > 0x10FFFF)
        throw ParseError(path + ": bad codepoint '" + std::string(t) + "'",
                         line);
    return static_cast<char32_t>(cp);
}

}  // namespace

PhoneticTable PhoneticTable::load(const std::string& path) {
    PhoneticTable table;
    bool header_seen = false;
    for_each_tsv_row(path, [&](const TsvRow& row) {
        if (!header_seen) {
            if (row.fields.size() < 2)
                throw ParseError(path + ": header needs at least one feature",
                                 row.line);
            for (std::size_t i = 1; i < row.fields.size(); ++i) {
                const std::string name(trim(row.fields[i]));
                if (name.empty())
                    throw ParseError(path + ": empty feature name", row.line);
                table.feature_names_.push_back(name);
            }
            header_seen = true;
            return;
        }
        if (row.fields.size() != table.feature_names_.size() + 1)
            throw ParseError(path + ": expected " +
                                 std::to_string(table.feature_names_.size() + 1) +
                                 " fields, got " +
                                 std::to_string(row.fields.size()),
                             row.line);
        const char32_t cp = parse_codepoint(row.fields[0], path, row.line);
        std::vector<double> values(table.feature_names_.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] = parse_double_field(row.fields[i + 1], path, row.line);
            if (values[i] < 0.0 || values[i] > 1.0)
                throw ParseError(path + ": feature values must lie in [0,1]",
                                 row.line);
        }
        if (!table.rows_.emplace(cp, std::move(values)).second)
            throw ParseError(path + ": duplicate codepoint row", row.line);
    });
    if (!header_seen) throw ParseError(path + ": empty table", 0);
    return table;
}

const std::vector<double>* PhoneticTable::find(char32_t cp) const {
    auto it = rows_.find(cp);
    return it == rows_.end() ? nullptr : &it->second;
}

PhoneticVector char_phonetic_vector(char32_t cp, const PhoneticTable& table) {
    PhoneticVector v;
    v.values.assign(table.dim(), 0.0);
    if (const std::vector<double>* row = table.find(cp)) {
        v.values = *row;
        v.known = true;
    }
    return v;
}

PhoneticVector avg_phonetic_vector(std::string_view text,
                                   const PhoneticTable& table) {
    PhoneticVector v;
    v.values.assign(table.dim(), 0.0);
    std::size_t covered = 0;
    for (char32_t cp : utf8_decode(text)) {
        const std::vector<double>* row = table.find(cp);
        if (!row) continue;
        for (std::size_t i = 0; i < v.values.size(); ++i)
            v.values[i] += (*row)[i];
        ++covered;
    }
    if (covered == 0) return v;
    for (double& x : v.values) x /= static_cast<double>(covered);
    v.known = true;
    return v;
}

PhoneticVector context_phonetic_vector(std::string_view text,
                                       const PhoneticTable& table) {
    PhoneticVector v;
    v.values.assign(table.dim(), 0.0);
    std::size_t covered_tokens = 0;
    for (std::string_view token : split_whitespace(text)) {
        const PhoneticVector tv = avg_phonetic_vector(token, table);
        if (!tv.known) continue;
        for (std::size_t i = 0; i < v.values.size(); ++i)
            v.values[i] += tv.values[i];
        ++covered_tokens;
    }
    if (covered_tokens == 0) return v;
    for (double& x : v.values) x /= static_cast<double>(covered_tokens);
    v.known = true;
    return v;
}

std::vector<double> PhoneticPairFeatures::concatenated() const {
    std::vector<double> out;
    out.reserve(pv_s.values.size() * 4);
    for (const PhoneticVector* part : {&pv_s, &pv_t, &pcv_s, &pcv_t})
        out.insert(out.end(), part->values.begin(), part->values.end());
    return out;
}

PhoneticPairFeatures phonetic_pair_features(const corpus::Pair& pair,
                                            const corpus::ContextClues* clues,
                                            const PhoneticTable& table) {
    PhoneticPairFeatures f;
    f.pv_s = avg_phonetic_vector(pair.source, table);
    f.pv_t = avg_phonetic_vector(pair.target, table);
    std::string ctx_s;
    std::string ctx_t;
    if (clues) {
        ctx_s = clues->gloss_src + " " + clues->example_src;
        ctx_t = clues->gloss_tgt + " " + clues->example_tgt;
    }
    f.pcv_s = context_phonetic_vector(ctx_s, table);
    f.pcv_t = context_phonetic_vector(ctx_t, table);
    return f;
}

}  // namespace cogkit::phonetics
