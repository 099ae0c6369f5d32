#include "cogkit/xling.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cogkit/error.hpp"
#include "cogkit/log.hpp"
#include "cogkit/tsv.hpp"
#include "cogkit/utf8.hpp"

namespace cogkit::xling {

namespace {

double parse_value(std::string_view field, const std::string& path, long line) {
    const std::string s(field);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        throw ParseError(path + ": bad numeric value '" + s + "'", line);
    return v;
}

}  // namespace

EmbeddingTable EmbeddingTable::load(const std::string& path,
                                    const std::string& name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);

    EmbeddingTable table;
    table.name_ = name.empty() ? path : name;

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        const std::vector<std::string_view> head = split_whitespace(line);
        if (head.size() != 2)
            throw ParseError(path + ": header must be 'N D'", line_no);
        const long n = parse_int_field(head[0], path, line_no);
        const long d = parse_int_field(head[1], path, line_no);
        if (n < 0 || d <= 0)
            throw ParseError(path + ": header must give N >= 0, D > 0", line_no);
        table.dim_ = static_cast<std::size_t>(d);
        long rows_seen = 0;
        std::vector<double> vec(table.dim_);
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty()) continue;
            const std::vector<std::string_view> parts = split_whitespace(line);
            if (parts.size() != table.dim_ + 1)
                throw ParseError(path + ": expected word + " +
                                     std::to_string(table.dim_) +
                                     " values, got " +
                                     std::to_string(parts.size()) + " fields",
                                 line_no);
            for (std::size_t i = 0; i < table.dim_; ++i)
                vec[i] = parse_value(parts[i + 1], path, line_no);
            if (!table.add(parts[0], vec)) ++table.duplicates_;
            ++rows_seen;
        }
        if (rows_seen != n)
            throw ParseError(path + ": header promised " + std::to_string(n) +
                                 " rows, file has " + std::to_string(rows_seen),
                             line_no);
    }
    if (table.duplicates_ > 0)
        log_warn(path + ": " + std::to_string(table.duplicates_) +
                 " duplicate words ignored (first occurrence kept)");
    return table;
}

void EmbeddingTable::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << size() << ' ' << dim_ << '\n';
    char buf[64];
    for (std::size_t i = 0; i < size(); ++i) {
        out << words_[i];
        const std::span<const double> v = row(i);
        for (double x : v) {
            std::snprintf(buf, sizeof buf, " %.9g", x);
            out << buf;
        }
        out << '\n';
    }
    if (!out.flush()) throw IoError("write failed: " + path);
}

bool EmbeddingTable::contains(std::string_view word) const {
    return index_.count(std::string(word)) > 0;
}

bool EmbeddingTable::add(std::string_view word, std::span<const double> vector) {
    if (vector.size() != dim_)
        throw InvalidArgument("embedding row has dimension " +
                              std::to_string(vector.size()) + ", table has " +
                              std::to_string(dim_));
    std::string key(word);
    if (!index_.emplace(key, words_.size()).second) return false;
    words_.push_back(std::move(key));
    values_.insert(values_.end(), vector.begin(), vector.end());
    return true;
}

std::span<const double> EmbeddingTable::row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
}

EmbeddingTable::Lookup EmbeddingTable::lookup(std::string_view word) const {
    Lookup result;
    auto it = index_.find(std::string(trim(word)));
    if (it == index_.end()) {
        result.vector.assign(dim_, 0.0);
        result.oov = true;
        return result;
    }
    const std::span<const double> v = row(it->second);
    result.vector.assign(v.begin(), v.end());
    return result;
}

EmbeddingTable::ContextVector EmbeddingTable::avg_context_vector(
    std::string_view text) const {
    ContextVector result;
    result.vector.assign(dim_, 0.0);
    const std::vector<std::string_view> tokens = split_whitespace(text);
    if (tokens.empty()) return result;
    std::size_t found = 0;
    for (std::string_view token : tokens) {
        auto it = index_.find(std::string(token));
        if (it == index_.end()) continue;
        const std::span<const double> v = row(it->second);
        for (std::size_t i = 0; i < dim_; ++i) result.vector[i] += v[i];
        ++found;
    }
    if (found == 0) return result;
    for (double& x : result.vector) x /= static_cast<double>(found);
    result.coverage =
        static_cast<double>(found) / static_cast<double>(tokens.size());
    return result;
}

OrthogonalMap OrthogonalMap::identity(std::size_t d) {
    return {linalg::Matrix::identity(d)};
}

namespace {

constexpr double kOrthogonalityTol = 1e-6;

void check_orthogonal(const linalg::Matrix& w) {
    const linalg::Matrix gram = linalg::matmul(linalg::transpose(w), w);
    const double dev =
        linalg::max_abs_diff(gram, linalg::Matrix::identity(w.cols()));
    if (dev > kOrthogonalityTol)
        throw NumericalError("alignment map failed the orthogonality check: "
                             "max deviation " +
                             std::to_string(dev));
}

}  // namespace

OrthogonalMap procrustes_align(linalg::Matrix x, linalg::Matrix z,
                               const ProcrustesOptions& options) {
    if (x.rows() == 0 || x.cols() == 0)
        throw InvalidArgument("procrustes_align: empty input");
    if (x.rows() != z.rows() || x.cols() != z.cols())
        throw InvalidArgument("procrustes_align: shape mismatch");
    if (x.rows() < x.cols())
        log_warn("procrustes_align: fewer dictionary rows (" +
                 std::to_string(x.rows()) + ") than dimensions (" +
                 std::to_string(x.cols()) + ")");

    for (linalg::Matrix* m : {&x, &z}) {
        if (options.unit_normalize) linalg::unit_normalize_rows(*m);
        if (options.center_columns) linalg::center_columns(*m);
        if (options.renormalize) linalg::unit_normalize_rows(*m);
    }

    const linalg::Matrix m = linalg::matmul(linalg::transpose(x), z);
    const linalg::Svd svd = linalg::jacobi_svd(m);
    OrthogonalMap map{linalg::matmul(svd.u, linalg::transpose(svd.v))};
    check_orthogonal(map.w);
    return map;
}

EmbeddingTable apply_mapping(const EmbeddingTable& table,
                             const OrthogonalMap& map) {
    if (table.dim() != map.dim())
        throw InvalidArgument("apply_mapping: table dimension " +
                              std::to_string(table.dim()) + " vs map " +
                              std::to_string(map.dim()));
    EmbeddingTable out(table.name() + "-mapped", table.dim());
    std::vector<double> mapped(table.dim());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::span<const double> v = table.row(i);
        for (std::size_t j = 0; j < table.dim(); ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < table.dim(); ++k)
                sum += v[k] * map.w.at(k, j);
            mapped[j] = sum;
        }
        out.add(table.words()[i], mapped);
    }
    return out;
}

std::vector<DictionaryEntry> load_dictionary(const std::string& path) {
    std::vector<DictionaryEntry> dict;
    for_each_tsv_row(path, [&](const TsvRow& row) {
        if (row.fields.size() != 2)
            throw ParseError(path + ": expected 2 tab-separated fields",
                             row.line);
        DictionaryEntry e;
        e.source = std::string(trim(row.fields[0]));
        e.target = std::string(trim(row.fields[1]));
        if (e.source.empty() || e.target.empty())
            throw ParseError(path + ": empty word field", row.line);
        dict.push_back(std::move(e));
    });
    return dict;
}

DictionaryMatrices dictionary_matrices(const EmbeddingTable& src,
                                       const EmbeddingTable& tgt,
                                       const std::vector<DictionaryEntry>& dict) {
    std::vector<const DictionaryEntry*> usable;
    long skipped = 0;
    for (const DictionaryEntry& e : dict) {
        if (src.contains(e.source) && tgt.contains(e.target))
            usable.push_back(&e);
        else
            ++skipped;
    }
    if (skipped > 0)
        log_warn("dictionary: " + std::to_string(skipped) +
                 " entries skipped (out of vocabulary)");
    DictionaryMatrices out{linalg::Matrix(usable.size(), src.dim()),
                           linalg::Matrix(usable.size(), tgt.dim()), skipped};
    for (std::size_t i = 0; i < usable.size(); ++i) {
        const EmbeddingTable::Lookup ls = src.lookup(usable[i]->source);
        const EmbeddingTable::Lookup lt = tgt.lookup(usable[i]->target);
        for (std::size_t j = 0; j < src.dim(); ++j) out.x.at(i, j) = ls.vector[j];
        for (std::size_t j = 0; j < tgt.dim(); ++j) out.z.at(i, j) = lt.vector[j];
    }
    return out;
}

std::vector<double> PairFeatureVector::concatenated() const {
    std::vector<double> out;
    out.reserve(wv_s.size() * 4 + 4);
    for (const std::vector<double>* part : {&wv_s, &wv_t, &cv_s, &cv_t})
        out.insert(out.end(), part->begin(), part->end());
    out.push_back(oov_s ? 1.0 : 0.0);
    out.push_back(oov_t ? 1.0 : 0.0);
    out.push_back(no_context_s ? 1.0 : 0.0);
    out.push_back(no_context_t ? 1.0 : 0.0);
    return out;
}

PairFeatureVector pair_feature_vector(const EmbeddingTable& src,
                                      const EmbeddingTable& tgt,
                                      const corpus::Pair& pair,
                                      const corpus::ContextClues* clues) {
    if (src.dim() != tgt.dim())
        throw InvalidArgument("pair_feature_vector: tables have dimensions " +
                              std::to_string(src.dim()) + " and " +
                              std::to_string(tgt.dim()));
    PairFeatureVector f;
    EmbeddingTable::Lookup ls = src.lookup(pair.source);
    EmbeddingTable::Lookup lt = tgt.lookup(pair.target);
    f.wv_s = std::move(ls.vector);
    f.wv_t = std::move(lt.vector);
    f.oov_s = ls.oov;
    f.oov_t = lt.oov;
    std::string ctx_s;
    std::string ctx_t;
    if (clues) {
        ctx_s = clues->gloss_src + " " + clues->example_src;
        ctx_t = clues->gloss_tgt + " " + clues->example_tgt;
    }
    EmbeddingTable::ContextVector cs = src.avg_context_vector(ctx_s);
    EmbeddingTable::ContextVector ct = tgt.avg_context_vector(ctx_t);
    f.cv_s = std::move(cs.vector);
    f.cv_t = std::move(ct.vector);
    f.no_context_s = cs.coverage == 0.0;
    f.no_context_t = ct.coverage == 0.0;
    return f;
}

}  // namespace cogkit::xling
