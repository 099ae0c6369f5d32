#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cogkit/corpus.hpp"
#include "cogkit/linalg.hpp"

namespace cogkit::xling {

// Word vector table in the text format `N D` header + `word v1 .. vD` rows.
// Word order is insertion order; duplicate words keep the first row.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::string name, std::size_t dim)
        : name_(std::move(name)), dim_(dim) {}

    static EmbeddingTable load(const std::string& path,
                               const std::string& name = "");
    // Values written with 9 significant digits. For a table loaded from this
    // format, save reproduces the file bit for bit; values straight from
    // arithmetic lose whatever 9 digits cannot carry on the first save.
    void save(const std::string& path) const;

    const std::string& name() const { return name_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return words_.size(); }
    long duplicates_dropped() const { return duplicates_; }
    const std::vector<std::string>& words() const { return words_; }

    bool contains(std::string_view word) const;
    // False if the word is already present (row ignored).
    bool add(std::string_view word, std::span<const double> vector);
    std::span<const double> row(std::size_t i) const;

    struct Lookup {
        std::vector<double> vector;
        bool oov = false;
    };
    // Query is whitespace-trimmed before the exact match.
    Lookup lookup(std::string_view word) const;

    struct ContextVector {
        std::vector<double> vector;
        double coverage = 0.0;  // in-vocabulary tokens / total tokens
    };
    ContextVector avg_context_vector(std::string_view text) const;

private:
    std::string name_;
    std::size_t dim_ = 0;
    std::vector<std::string> words_;
    std::vector<double> values_;  // size() * dim_, row-major
    std::unordered_map<std::string, std::size_t> index_;
    long duplicates_ = 0;
};

// Each preprocessing step applies to both input matrices and is individually
// toggleable for ablation.
struct ProcrustesOptions {
    bool unit_normalize = true;
    bool center_columns = true;
    bool renormalize = true;
};

// D x D mapping with ||W'W - I||_max <= 1e-6, enforced at construction.
struct OrthogonalMap {
    linalg::Matrix w;
    std::size_t dim() const { return w.rows(); }
    static OrthogonalMap identity(std::size_t d);
};

// W = U V' from the SVD of X'Z after preprocessing; minimizes ||XW - Z||_F
// over orthogonal W. Rows of X and Z are paired dictionary entries.
OrthogonalMap procrustes_align(linalg::Matrix x, linalg::Matrix z,
                               const ProcrustesOptions& options = {});

// Right-multiplies every stored vector by map.w. Norm-preserving.
EmbeddingTable apply_mapping(const EmbeddingTable& table,
                             const OrthogonalMap& map);

struct DictionaryEntry {
    std::string source;
    std::string target;
};

// TSV `source_word<TAB>target_word`.
std::vector<DictionaryEntry> load_dictionary(const std::string& path);

struct DictionaryMatrices {
    linalg::Matrix x;  // source vectors, one per usable entry
    linalg::Matrix z;  // paired target vectors
    long skipped = 0;  // entries with either side out of vocabulary
};

DictionaryMatrices dictionary_matrices(const EmbeddingTable& src,
                                       const EmbeddingTable& tgt,
                                       const std::vector<DictionaryEntry>& dict);

// Pair features in the aligned space: word vectors by lookup, context
// vectors by averaging in-vocabulary gloss+example tokens.
struct PairFeatureVector {
    std::vector<double> wv_s;
    std::vector<double> wv_t;
    std::vector<double> cv_s;
    std::vector<double> cv_t;
    bool oov_s = false;
    bool oov_t = false;
    bool no_context_s = false;
    bool no_context_t = false;

    // [wv_s; wv_t; cv_s; cv_t] followed by the four flags as 0/1 entries,
    // length 4D + 4.
    std::vector<double> concatenated() const;
};

PairFeatureVector pair_feature_vector(const EmbeddingTable& src,
                                      const EmbeddingTable& tgt,
                                      const corpus::Pair& pair,
                                      const corpus::ContextClues* clues);

}  // namespace cogkit::xling
