#include "cogkit/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "cogkit/error.hpp"
#include "cogkit/log.hpp"
#include "cogkit/rng.hpp"
#include "cogkit/tsv.hpp"
#include "cogkit/utf8.hpp"

namespace cogkit::corpus {

std::size_t Dataset::count_label(int label) const {
    std::size_t n = 0;
    for (const Pair& p : pairs)
        if (p.label == label) ++n;
    return n;
}

const ContextClues* Dataset::context_for(long synset_id) const {
    auto it = contexts.find(synset_id);
    return it == contexts.end() ? nullptr : &it->second;
}

std::vector<Pair> load_pairs(const std::string& path) {
    std::vector<Pair> pairs;
    for_each_tsv_row(path, [&](const TsvRow& row) {
        if (row.fields.size() != 4)
            throw ParseError(path + ": expected 4 tab-separated fields, got " +
                                 std::to_string(row.fields.size()),
                             row.line);
        Pair p;
        p.source = std::string(trim(row.fields[0]));
        p.target = std::string(trim(row.fields[1]));
        if (p.source.empty() || p.target.empty())
            throw ParseError(path + ": empty word field", row.line);
        p.synset_id = parse_int_field(row.fields[2], path, row.line);
        if (p.synset_id <= 0)
            throw ParseError(path + ": synset_id must be positive", row.line);
        const std::string_view label = trim(row.fields[3]);
        if (label == "0")
            p.label = 0;
        else if (label == "1")
            p.label = 1;
        else
            throw ParseError(path + ": label must be 0 or 1", row.line);
        pairs.push_back(std::move(p));
    });
    return pairs;
}

std::map<long, ContextClues> load_wordnet(const std::string& path) {
    std::map<long, ContextClues> contexts;
    long duplicates = 0;
    for_each_tsv_row(path, [&](const TsvRow& row) {
        if (row.fields.size() != 5)
            throw ParseError(path + ": expected 5 tab-separated fields, got " +
                                 std::to_string(row.fields.size()),
                             row.line);
        const long synset_id = parse_int_field(row.fields[0], path, row.line);
        ContextClues c;
        c.gloss_src = std::string(trim(row.fields[1]));
        c.example_src = std::string(trim(row.fields[2]));
        c.gloss_tgt = std::string(trim(row.fields[3]));
        c.example_tgt = std::string(trim(row.fields[4]));
        if (!contexts.emplace(synset_id, std::move(c)).second) ++duplicates;
    });
    if (duplicates > 0)
        log_warn(path + ": " + std::to_string(duplicates) +
                 " duplicate synset rows ignored (first occurrence kept)");
    return contexts;
}

Dataset load_dataset(const std::string& pairs_path,
                     const std::string& wordnet_path, const std::string& name) {
    Dataset d;
    d.name = name;
    d.pairs = load_pairs(pairs_path);
    if (!wordnet_path.empty()) d.contexts = load_wordnet(wordnet_path);
    return d;
}

namespace {

// Indices of pairs carrying the given label, in file order.
std::vector<std::size_t> label_indices(const Dataset& d, int label) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.pairs.size(); ++i)
        if (d.pairs[i].label == label) idx.push_back(i);
    return idx;
}

Dataset take_indices(const Dataset& d, const std::set<std::size_t>& keep,
                     const std::string& name) {
    Dataset out;
    out.name = name;
    out.contexts = d.contexts;
    out.pairs.reserve(keep.size());
    for (std::size_t i : keep) out.pairs.push_back(d.pairs[i]);
    return out;
}

// Seeded choice of n indices out of pool, returned as a set.
std::set<std::size_t> choose_n(std::vector<std::size_t> pool, std::size_t n,
                               Rng& rng) {
    rng.shuffle(pool);
    return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

Dataset balance(const Dataset& input, unsigned long long seed) {
    std::vector<std::size_t> pos = label_indices(input, 1);
    std::vector<std::size_t> neg = label_indices(input, 0);
    const std::size_t target = std::min(pos.size(), neg.size());
    Rng rng(seed);
    std::set<std::size_t> keep;
    if (pos.size() > target) {
        keep = choose_n(std::move(pos), target, rng);
        keep.insert(neg.begin(), neg.end());
    } else if (neg.size() > target) {
        keep = choose_n(std::move(neg), target, rng);
        keep.insert(pos.begin(), pos.end());
    } else {
        keep.insert(pos.begin(), pos.end());
        keep.insert(neg.begin(), neg.end());
    }
    return take_indices(input, keep, input.name);
}

GazeSplit split_gaze_subset(const Dataset& input, std::size_t n,
                            unsigned long long seed) {
    std::vector<std::size_t> pos = label_indices(input, 1);
    std::vector<std::size_t> neg = label_indices(input, 0);
    if (n > pos.size() || n > neg.size())
        throw InvalidArgument(
            "split_gaze_subset: requested " + std::to_string(n) +
            " per class, have " + std::to_string(pos.size()) + " positive and " +
            std::to_string(neg.size()) + " negative");
    Rng rng(seed);
    std::set<std::size_t> subset_idx = choose_n(std::move(pos), n, rng);
    std::set<std::size_t> neg_pick = choose_n(std::move(neg), n, rng);
    subset_idx.insert(neg_pick.begin(), neg_pick.end());

    std::set<std::size_t> remainder_idx;
    for (std::size_t i = 0; i < input.pairs.size(); ++i)
        if (!subset_idx.count(i)) remainder_idx.insert(i);

    GazeSplit split;
    split.subset = take_indices(input, subset_idx, input.name + "-gaze");
    split.remainder = take_indices(input, remainder_idx, input.name + "-rest");
    return split;
}

void save_pairs(const std::vector<Pair>& pairs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const Pair& p : pairs)
        out << p.source << '\t' << p.target << '\t' << p.synset_id << '\t'
            << p.label << '\n';
    if (!out.flush()) throw IoError("write failed: " + path);
}

std::string summary_json(const Dataset& dataset) {
    std::size_t with_context = 0;
    for (const Pair& p : dataset.pairs)
        if (dataset.contexts.count(p.synset_id)) ++with_context;
    std::ostringstream os;
    os << "{\"name\":\"" << dataset.name << "\",\"pairs\":" << dataset.size()
       << ",\"cognates\":" << dataset.count_label(1)
       << ",\"false_friends\":" << dataset.count_label(0)
       << ",\"with_context\":" << with_context
       << ",\"synsets\":" << dataset.contexts.size() << "}";
    return os.str();
}

}  // namespace cogkit::corpus
