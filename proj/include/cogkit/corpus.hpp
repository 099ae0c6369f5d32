#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cogkit::corpus {

// One labeled word pair. label is 1 for cognate, 0 for false friend.
struct Pair {
    std::string source;
    std::string target;
    long synset_id = 0;
    int label = 0;

    bool operator==(const Pair&) const = default;
};

// Glosses and usage examples attached to a synset, both languages.
struct ContextClues {
    std::string gloss_src;
    std::string example_src;
    std::string gloss_tgt;
    std::string example_tgt;

    bool operator==(const ContextClues&) const = default;
};

struct Dataset {
    std::string name;
    std::vector<Pair> pairs;
    std::map<long, ContextClues> contexts;

    std::size_t size() const { return pairs.size(); }
    // Count of pairs carrying the given label.
    std::size_t count_label(int label) const;
    const ContextClues* context_for(long synset_id) const;
};

// Result of carving a gaze subset out of a dataset. Pairs are disjoint;
// subset gets n per class, remainder keeps everything else.
struct GazeSplit {
    Dataset subset;
    Dataset remainder;
};

// Reads tab-separated pairs: source, target, synset_id, label.
// label must be the literal "0" or "1"; synset_id a positive integer;
// words must be non-empty after trimming. Throws ParseError otherwise.
std::vector<Pair> load_pairs(const std::string& path);

// Reads tab-separated synset context rows:
// synset_id, gloss_src, example_src, gloss_tgt, example_tgt.
// Duplicate synset ids keep the first row; duplicates are counted and logged.
std::map<long, ContextClues> load_wordnet(const std::string& path);

Dataset load_dataset(const std::string& pairs_path,
                     const std::string& wordnet_path,
                     const std::string& name = "dataset");

// Downsamples the majority class to the minority count. The majority-class
// rows to keep are chosen by a seeded shuffle; surviving pairs retain their
// original file order.
Dataset balance(const Dataset& input, unsigned long long seed);

// Removes n pairs per class into the subset (seeded choice, original order
// preserved on both sides). n may be 0; n larger than a class count throws.
GazeSplit split_gaze_subset(const Dataset& input, std::size_t n,
                            unsigned long long seed);

// Serializes pairs back to the pair TSV format.
void save_pairs(const std::vector<Pair>& pairs, const std::string& path);

// One-line JSON summary: name, sizes per class, context coverage.
std::string summary_json(const Dataset& dataset);

}  // namespace cogkit::corpus
