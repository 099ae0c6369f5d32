#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "cogkit/corpus.hpp"
#include "cogkit/linalg.hpp"
#include "cogkit/stats.hpp"

namespace cogkit::gaze {

// One fixation row from an eye-tracker report. ia_index 0 means the gaze
// rested outside every interest area.
struct FixationEvent {
    std::string participant;
    std::string trial_id;
    long ia_index = 0;
    long start_ms = 0;
    long end_ms = 0;
    double x = 0;
    double y = 0;
    double pupil = 0;

    long duration() const { return end_ms - start_ms; }
};

struct SaccadeEvent {
    std::string participant;
    std::string trial_id;
    long from_ia = 0;
    long to_ia = 0;
    long duration_ms = 0;
    bool is_regression = false;   // to an earlier IA, both sides inside IAs
    bool is_progression = false;  // to a later IA, both sides inside IAs
};

struct FixationReport {
    std::vector<FixationEvent> events;
    long dropped_short = 0;  // rows under the duration threshold
};

// TSV columns: participant, trial_id, ia_index, start_ms, end_ms, x, y,
// pupil. Fixations shorter than min_duration_ms are dropped and counted.
FixationReport parse_fixation_report(const std::string& path,
                                     long min_duration_ms = 4);

// Screen layout of one trial. TSV columns: trial_id, synset_id, source,
// target, ia_count.
struct TrialInfo {
    std::string trial_id;
    long synset_id = 0;
    std::string source;
    std::string target;
    long ia_count = 0;
};

std::vector<TrialInfo> load_trial_map(const std::string& path);

// Events of one (participant, trial), ordered by start_ms.
using TrialEvents = std::map<std::pair<std::string, std::string>,
                             std::vector<FixationEvent>>;

TrialEvents group_trials(const std::vector<FixationEvent>& events);

// n fixations give exactly n-1 saccades; saccade duration is the gap
// between consecutive fixations (clamped at 0 for overlaps). Throws
// InsufficientData on an empty trial.
std::vector<SaccadeEvent> derive_saccades(
    const std::vector<FixationEvent>& trial_fixations);

inline constexpr std::size_t kRawFeatureCount = 18;
// Schema of the raw per-trial vector; the first 8 coordinates are the
// default selected set.
extern const std::array<const char*, kRawFeatureCount> kRawFeatureNames;

// Raw 18-feature vector for one trial. Fixation statistics use only
// fixations inside an interest area; a trial with none throws
// InsufficientData.
std::vector<double> trial_feature_vector(
    const std::vector<FixationEvent>& fixations,
    const std::vector<SaccadeEvent>& saccades, long ia_count_on_screen);

// For each k in k_grid: rank columns by two-class ANOVA F-score, keep the
// top k, score with 5-fold logistic-regression CV accuracy; returns the
// winning index set sorted ascending (ties in score prefer smaller k).
std::vector<std::size_t> select_k_best(const linalg::Matrix& x,
                                       const std::vector<int>& y,
                                       const std::vector<int>& k_grid,
                                       unsigned long long seed);

struct AveragedVector {
    std::vector<double> values;
    std::size_t contributors = 0;
};

// Elementwise mean over per-participant vectors of one trial.
AveragedVector average_over_participants(
    const std::vector<std::vector<double>>& vectors);

// Per-trial reading-effort statistic for the significance analysis:
// in-IA fixation time in seconds, optionally normalized by IA count.
enum class DurationNorm { ia_count, none };

struct ParticipantGazeStats {
    std::string participant;
    double mean_pos = 0, var_pos = 0;
    double mean_neg = 0, var_neg = 0;
    std::size_t n_pos = 0, n_neg = 0;
    stats::WelchResult welch{0, 0, 1};
};

// Per participant: per-class mean/variance of the per-trial statistic and a
// Welch two-tailed t-test between the classes. Labels come from matching
// (synset_id, source, target) against pairs; unmatched trials are skipped
// with a warning, participants with fewer than 2 trials in either class are
// skipped with a log entry.
std::vector<ParticipantGazeStats> fixation_duration_analysis(
    const std::vector<FixationEvent>& events,
    const std::vector<TrialInfo>& trials,
    const std::vector<corpus::Pair>& pairs,
    DurationNorm norm = DurationNorm::ia_count);

}  // namespace cogkit::gaze
