#include "cogkit/gaze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>

#include "cogkit/error.hpp"
#include "cogkit/learn.hpp"
#include "cogkit/log.hpp"
#include "cogkit/tsv.hpp"
#include "cogkit/utf8.hpp"

namespace cogkit::gaze {

using linalg::Matrix;

FixationReport parse_fixation_report(const std::string& path,
                                     long min_duration_ms) {
    FixationReport report;
    for_each_tsv_row(path, [&](const TsvRow& row) {
        if (row.fields.size() != 8)
            throw ParseError(path + ": expected 8 tab-separated fields, got " +
                                 std::to_string(row.fields.size()),
                             row.line);
        FixationEvent e;
        e.participant = std::string(trim(row.fields[0]));
        e.trial_id = std::string(trim(row.fields[1]));
        if (e.participant.empty() || e.trial_id.empty())
            throw ParseError(path + ": empty participant or trial id", row.line);
        e.ia_index = parse_int_field(row.fields[2], path, row.line);
        e.start_ms = parse_int_field(row.fields[3], path, row.line);
        e.end_ms = parse_int_field(row.fields[4], path, row.line);
        e.x = parse_double_field(row.fields[5], path, row.line);
        e.y = parse_double_field(row.fields[6], path, row.line);
        e.pupil = parse_double_field(row.fields[7], path, row.line);
        if (e.ia_index < 0)
            throw ParseError(path + ": negative interest-area index", row.line);
        if (e.start_ms < 0)
            throw ParseError(path + ": negative start time", row.line);
        if (e.end_ms <= e.start_ms)
            throw ParseError(path + ": fixation must end after it starts",
                             row.line);
        if (e.pupil < 0)
            throw ParseError(path + ": negative pupil size", row.line);
        if (e.duration() < min_duration_ms) {
            ++report.dropped_short;
            return;
        }
        report.events.push_back(std::move(e));
    });
    if (report.dropped_short > 0)
        log_info(path + ": dropped " + std::to_string(report.dropped_short) +
                 " fixations shorter than " + std::to_string(min_duration_ms) +
                 " ms");
    return report;
}

std::vector<TrialInfo> load_trial_map(const std::string& path) {
    std::vector<TrialInfo> trials;
    std::set<std::string> seen;
    for_each_tsv_row(path, [&](const TsvRow& row) {
        if (row.fields.size() != 5)
            throw ParseError(path + ": expected 5 tab-separated fields, got " +
                                 std::to_string(row.fields.size()),
                             row.line);
        TrialInfo t;
        t.trial_id = std::string(trim(row.fields[0]));
        t.synset_id = parse_int_field(row.fields[1], path, row.line);
        t.source = std::string(trim(row.fields[2]));
        t.target = std::string(trim(row.fields[3]));
        t.ia_count = parse_int_field(row.fields[4], path, row.line);
        if (t.trial_id.empty())
            throw ParseError(path + ": empty trial id", row.line);
        if (t.ia_count <= 0)
            throw ParseError(path + ": ia_count must be positive", row.line);
        if (!seen.insert(t.trial_id).second)
            throw ParseError(path + ": duplicate trial id '" + t.trial_id + "'",
                             row.line);
        trials.push_back(std::move(t));
    });
    return trials;
}

TrialEvents group_trials(const std::vector<FixationEvent>& events) {
    TrialEvents grouped;
    for (const FixationEvent& e : events)
        grouped[{e.participant, e.trial_id}].push_back(e);
    for (auto& [key, trial] : grouped)
        std::stable_sort(trial.begin(), trial.end(),
                         [](const FixationEvent& a, const FixationEvent& b) {
                             return a.start_ms < b.start_ms;
                         });
    return grouped;
}

std::vector<SaccadeEvent> derive_saccades(
    const std::vector<FixationEvent>& trial_fixations) {
    if (trial_fixations.empty())
        throw InsufficientData("derive_saccades: trial has no fixations");
    std::vector<SaccadeEvent> saccades;
    for (std::size_t i = 1; i < trial_fixations.size(); ++i) {
        const FixationEvent& prev = trial_fixations[i - 1];
        const FixationEvent& next = trial_fixations[i];
        SaccadeEvent s;
        s.participant = prev.participant;
        s.trial_id = prev.trial_id;
        s.from_ia = prev.ia_index;
        s.to_ia = next.ia_index;
        s.duration_ms = std::max(0L, next.start_ms - prev.end_ms);
        const bool both_inside = s.from_ia > 0 && s.to_ia > 0;
        s.is_regression = both_inside && s.to_ia < s.from_ia;
        s.is_progression = both_inside && s.to_ia > s.from_ia;
        saccades.push_back(std::move(s));
    }
    return saccades;
}

const std::array<const char*, kRawFeatureCount> kRawFeatureNames = {
    "fixation_duration_avg",
    "saccade_duration_avg",
    "fixation_count",
    "fixation_duration_max",
    "fixation_duration_min",
    "ia_count",
    "run_count",
    "saccade_count",
    "fixation_duration_total",
    "regression_count",
    "progression_count",
    "pupil_avg",
    "pupil_max",
    "pupil_min",
    "first_fixation_duration",
    "trial_duration_total",
    "run_length_avg",
    "ia_dwell_avg",
};

std::vector<double> trial_feature_vector(
    const std::vector<FixationEvent>& fixations,
    const std::vector<SaccadeEvent>& saccades, long ia_count_on_screen) {
    if (ia_count_on_screen <= 0)
        throw InvalidArgument("trial_feature_vector: ia_count must be positive");
    std::vector<const FixationEvent*> inside;
    for (const FixationEvent& e : fixations)
        if (e.ia_index > 0) inside.push_back(&e);
    if (inside.empty())
        throw InsufficientData(
            "trial_feature_vector: no fixation inside an interest area");

    double total_dur = 0;
    double max_dur = 0;
    double min_dur = std::numeric_limits<double>::infinity();
    double pupil_sum = 0;
    double pupil_max = 0;
    double pupil_min = std::numeric_limits<double>::infinity();
    long run_count = 0;
    long previous_ia = -1;
    std::set<long> visited;
    for (const FixationEvent* e : inside) {
        const double d = static_cast<double>(e->duration());
        total_dur += d;
        max_dur = std::max(max_dur, d);
        min_dur = std::min(min_dur, d);
        pupil_sum += e->pupil;
        pupil_max = std::max(pupil_max, e->pupil);
        pupil_min = std::min(pupil_min, e->pupil);
        if (e->ia_index != previous_ia) {
            ++run_count;
            previous_ia = e->ia_index;
        }
        visited.insert(e->ia_index);
    }
    const double n = static_cast<double>(inside.size());

    double saccade_dur_sum = 0;
    long regressions = 0;
    long progressions = 0;
    for (const SaccadeEvent& s : saccades) {
        saccade_dur_sum += static_cast<double>(s.duration_ms);
        if (s.is_regression) ++regressions;
        if (s.is_progression) ++progressions;
    }
    const double saccade_avg =
        saccades.empty() ? 0.0
                         : saccade_dur_sum / static_cast<double>(saccades.size());

    long first_start = fixations.front().start_ms;
    long last_end = 0;
    for (const FixationEvent& e : fixations) {
        first_start = std::min(first_start, e.start_ms);
        last_end = std::max(last_end, e.end_ms);
    }

    std::vector<double> v(kRawFeatureCount);
    v[0] = total_dur / n;
    v[1] = saccade_avg;
    v[2] = n;
    v[3] = max_dur;
    v[4] = min_dur;
    v[5] = static_cast<double>(ia_count_on_screen);
    v[6] = static_cast<double>(run_count);
    v[7] = static_cast<double>(saccades.size());
    v[8] = total_dur;
    v[9] = static_cast<double>(regressions);
    v[10] = static_cast<double>(progressions);
    v[11] = pupil_sum / n;
    v[12] = pupil_max;
    v[13] = pupil_min;
    v[14] = static_cast<double>(inside.front()->duration());
    v[15] = static_cast<double>(last_end - first_start);
    v[16] = n / static_cast<double>(run_count);
    v[17] = total_dur / static_cast<double>(visited.size());
    return v;
}

namespace {

// Two-class ANOVA F-score per column. Constant columns score 0.
std::vector<double> anova_f_scores(const Matrix& x, const std::vector<int>& y) {
    const std::size_t d = x.cols();
    std::vector<double> scores(d, 0.0);
    std::vector<std::size_t> idx[2];
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1)
            throw InvalidArgument("select_k_best: labels must be 0 or 1");
        idx[y[i]].push_back(i);
    }
    if (idx[0].size() < 2 || idx[1].size() < 2)
        throw InsufficientData("select_k_best: need at least 2 samples per class");
    const double n0 = static_cast<double>(idx[0].size());
    const double n1 = static_cast<double>(idx[1].size());
    const double n = n0 + n1;
    for (std::size_t j = 0; j < d; ++j) {
        double mean[2] = {0, 0};
        for (int c = 0; c < 2; ++c) {
            for (std::size_t i : idx[c]) mean[c] += x.at(i, j);
            mean[c] /= static_cast<double>(idx[c].size());
        }
        const double grand = (n0 * mean[0] + n1 * mean[1]) / n;
        const double between = n0 * (mean[0] - grand) * (mean[0] - grand) +
                               n1 * (mean[1] - grand) * (mean[1] - grand);
        double within = 0;
        for (int c = 0; c < 2; ++c)
            for (std::size_t i : idx[c]) {
                const double delta = x.at(i, j) - mean[c];
                within += delta * delta;
            }
        // df_between = 1, df_within = n - 2.
        if (within > 0)
            scores[j] = between / (within / (n - 2.0));
        else
            scores[j] = mean[0] != mean[1]
                            ? std::numeric_limits<double>::infinity()
                            : 0.0;
    }
    return scores;
}

Matrix take_columns(const Matrix& x, const std::vector<std::size_t>& cols) {
    Matrix out(x.rows(), cols.size());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out.at(i, j) = x.at(i, cols[j]);
    return out;
}

}  // namespace

std::vector<std::size_t> select_k_best(const Matrix& x, const std::vector<int>& y,
                                       const std::vector<int>& k_grid,
                                       unsigned long long seed) {
    if (k_grid.empty()) throw InvalidArgument("select_k_best: empty k grid");
    if (x.rows() != y.size())
        throw InvalidArgument("select_k_best: row/label count mismatch");
    for (int k : k_grid)
        if (k < 1 || static_cast<std::size_t>(k) > x.cols())
            throw InvalidArgument("select_k_best: k=" + std::to_string(k) +
                                  " outside [1, " + std::to_string(x.cols()) +
                                  "]");

    const std::vector<double> f = anova_f_scores(x, y);
    std::vector<std::size_t> ranked(x.cols());
    std::iota(ranked.begin(), ranked.end(), 0);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });

    learn::TrainConfig config = learn::TrainConfig::defaults(learn::ModelKind::logreg);
    config.seed = seed;
    const learn::FoldAssignment folds = learn::stratified_kfold(y, 5, seed);

    double best_score = -1.0;
    int best_k = 0;
    for (int k : k_grid) {
        const std::vector<std::size_t> top(ranked.begin(), ranked.begin() + k);
        const Matrix xk = take_columns(x, top);
        const learn::CvResult cv = learn::cross_validate(xk, y, config, folds);
        const bool better = cv.mean_accuracy > best_score ||
                            (cv.mean_accuracy == best_score && k < best_k);
        if (best_k == 0 || better) {
            best_score = cv.mean_accuracy;
            best_k = k;
        }
    }
    std::vector<std::size_t> selected(ranked.begin(), ranked.begin() + best_k);
    std::sort(selected.begin(), selected.end());
    return selected;
}

AveragedVector average_over_participants(
    const std::vector<std::vector<double>>& vectors) {
    if (vectors.empty())
        throw InsufficientData("average_over_participants: no contributors");
    AveragedVector out;
    out.values.assign(vectors.front().size(), 0.0);
    for (const std::vector<double>& v : vectors) {
        if (v.size() != out.values.size())
            throw InvalidArgument(
                "average_over_participants: inconsistent dimensions");
        for (std::size_t j = 0; j < v.size(); ++j) out.values[j] += v[j];
    }
    for (double& x : out.values) x /= static_cast<double>(vectors.size());
    out.contributors = vectors.size();
    return out;
}

std::vector<ParticipantGazeStats> fixation_duration_analysis(
    const std::vector<FixationEvent>& events,
    const std::vector<TrialInfo>& trials,
    const std::vector<corpus::Pair>& pairs, DurationNorm norm) {
    // Label lookup by the trial's (synset, source word, target word).
    std::map<std::tuple<long, std::string, std::string>, int> label_of;
    for (const corpus::Pair& p : pairs)
        label_of[{p.synset_id, p.source, p.target}] = p.label;
    std::map<std::string, const TrialInfo*> trial_of;
    for (const TrialInfo& t : trials) trial_of[t.trial_id] = &t;

    // participant -> per-class lists of the per-trial statistic.
    std::map<std::string, std::array<std::vector<double>, 2>> samples;
    long unmatched = 0;
    for (const auto& [key, fixations] : group_trials(events)) {
        const auto& [participant, trial_id] = key;
        auto it = trial_of.find(trial_id);
        if (it == trial_of.end()) {
            ++unmatched;
            continue;
        }
        const TrialInfo& trial = *it->second;
        auto label_it =
            label_of.find({trial.synset_id, trial.source, trial.target});
        if (label_it == label_of.end()) {
            ++unmatched;
            continue;
        }
        double total_ms = 0;
        for (const FixationEvent& e : fixations)
            if (e.ia_index > 0) total_ms += static_cast<double>(e.duration());
        double statistic = total_ms / 1000.0;
        if (norm == DurationNorm::ia_count)
            statistic /= static_cast<double>(trial.ia_count);
        samples[participant][label_it->second].push_back(statistic);
    }
    if (unmatched > 0)
        log_warn("gaze analysis: " + std::to_string(unmatched) +
                 " trials skipped (no matching trial map or pair entry)");

    std::vector<ParticipantGazeStats> rows;
    for (const auto& [participant, by_class] : samples) {
        if (by_class[0].size() < 2 || by_class[1].size() < 2) {
            log_warn("gaze analysis: participant " + participant +
                     " skipped (a class has fewer than 2 trials)");
            continue;
        }
        const stats::Moments pos =
            stats::sample_moments(by_class[1].data(), by_class[1].size());
        const stats::Moments neg =
            stats::sample_moments(by_class[0].data(), by_class[0].size());
        ParticipantGazeStats row;
        row.participant = participant;
        row.mean_pos = pos.mean;
        row.var_pos = pos.var;
        row.n_pos = pos.n;
        row.mean_neg = neg.mean;
        row.var_neg = neg.var;
        row.n_neg = neg.n;
        row.welch = stats::welch_t_test(pos.mean, pos.var, pos.n, neg.mean,
                                        neg.var, neg.n);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace cogkit::gaze
