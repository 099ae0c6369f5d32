#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cogkit/corpus.hpp"
#include "cogkit/gaze.hpp"
#include "cogkit/learn.hpp"

namespace cogkit::pipeline {

inline constexpr const char* kToolName = "cogkit";
inline constexpr const char* kToolVersion = "0.1.0";

// How the gaze feature block is filled per pair: recorded trials, regressor
// predictions, or recordings with a regressor fallback.
enum class GazeMode { automatic, collected, predicted };

std::string to_string(GazeMode mode);
GazeMode gaze_mode_from_string(const std::string& s);

// One requested evaluation: a feature set (e.g. "xlm+gaze"), a model name
// ("logreg", "linear_svm", "ffnn"), and a dataset selector ("d1", "d2",
// "d1+d2").
struct ExperimentRow {
    std::string feature_set;
    std::string model;
    std::string dataset;
    GazeMode gaze_mode = GazeMode::automatic;
};

// Declarative experiment manifest. Loaded from JSON; every relative path is
// resolved against the config file's directory.
struct ExperimentConfig {
    std::string name = "experiment";
    unsigned long long seed = 0;
    int k = 5;

    std::string pairs_path;
    std::string wordnet_path;
    bool balance = true;
    std::size_t gaze_subset_n = 0;

    // feature-set name -> (source table path, target table path)
    std::map<std::string, std::pair<std::string, std::string>> embeddings;
    std::string phonetic_table_path;
    int lexical_q = 2;
    double lexical_alpha = 0.5;

    std::string gaze_report_path;
    std::string gaze_trials_path;
    long min_fixation_ms = 4;
    // Empty grid means the default first-8 schema coordinates.
    std::vector<int> select_k_grid;
    std::string regressor_embedding;
    learn::TrainConfig regressor =
        learn::TrainConfig::defaults(learn::ModelKind::gaze_regressor);
    gaze::DurationNorm duration_norm = gaze::DurationNorm::ia_count;

    // model name -> base config; grids handled at parse time via *_grid keys.
    std::map<std::string, learn::TrainConfig> models;
    std::map<std::string, std::vector<learn::TrainConfig>> model_grids;
    learn::SearchMetric search_metric = learn::SearchMetric::weighted_f1;

    std::vector<ExperimentRow> rows;
    std::string output_dir = ".";

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_json_string(const std::string& text,
                                             const std::string& base_dir);
    // Sorted-key dump of the resolved manifest; input of the config hash.
    std::string canonical_json() const;
};

struct FoldScore {
    int fold = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

struct ReportRow {
    std::string feature_set;
    std::string model;
    std::string dataset;
    std::string gaze_mode;  // "none" when the feature set has no gaze block
    std::string status = "ok";
    std::string error;
    std::size_t n_samples = 0;
    std::size_t feature_dim = 0;
    std::vector<FoldScore> folds;
    double mean_precision = 0;
    double mean_recall = 0;
    double mean_f1 = 0;
};

struct EvalReport {
    std::string tool_version = kToolVersion;
    std::string config_hash;
    unsigned long long seed = 0;
    std::vector<ReportRow> rows;
    std::string timestamp;  // volatile, excluded from determinism
    long wall_ms = 0;       // volatile

    bool all_ok() const;
    // Full document including the volatile "run" block.
    std::string to_json_string() const;
    // Header plus one row per requested combination (mean scores).
    std::string to_csv() const;
};

// Runs every configured experiment row. Writes report.json and report.csv
// into config.output_dir, plus gaze_comparison.csv (pair_id, feature_name,
// gold, predicted) when both collected gaze and a regressor are available.
// Failed rows are recorded in the report rather than aborting the run.
EvalReport run_pipeline(const ExperimentConfig& config);

// Trains one model on the full selected dataset (no cross-validation).
learn::TrainedModel train_single(const ExperimentConfig& config,
                                 const std::string& model,
                                 const std::string& feature_set,
                                 const std::string& dataset,
                                 GazeMode mode = GazeMode::automatic);

// Predicted gaze features for every pair of the selected dataset, written as
// CSV with one column per regressor output.
void predict_gaze_to_csv(const ExperimentConfig& config,
                         const learn::TrainedModel& model,
                         const std::string& dataset, const std::string& out_path);

// report.json -> report.csv conversion.
void report_json_to_csv(const std::string& report_json_path,
                        const std::string& out_path);

// File-level gaze operations backing the CLI.
void gaze_extract_csv(const std::string& report_path,
                      const std::string& trials_path, long min_fixation_ms,
                      const std::string& out_path);
void gaze_analyze_csv(const std::string& report_path,
                      const std::string& trials_path,
                      const std::string& pairs_path, long min_fixation_ms,
                      gaze::DurationNorm norm, const std::string& out_path);
std::string gaze_select_json(const std::string& report_path,
                             const std::string& trials_path,
                             const std::string& pairs_path,
                             long min_fixation_ms,
                             const std::vector<int>& k_grid,
                             unsigned long long seed);

}  // namespace cogkit::pipeline
