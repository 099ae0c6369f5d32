#pragma once

#include <span>
#include <string>
#include <vector>

#include "cogkit/linalg.hpp"

namespace cogkit::learn {

enum class ModelKind { logreg, linear_svm, ffnn_classifier, gaze_regressor };
enum class Activation { tanh, hardtanh, sigmoid, relu };

std::string to_string(ModelKind kind);
std::string to_string(Activation activation);
ModelKind model_kind_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);

struct TrainConfig {
    ModelKind kind = ModelKind::logreg;
    double c = 1.0;              // inverse regularization strength
    int hidden_dim = 50;         // ffnn_classifier only
    Activation activation = Activation::tanh;
    double lr_initial = 1.0;
    double lr_floor = 1e-3;
    double dropout = 0.0;
    int max_epochs = 1000;
    int batch_size = 32;         // gaze_regressor only
    unsigned long long seed = 0;

    static TrainConfig defaults(ModelKind kind);
    void validate() const;
};

// Per-feature z-scoring. Zero-variance features get inv_std 0 so they map to
// 0 instead of NaN.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> inv_std;

    static Normalizer fit(const linalg::Matrix& x);
    std::size_t dim() const { return mean.size(); }
    void apply_row(std::span<const double> in, std::span<double> out) const;
    linalg::Matrix apply(const linalg::Matrix& x) const;
    // x_original = z / inv_std + mean (used to undo target scaling).
    void invert_row(std::span<const double> in, std::span<double> out) const;
};

struct TrainedModel {
    ModelKind kind = ModelKind::logreg;
    TrainConfig config;
    Normalizer input_norm;
    Normalizer target_norm;            // gaze_regressor only, else empty
    std::vector<int> layer_dims;       // [in, hidden..., out]
    std::vector<linalg::Matrix> weights;  // one [out x in] matrix per layer
    std::vector<std::vector<double>> biases;
    std::vector<std::string> output_names;  // regressor target labels, optional

    // Classifiers: probability of label 1 for logreg/ffnn, raw margin for
    // the SVM.
    double decision_score(std::span<const double> x) const;
    // Threshold 0.5 on probability (margin 0 for the SVM); ties go to 1.
    int predict_label(std::span<const double> x) const;
    std::vector<int> predict_labels(const linalg::Matrix& x) const;
    // Regressor output in original target units.
    std::vector<double> predict_vector(std::span<const double> x) const;
    linalg::Matrix predict_matrix(const linalg::Matrix& x) const;

    std::string to_json_string() const;
    static TrainedModel from_json_string(const std::string& text);
    void save(const std::string& path) const;
    static TrainedModel load(const std::string& path);
};

// Input matrices are raw; every trainer fits the z-scoring normalizer on its
// training data and stores it in the model. Labels are 0/1.
TrainedModel train_logistic_regression(const linalg::Matrix& x,
                                       const std::vector<int>& y,
                                       const TrainConfig& config);
TrainedModel train_linear_svm(const linalg::Matrix& x,
                              const std::vector<int>& y,
                              const TrainConfig& config);
TrainedModel train_ffnn_classifier(const linalg::Matrix& x,
                                   const std::vector<int>& y,
                                   const TrainConfig& config);
TrainedModel train_gaze_regressor(const linalg::Matrix& x,
                                  const linalg::Matrix& y,
                                  const TrainConfig& config);
TrainedModel train(const linalg::Matrix& x, const std::vector<int>& y,
                   const TrainConfig& config);

// Objectives exposed with analytic gradients so finite-difference checks can
// exercise exactly what the trainers optimize. Parameters are flattened as
// [weights row-major..., bias] per layer, layers in order.

// L2-regularized linear model: mean log loss or mean hinge loss plus
// ||w||^2 / (2C), bias unregularized.
class LinearObjective {
public:
    LinearObjective(const linalg::Matrix& x, const std::vector<int>& y,
                    double c, bool hinge);
    std::size_t param_count() const { return x_.cols() + 1; }
    double value(std::span<const double> params) const;
    std::vector<double> gradient(std::span<const double> params) const;

private:
    const linalg::Matrix& x_;
    const std::vector<int>& y_;
    double c_;
    bool hinge_;
};

// Fully connected network; hidden layers use `activation`. loss_bce=true
// pairs a single sigmoid output with binary cross-entropy; false means
// linear outputs with mean squared error (averaged over samples * outputs).
// dropout_mask, when non-null, scales hidden activations per layer (inverted
// dropout; filled by the trainer, all-ones when disabled).
class FfnnObjective {
public:
    FfnnObjective(const linalg::Matrix& x, const linalg::Matrix& targets,
                  std::vector<int> layer_dims, Activation activation,
                  bool loss_bce);
    std::size_t param_count() const;
    const std::vector<int>& layer_dims() const { return layer_dims_; }
    double value(std::span<const double> params) const;
    std::vector<double> gradient(std::span<const double> params) const;
    // Same pass with per-layer dropout masks (rows = batch, cols = layer
    // width). Masks apply after the activation.
    double value_masked(std::span<const double> params,
                        const std::vector<linalg::Matrix>& masks) const;
    std::vector<double> gradient_masked(
        std::span<const double> params,
        const std::vector<linalg::Matrix>& masks) const;

private:
    const linalg::Matrix& x_;
    const linalg::Matrix& targets_;
    std::vector<int> layer_dims_;
    Activation activation_;
    bool loss_bce_;
};

struct FoldAssignment {
    int k = 0;
    std::vector<int> fold_of;  // sample index -> fold id in [0, k)

    std::vector<std::size_t> test_indices(int fold) const;
    std::vector<std::size_t> train_indices(int fold) const;
};

// Seeded shuffle within each class, then round-robin assignment; per-fold
// class counts deviate from exact proportionality by at most 1.
FoldAssignment stratified_kfold(const std::vector<int>& labels, int k,
                                unsigned long long seed);

struct Metrics {
    double precision[2] = {0, 0};
    double recall[2] = {0, 0};
    double f1[2] = {0, 0};
    long support[2] = {0, 0};
    long confusion[2][2] = {{0, 0}, {0, 0}};  // [true][predicted]
    double weighted_precision = 0;
    double weighted_recall = 0;
    double weighted_f1 = 0;
    double accuracy = 0;
};

// Per-class precision/recall/F1 with 0/0 := 0, plus support-weighted means.
Metrics weighted_prf(const std::vector<int>& y_true,
                     const std::vector<int>& y_pred);

struct CvResult {
    std::vector<Metrics> folds;
    double mean_weighted_precision = 0;
    double mean_weighted_recall = 0;
    double mean_weighted_f1 = 0;
    double mean_accuracy = 0;
};

CvResult cross_validate(const linalg::Matrix& x, const std::vector<int>& y,
                        const TrainConfig& config, const FoldAssignment& folds);

enum class SearchMetric { weighted_f1, accuracy };

struct GridSearchResult {
    std::size_t best_index = 0;
    TrainConfig best_config;
    std::vector<double> scores;       // NaN for configs that failed
    std::vector<std::string> errors;  // empty string for configs that ran
};

// Evaluates every config on one shared fold assignment; ties keep the
// earliest grid position; a config whose trainer throws is logged and
// skipped rather than aborting the search.
GridSearchResult grid_search(const std::vector<TrainConfig>& grid,
                             const linalg::Matrix& x, const std::vector<int>& y,
                             int k, unsigned long long seed,
                             SearchMetric metric = SearchMetric::weighted_f1);

}  // namespace cogkit::learn
