#include "cogkit/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cogkit/error.hpp"
#include "cogkit/log.hpp"
#include "cogkit/rng.hpp"

namespace cogkit::learn {

using linalg::Matrix;

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::logreg: return "logreg";
        case ModelKind::linear_svm: return "linear_svm";
        case ModelKind::ffnn_classifier: return "ffnn_classifier";
        case ModelKind::gaze_regressor: return "gaze_regressor";
    }
    throw InvalidArgument("unknown model kind");
}

std::string to_string(Activation activation) {
    switch (activation) {
        case Activation::tanh: return "tanh";
        case Activation::hardtanh: return "hardtanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::relu: return "relu";
    }
    throw InvalidArgument("unknown activation");
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "logreg") return ModelKind::logreg;
    if (s == "linear_svm") return ModelKind::linear_svm;
    if (s == "ffnn" || s == "ffnn_classifier") return ModelKind::ffnn_classifier;
    if (s == "gaze_regressor") return ModelKind::gaze_regressor;
    throw InvalidArgument("unknown model kind '" + s + "'");
}

Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "hardtanh") return Activation::hardtanh;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "relu") return Activation::relu;
    throw InvalidArgument("unknown activation '" + s + "'");
}

TrainConfig TrainConfig::defaults(ModelKind kind) {
    TrainConfig cfg;
    cfg.kind = kind;
    switch (kind) {
        case ModelKind::logreg:
            cfg.lr_initial = 1.0;
            cfg.max_epochs = 2000;
            break;
        case ModelKind::linear_svm:
            cfg.lr_initial = 1.0;  // unused; step is 1/(lambda t)
            cfg.max_epochs = 100;
            break;
        case ModelKind::ffnn_classifier:
            cfg.hidden_dim = 50;
            cfg.activation = Activation::tanh;
            cfg.lr_initial = 0.4;
            cfg.lr_floor = 1e-3;
            cfg.max_epochs = 500;
            break;
        case ModelKind::gaze_regressor:
            cfg.lr_initial = 0.1;
            cfg.dropout = 0.2;
            cfg.max_epochs = 200;
            cfg.batch_size = 32;
            break;
    }
    return cfg;
}

void TrainConfig::validate() const {
    if (c <= 0.0) throw InvalidArgument("TrainConfig: c must be positive");
    if (hidden_dim <= 0) throw InvalidArgument("TrainConfig: hidden_dim must be positive");
    if (lr_initial <= 0.0) throw InvalidArgument("TrainConfig: lr_initial must be positive");
    if (lr_floor >= lr_initial)
        throw InvalidArgument("TrainConfig: lr_floor must be below lr_initial");
    if (dropout < 0.0 || dropout >= 1.0)
        throw InvalidArgument("TrainConfig: dropout must lie in [0, 1)");
    if (max_epochs <= 0) throw InvalidArgument("TrainConfig: max_epochs must be positive");
    if (batch_size <= 0) throw InvalidArgument("TrainConfig: batch_size must be positive");
}

Normalizer Normalizer::fit(const Matrix& x) {
    Normalizer n;
    const std::size_t d = x.cols();
    n.mean.assign(d, 0.0);
    n.inv_std.assign(d, 0.0);
    if (x.rows() == 0) return n;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) n.mean[j] += x.at(i, j);
    for (double& m : n.mean) m /= static_cast<double>(x.rows());
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double delta = x.at(i, j) - n.mean[j];
            var[j] += delta * delta;
        }
    for (std::size_t j = 0; j < d; ++j) {
        var[j] /= static_cast<double>(x.rows());
        n.inv_std[j] = var[j] > 0.0 ? 1.0 / std::sqrt(var[j]) : 0.0;
    }
    return n;
}

void Normalizer::apply_row(std::span<const double> in,
                           std::span<double> out) const {
    if (in.size() != mean.size() || out.size() != mean.size())
        throw InvalidArgument("Normalizer: dimension mismatch");
    for (std::size_t j = 0; j < mean.size(); ++j)
        out[j] = (in[j] - mean[j]) * inv_std[j];
}

Matrix Normalizer::apply(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) apply_row(x.row(i), out.row(i));
    return out;
}

void Normalizer::invert_row(std::span<const double> in,
                            std::span<double> out) const {
    if (in.size() != mean.size() || out.size() != mean.size())
        throw InvalidArgument("Normalizer: dimension mismatch");
    for (std::size_t j = 0; j < mean.size(); ++j)
        out[j] = inv_std[j] > 0.0 ? in[j] / inv_std[j] + mean[j] : mean[j];
}

namespace {

double activate(Activation a, double z) {
    switch (a) {
        case Activation::tanh: return std::tanh(z);
        case Activation::hardtanh: return z < -1.0 ? -1.0 : (z > 1.0 ? 1.0 : z);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::relu: return z > 0.0 ? z : 0.0;
    }
    throw InvalidArgument("unknown activation");
}

double activate_deriv(Activation a, double z) {
    switch (a) {
        case Activation::tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::hardtanh: return (z > -1.0 && z < 1.0) ? 1.0 : 0.0;
        case Activation::sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-z));
            return s * (1.0 - s);
        }
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    }
    throw InvalidArgument("unknown activation");
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^z) without overflow.
double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void check_finite_matrix(const Matrix& x, const char* what) {
    for (double v : x.data())
        if (!std::isfinite(v))
            throw InvalidArgument(std::string(what) + " contains non-finite values");
}

void check_binary_labels(const std::vector<int>& y) {
    for (int v : y)
        if (v != 0 && v != 1)
            throw InvalidArgument("labels must be 0 or 1");
}

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const std::span<const double> src = x.row(idx[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace

LinearObjective::LinearObjective(const Matrix& x, const std::vector<int>& y,
                                 double c, bool hinge)
    : x_(x), y_(y), c_(c), hinge_(hinge) {
    if (x.rows() != y.size())
        throw InvalidArgument("LinearObjective: row/label count mismatch");
    if (x.rows() == 0) throw InvalidArgument("LinearObjective: empty data");
    if (c <= 0.0) throw InvalidArgument("LinearObjective: c must be positive");
}

double LinearObjective::value(std::span<const double> params) const {
    if (params.size() != param_count())
        throw InvalidArgument("LinearObjective: bad parameter count");
    const std::size_t d = x_.cols();
    const std::span<const double> w = params.first(d);
    const double b = params[d];
    const double n = static_cast<double>(x_.rows());
    double loss = 0.0;
    for (std::size_t i = 0; i < x_.rows(); ++i) {
        const double z = linalg::dot(w, x_.row(i)) + b;
        if (hinge_) {
            const double s = y_[i] == 1 ? 1.0 : -1.0;
            loss += std::max(0.0, 1.0 - s * z);
        } else {
            loss += softplus(z) - static_cast<double>(y_[i]) * z;
        }
    }
    loss /= n;
    double reg = 0.0;
    for (double wi : w) reg += wi * wi;
    return loss + reg / (2.0 * c_);
}

std::vector<double> LinearObjective::gradient(std::span<const double> params) const {
    if (params.size() != param_count())
        throw InvalidArgument("LinearObjective: bad parameter count");
    const std::size_t d = x_.cols();
    const std::span<const double> w = params.first(d);
    const double b = params[d];
    const double n = static_cast<double>(x_.rows());
    std::vector<double> grad(d + 1, 0.0);
    for (std::size_t i = 0; i < x_.rows(); ++i) {
        const std::span<const double> xi = x_.row(i);
        const double z = linalg::dot(w, xi) + b;
        double coef;
        if (hinge_) {
            const double s = y_[i] == 1 ? 1.0 : -1.0;
            coef = (1.0 - s * z > 0.0) ? -s : 0.0;
        } else {
            coef = sigmoid(z) - static_cast<double>(y_[i]);
        }
        for (std::size_t j = 0; j < d; ++j) grad[j] += coef * xi[j];
        grad[d] += coef;
    }
    for (double& g : grad) g /= n;
    for (std::size_t j = 0; j < d; ++j) grad[j] += w[j] / c_;
    return grad;
}

FfnnObjective::FfnnObjective(const Matrix& x, const Matrix& targets,
                             std::vector<int> layer_dims, Activation activation,
                             bool loss_bce)
    : x_(x),
      targets_(targets),
      layer_dims_(std::move(layer_dims)),
      activation_(activation),
      loss_bce_(loss_bce) {
    if (layer_dims_.size() < 2)
        throw InvalidArgument("FfnnObjective: need at least input and output dims");
    if (x.cols() != static_cast<std::size_t>(layer_dims_.front()))
        throw InvalidArgument("FfnnObjective: input dimension mismatch");
    if (targets.cols() != static_cast<std::size_t>(layer_dims_.back()))
        throw InvalidArgument("FfnnObjective: target dimension mismatch");
    if (x.rows() != targets.rows())
        throw InvalidArgument("FfnnObjective: sample count mismatch");
    if (x.rows() == 0) throw InvalidArgument("FfnnObjective: empty data");
    if (loss_bce && layer_dims_.back() != 1)
        throw InvalidArgument("FfnnObjective: cross-entropy needs one output");
}

std::size_t FfnnObjective::param_count() const {
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < layer_dims_.size(); ++l)
        count += static_cast<std::size_t>(layer_dims_[l + 1]) *
                     static_cast<std::size_t>(layer_dims_[l]) +
                 static_cast<std::size_t>(layer_dims_[l + 1]);
    return count;
}

namespace {

// View of one layer's parameters inside the flat vector.
struct LayerView {
    std::span<const double> w;  // out*in, row-major
    std::span<const double> b;  // out
    std::size_t in;
    std::size_t out;
};

std::vector<LayerView> layer_views(std::span<const double> params,
                                   const std::vector<int>& dims) {
    std::vector<LayerView> views;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t in = static_cast<std::size_t>(dims[l]);
        const std::size_t out = static_cast<std::size_t>(dims[l + 1]);
        LayerView v;
        v.w = params.subspan(offset, out * in);
        offset += out * in;
        v.b = params.subspan(offset, out);
        offset += out;
        v.in = in;
        v.out = out;
        views.push_back(v);
    }
    if (offset != params.size())
        throw InvalidArgument("FfnnObjective: bad parameter count");
    return views;
}

struct ForwardPass {
    // pre[l]: pre-activation of layer l (N x dims[l+1]).
    // act[l]: post-activation (post-mask) output of layer l.
    std::vector<Matrix> pre;
    std::vector<Matrix> act;
};

ForwardPass forward(const Matrix& x, const std::vector<LayerView>& layers,
                    Activation activation,
                    const std::vector<Matrix>* masks) {
    ForwardPass fp;
    const std::size_t n = x.rows();
    const Matrix* input = &x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerView& lv = layers[l];
        Matrix z(n, lv.out);
        for (std::size_t i = 0; i < n; ++i) {
            const std::span<const double> a = input->row(i);
            for (std::size_t o = 0; o < lv.out; ++o) {
                const std::span<const double> wrow = lv.w.subspan(o * lv.in, lv.in);
                z.at(i, o) = linalg::dot(wrow, a) + lv.b[o];
            }
        }
        const bool is_output = l + 1 == layers.size();
        Matrix h = z;
        if (!is_output) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t o = 0; o < lv.out; ++o)
                    h.at(i, o) = activate(activation, z.at(i, o));
            if (masks && !masks->empty()) {
                const Matrix& m = (*masks)[l];
                if (m.rows() != n || m.cols() != lv.out)
                    throw InvalidArgument("FfnnObjective: mask shape mismatch");
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t o = 0; o < lv.out; ++o)
                        h.at(i, o) *= m.at(i, o);
            }
        }
        fp.pre.push_back(std::move(z));
        fp.act.push_back(std::move(h));
        input = &fp.act.back();
    }
    return fp;
}

}  // namespace

double FfnnObjective::value(std::span<const double> params) const {
    static const std::vector<Matrix> kNoMasks;
    return value_masked(params, kNoMasks);
}

std::vector<double> FfnnObjective::gradient(std::span<const double> params) const {
    static const std::vector<Matrix> kNoMasks;
    return gradient_masked(params, kNoMasks);
}

double FfnnObjective::value_masked(std::span<const double> params,
                                   const std::vector<Matrix>& masks) const {
    const std::vector<LayerView> layers = layer_views(params, layer_dims_);
    const ForwardPass fp = forward(x_, layers, activation_, &masks);
    const Matrix& out = fp.act.back();
    const double n = static_cast<double>(x_.rows());
    double loss = 0.0;
    if (loss_bce_) {
        for (std::size_t i = 0; i < x_.rows(); ++i) {
            const double z = out.at(i, 0);
            loss += softplus(z) - targets_.at(i, 0) * z;
        }
        loss /= n;
    } else {
        const double k = static_cast<double>(targets_.cols());
        for (std::size_t i = 0; i < x_.rows(); ++i)
            for (std::size_t o = 0; o < targets_.cols(); ++o) {
                const double diff = out.at(i, o) - targets_.at(i, o);
                loss += diff * diff;
            }
        loss /= n * k;
    }
    return loss;
}

std::vector<double> FfnnObjective::gradient_masked(
    std::span<const double> params, const std::vector<Matrix>& masks) const {
    const std::vector<LayerView> layers = layer_views(params, layer_dims_);
    const ForwardPass fp = forward(x_, layers, activation_, &masks);
    const std::size_t n = x_.rows();
    const double nd = static_cast<double>(n);

    // delta: dLoss/d(pre-activation of current layer), N x width.
    Matrix delta(n, layers.back().out);
    if (loss_bce_) {
        for (std::size_t i = 0; i < n; ++i)
            delta.at(i, 0) = (sigmoid(fp.pre.back().at(i, 0)) - targets_.at(i, 0)) / nd;
    } else {
        const double k = static_cast<double>(targets_.cols());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t o = 0; o < delta.cols(); ++o)
                delta.at(i, o) =
                    2.0 * (fp.act.back().at(i, o) - targets_.at(i, o)) / (nd * k);
    }

    std::vector<double> grad(params.size(), 0.0);
    std::size_t offsets_end = params.size();
    for (std::size_t l = layers.size(); l-- > 0;) {
        const LayerView& lv = layers[l];
        const std::size_t w_count = lv.out * lv.in;
        const std::size_t b_off = offsets_end - lv.out;
        const std::size_t w_off = b_off - w_count;
        offsets_end = w_off;

        const Matrix& input = l == 0 ? x_ : fp.act[l - 1];
        for (std::size_t i = 0; i < n; ++i) {
            const std::span<const double> a = input.row(i);
            for (std::size_t o = 0; o < lv.out; ++o) {
                const double d = delta.at(i, o);
                if (d == 0.0) continue;
                double* wg = grad.data() + w_off + o * lv.in;
                for (std::size_t j = 0; j < lv.in; ++j) wg[j] += d * a[j];
                grad[b_off + o] += d;
            }
        }

        if (l == 0) break;
        // Propagate to the previous layer's pre-activations.
        const LayerView& prev = layers[l - 1];
        Matrix next_delta(n, prev.out);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < lv.in; ++j) {
                double sum = 0.0;
                for (std::size_t o = 0; o < lv.out; ++o)
                    sum += delta.at(i, o) * lv.w[o * lv.in + j];
                if (!masks.empty()) sum *= masks[l - 1].at(i, j);
                next_delta.at(i, j) =
                    sum * activate_deriv(activation_, fp.pre[l - 1].at(i, j));
            }
        }
        delta = std::move(next_delta);
    }
    return grad;
}

namespace {

void unflatten_params(std::span<const double> params,
                      const std::vector<int>& dims,
                      std::vector<Matrix>& weights,
                      std::vector<std::vector<double>>& biases) {
    weights.clear();
    biases.clear();
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t in = static_cast<std::size_t>(dims[l]);
        const std::size_t out = static_cast<std::size_t>(dims[l + 1]);
        Matrix w(out, in);
        std::copy(params.begin() + offset, params.begin() + offset + out * in,
                  w.data().begin());
        offset += out * in;
        biases.emplace_back(params.begin() + offset,
                            params.begin() + offset + out);
        offset += out;
        weights.push_back(std::move(w));
    }
}

std::vector<double> glorot_init(const std::vector<int>& dims, Rng& rng) {
    std::vector<double> params;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t in = static_cast<std::size_t>(dims[l]);
        const std::size_t out = static_cast<std::size_t>(dims[l + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (std::size_t i = 0; i < out * in; ++i)
            params.push_back(rng.uniform(-limit, limit));
        for (std::size_t i = 0; i < out; ++i) params.push_back(0.0);
    }
    return params;
}

Matrix labels_to_matrix(const std::vector<int>& y) {
    Matrix t(y.size(), 1);
    for (std::size_t i = 0; i < y.size(); ++i)
        t.at(i, 0) = static_cast<double>(y[i]);
    return t;
}

TrainedModel make_linear_model(const TrainConfig& config,
                               Normalizer input_norm,
                               std::span<const double> params,
                               std::size_t dim) {
    TrainedModel model;
    model.kind = config.kind;
    model.config = config;
    model.input_norm = std::move(input_norm);
    model.layer_dims = {static_cast<int>(dim), 1};
    Matrix w(1, dim);
    std::copy(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(dim),
              w.data().begin());
    model.weights.push_back(std::move(w));
    model.biases.push_back({params[dim]});
    return model;
}

constexpr double kGradientTol = 1e-6;

}  // namespace

TrainedModel train_logistic_regression(const Matrix& x, const std::vector<int>& y,
                                       const TrainConfig& config) {
    config.validate();
    check_finite_matrix(x, "training data");
    check_binary_labels(y);
    if (x.rows() != y.size() || x.rows() == 0)
        throw InvalidArgument("train: need matching, non-empty data");

    Normalizer norm = Normalizer::fit(x);
    const Matrix xn = norm.apply(x);
    const LinearObjective objective(xn, y, config.c, /*hinge=*/false);

    std::vector<double> params(objective.param_count(), 0.0);
    double lr = config.lr_initial;
    double current = objective.value(params);
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const std::vector<double> grad = objective.gradient(params);
        double gnorm = 0.0;
        for (double g : grad) gnorm += g * g;
        if (std::sqrt(gnorm) < kGradientTol) break;
        std::vector<double> proposal(params.size());
        for (std::size_t i = 0; i < params.size(); ++i)
            proposal[i] = params[i] - lr * grad[i];
        const double next = objective.value(proposal);
        if (next > current) {
            lr /= 2.0;
            if (lr < 1e-15) break;
            continue;
        }
        params = std::move(proposal);
        current = next;
    }
    return make_linear_model(config, std::move(norm), params, x.cols());
}

TrainedModel train_linear_svm(const Matrix& x, const std::vector<int>& y,
                              const TrainConfig& config) {
    config.validate();
    check_finite_matrix(x, "training data");
    check_binary_labels(y);
    if (x.rows() != y.size() || x.rows() == 0)
        throw InvalidArgument("train: need matching, non-empty data");

    Normalizer norm = Normalizer::fit(x);
    const Matrix xn = norm.apply(x);
    const LinearObjective objective(xn, y, config.c, /*hinge=*/true);
    const std::size_t d = xn.cols();
    const double lambda = 1.0 / config.c;

    std::vector<double> params(d + 1, 0.0);
    std::vector<std::size_t> order(xn.rows());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed);

    double best = objective.value(params);
    unsigned long long t = 1;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const std::vector<double> snapshot = params;
        rng.shuffle(order);
        for (std::size_t i : order) {
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            ++t;
            const std::span<const double> xi = xn.row(i);
            const double s = y[i] == 1 ? 1.0 : -1.0;
            double z = params[d];
            for (std::size_t j = 0; j < d; ++j) z += params[j] * xi[j];
            const double shrink = 1.0 - eta * lambda;
            for (std::size_t j = 0; j < d; ++j) params[j] *= shrink;
            if (s * z < 1.0) {
                for (std::size_t j = 0; j < d; ++j) params[j] += eta * s * xi[j];
                params[d] += eta * s;
            }
        }
        const double value = objective.value(params);
        if (value > best) {
            params = snapshot;  // keep the best epoch-end parameters
        } else {
            best = value;
        }
    }
    return make_linear_model(config, std::move(norm), params, x.cols());
}

TrainedModel train_ffnn_classifier(const Matrix& x, const std::vector<int>& y,
                                   const TrainConfig& config) {
    config.validate();
    check_finite_matrix(x, "training data");
    check_binary_labels(y);
    if (x.rows() != y.size() || x.rows() < 2)
        throw InvalidArgument("train: need at least 2 samples");

    Normalizer norm = Normalizer::fit(x);
    const Matrix xn = norm.apply(x);

    // Hold out the tail of a seeded shuffle as the validation split that
    // drives the learning-rate schedule.
    std::vector<std::size_t> order(xn.rows());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed);
    rng.shuffle(order);
    const std::size_t val_n = std::max<std::size_t>(1, xn.rows() / 10);
    const std::size_t train_n = xn.rows() - val_n;
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + train_n);
    std::vector<std::size_t> val_idx(order.begin() + train_n, order.end());

    const Matrix xtr = take_rows(xn, train_idx);
    const Matrix xval = take_rows(xn, val_idx);
    std::vector<int> ytr, yval;
    for (std::size_t i : train_idx) ytr.push_back(y[i]);
    for (std::size_t i : val_idx) yval.push_back(y[i]);
    const Matrix ttr = labels_to_matrix(ytr);
    const Matrix tval = labels_to_matrix(yval);

    const std::vector<int> dims = {static_cast<int>(xn.cols()), config.hidden_dim, 1};
    const FfnnObjective objective(xtr, ttr, dims, config.activation, /*bce=*/true);
    const FfnnObjective val_objective(xval, tval, dims, config.activation, true);

    std::vector<double> params = glorot_init(dims, rng);
    double lr = config.lr_initial;
    double prev_val = std::numeric_limits<double>::infinity();
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const std::vector<double> grad = objective.gradient(params);
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
        const double train_loss = objective.value(params);
        if (!std::isfinite(train_loss))
            throw NumericalError("ffnn training diverged at epoch " +
                                 std::to_string(epoch + 1));
        const double val_loss = val_objective.value(params);
        if (val_loss > prev_val) lr /= 2.0;
        prev_val = val_loss;
        if (lr < config.lr_floor) break;
    }

    TrainedModel model;
    model.kind = ModelKind::ffnn_classifier;
    model.config = config;
    model.input_norm = std::move(norm);
    model.layer_dims = dims;
    unflatten_params(params, dims, model.weights, model.biases);
    return model;
}

TrainedModel train_gaze_regressor(const Matrix& x, const Matrix& y,
                                  const TrainConfig& config) {
    config.validate();
    check_finite_matrix(x, "training data");
    check_finite_matrix(y, "training targets");
    if (x.rows() != y.rows() || x.rows() == 0)
        throw InvalidArgument("train: need matching, non-empty data");
    if (y.cols() == 0) throw InvalidArgument("train: empty target dimension");

    Normalizer input_norm = Normalizer::fit(x);
    Normalizer target_norm = Normalizer::fit(y);
    const Matrix xn = input_norm.apply(x);
    const Matrix yn = target_norm.apply(y);

    const std::vector<int> dims = {static_cast<int>(xn.cols()), 128, 64, 32,
                                   static_cast<int>(yn.cols())};
    Rng rng(config.seed);
    std::vector<double> params = glorot_init(dims, rng);

    const std::size_t n = xn.rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch = static_cast<std::size_t>(config.batch_size);
    const double keep = 1.0 - config.dropout;

    const FfnnObjective full_objective(xn, yn, dims, Activation::sigmoid,
                                       /*bce=*/false);

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            const std::vector<std::size_t> idx(order.begin() + start,
                                               order.begin() + end);
            const Matrix xb = take_rows(xn, idx);
            const Matrix yb = take_rows(yn, idx);
            const FfnnObjective batch_objective(xb, yb, dims,
                                                Activation::sigmoid, false);
            std::vector<Matrix> masks;
            if (config.dropout > 0.0) {
                for (std::size_t l = 1; l + 1 < dims.size(); ++l) {
                    Matrix m(xb.rows(), static_cast<std::size_t>(dims[l]));
                    for (double& v : m.data())
                        v = rng.uniform01() < keep ? 1.0 / keep : 0.0;
                    masks.push_back(std::move(m));
                }
            }
            const std::vector<double> grad =
                batch_objective.gradient_masked(params, masks);
            for (std::size_t i = 0; i < params.size(); ++i)
                params[i] -= config.lr_initial * grad[i];
        }
        const double loss = full_objective.value(params);
        if (!std::isfinite(loss))
            throw NumericalError("regressor training diverged at epoch " +
                                 std::to_string(epoch + 1));
    }

    TrainedModel model;
    model.kind = ModelKind::gaze_regressor;
    model.config = config;
    model.input_norm = std::move(input_norm);
    model.target_norm = std::move(target_norm);
    model.layer_dims = dims;
    unflatten_params(params, dims, model.weights, model.biases);
    return model;
}

TrainedModel train(const Matrix& x, const std::vector<int>& y,
                   const TrainConfig& config) {
    switch (config.kind) {
        case ModelKind::logreg: return train_logistic_regression(x, y, config);
        case ModelKind::linear_svm: return train_linear_svm(x, y, config);
        case ModelKind::ffnn_classifier: return train_ffnn_classifier(x, y, config);
        case ModelKind::gaze_regressor:
            throw InvalidArgument("gaze regressor needs matrix targets");
    }
    throw InvalidArgument("unknown model kind");
}

namespace {

// Forward pass for a stored model on one normalized row.
std::vector<double> model_forward(const TrainedModel& model,
                                  std::span<const double> xn) {
    std::vector<double> a(xn.begin(), xn.end());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const Matrix& w = model.weights[l];
        const std::vector<double>& b = model.biases[l];
        std::vector<double> z(w.rows());
        for (std::size_t o = 0; o < w.rows(); ++o)
            z[o] = linalg::dot(w.row(o), std::span<const double>(a)) + b[o];
        const bool is_output = l + 1 == model.weights.size();
        if (!is_output) {
            const Activation act = model.kind == ModelKind::gaze_regressor
                                       ? Activation::sigmoid
                                       : model.config.activation;
            for (double& v : z) v = activate(act, v);
        }
        a = std::move(z);
    }
    return a;
}

}  // namespace

double TrainedModel::decision_score(std::span<const double> x) const {
    if (x.size() != input_norm.dim())
        throw InvalidArgument("predict: expected dimension " +
                              std::to_string(input_norm.dim()) + ", got " +
                              std::to_string(x.size()));
    std::vector<double> xn(x.size());
    input_norm.apply_row(x, xn);
    const std::vector<double> out = model_forward(*this, xn);
    switch (kind) {
        case ModelKind::linear_svm: return out[0];
        case ModelKind::logreg:
        case ModelKind::ffnn_classifier: return sigmoid(out[0]);
        case ModelKind::gaze_regressor:
            throw InvalidArgument("decision_score is for classifiers");
    }
    throw InvalidArgument("unknown model kind");
}

int TrainedModel::predict_label(std::span<const double> x) const {
    const double score = decision_score(x);
    const double threshold = kind == ModelKind::linear_svm ? 0.0 : 0.5;
    return score >= threshold ? 1 : 0;
}

std::vector<int> TrainedModel::predict_labels(const Matrix& x) const {
    std::vector<int> labels(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) labels[i] = predict_label(x.row(i));
    return labels;
}

std::vector<double> TrainedModel::predict_vector(std::span<const double> x) const {
    if (kind != ModelKind::gaze_regressor)
        throw InvalidArgument("predict_vector is for the gaze regressor");
    if (x.size() != input_norm.dim())
        throw InvalidArgument("predict: expected dimension " +
                              std::to_string(input_norm.dim()) + ", got " +
                              std::to_string(x.size()));
    std::vector<double> xn(x.size());
    input_norm.apply_row(x, xn);
    const std::vector<double> out = model_forward(*this, xn);
    std::vector<double> result(out.size());
    target_norm.invert_row(out, result);
    return result;
}

Matrix TrainedModel::predict_matrix(const Matrix& x) const {
    Matrix out(x.rows(), target_norm.dim());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const std::vector<double> row = predict_vector(x.row(i));
        std::copy(row.begin(), row.end(), out.row(i).begin());
    }
    return out;
}

namespace {

using nlohmann::json;

json normalizer_to_json(const Normalizer& n) {
    return json{{"mean", n.mean}, {"inv_std", n.inv_std}};
}

Normalizer normalizer_from_json(const json& j) {
    Normalizer n;
    n.mean = j.at("mean").get<std::vector<double>>();
    n.inv_std = j.at("inv_std").get<std::vector<double>>();
    if (n.mean.size() != n.inv_std.size())
        throw ParseError("model file: normalizer arrays disagree in length");
    return n;
}

json config_to_json(const TrainConfig& c) {
    return json{{"kind", to_string(c.kind)},
                {"c", c.c},
                {"hidden_dim", c.hidden_dim},
                {"activation", to_string(c.activation)},
                {"lr_initial", c.lr_initial},
                {"lr_floor", c.lr_floor},
                {"dropout", c.dropout},
                {"max_epochs", c.max_epochs},
                {"batch_size", c.batch_size},
                {"seed", c.seed}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.kind = model_kind_from_string(j.at("kind").get<std::string>());
    c.c = j.at("c").get<double>();
    c.hidden_dim = j.at("hidden_dim").get<int>();
    c.activation = activation_from_string(j.at("activation").get<std::string>());
    c.lr_initial = j.at("lr_initial").get<double>();
    c.lr_floor = j.at("lr_floor").get<double>();
    c.dropout = j.at("dropout").get<double>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.seed = j.at("seed").get<unsigned long long>();
    return c;
}

}  // namespace

std::string TrainedModel::to_json_string() const {
    json j;
    j["format"] = "cogkit-model";
    j["version"] = 1;
    j["kind"] = to_string(kind);
    j["config"] = config_to_json(config);
    j["input_norm"] = normalizer_to_json(input_norm);
    if (kind == ModelKind::gaze_regressor)
        j["target_norm"] = normalizer_to_json(target_norm);
    j["layer_dims"] = layer_dims;
    json weights_json = json::array();
    json biases_json = json::array();
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights_json.push_back(weights[l].data());
        biases_json.push_back(biases[l]);
    }
    j["weights"] = std::move(weights_json);
    j["biases"] = std::move(biases_json);
    if (!output_names.empty()) j["output_names"] = output_names;
    return j.dump(2);
}

TrainedModel TrainedModel::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "cogkit-model")
            throw ParseError("model file: unrecognized format tag");
        if (j.at("version").get<int>() != 1)
            throw ParseError("model file: unsupported version");
        TrainedModel m;
        m.kind = model_kind_from_string(j.at("kind").get<std::string>());
        m.config = config_from_json(j.at("config"));
        m.input_norm = normalizer_from_json(j.at("input_norm"));
        if (j.contains("target_norm"))
            m.target_norm = normalizer_from_json(j.at("target_norm"));
        m.layer_dims = j.at("layer_dims").get<std::vector<int>>();
        if (m.layer_dims.size() < 2)
            throw ParseError("model file: layer_dims too short");
        const auto& weights_json = j.at("weights");
        const auto& biases_json = j.at("biases");
        if (weights_json.size() + 1 != m.layer_dims.size() ||
            biases_json.size() + 1 != m.layer_dims.size())
            throw ParseError("model file: layer count mismatch");
        for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
            const std::size_t in = static_cast<std::size_t>(m.layer_dims[l]);
            const std::size_t out = static_cast<std::size_t>(m.layer_dims[l + 1]);
            const std::vector<double> flat =
                weights_json.at(l).get<std::vector<double>>();
            if (flat.size() != in * out)
                throw ParseError("model file: weight matrix size mismatch");
            Matrix w(out, in);
            std::copy(flat.begin(), flat.end(), w.data().begin());
            m.weights.push_back(std::move(w));
            std::vector<double> b = biases_json.at(l).get<std::vector<double>>();
            if (b.size() != out)
                throw ParseError("model file: bias size mismatch");
            m.biases.push_back(std::move(b));
        }
        for (const Matrix& w : m.weights)
            for (double v : w.data())
                if (!std::isfinite(v))
                    throw ParseError("model file: non-finite weight");
        if (j.contains("output_names"))
            m.output_names = j.at("output_names").get<std::vector<std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
}

void TrainedModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << to_json_string() << '\n';
    if (!out.flush()) throw IoError("write failed: " + path);
}

TrainedModel TrainedModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_string(buffer.str());
}

std::vector<std::size_t> FoldAssignment::test_indices(int fold) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] == fold) idx.push_back(i);
    return idx;
}

std::vector<std::size_t> FoldAssignment::train_indices(int fold) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] != fold) idx.push_back(i);
    return idx;
}

FoldAssignment stratified_kfold(const std::vector<int>& labels, int k,
                                unsigned long long seed) {
    if (k < 2) throw InvalidArgument("stratified_kfold: k must be at least 2");
    if (labels.empty()) throw InvalidArgument("stratified_kfold: empty labels");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(i);
    for (const auto& [label, idx] : by_class)
        if (idx.size() < static_cast<std::size_t>(k))
            throw InvalidArgument("stratified_kfold: class " +
                                  std::to_string(label) + " has " +
                                  std::to_string(idx.size()) +
                                  " samples, fewer than k=" + std::to_string(k));
    FoldAssignment fa;
    fa.k = k;
    fa.fold_of.assign(labels.size(), 0);
    Rng rng(seed);
    for (auto& [label, idx] : by_class) {
        rng.shuffle(idx);
        for (std::size_t pos = 0; pos < idx.size(); ++pos)
            fa.fold_of[idx[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    }
    return fa;
}

Metrics weighted_prf(const std::vector<int>& y_true,
                     const std::vector<int>& y_pred) {
    if (y_true.empty()) throw InvalidArgument("weighted_prf: empty input");
    if (y_true.size() != y_pred.size())
        throw InvalidArgument("weighted_prf: length mismatch");
    check_binary_labels(y_true);
    check_binary_labels(y_pred);

    Metrics m;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        ++m.confusion[y_true[i]][y_pred[i]];
    const double n = static_cast<double>(y_true.size());
    long correct = 0;
    for (int c = 0; c < 2; ++c) {
        const long tp = m.confusion[c][c];
        const long fp = m.confusion[1 - c][c];
        const long fn = m.confusion[c][1 - c];
        m.support[c] = m.confusion[c][0] + m.confusion[c][1];
        m.precision[c] = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        m.recall[c] = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double pr = m.precision[c] + m.recall[c];
        m.f1[c] = pr > 0.0 ? 2.0 * m.precision[c] * m.recall[c] / pr : 0.0;
        correct += tp;
        const double weight = static_cast<double>(m.support[c]) / n;
        m.weighted_precision += weight * m.precision[c];
        m.weighted_recall += weight * m.recall[c];
        m.weighted_f1 += weight * m.f1[c];
    }
    m.accuracy = static_cast<double>(correct) / n;
    return m;
}

CvResult cross_validate(const Matrix& x, const std::vector<int>& y,
                        const TrainConfig& config, const FoldAssignment& folds) {
    if (x.rows() != y.size())
        throw InvalidArgument("cross_validate: row/label count mismatch");
    if (folds.fold_of.size() != y.size())
        throw InvalidArgument("cross_validate: fold assignment size mismatch");
    CvResult result;
    for (int fold = 0; fold < folds.k; ++fold) {
        const std::vector<std::size_t> train_idx = folds.train_indices(fold);
        const std::vector<std::size_t> test_idx = folds.test_indices(fold);
        const Matrix xtr = take_rows(x, train_idx);
        const Matrix xte = take_rows(x, test_idx);
        std::vector<int> ytr, yte;
        for (std::size_t i : train_idx) ytr.push_back(y[i]);
        for (std::size_t i : test_idx) yte.push_back(y[i]);
        const TrainedModel model = train(xtr, ytr, config);
        const Metrics metrics = weighted_prf(yte, model.predict_labels(xte));
        result.mean_weighted_precision += metrics.weighted_precision;
        result.mean_weighted_recall += metrics.weighted_recall;
        result.mean_weighted_f1 += metrics.weighted_f1;
        result.mean_accuracy += metrics.accuracy;
        result.folds.push_back(metrics);
    }
    const double k = static_cast<double>(folds.k);
    result.mean_weighted_precision /= k;
    result.mean_weighted_recall /= k;
    result.mean_weighted_f1 /= k;
    result.mean_accuracy /= k;
    return result;
}

GridSearchResult grid_search(const std::vector<TrainConfig>& grid,
                             const Matrix& x, const std::vector<int>& y, int k,
                             unsigned long long seed, SearchMetric metric) {
    if (grid.empty()) throw InvalidArgument("grid_search: empty grid");
    const FoldAssignment folds = stratified_kfold(y, k, seed);
    GridSearchResult result;
    result.scores.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
    result.errors.assign(grid.size(), "");
    bool any_ok = false;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
            const CvResult cv = cross_validate(x, y, grid[i], folds);
            const double score = metric == SearchMetric::weighted_f1
                                     ? cv.mean_weighted_f1
                                     : cv.mean_accuracy;
            result.scores[i] = score;
            if (score > best_score) {
                best_score = score;
                result.best_index = i;
            }
            any_ok = true;
        } catch (const Error& e) {
            result.errors[i] = e.what();
            log_warn("grid_search: configuration " + std::to_string(i) +
                     " failed: " + e.what());
        }
    }
    if (!any_ok) throw Error("grid_search: every configuration failed");
    result.best_config = grid[result.best_index];
    return result;
}

}  // namespace cogkit::learn
