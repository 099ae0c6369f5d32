#include "cogkit/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "cogkit/error.hpp"
#include "cogkit/lexsim.hpp"
#include "cogkit/log.hpp"
#include "cogkit/phonetics.hpp"
#include "cogkit/utf8.hpp"
#include "cogkit/xling.hpp"

namespace cogkit::pipeline {

using linalg::Matrix;
using nlohmann::json;

std::string to_string(GazeMode mode) {
    switch (mode) {
        case GazeMode::automatic: return "auto";
        case GazeMode::collected: return "collected";
        case GazeMode::predicted: return "predicted";
    }
    throw InvalidArgument("unknown gaze mode");
}

GazeMode gaze_mode_from_string(const std::string& s) {
    if (s == "auto" || s == "automatic") return GazeMode::automatic;
    if (s == "collected") return GazeMode::collected;
    if (s == "predicted") return GazeMode::predicted;
    throw InvalidArgument("unknown gaze mode '" + s + "'");
}

namespace {

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    if (path.empty()) return path;
    const std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

void require_file(const std::string& path, const std::string& role) {
    if (path.empty()) return;
    if (!std::filesystem::exists(path))
        throw IoError("config: " + role + " file does not exist: " + path);
}

json train_config_to_json(const learn::TrainConfig& c) {
    return json{{"kind", learn::to_string(c.kind)},
                {"c", c.c},
                {"hidden_dim", c.hidden_dim},
                {"activation", learn::to_string(c.activation)},
                {"lr_initial", c.lr_initial},
                {"lr_floor", c.lr_floor},
                {"dropout", c.dropout},
                {"max_epochs", c.max_epochs},
                {"batch_size", c.batch_size},
                {"seed", c.seed}};
}

void apply_model_overrides(learn::TrainConfig& cfg, const json& obj) {
    if (obj.contains("c")) cfg.c = obj.at("c").get<double>();
    if (obj.contains("hidden_dim"))
        cfg.hidden_dim = obj.at("hidden_dim").get<int>();
    if (obj.contains("activation"))
        cfg.activation =
            learn::activation_from_string(obj.at("activation").get<std::string>());
    if (obj.contains("lr_initial"))
        cfg.lr_initial = obj.at("lr_initial").get<double>();
    if (obj.contains("lr_floor")) cfg.lr_floor = obj.at("lr_floor").get<double>();
    if (obj.contains("dropout")) cfg.dropout = obj.at("dropout").get<double>();
    if (obj.contains("max_epochs"))
        cfg.max_epochs = obj.at("max_epochs").get<int>();
    if (obj.contains("batch_size"))
        cfg.batch_size = obj.at("batch_size").get<int>();
}

// Cartesian product over the *_grid keys of one model block.
std::vector<learn::TrainConfig> expand_model_grid(const learn::TrainConfig& base,
                                                  const json& obj) {
    std::vector<learn::TrainConfig> grid{base};
    if (obj.contains("c_grid")) {
        std::vector<learn::TrainConfig> next;
        for (const learn::TrainConfig& g : grid)
            for (const auto& v : obj.at("c_grid")) {
                learn::TrainConfig cfg = g;
                cfg.c = v.get<double>();
                next.push_back(cfg);
            }
        grid = std::move(next);
    }
    if (obj.contains("hidden_dim_grid")) {
        std::vector<learn::TrainConfig> next;
        for (const learn::TrainConfig& g : grid)
            for (const auto& v : obj.at("hidden_dim_grid")) {
                learn::TrainConfig cfg = g;
                cfg.hidden_dim = v.get<int>();
                next.push_back(cfg);
            }
        grid = std::move(next);
    }
    if (obj.contains("activation_grid")) {
        std::vector<learn::TrainConfig> next;
        for (const learn::TrainConfig& g : grid)
            for (const auto& v : obj.at("activation_grid")) {
                learn::TrainConfig cfg = g;
                cfg.activation =
                    learn::activation_from_string(v.get<std::string>());
                next.push_back(cfg);
            }
        grid = std::move(next);
    }
    return grid;
}

learn::ModelKind kind_for_model_name(const std::string& name) {
    return learn::model_kind_from_string(name);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string base_dir = std::filesystem::path(path).parent_path().string();
    return from_json_string(buffer.str(), base_dir);
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text,
                                                    const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    try {
        ExperimentConfig c;
        c.name = j.value("name", std::string("experiment"));
        c.seed = j.value("seed", 0ULL);
        c.k = j.value("k", 5);
        if (c.k < 2) throw InvalidArgument("config: k must be at least 2");

        const json& data = j.at("data");
        c.pairs_path = resolve_path(base_dir, data.at("pairs").get<std::string>());
        c.wordnet_path =
            resolve_path(base_dir, data.value("wordnet", std::string()));
        c.balance = data.value("balance", true);
        c.gaze_subset_n = data.value("gaze_subset_n", std::size_t{0});

        if (j.contains("embeddings"))
            for (const auto& [name, spec] : j.at("embeddings").items())
                c.embeddings[name] = {
                    resolve_path(base_dir, spec.at("src").get<std::string>()),
                    resolve_path(base_dir, spec.at("tgt").get<std::string>())};

        c.phonetic_table_path =
            resolve_path(base_dir, j.value("phonetic_table", std::string()));
        if (j.contains("lexical")) {
            c.lexical_q = j.at("lexical").value("q", 2);
            c.lexical_alpha = j.at("lexical").value("alpha", 0.5);
        }

        if (j.contains("gaze")) {
            const json& g = j.at("gaze");
            c.gaze_report_path =
                resolve_path(base_dir, g.value("report", std::string()));
            c.gaze_trials_path =
                resolve_path(base_dir, g.value("trials", std::string()));
            c.min_fixation_ms = g.value("min_fixation_ms", 4L);
            if (g.contains("select_k_grid"))
                c.select_k_grid = g.at("select_k_grid").get<std::vector<int>>();
            c.regressor_embedding = g.value("regressor_embedding", std::string());
            if (g.contains("regressor"))
                apply_model_overrides(c.regressor, g.at("regressor"));
            const std::string norm = g.value("duration_norm", std::string("ia_count"));
            if (norm == "ia_count")
                c.duration_norm = gaze::DurationNorm::ia_count;
            else if (norm == "none")
                c.duration_norm = gaze::DurationNorm::none;
            else
                throw InvalidArgument("config: duration_norm must be ia_count or none");
        }

        if (j.contains("models")) {
            for (const auto& [name, obj] : j.at("models").items()) {
                learn::TrainConfig base =
                    learn::TrainConfig::defaults(kind_for_model_name(name));
                apply_model_overrides(base, obj);
                c.models[name] = base;
                std::vector<learn::TrainConfig> grid = expand_model_grid(base, obj);
                if (grid.size() > 1) c.model_grids[name] = std::move(grid);
            }
            if (j.at("models").contains("search_metric"))
                throw InvalidArgument("config: search_metric belongs at top level");
        }
        if (j.contains("search_metric")) {
            const std::string metric = j.at("search_metric").get<std::string>();
            if (metric == "weighted_f1")
                c.search_metric = learn::SearchMetric::weighted_f1;
            else if (metric == "accuracy")
                c.search_metric = learn::SearchMetric::accuracy;
            else
                throw InvalidArgument(
                    "config: search_metric must be weighted_f1 or accuracy");
        }

        const json& experiments = j.at("experiments");
        if (experiments.is_array()) {
            for (const json& row : experiments) {
                ExperimentRow r;
                r.feature_set = row.at("features").get<std::string>();
                r.model = row.at("model").get<std::string>();
                r.dataset = row.at("dataset").get<std::string>();
                r.gaze_mode =
                    gaze_mode_from_string(row.value("gaze", std::string("auto")));
                c.rows.push_back(std::move(r));
            }
        } else {
            const GazeMode mode = gaze_mode_from_string(
                experiments.value("gaze", std::string("auto")));
            for (const auto& fs : experiments.at("feature_sets"))
                for (const auto& model : experiments.at("models"))
                    for (const auto& ds : experiments.at("datasets"))
                        c.rows.push_back({fs.get<std::string>(),
                                          model.get<std::string>(),
                                          ds.get<std::string>(), mode});
        }
        if (c.rows.empty())
            throw InvalidArgument("config: no experiment rows requested");

        c.output_dir = resolve_path(base_dir, j.value("output_dir", std::string(".")));

        for (const ExperimentRow& row : c.rows) {
            if (row.dataset != "d1" && row.dataset != "d2" && row.dataset != "d1+d2")
                throw InvalidArgument("config: dataset must be d1, d2, or d1+d2, got '" +
                                      row.dataset + "'");
            kind_for_model_name(row.model);  // validates the name
        }

        require_file(c.pairs_path, "pairs");
        require_file(c.wordnet_path, "wordnet");
        require_file(c.phonetic_table_path, "phonetic table");
        require_file(c.gaze_report_path, "gaze report");
        require_file(c.gaze_trials_path, "gaze trials");
        for (const auto& [name, paths] : c.embeddings) {
            require_file(paths.first, "embedding '" + name + "' source");
            require_file(paths.second, "embedding '" + name + "' target");
        }
        return c;
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
}

std::string ExperimentConfig::canonical_json() const {
    json j;
    j["name"] = name;
    j["seed"] = seed;
    j["k"] = k;
    j["data"] = {{"pairs", pairs_path},
                 {"wordnet", wordnet_path},
                 {"balance", balance},
                 {"gaze_subset_n", gaze_subset_n}};
    json emb = json::object();
    for (const auto& [key, paths] : embeddings)
        emb[key] = {{"src", paths.first}, {"tgt", paths.second}};
    j["embeddings"] = std::move(emb);
    j["phonetic_table"] = phonetic_table_path;
    j["lexical"] = {{"q", lexical_q}, {"alpha", lexical_alpha}};
    j["gaze"] = {{"report", gaze_report_path},
                 {"trials", gaze_trials_path},
                 {"min_fixation_ms", min_fixation_ms},
                 {"select_k_grid", select_k_grid},
                 {"regressor_embedding", regressor_embedding},
                 {"regressor", train_config_to_json(regressor)},
                 {"duration_norm",
                  duration_norm == gaze::DurationNorm::ia_count ? "ia_count"
                                                                : "none"}};
    json models_json = json::object();
    for (const auto& [key, cfg] : models)
        models_json[key] = train_config_to_json(cfg);
    j["models"] = std::move(models_json);
    json grids_json = json::object();
    for (const auto& [key, grid] : model_grids) {
        json arr = json::array();
        for (const learn::TrainConfig& cfg : grid)
            arr.push_back(train_config_to_json(cfg));
        grids_json[key] = std::move(arr);
    }
    j["model_grids"] = std::move(grids_json);
    j["search_metric"] =
        search_metric == learn::SearchMetric::weighted_f1 ? "weighted_f1"
                                                          : "accuracy";
    json rows_json = json::array();
    for (const ExperimentRow& row : rows)
        rows_json.push_back({{"features", row.feature_set},
                             {"model", row.model},
                             {"dataset", row.dataset},
                             {"gaze", to_string(row.gaze_mode)}});
    j["experiments"] = std::move(rows_json);
    // output_dir is deliberately left out: it cannot affect any computed
    // value, and the hash should identify the experiment, not its location.
    return j.dump();
}

namespace {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(hash));
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += "\"";
    return out;
}

std::string format_double(double v, const char* fmt = "%.9g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

struct FeatureSelection {
    std::string embedding;  // empty when no embedding block
    bool gaze = false;
    bool lexical = false;
    bool phonetic = false;
};

FeatureSelection parse_feature_set(
    const std::string& feature_set,
    const std::map<std::string, std::pair<std::string, std::string>>& embeddings) {
    FeatureSelection sel;
    std::stringstream ss(feature_set);
    std::string token;
    bool any = false;
    while (std::getline(ss, token, '+')) {
        const std::string t(trim(token));
        if (t.empty()) continue;
        any = true;
        if (t == "gaze") sel.gaze = true;
        else if (t == "lexical") sel.lexical = true;
        else if (t == "phonetic") sel.phonetic = true;
        else if (embeddings.count(t)) {
            if (!sel.embedding.empty() && sel.embedding != t)
                throw InvalidArgument("feature set '" + feature_set +
                                      "' names two embedding tables");
            sel.embedding = t;
        } else {
            throw InvalidArgument(
                "feature set token '" + t +
                "' is neither gaze/lexical/phonetic nor a configured embedding");
        }
    }
    if (!any) throw InvalidArgument("empty feature set");
    return sel;
}

using PairKey = std::tuple<long, std::string, std::string>;

PairKey key_of(const corpus::Pair& p) {
    return {p.synset_id, p.source, p.target};
}

// Raw per-(participant, trial) gaze points joined against the trial map.
struct TrialPoints {
    std::vector<std::string> participants;
    std::vector<std::string> trial_ids;
    std::vector<std::vector<double>> raw;
    std::vector<int> labels;  // -1 when the trial matches no labeled pair
};

TrialPoints build_trial_points(const std::vector<gaze::FixationEvent>& events,
                               const std::vector<gaze::TrialInfo>& trials,
                               const std::vector<corpus::Pair>* pairs) {
    std::map<std::string, const gaze::TrialInfo*> trial_of;
    for (const gaze::TrialInfo& t : trials) trial_of[t.trial_id] = &t;
    std::map<PairKey, int> label_of;
    if (pairs)
        for (const corpus::Pair& p : *pairs) label_of[key_of(p)] = p.label;

    TrialPoints points;
    long unknown_trials = 0;
    long degenerate = 0;
    for (const auto& [key, fixations] : gaze::group_trials(events)) {
        const auto& [participant, trial_id] = key;
        auto it = trial_of.find(trial_id);
        if (it == trial_of.end()) {
            ++unknown_trials;
            continue;
        }
        const gaze::TrialInfo& trial = *it->second;
        std::vector<double> raw;
        try {
            // Saccade statistics are defined over the in-IA fixation
            // sequence, keeping saccade_count = fixation_count - 1.
            std::vector<gaze::FixationEvent> inside;
            for (const gaze::FixationEvent& e : fixations)
                if (e.ia_index > 0) inside.push_back(e);
            const std::vector<gaze::SaccadeEvent> saccades =
                gaze::derive_saccades(inside);
            raw = gaze::trial_feature_vector(fixations, saccades, trial.ia_count);
        } catch (const InsufficientData& e) {
            ++degenerate;
            log_warn("gaze: skipping trial " + trial_id + " of " + participant +
                     ": " + e.what());
            continue;
        }
        int label = -1;
        if (pairs) {
            auto lit = label_of.find({trial.synset_id, trial.source, trial.target});
            if (lit != label_of.end()) label = lit->second;
        }
        points.participants.push_back(participant);
        points.trial_ids.push_back(trial_id);
        points.raw.push_back(std::move(raw));
        points.labels.push_back(label);
    }
    if (unknown_trials > 0)
        log_warn("gaze: " + std::to_string(unknown_trials) +
                 " recorded trials missing from the trial map were skipped");
    if (degenerate > 0)
        log_warn("gaze: " + std::to_string(degenerate) +
                 " degenerate trials were skipped");
    return points;
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols())
            throw InvalidArgument("inconsistent feature dimensions");
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
}

// Stage seeds derived from the experiment seed; keeping them distinct makes
// every stage independently reproducible.
constexpr unsigned long long kBalanceSeedOffset = 0;
constexpr unsigned long long kSplitSeedOffset = 1;
constexpr unsigned long long kFoldSeedOffset = 2;
constexpr unsigned long long kTrainerSeedOffset = 3;
constexpr unsigned long long kRegressorSeedOffset = 4;
constexpr unsigned long long kSelectSeedOffset = 5;

class PipelineState {
public:
    explicit PipelineState(const ExperimentConfig& config) : config_(config) {
        corpus::Dataset full = corpus::load_dataset(
            config.pairs_path, config.wordnet_path, config.name);
        all_pairs_ = full.pairs;
        contexts_ = full.contexts;
        if (config.balance)
            full = corpus::balance(full, config.seed + kBalanceSeedOffset);
        if (config.gaze_subset_n > 0) {
            corpus::GazeSplit split = corpus::split_gaze_subset(
                full, config.gaze_subset_n, config.seed + kSplitSeedOffset);
            d1_ = std::move(split.remainder);
            d2_ = std::move(split.subset);
        } else {
            d1_ = std::move(full);
        }
        d1_.name = "d1";
        d2_.name = "d2";
        if (!config.gaze_report_path.empty() && !config.gaze_trials_path.empty())
            load_gaze();
    }

    const ExperimentConfig& config() const { return config_; }

    std::vector<corpus::Pair> dataset_pairs(const std::string& selector) const {
        if (selector == "d1") return d1_.pairs;
        if (selector == "d2") return d2_.pairs;
        if (selector == "d1+d2") {
            std::vector<corpus::Pair> pairs = d1_.pairs;
            pairs.insert(pairs.end(), d2_.pairs.begin(), d2_.pairs.end());
            return pairs;
        }
        throw InvalidArgument("dataset selector must be d1, d2, or d1+d2, got '" +
                              selector + "'");
    }

    const corpus::ContextClues* clues_for(long synset_id) const {
        auto it = contexts_.find(synset_id);
        return it == contexts_.end() ? nullptr : &it->second;
    }

    const std::pair<xling::EmbeddingTable, xling::EmbeddingTable>&
    embedding_tables(const std::string& name) {
        auto it = loaded_embeddings_.find(name);
        if (it != loaded_embeddings_.end()) return it->second;
        auto cfg = config_.embeddings.find(name);
        if (cfg == config_.embeddings.end())
            throw InvalidArgument("embedding '" + name + "' is not configured");
        xling::EmbeddingTable src =
            xling::EmbeddingTable::load(cfg->second.first, name + "-src");
        xling::EmbeddingTable tgt =
            xling::EmbeddingTable::load(cfg->second.second, name + "-tgt");
        if (src.dim() != tgt.dim())
            throw InvalidArgument("embedding '" + name +
                                  "': source and target dimensions differ");
        return loaded_embeddings_
            .emplace(name, std::make_pair(std::move(src), std::move(tgt)))
            .first->second;
    }

    const phonetics::PhoneticTable& phonetic_table() {
        if (!phonetic_) {
            if (config_.phonetic_table_path.empty())
                throw InvalidArgument(
                    "phonetic features requested but no phonetic_table configured");
            phonetic_ = phonetics::PhoneticTable::load(config_.phonetic_table_path);
        }
        return *phonetic_;
    }

    std::vector<double> embedding_features(const std::string& name,
                                           const corpus::Pair& pair) {
        const auto& tables = embedding_tables(name);
        return xling::pair_feature_vector(tables.first, tables.second, pair,
                                          clues_for(pair.synset_id))
            .concatenated();
    }

    bool has_collected_gaze() const { return !gaze_by_trial_.empty(); }
    bool gaze_configured() const { return gaze_loaded_; }
    const std::vector<std::string>& selected_names() const {
        return selected_names_;
    }

    const learn::TrainedModel& regressor() {
        if (regressor_) return *regressor_;
        if (!gaze_loaded_)
            throw InvalidArgument(
                "predicted gaze requested but no gaze recordings are configured");
        if (config_.regressor_embedding.empty())
            throw InvalidArgument(
                "predicted gaze requested but gaze.regressor_embedding is not set");
        if (reg_trial_ids_.empty())
            throw InsufficientData("no usable gaze recordings to train the regressor");
        std::vector<std::vector<double>> inputs;
        inputs.reserve(reg_trial_ids_.size());
        for (const std::string& trial_id : reg_trial_ids_)
            inputs.push_back(embedding_features(config_.regressor_embedding,
                                                pair_of_trial_.at(trial_id)));
        const Matrix x = rows_to_matrix(inputs);
        const Matrix y = rows_to_matrix(reg_targets_);
        learn::TrainConfig cfg = config_.regressor;
        cfg.kind = learn::ModelKind::gaze_regressor;
        cfg.seed = config_.seed + kRegressorSeedOffset;
        log_info("training gaze regressor on " + std::to_string(x.rows()) +
                 " participant-trial points");
        learn::TrainedModel model = learn::train_gaze_regressor(x, y, cfg);
        model.output_names = selected_names_;
        regressor_ = std::move(model);
        return *regressor_;
    }

    std::vector<double> gaze_features(const corpus::Pair& pair, GazeMode mode) {
        if (!gaze_loaded_)
            throw InvalidArgument(
                "gaze features requested but no gaze recordings are configured");
        const auto trial_it = trial_of_pair_.find(key_of(pair));
        const bool collected =
            trial_it != trial_of_pair_.end() &&
            gaze_by_trial_.count(trial_it->second) > 0;
        switch (mode) {
            case GazeMode::collected:
                if (!collected)
                    throw InsufficientData("pair '" + pair.source + "' / '" +
                                           pair.target +
                                           "' has no collected gaze");
                return gaze_by_trial_.at(trial_it->second).values;
            case GazeMode::predicted:
                return regressor().predict_vector(
                    embedding_features(config_.regressor_embedding, pair));
            case GazeMode::automatic:
                if (collected) return gaze_by_trial_.at(trial_it->second).values;
                return gaze_features(pair, GazeMode::predicted);
        }
        throw InvalidArgument("unknown gaze mode");
    }

    std::string pair_id(const corpus::Pair& pair, std::size_t index) const {
        const auto it = trial_of_pair_.find(key_of(pair));
        if (it != trial_of_pair_.end()) return it->second;
        return "pair" + std::to_string(index);
    }

    struct Assembled {
        Matrix x;
        std::vector<int> y;
        std::vector<std::string> pair_ids;
        bool has_gaze_block = false;
    };

    Assembled assemble(const std::string& feature_set, const std::string& dataset,
                       GazeMode mode) {
        const FeatureSelection sel =
            parse_feature_set(feature_set, config_.embeddings);
        const std::vector<corpus::Pair> pairs = dataset_pairs(dataset);
        if (pairs.empty())
            throw InsufficientData("dataset '" + dataset + "' is empty");
        Assembled out;
        out.has_gaze_block = sel.gaze;
        std::vector<std::vector<double>> rows;
        rows.reserve(pairs.size());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const corpus::Pair& pair = pairs[i];
            std::vector<double> row;
            if (!sel.embedding.empty()) {
                const std::vector<double> block =
                    embedding_features(sel.embedding, pair);
                row.insert(row.end(), block.begin(), block.end());
            }
            if (sel.gaze) {
                const std::vector<double> block = gaze_features(pair, mode);
                row.insert(row.end(), block.begin(), block.end());
            }
            if (sel.lexical) {
                row.push_back(1.0 - lexsim::ned(pair.source, pair.target));
                row.push_back(lexsim::wls(pair.source, pair.target,
                                          config_.lexical_q,
                                          config_.lexical_alpha));
            }
            if (sel.phonetic) {
                const std::vector<double> block =
                    phonetics::phonetic_pair_features(
                        pair, clues_for(pair.synset_id), phonetic_table())
                        .concatenated();
                row.insert(row.end(), block.begin(), block.end());
            }
            out.y.push_back(pair.label);
            out.pair_ids.push_back(pair_id(pair, i));
            rows.push_back(std::move(row));
        }
        out.x = rows_to_matrix(rows);
        return out;
    }

    // (trial_id, gold averaged vector, pair) for every trial with collected
    // gaze, for the predicted-vs-gold comparison file.
    struct GoldRow {
        std::string trial_id;
        const gaze::AveragedVector* gold;
        const corpus::Pair* pair;
    };
    std::vector<GoldRow> gold_rows() const {
        std::vector<GoldRow> rows;
        for (const auto& [trial_id, averaged] : gaze_by_trial_)
            rows.push_back({trial_id, &averaged, &pair_of_trial_.at(trial_id)});
        return rows;
    }

private:
    void load_gaze() {
        const gaze::FixationReport report = gaze::parse_fixation_report(
            config_.gaze_report_path, config_.min_fixation_ms);
        const std::vector<gaze::TrialInfo> trials =
            gaze::load_trial_map(config_.gaze_trials_path);
        for (const gaze::TrialInfo& t : trials) {
            corpus::Pair p;
            p.source = t.source;
            p.target = t.target;
            p.synset_id = t.synset_id;
            pair_of_trial_[t.trial_id] = std::move(p);
        }
        const TrialPoints points =
            build_trial_points(report.events, trials, &all_pairs_);

        std::vector<std::size_t> selected;
        if (config_.select_k_grid.empty()) {
            for (std::size_t i = 0; i < 8; ++i) selected.push_back(i);
        } else {
            std::vector<std::vector<double>> raw;
            std::vector<int> labels;
            for (std::size_t i = 0; i < points.raw.size(); ++i) {
                if (points.labels[i] < 0) continue;
                raw.push_back(points.raw[i]);
                labels.push_back(points.labels[i]);
            }
            if (raw.empty())
                throw InsufficientData(
                    "feature selection needs labeled gaze trials");
            selected = gaze::select_k_best(rows_to_matrix(raw), labels,
                                           config_.select_k_grid,
                                           config_.seed + kSelectSeedOffset);
        }
        for (std::size_t idx : selected)
            selected_names_.emplace_back(gaze::kRawFeatureNames[idx]);

        std::map<std::string, std::vector<std::vector<double>>> by_trial;
        for (std::size_t i = 0; i < points.raw.size(); ++i) {
            std::vector<double> vec;
            vec.reserve(selected.size());
            for (std::size_t idx : selected) vec.push_back(points.raw[i][idx]);
            by_trial[points.trial_ids[i]].push_back(vec);
            reg_trial_ids_.push_back(points.trial_ids[i]);
            reg_targets_.push_back(std::move(vec));
        }
        for (const auto& [trial_id, vectors] : by_trial)
            gaze_by_trial_[trial_id] = gaze::average_over_participants(vectors);

        for (const auto& [trial_id, pair] : pair_of_trial_)
            if (gaze_by_trial_.count(trial_id))
                trial_of_pair_[key_of(pair)] = trial_id;
        gaze_loaded_ = true;
        log_info("gaze: " + std::to_string(gaze_by_trial_.size()) +
                 " trials with collected features, " +
                 std::to_string(reg_trial_ids_.size()) +
                 " participant-trial points");
    }

    const ExperimentConfig& config_;
    std::vector<corpus::Pair> all_pairs_;
    std::map<long, corpus::ContextClues> contexts_;
    corpus::Dataset d1_;
    corpus::Dataset d2_;
    std::map<std::string, std::pair<xling::EmbeddingTable, xling::EmbeddingTable>>
        loaded_embeddings_;
    std::optional<phonetics::PhoneticTable> phonetic_;

    bool gaze_loaded_ = false;
    std::vector<std::string> selected_names_;
    std::map<std::string, gaze::AveragedVector> gaze_by_trial_;
    std::map<PairKey, std::string> trial_of_pair_;
    std::map<std::string, corpus::Pair> pair_of_trial_;
    std::vector<std::string> reg_trial_ids_;
    std::vector<std::vector<double>> reg_targets_;
    std::optional<learn::TrainedModel> regressor_;
};

learn::TrainConfig model_config_for(const ExperimentConfig& config,
                                    const std::string& model_name) {
    learn::TrainConfig cfg;
    auto it = config.models.find(model_name);
    if (it != config.models.end()) cfg = it->second;
    else cfg = learn::TrainConfig::defaults(kind_for_model_name(model_name));
    cfg.kind = kind_for_model_name(model_name);
    cfg.seed = config.seed + kTrainerSeedOffset;
    return cfg;
}

std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out.flush()) throw IoError("write failed: " + path);
}

}  // namespace

bool EvalReport::all_ok() const {
    for (const ReportRow& row : rows)
        if (row.status != "ok") return false;
    return !rows.empty();
}

std::string EvalReport::to_json_string() const {
    json j;
    j["schema_version"] = 1;
    j["tool"] = kToolName;
    j["tool_version"] = tool_version;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["run"] = {{"timestamp", timestamp}, {"wall_ms", wall_ms}};
    json rows_json = json::array();
    for (const ReportRow& row : rows) {
        json folds = json::array();
        for (const FoldScore& f : row.folds)
            folds.push_back({{"fold", f.fold},
                             {"precision", f.precision},
                             {"recall", f.recall},
                             {"f1", f.f1}});
        rows_json.push_back({{"feature_set", row.feature_set},
                             {"model", row.model},
                             {"dataset", row.dataset},
                             {"gaze_mode", row.gaze_mode},
                             {"status", row.status},
                             {"error", row.error},
                             {"n_samples", row.n_samples},
                             {"feature_dim", row.feature_dim},
                             {"folds", std::move(folds)},
                             {"mean",
                              {{"precision", row.mean_precision},
                               {"recall", row.mean_recall},
                               {"f1", row.mean_f1}}}});
    }
    j["rows"] = std::move(rows_json);
    return j.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os << "feature_set,model,dataset,gaze_mode,status,n_samples,feature_dim,"
          "precision,recall,f1,error\n";
    for (const ReportRow& row : rows) {
        os << csv_escape(row.feature_set) << ',' << csv_escape(row.model) << ','
           << csv_escape(row.dataset) << ',' << csv_escape(row.gaze_mode) << ','
           << row.status << ',' << row.n_samples << ',' << row.feature_dim << ','
           << format_double(row.mean_precision, "%.6f") << ','
           << format_double(row.mean_recall, "%.6f") << ','
           << format_double(row.mean_f1, "%.6f") << ',' << csv_escape(row.error)
           << '\n';
    }
    return os.str();
}

EvalReport run_pipeline(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    EvalReport report;
    report.seed = config.seed;
    report.config_hash = fnv1a_hex(config.canonical_json());
    report.timestamp = iso_timestamp();

    PipelineState state(config);
    for (const ExperimentRow& row : config.rows) {
        ReportRow rr;
        rr.feature_set = row.feature_set;
        rr.model = row.model;
        rr.dataset = row.dataset;
        rr.gaze_mode = "none";
        try {
            PipelineState::Assembled a =
                state.assemble(row.feature_set, row.dataset, row.gaze_mode);
            if (a.has_gaze_block) rr.gaze_mode = to_string(row.gaze_mode);
            rr.n_samples = a.x.rows();
            rr.feature_dim = a.x.cols();
            learn::TrainConfig cfg = model_config_for(config, row.model);
            auto grid_it = config.model_grids.find(row.model);
            if (grid_it != config.model_grids.end()) {
                std::vector<learn::TrainConfig> grid = grid_it->second;
                for (learn::TrainConfig& g : grid) {
                    g.kind = cfg.kind;
                    g.seed = cfg.seed;
                }
                const learn::GridSearchResult search = learn::grid_search(
                    grid, a.x, a.y, config.k, config.seed + kFoldSeedOffset,
                    config.search_metric);
                cfg = search.best_config;
                log_info("row " + row.feature_set + "/" + row.model + "/" +
                         row.dataset + ": grid search picked configuration " +
                         std::to_string(search.best_index));
            }
            const learn::FoldAssignment folds = learn::stratified_kfold(
                a.y, config.k, config.seed + kFoldSeedOffset);
            const learn::CvResult cv =
                learn::cross_validate(a.x, a.y, cfg, folds);
            for (std::size_t f = 0; f < cv.folds.size(); ++f)
                rr.folds.push_back({static_cast<int>(f),
                                    cv.folds[f].weighted_precision,
                                    cv.folds[f].weighted_recall,
                                    cv.folds[f].weighted_f1});
            rr.mean_precision = cv.mean_weighted_precision;
            rr.mean_recall = cv.mean_weighted_recall;
            rr.mean_f1 = cv.mean_weighted_f1;
        } catch (const std::exception& e) {
            rr.status = "failed";
            rr.error = e.what();
            log_error("row " + row.feature_set + "/" + row.model + "/" +
                      row.dataset + " failed: " + e.what());
        }
        report.rows.push_back(std::move(rr));
    }

    report.wall_ms = static_cast<long>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start)
            .count());

    std::filesystem::create_directories(config.output_dir);
    const std::filesystem::path out_dir(config.output_dir);
    write_text_file((out_dir / "report.json").string(), report.to_json_string());
    write_text_file((out_dir / "report.csv").string(), report.to_csv());

    if (state.has_collected_gaze() && !config.regressor_embedding.empty()) {
        try {
            const learn::TrainedModel& model = state.regressor();
            std::ostringstream os;
            os << "pair_id,feature_name,gold,predicted\n";
            for (const PipelineState::GoldRow& gr : state.gold_rows()) {
                const std::vector<double> predicted = model.predict_vector(
                    state.embedding_features(config.regressor_embedding,
                                             *gr.pair));
                for (std::size_t i = 0; i < predicted.size(); ++i)
                    os << csv_escape(gr.trial_id) << ','
                       << state.selected_names()[i] << ','
                       << format_double(gr.gold->values[i]) << ','
                       << format_double(predicted[i]) << '\n';
            }
            write_text_file((out_dir / "gaze_comparison.csv").string(), os.str());
        } catch (const std::exception& e) {
            log_warn(std::string("gaze comparison not written: ") + e.what());
        }
    }
    return report;
}

learn::TrainedModel train_single(const ExperimentConfig& config,
                                 const std::string& model,
                                 const std::string& feature_set,
                                 const std::string& dataset, GazeMode mode) {
    PipelineState state(config);
    if (model == "gaze_regressor") return state.regressor();
    PipelineState::Assembled a = state.assemble(feature_set, dataset, mode);
    const learn::TrainConfig cfg = model_config_for(config, model);
    return learn::train(a.x, a.y, cfg);
}

void predict_gaze_to_csv(const ExperimentConfig& config,
                         const learn::TrainedModel& model,
                         const std::string& dataset,
                         const std::string& out_path) {
    if (model.kind != learn::ModelKind::gaze_regressor)
        throw InvalidArgument("predict-gaze needs a gaze_regressor model");
    if (config.regressor_embedding.empty())
        throw InvalidArgument("config: gaze.regressor_embedding is not set");
    PipelineState state(config);
    const std::vector<corpus::Pair> pairs = state.dataset_pairs(dataset);
    std::ostringstream os;
    os << "pair_id";
    const std::size_t out_dim = model.target_norm.dim();
    for (std::size_t i = 0; i < out_dim; ++i) {
        if (i < model.output_names.size())
            os << ',' << csv_escape(model.output_names[i]);
        else
            os << ",y" << i;
    }
    os << '\n';
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::vector<double> predicted = model.predict_vector(
            state.embedding_features(config.regressor_embedding, pairs[i]));
        os << csv_escape(state.pair_id(pairs[i], i));
        for (double v : predicted) os << ',' << format_double(v);
        os << '\n';
    }
    write_text_file(out_path, os.str());
}

void report_json_to_csv(const std::string& report_json_path,
                        const std::string& out_path) {
    std::ifstream in(report_json_path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + report_json_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    try {
        EvalReport report;
        report.tool_version = j.value("tool_version", std::string());
        report.config_hash = j.value("config_hash", std::string());
        report.seed = j.value("seed", 0ULL);
        for (const json& row : j.at("rows")) {
            ReportRow rr;
            rr.feature_set = row.at("feature_set").get<std::string>();
            rr.model = row.at("model").get<std::string>();
            rr.dataset = row.at("dataset").get<std::string>();
            rr.gaze_mode = row.value("gaze_mode", std::string("none"));
            rr.status = row.at("status").get<std::string>();
            rr.error = row.value("error", std::string());
            rr.n_samples = row.value("n_samples", std::size_t{0});
            rr.feature_dim = row.value("feature_dim", std::size_t{0});
            const json& mean = row.at("mean");
            rr.mean_precision = mean.at("precision").get<double>();
            rr.mean_recall = mean.at("recall").get<double>();
            rr.mean_f1 = mean.at("f1").get<double>();
            report.rows.push_back(std::move(rr));
        }
        write_text_file(out_path, report.to_csv());
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
}

void gaze_extract_csv(const std::string& report_path,
                      const std::string& trials_path, long min_fixation_ms,
                      const std::string& out_path) {
    const gaze::FixationReport report =
        gaze::parse_fixation_report(report_path, min_fixation_ms);
    const std::vector<gaze::TrialInfo> trials = gaze::load_trial_map(trials_path);
    const TrialPoints points = build_trial_points(report.events, trials, nullptr);
    std::ostringstream os;
    os << "participant,trial_id";
    for (const char* name : gaze::kRawFeatureNames) os << ',' << name;
    os << '\n';
    for (std::size_t i = 0; i < points.raw.size(); ++i) {
        os << csv_escape(points.participants[i]) << ','
           << csv_escape(points.trial_ids[i]);
        for (double v : points.raw[i]) os << ',' << format_double(v);
        os << '\n';
    }
    write_text_file(out_path, os.str());
}

void gaze_analyze_csv(const std::string& report_path,
                      const std::string& trials_path,
                      const std::string& pairs_path, long min_fixation_ms,
                      gaze::DurationNorm norm, const std::string& out_path) {
    const gaze::FixationReport report =
        gaze::parse_fixation_report(report_path, min_fixation_ms);
    const std::vector<gaze::TrialInfo> trials = gaze::load_trial_map(trials_path);
    const std::vector<corpus::Pair> pairs = corpus::load_pairs(pairs_path);
    const std::vector<gaze::ParticipantGazeStats> rows =
        gaze::fixation_duration_analysis(report.events, trials, pairs, norm);
    std::ostringstream os;
    os << "participant,mean_pos,var_pos,mean_neg,var_neg,t,df,p\n";
    for (const gaze::ParticipantGazeStats& row : rows) {
        os << csv_escape(row.participant) << ',' << format_double(row.mean_pos)
           << ',' << format_double(row.var_pos) << ','
           << format_double(row.mean_neg) << ',' << format_double(row.var_neg)
           << ',' << format_double(row.welch.t) << ','
           << format_double(row.welch.df) << ',' << format_double(row.welch.p)
           << '\n';
    }
    write_text_file(out_path, os.str());
}

std::string gaze_select_json(const std::string& report_path,
                             const std::string& trials_path,
                             const std::string& pairs_path, long min_fixation_ms,
                             const std::vector<int>& k_grid,
                             unsigned long long seed) {
    const gaze::FixationReport report =
        gaze::parse_fixation_report(report_path, min_fixation_ms);
    const std::vector<gaze::TrialInfo> trials = gaze::load_trial_map(trials_path);
    const std::vector<corpus::Pair> pairs = corpus::load_pairs(pairs_path);
    const TrialPoints points = build_trial_points(report.events, trials, &pairs);
    std::vector<std::vector<double>> raw;
    std::vector<int> labels;
    for (std::size_t i = 0; i < points.raw.size(); ++i) {
        if (points.labels[i] < 0) continue;
        raw.push_back(points.raw[i]);
        labels.push_back(points.labels[i]);
    }
    if (raw.empty())
        throw InsufficientData("feature selection needs labeled gaze trials");
    const std::vector<std::size_t> selected =
        gaze::select_k_best(rows_to_matrix(raw), labels, k_grid, seed);
    json j;
    j["k"] = selected.size();
    j["indices"] = selected;
    json names = json::array();
    for (std::size_t idx : selected) names.push_back(gaze::kRawFeatureNames[idx]);
    j["names"] = std::move(names);
    return j.dump();
}

}  // namespace cogkit::pipeline
