#include "cogkit.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "cogkit/corpus.hpp"
#include "cogkit/error.hpp"
#include "cogkit/gaze.hpp"
#include "cogkit/learn.hpp"
#include "cogkit/lexsim.hpp"
#include "cogkit/phonetics.hpp"
#include "cogkit/pipeline.hpp"
#include "cogkit/xling.hpp"

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::string arg(const char* s) { return s == nullptr ? std::string() : s; }

template <typename F>
cogkit_status guarded(F&& body) {
    g_last_error.clear();
    try {
        body();
        return COGKIT_OK;
    } catch (const cogkit::IoError& e) {
        g_last_error = e.what();
        return COGKIT_ERR_IO;
    } catch (const cogkit::ParseError& e) {
        g_last_error = e.what();
        return COGKIT_ERR_PARSE;
    } catch (const cogkit::InvalidArgument& e) {
        g_last_error = e.what();
        return COGKIT_ERR_INVALID_ARGUMENT;
    } catch (const cogkit::NumericalError& e) {
        g_last_error = e.what();
        return COGKIT_ERR_NUMERICAL;
    } catch (const cogkit::InsufficientData& e) {
        g_last_error = e.what();
        return COGKIT_ERR_INSUFFICIENT_DATA;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return COGKIT_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return COGKIT_ERR_INTERNAL;
    }
}

void require(bool ok, const char* msg) {
    if (!ok) throw cogkit::InvalidArgument(msg);
}

}  // namespace

extern "C" {

const char* cogkit_version(void) { return cogkit::pipeline::kToolVersion; }

const char* cogkit_last_error(void) { return g_last_error.c_str(); }

void cogkit_string_free(char* s) { std::free(s); }

cogkit_status cogkit_ingest(const char* pairs_path, const char* wordnet_path,
                            int balance, uint64_t seed, size_t gaze_subset_n,
                            const char* out_d1, const char* out_d2,
                            char** summary_json_out) {
    return guarded([&] {
        require(pairs_path != nullptr, "pairs_path is required");
        cogkit::corpus::Dataset full = cogkit::corpus::load_dataset(
            arg(pairs_path), arg(wordnet_path), "dataset");
        json summary;
        summary["loaded"] = json::parse(cogkit::corpus::summary_json(full));
        if (balance != 0) {
            full = cogkit::corpus::balance(full, seed);
            summary["balanced"] = json::parse(cogkit::corpus::summary_json(full));
        }
        if (gaze_subset_n > 0) {
            cogkit::corpus::GazeSplit split =
                cogkit::corpus::split_gaze_subset(full, gaze_subset_n, seed + 1);
            split.remainder.name = "d1";
            split.subset.name = "d2";
            summary["d1"] =
                json::parse(cogkit::corpus::summary_json(split.remainder));
            summary["d2"] =
                json::parse(cogkit::corpus::summary_json(split.subset));
            if (out_d1 != nullptr)
                cogkit::corpus::save_pairs(split.remainder.pairs, out_d1);
            if (out_d2 != nullptr)
                cogkit::corpus::save_pairs(split.subset.pairs, out_d2);
        } else if (out_d1 != nullptr) {
            cogkit::corpus::save_pairs(full.pairs, out_d1);
        }
        if (summary_json_out != nullptr)
            *summary_json_out = dup_string(summary.dump());
    });
}

cogkit_status cogkit_lexsim(const char* a, const char* b, int q, double alpha,
                            char** json_out) {
    return guarded([&] {
        require(a != nullptr && b != nullptr, "both words are required");
        const std::string sa = a, sb = b;
        json j;
        j["levenshtein"] = cogkit::lexsim::levenshtein(sa, sb);
        j["ned"] = cogkit::lexsim::ned(sa, sb);
        j["qgram_distance"] = cogkit::lexsim::qgram_distance(sa, sb, q);
        j["wls"] = cogkit::lexsim::wls(sa, sb, q, alpha);
        if (json_out != nullptr) *json_out = dup_string(j.dump());
    });
}

cogkit_status cogkit_phonetic_word(const char* table_path, const char* word,
                                   char** json_out) {
    return guarded([&] {
        require(table_path != nullptr, "table_path is required");
        require(word != nullptr, "word is required");
        const cogkit::phonetics::PhoneticTable table =
            cogkit::phonetics::PhoneticTable::load(table_path);
        const cogkit::phonetics::PhoneticVector v =
            cogkit::phonetics::avg_phonetic_vector(word, table);
        json j;
        j["word"] = word;
        j["dim"] = table.dim();
        j["covered"] = v.known ? 1 : 0;
        j["values"] = v.values;
        if (json_out != nullptr) *json_out = dup_string(j.dump());
    });
}

cogkit_status cogkit_align(const char* src_path, const char* tgt_path,
                           const char* dict_path, const char* out_path,
                           char** json_out) {
    return guarded([&] {
        require(src_path && tgt_path && dict_path && out_path,
                "src, tgt, dict, and out paths are required");
        const cogkit::xling::EmbeddingTable src =
            cogkit::xling::EmbeddingTable::load(src_path, "src");
        const cogkit::xling::EmbeddingTable tgt =
            cogkit::xling::EmbeddingTable::load(tgt_path, "tgt");
        const std::vector<cogkit::xling::DictionaryEntry> dict =
            cogkit::xling::load_dictionary(dict_path);
        const cogkit::xling::DictionaryMatrices mats =
            cogkit::xling::dictionary_matrices(src, tgt, dict);
        const cogkit::xling::OrthogonalMap map =
            cogkit::xling::procrustes_align(mats.x, mats.z);
        const cogkit::xling::EmbeddingTable mapped =
            cogkit::xling::apply_mapping(src, map);
        mapped.save(out_path);
        json j;
        j["dim"] = map.dim();
        j["dict_entries"] = dict.size();
        j["used"] = mats.x.rows();
        j["skipped_oov"] = mats.skipped;
        if (json_out != nullptr) *json_out = dup_string(j.dump());
    });
}

cogkit_status cogkit_gaze_extract(const char* report_path,
                                  const char* trials_path,
                                  long min_fixation_ms, const char* out_csv) {
    return guarded([&] {
        require(report_path && trials_path && out_csv,
                "report, trials, and out paths are required");
        cogkit::pipeline::gaze_extract_csv(report_path, trials_path,
                                           min_fixation_ms, out_csv);
    });
}

cogkit_status cogkit_gaze_analyze(const char* report_path,
                                  const char* trials_path,
                                  const char* pairs_path, long min_fixation_ms,
                                  const char* norm, const char* out_csv) {
    return guarded([&] {
        require(report_path && trials_path && pairs_path && out_csv,
                "report, trials, pairs, and out paths are required");
        const std::string norm_name = norm == nullptr ? "ia_count" : norm;
        cogkit::gaze::DurationNorm duration_norm;
        if (norm_name == "ia_count")
            duration_norm = cogkit::gaze::DurationNorm::ia_count;
        else if (norm_name == "none")
            duration_norm = cogkit::gaze::DurationNorm::none;
        else
            throw cogkit::InvalidArgument("norm must be ia_count or none");
        cogkit::pipeline::gaze_analyze_csv(report_path, trials_path, pairs_path,
                                           min_fixation_ms, duration_norm,
                                           out_csv);
    });
}

cogkit_status cogkit_gaze_select(const char* report_path,
                                 const char* trials_path,
                                 const char* pairs_path, long min_fixation_ms,
                                 const int* k_grid, size_t k_grid_len,
                                 uint64_t seed, char** json_out) {
    return guarded([&] {
        require(report_path && trials_path && pairs_path,
                "report, trials, and pairs paths are required");
        require(k_grid != nullptr && k_grid_len > 0, "k_grid must be non-empty");
        const std::vector<int> grid(k_grid, k_grid + k_grid_len);
        const std::string result = cogkit::pipeline::gaze_select_json(
            report_path, trials_path, pairs_path, min_fixation_ms, grid, seed);
        if (json_out != nullptr) *json_out = dup_string(result);
    });
}

cogkit_status cogkit_train(const char* config_path, const char* model,
                           const char* feature_set, const char* dataset,
                           const char* gaze_mode, const char* model_out_path,
                           char** json_out) {
    return guarded([&] {
        require(config_path && model && model_out_path,
                "config, model, and output paths are required");
        const cogkit::pipeline::ExperimentConfig config =
            cogkit::pipeline::ExperimentConfig::from_file(config_path);
        const cogkit::pipeline::GazeMode mode =
            gaze_mode == nullptr
                ? cogkit::pipeline::GazeMode::automatic
                : cogkit::pipeline::gaze_mode_from_string(gaze_mode);
        const cogkit::learn::TrainedModel trained =
            cogkit::pipeline::train_single(config, model, arg(feature_set),
                                           arg(dataset), mode);
        trained.save(model_out_path);
        json j;
        j["kind"] = cogkit::learn::to_string(trained.kind);
        j["layer_dims"] = trained.layer_dims;
        j["saved"] = model_out_path;
        if (json_out != nullptr) *json_out = dup_string(j.dump());
    });
}

cogkit_status cogkit_predict_gaze(const char* config_path,
                                  const char* model_path, const char* dataset,
                                  const char* out_csv) {
    return guarded([&] {
        require(config_path && model_path && dataset && out_csv,
                "config, model, dataset, and out paths are required");
        const cogkit::pipeline::ExperimentConfig config =
            cogkit::pipeline::ExperimentConfig::from_file(config_path);
        const cogkit::learn::TrainedModel model =
            cogkit::learn::TrainedModel::load(model_path);
        cogkit::pipeline::predict_gaze_to_csv(config, model, dataset, out_csv);
    });
}

cogkit_status cogkit_evaluate(const char* config_path, int has_seed_override,
                              uint64_t seed_override, const char* out_dir,
                              char** report_json_out, int* all_ok_out) {
    return guarded([&] {
        require(config_path != nullptr, "config_path is required");
        cogkit::pipeline::ExperimentConfig config =
            cogkit::pipeline::ExperimentConfig::from_file(config_path);
        if (has_seed_override != 0) config.seed = seed_override;
        if (out_dir != nullptr) config.output_dir = out_dir;
        const cogkit::pipeline::EvalReport report =
            cogkit::pipeline::run_pipeline(config);
        if (report_json_out != nullptr)
            *report_json_out = dup_string(report.to_json_string());
        if (all_ok_out != nullptr) *all_ok_out = report.all_ok() ? 1 : 0;
    });
}

cogkit_status cogkit_report_to_csv(const char* report_json_path,
                                   const char* out_csv) {
    return guarded([&] {
        require(report_json_path && out_csv, "input and output paths required");
        cogkit::pipeline::report_json_to_csv(report_json_path, out_csv);
    });
}

}  // extern "C"
