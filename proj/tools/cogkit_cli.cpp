// Command-line front end. Talks to the core library exclusively through the
// C API in cogkit.h; results go to standard output (or --out files), logs
// are line-delimited JSON on standard error.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cogkit.h"

namespace {

using nlohmann::json;

// Exit convention: 0 success, 1 operation failure, 2 usage error.
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int fail(cogkit_status status) {
    json j;
    j["level"] = "error";
    j["msg"] = cogkit_last_error();
    j["status"] = static_cast<int>(status);
    std::fprintf(stderr, "%s\n", j.dump().c_str());
    return kExitFailure;
}

void print_and_free(char* s) {
    if (s != nullptr) {
        std::printf("%s\n", s);
        cogkit_string_free(s);
    }
}

void print_written(const std::string& path) {
    json j;
    j["written"] = path;
    std::printf("%s\n", j.dump().c_str());
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cognate vs. false-friend detection toolkit"};
    app.set_version_flag("--version", cogkit_version());
    app.require_subcommand(1);
    int rc = 0;

    // ingest
    struct {
        std::string pairs, wordnet, out_d1, out_d2;
        std::uint64_t seed = 0;
        bool balance = true;
        std::size_t gaze_subset_n = 0;
    } ingest;
    {
        CLI::App* cmd = app.add_subcommand(
            "ingest", "Load a pair corpus, balance classes, carve a gaze subset");
        cmd->add_option("--pairs", ingest.pairs, "Pair TSV")->required();
        cmd->add_option("--wordnet", ingest.wordnet, "Synset context TSV");
        cmd->add_option("--seed", ingest.seed, "Sampling seed");
        cmd->add_flag("--balance,!--no-balance", ingest.balance,
                      "Downsample the majority class (default on)");
        cmd->add_option("--gaze-subset-n", ingest.gaze_subset_n,
                        "Pairs per class moved into the gaze subset");
        cmd->add_option("--out-d1", ingest.out_d1, "Remainder pair TSV to write");
        cmd->add_option("--out-d2", ingest.out_d2, "Subset pair TSV to write");
        cmd->callback([&] {
            char* out = nullptr;
            const cogkit_status status = cogkit_ingest(
                ingest.pairs.c_str(), opt(ingest.wordnet),
                ingest.balance ? 1 : 0, ingest.seed, ingest.gaze_subset_n,
                opt(ingest.out_d1), opt(ingest.out_d2), &out);
            if (status != COGKIT_OK) {
                rc = fail(status);
                return;
            }
            print_and_free(out);
        });
    }

    // lexsim
    struct {
        std::string a, b;
        int q = 2;
        double alpha = 0.5;
    } lexsim;
    {
        CLI::App* cmd = app.add_subcommand(
            "lexsim", "Edit-distance similarity for one word pair");
        cmd->add_option("--a", lexsim.a, "First word")->required();
        cmd->add_option("--b", lexsim.b, "Second word")->required();
        cmd->add_option("--q", lexsim.q, "q-gram length");
        cmd->add_option("--alpha", lexsim.alpha,
                        "Weight of the edit-distance term in [0,1]");
        cmd->callback([&] {
            char* out = nullptr;
            const cogkit_status status = cogkit_lexsim(
                lexsim.a.c_str(), lexsim.b.c_str(), lexsim.q, lexsim.alpha, &out);
            if (status != COGKIT_OK) {
                rc = fail(status);
                return;
            }
            print_and_free(out);
        });
    }

    // phonetics
    struct {
        std::string table, word;
    } phon;
    {
        CLI::App* cmd = app.add_subcommand(
            "phonetics", "Mean phonetic feature vector of a word");
        cmd->add_option("--table", phon.table, "Codepoint feature TSV")
            ->required();
        cmd->add_option("--word", phon.word, "Word to vectorize")->required();
        cmd->callback([&] {
            char* out = nullptr;
            const cogkit_status status =
                cogkit_phonetic_word(phon.table.c_str(), phon.word.c_str(), &out);
            if (status != COGKIT_OK) {
                rc = fail(status);
                return;
            }
            print_and_free(out);
        });
    }

    // align
    struct {
        std::string src, tgt, dict, out;
    } align;
    {
        CLI::App* cmd = app.add_subcommand(
            "align", "Fit an orthogonal map on a bilingual dictionary and write "
                     "the mapped source table");
        cmd->add_option("--src", align.src, "Source embedding table")->required();
        cmd->add_option("--tgt", align.tgt, "Target embedding table")->required();
        cmd->add_option("--dict", align.dict, "Bilingual dictionary TSV")
            ->required();
        cmd->add_option("--out", align.out, "Mapped table to write")->required();
        cmd->callback([&] {
            char* out = nullptr;
            const cogkit_status status =
                cogkit_align(align.src.c_str(), align.tgt.c_str(),
                             align.dict.c_str(), align.out.c_str(), &out);
            if (status != COGKIT_OK) {
                rc = fail(status);
                return;
            }
            print_and_free(out);
        });
    }

    // gaze extract | analyze | select
    struct {
        std::string report, trials, pairs, out, norm = "ia_count";
        long min_fixation_ms = 4;
        std::vector<int> k_grid;
        std::uint64_t seed = 0;
    } gz;
    {
        CLI::App* gaze = app.add_subcommand("gaze", "Eye-tracking operations");
        gaze->require_subcommand(1);

        CLI::App* extract = gaze->add_subcommand(
            "extract", "Per-trial raw gaze feature vectors as CSV");
        extract->add_option("--report", gz.report, "Fixation report TSV")
            ->required();
        extract->add_option("--trials", gz.trials, "Trial map TSV")->required();
        extract->add_option("--min-fixation-ms", gz.min_fixation_ms,
                            "Drop fixations shorter than this");
        extract->add_option("--out", gz.out, "CSV to write")->required();
        extract->callback([&] {
            const cogkit_status status =
                cogkit_gaze_extract(gz.report.c_str(), gz.trials.c_str(),
                                    gz.min_fixation_ms, gz.out.c_str());
            if (status != COGKIT_OK) {
                rc = fail(status);
                return;
            }
            print_written(gz.out);
        });

        CLI::App* analyze = gaze->add_subcommand(
            "analyze", "Per-participant fixation-duration statistics with a "
                       "Welch t-test, as CSV");
        analyze->add_option("--report", gz.report, "Fixation report TSV")
            ->required();
        analyze->add_option("--trials", gz.trials, "Trial map TSV")->required();
        analyze->add_option("--pairs", gz.pairs, "Labeled pair TSV")->required();
        analyze->add_option("--min-fixation-ms", gz.min_fixation_ms,
                            "Drop fixations shorter than this");
        analyze->add_option("--norm", gz.norm,
                            "Per-trial duration normalization: ia_count or none");
        analyze->add_option("--out", gz.out, "CSV to write")->required();
        analyze->callback([&] {
            const cogkit_status status = cogkit_gaze_analyze(
                gz.report.c_str(), gz.trials.c_str(), gz.pairs.c_str(),
                gz.min_fixation_ms, gz.norm.c_str(), gz.out.c_str());
            if (status != COGKIT_OK) {
                rc = fail(status);
                return;
            }
            print_written(gz.out);
        });

        CLI::App* select = gaze->add_subcommand(
            "select", "Pick the best k gaze features by ANOVA F-score plus "
                      "cross-validated accuracy");
        select->add_option("--report", gz.report, "Fixation report TSV")
            ->required();
        select->add_option("--trials", gz.trials, "Trial map TSV")->required();
        select->add_option("--pairs", gz.pairs, "Labeled pair TSV")->required();
        select->add_option("--min-fixation-ms", gz.min_fixation_ms,
                           "Drop fixations shorter than this");
        select->add_option("--k-grid", gz.k_grid, "Candidate k values")
            ->required()
            ->delimiter(',');
        select->add_option("--seed", gz.seed, "Cross-validation seed");
        select->callback([&] {
            char* out = nullptr;
            const cogkit_status status = cogkit_gaze_select(
                gz.report.c_str(), gz.trials.c_str(), gz.pairs.c_str(),
                gz.min_fixation_ms, gz.k_grid.data(), gz.k_grid.size(), gz.seed,
                &out);
            if (status != COGKIT_OK) {
                rc = fail(status);
                return;
            }
            print_and_free(out);
        });
    }

    // train
    struct {
        std::string config, model, features, dataset = "d1+d2", gaze = "auto",
                    out;
    } train;
    {
        CLI::App* cmd = app.add_subcommand(
            "train", "Train one model on the full selected dataset and save it");
        cmd->add_option("--config", train.config, "Experiment config JSON")
            ->required();
        cmd->add_option("--model", train.model,
                        "logreg, linear_svm, ffnn, or gaze_regressor")
            ->required();
        cmd->add_option("--features", train.features,
                        "Feature set, e.g. xlm+gaze (classifiers only)");
        cmd->add_option("--dataset", train.dataset, "d1, d2, or d1+d2");
        cmd->add_option("--gaze", train.gaze, "auto, collected, or predicted");
        cmd->add_option("--out", train.out, "Model JSON to write")->required();
        cmd->callback([&] {
            char* out = nullptr;
            const cogkit_status status = cogkit_train(
                train.config.c_str(), train.model.c_str(),
                train.features.c_str(), train.dataset.c_str(),
                train.gaze.c_str(), train.out.c_str(), &out);
            if (status != COGKIT_OK) {
                rc = fail(status);
                return;
            }
            print_and_free(out);
        });
    }

    // predict-gaze
    struct {
        std::string config, model_file, dataset = "d1+d2", out;
    } predict;
    {
        CLI::App* cmd = app.add_subcommand(
            "predict-gaze",
            "Predict gaze feature vectors for every pair of a dataset");
        cmd->add_option("--config", predict.config, "Experiment config JSON")
            ->required();
        cmd->add_option("--model-file", predict.model_file,
                        "Saved gaze_regressor model")
            ->required();
        cmd->add_option("--dataset", predict.dataset, "d1, d2, or d1+d2");
        cmd->add_option("--out", predict.out, "CSV to write")->required();
        cmd->callback([&] {
            const cogkit_status status = cogkit_predict_gaze(
                predict.config.c_str(), predict.model_file.c_str(),
                predict.dataset.c_str(), predict.out.c_str());
            if (status != COGKIT_OK) {
                rc = fail(status);
                return;
            }
            print_written(predict.out);
        });
    }

    // evaluate
    struct {
        std::string config, out_dir;
        std::uint64_t seed = 0;
    } eval;
    {
        CLI::App* cmd = app.add_subcommand(
            "evaluate", "Run every configured experiment row and write reports");
        cmd->add_option("--config", eval.config, "Experiment config JSON")
            ->required();
        CLI::Option* seed_opt =
            cmd->add_option("--seed", eval.seed, "Override the config seed");
        cmd->add_option("--out", eval.out_dir,
                        "Override the configured output directory");
        cmd->callback([&] {
            char* out = nullptr;
            int all_ok = 0;
            const cogkit_status status = cogkit_evaluate(
                eval.config.c_str(), seed_opt->count() > 0 ? 1 : 0, eval.seed,
                opt(eval.out_dir), &out, &all_ok);
            if (status != COGKIT_OK) {
                rc = fail(status);
                return;
            }
            print_and_free(out);
            if (all_ok == 0) {
                json j;
                j["level"] = "error";
                j["msg"] = "one or more experiment rows failed";
                std::fprintf(stderr, "%s\n", j.dump().c_str());
                rc = kExitFailure;
            }
        });
    }

    // report
    struct {
        std::string in, out;
    } report;
    {
        CLI::App* cmd = app.add_subcommand(
            "report", "Convert an evaluation report from JSON to CSV");
        cmd->add_option("--in", report.in, "report.json path")->required();
        cmd->add_option("--out", report.out, "CSV to write")->required();
        cmd->callback([&] {
            const cogkit_status status =
                cogkit_report_to_csv(report.in.c_str(), report.out.c_str());
            if (status != COGKIT_OK) {
                rc = fail(status);
                return;
            }
            print_written(report.out);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    return rc;
}
