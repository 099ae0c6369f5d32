#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "cogkit/error.hpp"
#include "cogkit/pipeline.hpp"
#include "helpers.hpp"

using namespace cogkit;
using nlohmann::json;
using pipeline::ExperimentConfig;
using pipeline::GazeMode;
using testutil::TempDir;
using testutil::fixture;
using testutil::read_file;

namespace {

const std::string kFixtureDir = COGKIT_FIXTURE_DIR;

ExperimentConfig fixture_config(const std::string& output_dir) {
    ExperimentConfig config = ExperimentConfig::from_file(fixture("experiment.json"));
    config.output_dir = output_dir;
    return config;
}

// Plain comma split that keeps trailing empty fields (none of the asserted
// fixture values contain quoted commas).
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

json parse_without_run_block(const std::string& text) {
    json j = json::parse(text);
    j.erase("run");
    return j;
}

}  // namespace

TEST_CASE("gaze mode names round trip") {
    CHECK(pipeline::to_string(GazeMode::automatic) == "auto");
    CHECK(pipeline::to_string(GazeMode::collected) == "collected");
    CHECK(pipeline::to_string(GazeMode::predicted) == "predicted");
    CHECK(pipeline::gaze_mode_from_string("auto") == GazeMode::automatic);
    CHECK(pipeline::gaze_mode_from_string("automatic") == GazeMode::automatic);
    CHECK(pipeline::gaze_mode_from_string("collected") == GazeMode::collected);
    CHECK(pipeline::gaze_mode_from_string("predicted") == GazeMode::predicted);
    CHECK_THROWS_AS(pipeline::gaze_mode_from_string("psychic"), InvalidArgument);
}

TEST_CASE("config parsing applies defaults") {
    const std::string text = R"({
        "data": {"pairs": "pairs.tsv"},
        "experiments": [{"features": "lexical", "model": "logreg", "dataset": "d1+d2"}]
    })";
    const ExperimentConfig c = ExperimentConfig::from_json_string(text, kFixtureDir);
    CHECK(c.name == "experiment");
    CHECK(c.seed == 0);
    CHECK(c.k == 5);
    CHECK(c.balance);
    CHECK(c.gaze_subset_n == 0);
    CHECK(c.lexical_q == 2);
    CHECK(c.lexical_alpha == 0.5);
    CHECK(c.min_fixation_ms == 4);
    CHECK(c.duration_norm == gaze::DurationNorm::ia_count);
    CHECK(c.search_metric == learn::SearchMetric::weighted_f1);
    // The default output directory is the config's own directory.
    CHECK(c.output_dir.rfind(kFixtureDir, 0) == 0);
    REQUIRE(c.rows.size() == 1);
    CHECK(c.rows[0].gaze_mode == GazeMode::automatic);
    // Relative paths resolve against the directory holding the config.
    CHECK(c.pairs_path == kFixtureDir + std::string("/pairs.tsv"));
}

TEST_CASE("config parsing rejects bad input") {
    auto parse = [](const std::string& text) {
        return ExperimentConfig::from_json_string(text, kFixtureDir);
    };
    const std::string rows =
        R"("experiments": [{"features": "lexical", "model": "logreg", "dataset": "d1"}])";

    CHECK_THROWS_AS(parse("{nope"), ParseError);
    // data.pairs is mandatory.
    CHECK_THROWS_AS(parse(R"({"experiments": []})"), ParseError);
    // Fewer than two folds cannot cross-validate.
    CHECK_THROWS_AS(parse(R"({"k": 1, "data": {"pairs": "pairs.tsv"}, )" + rows + "}"),
                    InvalidArgument);
    // Unknown model and dataset names are rejected up front.
    CHECK_THROWS_AS(
        parse(R"({"data": {"pairs": "pairs.tsv"},
                  "experiments": [{"features": "lexical", "model": "forest", "dataset": "d1"}]})"),
        InvalidArgument);
    CHECK_THROWS_AS(
        parse(R"({"data": {"pairs": "pairs.tsv"},
                  "experiments": [{"features": "lexical", "model": "logreg", "dataset": "d3"}]})"),
        InvalidArgument);
    // Empty experiment list.
    CHECK_THROWS_AS(parse(R"({"data": {"pairs": "pairs.tsv"}, "experiments": []})"),
                    InvalidArgument);
    // Referenced files must exist at parse time.
    CHECK_THROWS_AS(parse(R"({"data": {"pairs": "no_such.tsv"}, )" + rows + "}"),
                    IoError);
    CHECK_THROWS_AS(
        parse(R"({"data": {"pairs": "pairs.tsv"}, "phonetic_table": "ghost.tsv", )" +
              rows + "}"),
        IoError);
    // duration_norm and search_metric accept only their documented values.
    CHECK_THROWS_AS(
        parse(R"({"data": {"pairs": "pairs.tsv"},
                  "gaze": {"duration_norm": "words"}, )" + rows + "}"),
        InvalidArgument);
    CHECK_THROWS_AS(
        parse(R"({"data": {"pairs": "pairs.tsv"}, "search_metric": "recall", )" +
              rows + "}"),
        InvalidArgument);
    // search_metric nested under models is a likely mistake; call it out.
    CHECK_THROWS_AS(
        parse(R"({"data": {"pairs": "pairs.tsv"},
                  "models": {"search_metric": "accuracy"}, )" + rows + "}"),
        Error);
    CHECK_THROWS_AS(ExperimentConfig::from_file("/no/such/config.json"), IoError);
}

TEST_CASE("experiment matrix form expands the cartesian product") {
    const std::string text = R"({
        "data": {"pairs": "pairs.tsv"},
        "experiments": {
            "feature_sets": ["lexical", "phonetic"],
            "models": ["logreg", "linear_svm"],
            "datasets": ["d1+d2"],
            "gaze": "collected"
        }
    })";
    const ExperimentConfig c = ExperimentConfig::from_json_string(text, kFixtureDir);
    REQUIRE(c.rows.size() == 4);
    CHECK(c.rows[0].feature_set == "lexical");
    CHECK(c.rows[0].model == "logreg");
    CHECK(c.rows[1].model == "linear_svm");
    CHECK(c.rows[2].feature_set == "phonetic");
    for (const pipeline::ExperimentRow& row : c.rows) {
        CHECK(row.dataset == "d1+d2");
        CHECK(row.gaze_mode == GazeMode::collected);
    }
}

TEST_CASE("model sections set overrides and expand grids") {
    const std::string text = R"({
        "data": {"pairs": "pairs.tsv"},
        "models": {
            "logreg": {"c": 0.25},
            "ffnn": {"hidden_dim_grid": [10, 20], "activation_grid": ["tanh", "relu"]}
        },
        "experiments": [{"features": "lexical", "model": "ffnn", "dataset": "d1+d2"}]
    })";
    const ExperimentConfig c = ExperimentConfig::from_json_string(text, kFixtureDir);
    CHECK(c.models.at("logreg").c == 0.25);
    CHECK(c.models.at("logreg").kind == learn::ModelKind::logreg);
    CHECK(c.model_grids.count("logreg") == 0);  // single point, no grid

    REQUIRE(c.model_grids.count("ffnn") == 1);
    const std::vector<learn::TrainConfig>& grid = c.model_grids.at("ffnn");
    REQUIRE(grid.size() == 4);
    // Cartesian order: hidden_dim varies slower than activation.
    CHECK(grid[0].hidden_dim == 10);
    CHECK(grid[0].activation == learn::Activation::tanh);
    CHECK(grid[1].hidden_dim == 10);
    CHECK(grid[1].activation == learn::Activation::relu);
    CHECK(grid[3].hidden_dim == 20);
    CHECK(grid[3].activation == learn::Activation::relu);
}

TEST_CASE("canonical form ignores key order and output location") {
    const std::string a = R"({
        "seed": 9, "name": "x",
        "data": {"pairs": "pairs.tsv"},
        "experiments": [{"features": "lexical", "model": "logreg", "dataset": "d1+d2"}],
        "output_dir": "/tmp/here"
    })";
    const std::string b = R"({
        "data": {"pairs": "pairs.tsv"},
        "output_dir": "/somewhere/else",
        "experiments": [{"features": "lexical", "model": "logreg", "dataset": "d1+d2"}],
        "name": "x", "seed": 9
    })";
    const ExperimentConfig ca = ExperimentConfig::from_json_string(a, kFixtureDir);
    const ExperimentConfig cb = ExperimentConfig::from_json_string(b, kFixtureDir);
    CHECK(ca.canonical_json() == cb.canonical_json());

    // The seed does change the canonical form.
    const std::string c = R"({
        "seed": 10, "name": "x",
        "data": {"pairs": "pairs.tsv"},
        "experiments": [{"features": "lexical", "model": "logreg", "dataset": "d1+d2"}]
    })";
    CHECK(ExperimentConfig::from_json_string(c, kFixtureDir).canonical_json() !=
          ca.canonical_json());
}

TEST_CASE("full run on the bundled experiment") {
    TempDir tmp;
    const ExperimentConfig config = fixture_config(tmp.file("out"));
    const pipeline::EvalReport report = pipeline::run_pipeline(config);

    CHECK(report.all_ok());
    REQUIRE(report.rows.size() == 6);
    CHECK(report.config_hash.size() == 16);
    CHECK(report.config_hash.find_first_not_of("0123456789abcdef") ==
          std::string::npos);

    // Feature dimensions follow the block arithmetic: an embedding block is
    // 4 * 8 + 4 here, the gaze block 8, lexical 2, phonetic 4 * 38.
    std::map<std::string, std::size_t> dim_of;
    std::map<std::string, std::size_t> samples_of;
    for (const pipeline::ReportRow& row : report.rows) {
        CHECK(row.status == "ok");
        CHECK(row.folds.size() == 5);
        dim_of[row.feature_set] = row.feature_dim;
        samples_of[row.dataset] = row.n_samples;
        CHECK(row.mean_f1 >= 0.0);
        CHECK(row.mean_f1 <= 1.0);
    }
    CHECK(dim_of.at("xlm") == 36);
    CHECK(dim_of.at("xlm+gaze") == 44);
    CHECK(dim_of.at("gaze") == 8);
    CHECK(dim_of.at("lexical") == 2);
    CHECK(dim_of.at("phonetic") == 152);
    CHECK(samples_of.at("d1") == 10);
    CHECK(samples_of.at("d2") == 10);
    CHECK(samples_of.at("d1+d2") == 20);

    // Rows with no gaze block report gaze_mode "none".
    for (const pipeline::ReportRow& row : report.rows) {
        const bool has_gaze =
            row.feature_set.find("gaze") != std::string::npos;
        if (has_gaze)
            CHECK(row.gaze_mode != "none");
        else
            CHECK(row.gaze_mode == "none");
    }

    // The report files land in the output directory.
    const std::string report_json = read_file(tmp.file("out/report.json"));
    const std::string report_csv = read_file(tmp.file("out/report.csv"));
    CHECK(report_json == report.to_json_string());
    CHECK(report_csv == report.to_csv());

    const json j = json::parse(report_json);
    CHECK(j.at("schema_version").get<int>() == 1);
    CHECK(j.at("tool").get<std::string>() == "cogkit");
    CHECK(j.at("tool_version").get<std::string>() == pipeline::kToolVersion);
    CHECK(j.at("seed").get<unsigned long long>() == 42);
    CHECK(j.at("rows").size() == 6);
    const std::regex iso("^\\d{4}-\\d{2}-\\d{2}T\\d{2}:\\d{2}:\\d{2}Z$");
    CHECK(std::regex_match(
        j.at("run").at("timestamp").get<std::string>(), iso));
    CHECK(j.at("run").at("wall_ms").get<long>() >= 0);
    const json& first = j.at("rows").at(0);
    CHECK(first.contains("mean"));
    CHECK(first.at("folds").size() == 5);
    CHECK(first.at("folds").at(0).contains("f1"));

    // CSV shape: the pinned header plus one line per row.
    const std::vector<std::string> csv_lines = lines_of(report_csv);
    REQUIRE(csv_lines.size() == 7);
    CHECK(csv_lines[0] ==
          "feature_set,model,dataset,gaze_mode,status,n_samples,feature_dim,"
          "precision,recall,f1,error");
    CHECK(split_csv_line(csv_lines[1]).size() == 11);

    // Gold-versus-predicted gaze table: 20 pairs x 8 features plus header.
    const std::vector<std::string> cmp_lines =
        lines_of(read_file(tmp.file("out/gaze_comparison.csv")));
    REQUIRE(cmp_lines.size() == 161);
    CHECK(cmp_lines[0] == "pair_id,feature_name,gold,predicted");
    CHECK(split_csv_line(cmp_lines[1])[0] == "t101");
}

TEST_CASE("pipeline runs are deterministic") {
    TempDir tmp;
    const pipeline::EvalReport first =
        pipeline::run_pipeline(fixture_config(tmp.file("a")));
    const pipeline::EvalReport second =
        pipeline::run_pipeline(fixture_config(tmp.file("b")));

    // Identical apart from the volatile run block, including the hash, which
    // must not depend on where the output goes.
    CHECK(first.config_hash == second.config_hash);
    CHECK(first.to_csv() == second.to_csv());
    CHECK(parse_without_run_block(first.to_json_string()) ==
          parse_without_run_block(second.to_json_string()));
    CHECK(read_file(tmp.file("a/report.csv")) == read_file(tmp.file("b/report.csv")));
    CHECK(read_file(tmp.file("a/gaze_comparison.csv")) ==
          read_file(tmp.file("b/gaze_comparison.csv")));
}

TEST_CASE("failed rows are recorded without aborting the run") {
    TempDir tmp;
    // Gaze features are requested but no gaze data is configured, so that row
    // fails while the lexical row still succeeds.
    const std::string text = R"({
        "data": {"pairs": "pairs.tsv"},
        "experiments": [
            {"features": "gaze", "model": "logreg", "dataset": "d1+d2", "gaze": "collected"},
            {"features": "lexical", "model": "logreg", "dataset": "d1+d2"}
        ]
    })";
    ExperimentConfig config = ExperimentConfig::from_json_string(text, kFixtureDir);
    config.output_dir = tmp.file("out");
    const pipeline::EvalReport report = pipeline::run_pipeline(config);

    CHECK_FALSE(report.all_ok());
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].status == "failed");
    CHECK_FALSE(report.rows[0].error.empty());
    CHECK(report.rows[0].folds.empty());
    CHECK(report.rows[1].status == "ok");

    // The failure lands in the CSV error column.
    const std::vector<std::string> lines = lines_of(read_file(tmp.file("out/report.csv")));
    REQUIRE(lines.size() == 3);
    CHECK(lines[1].find("failed") != std::string::npos);
}

TEST_CASE("train_single builds models from the manifest") {
    TempDir tmp;
    const ExperimentConfig config = fixture_config(tmp.file("out"));

    const learn::TrainedModel lexical =
        pipeline::train_single(config, "logreg", "lexical", "d1+d2");
    CHECK(lexical.kind == learn::ModelKind::logreg);
    CHECK(lexical.layer_dims == std::vector<int>{2, 1});
    CHECK(lexical.config.c == 1.0);  // the manifest's logreg override

    // The regressor maps embedding features to the selected gaze coordinates.
    const learn::TrainedModel regressor =
        pipeline::train_single(config, "gaze_regressor", "", "");
    CHECK(regressor.kind == learn::ModelKind::gaze_regressor);
    CHECK(regressor.layer_dims == std::vector<int>{36, 128, 64, 32, 8});
    REQUIRE(regressor.output_names.size() == 8);
    CHECK(regressor.output_names[0] == "fixation_duration_avg");

    // Unknown feature tokens and empty sets are rejected.
    CHECK_THROWS_AS(pipeline::train_single(config, "logreg", "bogus", "d1"),
                    InvalidArgument);
    CHECK_THROWS_AS(pipeline::train_single(config, "logreg", "", "d1"),
                    InvalidArgument);
    CHECK_THROWS_AS(
        pipeline::train_single(config, "logreg", "xlm+other", "d1"),
        InvalidArgument);

    // Feature tokens are flags, so repeating one changes nothing.
    const learn::TrainedModel repeated =
        pipeline::train_single(config, "logreg", "xlm+xlm", "d1");
    const learn::TrainedModel plain =
        pipeline::train_single(config, "logreg", "xlm", "d1");
    CHECK(repeated.layer_dims == plain.layer_dims);
    CHECK(repeated.layer_dims.front() == 36);
}

TEST_CASE("predict_gaze_to_csv writes one column per output") {
    TempDir tmp;
    const ExperimentConfig config = fixture_config(tmp.file("out"));
    const learn::TrainedModel regressor =
        pipeline::train_single(config, "gaze_regressor", "", "");

    pipeline::predict_gaze_to_csv(config, regressor, "d1", tmp.file("pred.csv"));
    const std::vector<std::string> lines = lines_of(read_file(tmp.file("pred.csv")));
    REQUIRE(lines.size() == 11);  // header + ten d1 pairs
    const std::vector<std::string> header = split_csv_line(lines[0]);
    REQUIRE(header.size() == 9);
    CHECK(header[0] == "pair_id");
    CHECK(header[1] == "fixation_duration_avg");
    CHECK(header[8] == "saccade_count");
    for (std::size_t i = 1; i < lines.size(); ++i)
        CHECK(split_csv_line(lines[i]).size() == 9);

    // Only regressors are accepted.
    const learn::TrainedModel lexical =
        pipeline::train_single(config, "logreg", "lexical", "d1+d2");
    CHECK_THROWS_AS(
        pipeline::predict_gaze_to_csv(config, lexical, "d1", tmp.file("x.csv")),
        InvalidArgument);
}

TEST_CASE("report JSON converts to the same CSV the run writes") {
    TempDir tmp;
    pipeline::run_pipeline(fixture_config(tmp.file("out")));
    pipeline::report_json_to_csv(tmp.file("out/report.json"), tmp.file("again.csv"));
    CHECK(read_file(tmp.file("again.csv")) == read_file(tmp.file("out/report.csv")));

    CHECK_THROWS_AS(pipeline::report_json_to_csv("/no/such.json", tmp.file("x.csv")),
                    IoError);
    testutil::write_file(tmp.file("bad.json"), "[1,2");
    CHECK_THROWS_AS(
        pipeline::report_json_to_csv(tmp.file("bad.json"), tmp.file("x.csv")),
        ParseError);
}

TEST_CASE("gaze extraction table") {
    TempDir tmp;
    pipeline::gaze_extract_csv(fixture("fixations.tsv"), fixture("trials.tsv"), 4,
                               tmp.file("gaze.csv"));
    const std::vector<std::string> lines = lines_of(read_file(tmp.file("gaze.csv")));
    REQUIRE(lines.size() == 41);  // 2 participants x 20 trials + header

    const std::vector<std::string> header = split_csv_line(lines[0]);
    REQUIRE(header.size() == 20);
    CHECK(header[0] == "participant");
    CHECK(header[1] == "trial_id");
    CHECK(header[2] == "fixation_duration_avg");
    CHECK(header[19] == "ia_dwell_avg");

    // Hand-checked row: p1/t101 after the 2 ms fixation is dropped.
    auto it = std::find_if(lines.begin(), lines.end(), [](const std::string& l) {
        return l.rfind("p1,t101,", 0) == 0;
    });
    REQUIRE(it != lines.end());
    const std::vector<std::string> f = split_csv_line(*it);
    REQUIRE(f.size() == 20);
    CHECK(std::stod(f[2]) == doctest::Approx(122.2));        // mean duration
    CHECK(std::stod(f[3]) == doctest::Approx(31.25));        // mean saccade
    CHECK(std::stod(f[4]) == 5.0);                           // fixations
    CHECK(std::stod(f[9]) == 4.0);                           // saccades = n - 1
    CHECK(std::stod(f[10]) == 611.0);                        // total duration
    CHECK(std::stod(f[11]) == 1.0);                          // regressions
    CHECK(std::stod(f[12]) == 3.0);                          // progressions
    CHECK(std::stod(f[17]) == 736.0);                        // trial span
    CHECK(std::stod(f[19]) == doctest::Approx(203.666667));  // dwell per IA
}

TEST_CASE("gaze significance table") {
    TempDir tmp;
    pipeline::gaze_analyze_csv(fixture("fixations.tsv"), fixture("trials.tsv"),
                               fixture("pairs.tsv"), 4,
                               gaze::DurationNorm::ia_count, tmp.file("sig.csv"));
    const std::vector<std::string> lines = lines_of(read_file(tmp.file("sig.csv")));
    REQUIRE(lines.size() == 3);  // header + two participants
    CHECK(lines[0] == "participant,mean_pos,var_pos,mean_neg,var_neg,t,df,p");

    const std::vector<std::string> p1 = split_csv_line(lines[1]);
    REQUIRE(p1.size() == 8);
    CHECK(p1[0] == "p1");
    CHECK(std::stod(p1[1]) == doctest::Approx(0.0883333333));
    CHECK(std::stod(p1[2]) == doctest::Approx(0.000177351852));
    CHECK(std::stod(p1[3]) == doctest::Approx(0.239116667));
    CHECK(std::stod(p1[4]) == doctest::Approx(0.000599376852));
    CHECK(std::stod(p1[5]) == doctest::Approx(-17.1087651));
    CHECK(std::stod(p1[6]) == doctest::Approx(13.8973123));
    CHECK(std::stod(p1[7]) == doctest::Approx(9.8828114e-11));
    CHECK(split_csv_line(lines[2])[0] == "p2");

    // Cognates read faster here, so the positive class mean is smaller.
    CHECK(std::stod(p1[1]) < std::stod(p1[3]));
}

TEST_CASE("gaze feature selection summary") {
    const std::string out = pipeline::gaze_select_json(
        fixture("fixations.tsv"), fixture("trials.tsv"), fixture("pairs.tsv"), 4,
        {2, 4, 8}, 7);
    const json j = json::parse(out);
    CHECK(j.at("k").get<int>() == 2);
    CHECK(j.at("indices") == json::array({0, 4}));
    CHECK(j.at("names") ==
          json::array({"fixation_duration_avg", "fixation_duration_min"}));

    // Determinism in the seed.
    CHECK(pipeline::gaze_select_json(fixture("fixations.tsv"), fixture("trials.tsv"),
                                     fixture("pairs.tsv"), 4, {2, 4, 8}, 7) == out);
}
