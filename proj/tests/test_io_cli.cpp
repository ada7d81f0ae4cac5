#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "subgauss/cli.hpp"
#include "subgauss/json_io.hpp"

using namespace subgauss;

namespace {

std::string fixtures() { return SUBGAUSS_FIXTURES_DIR; }

std::string temp_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("subgauss_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace

TEST_CASE("format_double round-trips doubles exactly") {
    Rng rng(54321);
    for (int i = 0; i < 1000; ++i) {
        const double scale = std::exp(40.0 * (rng.uniform() - 0.5));
        const double v = (2.0 * rng.uniform() - 1.0) * scale;
        const std::string s = io::format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
    CHECK(io::format_double(1.0) == "1");
}

TEST_CASE("law, spec and measure JSON round trips") {
    Rng rng(9);
    const IndexSet idx({"u", "v", "w"});
    const DiscreteLaw law = oracle::random_law(rng, idx, 4);
    const DiscreteLaw law2 = io::law_from_json(io::to_json(law));
    CHECK(law2.index == law.index);
    CHECK(law2.atoms == law.atoms);
    CHECK(law2.weights == law.weights);

    GaussianSpec spec(idx, {0.5, -0.25, 0.0}, oracle::random_psd(rng, 3));
    const GaussianSpec spec2 = io::spec_from_json(io::to_json(spec));
    CHECK(spec2.mean == spec.mean);
    CHECK(spec2.covariance.data() == spec.covariance.data());

    const MeasureOnT mu = oracle::random_measure(rng, idx);
    const MeasureOnT mu2 = io::measure_from_json(io::to_json(mu));
    CHECK(mu2.probs == mu.probs);

    const tensor::RationalMeasure rm(idx, {2, 0, 3});
    const tensor::RationalMeasure rm2 = io::rational_from_json(io::to_json(rm));
    CHECK(rm2.counts == rm.counts);
    CHECK(rm2.K == 5);
}

TEST_CASE("csv rendering quotes and validates") {
    const std::string csv =
        io::render_csv({"a", "b"}, {{"1", "two,three"}, {"x\"y", "z"}});
    CHECK(csv == "a,b\n1,\"two,three\"\n\"x\"\"y\",z\n");
    CHECK_THROWS_AS(io::render_csv({}, {}), IOError);
    CHECK_THROWS_AS(io::render_csv({"a"}, {{"1", "2"}}), IOError);
}

TEST_CASE("experiment configs parse, validate and override") {
    const std::string text = R"({
        "command": "fernique",
        "inputs": {"law": "law.json", "measure": "mu.json"},
        "parameters": {"foo": 1},
        "seed": 7,
        "output": "out"
    })";
    auto cfg = cli::ExperimentConfig::fromJsonText(text);
    CHECK(cfg.command == "fernique");
    CHECK(cfg.seed == 7);
    cfg.applyOverride("seed=9");
    CHECK(cfg.seed == 9);
    cfg.applyOverride("output=elsewhere");
    CHECK(cfg.outputPath == "elsewhere");
    cfg.applyOverride("samples=12345");
    CHECK(cfg.parametersJson.find("12345") != std::string::npos);
    cfg.applyOverride("Ns=[1,2,4]");
    CHECK(cfg.parametersJson.find("[1,2,4]") != std::string::npos);

    CHECK_THROWS_AS(cli::ExperimentConfig::fromJsonText("{\"command\":\"fernique\"}"),
                    cli::ConfigParse);  // no seed, no wall-clock default
    CHECK_THROWS_AS(cli::ExperimentConfig::fromJsonText(
                        "{\"command\":\"nope\",\"seed\":1,\"output\":\"o\"}"),
                    cli::ConfigParse);
    CHECK_THROWS_AS(cfg.applyOverride("badpair"), cli::ConfigParse);
}

TEST_CASE("emit_plotdata writes the projected columns and rejects empty tables") {
    tensor::StudyTable table;
    for (std::uint64_t N : {1, 2, 4}) {
        tensor::StudyRow row;
        row.N = N;
        row.estimate = EstimateWithCI::fromMoments(0.1 * static_cast<double>(N), 0.01, 100);
        table.rows.push_back(row);
    }
    const std::string dir = temp_dir("plot");
    const std::string path = dir + "/plot.csv";
    cli::emit_plotdata(table, path);
    const std::string csv = io::read_file(path);
    CHECK(csv.rfind("x,y,y_lo,y_hi\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows

    tensor::StudyTable empty;
    CHECK_THROWS_AS(cli::emit_plotdata(empty, path), IOError);
}

TEST_CASE("fernique experiment produces the bundled value and reproduces bytes") {
    cli::ExperimentConfig cfg =
        cli::ExperimentConfig::fromFile(fixtures() + "/configs/fernique.json");
    const std::string dir = temp_dir("fernique");
    cfg.applyOverride("output=" + dir);
    REQUIRE(cli::run_experiment(cfg) == cli::kExitPass);
    const std::string first = io::read_file(dir + "/fernique_summary.json");
    CHECK(first.find("\"value\":1,") != std::string::npos);
    // every summary carries the resolved config echo and module versions
    CHECK(first.find("\"config\":") != std::string::npos);
    CHECK(first.find("\"versions\":") != std::string::npos);
    CHECK(first.find("\"seed\":7") != std::string::npos);
    REQUIRE(cli::run_experiment(cfg) == cli::kExitPass);
    CHECK(io::read_file(dir + "/fernique_summary.json") == first);
}

TEST_CASE("identity experiment exits clean on the bundled instance") {
    cli::ExperimentConfig cfg =
        cli::ExperimentConfig::fromFile(fixtures() + "/configs/identity.json");
    cfg.applyOverride("output=" + temp_dir("identity"));
    CHECK(cli::run_experiment(cfg) == cli::kExitPass);
}

TEST_CASE("missing inputs are input errors") {
    cli::ExperimentConfig cfg =
        cli::ExperimentConfig::fromFile(fixtures() + "/configs/fernique.json");
    cfg.inputs.erase("measure");
    cfg.applyOverride("output=" + temp_dir("missing"));
    CHECK_THROWS_AS(cli::run_experiment(cfg), cli::InputMissing);
}

TEST_CASE("compare experiment replays a saved witness family") {
    cli::ExperimentConfig cfg =
        cli::ExperimentConfig::fromFile(fixtures() + "/configs/compare.json");
    const std::string dir = temp_dir("compare");
    cfg.applyOverride("output=" + dir);
    REQUIRE(cli::run_experiment(cfg) == cli::kExitPass);
    const std::string gaps = io::read_file(dir + "/compare_gap.csv");

    cli::ExperimentConfig replay = cfg;
    const std::string dir2 = temp_dir("compare_replay");
    replay.applyOverride("output=" + dir2);
    replay.applyOverride("witnesses_file=\"" + dir + "/compare_witnesses.json\"");
    REQUIRE(cli::run_experiment(replay) == cli::kExitPass);
    CHECK(io::read_file(dir2 + "/compare_gap.csv") == gaps);
}

TEST_CASE("tensorize experiment emits the study table with a shrinking gap column") {
    cli::ExperimentConfig cfg =
        cli::ExperimentConfig::fromFile(fixtures() + "/configs/tensorize.json");
    const std::string dir = temp_dir("tensorize");
    cfg.applyOverride("output=" + dir);
    cfg.applyOverride("samples=2000");
    REQUIRE(cli::run_experiment(cfg) == cli::kExitPass);
    const std::string csv = io::read_file(dir + "/tensorize_table.csv");
    REQUIRE(csv.rfind("N,class_size,estimate,stderr,ci_lo,ci_hi,exact_F,gap\n", 0) == 0);
    CHECK(std::filesystem::exists(dir + "/tensorize_plot.csv"));

    // last column: |gap| shrinks toward 0 along the N ladder
    std::vector<double> gaps;
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        const auto pos = line.rfind(',');
        gaps.push_back(std::stod(line.substr(pos + 1)));
    }
    REQUIRE(gaps.size() == 3);
    CHECK(std::abs(gaps[1]) < std::abs(gaps[0]));
    CHECK(std::abs(gaps[2]) < std::abs(gaps[1]));
}
