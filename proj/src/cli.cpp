#include "subgauss/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "subgauss/chaining.hpp"
#include "subgauss/comparison.hpp"
#include "subgauss/core.hpp"
#include "subgauss/json_io.hpp"
#include "subgauss/tensorize.hpp"
#include "subgauss/transport.hpp"

namespace subgauss::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kCommands = {"fernique", "tensorize", "chaining", "compare",
                                            "strassen", "identity", "sample"};

json parse_params(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigParse("parameters must be a JSON object");
    return j;
}

double param_num(const json& p, const std::string& key, double dflt) {
    return p.contains(key) ? p.at(key).get<double>() : dflt;
}
std::size_t param_count(const json& p, const std::string& key, std::size_t dflt) {
    return p.contains(key) ? p.at(key).get<std::size_t>() : dflt;
}
std::string param_str(const json& p, const std::string& key, const std::string& dflt) {
    return p.contains(key) ? p.at(key).get<std::string>() : dflt;
}
bool param_bool(const json& p, const std::string& key, bool dflt) {
    return p.contains(key) ? p.at(key).get<bool>() : dflt;
}
std::vector<double> param_vec(const json& p, const std::string& key,
                              std::vector<double> dflt) {
    if (!p.contains(key)) return dflt;
    std::vector<double> out;
    for (const auto& v : p.at(key)) out.push_back(v.get<double>());
    return out;
}

std::string input_path(const ExperimentConfig& cfg, const std::string& role) {
    const auto it = cfg.inputs.find(role);
    if (it == cfg.inputs.end())
        throw InputMissing("config is missing the '" + role + "' input");
    if (!std::filesystem::exists(it->second))
        throw InputMissing("input file does not exist: " + it->second);
    return it->second;
}

// Companion objects whose files omit explicit labels adopt the primary
// index; explicit labels must match it.
MeasureOnT load_measure_for(const std::string& path, const IndexSet& index) {
    const json j = json::parse(io::read_file(path), nullptr, false);
    if (j.is_discarded()) throw IOError("invalid JSON: " + path);
    MeasureOnT raw = io::measure_from_json(io::read_file(path));
    if (j.contains("index")) {
        require_same_index(raw.index, index, "measure input");
        return raw;
    }
    if (raw.probs.size() != index.n())
        throw IndexMismatch("measure length does not match the law index");
    return MeasureOnT(index, raw.probs);
}

tensor::RationalMeasure load_rational_for(const std::string& path, const IndexSet& index) {
    const json j = json::parse(io::read_file(path), nullptr, false);
    if (j.is_discarded()) throw IOError("invalid JSON: " + path);
    tensor::RationalMeasure raw = io::load_rational(path);
    if (j.contains("index")) {
        require_same_index(raw.index, index, "rational measure input");
        return raw;
    }
    if (raw.counts.size() != index.n())
        throw IndexMismatch("rational measure length does not match the index");
    return tensor::RationalMeasure(index, raw.counts);
}

std::string versions_json() {
    return io::JsonObject{}
        .text("subgauss", kVersion)
        .text("core", kVersion)
        .text("transport", kVersion)
        .text("tensorization", kVersion)
        .text("chaining", kVersion)
        .text("comparison", kVersion)
        .render();
}

io::JsonObject summary_base(const ExperimentConfig& cfg) {
    io::JsonObject obj;
    obj.text("command", cfg.command);
    obj.field("versions", versions_json());
    obj.field("config", cfg.echoJson());
    return obj;
}

void write_summary(const ExperimentConfig& cfg, const io::JsonObject& obj) {
    const auto path =
        std::filesystem::path(cfg.outputPath) / (cfg.command + "_summary.json");
    io::write_file(path.string(), obj.render() + "\n");
}

std::string out_file(const ExperimentConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.outputPath) / name).string();
}

std::string report_json(const CheckReport& report) {
    io::JsonObject obj;
    obj.boolean("pass", report.pass);
    obj.number("worst", report.worst);
    for (const auto& [k, v] : report.metrics) obj.number(k, v);
    return obj.render();
}

// ---------------------------------------------------------------------------
// Command handlers
// ---------------------------------------------------------------------------

int run_fernique(const ExperimentConfig& cfg, const json& params) {
    const DiscreteLaw law = io::load_law(input_path(cfg, "law"));
    const MeasureOnT mu = load_measure_for(input_path(cfg, "measure"), law.index);
    const auto plan = transport::fernique_functional(law, mu);
    auto summary = summary_base(cfg);
    summary.number("value", plan.value);
    summary.field("plan", io::json_matrix(plan.plan));
    summary.field("dual_row", io::json_array(plan.dualRow));
    summary.field("dual_col", io::json_array(plan.dualCol));
    (void)params;
    write_summary(cfg, summary);
    return kExitPass;
}

int run_identity(const ExperimentConfig& cfg, const json& params) {
    const DiscreteLaw law = io::load_law(input_path(cfg, "law"));
    std::vector<double> shifts = param_vec(params, "m", std::vector<double>(law.index.n(), 0.0));
    const CheckReport report = comparison::sup_decomposition_check(law, shifts);
    auto summary = summary_base(cfg);
    summary.field("identity", report_json(report));
    summary.boolean("pass", report.pass);
    write_summary(cfg, summary);
    if (!report.pass)
        std::cerr << "identity: sup-decomposition equality failed, |lhs-rhs| = "
                  << report.worst << "\n";
    return report.pass ? kExitPass : kExitCheckFailed;
}

int run_tensorize(const ExperimentConfig& cfg, const json& params) {
    const std::vector<double> NsD = param_vec(params, "Ns", {1, 2, 4});
    std::vector<std::uint64_t> Ns;
    for (double v : NsD) Ns.push_back(static_cast<std::uint64_t>(v));
    const std::size_t samples = param_count(params, "samples", 100000);
    const std::uint64_t cap = param_count(params, "cap", 100000);

    tensor::StudyTable table;
    if (cfg.inputs.count("law")) {
        const DiscreteLaw law = io::load_law(input_path(cfg, "law"));
        const auto mu = load_rational_for(input_path(cfg, "rational"), law.index);
        table = tensor::convergence_study(law, mu, Ns, samples, cfg.seed, cap);
    } else {
        const GaussianSpec spec = io::load_spec(input_path(cfg, "spec"));
        const auto mu = load_rational_for(input_path(cfg, "rational"), spec.index);
        table = tensor::convergence_study(spec, mu, Ns, samples, cfg.seed, cap,
                                          param_count(params, "ref_grid_points", 41));
    }

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : table.rows)
        rows.push_back({std::to_string(r.N), std::to_string(r.classSize),
                        io::format_double(r.estimate.mean), io::format_double(r.estimate.se),
                        io::format_double(r.estimate.lo), io::format_double(r.estimate.hi),
                        io::format_double(r.exactF), io::format_double(r.gap)});
    io::write_file(out_file(cfg, "tensorize_table.csv"),
                   io::render_csv({"N", "class_size", "estimate", "stderr", "ci_lo", "ci_hi",
                                   "exact_F", "gap"},
                                  rows));
    emit_plotdata(table, out_file(cfg, "tensorize_plot.csv"));

    auto summary = summary_base(cfg);
    summary.number("exact_F", table.exactF);
    summary.boolean("monotone_up_to_noise", table.monotoneUpToNoise);
    summary.number("final_gap", table.rows.empty() ? 0.0 : table.rows.back().gap);
    write_summary(cfg, summary);
    return kExitPass;
}

int run_chaining(const ExperimentConfig& cfg, const json& params) {
    const GaussianSpec spec = io::load_spec(input_path(cfg, "spec"));
    const std::string actionName = param_str(params, "action", "cyclic");
    chaining::GroupAction action;
    if (actionName == "cyclic") action = chaining::GroupAction::cyclicShift(spec.n());
    else if (actionName == "full_symmetric")
        action = chaining::GroupAction::fullSymmetric(spec.n());
    else throw ConfigParse("unknown action '" + actionName + "'");
    const std::string methodName = param_str(params, "method", "exact");
    const auto method = methodName == "greedy" ? chaining::CoverMethod::greedy
                                               : chaining::CoverMethod::exact;
    const std::size_t samples = param_count(params, "samples", 100000);

    chaining::SandwichReport sandwich;
    if (cfg.inputs.count("law")) {
        const DiscreteLaw law = io::load_law(input_path(cfg, "law"));
        sandwich = chaining::fernique_sandwich_check(law, spec, action, samples, cfg.seed,
                                                     method);
    } else {
        sandwich = chaining::fernique_sandwich_check(spec, spec, action, samples, cfg.seed,
                                                     method);
    }

    const MetricOnT metric = natural_metric(spec);
    const auto entropy = chaining::entropy_integral(metric, method);
    const auto profile =
        chaining::covering_profile(metric, entropy.scales, spec.n() <= 20);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < profile.scales.size(); ++i)
        rows.push_back({io::format_double(profile.scales[i]),
                        profile.exact.empty() ? "" : std::to_string(profile.exact[i]),
                        std::to_string(profile.greedy[i])});
    io::write_file(out_file(cfg, "covering_profile.csv"),
                   io::render_csv({"scale", "N_exact", "N_greedy"}, rows));

    auto summary = summary_base(cfg);
    summary.number("sup_process", sandwich.supProcess);
    summary.number("sup_process_se", sandwich.supProcessSe);
    summary.number("sup_gauss", sandwich.supGauss);
    summary.number("sup_gauss_se", sandwich.supGaussSe);
    summary.number("entropy_upper", sandwich.entropyUpper);
    summary.number("entropy_lower", sandwich.entropyLower);
    summary.number("ratio_process", sandwich.ratioProcess);
    summary.number("ratio_gauss", sandwich.ratioGauss);
    summary.boolean("exact_zero", sandwich.exactZero);
    summary.boolean("pass", sandwich.pass);
    write_summary(cfg, summary);
    if (!sandwich.pass)
        std::cerr << "chaining: sandwich ratios left the acceptance band\n";
    return sandwich.pass ? kExitPass : kExitCheckFailed;
}

comparison::MaxAffine witness_from_json(const json& j, std::size_t fallbackId) {
    std::vector<std::vector<double>> slopes;
    for (const auto& row : j.at("slopes")) {
        std::vector<double> s;
        for (const auto& v : row) s.push_back(v.get<double>());
        slopes.push_back(std::move(s));
    }
    std::vector<double> offsets;
    for (const auto& v : j.at("offsets")) offsets.push_back(v.get<double>());
    const std::string id = j.contains("id") ? j.at("id").get<std::string>()
                                            : "explicit" + std::to_string(fallbackId);
    return comparison::MaxAffine(id, std::move(slopes), std::move(offsets));
}

int run_compare(const ExperimentConfig& cfg, const json& params) {
    const DiscreteLaw law = io::load_law(input_path(cfg, "law"));
    std::vector<double> cGrid = param_vec(params, "c_grid",
                                          {0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0});
    comparison::ConvexOrderOptions opts;
    opts.samples = param_count(params, "samples", 200000);
    const std::string methodName = param_str(params, "method", "auto");
    if (methodName == "exact") opts.method = comparison::GaussMethod::exact;
    else if (methodName == "quadrature") opts.method = comparison::GaussMethod::quadrature;
    else if (methodName == "montecarlo") opts.method = comparison::GaussMethod::montecarlo;

    std::vector<comparison::MaxAffine> witnesses;
    if (params.contains("witnesses_file")) {
        // replay a family previously written by this command
        const std::string path = params.at("witnesses_file").get<std::string>();
        const json arr = json::parse(io::read_file(path), nullptr, false);
        if (arr.is_discarded() || !arr.is_array())
            throw IOError("witnesses_file is not a JSON array: " + path);
        std::size_t i = 0;
        for (const auto& w : arr) witnesses.push_back(witness_from_json(w, i++));
    } else if (params.contains("witnesses") && params.at("witnesses").is_array()) {
        std::size_t i = 0;
        for (const auto& w : params.at("witnesses")) witnesses.push_back(witness_from_json(w, i++));
    } else {
        comparison::WitnessFamilySpec family;
        family.seed = cfg.seed;
        if (params.contains("witnesses")) {
            const auto& w = params.at("witnesses");
            family.canonical = param_bool(w, "canonical", true);
            family.randomCount = param_count(w, "random", 20);
        }
        witnesses = comparison::make_witness_family(law, family);
    }

    const auto report = comparison::estimate_constant(law, witnesses, cGrid, cfg.seed, opts,
                                                      param_bool(params, "with_strassen", true));

    std::vector<std::vector<std::string>> rows;
    std::vector<PlotRow> plot;
    for (const auto& r : report.rows) {
        rows.push_back({io::format_double(r.c), io::format_double(r.worstGap),
                        r.worstWitnessId, r.pass ? "true" : "false"});
        plot.push_back({r.c, r.worstGap, r.worstGap, r.worstGap});
    }
    io::write_file(out_file(cfg, "compare_gap.csv"),
                   io::render_csv({"c", "worst_gap", "worst_witness_id", "pass"}, rows));
    emit_plotdata(plot, out_file(cfg, "compare_plot.csv"));

    std::vector<std::string> witnessJson;
    for (const auto& w : witnesses)
        witnessJson.push_back(io::JsonObject{}
                                  .text("id", w.id)
                                  .field("slopes", io::json_matrix(w.slopes))
                                  .field("offsets", io::json_array(w.offsets))
                                  .render());
    io::write_file(out_file(cfg, "compare_witnesses.json"),
                   io::json_array(witnessJson) + "\n");

    auto summary = summary_base(cfg);
    summary.text("family", report.family);
    summary.number("smallest_passing_c", report.smallestPassingC);
    summary.number("strassen_c", report.strassenC);
    const bool anyPass = !std::isnan(report.smallestPassingC);
    summary.boolean("pass", anyPass);
    write_summary(cfg, summary);
    if (!anyPass) std::cerr << "compare: no c in the grid dominates the law\n";
    return anyPass ? kExitPass : kExitCheckFailed;
}

int run_strassen(const ExperimentConfig& cfg, const json& params) {
    const DiscreteLaw law = io::load_law(input_path(cfg, "law"));
    const std::size_t gridPoints = param_count(params, "grid_points", 41);
    const double clip = param_num(params, "clip", 6.0);
    const double tol = param_num(params, "tol", 1e-6);
    const DiscreteLaw grid = transport::discretize_gaussian(
        GaussianSpec::standard(law.index), gridPoints, clip);

    auto summary = summary_base(cfg);
    bool pass = false;
    if (param_bool(params, "bisect", false)) {
        const double cLo = param_num(params, "c_lo", 0.05);
        const double cHi = param_num(params, "c_hi", 8.0);
        const double cMin = transport::strassen_bisect(law, grid, cLo, cHi, tol);
        pass = !std::isnan(cMin);
        summary.boolean("feasible", pass);
        summary.number("gap", pass ? 0.0 : std::numeric_limits<double>::quiet_NaN());
        summary.number("c", cMin);
    } else {
        const double c = param_num(params, "c", 1.0);
        const auto result = transport::strassen_feasibility(law, grid, c, tol);
        pass = result.feasible;
        summary.boolean("feasible", result.feasible);
        summary.number("gap", result.gap);
        summary.number("c", c);
        summary.number("residual_inf", result.residualInf);
    }
    write_summary(cfg, summary);
    if (!pass) std::cerr << "strassen: coupling infeasible at the requested c\n";
    return pass ? kExitPass : kExitCheckFailed;
}

int run_sample(const ExperimentConfig& cfg, const json& params) {
    const std::size_t m = param_count(params, "m", 1000);
    SampleBatch batch;
    if (cfg.inputs.count("spec")) {
        const GaussianSpec spec = io::load_spec(input_path(cfg, "spec"));
        batch = sample_gaussian(spec, m, cfg.seed);
    } else {
        const DiscreteLaw law = io::load_law(input_path(cfg, "law"));
        batch = sample_discrete(law, m, cfg.seed);
    }
    const DiscreteLaw empirical = empirical_law(batch);
    io::write_file(out_file(cfg, "sample_law.json"), io::to_json(empirical) + "\n");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < batch.m(); ++i) {
        std::vector<std::string> row;
        for (std::size_t t = 0; t < batch.index.n(); ++t)
            row.push_back(io::format_double(batch.rows(i, t)));
        rows.push_back(std::move(row));
    }
    io::write_file(out_file(cfg, "sample_batch.csv"),
                   io::render_csv(batch.index.labels, rows));
    auto summary = summary_base(cfg);
    summary.integer("rows", static_cast<long long>(batch.m()));
    summary.integer("distinct_atoms", static_cast<long long>(empirical.size()));
    write_summary(cfg, summary);
    return kExitPass;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::fromJsonText(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigParse("config is not valid JSON");
    ExperimentConfig cfg;
    if (!j.contains("command") || !j.at("command").is_string())
        throw ConfigParse("config needs a 'command' string");
    cfg.command = j.at("command").get<std::string>();
    if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end())
        throw ConfigParse("unknown command '" + cfg.command + "'");
    if (!j.contains("seed"))
        throw ConfigParse("config needs an explicit 'seed' (no wall-clock default)");
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.seedPresent = true;
    if (j.contains("inputs"))
        for (const auto& [k, v] : j.at("inputs").items())
            cfg.inputs[k] = v.get<std::string>();
    if (j.contains("parameters")) cfg.parametersJson = j.at("parameters").dump();
    if (j.contains("output")) cfg.outputPath = j.at("output").get<std::string>();
    else if (j.contains("outputPath")) cfg.outputPath = j.at("outputPath").get<std::string>();
    if (cfg.outputPath.empty()) throw ConfigParse("config needs an 'output' path");
    return cfg;
}

ExperimentConfig ExperimentConfig::fromFile(const std::string& path) {
    ExperimentConfig cfg = fromJsonText(io::read_file(path));
    // input paths resolve relative to the config file, so bundled configs
    // work from any working directory
    const auto dir = std::filesystem::path(path).parent_path();
    for (auto& [role, p] : cfg.inputs) {
        std::filesystem::path fp(p);
        if (fp.is_relative()) p = (dir / fp).string();
    }
    return cfg;
}

void ExperimentConfig::applyOverride(const std::string& keyEqualsValue) {
    const auto pos = keyEqualsValue.find('=');
    if (pos == std::string::npos)
        throw ConfigParse("--set expects key=value, got '" + keyEqualsValue + "'");
    const std::string key = keyEqualsValue.substr(0, pos);
    const std::string value = keyEqualsValue.substr(pos + 1);
    if (key == "seed") {
        seed = std::stoull(value);
        seedPresent = true;
        return;
    }
    if (key == "output" || key == "outputPath") {
        outputPath = value;
        return;
    }
    if (key == "command") {
        command = value;
        return;
    }
    json params = parse_params(parametersJson);
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;  // treat as a bare string
    params[key] = parsed;
    parametersJson = params.dump();
}

std::string ExperimentConfig::echoJson() const {
    json j;
    j["command"] = command;
    json in = json::object();
    for (const auto& [k, v] : inputs) in[k] = v;
    j["inputs"] = in;
    j["parameters"] = parse_params(parametersJson);
    j["seed"] = seed;
    j["output"] = outputPath;
    return j.dump();
}

int run_experiment(const ExperimentConfig& cfg) {
    if (!cfg.seedPresent) throw ConfigParse("seed missing");
    const json params = parse_params(cfg.parametersJson);
    if (cfg.command == "fernique") return run_fernique(cfg, params);
    if (cfg.command == "identity") return run_identity(cfg, params);
    if (cfg.command == "tensorize") return run_tensorize(cfg, params);
    if (cfg.command == "chaining") return run_chaining(cfg, params);
    if (cfg.command == "compare") return run_compare(cfg, params);
    if (cfg.command == "strassen") return run_strassen(cfg, params);
    if (cfg.command == "sample") return run_sample(cfg, params);
    throw ConfigParse("unknown command '" + cfg.command + "'");
}

void emit_plotdata(const std::vector<PlotRow>& rows, const std::string& outputPath) {
    if (rows.empty()) throw IOError("emit_plotdata: empty table");
    std::vector<std::vector<std::string>> rendered;
    for (const auto& r : rows)
        rendered.push_back({io::format_double(r.x), io::format_double(r.y),
                            io::format_double(r.lo), io::format_double(r.hi)});
    io::write_file(outputPath, io::render_csv({"x", "y", "y_lo", "y_hi"}, rendered));
}

void emit_plotdata(const tensor::StudyTable& table, const std::string& outputPath) {
    std::vector<PlotRow> rows;
    for (const auto& r : table.rows)
        rows.push_back({static_cast<double>(r.N), r.estimate.mean, r.estimate.lo,
                        r.estimate.hi});
    emit_plotdata(rows, outputPath);
}

}  // namespace subgauss::cli
