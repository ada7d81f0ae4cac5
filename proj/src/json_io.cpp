#include "subgauss/json_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace subgauss::io {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
    return out;
}

std::string json_array(const std::vector<std::string>& rendered) {
    std::string out = "[";
    for (std::size_t i = 0; i < rendered.size(); ++i) {
        if (i) out += ",";
        out += rendered[i];
    }
    out += "]";
    return out;
}

std::string json_array(const std::vector<double>& values) {
    std::vector<std::string> rendered;
    rendered.reserve(values.size());
    for (double v : values) rendered.push_back(format_double(v));
    return json_array(rendered);
}

std::string json_matrix(const Matrix& m) {
    std::vector<std::string> rows;
    rows.reserve(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::vector<double> row(m.cols());
        for (std::size_t j = 0; j < m.cols(); ++j) row[j] = m(i, j);
        rows.push_back(json_array(row));
    }
    return json_array(rows);
}

std::string json_matrix(const std::vector<std::vector<double>>& rows) {
    std::vector<std::string> rendered;
    rendered.reserve(rows.size());
    for (const auto& row : rows) rendered.push_back(json_array(row));
    return json_array(rendered);
}

JsonObject& JsonObject::field(const std::string& key, const std::string& renderedValue) {
    fields_.emplace_back(key, renderedValue);
    return *this;
}
JsonObject& JsonObject::number(const std::string& key, double v) {
    return field(key, format_double(v));
}
JsonObject& JsonObject::integer(const std::string& key, long long v) {
    return field(key, std::to_string(v));
}
JsonObject& JsonObject::boolean(const std::string& key, bool v) {
    return field(key, v ? "true" : "false");
}
JsonObject& JsonObject::text(const std::string& key, const std::string& v) {
    return field(key, json_string(v));
}
std::string JsonObject::render() const {
    std::string out = "{";
    for (std::size_t i = 0; i < fields_.size(); ++i) {
        if (i) out += ",";
        out += json_string(fields_[i].first);
        out += ":";
        out += fields_[i].second;
    }
    out += "}";
    return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string labels_json(const IndexSet& index) {
    std::vector<std::string> rendered;
    rendered.reserve(index.n());
    for (const auto& l : index.labels) rendered.push_back(json_string(l));
    return json_array(rendered);
}

}  // namespace

std::string to_json(const DiscreteLaw& law) {
    return JsonObject{}
        .field("index", labels_json(law.index))
        .field("atoms", json_matrix(law.atoms))
        .field("weights", json_array(law.weights))
        .render();
}

std::string to_json(const GaussianSpec& spec) {
    return JsonObject{}
        .field("mean", json_array(spec.mean))
        .field("cov", json_matrix(spec.covariance))
        .render();
}

std::string to_json(const MeasureOnT& mu) {
    return JsonObject{}.field("probs", json_array(mu.probs)).render();
}

std::string to_json(const tensor::RationalMeasure& mu) {
    std::vector<std::string> counts;
    counts.reserve(mu.counts.size());
    for (auto c : mu.counts) counts.push_back(std::to_string(c));
    return JsonObject{}
        .field("counts", json_array(counts))
        .field("K", std::to_string(mu.K))
        .render();
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw IOError(std::string("invalid JSON for ") + what);
    return j;
}

IndexSet index_or_numbered(const json& j, std::size_t n) {
    if (j.contains("index")) {
        std::vector<std::string> labels;
        for (const auto& l : j.at("index")) labels.push_back(l.get<std::string>());
        return IndexSet(std::move(labels));
    }
    return IndexSet::numbered(n);
}

std::vector<double> doubles(const json& j) {
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

}  // namespace

DiscreteLaw law_from_json(const std::string& text) {
    const json j = parse(text, "DiscreteLaw");
    std::vector<std::vector<double>> atoms;
    for (const auto& row : j.at("atoms")) atoms.push_back(doubles(row));
    std::vector<double> weights = doubles(j.at("weights"));
    const std::size_t n = atoms.empty() ? 0 : atoms[0].size();
    return DiscreteLaw(index_or_numbered(j, n), std::move(atoms), std::move(weights));
}

GaussianSpec spec_from_json(const std::string& text) {
    const json j = parse(text, "GaussianSpec");
    std::vector<double> mean = doubles(j.at("mean"));
    const auto& covJ = j.at("cov");
    Matrix cov(covJ.size(), covJ.empty() ? 0 : covJ[0].size());
    for (std::size_t i = 0; i < covJ.size(); ++i) {
        const auto row = doubles(covJ[i]);
        if (row.size() != cov.cols()) throw IOError("GaussianSpec: ragged covariance");
        for (std::size_t k = 0; k < row.size(); ++k) cov(i, k) = row[k];
    }
    IndexSet index = index_or_numbered(j, mean.size());
    return GaussianSpec(std::move(index), std::move(mean), std::move(cov));
}

MeasureOnT measure_from_json(const std::string& text) {
    const json j = parse(text, "MeasureOnT");
    std::vector<double> probs = doubles(j.at("probs"));
    IndexSet index = index_or_numbered(j, probs.size());
    return MeasureOnT(std::move(index), std::move(probs));
}

tensor::RationalMeasure rational_from_json(const std::string& text) {
    const json j = parse(text, "RationalMeasure");
    std::vector<std::uint64_t> counts;
    for (const auto& v : j.at("counts")) counts.push_back(v.get<std::uint64_t>());
    IndexSet index = index_or_numbered(j, counts.size());
    tensor::RationalMeasure mu(std::move(index), std::move(counts));
    if (j.contains("K") && j.at("K").get<std::uint64_t>() != mu.K)
        throw IOError("RationalMeasure: K does not match the count sum");
    return mu;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError("cannot write " + path);
    out << content;
    if (!out) throw IOError("write failed for " + path);
}

DiscreteLaw load_law(const std::string& path) { return law_from_json(read_file(path)); }
GaussianSpec load_spec(const std::string& path) { return spec_from_json(read_file(path)); }
MeasureOnT load_measure(const std::string& path) {
    return measure_from_json(read_file(path));
}
tensor::RationalMeasure load_rational(const std::string& path) {
    return rational_from_json(read_file(path));
}

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
    if (header.empty()) throw IOError("render_csv: header row is mandatory");
    auto cell = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (char c : s) {
            if (c == '"') quoted += "\"\"";
            else quoted += c;
        }
        quoted += "\"";
        return quoted;
    };
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ",";
        out += cell(header[i]);
    }
    out += "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw IOError("render_csv: ragged row");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += cell(row[i]);
        }
        out += "\n";
    }
    return out;
}

}  // namespace subgauss::io
