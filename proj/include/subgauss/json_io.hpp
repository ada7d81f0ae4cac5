#pragma once

#include <string>
#include <vector>

#include "subgauss/core.hpp"
#include "subgauss/tensorize.hpp"

namespace subgauss::io {

// IEEE-754 doubles printed with 17 significant digits (exact round trips).
std::string format_double(double v);
std::string json_string(const std::string& s);
std::string json_array(const std::vector<std::string>& rendered);
std::string json_array(const std::vector<double>& values);
std::string json_matrix(const Matrix& m);                              // row-major
std::string json_matrix(const std::vector<std::vector<double>>& rows);

// Ordered key/value JSON object; keys render in insertion order so output
// bytes are reproducible.
class JsonObject {
public:
    JsonObject& field(const std::string& key, const std::string& renderedValue);
    JsonObject& number(const std::string& key, double v);
    JsonObject& integer(const std::string& key, long long v);
    JsonObject& boolean(const std::string& key, bool v);
    JsonObject& text(const std::string& key, const std::string& v);
    std::string render() const;

private:
    std::vector<std::pair<std::string, std::string>> fields_;
};

// Schemas:
//   DiscreteLaw  {"index": [labels], "atoms": [[...]], "weights": [...]}
//   GaussianSpec {"mean": [...], "cov": [[...]]}           (optional "index")
//   MeasureOnT   {"probs": [...]}                          (optional "index")
//   RationalMeasure {"counts": [...], "K": k}              (optional "index")
std::string to_json(const DiscreteLaw& law);
std::string to_json(const GaussianSpec& spec);
std::string to_json(const MeasureOnT& mu);
std::string to_json(const tensor::RationalMeasure& mu);

DiscreteLaw law_from_json(const std::string& text);
GaussianSpec spec_from_json(const std::string& text);
MeasureOnT measure_from_json(const std::string& text);
tensor::RationalMeasure rational_from_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

DiscreteLaw load_law(const std::string& path);
GaussianSpec load_spec(const std::string& path);
MeasureOnT load_measure(const std::string& path);
tensor::RationalMeasure load_rational(const std::string& path);

// RFC-4180-style CSV with a mandatory header row; cells rendered by the
// caller (use format_double for numerics).
std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows);

}  // namespace subgauss::io
