#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "subgauss/common.hpp"
#include "subgauss/tensorize.hpp"

namespace subgauss::cli {

struct ConfigParse : Error { using Error::Error; };
struct InputMissing : Error { using Error::Error; };

// exit statuses of run()
inline constexpr int kExitPass = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitCheckFailed = 2;

struct ExperimentConfig {
    std::string command;                         // fernique | tensorize | chaining |
                                                 // compare | strassen | identity | sample
    std::map<std::string, std::string> inputs;   // role -> path
    std::string parametersJson = "{}";           // command-specific map
    std::uint64_t seed = 0;
    bool seedPresent = false;                    // no wall-clock default, ever
    std::string outputPath;

    static ExperimentConfig fromJsonText(const std::string& text);
    static ExperimentConfig fromFile(const std::string& path);

    // "seed" / "output" / "command" address the top level, anything else
    // lands in parameters; values parse as JSON scalars/arrays when possible.
    void applyOverride(const std::string& keyEqualsValue);

    std::string echoJson() const;  // resolved config, deterministic bytes
};

// Executes the configured pipeline, writes <command>_summary.json and any
// CSV tables under outputPath, returns the exit status. Outputs are
// byte-identical for identical (config, seed).
int run_experiment(const ExperimentConfig& config);

struct PlotRow {
    double x = 0.0, y = 0.0, lo = 0.0, hi = 0.0;
};

// Plain (x, y, y_lo, y_hi) CSV for external plotting; IOError on empty input.
void emit_plotdata(const std::vector<PlotRow>& rows, const std::string& outputPath);
void emit_plotdata(const tensor::StudyTable& table, const std::string& outputPath);

}  // namespace subgauss::cli
