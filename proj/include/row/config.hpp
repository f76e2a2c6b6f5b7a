#pragma once

#include "row/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace row {

enum class RunMode { row, row_no_wp, row_no_wp_no_md, hat_only };

std::string to_string(RunMode mode);

// Plain-text `key = value` experiment configuration with `#` comments.
// Missing keys take the documented defaults; unknown keys are rejected.
struct ExperimentConfig {
    // Data source: "synthetic" (default) or "csv".
    std::string dataset = "synthetic";
    std::string csv_path;

    // Synthetic generator parameters.
    int classes = 8;
    int dim = 16;
    int samples_per_class = 200;
    double spread = 0.1;
    std::uint64_t data_seed = 7;

    // Task protocol.
    int tasks = 4;
    std::size_t budget = 200;
    std::vector<int> hidden = {64, 32};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    RunMode mode = RunMode::row;
    std::string out = "results.csv";

    TrainHyper hyper;  // lr 0.005 / momentum 0.9 / batch 64 / s_max 400 defaults
};

// Parses configuration text. Throws std::invalid_argument naming the
// offending key on unknown keys or malformed values.
ExperimentConfig parse_config(const std::string& text);

// Reads and parses a configuration file.
ExperimentConfig load_config(const std::string& path);

// Rejects every invariant breach (non-positive rates/epochs/batches, empty
// seeds, budget below the class count, ...) before any data is touched.
void validate_config(const ExperimentConfig& config);

} // namespace row
