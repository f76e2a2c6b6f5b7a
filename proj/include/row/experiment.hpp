#pragma once

#include "row/config.hpp"
#include "row/metrics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace row {

// One results row: the state of the run for one seed after training task t.
struct ReportRow {
    std::uint64_t seed = 0;
    int task = 0;  // 1-based in reports and CSV
    double aca = 0.0;
    double forgetting_sum = 0.0;   // 0 for the first task (no earlier tasks)
    double forgetting_mean = 0.0;
    std::vector<double> accuracies;  // A_i^t for i <= t; one per seen task
};

struct RunReport {
    int tasks = 0;
    std::vector<ReportRow> rows;   // seeds x tasks, grouped by seed in input order
    double final_aca_mean = 0.0;   // across seeds, after the last task
    double final_aca_std = 0.0;    // population standard deviation
    double til_mean = 0.0;         // mean task-given accuracy after the last task
};

// Runs the configured experiment for every seed and writes the results CSV
// to config.out. Deterministic: the same config yields byte-identical CSV.
RunReport run_experiment(const ExperimentConfig& config);

// CSV serialization used by run_experiment (exposed for tests): header
// seed,task,aca,forgetting_sum,forgetting_mean,acc_1..acc_T with blank
// cells for tasks not yet seen.
std::string report_to_csv(const RunReport& report);

} // namespace row
