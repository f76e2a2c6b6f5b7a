#pragma once

#include <vector>

namespace row {

// Lower-triangular record of per-task accuracies: entry (i, t) is the
// accuracy on task i's test split after training task t, for i <= t.
// Indices are 0-based.
class AccuracyLedger {
public:
    explicit AccuracyLedger(int num_tasks);

    void record(int task_i, int after_t, double accuracy);
    double at(int task_i, int after_t) const;  // throws std::logic_error if missing
    bool has(int task_i, int after_t) const;
    int num_tasks() const { return num_tasks_; }

private:
    int num_tasks_;
    std::vector<double> entries_;  // NaN marks a missing entry
};

// Mean of A_i^t over i <= t. Requires row t complete.
double aca(const AccuracyLedger& ledger, int t);

// Sum over i < t of (A_i^i - A_i^t); requires t >= 1 (at least two tasks).
double forgetting_sum(const AccuracyLedger& ledger, int t);

// The same averaged over the t earlier tasks.
double forgetting_mean(const AccuracyLedger& ledger, int t);

// Multiplier max_k sum_{t=1..k} pi_[t:T] / pi_[1:k] on the sequential bound.
// Weights must be positive and sum to 1. Partial sums are accumulated in
// extended precision so the uniform case lands exactly on T.
double bound_multiplier_seq(const std::vector<double>& pi);

// Multiplier max_k k * pi_[1:T] / pi_[1:k] on the replay bound.
double bound_multiplier_replay(const std::vector<double>& pi);

} // namespace row
