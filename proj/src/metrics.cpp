#include "row/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace row {

namespace {

void check_index(int task_i, int after_t, int num_tasks) {
    if (after_t < 0 || after_t >= num_tasks || task_i < 0 || task_i > after_t)
        throw std::invalid_argument("AccuracyLedger: index (" + std::to_string(task_i) + ", " +
                                    std::to_string(after_t) + ") outside the lower triangle of " +
                                    std::to_string(num_tasks) + " tasks");
}

std::vector<long double> prefix_sums(const std::vector<double>& pi) {
    if (pi.empty()) throw std::invalid_argument("bound multiplier: empty weight vector");
    for (double p : pi)
        if (!(p > 0.0))
            throw std::invalid_argument("bound multiplier: weights must be positive");
    double total = 0.0;
    for (double p : pi) total += p;
    if (std::fabs(total - 1.0) > 1e-9)
        throw std::invalid_argument("bound multiplier: weights sum to " + std::to_string(total) +
                                    ", expected 1");
    std::vector<long double> prefix(pi.size() + 1, 0.0L);
    for (std::size_t i = 0; i < pi.size(); ++i)
        prefix[i + 1] = prefix[i] + static_cast<long double>(pi[i]);
    return prefix;
}

} // namespace

AccuracyLedger::AccuracyLedger(int num_tasks) : num_tasks_(num_tasks) {
    if (num_tasks <= 0) throw std::invalid_argument("AccuracyLedger: need at least one task");
    entries_.assign(static_cast<std::size_t>(num_tasks) * num_tasks,
                    std::numeric_limits<double>::quiet_NaN());
}

void AccuracyLedger::record(int task_i, int after_t, double accuracy) {
    check_index(task_i, after_t, num_tasks_);
    if (!(accuracy >= 0.0 && accuracy <= 1.0))
        throw std::invalid_argument("AccuracyLedger: accuracy " + std::to_string(accuracy) +
                                    " outside [0,1]");
    entries_[static_cast<std::size_t>(after_t) * num_tasks_ + task_i] = accuracy;
}

bool AccuracyLedger::has(int task_i, int after_t) const {
    check_index(task_i, after_t, num_tasks_);
    return !std::isnan(entries_[static_cast<std::size_t>(after_t) * num_tasks_ + task_i]);
}

double AccuracyLedger::at(int task_i, int after_t) const {
    check_index(task_i, after_t, num_tasks_);
    const double v = entries_[static_cast<std::size_t>(after_t) * num_tasks_ + task_i];
    if (std::isnan(v))
        throw std::logic_error("AccuracyLedger: entry (" + std::to_string(task_i) + ", " +
                               std::to_string(after_t) + ") was never recorded");
    return v;
}

double aca(const AccuracyLedger& ledger, int t) {
    double sum = 0.0;
    for (int i = 0; i <= t; ++i) sum += ledger.at(i, t);
    return sum / static_cast<double>(t + 1);
}

double forgetting_sum(const AccuracyLedger& ledger, int t) {
    if (t < 1)
        throw std::invalid_argument("forgetting: needs at least two tasks, got t = " +
                                    std::to_string(t));
    double sum = 0.0;
    for (int i = 0; i < t; ++i) sum += ledger.at(i, i) - ledger.at(i, t);
    return sum;
}

double forgetting_mean(const AccuracyLedger& ledger, int t) {
    return forgetting_sum(ledger, t) / static_cast<double>(t);
}

double bound_multiplier_seq(const std::vector<double>& pi) {
    const std::vector<long double> prefix = prefix_sums(pi);
    const std::size_t T = pi.size();
    long double best = 0.0L;
    for (std::size_t k = 1; k <= T; ++k) {
        long double num = 0.0L;
        for (std::size_t t = 1; t <= k; ++t) num += prefix[T] - prefix[t - 1];
        const long double v = num / prefix[k];
        if (v > best) best = v;
    }
    return static_cast<double>(best);
}

double bound_multiplier_replay(const std::vector<double>& pi) {
    const std::vector<long double> prefix = prefix_sums(pi);
    const std::size_t T = pi.size();
    long double best = 0.0L;
    for (std::size_t k = 1; k <= T; ++k) {
        const long double v = static_cast<long double>(k) * prefix[T] / prefix[k];
        if (v > best) best = v;
    }
    return static_cast<double>(best);
}

} // namespace row
