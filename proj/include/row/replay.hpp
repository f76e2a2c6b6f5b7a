#pragma once

#include "row/dataset.hpp"
#include "row/rng.hpp"

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

namespace row {

// Class-balanced replay memory under a fixed global budget. Samples keep
// their raw inputs so they can be pushed through any later task's masked
// extractor, plus their global label and owning task id.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t budget);

    std::size_t budget() const { return budget_; }
    std::size_t size() const;
    bool empty() const { return size() == 0; }
    const std::map<int, std::vector<Sample>>& store() const { return store_; }

    // Admits one new task's training data. Per-class quota is
    // floor(budget / classes seen) with the remainder going to the
    // numerically smallest class labels; existing classes are truncated to
    // quota by keeping a seeded random subset, new classes are sampled
    // without replacement up to quota. The task's classes must be disjoint
    // from everything already stored.
    void rebalance_and_insert(const std::vector<Sample>& task_data, int task_id, Rng& rng);

    // Exactly n samples: whole shuffled passes over the buffer concatenated
    // and truncated, so any n <= size is a without-replacement draw and
    // n == size is a permutation. Throws std::runtime_error when empty.
    std::vector<Sample> upsample_to(std::size_t n, Rng& rng) const;

    // Splits the buffer into (samples of task k', everything else).
    // Throws std::invalid_argument when the task has no stored samples.
    std::pair<std::vector<Sample>, std::vector<Sample>> pseudo_split(int task_id) const;

private:
    std::size_t budget_;
    std::map<int, std::vector<Sample>> store_;  // class label -> samples
};

} // namespace row
