#include "row/replay.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace row {

namespace {

// Keeps a seeded random subset of `keep` elements, preserving the relative
// order of the survivors.
std::vector<Sample> random_subset(const std::vector<Sample>& items, std::size_t keep, Rng& rng) {
    if (items.size() <= keep) return items;
    std::vector<std::size_t> idx(items.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(idx);
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    std::vector<Sample> out;
    out.reserve(keep);
    for (std::size_t i : idx) out.push_back(items[i]);
    return out;
}

} // namespace

ReplayBuffer::ReplayBuffer(std::size_t budget) : budget_(budget) {
    if (budget == 0) throw std::invalid_argument("ReplayBuffer: budget must be positive");
}

std::size_t ReplayBuffer::size() const {
    std::size_t n = 0;
    for (const auto& [label, samples] : store_) n += samples.size();
    return n;
}

void ReplayBuffer::rebalance_and_insert(const std::vector<Sample>& task_data, int task_id,
                                        Rng& rng) {
    if (task_data.empty())
        throw std::invalid_argument("rebalance_and_insert: task data is empty");

    std::map<int, std::vector<Sample>> incoming;
    for (const Sample& s : task_data) {
        if (store_.count(s.label))
            throw std::invalid_argument("rebalance_and_insert: class " + std::to_string(s.label) +
                                        " already stored (task classes must be disjoint)");
        Sample copy = s;
        copy.task = task_id;
        incoming[copy.label].push_back(std::move(copy));
    }

    const std::size_t num_classes = store_.size() + incoming.size();
    if (budget_ < num_classes)
        throw std::invalid_argument("rebalance_and_insert: budget " + std::to_string(budget_) +
                                    " leaves a zero quota for " + std::to_string(num_classes) +
                                    " classes");

    const std::size_t base = budget_ / num_classes;
    std::size_t remainder = budget_ % num_classes;

    // Collect all class labels ascending; the remainder goes to the lowest.
    std::vector<int> labels;
    labels.reserve(num_classes);
    for (const auto& [label, samples] : store_) labels.push_back(label);
    for (const auto& [label, samples] : incoming) labels.push_back(label);
    std::sort(labels.begin(), labels.end());

    for (int label : labels) {
        const std::size_t quota = base + (remainder > 0 ? 1 : 0);
        if (remainder > 0) --remainder;
        auto it = incoming.find(label);
        const std::vector<Sample>& source = it != incoming.end() ? it->second : store_[label];
        store_[label] = random_subset(source, quota, rng);
    }
}

std::vector<Sample> ReplayBuffer::upsample_to(std::size_t n, Rng& rng) const {
    if (empty()) throw std::runtime_error("upsample_to: replay memory is empty");
    std::vector<const Sample*> flat;
    flat.reserve(size());
    for (const auto& [label, samples] : store_)
        for (const Sample& s : samples) flat.push_back(&s);

    std::vector<Sample> out;
    out.reserve(n);
    std::vector<std::size_t> idx(flat.size());
    while (out.size() < n) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        rng.shuffle(idx);
        for (std::size_t i : idx) {
            if (out.size() == n) break;
            out.push_back(*flat[i]);
        }
    }
    return out;
}

std::pair<std::vector<Sample>, std::vector<Sample>> ReplayBuffer::pseudo_split(int task_id) const {
    std::pair<std::vector<Sample>, std::vector<Sample>> split;
    for (const auto& [label, samples] : store_)
        for (const Sample& s : samples) (s.task == task_id ? split.first : split.second).push_back(s);
    if (split.first.empty())
        throw std::invalid_argument("pseudo_split: no stored samples for task " +
                                    std::to_string(task_id));
    return split;
}

} // namespace row
