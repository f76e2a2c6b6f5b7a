#pragma once

#include "row/matrix.hpp"
#include "row/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace row {

struct Sample {
    std::vector<double> x;
    int label = -1;  // global class label
    int task = -1;   // owning task index once assigned, else -1
};

struct Dataset {
    int num_classes = 0;
    int feature_dim = 0;
    std::vector<Sample> train;
    std::vector<Sample> test;
};

// Synthetic benchmark: one Gaussian cluster per class. Class means are
// mutually orthogonal unit vectors when num_classes <= dim (random
// orthonormal frame), otherwise random unit vectors; samples add isotropic
// noise with the given spread. Each class contributes n_per_class samples,
// split 80/20 into train/test.
Dataset gen_gaussian_clusters(int num_classes, int dim, int n_per_class, double spread,
                              std::uint64_t seed);

// CSV with header "label,f0,f1,...". Throws std::runtime_error naming the
// offending line on malformed input.
Dataset load_csv(const std::string& path);

// Writes train followed by test rows; feature text round-trips exactly.
void write_csv(const Dataset& ds, const std::string& path);

struct Task {
    int id = -1;                // position in the sequence, 0-based
    std::vector<int> classes;   // global labels; position defines the local index
    std::vector<Sample> train;  // samples carry global labels and task == id
    std::vector<Sample> test;

    // Local index of a global label, or -1 if the label is not in the task.
    int local_of(int global_label) const;
};

struct TaskSequence {
    int feature_dim = 0;
    std::vector<Task> tasks;
};

// Partitions the classes into num_tasks equal-sized contiguous chunks of
// class_order. Requires num_classes % num_tasks == 0 and class_order to be
// a permutation of 0..num_classes-1.
TaskSequence split_tasks(const Dataset& ds, int num_tasks, const std::vector<int>& class_order);

// Same with a seeded random class order.
TaskSequence split_tasks(const Dataset& ds, int num_tasks, std::uint64_t order_seed);

// Stacks samples into a batch matrix (one row per sample).
Matrix to_matrix(const std::vector<Sample>& samples, int feature_dim);
Matrix to_matrix(const std::vector<const Sample*>& samples, int feature_dim);

} // namespace row
