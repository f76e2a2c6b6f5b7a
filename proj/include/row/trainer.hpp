#pragma once

#include "row/dataset.hpp"
#include "row/hat.hpp"
#include "row/network.hpp"
#include "row/replay.hpp"
#include "row/scoring.hpp"

#include <cstdint>
#include <vector>

namespace row {

// Per-task classifier heads on top of the shared extractor. The OOD head
// has one extra logit (the last index) for the reject class; the WP head
// covers only the task's own classes. Heads are task-private and never
// mask-gated.
struct TaskHeads {
    LinearHead ood;  // feature_dim -> |Y_k| + 1
    LinearHead wp;   // feature_dim -> |Y_k|
};

// Frozen bookkeeping for a finished task: its class list (position = local
// label) and its stored binarized mask, which is the only mask ever used
// for that task at evaluation time.
struct TrainedTask {
    std::vector<int> classes;
    GateSet mask;

    int local_of(int global_label) const;
};

struct TaskModel {
    Network net;
    AccumulatedMask acc;
    std::vector<TrainedTask> tasks;
    std::vector<TaskHeads> heads;
    std::vector<TaskStats> stats;  // one per task in row mode; empty for the mask-only baseline
    ReplayBuffer buffer;

    int num_tasks() const { return static_cast<int>(tasks.size()); }
};

struct TrainHyper {
    double lr1 = 0.005;  // step 1: extractor + OOD head + mask embeddings
    double lr2 = 0.005;  // step 2: WP head
    double lr3 = 0.005;  // step 3: OOD head re-tuning
    int epochs1 = 40;
    int epochs2 = 5;
    int epochs3 = 10;
    int batch1 = 64;
    int batch2 = 32;
    int batch3 = 32;
    double momentum = 0.9;
    double s_max = 400.0;
    double stats_eps = 1e-6;
    double md_delta = 1e-6;
    // The mask-only baseline trains step 1 on in-distribution data alone and
    // skips the replay buffer, steps 2-3, and the distance statistics.
    bool use_ood_loss = true;
    bool run_steps_2_3 = true;
};

TaskModel make_task_model(int input_dim, const std::vector<int>& hidden, std::size_t budget,
                          std::uint64_t seed);

// Step 1: joint training of the gated extractor, the new task's OOD head,
// and its mask embeddings on D_k plus the replay buffer upsampled to |D_k|
// (labelled as the reject class), under the capacity regularizer, with
// gradients gated against the accumulated mask. Finalizes the task mask.
// Returns per-epoch mean losses.
std::vector<double> train_step1(TaskModel& model, const Task& task, const TrainHyper& hyper,
                                Rng& rng);

// Step 2: WP head fine-tuning on D_k with the extractor frozen under the
// task's binarized mask. Returns per-epoch mean losses.
std::vector<double> train_step2(TaskModel& model, const Task& task, const TrainHyper& hyper,
                                Rng& rng);

// Step 3: for every trained task k' (ascending), re-tunes its OOD head on
// the buffer pseudo-split (task-k' samples as in-distribution, the rest as
// reject), extractor frozen. Returns per-epoch losses averaged over tasks.
std::vector<double> train_step3(TaskModel& model, const TrainHyper& hyper, Rng& rng);

// Fits the distance statistics of the newest task from its training
// features under the finalized mask.
void fit_stats_for_task(TaskModel& model, const Task& task, const TrainHyper& hyper);

// Full per-task pipeline: step1 -> step2 -> buffer insert -> step3 -> stats.
// All randomness derives from `seed`.
void train_task(TaskModel& model, const Task& task, const TrainHyper& hyper, std::uint64_t seed);

} // namespace row
