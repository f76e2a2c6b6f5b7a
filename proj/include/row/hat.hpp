#pragma once

#include "row/network.hpp"

#include <stdexcept>
#include <vector>

namespace row {

// Thrown when every unit of some layer is already reserved by previous
// tasks; training another task cannot allocate capacity.
struct CapacityExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Trainable per-unit mask embeddings for one task (one vector per layer).
struct TaskMask {
    std::vector<std::vector<double>> emb;
};

// Element-wise maximum of the binarized masks of all tasks trained so far.
// Values are exactly 0.0 or 1.0.
struct AccumulatedMask {
    std::vector<std::vector<double>> a;
};

// Embeddings initialized uniformly in [-1, 1], one per unit.
TaskMask make_task_mask(const Network& net, Rng& rng);

// All-zeros accumulated mask (nothing reserved yet).
AccumulatedMask make_accumulated(const Network& net);

// Soft gates a = sigmoid(s * e) for the current scale s.
GateSet soft_gates(const TaskMask& mask, double s);

// Hard 0/1 gates: 1 where sigmoid(s_max * e) >= 0.5, else 0.
GateSet binarize(const TaskMask& mask, double s_max);

// Scale annealing across the batches of one epoch:
// s = 1/s_max + (s_max - 1/s_max) * batch_index / (batches_per_epoch - 1),
// clamped to [1/s_max, s_max]. A single-batch epoch uses s_max.
double anneal_scale(double s_max, int batch_index, int batches_per_epoch);

// In-place gradient gating against the accumulated mask. For weight (r, c)
// of layer l the gradient is scaled by 1 - min(a_l[c], a_{l-1}[r]); the
// first layer and all biases use the output-side factor 1 - a_l[c] alone.
// With binary accumulated masks this zeroes gradients of reserved weights
// exactly, which is what the no-forgetting guarantee rests on.
void gate_gradients(const Network& net, const AccumulatedMask& acc, NetGrads& grads);

// Capacity regularizer: sum of a * (1 - acc) over units divided by the sum
// of (1 - acc), where a = sigmoid(s * e). Returns the loss and its gradient
// w.r.t. the embeddings. Throws CapacityExhausted when the denominator is 0.
struct MaskRegResult {
    double loss = 0.0;
    std::vector<std::vector<double>> demb;
};

MaskRegResult mask_regularizer(const TaskMask& mask, const AccumulatedMask& acc, double s);

// Folds the binarized mask of a finished task into the accumulated mask
// (element-wise max, hence monotone non-decreasing).
void finalize_task_mask(const TaskMask& mask, double s_max, AccumulatedMask& acc);

// Embedding gradients are clamped to this magnitude before the SGD step to
// compensate for the sigmoid saturation under large scales.
inline constexpr double kEmbGradClamp = 10.0;

} // namespace row
