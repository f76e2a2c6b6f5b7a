#pragma once

#include "row/matrix.hpp"
#include "row/rng.hpp"

#include <vector>

namespace row {

// Per-layer unit gates (values in [0, 1]); gates[l] has one entry per unit
// of layer l and multiplies the post-ReLU activations of that layer.
using GateSet = std::vector<std::vector<double>>;

struct Layer {
    Matrix w;               // [in x out]
    std::vector<double> b;  // [out]
};

// Shared MLP feature extractor: every layer is linear -> ReLU -> gate.
// The output of the last layer is the feature vector.
struct Network {
    std::vector<Layer> layers;

    int input_dim() const { return layers.empty() ? 0 : layers.front().w.rows; }
    int feature_dim() const { return layers.empty() ? 0 : layers.back().w.cols; }
    int num_layers() const { return static_cast<int>(layers.size()); }
};

// Glorot-uniform initialized MLP with the given hidden widths. The last
// width is the feature dimension.
Network make_network(int input_dim, const std::vector<int>& widths, Rng& rng);

// Single linear head (no activation); used for both classifier heads.
struct LinearHead {
    Matrix w;               // [in x out]
    std::vector<double> b;  // [out]
    int out_dim() const { return w.cols; }
};

LinearHead make_head(int in_dim, int out_dim, Rng& rng);

// Batch forward: y = x * W + b.
Matrix head_forward(const LinearHead& head, const Matrix& x);

struct ForwardCache {
    Matrix input;
    std::vector<Matrix> pre;   // pre-activations z_l
    std::vector<Matrix> post;  // gated post-activations h_l
};

// Forward pass over a batch (rows are instances). gates == nullptr means no
// gating; a gate vector of all ones produces bit-identical results to the
// ungated pass. Throws std::invalid_argument on shape mismatch and
// std::domain_error on non-finite input. When cache != nullptr, the
// intermediates needed by backward() are recorded there.
Matrix forward(const Network& net, const Matrix& batch, const GateSet* gates, ForwardCache* cache);

struct NetGrads {
    std::vector<Matrix> dw;
    std::vector<std::vector<double>> db;
    // d(loss)/d(gate value) per layer; filled only when gates were supplied.
    std::vector<std::vector<double>> dgate;
};

// Backward pass from d(loss)/d(features). Requires the cache produced by a
// matching forward() call with the same gates.
NetGrads backward(const Network& net, const ForwardCache& cache, const Matrix& dfeatures,
                  const GateSet* gates);

// Softmax cross-entropy over rows, mean-reduced over the batch.
struct XentResult {
    double loss = 0.0;
    Matrix dlogits;  // gradient of the mean loss w.r.t. the logits
};

XentResult softmax_xent(const Matrix& logits, const std::vector<int>& labels);

// Row-wise softmax with max-shift for stability.
Matrix softmax_rows(const Matrix& logits);

// Classical momentum SGD: v <- momentum * v + g; p <- p - lr * v.
// One velocity buffer per registered parameter slot; slots are created on
// first use and fixed in size afterwards.
struct SgdState {
    double lr = 0.0;
    double momentum = 0.0;
    std::vector<std::vector<double>> velocity;

    SgdState(double lr_, double momentum_) : lr(lr_), momentum(momentum_) {}
};

void sgd_step(SgdState& st, std::size_t slot, double* param, const double* grad, std::size_t n);
void sgd_step(SgdState& st, std::size_t slot, Matrix& param, const Matrix& grad);
void sgd_step(SgdState& st, std::size_t slot, std::vector<double>& param,
              const std::vector<double>& grad);

} // namespace row
