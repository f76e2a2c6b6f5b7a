#include "row/hat.hpp"

#include <algorithm>
#include <cmath>

namespace row {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_mask(const Network& net, const std::vector<std::vector<double>>& per_layer,
                const char* what) {
    if (static_cast<int>(per_layer.size()) != net.num_layers())
        throw std::invalid_argument(std::string(what) + ": expected " +
                                    std::to_string(net.num_layers()) + " layers, got " +
                                    std::to_string(per_layer.size()));
    for (int l = 0; l < net.num_layers(); ++l)
        if (static_cast<int>(per_layer[static_cast<std::size_t>(l)].size()) != net.layers[l].w.cols)
            throw std::invalid_argument(std::string(what) + ": layer " + std::to_string(l) +
                                        " size mismatch");
}

} // namespace

TaskMask make_task_mask(const Network& net, Rng& rng) {
    TaskMask mask;
    mask.emb.resize(static_cast<std::size_t>(net.num_layers()));
    for (int l = 0; l < net.num_layers(); ++l) {
        std::vector<double>& e = mask.emb[static_cast<std::size_t>(l)];
        e.resize(static_cast<std::size_t>(net.layers[l].w.cols));
        for (double& v : e) v = rng.uniform(-1.0, 1.0);
    }
    return mask;
}

AccumulatedMask make_accumulated(const Network& net) {
    AccumulatedMask acc;
    acc.a.resize(static_cast<std::size_t>(net.num_layers()));
    for (int l = 0; l < net.num_layers(); ++l)
        acc.a[static_cast<std::size_t>(l)].assign(static_cast<std::size_t>(net.layers[l].w.cols),
                                                  0.0);
    return acc;
}

GateSet soft_gates(const TaskMask& mask, double s) {
    GateSet gates(mask.emb.size());
    for (std::size_t l = 0; l < mask.emb.size(); ++l) {
        gates[l].resize(mask.emb[l].size());
        for (std::size_t j = 0; j < mask.emb[l].size(); ++j)
            gates[l][j] = sigmoid(s * mask.emb[l][j]);
    }
    return gates;
}

GateSet binarize(const TaskMask& mask, double s_max) {
    GateSet gates(mask.emb.size());
    for (std::size_t l = 0; l < mask.emb.size(); ++l) {
        gates[l].resize(mask.emb[l].size());
        for (std::size_t j = 0; j < mask.emb[l].size(); ++j)
            gates[l][j] = sigmoid(s_max * mask.emb[l][j]) >= 0.5 ? 1.0 : 0.0;
    }
    return gates;
}

double anneal_scale(double s_max, int batch_index, int batches_per_epoch) {
    if (s_max < 1.0) throw std::invalid_argument("anneal_scale: s_max must be >= 1");
    if (batch_index < 0 || batches_per_epoch <= 0 || batch_index >= batches_per_epoch)
        throw std::invalid_argument("anneal_scale: batch " + std::to_string(batch_index) +
                                    " of " + std::to_string(batches_per_epoch));
    const double lo = 1.0 / s_max;
    if (batches_per_epoch == 1) return s_max;
    double s = lo + (s_max - lo) * static_cast<double>(batch_index) /
                        static_cast<double>(batches_per_epoch - 1);
    return std::clamp(s, lo, s_max);
}

void gate_gradients(const Network& net, const AccumulatedMask& acc, NetGrads& grads) {
    check_mask(net, acc.a, "gate_gradients");
    if (grads.dw.size() != acc.a.size() || grads.db.size() != acc.a.size())
        throw std::invalid_argument("gate_gradients: gradient layer count mismatch");
    for (int l = 0; l < net.num_layers(); ++l) {
        const std::vector<double>& a_out = acc.a[static_cast<std::size_t>(l)];
        const std::vector<double>* a_in =
            l > 0 ? &acc.a[static_cast<std::size_t>(l - 1)] : nullptr;
        Matrix& dw = grads.dw[static_cast<std::size_t>(l)];
        for (int r = 0; r < dw.rows; ++r) {
            double* dr = dw.row_ptr(r);
            for (int c = 0; c < dw.cols; ++c) {
                double reserved = a_out[static_cast<std::size_t>(c)];
                if (a_in) reserved = std::min(reserved, (*a_in)[static_cast<std::size_t>(r)]);
                dr[c] *= 1.0 - reserved;
            }
        }
        std::vector<double>& db = grads.db[static_cast<std::size_t>(l)];
        for (std::size_t c = 0; c < db.size(); ++c) db[c] *= 1.0 - a_out[c];
    }
}

MaskRegResult mask_regularizer(const TaskMask& mask, const AccumulatedMask& acc, double s) {
    if (mask.emb.size() != acc.a.size())
        throw std::invalid_argument("mask_regularizer: layer count mismatch");
    double denom = 0.0;
    for (std::size_t l = 0; l < acc.a.size(); ++l) {
        if (mask.emb[l].size() != acc.a[l].size())
            throw std::invalid_argument("mask_regularizer: layer " + std::to_string(l) +
                                        " size mismatch");
        for (double a : acc.a[l]) denom += 1.0 - a;
    }
    if (denom == 0.0)
        throw CapacityExhausted("mask_regularizer: all units reserved by previous tasks");

    MaskRegResult res;
    res.demb.resize(mask.emb.size());
    double num = 0.0;
    for (std::size_t l = 0; l < mask.emb.size(); ++l) {
        res.demb[l].resize(mask.emb[l].size());
        for (std::size_t j = 0; j < mask.emb[l].size(); ++j) {
            const double free = 1.0 - acc.a[l][j];
            const double a = sigmoid(s * mask.emb[l][j]);
            num += a * free;
            res.demb[l][j] = s * a * (1.0 - a) * free / denom;
        }
    }
    res.loss = num / denom;
    return res;
}

void finalize_task_mask(const TaskMask& mask, double s_max, AccumulatedMask& acc) {
    GateSet hard = binarize(mask, s_max);
    if (hard.size() != acc.a.size())
        throw std::invalid_argument("finalize_task_mask: layer count mismatch");
    for (std::size_t l = 0; l < hard.size(); ++l) {
        if (hard[l].size() != acc.a[l].size())
            throw std::invalid_argument("finalize_task_mask: layer " + std::to_string(l) +
                                        " size mismatch");
        for (std::size_t j = 0; j < hard[l].size(); ++j)
            acc.a[l][j] = std::max(acc.a[l][j], hard[l][j]);
    }
}

} // namespace row
