#include "row/network.hpp"

#include "row/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace row {

namespace {

Matrix glorot_uniform(int in_dim, int out_dim, Rng& rng) {
    Matrix w(in_dim, out_dim);
    const double limit = std::sqrt(6.0 / (static_cast<double>(in_dim) + out_dim));
    for (double& v : w.data) v = rng.uniform(-limit, limit);
    return w;
}

void check_gates(const Network& net, const GateSet& gates) {
    if (static_cast<int>(gates.size()) != net.num_layers())
        throw std::invalid_argument("gates: expected " + std::to_string(net.num_layers()) +
                                    " layers, got " + std::to_string(gates.size()));
    for (int l = 0; l < net.num_layers(); ++l)
        if (static_cast<int>(gates[l].size()) != net.layers[l].w.cols)
            throw std::invalid_argument("gates: layer " + std::to_string(l) + " expects " +
                                        std::to_string(net.layers[l].w.cols) + " units, got " +
                                        std::to_string(gates[l].size()));
}

} // namespace

Network make_network(int input_dim, const std::vector<int>& widths, Rng& rng) {
    if (input_dim <= 0) throw std::invalid_argument("make_network: input_dim must be positive");
    if (widths.empty()) throw std::invalid_argument("make_network: needs at least one layer");
    Network net;
    int in = input_dim;
    for (int w : widths) {
        if (w <= 0) throw std::invalid_argument("make_network: layer width must be positive");
        Layer layer;
        layer.w = glorot_uniform(in, w, rng);
        layer.b.assign(static_cast<std::size_t>(w), 0.0);
        net.layers.push_back(std::move(layer));
        in = w;
    }
    return net;
}

LinearHead make_head(int in_dim, int out_dim, Rng& rng) {
    if (in_dim <= 0 || out_dim <= 0)
        throw std::invalid_argument("make_head: dimensions must be positive");
    LinearHead head;
    head.w = glorot_uniform(in_dim, out_dim, rng);
    head.b.assign(static_cast<std::size_t>(out_dim), 0.0);
    return head;
}

Matrix head_forward(const LinearHead& head, const Matrix& x) {
    if (x.cols != head.w.rows)
        throw std::invalid_argument("head_forward: input width " + std::to_string(x.cols) +
                                    " vs head input " + std::to_string(head.w.rows));
    Matrix y;
    kernels::matmul(x, head.w, y);
    for (int i = 0; i < y.rows; ++i) {
        double* r = y.row_ptr(i);
        for (int j = 0; j < y.cols; ++j) r[j] += head.b[static_cast<std::size_t>(j)];
    }
    return y;
}

Matrix forward(const Network& net, const Matrix& batch, const GateSet* gates, ForwardCache* cache) {
    if (net.layers.empty()) throw std::invalid_argument("forward: empty network");
    if (batch.cols != net.input_dim())
        throw std::invalid_argument("forward: batch width " + std::to_string(batch.cols) +
                                    " vs input_dim " + std::to_string(net.input_dim()));
    require_finite(batch, "forward input");
    if (gates) check_gates(net, *gates);

    if (cache) {
        cache->input = batch;
        cache->pre.clear();
        cache->post.clear();
    }

    Matrix h = batch;
    for (int l = 0; l < net.num_layers(); ++l) {
        const Layer& layer = net.layers[l];
        Matrix z;
        kernels::matmul(h, layer.w, z);
        for (int i = 0; i < z.rows; ++i) {
            double* r = z.row_ptr(i);
            for (int j = 0; j < z.cols; ++j) r[j] += layer.b[static_cast<std::size_t>(j)];
        }
        if (cache) cache->pre.push_back(z);

        Matrix a(z.rows, z.cols);
        if (gates) {
            const std::vector<double>& g = (*gates)[static_cast<std::size_t>(l)];
            for (int i = 0; i < z.rows; ++i) {
                const double* zr = z.row_ptr(i);
                double* ar = a.row_ptr(i);
                for (int j = 0; j < z.cols; ++j)
                    ar[j] = g[static_cast<std::size_t>(j)] * (zr[j] > 0.0 ? zr[j] : 0.0);
            }
        } else {
            for (int i = 0; i < z.rows; ++i) {
                const double* zr = z.row_ptr(i);
                double* ar = a.row_ptr(i);
                for (int j = 0; j < z.cols; ++j) ar[j] = zr[j] > 0.0 ? zr[j] : 0.0;
            }
        }
        if (cache) cache->post.push_back(a);
        h = std::move(a);
    }
    return h;
}

NetGrads backward(const Network& net, const ForwardCache& cache, const Matrix& dfeatures,
                  const GateSet* gates) {
    const int L = net.num_layers();
    if (static_cast<int>(cache.pre.size()) != L || static_cast<int>(cache.post.size()) != L)
        throw std::invalid_argument("backward: cache does not match network depth");
    if (!dfeatures.same_shape(cache.post.back()))
        throw std::invalid_argument("backward: upstream gradient shape " + shape_str(dfeatures) +
                                    " vs features " + shape_str(cache.post.back()));
    if (gates) check_gates(net, *gates);

    NetGrads grads;
    grads.dw.resize(static_cast<std::size_t>(L));
    grads.db.resize(static_cast<std::size_t>(L));
    if (gates) grads.dgate.resize(static_cast<std::size_t>(L));

    Matrix dpost = dfeatures;
    for (int l = L - 1; l >= 0; --l) {
        const Matrix& z = cache.pre[static_cast<std::size_t>(l)];

        // Gate gradient: d(loss)/d(g_j) = sum over batch of relu(z) * dpost.
        if (gates) {
            std::vector<double>& dg = grads.dgate[static_cast<std::size_t>(l)];
            dg.assign(static_cast<std::size_t>(z.cols), 0.0);
            for (int i = 0; i < z.rows; ++i) {
                const double* zr = z.row_ptr(i);
                const double* dr = dpost.row_ptr(i);
                for (int j = 0; j < z.cols; ++j)
                    dg[static_cast<std::size_t>(j)] += (zr[j] > 0.0 ? zr[j] : 0.0) * dr[j];
            }
        }

        // Through the gate and the ReLU: dz = dpost * g * 1[z > 0].
        Matrix dz(z.rows, z.cols);
        for (int i = 0; i < z.rows; ++i) {
            const double* zr = z.row_ptr(i);
            const double* dr = dpost.row_ptr(i);
            double* dzr = dz.row_ptr(i);
            for (int j = 0; j < z.cols; ++j) {
                double g = gates ? (*gates)[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)]
                                 : 1.0;
                dzr[j] = zr[j] > 0.0 ? g * dr[j] : 0.0;
            }
        }

        const Matrix& input = l == 0 ? cache.input : cache.post[static_cast<std::size_t>(l - 1)];
        kernels::matmul_at_b(input, dz, grads.dw[static_cast<std::size_t>(l)]);
        kernels::colsum(dz, grads.db[static_cast<std::size_t>(l)]);
        if (l > 0) kernels::matmul_a_bt(dz, net.layers[static_cast<std::size_t>(l)].w, dpost);
    }
    return grads;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows, logits.cols);
    for (int i = 0; i < logits.rows; ++i) {
        const double* lr = logits.row_ptr(i);
        double* pr = p.row_ptr(i);
        double mx = lr[0];
        for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, lr[j]);
        double z = 0.0;
        for (int j = 0; j < logits.cols; ++j) {
            pr[j] = std::exp(lr[j] - mx);
            z += pr[j];
        }
        for (int j = 0; j < logits.cols; ++j) pr[j] /= z;
    }
    return p;
}

XentResult softmax_xent(const Matrix& logits, const std::vector<int>& labels) {
    if (logits.rows == 0) throw std::invalid_argument("softmax_xent: empty batch");
    if (static_cast<int>(labels.size()) != logits.rows)
        throw std::invalid_argument("softmax_xent: " + std::to_string(labels.size()) +
                                    " labels for " + std::to_string(logits.rows) + " rows");
    for (int i = 0; i < logits.rows; ++i)
        if (labels[static_cast<std::size_t>(i)] < 0 ||
            labels[static_cast<std::size_t>(i)] >= logits.cols)
            throw std::invalid_argument("softmax_xent: label " +
                                        std::to_string(labels[static_cast<std::size_t>(i)]) +
                                        " out of range for " + std::to_string(logits.cols) +
                                        " classes");
    require_finite(logits, "softmax_xent logits");

    XentResult res;
    res.dlogits = softmax_rows(logits);
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    double loss = 0.0;
    for (int i = 0; i < logits.rows; ++i) {
        double* dr = res.dlogits.row_ptr(i);
        const int y = labels[static_cast<std::size_t>(i)];
        // log p(y) computed from the stabilized softmax.
        loss -= std::log(dr[y]);
        dr[y] -= 1.0;
        for (int j = 0; j < res.dlogits.cols; ++j) dr[j] *= inv_n;
    }
    res.loss = loss * inv_n;
    return res;
}

void sgd_step(SgdState& st, std::size_t slot, double* param, const double* grad, std::size_t n) {
    if (st.velocity.size() <= slot) st.velocity.resize(slot + 1);
    std::vector<double>& v = st.velocity[slot];
    if (v.empty()) v.assign(n, 0.0);
    if (v.size() != n)
        throw std::invalid_argument("sgd_step: slot " + std::to_string(slot) + " holds " +
                                    std::to_string(v.size()) + " values, got " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = st.momentum * v[i] + grad[i];
        param[i] -= st.lr * v[i];
    }
}

void sgd_step(SgdState& st, std::size_t slot, Matrix& param, const Matrix& grad) {
    if (!param.same_shape(grad))
        throw std::invalid_argument("sgd_step: param " + shape_str(param) + " vs grad " +
                                    shape_str(grad));
    sgd_step(st, slot, param.data.data(), grad.data.data(), param.data.size());
}

void sgd_step(SgdState& st, std::size_t slot, std::vector<double>& param,
              const std::vector<double>& grad) {
    if (param.size() != grad.size())
        throw std::invalid_argument("sgd_step: param size " + std::to_string(param.size()) +
                                    " vs grad size " + std::to_string(grad.size()));
    sgd_step(st, slot, param.data(), grad.data(), param.size());
}

} // namespace row
