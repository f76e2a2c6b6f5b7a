#include "row/trainer.hpp"

#include "row/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace row {

namespace {

struct Item {
    const Sample* sample;
    int label;  // local class index, or the OOD index
};

Matrix items_to_matrix(const std::vector<Item>& items, std::size_t begin, std::size_t end,
                       int feature_dim, std::vector<int>& labels) {
    Matrix x(static_cast<int>(end - begin), feature_dim);
    labels.clear();
    for (std::size_t i = begin; i < end; ++i) {
        const Item& it = items[i];
        if (static_cast<int>(it.sample->x.size()) != feature_dim)
            throw std::invalid_argument("trainer: sample feature dim " +
                                        std::to_string(it.sample->x.size()) + " vs network " +
                                        std::to_string(feature_dim));
        std::copy(it.sample->x.begin(), it.sample->x.end(),
                  x.row_ptr(static_cast<int>(i - begin)));
        labels.push_back(it.label);
    }
    return x;
}

// One SGD pass of a linear head on fixed features. Returns per-epoch mean
// losses. Used by steps 2 and 3, where the extractor is frozen.
std::vector<double> train_head_on_features(LinearHead& head, const Matrix& features,
                                           const std::vector<int>& labels, double lr,
                                           double momentum, int epochs, int batch_size, Rng& rng) {
    if (features.rows == 0) throw std::invalid_argument("train_head_on_features: no data");
    if (batch_size <= 0) throw std::invalid_argument("train_head_on_features: bad batch size");

    SgdState opt(lr, momentum);
    std::vector<std::size_t> order(static_cast<std::size_t>(features.rows));
    std::vector<double> epoch_losses;
    std::vector<int> batch_labels;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        const int n = features.rows;
        const int num_batches = (n + batch_size - 1) / batch_size;
        double loss_sum = 0.0;
        for (int b = 0; b < num_batches; ++b) {
            const int lo = b * batch_size;
            const int hi = std::min(n, lo + batch_size);
            Matrix fb(hi - lo, features.cols);
            batch_labels.clear();
            for (int i = lo; i < hi; ++i) {
                std::copy(features.row_ptr(static_cast<int>(order[static_cast<std::size_t>(i)])),
                          features.row_ptr(static_cast<int>(order[static_cast<std::size_t>(i)])) +
                              features.cols,
                          fb.row_ptr(i - lo));
                batch_labels.push_back(labels[order[static_cast<std::size_t>(i)]]);
            }
            Matrix logits = head_forward(head, fb);
            XentResult xr = softmax_xent(logits, batch_labels);
            Matrix dw;
            kernels::matmul_at_b(fb, xr.dlogits, dw);
            std::vector<double> db;
            kernels::colsum(xr.dlogits, db);
            sgd_step(opt, 0, head.w, dw);
            sgd_step(opt, 1, head.b, db);
            loss_sum += xr.loss;
        }
        epoch_losses.push_back(loss_sum / num_batches);
    }
    return epoch_losses;
}

} // namespace

int TrainedTask::local_of(int global_label) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == global_label) return static_cast<int>(i);
    return -1;
}

TaskModel make_task_model(int input_dim, const std::vector<int>& hidden, std::size_t budget,
                          std::uint64_t seed) {
    Rng rng(seed);
    TaskModel model{Network{}, AccumulatedMask{}, {}, {}, {}, ReplayBuffer(budget)};
    model.net = make_network(input_dim, hidden, rng);
    model.acc = make_accumulated(model.net);
    return model;
}

std::vector<double> train_step1(TaskModel& model, const Task& task, const TrainHyper& hyper,
                                Rng& rng) {
    if (task.train.empty()) throw std::invalid_argument("train_step1: task has no training data");
    const int k = model.num_tasks();
    if (task.id != k)
        throw std::invalid_argument("train_step1: expected task " + std::to_string(k) + ", got " +
                                    std::to_string(task.id));
    if (hyper.batch1 <= 0) throw std::invalid_argument("train_step1: bad batch size");
    const int num_classes = static_cast<int>(task.classes.size());
    const int ood_index = num_classes;

    TaskMask mask = make_task_mask(model.net, rng);
    TaskHeads heads;
    heads.ood = make_head(model.net.feature_dim(), num_classes + 1, rng);
    heads.wp = make_head(model.net.feature_dim(), num_classes, rng);

    // Training set: the task's data plus (from task 2 on) the replay buffer
    // upsampled to the same size and labelled as the reject class.
    std::vector<Item> items;
    items.reserve(task.train.size() * 2);
    for (const Sample& s : task.train) {
        const int local = task.local_of(s.label);
        if (local < 0)
            throw std::invalid_argument("train_step1: label " + std::to_string(s.label) +
                                        " not in task " + std::to_string(task.id));
        items.push_back({&s, local});
    }
    std::vector<Sample> replay;
    if (hyper.use_ood_loss && !model.buffer.empty()) {
        replay = model.buffer.upsample_to(task.train.size(), rng);
        for (const Sample& s : replay) items.push_back({&s, ood_index});
    }

    SgdState opt_net(hyper.lr1, hyper.momentum);
    SgdState opt_head(hyper.lr1, hyper.momentum);
    SgdState opt_emb(hyper.lr1, hyper.momentum);
    const int input_dim = model.net.input_dim();

    std::vector<double> epoch_losses;
    std::vector<int> labels;
    std::vector<std::vector<double>> demb;
    for (int epoch = 0; epoch < hyper.epochs1; ++epoch) {
        rng.shuffle(items);
        const int n = static_cast<int>(items.size());
        const int num_batches = (n + hyper.batch1 - 1) / hyper.batch1;
        double loss_sum = 0.0;
        for (int b = 0; b < num_batches; ++b) {
            const double s = anneal_scale(hyper.s_max, b, num_batches);
            const GateSet gates = soft_gates(mask, s);

            const std::size_t lo = static_cast<std::size_t>(b) * hyper.batch1;
            const std::size_t hi = std::min<std::size_t>(items.size(), lo + hyper.batch1);
            const Matrix x = items_to_matrix(items, lo, hi, input_dim, labels);

            ForwardCache cache;
            const Matrix features = forward(model.net, x, &gates, &cache);
            const Matrix logits = head_forward(heads.ood, features);
            XentResult xr = softmax_xent(logits, labels);
            const MaskRegResult reg = mask_regularizer(mask, model.acc, s);

            Matrix dw_head;
            kernels::matmul_at_b(features, xr.dlogits, dw_head);
            std::vector<double> db_head;
            kernels::colsum(xr.dlogits, db_head);
            Matrix dfeatures;
            kernels::matmul_a_bt(xr.dlogits, heads.ood.w, dfeatures);

            NetGrads grads = backward(model.net, cache, dfeatures, &gates);
            gate_gradients(model.net, model.acc, grads);

            // Embedding gradient: data path through the soft gates plus the
            // capacity regularizer, clamped for sigmoid saturation.
            demb.resize(grads.dgate.size());
            for (std::size_t l = 0; l < grads.dgate.size(); ++l) {
                demb[l].resize(grads.dgate[l].size());
                for (std::size_t j = 0; j < grads.dgate[l].size(); ++j) {
                    const double g = gates[l][j];
                    double d = grads.dgate[l][j] * s * g * (1.0 - g) + reg.demb[l][j];
                    d = std::clamp(d, -kEmbGradClamp, kEmbGradClamp);
                    demb[l][j] = d;
                }
            }

            for (std::size_t l = 0; l < model.net.layers.size(); ++l) {
                sgd_step(opt_net, 2 * l, model.net.layers[l].w, grads.dw[l]);
                sgd_step(opt_net, 2 * l + 1, model.net.layers[l].b, grads.db[l]);
            }
            sgd_step(opt_head, 0, heads.ood.w, dw_head);
            sgd_step(opt_head, 1, heads.ood.b, db_head);
            for (std::size_t l = 0; l < demb.size(); ++l) sgd_step(opt_emb, l, mask.emb[l], demb[l]);

            loss_sum += xr.loss + reg.loss;
        }
        epoch_losses.push_back(loss_sum / num_batches);
    }

    TrainedTask trained;
    trained.classes = task.classes;
    trained.mask = binarize(mask, hyper.s_max);
    finalize_task_mask(mask, hyper.s_max, model.acc);
    model.tasks.push_back(std::move(trained));
    model.heads.push_back(std::move(heads));
    return epoch_losses;
}

std::vector<double> train_step2(TaskModel& model, const Task& task, const TrainHyper& hyper,
                                Rng& rng) {
    const int k = model.num_tasks() - 1;
    if (k < 0 || task.id != k)
        throw std::invalid_argument("train_step2: step 1 must finish task " +
                                    std::to_string(task.id) + " first");
    const TrainedTask& trained = model.tasks[static_cast<std::size_t>(k)];

    std::vector<int> labels;
    labels.reserve(task.train.size());
    for (const Sample& s : task.train) {
        const int local = trained.local_of(s.label);
        if (local < 0)
            throw std::invalid_argument("train_step2: label " + std::to_string(s.label) +
                                        " not in task " + std::to_string(task.id));
        labels.push_back(local);
    }

    // Extractor frozen: features are computed once under the stored mask.
    const Matrix x = to_matrix(task.train, model.net.input_dim());
    const Matrix features = forward(model.net, x, &trained.mask, nullptr);
    return train_head_on_features(model.heads[static_cast<std::size_t>(k)].wp, features, labels,
                                  hyper.lr2, hyper.momentum, hyper.epochs2, hyper.batch2, rng);
}

std::vector<double> train_step3(TaskModel& model, const TrainHyper& hyper, Rng& rng) {
    if (model.num_tasks() == 0) throw std::invalid_argument("train_step3: no trained tasks");

    std::vector<double> epoch_losses(static_cast<std::size_t>(hyper.epochs3), 0.0);
    for (int kp = 0; kp < model.num_tasks(); ++kp) {
        const TrainedTask& trained = model.tasks[static_cast<std::size_t>(kp)];
        const auto [ind, rest] = model.buffer.pseudo_split(kp);
        const int ood_index = static_cast<int>(trained.classes.size());

        std::vector<Sample> all = ind;
        all.insert(all.end(), rest.begin(), rest.end());
        std::vector<int> labels;
        labels.reserve(all.size());
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (i < ind.size()) {
                const int local = trained.local_of(all[i].label);
                if (local < 0)
                    throw std::invalid_argument("train_step3: stored label " +
                                                std::to_string(all[i].label) +
                                                " not in task " + std::to_string(kp));
                labels.push_back(local);
            } else {
                labels.push_back(ood_index);
            }
        }

        const Matrix x = to_matrix(all, model.net.input_dim());
        const Matrix features = forward(model.net, x, &trained.mask, nullptr);
        const std::vector<double> losses = train_head_on_features(
            model.heads[static_cast<std::size_t>(kp)].ood, features, labels, hyper.lr3,
            hyper.momentum, hyper.epochs3, hyper.batch3, rng);
        for (std::size_t e = 0; e < losses.size(); ++e) epoch_losses[e] += losses[e];
    }
    for (double& v : epoch_losses) v /= static_cast<double>(model.num_tasks());
    return epoch_losses;
}

void fit_stats_for_task(TaskModel& model, const Task& task, const TrainHyper& hyper) {
    const int k = model.num_tasks() - 1;
    if (k < 0 || task.id != k)
        throw std::invalid_argument("fit_stats_for_task: task " + std::to_string(task.id) +
                                    " is not the newest trained task");
    if (static_cast<int>(model.stats.size()) != k)
        throw std::logic_error("fit_stats_for_task: stats already fitted for task " +
                               std::to_string(task.id));
    const TrainedTask& trained = model.tasks[static_cast<std::size_t>(k)];

    const Matrix x = to_matrix(task.train, model.net.input_dim());
    const Matrix features = forward(model.net, x, &trained.mask, nullptr);

    std::vector<std::vector<int>> rows_by_class(trained.classes.size());
    for (std::size_t i = 0; i < task.train.size(); ++i) {
        const int local = trained.local_of(task.train[i].label);
        if (local < 0)
            throw std::invalid_argument("fit_stats_for_task: label " +
                                        std::to_string(task.train[i].label) + " not in task");
        rows_by_class[static_cast<std::size_t>(local)].push_back(static_cast<int>(i));
    }

    std::vector<Matrix> class_features;
    class_features.reserve(rows_by_class.size());
    for (const std::vector<int>& rows : rows_by_class) {
        Matrix f(static_cast<int>(rows.size()), features.cols);
        for (std::size_t r = 0; r < rows.size(); ++r)
            std::copy(features.row_ptr(rows[r]), features.row_ptr(rows[r]) + features.cols,
                      f.row_ptr(static_cast<int>(r)));
        class_features.push_back(std::move(f));
    }
    model.stats.push_back(fit_task_stats(class_features, hyper.stats_eps));
}

void train_task(TaskModel& model, const Task& task, const TrainHyper& hyper, std::uint64_t seed) {
    Rng rng1(derive_seed(seed, 1));
    Rng rng2(derive_seed(seed, 2));
    Rng rng_buf(derive_seed(seed, 3));
    Rng rng3(derive_seed(seed, 4));

    train_step1(model, task, hyper, rng1);
    if (!hyper.run_steps_2_3) return;
    train_step2(model, task, hyper, rng2);
    model.buffer.rebalance_and_insert(task.train, task.id, rng_buf);
    train_step3(model, hyper, rng3);
    fit_stats_for_task(model, task, hyper);
}

} // namespace row
