#include "row/trainer.hpp"

#include "row/inference.hpp"
#include "test_support.hpp"

#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

using namespace row;

namespace {

std::vector<int> identity_order(int n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    return order;
}

TaskSequence make_sequence(int classes, int dim, int n_per_class, double spread,
                           std::uint64_t seed, int tasks) {
    return split_tasks(gen_gaussian_clusters(classes, dim, n_per_class, spread, seed), tasks,
                       identity_order(classes));
}

// Small-but-learnable settings so the trainer tests stay fast.
TrainHyper small_hyper() {
    TrainHyper h;
    h.lr1 = h.lr2 = h.lr3 = 0.05;
    h.epochs1 = 15;
    h.epochs2 = 10;
    h.epochs3 = 10;
    h.batch1 = 16;
    h.batch2 = 16;
    h.batch3 = 16;
    h.s_max = 100.0;
    return h;
}

// Fraction of task-train samples whose OOD head puts the argmax over the
// full logit row (reject included) on the true local class.
double step1_train_accuracy(const TaskModel& model, const Task& task) {
    const int k = task.id;
    const TrainedTask& trained = model.tasks[static_cast<std::size_t>(k)];
    const Matrix x = to_matrix(task.train, model.net.input_dim());
    const Matrix features = forward(model.net, x, &trained.mask, nullptr);
    const Matrix logits = head_forward(model.heads[static_cast<std::size_t>(k)].ood, features);
    int correct = 0;
    for (int i = 0; i < logits.rows; ++i) {
        const double* r = logits.row_ptr(i);
        int arg = 0;
        for (int j = 1; j < logits.cols; ++j)
            if (r[j] > r[arg]) arg = j;
        if (arg == trained.local_of(task.train[static_cast<std::size_t>(i)].label)) ++correct;
    }
    return static_cast<double>(correct) / logits.rows;
}

// Mean cross-entropy of every task's OOD head on its buffer pseudo-split.
double ood_buffer_loss(TaskModel& model) {
    double total = 0.0;
    for (int k = 0; k < model.num_tasks(); ++k) {
        const TrainedTask& trained = model.tasks[static_cast<std::size_t>(k)];
        const auto [ind, rest] = model.buffer.pseudo_split(k);
        std::vector<Sample> all = ind;
        all.insert(all.end(), rest.begin(), rest.end());
        std::vector<int> labels;
        for (std::size_t i = 0; i < all.size(); ++i)
            labels.push_back(i < ind.size() ? trained.local_of(all[i].label)
                                            : static_cast<int>(trained.classes.size()));
        const Matrix x = to_matrix(all, model.net.input_dim());
        const Matrix features = forward(model.net, x, &trained.mask, nullptr);
        Matrix logits = head_forward(model.heads[static_cast<std::size_t>(k)].ood, features);
        total += softmax_xent(logits, labels).loss;
    }
    return total / model.num_tasks();
}

} // namespace

TEST_CASE("step 1 learns a separable first task") {
    TaskSequence seq = make_sequence(4, 8, 40, 0.05, 11, 2);
    TaskModel model = make_task_model(8, {24, 16}, 64, 21);
    TrainHyper hyper = small_hyper();
    Rng rng(31);
    const std::vector<double> losses = train_step1(model, seq.tasks[0], hyper, rng);
    REQUIRE(losses.size() == static_cast<std::size_t>(hyper.epochs1));
    CHECK(losses.back() < losses.front());
    CHECK(model.num_tasks() == 1);
    CHECK(model.heads.size() == 1);
    CHECK(step1_train_accuracy(model, seq.tasks[0]) >= 0.99);
}

TEST_CASE("first task trains identically with and without the replay loss") {
    // The buffer is empty on task one, so the reject-class term contributes
    // nothing and both settings must follow the same trajectory bit for bit.
    TaskSequence seq = make_sequence(4, 8, 40, 0.05, 12, 2);
    TrainHyper with = small_hyper();
    TrainHyper without = small_hyper();
    without.use_ood_loss = false;

    TaskModel a = make_task_model(8, {24, 16}, 64, 5);
    TaskModel b = make_task_model(8, {24, 16}, 64, 5);
    Rng ra(77);
    Rng rb(77);
    const std::vector<double> la = train_step1(a, seq.tasks[0], with, ra);
    const std::vector<double> lb = train_step1(b, seq.tasks[0], without, rb);
    CHECK(testsupport::bits_equal(la, lb));
    for (std::size_t l = 0; l < a.net.layers.size(); ++l)
        CHECK(testsupport::bits_equal(a.net.layers[l].w, b.net.layers[l].w));
    CHECK(testsupport::bits_equal(a.heads[0].ood.w, b.heads[0].ood.w));
}

TEST_CASE("step 2 trains the WP head and touches nothing else") {
    TaskSequence seq = make_sequence(4, 8, 40, 0.05, 13, 2);
    TaskModel model = make_task_model(8, {24, 16}, 64, 9);
    TrainHyper hyper = small_hyper();
    Rng rng(41);
    train_step1(model, seq.tasks[0], hyper, rng);

    const std::vector<Matrix> net_w = [&] {
        std::vector<Matrix> ws;
        for (const Layer& l : model.net.layers) ws.push_back(l.w);
        return ws;
    }();
    const Matrix ood_w = model.heads[0].ood.w;
    const Matrix wp_before = model.heads[0].wp.w;

    const std::vector<double> losses = train_step2(model, seq.tasks[0], hyper, rng);
    REQUIRE(losses.size() == static_cast<std::size_t>(hyper.epochs2));
    CHECK(losses.back() < losses.front());
    for (std::size_t l = 0; l < model.net.layers.size(); ++l)
        CHECK(testsupport::bits_equal(model.net.layers[l].w, net_w[l]));
    CHECK(testsupport::bits_equal(model.heads[0].ood.w, ood_w));
    CHECK_FALSE(testsupport::bits_equal(model.heads[0].wp.w, wp_before));
    CHECK(til_accuracy(model, 0, seq.tasks[0].train) >= 0.99);
}

TEST_CASE("step 3 re-tunes OOD heads on the buffer without moving the extractor") {
    TaskSequence seq = make_sequence(4, 8, 40, 0.05, 14, 2);
    TaskModel model = make_task_model(8, {24, 16}, 64, 3);
    TrainHyper hyper = small_hyper();

    Rng rng(51);
    train_step1(model, seq.tasks[0], hyper, rng);
    train_step2(model, seq.tasks[0], hyper, rng);
    model.buffer.rebalance_and_insert(seq.tasks[0].train, 0, rng);
    train_step1(model, seq.tasks[1], hyper, rng);
    train_step2(model, seq.tasks[1], hyper, rng);
    model.buffer.rebalance_and_insert(seq.tasks[1].train, 1, rng);

    const double loss_before = ood_buffer_loss(model);
    const std::vector<Matrix> net_w = [&] {
        std::vector<Matrix> ws;
        for (const Layer& l : model.net.layers) ws.push_back(l.w);
        return ws;
    }();
    const Matrix wp0 = model.heads[0].wp.w;
    const Matrix ood0 = model.heads[0].ood.w;

    const std::vector<double> losses = train_step3(model, hyper, rng);
    REQUIRE(losses.size() == static_cast<std::size_t>(hyper.epochs3));
    CHECK(losses.back() < losses.front());
    for (std::size_t l = 0; l < model.net.layers.size(); ++l)
        CHECK(testsupport::bits_equal(model.net.layers[l].w, net_w[l]));
    CHECK(testsupport::bits_equal(model.heads[0].wp.w, wp0));
    CHECK_FALSE(testsupport::bits_equal(model.heads[0].ood.w, ood0));
    CHECK(ood_buffer_loss(model) < loss_before);
}

TEST_CASE("step 3 works with a single trained task") {
    // The pseudo-split complement is empty, so the head sees only
    // in-distribution labels; it must still update without throwing.
    TaskSequence seq = make_sequence(2, 6, 40, 0.05, 15, 1);
    TaskModel model = make_task_model(6, {16}, 32, 7);
    TrainHyper hyper = small_hyper();
    Rng rng(61);
    train_step1(model, seq.tasks[0], hyper, rng);
    model.buffer.rebalance_and_insert(seq.tasks[0].train, 0, rng);
    const Matrix ood_before = model.heads[0].ood.w;
    CHECK_NOTHROW(train_step3(model, hyper, rng));
    CHECK_FALSE(testsupport::bits_equal(model.heads[0].ood.w, ood_before));
}

TEST_CASE("old-task features and WP outputs survive later tasks bit for bit") {
    TaskSequence seq = make_sequence(4, 8, 40, 0.05, 16, 2);
    TaskModel model = make_task_model(8, {24, 16}, 64, 13);
    TrainHyper hyper = small_hyper();
    train_task(model, seq.tasks[0], hyper, 1001);

    const Matrix x0 = to_matrix(seq.tasks[0].test, 8);
    const Matrix features_before = forward(model.net, x0, &model.tasks[0].mask, nullptr);
    const Matrix wp_before = head_forward(model.heads[0].wp, features_before);
    const double til_before = til_accuracy(model, 0, seq.tasks[0].test);

    train_task(model, seq.tasks[1], hyper, 1002);

    const Matrix features_after = forward(model.net, x0, &model.tasks[0].mask, nullptr);
    const Matrix wp_after = head_forward(model.heads[0].wp, features_after);
    CHECK(testsupport::bits_equal(features_after, features_before));
    CHECK(testsupport::bits_equal(wp_after, wp_before));
    CHECK(til_accuracy(model, 0, seq.tasks[0].test) == til_before);
}

TEST_CASE("train_task bookkeeping across a full sequence") {
    TaskSequence seq = make_sequence(6, 10, 40, 0.08, 17, 3);
    TaskModel model = make_task_model(10, {24, 16}, 60, 19);
    TrainHyper hyper = small_hyper();
    for (int t = 0; t < 3; ++t) train_task(model, seq.tasks[static_cast<std::size_t>(t)], hyper,
                                           2000 + static_cast<std::uint64_t>(t));

    CHECK(model.num_tasks() == 3);
    CHECK(model.heads.size() == 3);
    CHECK(model.stats.size() == 3);
    CHECK(model.buffer.size() == 60);
    CHECK(model.buffer.store().size() == 6);
    std::size_t lo = model.buffer.size();
    std::size_t hi = 0;
    for (const auto& [label, kept] : model.buffer.store()) {
        lo = std::min(lo, kept.size());
        hi = std::max(hi, kept.size());
    }
    CHECK(hi - lo <= 1);
}

TEST_CASE("train_task is bit-deterministic") {
    TaskSequence seq = make_sequence(4, 8, 40, 0.05, 18, 2);
    TrainHyper hyper = small_hyper();

    auto run = [&] {
        TaskModel model = make_task_model(8, {24, 16}, 64, 23);
        train_task(model, seq.tasks[0], hyper, 3001);
        train_task(model, seq.tasks[1], hyper, 3002);
        return model;
    };
    TaskModel a = run();
    TaskModel b = run();
    for (std::size_t l = 0; l < a.net.layers.size(); ++l) {
        CHECK(testsupport::bits_equal(a.net.layers[l].w, b.net.layers[l].w));
        CHECK(testsupport::bits_equal(a.net.layers[l].b, b.net.layers[l].b));
    }
    for (int k = 0; k < 2; ++k) {
        CHECK(testsupport::bits_equal(a.heads[static_cast<std::size_t>(k)].ood.w,
                                      b.heads[static_cast<std::size_t>(k)].ood.w));
        CHECK(testsupport::bits_equal(a.heads[static_cast<std::size_t>(k)].wp.w,
                                      b.heads[static_cast<std::size_t>(k)].wp.w));
        CHECK(testsupport::bits_equal(a.stats[static_cast<std::size_t>(k)].cov,
                                      b.stats[static_cast<std::size_t>(k)].cov));
        CHECK(a.tasks[static_cast<std::size_t>(k)].mask ==
              b.tasks[static_cast<std::size_t>(k)].mask);
    }
    const Matrix x = to_matrix(seq.tasks[1].test, 8);
    const std::vector<CilPrediction> pa = predict_batch(a, x, PredictMode::full, 1e-6);
    const std::vector<CilPrediction> pb = predict_batch(b, x, PredictMode::full, 1e-6);
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i].global_label == pb[i].global_label);
        CHECK(testsupport::bits_equal(pa[i].tp, pb[i].tp));
    }
}

TEST_CASE("trainer rejects out-of-order tasks") {
    TaskSequence seq = make_sequence(4, 8, 40, 0.05, 19, 2);
    TaskModel model = make_task_model(8, {16}, 64, 29);
    TrainHyper hyper = small_hyper();
    Rng rng(71);
    CHECK_THROWS_AS(train_step1(model, seq.tasks[1], hyper, rng), std::invalid_argument);
    CHECK_THROWS_AS(train_step2(model, seq.tasks[0], hyper, rng), std::invalid_argument);
    CHECK_THROWS_AS(train_step3(model, hyper, rng), std::invalid_argument);
    train_step1(model, seq.tasks[0], hyper, rng);
    CHECK_THROWS_AS(train_step2(model, seq.tasks[1], hyper, rng), std::invalid_argument);
    CHECK_THROWS_AS(fit_stats_for_task(model, seq.tasks[1], hyper), std::invalid_argument);
}
