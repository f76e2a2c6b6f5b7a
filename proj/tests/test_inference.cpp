#include "row/inference.hpp"

#include "row/hat.hpp"
#include "test_support.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace row;

namespace {

// Identity-ish one-unit extractor: feature(x) = relu(x). Heads are loaded
// with explicit biases so the softmax outputs are known in closed form.
TaskModel tiny_model() {
    TaskModel model{Network{}, AccumulatedMask{}, {}, {}, {}, ReplayBuffer(4)};
    Layer layer;
    layer.w = Matrix(1, 1);
    layer.w(0, 0) = 1.0;
    layer.b = {0.0};
    model.net.layers.push_back(std::move(layer));
    model.acc = make_accumulated(model.net);
    return model;
}

LinearHead bias_head(std::vector<double> bias) {
    LinearHead head;
    head.w = Matrix(1, static_cast<int>(bias.size()));
    head.b = std::move(bias);
    return head;
}

void add_task(TaskModel& model, std::vector<int> classes, std::vector<double> ood_bias,
              std::vector<double> wp_bias, double mean) {
    TrainedTask trained;
    trained.classes = std::move(classes);
    trained.mask = GateSet{{1.0}};
    model.tasks.push_back(std::move(trained));
    TaskHeads heads;
    heads.ood = bias_head(std::move(ood_bias));
    heads.wp = bias_head(std::move(wp_bias));
    model.heads.push_back(std::move(heads));
    Matrix cov(1, 1);
    cov(0, 0) = 1.0;
    model.stats.push_back(make_task_stats({{mean}}, std::move(cov), 0.0));
}

// Random multi-task model with untrained (but fixed) weights; inference
// behavior must hold for any parameter values, not just trained ones.
TaskModel random_model(Rng& rng, int input_dim, int num_tasks, int classes_per_task) {
    TaskModel model{Network{}, AccumulatedMask{}, {}, {}, {}, ReplayBuffer(4)};
    model.net = make_network(input_dim, {7, 5}, rng);
    model.acc = make_accumulated(model.net);
    for (int k = 0; k < num_tasks; ++k) {
        TrainedTask trained;
        for (int j = 0; j < classes_per_task; ++j) trained.classes.push_back(k * classes_per_task + j);
        for (const Layer& layer : model.net.layers) {
            std::vector<double> gates(static_cast<std::size_t>(layer.w.cols));
            for (double& g : gates) g = rng.uniform() < 0.7 ? 1.0 : 0.0;
            gates[rng.uniform_int(gates.size())] = 1.0;  // keep at least one unit alive
            trained.mask.push_back(std::move(gates));
        }
        model.tasks.push_back(std::move(trained));
        TaskHeads heads;
        heads.ood = make_head(model.net.feature_dim(), classes_per_task + 1, rng);
        heads.wp = make_head(model.net.feature_dim(), classes_per_task, rng);
        model.heads.push_back(std::move(heads));

        std::vector<Matrix> class_features;
        for (int c = 0; c < classes_per_task; ++c) {
            Matrix f(8, model.net.feature_dim());
            for (double& v : f.data) v = rng.normal() + c;
            class_features.push_back(std::move(f));
        }
        model.stats.push_back(fit_task_stats(class_features, 1e-6));
    }
    return model;
}

} // namespace

TEST_CASE("hand-built model: joint table, task posterior, and decision") {
    TaskModel model = tiny_model();
    add_task(model, {0, 1}, {0.0, 0.0, 0.0}, {std::log(0.7), std::log(0.3)}, 0.0);
    add_task(model, {2, 3}, {0.0, 0.0, 0.0}, {std::log(0.6), std::log(0.4)}, 0.0);

    // Both tasks share the same OOD scores and distance coefficient, so the
    // task posterior is exactly (1/2, 1/2) and the joint table is the WP
    // rows halved.
    CilPrediction pred = predict_cil(model, {1.0}, PredictMode::full, 1e-6);
    REQUIRE(pred.tp.size() == 2);
    CHECK(pred.tp[0] == 0.5);
    CHECK(pred.tp[1] == 0.5);
    CHECK(pred.wp[0][0] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(pred.wp[0][1] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(pred.wp[1][0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(pred.wp[1][1] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(pred.table[0][0] == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(pred.table[0][1] == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(pred.table[1][0] == doctest::Approx(0.30).epsilon(1e-12));
    CHECK(pred.table[1][1] == doctest::Approx(0.20).epsilon(1e-12));
    CHECK(pred.task == 0);
    CHECK(pred.local_class == 0);
    CHECK(pred.global_label == 0);
}

TEST_CASE("a vanishing task posterior annihilates a peaked WP row") {
    TaskModel model = tiny_model();
    add_task(model, {0, 1}, {0.0, 0.0, 0.0}, {std::log(0.6), std::log(0.4)}, 0.0);
    // Task 1 is distance-wise absurd (mean 1001 vs feature 1) but has a very
    // confident WP head; the product must still pick task 0.
    add_task(model, {2, 3}, {0.0, 0.0, 0.0}, {std::log(0.99), std::log(0.01)}, 1001.0);

    CilPrediction pred = predict_cil(model, {1.0}, PredictMode::full, 1e-6);
    CHECK(pred.tp[0] > 0.99);
    CHECK(pred.tp[1] < 0.01);
    CHECK(pred.wp[1][0] == doctest::Approx(0.99).epsilon(1e-12));
    CHECK(pred.task == 0);
    CHECK(pred.global_label == 0);

    // Without the distance coefficient the two tasks tie on raw OOD scores.
    CilPrediction flat = predict_cil(model, {1.0}, PredictMode::no_wp_no_md, 1e-6);
    CHECK(flat.tp[0] == 0.5);
    CHECK(flat.tp[1] == 0.5);
}

TEST_CASE("exact ties resolve to the lowest task and class") {
    TaskModel model = tiny_model();
    add_task(model, {4, 5}, {0.0, 0.0, 0.0}, {0.0, 0.0}, 0.0);
    add_task(model, {6, 7}, {0.0, 0.0, 0.0}, {0.0, 0.0}, 0.0);
    for (PredictMode mode :
         {PredictMode::full, PredictMode::no_wp, PredictMode::no_wp_no_md}) {
        CilPrediction pred = predict_cil(model, {1.0}, mode, 1e-6);
        CHECK(pred.task == 0);
        CHECK(pred.local_class == 0);
        CHECK(pred.global_label == 4);
    }
}

TEST_CASE("probability contracts hold on random models") {
    Rng rng(67);
    for (int trial = 0; trial < 5; ++trial) {
        TaskModel model = random_model(rng, 4, 3, 2);
        Matrix x(6, 4);
        for (double& v : x.data) v = rng.normal();
        for (PredictMode mode :
             {PredictMode::full, PredictMode::no_wp, PredictMode::no_wp_no_md}) {
            const std::vector<CilPrediction> preds = predict_batch(model, x, mode, 1e-6);
            for (const CilPrediction& pred : preds) {
                double tp_sum = 0.0;
                for (double v : pred.tp) {
                    CHECK(v >= 0.0);
                    tp_sum += v;
                }
                CHECK(tp_sum == doctest::Approx(1.0).epsilon(1e-12));
                for (std::size_t k = 0; k < pred.wp.size(); ++k) {
                    double wp_sum = 0.0;
                    for (double v : pred.wp[k]) wp_sum += v;
                    CHECK(wp_sum == doctest::Approx(1.0).epsilon(1e-12));
                    for (std::size_t j = 0; j < pred.wp[k].size(); ++j)
                        CHECK(pred.table[k][j] == pred.wp[k][j] * pred.tp[k]);
                }
            }
        }
    }
}

TEST_CASE("the headline-free decision matches a brute-force concatenated argmax") {
    Rng rng(71);
    for (int trial = 0; trial < 5; ++trial) {
        TaskModel model = random_model(rng, 4, 3, 2);
        Matrix x(8, 4);
        for (double& v : x.data) v = rng.normal();

        for (PredictMode mode : {PredictMode::no_wp, PredictMode::no_wp_no_md}) {
            const std::vector<CilPrediction> preds = predict_batch(model, x, mode, 1e-6);
            for (int i = 0; i < x.rows; ++i) {
                // Oracle: recompute every task's in-distribution logits from
                // scratch and argmax over the concatenation, first index wins.
                int best_task = -1;
                int best_class = -1;
                double best = 0.0;
                for (int k = 0; k < model.num_tasks(); ++k) {
                    Matrix one(1, 4);
                    std::copy(x.row_ptr(i), x.row_ptr(i) + 4, one.row_ptr(0));
                    const Matrix f =
                        forward(model.net, one, &model.tasks[static_cast<std::size_t>(k)].mask,
                                nullptr);
                    const Matrix logits =
                        head_forward(model.heads[static_cast<std::size_t>(k)].ood, f);
                    const int num_classes =
                        static_cast<int>(model.tasks[static_cast<std::size_t>(k)].classes.size());
                    for (int j = 0; j < num_classes; ++j) {
                        if (best_task < 0 || logits(0, j) > best) {
                            best = logits(0, j);
                            best_task = k;
                            best_class = j;
                        }
                    }
                }
                CHECK(preds[static_cast<std::size_t>(i)].task == best_task);
                CHECK(preds[static_cast<std::size_t>(i)].local_class == best_class);
            }
        }
    }
}

TEST_CASE("tp_probability mirrors the batched task posterior") {
    Rng rng(73);
    TaskModel model = random_model(rng, 4, 3, 2);
    std::vector<double> x = {0.3, -1.2, 0.8, 0.1};
    const std::vector<double> tp = tp_probability(model, x, 1e-6);
    Matrix batch(1, 4);
    std::copy(x.begin(), x.end(), batch.row_ptr(0));
    const std::vector<CilPrediction> preds = predict_batch(model, batch, PredictMode::no_wp, 1e-6);
    CHECK(testsupport::bits_equal(tp, preds[0].tp));
}

TEST_CASE("prediction on a model without trained tasks is rejected") {
    TaskModel model = tiny_model();
    CHECK_THROWS_AS(predict_cil(model, {1.0}, PredictMode::full, 1e-6), std::logic_error);

    // Stats missing for the second task: distance-based modes must refuse,
    // the stats-free mode must work.
    add_task(model, {0, 1}, {0.0, 0.0, 0.0}, {0.0, 0.0}, 0.0);
    model.stats.clear();
    CHECK_THROWS_AS(predict_cil(model, {1.0}, PredictMode::full, 1e-6), std::logic_error);
    CHECK_THROWS_AS(predict_cil(model, {1.0}, PredictMode::no_wp, 1e-6), std::logic_error);
    CHECK_NOTHROW(predict_cil(model, {1.0}, PredictMode::no_wp_no_md, 1e-6));
}
