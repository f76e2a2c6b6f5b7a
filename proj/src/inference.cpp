#include "row/inference.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace row {

namespace {

void check_model(const TaskModel& model, bool needs_stats) {
    if (model.num_tasks() == 0) throw std::logic_error("predict: model has no trained tasks");
    if (model.heads.size() != model.tasks.size())
        throw std::logic_error("predict: head count does not match trained tasks");
    if (needs_stats && model.stats.size() != model.tasks.size())
        throw std::logic_error("predict: distance statistics missing for some tasks");
}

} // namespace

std::vector<CilPrediction> predict_batch(const TaskModel& model, const Matrix& x, PredictMode mode,
                                         double delta) {
    const bool needs_md = mode != PredictMode::no_wp_no_md;
    check_model(model, needs_md);
    const int K = model.num_tasks();
    const int n = x.rows;

    // Per-task batched passes under each task's stored binarized mask.
    std::vector<Matrix> ood_logits(static_cast<std::size_t>(K));
    std::vector<Matrix> ood_soft(static_cast<std::size_t>(K));
    std::vector<Matrix> wp_soft(static_cast<std::size_t>(K));
    std::vector<std::vector<double>> coeff(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const TrainedTask& task = model.tasks[static_cast<std::size_t>(k)];
        const Matrix features = forward(model.net, x, &task.mask, nullptr);
        ood_logits[static_cast<std::size_t>(k)] =
            head_forward(model.heads[static_cast<std::size_t>(k)].ood, features);
        ood_soft[static_cast<std::size_t>(k)] = softmax_rows(ood_logits[static_cast<std::size_t>(k)]);
        if (mode == PredictMode::full)
            wp_soft[static_cast<std::size_t>(k)] =
                softmax_rows(head_forward(model.heads[static_cast<std::size_t>(k)].wp, features));
        if (needs_md) {
            std::vector<double>& c = coeff[static_cast<std::size_t>(k)];
            c.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                c[static_cast<std::size_t>(i)] =
                    md_coefficient(model.stats[static_cast<std::size_t>(k)], features.row_ptr(i),
                                   features.cols, delta);
        }
    }

    std::vector<CilPrediction> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        CilPrediction& pred = out[static_cast<std::size_t>(i)];
        pred.tp.resize(static_cast<std::size_t>(K));
        pred.wp.resize(static_cast<std::size_t>(K));
        pred.table.resize(static_cast<std::size_t>(K));

        // Task scores: distance coefficient times the maximum softmax
        // probability over the task's own classes (the reject logit stays in
        // the softmax denominator but is excluded from the max).
        double z = 0.0;
        for (int k = 0; k < K; ++k) {
            const int num_classes = static_cast<int>(model.tasks[static_cast<std::size_t>(k)].classes.size());
            const double* soft = ood_soft[static_cast<std::size_t>(k)].row_ptr(i);
            double msp = 0.0;
            for (int j = 0; j < num_classes; ++j) msp = std::max(msp, soft[j]);
            double raw = msp;
            if (needs_md) raw *= coeff[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            pred.tp[static_cast<std::size_t>(k)] = raw;
            z += raw;
        }
        for (double& v : pred.tp) v /= z;

        for (int k = 0; k < K; ++k) {
            const int num_classes = static_cast<int>(model.tasks[static_cast<std::size_t>(k)].classes.size());
            std::vector<double>& wp_row = pred.wp[static_cast<std::size_t>(k)];
            wp_row.resize(static_cast<std::size_t>(num_classes));
            if (mode == PredictMode::full) {
                const double* soft = wp_soft[static_cast<std::size_t>(k)].row_ptr(i);
                for (int j = 0; j < num_classes; ++j) wp_row[static_cast<std::size_t>(j)] = soft[j];
            } else {
                // Within-task row from the OOD head's own classes, renormalized.
                const double* soft = ood_soft[static_cast<std::size_t>(k)].row_ptr(i);
                double sum = 0.0;
                for (int j = 0; j < num_classes; ++j) sum += soft[j];
                for (int j = 0; j < num_classes; ++j)
                    wp_row[static_cast<std::size_t>(j)] = soft[j] / sum;
            }
            std::vector<double>& table_row = pred.table[static_cast<std::size_t>(k)];
            table_row.resize(static_cast<std::size_t>(num_classes));
            for (int j = 0; j < num_classes; ++j)
                table_row[static_cast<std::size_t>(j)] =
                    wp_row[static_cast<std::size_t>(j)] * pred.tp[static_cast<std::size_t>(k)];
        }

        // Decision. Ties break toward the lowest (task, class) pair because
        // only strictly greater scores displace the incumbent.
        double best = 0.0;
        bool first = true;
        for (int k = 0; k < K; ++k) {
            const int num_classes = static_cast<int>(model.tasks[static_cast<std::size_t>(k)].classes.size());
            for (int j = 0; j < num_classes; ++j) {
                const double score = mode == PredictMode::full
                                         ? pred.table[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]
                                         : ood_logits[static_cast<std::size_t>(k)](i, j);
                if (first || score > best) {
                    best = score;
                    pred.task = k;
                    pred.local_class = j;
                    first = false;
                }
            }
        }
        pred.global_label =
            model.tasks[static_cast<std::size_t>(pred.task)].classes[static_cast<std::size_t>(pred.local_class)];
    }
    return out;
}

std::vector<double> tp_probability(const TaskModel& model, const std::vector<double>& x,
                                   double delta) {
    Matrix batch(1, static_cast<int>(x.size()));
    std::copy(x.begin(), x.end(), batch.row_ptr(0));
    return predict_batch(model, batch, PredictMode::no_wp, delta).front().tp;
}

CilPrediction predict_cil(const TaskModel& model, const std::vector<double>& x, PredictMode mode,
                          double delta) {
    Matrix batch(1, static_cast<int>(x.size()));
    std::copy(x.begin(), x.end(), batch.row_ptr(0));
    return std::move(predict_batch(model, batch, mode, delta).front());
}

double cil_accuracy(const TaskModel& model, const std::vector<Sample>& samples, PredictMode mode,
                    double delta) {
    if (samples.empty()) throw std::invalid_argument("cil_accuracy: no samples");
    const Matrix x = to_matrix(samples, model.net.input_dim());
    const std::vector<CilPrediction> preds = predict_batch(model, x, mode, delta);
    int correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (preds[i].global_label == samples[i].label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double til_accuracy(const TaskModel& model, int task_index, const std::vector<Sample>& samples) {
    if (task_index < 0 || task_index >= model.num_tasks())
        throw std::invalid_argument("til_accuracy: task " + std::to_string(task_index) +
                                    " not trained");
    if (samples.empty()) throw std::invalid_argument("til_accuracy: no samples");
    const TrainedTask& task = model.tasks[static_cast<std::size_t>(task_index)];

    const Matrix x = to_matrix(samples, model.net.input_dim());
    const Matrix features = forward(model.net, x, &task.mask, nullptr);
    const Matrix logits = head_forward(model.heads[static_cast<std::size_t>(task_index)].wp, features);

    int correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double* r = logits.row_ptr(static_cast<int>(i));
        int arg = 0;
        for (int j = 1; j < logits.cols; ++j)
            if (r[j] > r[arg]) arg = j;
        if (task.classes[static_cast<std::size_t>(arg)] == samples[i].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

} // namespace row
