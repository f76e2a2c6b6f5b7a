#pragma once

#include "row/trainer.hpp"

#include <vector>

namespace row {

// full: within-task probabilities from the WP head, task probabilities from
//   the distance-weighted OOD score, decision by the product table.
// no_wp: decision by argmax over the concatenated in-distribution logits of
//   the OOD heads; the reported within-task rows come from the OOD softmax.
// no_wp_no_md: same decision; the reported task probabilities additionally
//   drop the distance coefficient, so no fitted statistics are needed.
enum class PredictMode { full, no_wp, no_wp_no_md };

struct CilPrediction {
    std::vector<std::vector<double>> wp;     // per-task within-task rows
    std::vector<double> tp;                  // per-task probabilities, sums to 1
    std::vector<std::vector<double>> table;  // joint: table[k][j] = wp[k][j] * tp[k]
    int task = -1;
    int local_class = -1;
    int global_label = -1;
};

// Task probabilities for one instance: raw_k = c_k(f(x,k)) * max over the
// task's own classes of softmax(OOD logits), normalized across tasks.
std::vector<double> tp_probability(const TaskModel& model, const std::vector<double>& x,
                                   double delta);

CilPrediction predict_cil(const TaskModel& model, const std::vector<double>& x, PredictMode mode,
                          double delta);

// Batched variant; one prediction per row of x.
std::vector<CilPrediction> predict_batch(const TaskModel& model, const Matrix& x, PredictMode mode,
                                         double delta);

// Fraction of samples whose predicted global label matches.
double cil_accuracy(const TaskModel& model, const std::vector<Sample>& samples, PredictMode mode,
                    double delta);

// Task-incremental accuracy: the task id is given, prediction is the WP
// argmax under that task's stored mask.
double til_accuracy(const TaskModel& model, int task_index, const std::vector<Sample>& samples);

} // namespace row
