#pragma once

#include "row/matrix.hpp"

#include <vector>

namespace row {

// Per-task feature statistics: class means and the shared task covariance
// (sum of per-class biased covariances, ridge-regularized), stored with its
// Cholesky factor so Mahalanobis distances reduce to triangular solves.
struct TaskStats {
    std::vector<std::vector<double>> means;  // one mean per local class
    Matrix cov;                              // regularized covariance
    Matrix chol;                             // lower-triangular L, cov = L * L^T
    double eps = 0.0;                        // ridge actually added

    int dim() const { return cov.rows; }
    int num_classes() const { return static_cast<int>(means.size()); }
};

// Builds stats from an explicit covariance (validated symmetric positive
// definite). fit_task_stats uses this after assembling the moments; tests
// use it to pin hand-crafted covariances.
TaskStats make_task_stats(std::vector<std::vector<double>> means, Matrix cov, double eps);

// class_features[c] holds one row per sample of local class c. The ridge is
// eps_scale * trace / dim, floored at eps_scale when the total scatter is
// zero so the covariance stays positive definite.
TaskStats fit_task_stats(const std::vector<Matrix>& class_features, double eps_scale);

// c_k(u) = max over classes of 1 / max(MD(u; mu_y, cov), delta), where MD is
// the Mahalanobis distance computed through the Cholesky factor.
double md_coefficient(const TaskStats& stats, const double* u, int dim, double delta);
double md_coefficient(const TaskStats& stats, const std::vector<double>& u, double delta);

} // namespace row
