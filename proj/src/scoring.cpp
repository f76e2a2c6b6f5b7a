#include "row/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace row {

namespace {

// Lower-triangular Cholesky factorization; throws when the matrix is not
// positive definite.
Matrix cholesky(const Matrix& a) {
    const int n = a.rows;
    Matrix l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double acc = a(i, j);
            for (int k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
            if (i == j) {
                if (acc <= 0.0)
                    throw std::runtime_error("cholesky: matrix not positive definite (pivot " +
                                             std::to_string(i) + ")");
                l(i, i) = std::sqrt(acc);
            } else {
                l(i, j) = acc / l(j, j);
            }
        }
    }
    return l;
}

} // namespace

TaskStats make_task_stats(std::vector<std::vector<double>> means, Matrix cov, double eps) {
    if (means.empty()) throw std::invalid_argument("make_task_stats: no class means");
    if (cov.rows != cov.cols) throw std::invalid_argument("make_task_stats: covariance not square");
    for (const std::vector<double>& m : means)
        if (static_cast<int>(m.size()) != cov.rows)
            throw std::invalid_argument("make_task_stats: mean dimension " +
                                        std::to_string(m.size()) + " vs covariance " +
                                        std::to_string(cov.rows));
    for (int i = 0; i < cov.rows; ++i)
        for (int j = 0; j < i; ++j)
            if (cov(i, j) != cov(j, i))
                throw std::invalid_argument("make_task_stats: covariance not symmetric");
    require_finite(cov, "make_task_stats covariance");

    TaskStats stats;
    stats.means = std::move(means);
    stats.chol = cholesky(cov);
    stats.cov = std::move(cov);
    stats.eps = eps;
    return stats;
}

TaskStats fit_task_stats(const std::vector<Matrix>& class_features, double eps_scale) {
    if (class_features.empty()) throw std::invalid_argument("fit_task_stats: no classes");
    if (eps_scale <= 0.0) throw std::invalid_argument("fit_task_stats: eps_scale must be positive");
    const int dim = class_features.front().cols;
    if (dim <= 0) throw std::invalid_argument("fit_task_stats: empty feature dimension");

    std::vector<std::vector<double>> means;
    Matrix cov(dim, dim);
    for (std::size_t c = 0; c < class_features.size(); ++c) {
        const Matrix& f = class_features[c];
        if (f.cols != dim)
            throw std::invalid_argument("fit_task_stats: class " + std::to_string(c) +
                                        " feature dim " + std::to_string(f.cols) + " vs " +
                                        std::to_string(dim));
        if (f.rows < 2)
            throw std::invalid_argument("fit_task_stats: class " + std::to_string(c) + " has " +
                                        std::to_string(f.rows) + " samples (need >= 2)");
        require_finite(f, "fit_task_stats features");

        std::vector<double> mu(static_cast<std::size_t>(dim), 0.0);
        for (int r = 0; r < f.rows; ++r) {
            const double* row = f.row_ptr(r);
            for (int d = 0; d < dim; ++d) mu[static_cast<std::size_t>(d)] += row[d];
        }
        for (double& v : mu) v /= static_cast<double>(f.rows);

        // Biased per-class covariance (divide by the class count), summed
        // across classes into the task covariance.
        const double inv_n = 1.0 / static_cast<double>(f.rows);
        for (int r = 0; r < f.rows; ++r) {
            const double* row = f.row_ptr(r);
            for (int i = 0; i < dim; ++i) {
                const double di = row[i] - mu[static_cast<std::size_t>(i)];
                for (int j = 0; j <= i; ++j)
                    cov(i, j) += inv_n * di * (row[j] - mu[static_cast<std::size_t>(j)]);
            }
        }
        means.push_back(std::move(mu));
    }
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < i; ++j) cov(j, i) = cov(i, j);

    double trace = 0.0;
    for (int i = 0; i < dim; ++i) trace += cov(i, i);
    double eps = eps_scale * trace / static_cast<double>(dim);
    if (!(eps > 0.0)) eps = eps_scale;  // zero total scatter: absolute floor keeps cov PD
    for (int i = 0; i < dim; ++i) cov(i, i) += eps;

    return make_task_stats(std::move(means), std::move(cov), eps);
}

double md_coefficient(const TaskStats& stats, const double* u, int dim, double delta) {
    if (dim != stats.dim())
        throw std::invalid_argument("md_coefficient: dim " + std::to_string(dim) + " vs stats " +
                                    std::to_string(stats.dim()));
    if (delta <= 0.0) throw std::invalid_argument("md_coefficient: delta must be positive");

    double best = 0.0;
    std::vector<double> w(static_cast<std::size_t>(dim));
    for (const std::vector<double>& mu : stats.means) {
        // Solve L w = (u - mu); then MD^2 = |w|^2.
        for (int i = 0; i < dim; ++i) {
            double acc = u[i] - mu[static_cast<std::size_t>(i)];
            const double* lr = stats.chol.row_ptr(i);
            for (int j = 0; j < i; ++j) acc -= lr[j] * w[static_cast<std::size_t>(j)];
            w[static_cast<std::size_t>(i)] = acc / lr[i];
        }
        double md2 = 0.0;
        for (double v : w) md2 += v * v;
        const double md = std::sqrt(md2);
        best = std::max(best, 1.0 / std::max(md, delta));
    }
    return best;
}

double md_coefficient(const TaskStats& stats, const std::vector<double>& u, double delta) {
    return md_coefficient(stats, u.data(), static_cast<int>(u.size()), delta);
}

} // namespace row
