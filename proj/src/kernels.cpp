#include "row/kernels.hpp"

#include <stdexcept>

namespace row::kernels {

namespace {

void check_matmul(int ak, int bk) {
    if (ak != bk)
        throw std::invalid_argument("matmul: inner dimensions " + std::to_string(ak) + " vs " +
                                    std::to_string(bk));
}

// Below this many output elements the OpenMP fork costs more than it saves.
constexpr long long kParallelGrain = 4096;

} // namespace

void matmul_serial(const Matrix& a, const Matrix& b, Matrix& c) {
    check_matmul(a.cols, b.rows);
    c = Matrix(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* ar = a.row_ptr(i);
        double* cr = c.row_ptr(i);
        for (int j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += ar[k] * b(k, j);
            cr[j] = acc;
        }
    }
}

void matmul_omp(const Matrix& a, const Matrix& b, Matrix& c) {
    check_matmul(a.cols, b.rows);
    c = Matrix(a.rows, b.cols);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i) {
        const double* ar = a.row_ptr(i);
        double* cr = c.row_ptr(i);
        for (int j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += ar[k] * b(k, j);
            cr[j] = acc;
        }
    }
}

void matmul_at_b_serial(const Matrix& a, const Matrix& b, Matrix& c) {
    check_matmul(a.rows, b.rows);
    c = Matrix(a.cols, b.cols);
    for (int i = 0; i < a.cols; ++i) {
        double* cr = c.row_ptr(i);
        for (int j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.rows; ++k) acc += a(k, i) * b(k, j);
            cr[j] = acc;
        }
    }
}

void matmul_at_b_omp(const Matrix& a, const Matrix& b, Matrix& c) {
    check_matmul(a.rows, b.rows);
    c = Matrix(a.cols, b.cols);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.cols; ++i) {
        double* cr = c.row_ptr(i);
        for (int j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.rows; ++k) acc += a(k, i) * b(k, j);
            cr[j] = acc;
        }
    }
}

void matmul_a_bt_serial(const Matrix& a, const Matrix& b, Matrix& c) {
    check_matmul(a.cols, b.cols);
    c = Matrix(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        const double* ar = a.row_ptr(i);
        double* cr = c.row_ptr(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* br = b.row_ptr(j);
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
            cr[j] = acc;
        }
    }
}

void matmul_a_bt_omp(const Matrix& a, const Matrix& b, Matrix& c) {
    check_matmul(a.cols, b.cols);
    c = Matrix(a.rows, b.rows);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i) {
        const double* ar = a.row_ptr(i);
        double* cr = c.row_ptr(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* br = b.row_ptr(j);
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
            cr[j] = acc;
        }
    }
}

void colsum_serial(const Matrix& m, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(m.cols), 0.0);
    for (int j = 0; j < m.cols; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m.rows; ++i) acc += m(i, j);
        out[static_cast<std::size_t>(j)] = acc;
    }
}

void colsum_omp(const Matrix& m, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(m.cols), 0.0);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < m.cols; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m.rows; ++i) acc += m(i, j);
        out[static_cast<std::size_t>(j)] = acc;
    }
}

void matmul(const Matrix& a, const Matrix& b, Matrix& c) {
    if (static_cast<long long>(a.rows) * b.cols * a.cols >= kParallelGrain)
        matmul_omp(a, b, c);
    else
        matmul_serial(a, b, c);
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& c) {
    if (static_cast<long long>(a.cols) * b.cols * a.rows >= kParallelGrain)
        matmul_at_b_omp(a, b, c);
    else
        matmul_at_b_serial(a, b, c);
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& c) {
    if (static_cast<long long>(a.rows) * b.rows * a.cols >= kParallelGrain)
        matmul_a_bt_omp(a, b, c);
    else
        matmul_a_bt_serial(a, b, c);
}

void colsum(const Matrix& m, std::vector<double>& out) {
    if (static_cast<long long>(m.rows) * m.cols >= kParallelGrain)
        colsum_omp(m, out);
    else
        colsum_serial(m, out);
}

} // namespace row::kernels
