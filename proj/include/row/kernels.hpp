#pragma once

#include "row/matrix.hpp"

#include <vector>

namespace row::kernels {

// Dense kernels in two flavors: a plain serial reference and an OpenMP
// variant parallelized over output elements. Each output element is a
// serial dot product in both flavors, so results are bit-identical
// regardless of thread count. The unit tests assert that equality and the
// bench target compares throughput.

// c = a * b. a: [m x k], b: [k x n], c: [m x n].
void matmul_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_omp(const Matrix& a, const Matrix& b, Matrix& c);

// c = a^T * b. a: [k x m], b: [k x n], c: [m x n]. (Weight gradients.)
void matmul_at_b_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_at_b_omp(const Matrix& a, const Matrix& b, Matrix& c);

// c = a * b^T. a: [m x k], b: [n x k], c: [m x n]. (Input gradients.)
void matmul_a_bt_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_a_bt_omp(const Matrix& a, const Matrix& b, Matrix& c);

// out[j] = sum over rows of m(:, j). (Bias gradients.)
void colsum_serial(const Matrix& m, std::vector<double>& out);
void colsum_omp(const Matrix& m, std::vector<double>& out);

// Dispatchers used by the library; they pick the OpenMP variant when the
// problem is large enough to amortize the fork overhead. Both variants
// produce identical bits, so the dispatch threshold cannot change results.
void matmul(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& c);
void colsum(const Matrix& m, std::vector<double>& out);

} // namespace row::kernels
