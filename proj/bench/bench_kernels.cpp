// Serial vs OpenMP kernel comparison: throughput side by side plus a
// bit-equality audit of the outputs. On a single-core host the speedup
// hovers around 1x; the point of the table is that the parallel path is
// never slower at the dispatch sizes and never changes a single bit.

#include "row/kernels.hpp"
#include "row/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace row;

namespace {

double time_seconds(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
           reps;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        worst = std::max(worst, std::fabs(a.data[i] - b.data[i]));
    return worst;
}

struct Case {
    const char* name;
    int m, k, n;
};

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp enabled, max threads %d\n\n", omp_get_max_threads());
#else
    std::printf("openmp not available; both columns run the serial code\n\n");
#endif

    const Case cases[] = {
        {"batch forward   64x16 * 16x64", 64, 16, 64},
        {"batch forward  256x64 * 64x128", 256, 64, 128},
        {"square         256x256 * 256x256", 256, 256, 256},
        {"wide grads     512x128 * 128x256", 512, 128, 256},
    };

    Rng rng(20240811);
    std::printf("%-36s %12s %12s %9s %10s\n", "case", "serial (ms)", "openmp (ms)", "speedup",
                "max |diff|");
    for (const Case& c : cases) {
        Matrix a(c.m, c.k);
        Matrix b(c.k, c.n);
        for (double& v : a.data) v = rng.uniform(-1.0, 1.0);
        for (double& v : b.data) v = rng.uniform(-1.0, 1.0);

        Matrix out_serial;
        Matrix out_omp;
        const int reps = std::max(1, static_cast<int>(2e7 / (static_cast<double>(c.m) * c.k * c.n)));
        const double ts = time_seconds([&] { kernels::matmul_serial(a, b, out_serial); }, reps);
        const double tp = time_seconds([&] { kernels::matmul_omp(a, b, out_omp); }, reps);
        std::printf("%-36s %12.3f %12.3f %8.2fx %10.3g\n", c.name, ts * 1e3, tp * 1e3, ts / tp,
                    max_abs_diff(out_serial, out_omp));
    }

    // Gradient-shaped kernels at one representative size.
    {
        Matrix a(256, 96);
        Matrix b(256, 64);
        for (double& v : a.data) v = rng.uniform(-1.0, 1.0);
        for (double& v : b.data) v = rng.uniform(-1.0, 1.0);
        Matrix at_serial, at_omp;
        const double ts = time_seconds([&] { kernels::matmul_at_b_serial(a, b, at_serial); }, 50);
        const double tp = time_seconds([&] { kernels::matmul_at_b_omp(a, b, at_omp); }, 50);
        std::printf("%-36s %12.3f %12.3f %8.2fx %10.3g\n", "a^T b          256x96 ^T 256x64",
                    ts * 1e3, tp * 1e3, ts / tp, max_abs_diff(at_serial, at_omp));

        Matrix c(256, 96);
        Matrix d(64, 96);
        for (double& v : c.data) v = rng.uniform(-1.0, 1.0);
        for (double& v : d.data) v = rng.uniform(-1.0, 1.0);
        Matrix bt_serial, bt_omp;
        const double ts2 = time_seconds([&] { kernels::matmul_a_bt_serial(c, d, bt_serial); }, 50);
        const double tp2 = time_seconds([&] { kernels::matmul_a_bt_omp(c, d, bt_omp); }, 50);
        std::printf("%-36s %12.3f %12.3f %8.2fx %10.3g\n", "a b^T          256x96 * 64x96^T",
                    ts2 * 1e3, tp2 * 1e3, ts2 / tp2, max_abs_diff(bt_serial, bt_omp));

        std::vector<double> cs_serial, cs_omp;
        const double ts3 = time_seconds([&] { kernels::colsum_serial(a, cs_serial); }, 200);
        const double tp3 = time_seconds([&] { kernels::colsum_omp(a, cs_omp); }, 200);
        double worst = 0.0;
        for (std::size_t i = 0; i < cs_serial.size(); ++i)
            worst = std::max(worst, std::fabs(cs_serial[i] - cs_omp[i]));
        std::printf("%-36s %12.3f %12.3f %8.2fx %10.3g\n", "colsum         256x96", ts3 * 1e3,
                    tp3 * 1e3, ts3 / tp3, worst);
    }

    std::printf("\nall max |diff| values must read exactly 0.\n");
    return 0;
}
