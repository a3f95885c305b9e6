// Compares the serial reference implementations against the
// OpenMP-parallel kernels and reports throughput for both.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "ciqa/datasets.hpp"
#include "ciqa/eval.hpp"
#include "ciqa/fdct.hpp"
#include "ciqa/features.hpp"
#include "ciqa/parallel.hpp"
#include "ciqa/reference.hpp"
#include "ciqa/svm.hpp"

using namespace ciqa;
using clock_type = std::chrono::steady_clock;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
    fn();  // warm up
    const auto t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto dt = std::chrono::duration<double, std::milli>(clock_type::now() - t0);
    return dt.count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %.2fx\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
    const fdct::CurveletPlan plan(fdct::CurveletConfig{}, kBlockSize);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uni(0.0, 255.0);

#ifdef _OPENMP
    const int max_workers = par::effective_workers();
#else
    const int max_workers = 1;
#endif
    std::printf("workers available: %d\n\n", max_workers);

    // fdct forward on one block: wedge loop threading
    {
        std::vector<double> block(kBlockSize * kBlockSize);
        for (auto& v : block) v = uni(rng);
        par::set_workers(1);
        const double serial = time_ms(10, [&] { plan.forward(block); });
        par::set_workers(max_workers);
        const double parallel = time_ms(10, [&] { plan.forward(block); });
        report("fdct forward 256x256", serial, parallel);
    }

    // whole-image feature extraction: serial reference vs block-parallel
    {
        const auto bases = data::make_base_images(1, 768, 7);
        par::set_workers(1);
        const double serial =
            time_ms(3, [&] { ref::extract_image_serial(bases[0], plan); });
        par::set_workers(max_workers);
        const double parallel = time_ms(3, [&] { feat::extract_image(bases[0], plan); });
        report("extract_image 768x768", serial, parallel);

        // equivalence spot check
        par::set_workers(max_workers);
        const auto a = feat::extract_image(bases[0], plan);
        const auto b = ref::extract_image_serial(bases[0], plan);
        for (int i = 0; i < feat::kFeatureCount; ++i)
            if (a[i] != b[i]) {
                std::printf("MISMATCH in feature %d\n", i);
                return 1;
            }
    }

    // RBF kernel matrix: row threading
    {
        std::vector<std::vector<double>> x(600, std::vector<double>(11));
        for (auto& row : x)
            for (auto& v : row) v = uni(rng);
        par::set_workers(1);
        const double serial = time_ms(5, [&] { svm::rbf_kernel_matrix(x, 0.25); });
        par::set_workers(max_workers);
        const double parallel = time_ms(5, [&] { svm::rbf_kernel_matrix(x, 0.25); });
        report("rbf kernel matrix 600x600", serial, parallel);
    }

    // rank correlation: n log n path vs the all-pairs reference
    {
        const int n = 20000;
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = uni(rng);
        for (auto& v : y) v = uni(rng);
        const double quad = time_ms(1, [&] { ref::kendall_allpairs(x, y); });
        const double fast = time_ms(1, [&] { eval::krocc(x, y); });
        report("kendall tau n=20000", quad, fast);
    }

    par::set_workers(0);
    return 0;
}
