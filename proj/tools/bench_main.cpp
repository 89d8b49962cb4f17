// Benchmarks the scenario batch runner: serial loop vs. the OpenMP
// schedule used by compare_controllers, verifying along the way that the
// two produce identical traces.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "rmpc/sim.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double max_trace_deviation(const std::vector<rmpc::ScenarioResult>& a,
                           const std::vector<rmpc::ScenarioResult>& b) {
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < a[i].u.size(); ++k) {
            dev = std::max(dev, std::abs(a[i].u[k] - b[i].u[k]));
            dev = std::max(dev, std::abs(a[i].y_true[k] - b[i].y_true[k]));
        }
    }
    return dev;
}

}  // namespace

int main(int argc, char** argv) {
    int n_seeds = 8;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--seeds" && i + 1 < argc) {
            n_seeds = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--seeds N]\n", argv[0]);
            return 2;
        }
    }

    std::vector<rmpc::Scenario> batch;
    for (int s = 1; s <= n_seeds; ++s) {
        auto suite = rmpc::benchmark_suite(rmpc::PlantKind::NonlinearPerturbed,
                                           static_cast<std::uint64_t>(s));
        batch.insert(batch.end(), suite.begin(), suite.end());
    }
    std::printf("batch: %zu closed-loop runs (%d seeds x 3 controllers)\n", batch.size(),
                n_seeds);

    auto t0 = std::chrono::steady_clock::now();
    const auto serial = rmpc::run_batch(batch, false);
    const double t_serial = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto parallel = rmpc::run_batch(batch, true);
    const double t_parallel = seconds_since(t0);

#if defined(_OPENMP)
    std::printf("threads:  %d\n", omp_get_max_threads());
#else
    std::printf("threads:  1 (built without OpenMP)\n");
#endif
    std::printf("serial:   %.3f s\n", t_serial);
    std::printf("parallel: %.3f s\n", t_parallel);
    std::printf("speedup:  %.2fx\n", t_serial / t_parallel);

    const double dev = max_trace_deviation(serial, parallel);
    std::printf("max serial/parallel trace deviation: %.3g\n", dev);
    if (dev != 0.0) {
        std::printf("FAILED: parallel batch is not identical to the serial reference\n");
        return 1;
    }
    std::printf("PASSED\n");
    return 0;
}
