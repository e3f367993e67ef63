#include <benchmark/benchmark.h>

#include "wtad/density_net.hpp"
#include "wtad/ocsvm.hpp"
#include "wtad/plant.hpp"

namespace {

wtad::Log make_log(std::int64_t ticks) {
    wtad::PlantConfig cfg = wtad::default_plant_config();
    cfg.tick_count = ticks;
    cfg.noise_std = 1.0;
    return wtad::simulate(cfg, {});
}

void bm_extract_windows(benchmark::State& state) {
    const wtad::Log log = make_log(2000);
    const int w = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto windows = wtad::extract_windows(log, w);
        benchmark::DoNotOptimize(windows);
    }
    state.SetItemsProcessed(state.iterations() * (log.size() - w + 1));
}
BENCHMARK(bm_extract_windows)->Arg(2)->Arg(4)->Arg(16);

void bm_rbf_gram(benchmark::State& state) {
    const wtad::Log log = make_log(static_cast<std::int64_t>(state.range(0)) + 3);
    const auto windows = wtad::extract_windows(log, 4);
    const long l = static_cast<long>(windows.size());
    for (auto _ : state) {
        Eigen::MatrixXd gram(l, l);
        for (long i = 0; i < l; ++i)
            for (long j = 0; j <= i; ++j) {
                const double k = wtad::rbf_kernel(
                    windows[static_cast<std::size_t>(i)].features,
                    windows[static_cast<std::size_t>(j)].features, 0.1);
                gram(i, j) = k;
                gram(j, i) = k;
            }
        benchmark::DoNotOptimize(gram);
    }
    state.SetItemsProcessed(state.iterations() * l * l);
}
BENCHMARK(bm_rbf_gram)->Arg(200)->Arg(500);

void bm_score_log(benchmark::State& state) {
    const wtad::Log raw = make_log(500);
    wtad::DensityNetConfig cfg;
    cfg.hidden_dim = static_cast<int>(state.range(0));
    cfg.seed = 7;
    const wtad::DensityNet net = wtad::init_net(cfg, raw.schema);
    const wtad::Log log = wtad::normalize(raw, wtad::compute_norm_stats(raw));
    for (auto _ : state) {
        auto trace = wtad::outlier_factors(net, log);
        benchmark::DoNotOptimize(trace);
    }
    state.SetItemsProcessed(state.iterations() * log.size());
}
BENCHMARK(bm_score_log)->Arg(32)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
