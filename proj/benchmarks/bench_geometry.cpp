#include <benchmark/benchmark.h>

#include "kernelscope/dogfamily.hpp"
#include "kernelscope/random.hpp"

using namespace kscope;

static void BM_Preprocess(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    const HyperplaneBasis basis(k * k);
    Rng rng(1);
    Vector raw(k * k);
    for (double& v : raw) v = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(preprocess(raw, basis));
}
BENCHMARK(BM_Preprocess)->Arg(3)->Arg(5)->Arg(7);

static void BM_NearestTemplate(benchmark::State& state) {
    const TemplateBank bank = default_template_bank(7);
    Rng rng(2);
    Vector raw(49);
    for (double& v : raw) v = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(nearest_template(raw, bank));
}
BENCHMARK(BM_NearestTemplate);
