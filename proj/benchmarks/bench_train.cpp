#include <benchmark/benchmark.h>

#include "kernelscope/autoencoder.hpp"
#include "kernelscope/initgen.hpp"

using namespace kscope;

namespace {

std::vector<PreprocessedFilter> batch7(std::size_t n) {
    SyntheticSpec s;
    s.count = n;
    s.seed = 5;
    return preprocess_corpus(sample_bank_corpus(default_template_bank(7), s).corpus, HyperplaneBasis(49)).filters;
}

}  // namespace

static void BM_Gradients(benchmark::State& state) {
    const auto model = init_model(7, default_hidden_dims(7), 1);
    const auto batch = batch7(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gradients(model, batch));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Gradients)->Arg(32)->Arg(256);

static void BM_TrainEpoch(benchmark::State& state) {
    const auto data = batch7(10000);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(train(init_model(7, default_hidden_dims(7), 1), data, cfg));
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);
