#include <benchmark/benchmark.h>

#include "kernelscope/classifier.hpp"
#include "kernelscope/initgen.hpp"

using namespace kscope;

namespace {

const AutoencoderModel& model7() {
    static const AutoencoderModel m = init_model(7, default_hidden_dims(7), 1);
    return m;
}

Corpus corpus7(std::size_t n) {
    SyntheticSpec s;
    s.count = n;
    s.seed = 2;
    return sample_bank_corpus(default_template_bank(7), s).corpus;
}

}  // namespace

static void BM_BuildCodebook(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(build_codebook(model7(), static_cast<std::size_t>(state.range(0))));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildCodebook)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_ClassifyFilter(benchmark::State& state) {
    const Codebook cb = build_codebook(model7(), static_cast<std::size_t>(state.range(0)));
    const LabelMap labels({{0.0, 1.0, PatternClass::OnCentre}});
    const HyperplaneBasis basis(49);
    const PreprocessedFilter f = preprocess(weights_f64(corpus7(1)[0]), basis);
    for (auto _ : state) benchmark::DoNotOptimize(classify_filter(f, cb, labels, 0.3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClassifyFilter)->Arg(1000)->Arg(10000);

static void BM_ClassifyCorpus(benchmark::State& state) {
    const Codebook cb = build_codebook(model7(), kDefaultCodebookSize);
    const LabelMap labels({{0.0, 1.0, PatternClass::OnCentre}});
    const Corpus c = corpus7(1000);
    for (auto _ : state)
        benchmark::DoNotOptimize(classify_corpus(c, cb, labels, 0.3, static_cast<unsigned>(state.range(0))));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.size()));
}
BENCHMARK(BM_ClassifyCorpus)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

static void BM_KMeans(benchmark::State& state) {
    const Corpus c = [] {
        InitSpec s;
        s.kernel_size = 3;
        s.layer_channels = {2000};
        s.sigma1_range = {0.5, 1.2};
        s.sigma_ratio = 1.5;
        s.seed = 3;
        return generate_init(s);
    }();
    std::vector<Vector> pts;
    for (const auto& r : c.records()) pts.push_back(minmax_encode(weights_f64(r)));
    KMeansOptions opt;
    opt.seed = 4;
    for (auto _ : state) benchmark::DoNotOptimize(kmeans_fit(pts, opt));
}
BENCHMARK(BM_KMeans)->Unit(benchmark::kMillisecond);
