// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kernelscope/analytics.hpp"
#include "kernelscope/autoencoder.hpp"
#include "kernelscope/classifier.hpp"
#include "kernelscope/dogfamily.hpp"
#include "kernelscope/error.hpp"
#include "kernelscope/geometry.hpp"
#include "kernelscope/initgen.hpp"
#include "kernelscope/random.hpp"
#include "kernelscope/spectrum.hpp"
#include "kernelscope/text.hpp"
#include "oracles.hpp"

using namespace kscope;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240607;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const std::string& id, const std::string& title, const Outcome& o, double seconds) {
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << title << "  [" << o.detail << "; "
              << format_number(seconds, 3) << " s]" << std::endl;
    if (!o.pass) ++failures;
}

std::vector<std::string> selected;

void run(const std::string& id, const std::string& title, const std::function<Outcome()>& body) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, title, o, s);
}

std::string pct(double v) { return format_number(v, 4) + "%"; }

// ---- A1 / A8 shared pipeline -------------------------------------------

struct Pipeline {
    GeneratedKernels data;
    TrainResult trained;
    std::vector<SpectrumSample> spectrum;
    LabelMap labels;
    std::vector<Assignment> assignments;
    double train_seconds = 0.0;
};

const TemplateBank& bank7() {
    static const TemplateBank bank = default_template_bank(7);
    return bank;
}

Pipeline& pipeline() {
    static Pipeline p = [] {
        Pipeline p;
        SyntheticSpec spec;
        spec.count = 10000;
        spec.snr = 10.0;
        spec.seed = kSeed;
        p.data = sample_bank_corpus(bank7(), spec);

        TrainConfig cfg;
        cfg.epochs = 200;
        cfg.seed = kSeed;
        const auto t0 = std::chrono::steady_clock::now();
        p.trained = train(init_model(7, default_hidden_dims(7), kSeed), p.data.corpus, cfg);
        p.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        p.spectrum = sample_spectrum(p.trained.model, kDefaultSpectrumSamples);
        annotate(p.spectrum, bank7());
        p.labels = suggest_labels(p.spectrum, bank7());
        const Codebook cb = build_codebook(p.trained.model);
        p.assignments = classify_corpus(p.data.corpus, cb, p.labels, 0.3);
        return p;
    }();
    return p;
}

Outcome a1() {
    Pipeline& p = pipeline();
    const double clustered = clustered_percentage(p.assignments);
    std::size_t named = 0, agree = 0;
    for (std::size_t i = 0; i < p.assignments.size(); ++i) {
        const Assignment& a = p.assignments[i];
        if (a.cls == PatternClass::Other) continue;
        ++named;
        if (nearest_template(weights_f64(p.data.corpus[i]), bank7()).cls == a.cls) ++agree;
    }
    const double agreement = named ? 100.0 * static_cast<double>(agree) / static_cast<double>(named) : 0.0;
    const double final_loss = p.trained.loss_history.back();
    std::ostringstream d;
    d << "clustered " << pct(clustered) << ", oracle agreement " << pct(agreement) << ", final loss "
      << format_number(final_loss, 4) << ", training " << format_number(p.train_seconds, 3) << " s";
    return {clustered >= 90.0 && agreement >= 90.0 && p.train_seconds <= 600.0, d.str()};
}

// ---- A2 ------------------------------------------------------------------

Outcome a2() {
    double worst = 0.0;
    std::size_t checked = 0;
    const HyperplaneBasis basis(49);
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
        Rng rng(derive_seed(kSeed, 2, trial));
        const AutoencoderModel model = init_model(7, default_hidden_dims(7), derive_seed(kSeed, 20, trial));
        std::vector<PreprocessedFilter> batch;
        while (batch.size() < 16) {
            Vector raw(49);
            for (double& v : raw) v = rng.normal();
            batch.push_back(preprocess(raw, basis, batch.size()));
        }
        const Gradients g = gradients(model, batch);
        const std::size_t np = parameter_count(model);
        for (int c = 0; c < 100; ++c) {
            const std::size_t idx = rng.below(np);
            const double err = oracle::gradient_rel_error(parameter(g, idx), oracle::fd_gradient(model, batch, idx));
            worst = std::max(worst, err);
            ++checked;
        }
    }
    return {worst < 1e-4, std::to_string(checked) + " coordinates, worst relative error " + format_number(worst, 3)};
}

// ---- A3 ------------------------------------------------------------------

Outcome a3() {
    double round_trip = 0.0, invariance = 0.0;
    for (int k : {3, 5, 7}) {
        const std::size_t n = static_cast<std::size_t>(k * k);
        const HyperplaneBasis basis(n);
        Rng rng(derive_seed(kSeed, 3, static_cast<std::uint64_t>(k)));
        for (int i = 0; i < 1000; ++i) {
            Vector raw(n);
            for (double& v : raw) v = rng.uniform(-1.0, 1.0) + 0.3;
            const Vector cn = normalize(center(raw));
            const Vector back = basis.from_hyperplane(basis.to_hyperplane(cn));
            for (std::size_t j = 0; j < n; ++j) round_trip = std::max(round_trip, std::abs(back[j] - cn[j]));

            Vector other(n);
            for (double& v : other) v = rng.normal();
            const double alpha = std::exp(rng.uniform(-3.0, 3.0));
            const double beta = rng.uniform(-10.0, 10.0);
            Vector affine(n);
            for (std::size_t j = 0; j < n; ++j) affine[j] = alpha * raw[j] + beta;
            invariance =
                std::max(invariance, std::abs(mc_cosine_dissim(affine, other) - mc_cosine_dissim(raw, other)));
        }
    }
    return {round_trip < 1e-10 && invariance < 1e-10,
            "round-trip " + format_number(round_trip, 3) + ", affine invariance " + format_number(invariance, 3)};
}

// ---- A4 ------------------------------------------------------------------

Outcome a4() {
    bool ok = true;
    std::string why;
    double fd_err = 0.0;
    for (int size : {3, 5, 7, 9}) {
        for (double s1 : {0.5, 0.8, 1.2}) {
            for (Polarity pol : {Polarity::On, Polarity::Off}) {
                const TemplateSpec equal{Family::Dog, pol, s1, s1, size};
                for (double v : raw_dog(equal)) {
                    if (v != 0.0) {
                        ok = false;
                        why = "sigma1 == sigma2 gave a non-zero entry";
                    }
                }
                const TemplateSpec spec{Family::Dog, pol, s1, 2.0 * s1, size};
                for (Axis axis : {Axis::X, Axis::Y}) {
                    const Vector d = raw_dog_derivative(spec, DerivativeOrder::First, axis);
                    if (oracle::mirror_pair_sum(d, size, axis) != 0.0) {
                        ok = false;
                        why = "first derivative sum is not exactly zero";
                    }
                    for (int r = 0; r < size; ++r) {
                        for (int c = 0; c < size; ++c) {
                            const int mr = axis == Axis::Y ? size - 1 - r : r;
                            const int mc = axis == Axis::X ? size - 1 - c : c;
                            if (d[static_cast<std::size_t>(r * size + c)] !=
                                -d[static_cast<std::size_t>(mr * size + mc)]) {
                                ok = false;
                                why = "first derivative is not antisymmetric";
                            }
                        }
                    }
                }
                const std::pair<DerivativeOrder, Axis> kinds[] = {
                    {DerivativeOrder::First, Axis::X},  {DerivativeOrder::First, Axis::Y},
                    {DerivativeOrder::Second, Axis::X}, {DerivativeOrder::Second, Axis::Y},
                    {DerivativeOrder::Second, Axis::XY}};
                for (const auto& [order, axis] : kinds) {
                    const Vector analytic = raw_dog_derivative(spec, order, axis);
                    const Vector numeric = oracle::fd_dog_derivative(spec, order, axis);
                    for (std::size_t j = 0; j < analytic.size(); ++j)
                        fd_err = std::max(fd_err, std::abs(analytic[j] - numeric[j]));
                }
            }
        }
    }
    if (fd_err >= 1e-6) {
        ok = false;
        why = "finite-difference mismatch";
    }
    return {ok, (why.empty() ? std::string("identities hold") : why) + ", worst FD error " + format_number(fd_err, 3)};
}

// ---- A5 ------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome a5() {
    Pipeline& p = pipeline();
    const Codebook cb = build_codebook(p.trained.model);
    const fs::path dir = fs::temp_directory_path() / ("kscope_a5_" + std::to_string(kSeed));
    fs::create_directories(dir);
    std::vector<std::string> files;
    for (unsigned jobs : {1u, 4u, 8u}) {
        const auto as = classify_corpus(p.data.corpus, cb, p.labels, 0.3, jobs);
        const fs::path f = dir / ("jobs" + std::to_string(jobs) + ".csv");
        write_assignments_csv(p.data.corpus, as, f);
        files.push_back(slurp(f));
    }
    fs::remove_all(dir);
    const bool identical = files[0] == files[1] && files[0] == files[2] && !files[0].empty();

    // Random filters: Gaussian i.i.d. entries and noisy bank templates.
    std::vector<FilterRecord> recs;
    Rng rng(derive_seed(kSeed, 5));
    for (std::uint32_t i = 0; i < 1000; ++i) {
        FilterRecord r;
        r.model_id = "random";
        r.channel_index = i;
        r.kernel_size = 7;
        const Template& t = bank7()[rng.below(bank7().size())];
        const double noise = i % 2 == 0 ? 1.0 : rng.uniform(0.0, 0.2);
        for (std::size_t j = 0; j < 49; ++j)
            r.weights.push_back(static_cast<float>((i % 2 == 0 ? 0.0 : t.kernel[j]) + noise * rng.normal()));
        recs.push_back(std::move(r));
    }
    const Corpus random(7, std::move(recs));
    const auto low = classify_corpus(random, cb, p.labels, 0.2);
    const auto high = classify_corpus(random, cb, p.labels, 0.3);
    std::size_t violations = 0, named_low = 0;
    for (std::size_t i = 0; i < low.size(); ++i) {
        if (low[i].cls != PatternClass::Other) {
            ++named_low;
            if (high[i].cls == PatternClass::Other) ++violations;
        }
    }
    return {identical && violations == 0, std::string(identical ? "1/4/8 jobs byte-identical" : "job outputs differ") +
                                              ", " + std::to_string(violations) + " named->Other of " +
                                              std::to_string(named_low)};
}

// ---- A6 ------------------------------------------------------------------

Outcome a6() {
    constexpr std::size_t kClusters = 10, kDim = 9, kPer = 60;
    constexpr double kNoise = 0.01;
    Rng rng(derive_seed(kSeed, 6));
    std::vector<Vector> planted;
    while (planted.size() < kClusters) {
        Vector c(kDim);
        for (double& v : c) v = rng.uniform(0.1, 0.9);
        bool far = true;
        for (const auto& q : planted) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < kDim; ++j) d2 += (c[j] - q[j]) * (c[j] - q[j]);
            if (std::sqrt(d2) < 10.0 * kNoise * 3.0) far = false;
        }
        if (far) planted.push_back(c);
    }
    std::vector<Vector> points;
    std::vector<std::size_t> truth;
    for (std::size_t i = 0; i < kClusters * kPer; ++i) {
        const std::size_t c = i % kClusters;
        Vector p(kDim);
        for (std::size_t j = 0; j < kDim; ++j) p[j] = planted[c][j] + kNoise * rng.normal();
        points.push_back(std::move(p));
        truth.push_back(c);
    }
    KMeansOptions opt;
    opt.k_clusters = kClusters;
    opt.n_restarts = 10;
    opt.seed = kSeed;
    const KMeansResult r = kmeans_fit(points, opt);
    bool monotone = true;
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
        if (r.inertia_trace[i] > r.inertia_trace[i - 1]) monotone = false;
    }
    const bool exact = oracle::same_partition(r.labels, truth);
    return {exact && monotone, std::string(exact ? "planted partition recovered" : "partition differs") + ", inertia " +
                                   (monotone ? "non-increasing" : "increased") + " over " +
                                   std::to_string(r.inertia_trace.size()) + " steps"};
}

// ---- A7 ------------------------------------------------------------------

Outcome a7() {
    InitSpec spec;
    spec.layer_channels = {96, 192, 384, 768};
    spec.seed = kSeed;
    const GeneratedKernels g = generate_init_labeled(spec);
    Rng rng(derive_seed(kSeed, 7));

    std::vector<Assignment> randomized(g.corpus.size());
    for (std::size_t i = 0; i < randomized.size(); ++i) {
        Assignment& a = randomized[i];
        a.source_index = i;
        const auto roll = rng.below(kPatternClassCount + 1);
        if (roll == kPatternClassCount) {
            a.reason = AssignReason::Degenerate;
        } else {
            a.cls = kAllPatternClasses[roll];
            a.reason = a.cls == PatternClass::Other ? AssignReason::AboveThreshold : AssignReason::Matched;
            a.dissimilarity = rng.uniform(0.0, 0.3);
        }
    }
    const ProportionTable t = layer_proportions(g.corpus, randomized);
    std::map<std::uint32_t, double> sums;
    for (const auto& r : t.rows) sums[r.layer_index] += r.fraction;
    double worst_sum = 0.0;
    for (const auto& [layer, s] : sums) worst_sum = std::max(worst_sum, std::abs(s - 1.0));

    const ClassMerge merges = parse_merges({"OnDx=OnCentre", "OffDy=OffDx", "SquareOn=OnSecond"});
    const double before = clustered_percentage(randomized);
    const double after = clustered_percentage(merge_labels(randomized, merges));

    std::vector<Assignment> truth(g.corpus.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth[i].source_index = i;
        truth[i].cls = g.classes[i];
        truth[i].reason = AssignReason::Matched;
    }
    const auto stats = activation_stats(g.corpus, truth);
    bool medians_zero = true;
    std::string medians;
    for (const char* cat : {"OnDx", "OffDx", "OnDy", "OffDy"}) {
        const auto it = stats.find(cat);
        if (it == stats.end() || it->second.median != 0.0) medians_zero = false;
        medians += std::string(" ") + cat + "=" + (it == stats.end() ? "n/a" : format_number(it->second.median));
    }
    return {worst_sum <= 1e-12 && before == after && medians_zero,
            "row-sum error " + format_number(worst_sum, 3) + ", clustered " + pct(before) + " -> " + pct(after) +
                ", medians" + medians};
}

// ---- A8 ------------------------------------------------------------------

Outcome a8() {
    Pipeline& p = pipeline();
    struct Group {
        const char* name;
        std::vector<PatternClass> classes;
    };
    const Group groups[] = {{"OnCentre", {PatternClass::OnCentre}},
                            {"OffCentre", {PatternClass::OffCentre}},
                            {"cross", {PatternClass::OnCross, PatternClass::OffCross}},
                            {"first-derivative",
                             {PatternClass::OnDx, PatternClass::OffDx, PatternClass::OnDy, PatternClass::OffDy}}};

    // A run: maximal block of consecutive samples with one class and dissimilarity < 0.3.
    std::map<PatternClass, std::size_t> longest;
    std::size_t i = 0;
    const auto good = [&](std::size_t j) {
        return p.spectrum[j].suggested && p.spectrum[j].suggested->dissimilarity < 0.3;
    };
    while (i < p.spectrum.size()) {
        if (!good(i)) {
            ++i;
            continue;
        }
        const PatternClass cls = p.spectrum[i].suggested->cls;
        std::size_t j = i;
        while (j < p.spectrum.size() && good(j) && p.spectrum[j].suggested->cls == cls) ++j;
        longest[cls] = std::max(longest[cls], j - i);
        i = j;
    }
    bool ok = true;
    std::string detail;
    for (const auto& g : groups) {
        std::size_t best = 0;
        for (PatternClass c : g.classes) best = std::max(best, longest[c]);
        if (best < 2) ok = false;
        detail += std::string(detail.empty() ? "" : ", ") + g.name + " run " + std::to_string(best);
    }
    return {ok, detail};
}

}  // namespace

// With arguments, runs only the named criteria (e.g. `A2 A3`).
int main(int argc, char** argv) {
    selected.assign(argv + 1, argv + argc);
    std::cout << "kernelscope acceptance suite (seed " << kSeed << ")" << std::endl;
    run("A1", "synthetic end-to-end recovery", a1);
    run("A2", "gradient correctness", a2);
    run("A3", "geometry exactness", a3);
    run("A4", "DoG analytic identities", a4);
    run("A5", "classifier determinism and parallel equivalence", a5);
    run("A6", "k-means planted recovery", a6);
    run("A7", "analytics conservation", a7);
    run("A8", "spectrum fidelity", a8);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
