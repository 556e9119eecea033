#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "kernelscope/analytics.hpp"
#include "kernelscope/autoencoder.hpp"
#include "kernelscope/classifier.hpp"
#include "kernelscope/corpus.hpp"
#include "kernelscope/dogfamily.hpp"
#include "kernelscope/error.hpp"
#include "kernelscope/initgen.hpp"
#include "kernelscope/spectrum.hpp"
#include "kernelscope/text.hpp"

namespace kscope::cli {

namespace {

constexpr const char* kSeedEnv = "KERNELSCOPE_SEED";

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::ostream& out) {
    std::uint64_t seed = 0;
    if (flag) {
        seed = *flag;
    } else if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
        try {
            seed = parse_uint(env);
        } catch (const FormatError&) {
            throw ValidationError(std::string(kSeedEnv) + " is not a non-negative integer");
        }
    } else {
        throw ValidationError(std::string("a seed is required: pass --seed or set ") + kSeedEnv);
    }
    out << "seed: " << seed << '\n';
    return seed;
}

bool has_csv_extension(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

Corpus load_corpus_any(const std::string& path) {
    return has_csv_extension(path) ? import_csv(path) : read_corpus(path);
}

std::vector<std::uint32_t> parse_uint_list(const std::string& text) {
    std::vector<std::uint32_t> out;
    for (auto f : split_csv(text)) {
        try {
            out.push_back(static_cast<std::uint32_t>(parse_uint(f)));
        } catch (const FormatError&) {
            throw ValidationError("'" + text + "' is not a comma-separated list of integers");
        }
    }
    return out;
}

HiddenDims parse_hidden(const std::string& text) {
    const auto v = parse_uint_list(text);
    if (v.size() != 4) throw ValidationError("--hidden needs exactly four widths");
    return {v[0], v[1], v[2], v[3]};
}

Family parse_family(const std::string& s) {
    static const std::map<std::string, Family> names = {
        {"dog", Family::Dog},       {"dog_dx", Family::DogDx},   {"dog_dy", Family::DogDy},
        {"dog_dxx", Family::DogDxx}, {"dog_dyy", Family::DogDyy}, {"dog_dxy", Family::DogDxy},
        {"cross", Family::Cross}};
    const auto it = names.find(s);
    if (it == names.end()) throw ValidationError("unknown family '" + s + "'");
    return it->second;
}

Polarity parse_polarity(const std::string& s) {
    if (s == "on") return Polarity::On;
    if (s == "off") return Polarity::Off;
    throw ValidationError("polarity must be 'on' or 'off'");
}

GroupProportions parse_proportions(const std::string& text) {
    GroupProportions p;
    for (auto item : split_csv(text)) {
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ValidationError("proportion '" + std::string(item) + "' must be group=fraction");
        try {
            p[parse_init_group(item.substr(0, eq))] = parse_double(item.substr(eq + 1));
        } catch (const FormatError& e) {
            throw ValidationError(e.what());
        }
    }
    return p;
}

double resolve_threshold(const std::optional<double>& flag, std::uint32_t k, std::ostream& out,
                         std::ostream& err) {
    if (flag) {
        out << "threshold: " << format_number(*flag) << " (override)\n";
        return *flag;
    }
    const double t = default_threshold(k);
    if (!has_calibrated_threshold(k))
        err << "notice: no calibrated threshold for " << k << "x" << k << " kernels; using " << format_number(t)
            << '\n';
    out << "threshold: " << format_number(t) << '\n';
    return t;
}

struct Options {
    // shared
    std::string corpus, model, labels, assignments, out, in;
    std::optional<std::uint64_t> seed;
    // ingest
    std::optional<std::string> model_id;
    std::optional<std::uint32_t> layer;
    // train
    std::uint32_t epochs = 200, batch = 256;
    double lr = 1e-3;
    std::string hidden;
    double leaky = 0.01;
    std::string history;
    bool quiet = false;
    // spectrum / labels
    std::size_t samples = kDefaultSpectrumSamples;
    double max_dissim = kDefaultSuggestMaxDissim;
    bool no_suggest = false;
    // classify
    std::optional<double> threshold;
    std::size_t codes = kDefaultCodebookSize;
    unsigned jobs = 1;
    // kmeans
    std::size_t clusters = 10, restarts = 10, max_iter = 300;
    std::string centroids;
    // stats
    std::string out_prefix;
    std::vector<std::string> merges;
    // pca
    std::size_t components = 3;
    std::string ratios;
    // timeline
    std::vector<std::string> snapshots;
    // init
    std::uint32_t kernel_size = 7;
    std::string channels;
    double sigma1_min = 0.5, sigma1_max = 1.3, sigma_ratio = 2.0;
    std::string proportions;
    std::string csv;
    // synth
    std::string family = "dog", polarity = "on";
    double sigma1 = 1.0, sigma2 = 2.0;
    int size = 7;
    bool raw = false;
};

void cmd_ingest(const Options& o, std::ostream& out) {
    Corpus c = load_corpus_any(o.in);
    if (o.model_id || o.layer) c = filter_by(c, o.model_id, o.layer);
    if (has_csv_extension(o.out))
        export_csv(c, o.out);
    else
        write_corpus(c, o.out);
    out << "records: " << c.size() << "  kernel_size: " << c.kernel_size() << '\n';
    for (const auto& [model, layers] : c.manifest()) {
        std::uint64_t total = 0;
        for (const auto& [layer, n] : layers) total += n;
        out << "  " << model << ": " << total << " filters in " << layers.size() << " layers\n";
    }
}

void cmd_train(const Options& o, std::ostream& out) {
    const std::uint64_t seed = resolve_seed(o.seed, out);
    const Corpus corpus = load_corpus_any(o.corpus);
    const HiddenDims hidden = o.hidden.empty() ? default_hidden_dims(corpus.kernel_size()) : parse_hidden(o.hidden);
    TrainConfig cfg;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch;
    cfg.learning_rate = o.lr;
    cfg.seed = seed;
    validate(cfg);

    AutoencoderModel model = init_model(corpus.kernel_size(), hidden, seed, o.leaky);
    EpochCallback progress;
    if (!o.quiet) {
        progress = [&out, total = cfg.epochs](std::uint32_t epoch, double l) {
            if (epoch == 1 || epoch % 10 == 0 || epoch == total)
                out << "epoch " << epoch << "/" << total << "  loss " << format_number(l) << '\n';
        };
    }
    const TrainResult r = train(std::move(model), corpus, cfg, progress);
    save_model(r.model, o.out);
    if (!o.history.empty()) {
        std::ofstream h(o.history, std::ios::trunc);
        if (!h) throw IoError("cannot open '" + o.history + "' for writing");
        h << "epoch,loss\n0," << format_number(r.initial_loss) << '\n';
        for (std::size_t i = 0; i < r.loss_history.size(); ++i)
            h << i + 1 << ',' << format_number(r.loss_history[i]) << '\n';
    }
    out << "filters: " << corpus.size() - r.degenerate_skipped << " (degenerate skipped: " << r.degenerate_skipped
        << ")\n";
    out << "initial loss: " << format_number(r.initial_loss)
        << "  final loss: " << format_number(r.loss_history.back()) << '\n';
}

void cmd_spectrum(const Options& o, std::ostream& out) {
    const AutoencoderModel model = load_model(o.model);
    auto spectrum = sample_spectrum(model, o.samples);
    if (!o.no_suggest) annotate(spectrum, default_template_bank(static_cast<int>(model.kernel_size)));
    write_spectrum_csv(spectrum, o.out);
    out << "samples: " << spectrum.size() << '\n';
}

void cmd_label_suggest(const Options& o, std::ostream& out) {
    const AutoencoderModel model = load_model(o.model);
    const TemplateBank bank = default_template_bank(static_cast<int>(model.kernel_size));
    const LabelMap map = suggest_labels(sample_spectrum(model, o.samples), bank, o.max_dissim);
    save_labelmap(map, o.out);
    out << "intervals: " << map.intervals().size() << '\n';
    for (const auto& iv : map.intervals())
        out << "  [" << format_number(iv.lo) << ", " << format_number(iv.hi) << ") " << to_string(iv.cls) << '\n';
}

void cmd_classify(const Options& o, std::ostream& out, std::ostream& err) {
    const Corpus corpus = load_corpus_any(o.corpus);
    const AutoencoderModel model = load_model(o.model);
    const LabelMap labels = load_labelmap(o.labels);
    if (corpus.kernel_size() != model.kernel_size)
        throw ValidationError("corpus and model kernel sizes differ");
    if (o.jobs < 1) throw ValidationError("--jobs must be >= 1");
    const double threshold = resolve_threshold(o.threshold, corpus.kernel_size(), out, err);
    const Codebook cb = build_codebook(model, o.codes);
    const auto assignments = classify_corpus(corpus, cb, labels, threshold, o.jobs);
    write_assignments_csv(corpus, assignments, o.out);
    out << "codebook: " << cb.codes.size() << " codes (model " << cb.model_ref << ")\n";
    if (!assignments.empty())
        out << "clustered: " << format_number(clustered_percentage(assignments)) << "%\n";
}

void cmd_kmeans(const Options& o, std::ostream& out) {
    const std::uint64_t seed = resolve_seed(o.seed, out);
    const Corpus corpus = load_corpus_any(o.corpus);
    std::vector<Vector> points;
    std::vector<std::size_t> point_of(corpus.size(), SIZE_MAX);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        try {
            points.push_back(minmax_encode(weights_f64(corpus[i])));
            point_of[i] = points.size() - 1;
        } catch (const ConstantFilter&) {
        }
    }
    KMeansOptions opt;
    opt.k_clusters = o.clusters;
    opt.seed = seed;
    opt.n_restarts = o.restarts;
    opt.max_iter = o.max_iter;
    const KMeansResult km = kmeans_fit(points, opt);
    const auto names = label_centroids(km, default_template_bank(static_cast<int>(corpus.kernel_size())));

    std::vector<Assignment> assignments(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        Assignment& a = assignments[i];
        a.source_index = i;
        if (point_of[i] == SIZE_MAX) {
            a.reason = AssignReason::Degenerate;
            continue;
        }
        const std::size_t cluster = km.labels[point_of[i]];
        a.cls = names[cluster];
        a.reason = AssignReason::Matched;
        try {
            a.dissimilarity = mc_cosine_dissim(points[point_of[i]], km.centroids[cluster]);
        } catch (const DegenerateFilter&) {
            a.dissimilarity = 2.0;
        }
    }
    write_assignments_csv(corpus, assignments, o.out);
    if (!o.centroids.empty()) {
        std::ofstream c(o.centroids, std::ios::trunc);
        if (!c) throw IoError("cannot open '" + o.centroids + "' for writing");
        c << "cluster,class";
        for (std::size_t j = 0; j < km.centroids.front().size(); ++j) c << ",w" << j;
        c << '\n';
        for (std::size_t k = 0; k < km.centroids.size(); ++k) {
            c << k << ',' << to_string(names[k]);
            for (double v : km.centroids[k]) c << ',' << format_number(v);
            c << '\n';
        }
    }
    out << "inertia: " << format_number(km.inertia) << "  iterations: " << km.iterations << '\n';
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto n = std::count(km.labels.begin(), km.labels.end(), k);
        out << "  cluster " << k << " (" << to_string(names[k]) << "): " << n << '\n';
    }
}

void cmd_stats(const Options& o, std::ostream& out) {
    const Corpus corpus = load_corpus_any(o.corpus);
    auto assignments = read_assignments_csv(o.assignments);
    if (!o.merges.empty()) assignments = merge_labels(assignments, parse_merges(o.merges));
    write_proportions_csv(layer_proportions(corpus, assignments), o.out_prefix + "_proportions.csv");
    write_activation_csv(activation_stats(corpus, assignments), o.out_prefix + "_activation.csv");
    if (!assignments.empty())
        out << "clustered: " << format_number(clustered_percentage(assignments)) << "%\n";
}

void cmd_pca(const Options& o, std::ostream& out, std::ostream& err) {
    const Corpus corpus = load_corpus_any(o.corpus);
    const PcaResult p = pca_embed(corpus, o.components);
    if (!p.notice.empty()) err << "notice: " << p.notice << '\n';
    const std::string ratios = o.ratios.empty() ? o.out + ".ratios.csv" : o.ratios;
    write_pca_csv(p, o.out, ratios);
    for (std::size_t c = 0; c < p.explained_ratio.size(); ++c)
        out << "pc" << c + 1 << ": " << format_number(p.explained_ratio[c]) << '\n';
}

void cmd_timeline(const Options& o, std::ostream& out) {
    std::vector<std::pair<std::string, std::vector<Assignment>>> snaps;
    for (const auto& s : o.snapshots) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("snapshot '" + s + "' must be tag=path");
        snaps.emplace_back(s.substr(0, eq), read_assignments_csv(s.substr(eq + 1)));
    }
    const auto rows = timeline(snaps);
    write_timeline_csv(rows, o.out);
    for (const auto& r : rows) out << r.tag << ": " << format_number(r.clustered_percentage) << "%\n";
}

void cmd_init(const Options& o, std::ostream& out) {
    InitSpec spec;
    spec.seed = resolve_seed(o.seed, out);
    spec.kernel_size = o.kernel_size;
    spec.layer_channels = parse_uint_list(o.channels);
    spec.sigma1_range = {o.sigma1_min, o.sigma1_max};
    spec.sigma_ratio = o.sigma_ratio;
    if (!o.proportions.empty()) spec.proportions = parse_proportions(o.proportions);
    const Corpus c = generate_init(spec);
    write_corpus(c, o.out);
    if (!o.csv.empty()) export_csv(c, o.csv);
    out << "kernels: " << c.size() << " in " << spec.layer_channels.size() << " layers\n";
}

void cmd_synth(const Options& o, std::ostream& out) {
    TemplateSpec spec{parse_family(o.family), parse_polarity(o.polarity), o.sigma1, o.sigma2, o.size};
    if (spec.family == Family::Cross) spec.sigma2 = spec.sigma1;
    validate(spec);
    const Vector k = o.raw ? raw_kernel(spec) : render(spec);
    std::ofstream f(o.out, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + o.out + "' for writing");
    for (int r = 0; r < spec.size; ++r) {
        for (int c = 0; c < spec.size; ++c) {
            if (c) f << ',';
            f << format_number(k[static_cast<std::size_t>(r * spec.size + c)], 9);
        }
        f << '\n';
    }
    out << "class: " << to_string(pattern_class_of(spec.family, spec.polarity)) << '\n';
}

void cmd_summary(const Options& o, std::ostream& out) {
    const Corpus corpus = load_corpus_any(o.corpus);
    const auto assignments = read_assignments_csv(o.assignments);
    if (assignments.size() != corpus.size()) throw ValidationError("assignments are not aligned with the corpus");
    std::map<std::string, std::vector<Assignment>> by_model;
    for (std::size_t i = 0; i < corpus.size(); ++i) by_model[corpus[i].model_id].push_back(assignments[i]);
    out << "model,filters,clustered_percentage\n";
    for (const auto& [model, as] : by_model)
        out << model << ',' << as.size() << ',' << format_number(clustered_percentage(as)) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"kernelscope: depthwise-kernel pattern analysis", "kernelscope"};
    app.require_subcommand(1);
    Options o;
    std::function<void()> action;

    auto corpus_opt = [&](CLI::App* s) { s->add_option("--corpus", o.corpus, "Corpus (.kcp or .csv)")->required(); };
    auto seed_opt = [&](CLI::App* s) {
        s->add_option("--seed", o.seed, std::string("RNG seed (fallback: ") + kSeedEnv + ")");
    };

    auto* ingest = app.add_subcommand("ingest", "Convert / filter corpora between CSV and KCP1");
    ingest->add_option("--in", o.in, "Input corpus (.csv or .kcp)")->required();
    ingest->add_option("--out", o.out, "Output corpus (.csv or .kcp)")->required();
    ingest->add_option("--model-id", o.model_id, "Keep only this model");
    ingest->add_option("--layer", o.layer, "Keep only this depthwise layer");
    ingest->callback([&] { action = [&] { cmd_ingest(o, out); }; });

    auto* train_cmd = app.add_subcommand("train", "Train the 1D-code autoencoder");
    corpus_opt(train_cmd);
    train_cmd->add_option("--out", o.out, "Output model (.kae)")->required();
    seed_opt(train_cmd);
    train_cmd->add_option("--epochs", o.epochs, "Epochs")->capture_default_str();
    train_cmd->add_option("--batch", o.batch, "Batch size")->capture_default_str();
    train_cmd->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
    train_cmd->add_option("--hidden", o.hidden, "Four hidden widths, e.g. 32,16,8,4");
    train_cmd->add_option("--leaky-slope", o.leaky, "Leaky ReLU slope")->capture_default_str();
    train_cmd->add_option("--history", o.history, "Write per-epoch loss CSV");
    train_cmd->add_flag("--quiet", o.quiet, "No per-epoch progress");
    train_cmd->callback([&] { action = [&] { cmd_train(o, out); }; });

    auto* spectrum_cmd = app.add_subcommand("spectrum", "Decode a uniform code sweep to CSV");
    spectrum_cmd->add_option("--model", o.model, "Model (.kae)")->required();
    spectrum_cmd->add_option("--out", o.out, "Output CSV")->required();
    spectrum_cmd->add_option("--samples", o.samples, "Number of codes")->capture_default_str();
    spectrum_cmd->add_flag("--no-suggest", o.no_suggest, "Skip nearest-template columns");
    spectrum_cmd->callback([&] { action = [&] { cmd_spectrum(o, out); }; });

    auto* suggest = app.add_subcommand("label-suggest", "Propose a label map from the template bank");
    suggest->add_option("--model", o.model, "Model (.kae)")->required();
    suggest->add_option("--out", o.out, "Output label map (.json)")->required();
    suggest->add_option("--samples", o.samples, "Number of codes")->capture_default_str();
    suggest->add_option("--max-dissim", o.max_dissim, "Largest dissimilarity that still labels a sample")
        ->capture_default_str();
    suggest->callback([&] { action = [&] { cmd_label_suggest(o, out); }; });

    auto* classify = app.add_subcommand("classify", "Assign filters to labeled codebook clusters");
    corpus_opt(classify);
    classify->add_option("--model", o.model, "Model (.kae)")->required();
    classify->add_option("--labels", o.labels, "Label map (.json)")->required();
    classify->add_option("--out", o.out, "Assignment CSV")->required();
    classify->add_option("--threshold", o.threshold, "Dissimilarity threshold (default 0.3 for 7x7, 0.2 otherwise)");
    classify->add_option("--codes", o.codes, "Codebook size")->capture_default_str();
    classify->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
    classify->callback([&] { action = [&] { cmd_classify(o, out, err); }; });

    auto* kmeans = app.add_subcommand("kmeans", "k-means on min-max encoded kernels");
    corpus_opt(kmeans);
    kmeans->add_option("--out", o.out, "Assignment CSV")->required();
    seed_opt(kmeans);
    kmeans->add_option("--clusters", o.clusters, "Number of clusters")->capture_default_str();
    kmeans->add_option("--restarts", o.restarts, "k-means++ restarts")->capture_default_str();
    kmeans->add_option("--max-iter", o.max_iter, "Lloyd iterations per restart")->capture_default_str();
    kmeans->add_option("--centroids", o.centroids, "Write centroids CSV");
    kmeans->callback([&] { action = [&] { cmd_kmeans(o, out); }; });

    auto* stats = app.add_subcommand("stats", "Per-layer proportions and total-activation statistics");
    corpus_opt(stats);
    stats->add_option("--assignments", o.assignments, "Assignment CSV")->required();
    stats->add_option("--out-prefix", o.out_prefix, "Writes <prefix>_proportions.csv and <prefix>_activation.csv")
        ->required();
    stats->add_option("--merge", o.merges, "Relabel From=To before aggregating (repeatable)");
    stats->callback([&] { action = [&] { cmd_stats(o, out); }; });

    auto* pca = app.add_subcommand("pca", "Principal-component embedding of kernels");
    corpus_opt(pca);
    pca->add_option("--out", o.out, "Embedding CSV")->required();
    pca->add_option("--ratios", o.ratios, "Explained-ratio CSV (default <out>.ratios.csv)");
    pca->add_option("--components", o.components, "Number of components")->capture_default_str();
    pca->callback([&] { action = [&] { cmd_pca(o, out, err); }; });

    auto* tl = app.add_subcommand("timeline", "Clustered percentage and proportions across snapshots");
    tl->add_option("--snapshot", o.snapshots, "tag=assignments.csv (repeatable, in order)")->required();
    tl->add_option("--out", o.out, "Timeline CSV")->required();
    tl->callback([&] { action = [&] { cmd_timeline(o, out); }; });

    auto* init = app.add_subcommand("init", "Generate DoG-family initialization kernels");
    init->add_option("--kernel-size", o.kernel_size, "Odd kernel size")->capture_default_str();
    init->add_option("--channels", o.channels, "Channels per layer, e.g. 768,768")->required();
    init->add_option("--out", o.out, "Output corpus (.kcp)")->required();
    init->add_option("--csv", o.csv, "Also export CSV");
    seed_opt(init);
    init->add_option("--sigma1-min", o.sigma1_min, "Lower inner sigma")->capture_default_str();
    init->add_option("--sigma1-max", o.sigma1_max, "Upper inner sigma")->capture_default_str();
    init->add_option("--sigma-ratio", o.sigma_ratio, "Outer / inner sigma")->capture_default_str();
    init->add_option("--proportions", o.proportions,
                     "group=fraction list over on_centre, off_centre, cross, first_derivative, second_derivative");
    init->callback([&] { action = [&] { cmd_init(o, out); }; });

    auto* synth = app.add_subcommand("synth", "Render one template as a k x k CSV grid");
    synth->add_option("--family", o.family, "dog, dog_dx, dog_dy, dog_dxx, dog_dyy, dog_dxy or cross")
        ->capture_default_str();
    synth->add_option("--polarity", o.polarity, "on or off")->capture_default_str();
    synth->add_option("--sigma1", o.sigma1, "Inner (or cross) sigma")->capture_default_str();
    synth->add_option("--sigma2", o.sigma2, "Outer sigma")->capture_default_str();
    synth->add_option("--size", o.size, "Odd kernel size")->capture_default_str();
    synth->add_option("--out", o.out, "Output CSV")->required();
    synth->add_flag("--raw", o.raw, "Skip centering and normalization");
    synth->callback([&] { action = [&] { cmd_synth(o, out); }; });

    auto* summary = app.add_subcommand("summary", "Clustered percentage per model");
    corpus_opt(summary);
    summary->add_option("--assignments", o.assignments, "Assignment CSV")->required();
    summary->callback([&] { action = [&] { cmd_summary(o, out); }; });

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("kernelscope");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (action) action();
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace kscope::cli
