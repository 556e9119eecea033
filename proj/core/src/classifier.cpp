#include "kernelscope/classifier.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <thread>

#include "kernelscope/error.hpp"
#include "kernelscope/text.hpp"

namespace kscope {

namespace {

struct Fnv1a {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    }
    template <typename T>
    void value(const T& v) { bytes(&v, sizeof v); }
};

}  // namespace

std::string model_fingerprint(const AutoencoderModel& model) {
    Fnv1a f;
    f.value(model.kernel_size);
    for (auto h : model.hidden) f.value(h);
    f.value(model.leaky_slope);
    for (const auto* layers : {&model.encoder, &model.decoder}) {
        for (const auto& l : *layers) {
            f.bytes(l.weight.data(), l.weight.size() * sizeof(double));
            f.bytes(l.bias.data(), l.bias.size() * sizeof(double));
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f.h));
    return buf;
}

Codebook build_codebook(const AutoencoderModel& model, std::size_t n_codes) {
    if (n_codes < 2) throw ValidationError("codebook needs at least 2 codes");
    validate(model);
    const HyperplaneBasis basis(model.input_dim + 1);
    Codebook cb;
    cb.kernel_size = model.kernel_size;
    cb.model_ref = model_fingerprint(model);
    cb.codes.reserve(n_codes);
    cb.kernels.reserve(n_codes);
    for (std::size_t i = 0; i < n_codes; ++i) {
        const double code = static_cast<double>(i) / static_cast<double>(n_codes - 1);
        try {
            cb.kernels.push_back(center_normalize(decode_full(model, basis, code)));
            cb.codes.push_back(code);
        } catch (const DegenerateFilter&) {
            ++cb.dropped_degenerate;
        }
    }
    if (cb.codes.empty()) throw ValidationError("every decoded codebook entry is degenerate");
    return cb;
}

double default_threshold(std::uint32_t kernel_size) { return kernel_size == 7 ? 0.3 : 0.2; }

bool has_calibrated_threshold(std::uint32_t kernel_size) {
    return kernel_size == 7 || kernel_size == 5;
}

std::string_view to_string(AssignReason reason) noexcept {
    switch (reason) {
        case AssignReason::Matched: return "matched";
        case AssignReason::AboveThreshold: return "above_threshold";
        case AssignReason::Degenerate: return "degenerate";
    }
    return "above_threshold";
}

AssignReason parse_assign_reason(std::string_view name) {
    for (auto r : {AssignReason::Matched, AssignReason::AboveThreshold, AssignReason::Degenerate}) {
        if (to_string(r) == name) return r;
    }
    throw FormatError("unknown assignment reason '" + std::string(name) + "'");
}

Assignment classify_filter(const PreprocessedFilter& filter, const Codebook& codebook,
                           const LabelMap& labels, double threshold) {
    const std::size_t n = static_cast<std::size_t>(codebook.kernel_size) * codebook.kernel_size;
    if (filter.full.size() != n)
        throw ValidationError("filter has " + std::to_string(filter.full.size()) +
                              " entries, codebook kernels have " + std::to_string(n));
    if (codebook.codes.empty()) throw ValidationError("empty codebook");

    // Both sides are centered and unit norm, so 1 - <a, b> is the
    // mean-centered cosine dissimilarity; the winner is re-scored exactly.
    std::size_t best = 0;
    double best_d = 1.0 - dot(filter.full, codebook.kernels[0]);
    for (std::size_t i = 1; i < codebook.codes.size(); ++i) {
        const double d = 1.0 - dot(filter.full, codebook.kernels[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    Assignment a;
    a.source_index = filter.source_index;
    a.dissimilarity = mc_cosine_dissim(filter.full, codebook.kernels[best]);
    if (a.dissimilarity < threshold) {
        a.matched_code = codebook.codes[best];
        a.cls = labels.lookup(codebook.codes[best]);
        a.reason = AssignReason::Matched;
    } else {
        a.cls = PatternClass::Other;
        a.reason = AssignReason::AboveThreshold;
    }
    return a;
}

std::vector<Assignment> classify_corpus(const Corpus& corpus, const Codebook& codebook,
                                        const LabelMap& labels, double threshold, unsigned jobs) {
    if (!corpus.empty() && corpus.kernel_size() != codebook.kernel_size)
        throw ValidationError("corpus kernel_size " + std::to_string(corpus.kernel_size()) +
                              " does not match codebook kernel_size " +
                              std::to_string(codebook.kernel_size));
    std::vector<Assignment> out(corpus.size());
    if (corpus.empty()) return out;
    const HyperplaneBasis basis(static_cast<std::size_t>(corpus.kernel_size()) * corpus.kernel_size());

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const PreprocessedFilter f = preprocess(weights_f64(corpus[i]), basis, i);
                out[i] = classify_filter(f, codebook, labels, threshold);
            } catch (const DegenerateFilter&) {
                out[i] = Assignment{i, std::nullopt, PatternClass::Other, 2.0, AssignReason::Degenerate};
            }
        }
    };

    const std::size_t n_jobs = std::clamp<std::size_t>(jobs, 1, corpus.size());
    if (n_jobs == 1) {
        work(0, corpus.size());
        return out;
    }
    std::vector<std::thread> threads;
    const std::size_t chunk = (corpus.size() + n_jobs - 1) / n_jobs;
    for (std::size_t j = 0; j < n_jobs; ++j) {
        const std::size_t begin = j * chunk;
        const std::size_t end = std::min(corpus.size(), begin + chunk);
        if (begin >= end) break;
        threads.emplace_back(work, begin, end);
    }
    for (auto& t : threads) t.join();
    return out;
}

void write_assignments_csv(const Corpus& corpus, const std::vector<Assignment>& assignments,
                           const std::filesystem::path& path) {
    if (assignments.size() != corpus.size())
        throw ValidationError("assignments and corpus have different lengths");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "source_index,model_id,layer_index,channel_index,class,matched_code,dissimilarity,reason\n";
    for (const auto& a : assignments) {
        const auto& r = corpus[a.source_index];
        out << a.source_index << ',' << r.model_id << ',' << r.layer_index << ',' << r.channel_index << ','
            << to_string(a.cls) << ',' << (a.matched_code ? format_number(*a.matched_code, 17) : "") << ','
            << format_number(a.dissimilarity, 17) << ',' << to_string(a.reason) << '\n';
    }
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::vector<Assignment> read_assignments_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::string line;
    if (!std::getline(in, line) || split_csv(line).size() != 8 || split_csv(line)[0] != "source_index")
        throw FormatError("'" + path.string() + "' is not an assignment CSV");
    std::vector<Assignment> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv(line);
        if (f.size() != 8) throw FormatError("line " + std::to_string(line_no) + ": expected 8 columns");
        Assignment a;
        a.source_index = parse_uint(f[0]);
        a.cls = parse_pattern_class(f[4]);
        if (!f[5].empty()) a.matched_code = parse_double(f[5]);
        a.dissimilarity = parse_double(f[6]);
        a.reason = parse_assign_reason(f[7]);
        out.push_back(a);
    }
    return out;
}

}  // namespace kscope
