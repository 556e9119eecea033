#include "kernelscope/corpus.hpp"

#include <cmath>
#include <fstream>

#include "binary_io.hpp"
#include "kernelscope/error.hpp"
#include "kernelscope/text.hpp"

namespace kscope {

namespace {

constexpr char kMagic[4] = {'K', 'C', 'P', '1'};
constexpr std::size_t kCsvMetaColumns = 5;

void check_kernel_size(std::uint64_t k) {
    if (k < 3 || k % 2 == 0)
        throw ValidationError("kernel_size must be an odd integer >= 3, got " + std::to_string(k));
}

void check_record(const FilterRecord& r, std::uint32_t k, std::size_t index) {
    const std::string where = "record " + std::to_string(index);
    if (r.kernel_size != k)
        throw ValidationError(where + ": kernel_size " + std::to_string(r.kernel_size) +
                              " differs from corpus kernel_size " + std::to_string(k));
    if (r.weights.size() != static_cast<std::size_t>(k) * k)
        throw ValidationError(where + ": expected " + std::to_string(k * k) + " weights, got " +
                              std::to_string(r.weights.size()));
    for (float w : r.weights) {
        if (!std::isfinite(w)) throw ValidationError(where + ": non-finite weight");
    }
}

}  // namespace

Manifest build_manifest(const std::vector<FilterRecord>& records) {
    Manifest m;
    for (const auto& r : records) ++m[r.model_id][r.layer_index];
    return m;
}

Corpus::Corpus(std::uint32_t kernel_size, std::vector<FilterRecord> records)
    : kernel_size_(kernel_size), records_(std::move(records)) {
    check_kernel_size(kernel_size_);
    for (std::size_t i = 0; i < records_.size(); ++i) check_record(records_[i], kernel_size_, i);
    manifest_ = build_manifest(records_);
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    detail::ByteWriter w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(corpus.kernel_size());
    w.u64(corpus.size());

    const Manifest& manifest = corpus.manifest();
    w.u32(static_cast<std::uint32_t>(manifest.size()));
    for (const auto& [model, layers] : manifest) {
        w.str(model);
        w.u32(static_cast<std::uint32_t>(layers.size()));
        for (const auto& [layer, count] : layers) {
            w.u32(layer);
            w.u64(count);
        }
    }

    for (const auto& r : corpus.records()) {
        w.str(r.model_id);
        w.u32(r.layer_index);
        w.u32(r.stage_index);
        w.u32(r.channel_index);
        for (float x : r.weights) w.f32(x);
    }
    detail::write_file(path, w.buffer());
}

Corpus read_corpus(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> data = detail::read_file(path);
    detail::ByteReader r(data);

    char magic[4];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw FormatError("'" + path.string() + "' is not a KCP1 corpus (bad magic)");

    const std::uint32_t k = r.u32();
    check_kernel_size(k);
    const std::uint64_t count = r.u64();

    Manifest manifest;
    const std::uint32_t n_models = r.u32();
    for (std::uint32_t m = 0; m < n_models; ++m) {
        std::string model = r.str();
        auto& layers = manifest[std::move(model)];
        const std::uint32_t n_layers = r.u32();
        for (std::uint32_t l = 0; l < n_layers; ++l) {
            const std::uint32_t layer = r.u32();
            layers[layer] = r.u64();
        }
    }

    const std::size_t weights_per_record = static_cast<std::size_t>(k) * k;
    // Each record needs at least its fixed-size part; reject absurd counts before allocating.
    if (count > r.remaining() / (16 + 4 * weights_per_record)) throw FormatError("truncated payload");

    std::vector<FilterRecord> records;
    records.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        FilterRecord rec;
        rec.model_id = r.str();
        rec.layer_index = r.u32();
        rec.stage_index = r.u32();
        rec.channel_index = r.u32();
        rec.kernel_size = k;
        rec.weights.resize(weights_per_record);
        for (auto& x : rec.weights) {
            x = r.f32();
            if (!std::isfinite(x))
                throw FormatError("record " + std::to_string(i) + " has a non-finite weight");
        }
        records.push_back(std::move(rec));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after last record");

    Corpus corpus(k, std::move(records));
    if (corpus.manifest() != manifest)
        throw FormatError("manifest counts do not match the records in '" + path.string() + "'");
    return corpus;
}

Corpus import_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

    std::string line;
    if (!std::getline(in, line)) throw FormatError("'" + path.string() + "' is empty");
    const auto header = split_csv(line);
    static constexpr const char* kMeta[kCsvMetaColumns] = {"model_id", "layer_index", "stage_index",
                                                          "channel_index", "kernel_size"};
    if (header.size() <= kCsvMetaColumns)
        throw FormatError("CSV header has no weight columns");
    for (std::size_t i = 0; i < kCsvMetaColumns; ++i) {
        if (header[i] != kMeta[i])
            throw FormatError("CSV header column " + std::to_string(i) + " must be '" + kMeta[i] + "'");
    }
    const std::size_t n_weights = header.size() - kCsvMetaColumns;
    for (std::size_t i = 0; i < n_weights; ++i) {
        if (header[kCsvMetaColumns + i] != "w" + std::to_string(i))
            throw FormatError("CSV header weight column " + std::to_string(i) + " must be 'w" +
                              std::to_string(i) + "'");
    }
    const auto k = static_cast<std::uint32_t>(std::lround(std::sqrt(static_cast<double>(n_weights))));
    if (static_cast<std::size_t>(k) * k != n_weights)
        throw FormatError("CSV has " + std::to_string(n_weights) + " weight columns, not a square count");
    check_kernel_size(k);

    std::vector<FilterRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv(line);
        const std::string where = "line " + std::to_string(line_no);
        if (fields.size() < kCsvMetaColumns)
            throw FormatError(where + ": expected at least " + std::to_string(kCsvMetaColumns) + " columns");

        FilterRecord rec;
        rec.model_id = std::string(fields[0]);
        rec.layer_index = static_cast<std::uint32_t>(parse_uint(fields[1]));
        rec.stage_index = static_cast<std::uint32_t>(parse_uint(fields[2]));
        rec.channel_index = static_cast<std::uint32_t>(parse_uint(fields[3]));
        rec.kernel_size = static_cast<std::uint32_t>(parse_uint(fields[4]));
        const std::size_t row_weights = fields.size() - kCsvMetaColumns;
        if (row_weights != static_cast<std::size_t>(rec.kernel_size) * rec.kernel_size ||
            rec.kernel_size != k)
            throw FormatError(where + ": kernel_size " + std::to_string(rec.kernel_size) + " with " +
                              std::to_string(row_weights) + " weight columns (file has k=" +
                              std::to_string(k) + ")");
        rec.weights.reserve(row_weights);
        for (std::size_t i = 0; i < row_weights; ++i) {
            const double v = parse_double(fields[kCsvMetaColumns + i]);
            if (!std::isfinite(v)) throw FormatError(where + ": non-finite weight");
            rec.weights.push_back(static_cast<float>(v));
        }
        records.push_back(std::move(rec));
    }
    return Corpus(k, std::move(records));
}

void export_csv(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "model_id,layer_index,stage_index,channel_index,kernel_size";
    const std::size_t n = static_cast<std::size_t>(corpus.kernel_size()) * corpus.kernel_size();
    for (std::size_t i = 0; i < n; ++i) out << ",w" << i;
    out << '\n';
    for (const auto& r : corpus.records()) {
        if (r.model_id.find_first_of(",\n\r") != std::string::npos)
            throw ValidationError("model_id '" + r.model_id + "' cannot be written to CSV");
        out << r.model_id << ',' << r.layer_index << ',' << r.stage_index << ',' << r.channel_index
            << ',' << r.kernel_size;
        // 9 significant digits round-trip any f32 exactly.
        for (float w : r.weights) out << ',' << format_number(w, 9);
        out << '\n';
    }
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

Corpus filter_by(const Corpus& corpus, const std::optional<std::string>& model_id,
                 std::optional<std::uint32_t> layer_index) {
    std::vector<FilterRecord> kept;
    for (const auto& r : corpus.records()) {
        if (model_id && r.model_id != *model_id) continue;
        if (layer_index && r.layer_index != *layer_index) continue;
        kept.push_back(r);
    }
    return Corpus(corpus.kernel_size(), std::move(kept));
}

std::vector<double> weights_f64(const FilterRecord& record) {
    return {record.weights.begin(), record.weights.end()};
}

}  // namespace kscope
