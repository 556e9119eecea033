#pragma once

// Kernel-corpus data model and its KCP1 binary / CSV serializations.
//
// KCP1 byte layout (all integers and floats little-endian):
//
//   magic          4 bytes  "KCP1"
//   kernel_size    u32
//   record_count   u64
//   manifest:
//     model_count  u32
//     per model:   u32 id length, id bytes (UTF-8),
//                  u32 layer_count,
//                  per layer: u32 layer_index, u64 filter_count
//   records (record_count times):
//     u32 model_id length, model_id bytes,
//     u32 layer_index, u32 stage_index, u32 channel_index,
//     kernel_size^2 x f32 weights, row-major
//
// Models in the manifest are sorted by id, layers by index.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kscope {

/// One depthwise kernel with its provenance. Weights are f32 as stored in checkpoints.
struct FilterRecord {
    std::vector<float> weights;  // row-major k x k
    std::string model_id;
    std::uint32_t layer_index = 0;  // depthwise layers only, front to back
    std::uint32_t stage_index = 0;
    std::uint32_t channel_index = 0;
    std::uint32_t kernel_size = 0;

    bool operator==(const FilterRecord&) const = default;
};

/// model_id -> layer_index -> filter count
using Manifest = std::map<std::string, std::map<std::uint32_t, std::uint64_t>>;

/// Immutable collection of same-size kernels.
class Corpus {
public:
    /// Validates every record (odd size >= 3, k^2 finite weights, matching size).
    explicit Corpus(std::uint32_t kernel_size, std::vector<FilterRecord> records = {});

    std::uint32_t kernel_size() const noexcept { return kernel_size_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const std::vector<FilterRecord>& records() const noexcept { return records_; }
    const FilterRecord& operator[](std::size_t i) const { return records_[i]; }
    const Manifest& manifest() const noexcept { return manifest_; }

    bool operator==(const Corpus& other) const {
        return kernel_size_ == other.kernel_size_ && records_ == other.records_;
    }

private:
    std::uint32_t kernel_size_;
    std::vector<FilterRecord> records_;
    Manifest manifest_;
};

Manifest build_manifest(const std::vector<FilterRecord>& records);

void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus read_corpus(const std::filesystem::path& path);

/// Header: model_id,layer_index,stage_index,channel_index,kernel_size,w0..w(k^2-1).
/// The number of weight columns in the header fixes k for the whole file.
Corpus import_csv(const std::filesystem::path& path);
void export_csv(const Corpus& corpus, const std::filesystem::path& path);

/// Order-preserving subset; absent filters match everything.
Corpus filter_by(const Corpus& corpus, const std::optional<std::string>& model_id,
                 std::optional<std::uint32_t> layer_index);

/// Per-record weights widened to f64 for numerical work.
std::vector<double> weights_f64(const FilterRecord& record);

}  // namespace kscope
