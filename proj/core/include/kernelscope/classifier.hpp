#pragma once

// Codebook classification of filters against decoded reconstructions, and
// the k-means path used for 3x3 kernels.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kernelscope/autoencoder.hpp"
#include "kernelscope/corpus.hpp"
#include "kernelscope/dogfamily.hpp"
#include "kernelscope/spectrum.hpp"

namespace kscope {

inline constexpr std::size_t kDefaultCodebookSize = 10000;

struct Codebook {
    std::uint32_t kernel_size = 0;
    std::vector<double> codes;            // strictly increasing
    std::vector<Vector> kernels;          // centered, unit norm, k*k entries
    std::string model_ref;                // fingerprint of the generating model
    std::size_t dropped_degenerate = 0;   // codes whose decode had no direction
};

/// Decodes codes i/(n-1); degenerate decodes are dropped with their codes.
/// Throws ValidationError for n < 2 or when every decode is degenerate.
Codebook build_codebook(const AutoencoderModel& model, std::size_t n_codes = kDefaultCodebookSize);

/// Hex FNV-1a digest of the model's persisted fields.
std::string model_fingerprint(const AutoencoderModel& model);

/// 0.3 for 7x7, 0.2 for 5x5 and 0.2 for every other size.
double default_threshold(std::uint32_t kernel_size);
/// False for sizes that fall back to the 0.2 default.
bool has_calibrated_threshold(std::uint32_t kernel_size);

enum class AssignReason { Matched, AboveThreshold, Degenerate };

std::string_view to_string(AssignReason reason) noexcept;
AssignReason parse_assign_reason(std::string_view name);

struct Assignment {
    std::size_t source_index = 0;
    std::optional<double> matched_code;
    PatternClass cls = PatternClass::Other;
    double dissimilarity = 2.0;
    AssignReason reason = AssignReason::AboveThreshold;

    bool operator==(const Assignment&) const = default;
};

/// Minimum mean-centered cosine dissimilarity over the codebook; named class
/// when strictly below `threshold`, Other otherwise. Ties go to the smallest code.
Assignment classify_filter(const PreprocessedFilter& filter, const Codebook& codebook,
                           const LabelMap& labels, double threshold);

/// One assignment per record, in record order. `jobs` worker threads; the
/// result does not depend on `jobs`.
std::vector<Assignment> classify_corpus(const Corpus& corpus, const Codebook& codebook,
                                        const LabelMap& labels, double threshold, unsigned jobs = 1);

/// source_index,model_id,layer_index,channel_index,class,matched_code,dissimilarity,reason
void write_assignments_csv(const Corpus& corpus, const std::vector<Assignment>& assignments,
                           const std::filesystem::path& path);
std::vector<Assignment> read_assignments_csv(const std::filesystem::path& path);

// ---- k-means path -------------------------------------------------------

/// (v - min) / (max - min). Throws ConstantFilter when max == min.
Vector minmax_encode(std::span<const double> filter);

struct KMeansOptions {
    std::size_t k_clusters = 10;
    std::uint64_t seed = 0;
    std::size_t max_iter = 300;
    std::size_t n_restarts = 10;
};

struct KMeansResult {
    std::vector<Vector> centroids;
    std::vector<std::size_t> labels;
    double inertia = 0.0;
    /// Inertia after every assignment step of the winning restart.
    std::vector<double> inertia_trace;
    std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding; best inertia over the restarts.
/// An empty cluster is re-seeded with the point farthest from its centroid.
KMeansResult kmeans_fit(const std::vector<Vector>& points, const KMeansOptions& options);

/// Names each centroid by nearest_template after centering it; a centroid
/// without direction is named Other.
std::vector<PatternClass> label_centroids(const KMeansResult& result, const TemplateBank& bank);

}  // namespace kscope
