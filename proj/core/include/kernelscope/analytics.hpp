#pragma once

// Aggregate statistics over classified corpora: per-layer cluster
// proportions, clustered percentage, total-activation box statistics, PCA
// embeddings, merged-label analysis and snapshot timelines.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kernelscope/classifier.hpp"
#include "kernelscope/corpus.hpp"

namespace kscope {

/// Row category: a pattern class, or "Degenerate" for filters excluded as
/// near-constant (their class is Other, reason Degenerate).
std::string category_of(const Assignment& a);

/// Every PatternClass name followed by "Degenerate".
const std::vector<std::string>& all_categories();

struct ProportionRow {
    std::uint32_t layer_index = 0;
    std::string category;
    double fraction = 0.0;
};

struct ProportionTable {
    std::vector<ProportionRow> rows;  // layers ascending, categories in all_categories() order
    std::map<std::uint32_t, std::size_t> denominators;
};

ProportionTable layer_proportions(const Corpus& corpus, const std::vector<Assignment>& assignments);

/// 100 * (named classes) / total. Throws ValidationError on empty input.
double clustered_percentage(const std::vector<Assignment>& assignments);

struct BoxStats {
    std::size_t count = 0;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

/// Linear-interpolation quantile (R type 7) of unsorted values.
double quantile_type7(std::vector<double> values, double p);
BoxStats box_stats(std::vector<double> values);

/// Sum of raw (f32) weights accumulated in f64.
double total_activation(const FilterRecord& record);

/// Per category, box statistics of total activation.
std::map<std::string, BoxStats> activation_stats(const Corpus& corpus,
                                                 const std::vector<Assignment>& assignments);

struct PcaResult {
    std::vector<Vector> embeddings;           // per filter, one entry per component
    std::vector<double> explained_ratio;      // descending
    std::vector<Vector> components;           // unit loading vectors (k*k entries)
    std::string notice;                       // non-empty when fewer components than requested
};

/// Each kernel is centered (its own mean removed), then PCA via the
/// eigendecomposition of the sample covariance. Loadings are signed so their
/// largest-magnitude entry is positive.
PcaResult pca_embed(const std::vector<Vector>& kernels, std::size_t n_components = 3);
PcaResult pca_embed(const Corpus& corpus, std::size_t n_components = 3);

using ClassMerge = std::map<PatternClass, PatternClass>;

std::vector<Assignment> merge_labels(const std::vector<Assignment>& assignments, const ClassMerge& merges);
/// Parses "From=To" pairs; throws ValidationError for unknown classes.
ClassMerge parse_merges(const std::vector<std::string>& specs);

struct TimelineRow {
    std::string tag;
    std::size_t total = 0;
    double clustered_percentage = 0.0;
    std::map<std::string, double> proportions;  // corpus-wide, by category
};

std::vector<TimelineRow> timeline(const std::vector<std::pair<std::string, std::vector<Assignment>>>& snapshots);

/// layer_index,category,fraction,count  (6 significant digits)
void write_proportions_csv(const ProportionTable& table, const std::filesystem::path& path);
/// category,count,min,q1,median,q3,max,mean
void write_activation_csv(const std::map<std::string, BoxStats>& stats, const std::filesystem::path& path);
/// Embeddings as source_index,pc1..pcm; ratios to `ratio_path` as component,explained_ratio.
void write_pca_csv(const PcaResult& pca, const std::filesystem::path& path,
                   const std::filesystem::path& ratio_path);
/// tag,total,clustered_percentage,<category columns>
void write_timeline_csv(const std::vector<TimelineRow>& rows, const std::filesystem::path& path);

}  // namespace kscope
