#pragma once

// Reconstruction spectrum and code-interval labels.

#include <filesystem>
#include <optional>
#include <vector>

#include "kernelscope/autoencoder.hpp"
#include "kernelscope/dogfamily.hpp"
#include "kernelscope/pattern_class.hpp"

namespace kscope {

inline constexpr std::size_t kDefaultSpectrumSamples = 500;
inline constexpr double kDefaultSuggestMaxDissim = 0.3;

struct SpectrumSample {
    double code = 0.0;
    Vector kernel;  // k*k, full space, as decoded (not renormalized)
    std::optional<TemplateMatch> suggested;
};

/// Codes i/(n-1), i = 0..n-1, decoded. Throws ValidationError for n < 2.
std::vector<SpectrumSample> sample_spectrum(const AutoencoderModel& model, std::size_t n);

/// Fills `suggested` on every sample with its nearest bank template.
void annotate(std::vector<SpectrumSample>& spectrum, const TemplateBank& bank);

struct LabelInterval {
    double lo = 0.0;
    double hi = 0.0;
    PatternClass cls = PatternClass::Other;

    bool operator==(const LabelInterval&) const = default;
};

/// Sorted, non-overlapping half-open intervals [lo, hi) inside [0, 1]; an
/// interval ending at 1 also contains 1. Uncovered codes map to Other.
class LabelMap {
public:
    LabelMap() = default;
    /// Throws ValidationError on unsorted, overlapping, empty or out-of-range intervals.
    explicit LabelMap(std::vector<LabelInterval> intervals);

    const std::vector<LabelInterval>& intervals() const noexcept { return intervals_; }

    /// Binary search. Throws ValidationError for codes outside [0, 1].
    PatternClass lookup(double code) const;

    bool operator==(const LabelMap&) const = default;

private:
    std::vector<LabelInterval> intervals_;
};

/// Tags each sample with its nearest template and merges runs of equal class
/// whose dissimilarity is below `max_dissim`. A run over samples i..j covers
/// [mid(c[i-1], c[i]), mid(c[j], c[j+1])), with 0 and 1 at the ends.
LabelMap suggest_labels(const std::vector<SpectrumSample>& spectrum, const TemplateBank& bank,
                        double max_dissim = kDefaultSuggestMaxDissim);

/// JSON: [{"lo": 0.0, "hi": 0.25, "class": "OnCentre"}, ...]
void save_labelmap(const LabelMap& map, const std::filesystem::path& path);
LabelMap load_labelmap(const std::filesystem::path& path);
std::string labelmap_to_json(const LabelMap& map);
LabelMap labelmap_from_json(const std::string& text);

/// code, w0..w(k^2-1), class, dissimilarity (class and dissimilarity empty if not annotated).
void write_spectrum_csv(const std::vector<SpectrumSample>& spectrum, const std::filesystem::path& path);

}  // namespace kscope
