#pragma once

// DoG-family kernel generation: initialization tensors for depthwise layers
// and labeled synthetic corpora drawn from the template bank.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kernelscope/corpus.hpp"
#include "kernelscope/dogfamily.hpp"

namespace kscope {

enum class InitGroup { OnCentre, OffCentre, Cross, FirstDerivative, SecondDerivative };

std::string_view to_string(InitGroup group) noexcept;
InitGroup parse_init_group(std::string_view name);

using GroupProportions = std::map<InitGroup, double>;

/// 45% on-centre, 10% off-centre, 15% cross, 20% first derivative, 10% second derivative.
GroupProportions default_init_proportions();

/// Group a pattern class belongs to; throws ValidationError for Square*/Other.
InitGroup group_of(PatternClass cls);

struct InitSpec {
    std::uint32_t kernel_size = 7;
    std::vector<std::uint32_t> layer_channels;
    GroupProportions proportions = default_init_proportions();
    std::pair<double, double> sigma1_range{0.5, 1.3};
    double sigma_ratio = 2.0;
    std::pair<double, double> cross_sigma_range{0.4, 0.8};
    std::uint64_t seed = 0;
    std::string model_id = "dog-init";
};

void validate(const InitSpec& spec);

struct GeneratedKernels {
    Corpus corpus{3};
    std::vector<PatternClass> classes;  // generating class per record
    std::vector<TemplateSpec> specs;    // generating template per record
};

/// Per channel: class drawn from the proportions, sigma1 uniform in
/// sigma1_range, sigma2 = sigma_ratio * sigma1, derivative variant and
/// cross / second-derivative polarity uniform, cross sigma uniform in
/// cross_sigma_range. Kernels are raw, rescaled to an elementwise standard
/// deviation of sqrt(2 / k^2). Each (layer, channel) has its own RNG stream.
GeneratedKernels generate_init_labeled(const InitSpec& spec);
Corpus generate_init(const InitSpec& spec);

struct SyntheticSpec {
    std::size_t count = 10000;
    GroupProportions proportions = default_init_proportions();
    /// ||template||^2 / E||noise||^2; non-positive means no noise.
    double snr = 10.0;
    std::uint64_t seed = 0;
    std::uint32_t layers = 1;  // records are split into contiguous layer blocks
    std::string model_id = "synthetic";
};

/// Bank templates (unit norm) plus i.i.d. Gaussian noise. A record's group is
/// drawn from the proportions, then a template uniformly among that group's
/// bank entries.
GeneratedKernels sample_bank_corpus(const TemplateBank& bank, const SyntheticSpec& spec);

}  // namespace kscope
