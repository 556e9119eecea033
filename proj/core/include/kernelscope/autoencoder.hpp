#pragma once

// Fully connected autoencoder with a one-dimensional sigmoid code.
//
//   encoder: (k^2-1) -> h1 -> h2 -> h3 -> h4 -> 1   leaky ReLU, then sigmoid
//   decoder: 1 -> h4 -> h3 -> h2 -> h1 -> (k^2-1)   leaky ReLU, then tanh
//
// Inputs are hyperplane coordinates of preprocessed filters. The loss is the
// mean-centered cosine dissimilarity between the decoded and the original
// filter, both mapped back to the full k x k space. Gradients are derived by
// hand; training uses Adam with a single fixed accumulation order, so a seed
// fully determines the trained parameters.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "kernelscope/corpus.hpp"
#include "kernelscope/geometry.hpp"

namespace kscope {

/// Dense layer y = W x + b, W stored row-major (out x in).
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    double& w(std::size_t row, std::size_t col) { return weight[row * in + col]; }
    double w(std::size_t row, std::size_t col) const { return weight[row * in + col]; }

    bool operator==(const DenseLayer&) const = default;
};

using HiddenDims = std::array<std::uint32_t, 4>;

inline constexpr std::size_t kEncoderLayers = 5;
inline constexpr std::size_t kDecoderLayers = 5;

struct AutoencoderModel {
    std::uint32_t kernel_size = 0;
    std::size_t input_dim = 0;  // kernel_size^2 - 1
    HiddenDims hidden{};
    double leaky_slope = 0.01;
    std::uint64_t seed = 0;  // provenance only; not persisted
    std::vector<DenseLayer> encoder;
    std::vector<DenseLayer> decoder;

    /// Architecture and parameters; ignores the seed.
    bool same_parameters(const AutoencoderModel& other) const {
        return kernel_size == other.kernel_size && hidden == other.hidden &&
               leaky_slope == other.leaky_slope && encoder == other.encoder && decoder == other.decoder;
    }
};

/// (32,16,8,4) for 7x7 and (20,12,6,3) for 5x5; other sizes taper from 2/3 of the input by halves.
HiddenDims default_hidden_dims(std::uint32_t kernel_size);

/// Glorot-uniform weights from `seed`, zero biases.
AutoencoderModel init_model(std::uint32_t kernel_size, const HiddenDims& hidden, std::uint64_t seed,
                            double leaky_slope = 0.01);

/// Throws ValidationError if the layer chain or parameters are inconsistent.
void validate(const AutoencoderModel& model);

/// Code in (0, 1) for a reduced (k^2-1)-dim input.
double encode(const AutoencoderModel& model, std::span<const double> reduced);

/// Reduced-space reconstruction, entries in (-1, 1). Throws for code outside [0, 1].
Vector decode(const AutoencoderModel& model, double code);

/// Decoded kernel mapped back to the full k x k space (not renormalized).
Vector decode_full(const AutoencoderModel& model, const HyperplaneBasis& basis, double code);

struct LossSummary {
    double mean = 0.0;
    std::size_t degenerate = 0;  // decoded outputs with vanishing centered norm (scored 1)
};

LossSummary loss_summary(const AutoencoderModel& model, std::span<const PreprocessedFilter> batch);
double loss(const AutoencoderModel& model, std::span<const PreprocessedFilter> batch);

/// Same shape as the model: one DenseLayer of partial derivatives per layer.
struct Gradients {
    std::vector<DenseLayer> encoder;
    std::vector<DenseLayer> decoder;
};

/// Exact gradient of loss() with respect to every parameter.
Gradients gradients(const AutoencoderModel& model, std::span<const PreprocessedFilter> batch);

/// Flat indexing over all parameters: encoder layers then decoder layers,
/// each as weights (row-major) followed by biases.
std::size_t parameter_count(const AutoencoderModel& model);
double& parameter(AutoencoderModel& model, std::size_t index);
double parameter(const Gradients& grads, std::size_t index);

struct TrainConfig {
    std::uint32_t epochs = 200;
    std::uint32_t batch_size = 256;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    bool shuffle = true;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
};

void validate(const TrainConfig& config);

struct TrainResult {
    AutoencoderModel model;
    double initial_loss = 0.0;         // full-data loss before the first update
    std::vector<double> loss_history;  // mean batch loss per epoch
    std::size_t degenerate_skipped = 0;
};

using EpochCallback = std::function<void(std::uint32_t epoch, double mean_loss)>;

TrainResult train(AutoencoderModel model, std::span<const PreprocessedFilter> data,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Preprocesses the corpus (degenerate filters are skipped and counted) and trains.
TrainResult train(AutoencoderModel model, const Corpus& corpus, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// KAE1: magic, kernel_size u32, 4 hidden dims u32, leaky_slope f64, then for
/// each encoder and decoder layer its weights (row-major) and biases as f64.
void save_model(const AutoencoderModel& model, const std::filesystem::path& path);
AutoencoderModel load_model(const std::filesystem::path& path);

/// Preprocesses every record; degenerate records are reported by index.
struct PreprocessedCorpus {
    std::vector<PreprocessedFilter> filters;
    std::vector<std::size_t> degenerate;
};
PreprocessedCorpus preprocess_corpus(const Corpus& corpus, const HyperplaneBasis& basis);

}  // namespace kscope
