#include "kernelscope/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "binary_io.hpp"
#include "kernelscope/error.hpp"
#include "kernelscope/random.hpp"

namespace kscope {

namespace {

constexpr char kMagic[4] = {'K', 'A', 'E', '1'};

std::vector<std::size_t> encoder_dims(std::size_t input_dim, const HiddenDims& h) {
    return {input_dim, h[0], h[1], h[2], h[3], 1};
}

std::vector<std::size_t> decoder_dims(std::size_t input_dim, const HiddenDims& h) {
    return {1, h[3], h[2], h[1], h[0], input_dim};
}

DenseLayer zero_layer(std::size_t in, std::size_t out) {
    return {in, out, std::vector<double>(in * out, 0.0), std::vector<double>(out, 0.0)};
}

DenseLayer zero_like(const DenseLayer& l) { return zero_layer(l.in, l.out); }

double leaky(double z, double slope) { return z > 0.0 ? z : slope * z; }
double leaky_grad(double z, double slope) { return z > 0.0 ? 1.0 : slope; }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void affine(const DenseLayer& l, std::span<const double> x, std::span<double> z) {
    for (std::size_t r = 0; r < l.out; ++r) {
        const double* row = l.weight.data() + r * l.in;
        double s = l.bias[r];
        for (std::size_t c = 0; c < l.in; ++c) s += row[c] * x[c];
        z[r] = s;
    }
}

// Per-sample activations kept for the backward pass. Index 0 of `act` is the
// layer input; pre[i] / act[i+1] are the pre-activation and output of layer i.
struct Trace {
    std::vector<Vector> enc_pre, enc_act;
    std::vector<Vector> dec_pre, dec_act;

    explicit Trace(const AutoencoderModel& m) {
        for (const auto& l : m.encoder) {
            if (enc_act.empty()) enc_act.emplace_back(l.in);
            enc_pre.emplace_back(l.out);
            enc_act.emplace_back(l.out);
        }
        for (const auto& l : m.decoder) {
            if (dec_act.empty()) dec_act.emplace_back(l.in);
            dec_pre.emplace_back(l.out);
            dec_act.emplace_back(l.out);
        }
    }
};

double forward_encoder(const AutoencoderModel& m, std::span<const double> u, Trace& t) {
    std::copy(u.begin(), u.end(), t.enc_act[0].begin());
    const std::size_t last = m.encoder.size() - 1;
    for (std::size_t i = 0; i <= last; ++i) {
        affine(m.encoder[i], t.enc_act[i], t.enc_pre[i]);
        auto& a = t.enc_act[i + 1];
        for (std::size_t j = 0; j < a.size(); ++j)
            a[j] = i == last ? sigmoid(t.enc_pre[i][j]) : leaky(t.enc_pre[i][j], m.leaky_slope);
    }
    return t.enc_act.back()[0];
}

const Vector& forward_decoder(const AutoencoderModel& m, double code, Trace& t) {
    t.dec_act[0][0] = code;
    const std::size_t last = m.decoder.size() - 1;
    for (std::size_t i = 0; i <= last; ++i) {
        affine(m.decoder[i], t.dec_act[i], t.dec_pre[i]);
        auto& a = t.dec_act[i + 1];
        for (std::size_t j = 0; j < a.size(); ++j)
            a[j] = i == last ? std::tanh(t.dec_pre[i][j]) : leaky(t.dec_pre[i][j], m.leaky_slope);
    }
    return t.dec_act.back();
}

// Scratch buffers for the full-space loss of one sample.
struct LossScratch {
    Vector recon_full, target_full, grad_full, grad_reduced;
    explicit LossScratch(std::size_t n)
        : recon_full(n), target_full(n), grad_full(n), grad_reduced(n - 1) {}
};

void center_in_place(std::span<double> v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    for (double& x : v) x -= mean;
}

// Mean-centered cosine dissimilarity between basis^T y and basis^T u. When
// `want_grad`, also writes d(loss)/dy into s.grad_reduced. Returns false for
// a degenerate reconstruction (loss 1, zero gradient).
bool sample_loss(const HyperplaneBasis& basis, std::span<const double> y, std::span<const double> u,
                 LossScratch& s, bool want_grad, double& out_loss) {
    basis.from_hyperplane_into(y, s.recon_full);
    basis.from_hyperplane_into(u, s.target_full);
    center_in_place(s.recon_full);
    center_in_place(s.target_full);
    const double na = norm2(s.recon_full);
    const double nb = norm2(s.target_full);
    if (!(na > kNormEpsilon) || !(nb > kNormEpsilon)) {
        out_loss = 1.0;
        if (want_grad) std::fill(s.grad_reduced.begin(), s.grad_reduced.end(), 0.0);
        return false;
    }
    const double cosine = dot(s.recon_full, s.target_full) / (na * nb);
    out_loss = 1.0 - cosine;
    if (!want_grad) return true;
    // d(1 - cos)/da = -(b / (|a||b|) - cos * a / |a|^2), then through the centering projection.
    for (std::size_t i = 0; i < s.grad_full.size(); ++i)
        s.grad_full[i] = -(s.target_full[i] / (na * nb) - cosine * s.recon_full[i] / (na * na));
    center_in_place(s.grad_full);
    basis.project_into(s.grad_full, s.grad_reduced);
    return true;
}

struct BatchResult {
    Gradients grads;
    double loss_sum = 0.0;
    std::size_t degenerate = 0;
};

Gradients zero_gradients(const AutoencoderModel& m) {
    Gradients g;
    for (const auto& l : m.encoder) g.encoder.push_back(zero_like(l));
    for (const auto& l : m.decoder) g.decoder.push_back(zero_like(l));
    return g;
}

// Backward through one layer: accumulates dW, db from dz and writes dx (if non-null).
void layer_backward(const DenseLayer& l, std::span<const double> x, std::span<const double> dz,
                    DenseLayer& g, std::span<double> dx) {
    for (std::size_t r = 0; r < l.out; ++r) {
        const double d = dz[r];
        g.bias[r] += d;
        double* grow = g.weight.data() + r * l.in;
        for (std::size_t c = 0; c < l.in; ++c) grow[c] += d * x[c];
    }
    if (dx.empty()) return;
    std::fill(dx.begin(), dx.end(), 0.0);
    for (std::size_t r = 0; r < l.out; ++r) {
        const double d = dz[r];
        const double* row = l.weight.data() + r * l.in;
        for (std::size_t c = 0; c < l.in; ++c) dx[c] += row[c] * d;
    }
}

void check_batch(const AutoencoderModel& m, std::span<const PreprocessedFilter> batch) {
    if (batch.empty()) throw ValidationError("loss needs a non-empty batch");
    for (const auto& f : batch) {
        if (f.reduced.size() != m.input_dim)
            throw ValidationError("filter has " + std::to_string(f.reduced.size()) +
                                  " reduced coordinates, model expects " + std::to_string(m.input_dim));
    }
}

// Sums (not means) of per-sample losses and gradients, in order. `indices`
// selects samples from `data`; empty means all of them.
BatchResult accumulate(const AutoencoderModel& m, const HyperplaneBasis& basis,
                       std::span<const PreprocessedFilter> data, std::span<const std::size_t> indices,
                       bool want_grad) {
    BatchResult res;
    if (want_grad) res.grads = zero_gradients(m);
    Trace t(m);
    LossScratch scratch(basis.n());

    std::vector<Vector> dec_delta, enc_delta;
    for (const auto& l : m.decoder) dec_delta.emplace_back(l.out);
    for (const auto& l : m.encoder) enc_delta.emplace_back(l.out);
    std::vector<Vector> dec_dx, enc_dx;
    for (const auto& l : m.decoder) dec_dx.emplace_back(l.in);
    for (const auto& l : m.encoder) enc_dx.emplace_back(l.in);

    const std::size_t count = indices.empty() ? data.size() : indices.size();
    for (std::size_t s = 0; s < count; ++s) {
        const PreprocessedFilter& f = data[indices.empty() ? s : indices[s]];
        const double code = forward_encoder(m, f.reduced, t);
        const Vector& y = forward_decoder(m, code, t);
        double l = 0.0;
        const bool ok = sample_loss(basis, y, f.reduced, scratch, want_grad, l);
        res.loss_sum += l;
        if (!ok) ++res.degenerate;
        if (!want_grad || !ok) continue;

        // Decoder, last layer first: tanh output.
        const std::size_t dl = m.decoder.size() - 1;
        for (std::size_t j = 0; j < y.size(); ++j)
            dec_delta[dl][j] = scratch.grad_reduced[j] * (1.0 - y[j] * y[j]);
        for (std::size_t i = dl + 1; i-- > 0;) {
            layer_backward(m.decoder[i], t.dec_act[i], dec_delta[i], res.grads.decoder[i], dec_dx[i]);
            if (i == 0) break;
            for (std::size_t j = 0; j < dec_delta[i - 1].size(); ++j)
                dec_delta[i - 1][j] = dec_dx[i][j] * leaky_grad(t.dec_pre[i - 1][j], m.leaky_slope);
        }
        // Code layer: sigmoid.
        const std::size_t el = m.encoder.size() - 1;
        enc_delta[el][0] = dec_dx[0][0] * code * (1.0 - code);
        for (std::size_t i = el + 1; i-- > 0;) {
            layer_backward(m.encoder[i], t.enc_act[i], enc_delta[i], res.grads.encoder[i],
                           i == 0 ? std::span<double>{} : std::span<double>(enc_dx[i]));
            if (i == 0) break;
            for (std::size_t j = 0; j < enc_delta[i - 1].size(); ++j)
                enc_delta[i - 1][j] = enc_dx[i][j] * leaky_grad(t.enc_pre[i - 1][j], m.leaky_slope);
        }
    }
    return res;
}

void scale(Gradients& g, double s) {
    for (auto* layers : {&g.encoder, &g.decoder}) {
        for (auto& l : *layers) {
            for (double& x : l.weight) x *= s;
            for (double& x : l.bias) x *= s;
        }
    }
}

template <typename Fn>
void for_each_parameter(AutoencoderModel& m, const Gradients& g, Fn&& fn) {
    std::size_t idx = 0;
    auto visit = [&](std::vector<DenseLayer>& layers, const std::vector<DenseLayer>& grads) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            for (std::size_t j = 0; j < layers[i].weight.size(); ++j)
                fn(idx++, layers[i].weight[j], grads[i].weight[j]);
            for (std::size_t j = 0; j < layers[i].bias.size(); ++j)
                fn(idx++, layers[i].bias[j], grads[i].bias[j]);
        }
    };
    visit(m.encoder, g.encoder);
    visit(m.decoder, g.decoder);
}

}  // namespace

HiddenDims default_hidden_dims(std::uint32_t kernel_size) {
    if (kernel_size == 7) return {32, 16, 8, 4};
    if (kernel_size == 5) return {20, 12, 6, 3};
    const std::uint32_t input = kernel_size * kernel_size - 1;
    HiddenDims h{};
    h[0] = std::max<std::uint32_t>(2, (2 * input + 2) / 3);
    for (std::size_t i = 1; i < 4; ++i) h[i] = std::max<std::uint32_t>(2, h[i - 1] / 2);
    return h;
}

AutoencoderModel init_model(std::uint32_t kernel_size, const HiddenDims& hidden, std::uint64_t seed,
                            double leaky_slope) {
    if (kernel_size < 3 || kernel_size % 2 == 0)
        throw ValidationError("kernel_size must be an odd integer >= 3");
    for (auto h : hidden) {
        if (h == 0) throw ValidationError("hidden dimensions must be positive");
    }
    if (!(leaky_slope >= 0.0 && leaky_slope < 1.0))
        throw ValidationError("leaky_slope must lie in [0, 1)");

    AutoencoderModel m;
    m.kernel_size = kernel_size;
    m.input_dim = static_cast<std::size_t>(kernel_size) * kernel_size - 1;
    m.hidden = hidden;
    m.leaky_slope = leaky_slope;
    m.seed = seed;

    Rng rng(seed);
    auto make = [&](const std::vector<std::size_t>& dims, std::vector<DenseLayer>& out) {
        for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
            DenseLayer l = zero_layer(dims[i], dims[i + 1]);
            const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
            for (double& w : l.weight) w = rng.uniform(-limit, limit);
            out.push_back(std::move(l));
        }
    };
    make(encoder_dims(m.input_dim, hidden), m.encoder);
    make(decoder_dims(m.input_dim, hidden), m.decoder);
    return m;
}

void validate(const AutoencoderModel& m) {
    if (m.kernel_size < 3 || m.kernel_size % 2 == 0)
        throw ValidationError("model kernel_size must be an odd integer >= 3");
    if (m.input_dim != static_cast<std::size_t>(m.kernel_size) * m.kernel_size - 1)
        throw ValidationError("model input_dim does not match kernel_size");
    if (m.encoder.size() != kEncoderLayers || m.decoder.size() != kDecoderLayers)
        throw ValidationError("model must have 5 encoder and 5 decoder layers");
    auto check = [](const std::vector<DenseLayer>& layers, const std::vector<std::size_t>& dims) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const auto& l = layers[i];
            if (l.in != dims[i] || l.out != dims[i + 1] || l.weight.size() != l.in * l.out ||
                l.bias.size() != l.out)
                throw ValidationError("layer dimension chain mismatch at layer " + std::to_string(i));
            for (double x : l.weight)
                if (!std::isfinite(x)) throw ValidationError("non-finite model parameter");
            for (double x : l.bias)
                if (!std::isfinite(x)) throw ValidationError("non-finite model parameter");
        }
    };
    check(m.encoder, encoder_dims(m.input_dim, m.hidden));
    check(m.decoder, decoder_dims(m.input_dim, m.hidden));
}

double encode(const AutoencoderModel& model, std::span<const double> reduced) {
    if (reduced.size() != model.input_dim)
        throw ValidationError("encode: expected " + std::to_string(model.input_dim) + " inputs, got " +
                              std::to_string(reduced.size()));
    Trace t(model);
    return forward_encoder(model, reduced, t);
}

Vector decode(const AutoencoderModel& model, double code) {
    if (!(code >= 0.0 && code <= 1.0))
        throw ValidationError("decode: code " + std::to_string(code) + " outside [0, 1]");
    Trace t(model);
    return forward_decoder(model, code, t);
}

Vector decode_full(const AutoencoderModel& model, const HyperplaneBasis& basis, double code) {
    return basis.from_hyperplane(decode(model, code));
}

LossSummary loss_summary(const AutoencoderModel& model, std::span<const PreprocessedFilter> batch) {
    check_batch(model, batch);
    const HyperplaneBasis basis(model.input_dim + 1);
    const BatchResult r = accumulate(model, basis, batch, {}, false);
    return {r.loss_sum / static_cast<double>(batch.size()), r.degenerate};
}

double loss(const AutoencoderModel& model, std::span<const PreprocessedFilter> batch) {
    return loss_summary(model, batch).mean;
}

Gradients gradients(const AutoencoderModel& model, std::span<const PreprocessedFilter> batch) {
    check_batch(model, batch);
    const HyperplaneBasis basis(model.input_dim + 1);
    BatchResult r = accumulate(model, basis, batch, {}, true);
    scale(r.grads, 1.0 / static_cast<double>(batch.size()));
    return std::move(r.grads);
}

std::size_t parameter_count(const AutoencoderModel& model) {
    std::size_t n = 0;
    for (const auto* layers : {&model.encoder, &model.decoder})
        for (const auto& l : *layers) n += l.weight.size() + l.bias.size();
    return n;
}

namespace {

template <typename Layers>
auto& locate(Layers& encoder, Layers& decoder, std::size_t index) {
    for (auto* layers : {&encoder, &decoder}) {
        for (auto& l : *layers) {
            if (index < l.weight.size()) return l.weight[index];
            index -= l.weight.size();
            if (index < l.bias.size()) return l.bias[index];
            index -= l.bias.size();
        }
    }
    throw ValidationError("parameter index out of range");
}

}  // namespace

double& parameter(AutoencoderModel& model, std::size_t index) {
    return locate(model.encoder, model.decoder, index);
}

double parameter(const Gradients& grads, std::size_t index) {
    return locate(grads.encoder, grads.decoder, index);
}

void validate(const TrainConfig& c) {
    if (c.epochs < 1) throw ValidationError("epochs must be >= 1");
    if (c.batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (!(c.learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
}

PreprocessedCorpus preprocess_corpus(const Corpus& corpus, const HyperplaneBasis& basis) {
    PreprocessedCorpus out;
    out.filters.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        try {
            out.filters.push_back(preprocess(weights_f64(corpus[i]), basis, i));
        } catch (const DegenerateFilter&) {
            out.degenerate.push_back(i);
        }
    }
    return out;
}

TrainResult train(AutoencoderModel model, std::span<const PreprocessedFilter> data,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
    validate(config);
    validate(model);
    if (data.empty()) throw ValidationError("cannot train on an empty corpus");
    check_batch(model, data);

    const HyperplaneBasis basis(model.input_dim + 1);
    TrainResult result;
    result.initial_loss = accumulate(model, basis, data, {}, false).loss_sum / static_cast<double>(data.size());

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(config.seed);

    const std::size_t n_params = parameter_count(model);
    std::vector<double> m1(n_params, 0.0), m2(n_params, 0.0);
    std::uint64_t step = 0;

    for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) {
            for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> batch(order.data() + start, end - start);
            BatchResult r = accumulate(model, basis, data, batch, true);
            epoch_loss += r.loss_sum;
            scale(r.grads, 1.0 / static_cast<double>(batch.size()));

            ++step;
            const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
            for_each_parameter(model, r.grads, [&](std::size_t i, double& p, double g) {
                m1[i] = config.adam_beta1 * m1[i] + (1.0 - config.adam_beta1) * g;
                m2[i] = config.adam_beta2 * m2[i] + (1.0 - config.adam_beta2) * g * g;
                const double mhat = m1[i] / bc1;
                const double vhat = m2[i] / bc2;
                p -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_epsilon);
            });
        }
        const double mean = epoch_loss / static_cast<double>(order.size());
        result.loss_history.push_back(mean);
        if (on_epoch) on_epoch(epoch + 1, mean);
    }
    result.model = std::move(model);
    return result;
}

TrainResult train(AutoencoderModel model, const Corpus& corpus, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    if (corpus.empty()) throw ValidationError("cannot train on an empty corpus");
    if (corpus.kernel_size() != model.kernel_size)
        throw ValidationError("corpus kernel_size " + std::to_string(corpus.kernel_size()) +
                              " does not match model kernel_size " + std::to_string(model.kernel_size));
    const HyperplaneBasis basis(model.input_dim + 1);
    PreprocessedCorpus pre = preprocess_corpus(corpus, basis);
    if (pre.filters.empty()) throw ValidationError("every filter in the corpus is degenerate");
    TrainResult r = train(std::move(model), pre.filters, config, on_epoch);
    r.degenerate_skipped = pre.degenerate.size();
    return r;
}

void save_model(const AutoencoderModel& model, const std::filesystem::path& path) {
    validate(model);
    detail::ByteWriter w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(model.kernel_size);
    for (auto h : model.hidden) w.u32(h);
    w.f64(model.leaky_slope);
    for (const auto* layers : {&model.encoder, &model.decoder}) {
        for (const auto& l : *layers) {
            for (double x : l.weight) w.f64(x);
            for (double x : l.bias) w.f64(x);
        }
    }
    detail::write_file(path, w.buffer());
}

AutoencoderModel load_model(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> data = detail::read_file(path);
    detail::ByteReader r(data);
    char magic[4];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw FormatError("'" + path.string() + "' is not a KAE1 model (bad magic)");

    AutoencoderModel m;
    m.kernel_size = r.u32();
    if (m.kernel_size < 3 || m.kernel_size % 2 == 0 || m.kernel_size > 1023)
        throw FormatError("model file has invalid kernel_size " + std::to_string(m.kernel_size));
    for (auto& h : m.hidden) {
        h = r.u32();
        if (h == 0 || h > (1u << 20)) throw FormatError("dimension chain mismatch: hidden dim " + std::to_string(h));
    }
    m.leaky_slope = r.f64();
    m.input_dim = static_cast<std::size_t>(m.kernel_size) * m.kernel_size - 1;

    auto read_layers = [&](const std::vector<std::size_t>& dims, std::vector<DenseLayer>& out) {
        for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
            DenseLayer l = zero_layer(dims[i], dims[i + 1]);
            if ((l.weight.size() + l.bias.size()) * sizeof(double) > r.remaining())
                throw FormatError("truncated payload");
            for (double& x : l.weight) x = r.f64();
            for (double& x : l.bias) x = r.f64();
            out.push_back(std::move(l));
        }
    };
    read_layers(encoder_dims(m.input_dim, m.hidden), m.encoder);
    read_layers(decoder_dims(m.input_dim, m.hidden), m.decoder);
    if (r.remaining() != 0) throw FormatError("dimension chain mismatch: trailing bytes after parameters");
    try {
        validate(m);
    } catch (const ValidationError& e) {
        throw FormatError(e.what());
    }
    return m;
}

}  // namespace kscope
