#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kernelscope/error.hpp"
#include "kernelscope/geometry.hpp"

namespace kscope::oracle {

namespace {

using L = long double;

struct RefLayer {
    std::size_t in, out;
    std::vector<L> w, b;
};

std::vector<RefLayer> widen(const std::vector<DenseLayer>& layers, std::size_t& flat, std::size_t index,
                            L delta) {
    std::vector<RefLayer> out;
    for (const auto& d : layers) {
        RefLayer r{d.in, d.out, {d.weight.begin(), d.weight.end()}, {d.bias.begin(), d.bias.end()}};
        for (auto* v : {&r.w, &r.b}) {
            if (index >= flat && index < flat + v->size()) (*v)[index - flat] += delta;
            flat += v->size();
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<L> affine(const RefLayer& l, const std::vector<L>& x) {
    std::vector<L> y(l.out);
    for (std::size_t r = 0; r < l.out; ++r) {
        L s = l.b[r];
        for (std::size_t c = 0; c < l.in; ++c) s += l.w[r * l.in + c] * x[c];
        y[r] = s;
    }
    return y;
}

// Helmert rows, recomputed here rather than taken from HyperplaneBasis.
std::vector<L> to_full(const std::vector<L>& u) {
    const std::size_t n = u.size() + 1;
    std::vector<L> v(n, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const L k = static_cast<L>(i + 1);
        const L s = std::sqrt(k * (k + 1));
        for (std::size_t j = 0; j <= i; ++j) v[j] += u[i] / s;
        v[i + 1] -= k * u[i] / s;
    }
    return v;
}

L centered_cosine_dissim(std::vector<L> a, std::vector<L> b) {
    L ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<L>(a.size());
    mb /= static_cast<L>(b.size());
    L ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const L x = a[i] - ma, y = b[i] - mb;
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    return 1 - ab / (std::sqrt(aa) * std::sqrt(bb));
}

}  // namespace

long double reference_loss(const AutoencoderModel& model, std::span<const PreprocessedFilter> batch,
                           std::size_t index, long double delta) {
    std::size_t flat = 0;
    const auto enc = widen(model.encoder, flat, index, delta);
    const auto dec = widen(model.decoder, flat, index, delta);
    const L slope = model.leaky_slope;
    const auto leaky = [&](std::vector<L>& v) {
        for (L& x : v) x = x > 0 ? x : slope * x;
    };
    L total = 0;
    for (const auto& f : batch) {
        std::vector<L> a(f.reduced.begin(), f.reduced.end());
        for (std::size_t i = 0; i < enc.size(); ++i) {
            a = affine(enc[i], a);
            if (i + 1 < enc.size()) leaky(a);
        }
        a[0] = 1 / (1 + std::exp(-a[0]));
        for (std::size_t i = 0; i < dec.size(); ++i) {
            a = affine(dec[i], a);
            if (i + 1 < dec.size()) leaky(a);
        }
        for (L& x : a) x = std::tanh(x);
        total += centered_cosine_dissim(to_full(a), to_full({f.reduced.begin(), f.reduced.end()}));
    }
    return total / static_cast<L>(batch.size());
}

double fd_gradient(const AutoencoderModel& model, std::span<const PreprocessedFilter> batch, std::size_t index,
                   double h) {
    const L hl = h;
    return static_cast<double>((reference_loss(model, batch, index, hl) - reference_loss(model, batch, index, -hl)) /
                               (2 * hl));
}

double gradient_rel_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-7});
}

Vector fd_dog_derivative(const TemplateSpec& spec, DerivativeOrder order, Axis axis, long double h) {
    using L = long double;
    const auto f = [&](L x, L y) { return dog_value<L>(spec, x, y); };
    Vector out;
    for (const auto& [xd, yd] : grid_coords(spec.size)) {
        const L x = xd, y = yd;
        L v = 0;
        if (order == DerivativeOrder::First) {
            v = axis == Axis::X ? (f(x + h, y) - f(x - h, y)) / (2 * h) : (f(x, y + h) - f(x, y - h)) / (2 * h);
        } else if (axis == Axis::X) {
            v = (f(x + h, y) - 2 * f(x, y) + f(x - h, y)) / (h * h);
        } else if (axis == Axis::Y) {
            v = (f(x, y + h) - 2 * f(x, y) + f(x, y - h)) / (h * h);
        } else {
            v = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h);
        }
        out.push_back(static_cast<double>(v));
    }
    return out;
}

Assignment brute_force_classify(std::span<const double> raw, const Codebook& codebook, const LabelMap& labels,
                                double threshold) {
    Assignment a;
    double best = 3.0;
    std::size_t arg = 0;
    try {
        for (std::size_t i = 0; i < codebook.kernels.size(); ++i) {
            const double d = mc_cosine_dissim(raw, codebook.kernels[i]);
            if (d < best) {
                best = d;
                arg = i;
            }
        }
    } catch (const DegenerateFilter&) {
        a.reason = AssignReason::Degenerate;
        return a;
    }
    a.dissimilarity = best;
    if (best < threshold) {
        a.matched_code = codebook.codes[arg];
        a.cls = labels.lookup(codebook.codes[arg]);
        a.reason = AssignReason::Matched;
    } else {
        a.reason = AssignReason::AboveThreshold;
    }
    return a;
}

bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) return false;
    std::map<std::size_t, std::size_t> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto [it1, new1] = ab.emplace(a[i], b[i]);
        const auto [it2, new2] = ba.emplace(b[i], a[i]);
        if (it1->second != b[i] || it2->second != a[i]) return false;
    }
    return true;
}

double mirror_pair_sum(std::span<const double> kernel, int size, Axis axis) {
    double total = 0.0;
    for (int r = 0; r < size; ++r) {
        for (int col = 0; col < size; ++col) {
            const int mr = axis == Axis::Y ? size - 1 - r : r;
            const int mc = axis == Axis::X ? size - 1 - col : col;
            const int i = r * size + col, j = mr * size + mc;
            if (i < j) total += kernel[static_cast<std::size_t>(i)] + kernel[static_cast<std::size_t>(j)];
            if (i == j) total += kernel[static_cast<std::size_t>(i)];
        }
    }
    return total;
}

}  // namespace kscope::oracle
