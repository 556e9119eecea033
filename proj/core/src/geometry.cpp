#include "kernelscope/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kernelscope/error.hpp"

namespace kscope {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

Vector center(std::span<const double> v) {
    Vector out(v.begin(), v.end());
    if (out.empty()) return out;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    for (double& x : out) x -= mean;
    return out;
}

Vector normalize(std::span<const double> v) {
    const double nrm = norm2(v);
    if (!(nrm > kNormEpsilon)) throw DegenerateFilter(nrm);
    Vector out(v.begin(), v.end());
    for (double& x : out) x /= nrm;
    return out;
}

Vector center_normalize(std::span<const double> v) { return normalize(center(v)); }

HyperplaneBasis::HyperplaneBasis(std::size_t n) : n_(n) {
    if (n < 2) throw ValidationError("hyperplane basis needs n >= 2, got " + std::to_string(n));
    rows_.assign((n - 1) * n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double di = static_cast<double>(i);
        const double scale = 1.0 / std::sqrt(di * (di + 1.0));
        double* row = rows_.data() + (i - 1) * n;
        for (std::size_t j = 0; j < i; ++j) row[j] = scale;
        row[i] = -di * scale;
    }
}

Vector HyperplaneBasis::to_hyperplane(std::span<const double> v) const {
    if (v.size() != n_)
        throw ValidationError("to_hyperplane: expected " + std::to_string(n_) + " entries, got " +
                              std::to_string(v.size()));
    const double sum = std::accumulate(v.begin(), v.end(), 0.0);
    if (std::abs(sum) > kCenteredTolerance) throw NotCentered(sum);
    Vector out(n_ - 1);
    project_into(v, out);
    return out;
}

void HyperplaneBasis::project_into(std::span<const double> v, std::span<double> out) const {
    for (std::size_t i = 0; i + 1 < n_; ++i) out[i] = dot(row(i), v);
}

Vector HyperplaneBasis::from_hyperplane(std::span<const double> u) const {
    if (u.size() != n_ - 1)
        throw ValidationError("from_hyperplane: expected " + std::to_string(n_ - 1) +
                              " entries, got " + std::to_string(u.size()));
    Vector out(n_);
    from_hyperplane_into(u, out);
    return out;
}

void HyperplaneBasis::from_hyperplane_into(std::span<const double> u, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i + 1 < n_; ++i) {
        const double ui = u[i];
        const double* r = rows_.data() + i * n_;
        // Row i is nonzero only in its first i+2 entries.
        for (std::size_t j = 0; j <= i + 1; ++j) out[j] += ui * r[j];
    }
}

PreprocessedFilter preprocess(std::span<const double> raw, const HyperplaneBasis& basis,
                              std::size_t source_index) {
    if (raw.size() != basis.n())
        throw ValidationError("preprocess: filter has " + std::to_string(raw.size()) +
                              " entries, basis expects " + std::to_string(basis.n()));
    PreprocessedFilter f;
    f.full = center_normalize(raw);
    f.reduced = basis.to_hyperplane(f.full);
    f.source_index = source_index;
    return f;
}

double mc_cosine_dissim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ValidationError("mc_cosine_dissim: size mismatch " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    const Vector ca = center(a);
    const Vector cb = center(b);
    const double na = norm2(ca);
    const double nb = norm2(cb);
    if (!(na > kNormEpsilon)) throw DegenerateFilter(na);
    if (!(nb > kNormEpsilon)) throw DegenerateFilter(nb);
    const double d = 1.0 - dot(ca, cb) / (na * nb);
    return std::clamp(d, 0.0, 2.0);
}

}  // namespace kscope
