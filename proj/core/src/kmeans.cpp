#include <algorithm>
#include <limits>

#include "kernelscope/classifier.hpp"
#include "kernelscope/error.hpp"
#include "kernelscope/random.hpp"

namespace kscope {

namespace {

double sq_dist(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::vector<Vector> plus_plus_seeds(const std::vector<Vector>& pts, std::size_t k, Rng& rng) {
    std::vector<Vector> centers;
    centers.push_back(pts[rng.below(pts.size())]);
    std::vector<double> d2(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = sq_dist(pts[i], centers[0]);
    while (centers.size() < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t pick = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            pick = pts.size() - 1;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                target -= d2[i];
                if (target < 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(pts.size());
        }
        centers.push_back(pts[pick]);
        for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = std::min(d2[i], sq_dist(pts[i], centers.back()));
    }
    return centers;
}

KMeansResult lloyd(const std::vector<Vector>& pts, std::vector<Vector> centers, std::size_t max_iter) {
    const std::size_t k = centers.size();
    const std::size_t dim = pts.front().size();
    KMeansResult r;
    r.labels.assign(pts.size(), 0);
    std::vector<double> dist(pts.size());

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        bool changed = iter == 0;
        double inertia = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            std::size_t best = 0;
            double best_d = sq_dist(pts[i], centers[0]);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = sq_dist(pts[i], centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (best != r.labels[i]) changed = true;
            r.labels[i] = best;
            dist[i] = best_d;
            inertia += best_d;
        }
        r.inertia_trace.push_back(inertia);
        r.inertia = inertia;
        r.iterations = iter + 1;
        if (!changed) break;

        std::vector<Vector> sums(k, Vector(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            ++counts[r.labels[i]];
            for (std::size_t j = 0; j < dim; ++j) sums[r.labels[i]][j] += pts[i][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Farthest point from its current centroid seeds the empty cluster.
                const std::size_t far = static_cast<std::size_t>(
                    std::max_element(dist.begin(), dist.end()) - dist.begin());
                centers[c] = pts[far];
                dist[far] = 0.0;
                continue;
            }
            for (std::size_t j = 0; j < dim; ++j)
                centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }
    }
    r.centroids = std::move(centers);
    return r;
}

}  // namespace

Vector minmax_encode(std::span<const double> filter) {
    if (filter.empty()) throw ValidationError("cannot min-max encode an empty filter");
    const auto [lo, hi] = std::minmax_element(filter.begin(), filter.end());
    const double min = *lo;
    const double range = *hi - *lo;
    if (!(range > 0.0)) throw ConstantFilter();
    Vector out(filter.size());
    for (std::size_t i = 0; i < filter.size(); ++i) out[i] = (filter[i] - min) / range;
    return out;
}

KMeansResult kmeans_fit(const std::vector<Vector>& points, const KMeansOptions& options) {
    if (options.k_clusters < 1) throw ValidationError("k_clusters must be >= 1");
    if (points.size() < options.k_clusters)
        throw ValidationError("k-means needs at least " + std::to_string(options.k_clusters) +
                              " points, got " + std::to_string(points.size()));
    if (options.max_iter < 1 || options.n_restarts < 1)
        throw ValidationError("max_iter and n_restarts must be >= 1");
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) throw ValidationError("k-means points have inconsistent dimensions");
    }

    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t run = 0; run < options.n_restarts; ++run) {
        Rng rng(derive_seed(options.seed, run));
        KMeansResult r = lloyd(points, plus_plus_seeds(points, options.k_clusters, rng), options.max_iter);
        if (r.inertia < best.inertia) best = std::move(r);
    }
    return best;
}

std::vector<PatternClass> label_centroids(const KMeansResult& result, const TemplateBank& bank) {
    std::vector<PatternClass> out;
    out.reserve(result.centroids.size());
    for (const auto& c : result.centroids) {
        try {
            out.push_back(nearest_template(c, bank).cls);
        } catch (const DegenerateFilter&) {
            out.push_back(PatternClass::Other);
        }
    }
    return out;
}

}  // namespace kscope
