#include <doctest.h>

#include "kernelscope/classifier.hpp"
#include "kernelscope/error.hpp"
#include "kernelscope/random.hpp"
#include "oracles.hpp"

using namespace kscope;

namespace {

std::vector<Vector> blobs(std::size_t k, std::size_t per, double noise, std::uint64_t seed,
                          std::vector<std::size_t>* truth = nullptr) {
    Rng rng(seed);
    std::vector<Vector> centres;
    for (std::size_t c = 0; c < k; ++c) {
        Vector v(9);
        for (std::size_t j = 0; j < 9; ++j) v[j] = j == c % 9 ? 0.9 : 0.1 + 0.05 * static_cast<double>(c / 9);
        centres.push_back(v);
    }
    std::vector<Vector> pts;
    for (std::size_t i = 0; i < k * per; ++i) {
        Vector p = centres[i % k];
        for (double& x : p) x += noise * rng.normal();
        pts.push_back(p);
        if (truth) truth->push_back(i % k);
    }
    return pts;
}

}  // namespace

TEST_CASE("minmax_encode maps onto [0, 1]") {
    const Vector e = minmax_encode(Vector{2.0, 4.0, 3.0});
    CHECK(e == Vector{0.0, 1.0, 0.5});
    CHECK_THROWS_AS(minmax_encode(Vector(9, 0.3)), ConstantFilter);
}

TEST_CASE("k-means recovers separated blobs deterministically") {
    std::vector<std::size_t> truth;
    const auto pts = blobs(5, 30, 0.02, 3, &truth);
    KMeansOptions opt;
    opt.k_clusters = 5;
    opt.seed = 11;
    const KMeansResult a = kmeans_fit(pts, opt);
    CHECK(oracle::same_partition(a.labels, truth));
    CHECK(a.centroids.size() == 5);
    for (std::size_t i = 1; i < a.inertia_trace.size(); ++i) CHECK(a.inertia_trace[i] <= a.inertia_trace[i - 1]);
    CHECK(a.inertia == doctest::Approx(a.inertia_trace.back()));

    const KMeansResult b = kmeans_fit(pts, opt);
    CHECK(a.labels == b.labels);
    CHECK(a.centroids == b.centroids);
}

TEST_CASE("inertia equals the brute-force sum of squared distances") {
    const auto pts = blobs(4, 20, 0.2, 5);
    KMeansOptions opt;
    opt.k_clusters = 4;
    opt.seed = 2;
    const KMeansResult r = kmeans_fit(pts, opt);
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vector& c = r.centroids[r.labels[i]];
        for (std::size_t j = 0; j < c.size(); ++j) s += (pts[i][j] - c[j]) * (pts[i][j] - c[j]);
        for (const auto& other : r.centroids) {
            double d = 0.0, own = 0.0;
            for (std::size_t j = 0; j < c.size(); ++j) {
                d += (pts[i][j] - other[j]) * (pts[i][j] - other[j]);
                own += (pts[i][j] - c[j]) * (pts[i][j] - c[j]);
            }
            CHECK(own <= d + 1e-12);
        }
    }
    CHECK(r.inertia == doctest::Approx(s));
}

TEST_CASE("k-means handles duplicates and rejects bad input") {
    std::vector<Vector> pts(12, Vector{0.5, 0.5});
    pts.push_back({0.0, 1.0});
    KMeansOptions opt;
    opt.k_clusters = 3;
    opt.seed = 1;
    const KMeansResult r = kmeans_fit(pts, opt);
    CHECK(r.labels.size() == 13);
    CHECK(r.inertia == doctest::Approx(0.0).scale(1.0));

    opt.k_clusters = 20;
    CHECK_THROWS_AS(kmeans_fit(pts, opt), ValidationError);
    opt.k_clusters = 0;
    CHECK_THROWS_AS(kmeans_fit(pts, opt), ValidationError);
}

TEST_CASE("centroids are named by their nearest template") {
    const TemplateBank bank = default_template_bank(3);
    KMeansResult r;
    r.centroids = {minmax_encode(bank[0].kernel), Vector(9, 0.4)};
    const auto names = label_centroids(r, bank);
    CHECK(names[0] == bank[0].cls);
    CHECK(names[1] == PatternClass::Other);
}
