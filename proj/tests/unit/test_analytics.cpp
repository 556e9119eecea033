#include <doctest.h>

#include <fstream>

#include "kernelscope/analytics.hpp"
#include "kernelscope/error.hpp"
#include "kernelscope/initgen.hpp"
#include "temp_dir.hpp"

using namespace kscope;

namespace {

Corpus layered() {
    std::vector<FilterRecord> recs;
    for (std::uint32_t i = 0; i < 10; ++i) {
        FilterRecord r;
        r.model_id = "m";
        r.layer_index = i < 4 ? 0 : 1;
        r.channel_index = i;
        r.kernel_size = 3;
        for (int j = 0; j < 9; ++j) r.weights.push_back(static_cast<float>(i) + (j == 4 ? 1.0f : 0.0f));
        recs.push_back(r);
    }
    return Corpus(3, recs);
}

std::vector<Assignment> assign(const std::vector<PatternClass>& classes) {
    std::vector<Assignment> out;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        Assignment a;
        a.source_index = i;
        a.cls = classes[i];
        a.reason = classes[i] == PatternClass::Other ? AssignReason::AboveThreshold : AssignReason::Matched;
        out.push_back(a);
    }
    return out;
}

}  // namespace

TEST_CASE("quantile type 7 matches R") {
    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(quantile_type7(v, 0.25) == doctest::Approx(3.25));
    CHECK(quantile_type7(v, 0.5) == doctest::Approx(5.5));
    CHECK(quantile_type7(v, 0.75) == doctest::Approx(7.75));
    CHECK(quantile_type7({4.0}, 0.3) == 4.0);
    CHECK(quantile_type7({3, 1, 2}, 1.0) == 3.0);
    CHECK_THROWS_AS(quantile_type7({}, 0.5), ValidationError);
    const BoxStats s = box_stats({5, 1, 3});
    CHECK(s.count == 3);
    CHECK(s.min == 1);
    CHECK(s.median == 3);
    CHECK(s.max == 5);
    CHECK(s.mean == doctest::Approx(3.0));
}

TEST_CASE("clustered percentage counts named, non-degenerate filters") {
    auto as = assign({PatternClass::OnCentre, PatternClass::Other, PatternClass::OffDx, PatternClass::Other});
    CHECK(clustered_percentage(as) == doctest::Approx(50.0));
    as[0].reason = AssignReason::Degenerate;
    as[0].cls = PatternClass::Other;
    CHECK(clustered_percentage(as) == doctest::Approx(25.0));
    CHECK(category_of(as[0]) == "Degenerate");
    CHECK(category_of(as[2]) == "OffDx");
    CHECK_THROWS_AS(clustered_percentage({}), ValidationError);
}

TEST_CASE("layer proportions") {
    const Corpus c = layered();
    std::vector<PatternClass> cls(10, PatternClass::OnCentre);
    cls[0] = PatternClass::Other;
    cls[5] = PatternClass::OffCross;
    cls[6] = PatternClass::OffCross;
    const ProportionTable t = layer_proportions(c, assign(cls));
    CHECK(t.denominators.at(0) == 4);
    CHECK(t.denominators.at(1) == 6);
    CHECK(t.rows.size() == 2 * all_categories().size());
    for (const auto& r : t.rows) {
        if (r.layer_index == 0 && r.category == "OnCentre") CHECK(r.fraction == doctest::Approx(0.75));
        if (r.layer_index == 1 && r.category == "OffCross") CHECK(r.fraction == doctest::Approx(1.0 / 3.0));
        if (r.category == "Degenerate") CHECK(r.fraction == 0.0);
    }
    auto misaligned = assign(cls);
    misaligned.pop_back();
    CHECK_THROWS_AS(layer_proportions(c, misaligned), ValidationError);
}

TEST_CASE("total activation and its statistics") {
    const Corpus c = layered();
    CHECK(total_activation(c[2]) == doctest::Approx(19.0));
    const auto stats = activation_stats(c, assign(std::vector<PatternClass>(10, PatternClass::OnDy)));
    REQUIRE(stats.count("OnDy") == 1);
    CHECK(stats.at("OnDy").count == 10);
    CHECK(stats.at("OnDy").median == doctest::Approx(9.0 * 4.5 + 1.0));
}

TEST_CASE("merge_labels relabels and keeps the clustered percentage") {
    auto as = assign({PatternClass::OnDx, PatternClass::OffDx, PatternClass::Other, PatternClass::OnDy});
    const auto merged = merge_labels(as, parse_merges({"OnDx=OnCentre", "OffDx=OnCentre"}));
    CHECK(merged[0].cls == PatternClass::OnCentre);
    CHECK(merged[1].cls == PatternClass::OnCentre);
    CHECK(merged[3].cls == PatternClass::OnDy);
    CHECK(clustered_percentage(merged) == clustered_percentage(as));
    CHECK_THROWS_AS(parse_merges({"OnDx"}), ValidationError);
    CHECK_THROWS_AS(parse_merges({"OnDx=Bogus"}), ValidationError);
}

TEST_CASE("PCA on a rank-two cloud") {
    std::vector<Vector> ks;
    for (int i = 0; i < 30; ++i) {
        Vector v(9, 0.0);
        v[0] = std::sin(i * 0.7) * 3.0;
        v[8] = -v[0];
        v[1] = std::cos(i * 1.3);
        v[3] = -v[1];
        ks.push_back(v);
    }
    const PcaResult p = pca_embed(ks, 3);
    CHECK(p.explained_ratio.size() == 2);
    CHECK_FALSE(p.notice.empty());
    CHECK(p.explained_ratio[0] >= p.explained_ratio[1]);
    CHECK(p.explained_ratio[0] + p.explained_ratio[1] == doctest::Approx(1.0));
    for (const auto& comp : p.components) {
        CHECK(norm2(comp) == doctest::Approx(1.0));
        double big = 0.0;
        for (double x : comp)
            if (std::abs(x) > std::abs(big)) big = x;
        CHECK(big > 0.0);
    }
    CHECK(p.embeddings.size() == 30);
    CHECK_THROWS_AS(pca_embed(std::vector<Vector>(2, Vector(9, 1.0)), 3), ValidationError);
}

TEST_CASE("timeline rows") {
    const auto a = assign({PatternClass::OnCentre, PatternClass::Other});
    const auto b = assign({PatternClass::OnCentre, PatternClass::OffCentre});
    const auto rows = timeline({{"epoch0", a}, {"epoch9", b}});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].clustered_percentage == doctest::Approx(50.0));
    CHECK(rows[1].clustered_percentage == doctest::Approx(100.0));
    CHECK(rows[1].proportions.at("OffCentre") == doctest::Approx(0.5));
    CHECK(rows[1].proportions.size() == all_categories().size());
}

TEST_CASE("CSV writers emit headers") {
    testing::TempDir dir;
    const Corpus c = layered();
    const auto as = assign(std::vector<PatternClass>(10, PatternClass::OnCentre));
    write_proportions_csv(layer_proportions(c, as), dir / "p.csv");
    write_activation_csv(activation_stats(c, as), dir / "a.csv");
    const auto first_line = [&](const char* name) {
        std::ifstream in(dir / name);
        std::string l;
        std::getline(in, l);
        return l;
    };
    CHECK(first_line("p.csv") == "layer_index,category,fraction,count");
    CHECK(first_line("a.csv") == "category,count,min,q1,median,q3,max,mean");
}
