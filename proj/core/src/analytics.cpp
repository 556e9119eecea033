#include "kernelscope/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Dense>

#include "kernelscope/error.hpp"
#include "kernelscope/text.hpp"

namespace kscope {

namespace {

constexpr const char* kDegenerate = "Degenerate";

void check_aligned(const Corpus& corpus, const std::vector<Assignment>& assignments) {
    if (assignments.size() != corpus.size())
        throw ValidationError("assignments (" + std::to_string(assignments.size()) +
                              ") are not aligned with the corpus (" + std::to_string(corpus.size()) + ")");
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i].source_index != i)
            throw ValidationError("assignment " + std::to_string(i) + " refers to record " +
                                  std::to_string(assignments[i].source_index));
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

std::string category_of(const Assignment& a) {
    if (a.reason == AssignReason::Degenerate) return kDegenerate;
    return std::string(to_string(a.cls));
}

const std::vector<std::string>& all_categories() {
    static const std::vector<std::string> cats = [] {
        std::vector<std::string> c;
        for (PatternClass cls : kAllPatternClasses) c.emplace_back(to_string(cls));
        c.emplace_back(kDegenerate);
        return c;
    }();
    return cats;
}

ProportionTable layer_proportions(const Corpus& corpus, const std::vector<Assignment>& assignments) {
    check_aligned(corpus, assignments);
    std::map<std::uint32_t, std::map<std::string, std::size_t>> counts;
    ProportionTable t;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const std::uint32_t layer = corpus[i].layer_index;
        ++counts[layer][category_of(assignments[i])];
        ++t.denominators[layer];
    }
    for (const auto& [layer, by_cat] : counts) {
        const double total = static_cast<double>(t.denominators[layer]);
        for (const auto& cat : all_categories()) {
            const auto it = by_cat.find(cat);
            const double n = it == by_cat.end() ? 0.0 : static_cast<double>(it->second);
            t.rows.push_back({layer, cat, n / total});
        }
    }
    return t;
}

double clustered_percentage(const std::vector<Assignment>& assignments) {
    if (assignments.empty()) throw ValidationError("clustered_percentage of an empty assignment list");
    std::size_t named = 0;
    for (const auto& a : assignments) {
        if (a.cls != PatternClass::Other && a.reason != AssignReason::Degenerate) ++named;
    }
    return 100.0 * static_cast<double>(named) / static_cast<double>(assignments.size());
}

double quantile_type7(std::vector<double> values, double p) {
    if (values.empty()) throw ValidationError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BoxStats box_stats(std::vector<double> values) {
    BoxStats s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.count = values.size();
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile_type7(values, 0.25);
    s.median = quantile_type7(values, 0.5);
    s.q3 = quantile_type7(values, 0.75);
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    return s;
}

double total_activation(const FilterRecord& record) {
    double s = 0.0;
    for (float w : record.weights) s += static_cast<double>(w);
    return s;
}

std::map<std::string, BoxStats> activation_stats(const Corpus& corpus,
                                                 const std::vector<Assignment>& assignments) {
    check_aligned(corpus, assignments);
    std::map<std::string, std::vector<double>> by_cat;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        by_cat[category_of(assignments[i])].push_back(total_activation(corpus[i]));
    std::map<std::string, BoxStats> out;
    for (auto& [cat, values] : by_cat) out[cat] = box_stats(std::move(values));
    return out;
}

PcaResult pca_embed(const std::vector<Vector>& kernels, std::size_t n_components) {
    if (n_components < 1) throw ValidationError("pca needs at least one component");
    if (kernels.size() < n_components + 1)
        throw ValidationError("pca needs at least " + std::to_string(n_components + 1) + " filters");
    const std::size_t n = kernels.size();
    const std::size_t dim = kernels.front().size();

    Eigen::MatrixXd x(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        if (kernels[i].size() != dim) throw ValidationError("pca inputs have inconsistent sizes");
        const Vector c = center(kernels[i]);
        for (std::size_t j = 0; j < dim; ++j) x(i, j) = c[j];
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("covariance eigendecomposition failed");
    // Eigen returns ascending eigenvalues.
    const Eigen::VectorXd evals = solver.eigenvalues().reverse();
    const Eigen::MatrixXd evecs = solver.eigenvectors().rowwise().reverse();

    const double total = std::max(0.0, evals.sum());
    const double tol = 1e-12 * std::max(1.0, std::abs(evals(0)));
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
        if (evals(i) > tol) ++rank;
    }

    PcaResult r;
    const std::size_t m = std::min(n_components, rank);
    if (m < n_components)
        r.notice = "data has rank " + std::to_string(rank) + "; returning " + std::to_string(m) +
                   " of " + std::to_string(n_components) + " components";
    for (std::size_t c = 0; c < m; ++c) {
        Eigen::VectorXd v = evecs.col(static_cast<Eigen::Index>(c));
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        r.components.emplace_back(v.data(), v.data() + v.size());
        r.explained_ratio.push_back(total > 0.0 ? std::max(0.0, evals(static_cast<Eigen::Index>(c))) / total : 0.0);
    }
    r.embeddings.assign(n, Vector(m, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < m; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim; ++j) s += x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * r.components[c][j];
            r.embeddings[i][c] = s;
        }
    }
    return r;
}

PcaResult pca_embed(const Corpus& corpus, std::size_t n_components) {
    std::vector<Vector> kernels;
    kernels.reserve(corpus.size());
    for (const auto& rec : corpus.records()) kernels.push_back(weights_f64(rec));
    return pca_embed(kernels, n_components);
}

std::vector<Assignment> merge_labels(const std::vector<Assignment>& assignments, const ClassMerge& merges) {
    std::vector<Assignment> out = assignments;
    for (auto& a : out) {
        if (a.reason == AssignReason::Degenerate) continue;
        const auto it = merges.find(a.cls);
        if (it != merges.end()) a.cls = it->second;
    }
    return out;
}

ClassMerge parse_merges(const std::vector<std::string>& specs) {
    ClassMerge m;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ValidationError("merge '" + s + "' must look like From=To");
        m[parse_pattern_class(s.substr(0, eq))] = parse_pattern_class(s.substr(eq + 1));
    }
    return m;
}

std::vector<TimelineRow> timeline(const std::vector<std::pair<std::string, std::vector<Assignment>>>& snapshots) {
    std::vector<TimelineRow> rows;
    for (const auto& [tag, assignments] : snapshots) {
        TimelineRow row;
        row.tag = tag;
        row.total = assignments.size();
        row.clustered_percentage = assignments.empty() ? 0.0 : clustered_percentage(assignments);
        std::map<std::string, std::size_t> counts;
        for (const auto& a : assignments) ++counts[category_of(a)];
        for (const auto& cat : all_categories()) {
            const auto it = counts.find(cat);
            const double n = it == counts.end() ? 0.0 : static_cast<double>(it->second);
            row.proportions[cat] = assignments.empty() ? 0.0 : n / static_cast<double>(assignments.size());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_proportions_csv(const ProportionTable& table, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "layer_index,category,fraction,count\n";
    for (const auto& r : table.rows) {
        const std::size_t denom = table.denominators.at(r.layer_index);
        const auto count = static_cast<std::size_t>(std::llround(r.fraction * static_cast<double>(denom)));
        out << r.layer_index << ',' << r.category << ',' << format_number(r.fraction) << ',' << count << '\n';
    }
}

void write_activation_csv(const std::map<std::string, BoxStats>& stats, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "category,count,min,q1,median,q3,max,mean\n";
    for (const auto& cat : all_categories()) {
        const auto it = stats.find(cat);
        if (it == stats.end()) continue;
        const BoxStats& s = it->second;
        out << cat << ',' << s.count << ',' << format_number(s.min) << ',' << format_number(s.q1) << ','
            << format_number(s.median) << ',' << format_number(s.q3) << ',' << format_number(s.max) << ','
            << format_number(s.mean) << '\n';
    }
}

void write_pca_csv(const PcaResult& pca, const std::filesystem::path& path,
                   const std::filesystem::path& ratio_path) {
    auto out = open_out(path);
    out << "source_index";
    for (std::size_t c = 0; c < pca.explained_ratio.size(); ++c) out << ",pc" << c + 1;
    out << '\n';
    for (std::size_t i = 0; i < pca.embeddings.size(); ++i) {
        out << i;
        for (double v : pca.embeddings[i]) out << ',' << format_number(v);
        out << '\n';
    }
    auto ratios = open_out(ratio_path);
    ratios << "component,explained_ratio\n";
    for (std::size_t c = 0; c < pca.explained_ratio.size(); ++c)
        ratios << "pc" << c + 1 << ',' << format_number(pca.explained_ratio[c]) << '\n';
}

void write_timeline_csv(const std::vector<TimelineRow>& rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "tag,total,clustered_percentage";
    for (const auto& cat : all_categories()) out << ',' << cat;
    out << '\n';
    for (const auto& r : rows) {
        out << r.tag << ',' << r.total << ',' << format_number(r.clustered_percentage);
        for (const auto& cat : all_categories()) out << ',' << format_number(r.proportions.at(cat));
        out << '\n';
    }
}

}  // namespace kscope
