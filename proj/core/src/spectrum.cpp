#include "kernelscope/spectrum.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kernelscope/error.hpp"
#include "kernelscope/text.hpp"

namespace kscope {

std::vector<SpectrumSample> sample_spectrum(const AutoencoderModel& model, std::size_t n) {
    if (n < 2) throw ValidationError("spectrum needs at least 2 samples");
    const HyperplaneBasis basis(model.input_dim + 1);
    std::vector<SpectrumSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double code = static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back({code, decode_full(model, basis, code), std::nullopt});
    }
    return out;
}

void annotate(std::vector<SpectrumSample>& spectrum, const TemplateBank& bank) {
    if (bank.empty()) throw ValidationError("annotate needs a non-empty bank");
    for (auto& s : spectrum) {
        try {
            s.suggested = nearest_template(s.kernel, bank);
        } catch (const DegenerateFilter&) {
            s.suggested = TemplateMatch{PatternClass::Other, 2.0, 0};
        }
    }
}

LabelMap::LabelMap(std::vector<LabelInterval> intervals) : intervals_(std::move(intervals)) {
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const auto& iv = intervals_[i];
        const std::string where = "interval " + std::to_string(i);
        if (!(iv.lo >= 0.0 && iv.hi <= 1.0)) throw ValidationError(where + " lies outside [0, 1]");
        if (!(iv.lo < iv.hi)) throw ValidationError(where + " is empty (lo >= hi)");
        if (i > 0) {
            const auto& prev = intervals_[i - 1];
            if (iv.lo < prev.lo) throw ValidationError(where + " is not sorted by lo");
            if (iv.lo < prev.hi) throw ValidationError(where + " overlaps the previous interval");
        }
    }
}

PatternClass LabelMap::lookup(double code) const {
    if (!(code >= 0.0 && code <= 1.0))
        throw ValidationError("code " + std::to_string(code) + " outside [0, 1]");
    // Last interval with lo <= code.
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), code,
                               [](double c, const LabelInterval& iv) { return c < iv.lo; });
    if (it == intervals_.begin()) return PatternClass::Other;
    const LabelInterval& iv = *std::prev(it);
    if (code < iv.hi || (code == 1.0 && iv.hi == 1.0)) return iv.cls;
    return PatternClass::Other;
}

LabelMap suggest_labels(const std::vector<SpectrumSample>& spectrum, const TemplateBank& bank,
                        double max_dissim) {
    if (bank.empty()) throw ValidationError("suggest_labels needs a non-empty bank");
    const std::size_t n = spectrum.size();
    std::vector<PatternClass> tags(n, PatternClass::Other);
    for (std::size_t i = 0; i < n; ++i) {
        TemplateMatch m;
        if (spectrum[i].suggested) {
            m = *spectrum[i].suggested;
        } else {
            try {
                m = nearest_template(spectrum[i].kernel, bank);
            } catch (const DegenerateFilter&) {
                continue;
            }
        }
        if (m.dissimilarity < max_dissim) tags[i] = m.cls;
    }

    auto boundary_before = [&](std::size_t i) {
        return i == 0 ? 0.0 : 0.5 * (spectrum[i - 1].code + spectrum[i].code);
    };
    auto boundary_after = [&](std::size_t j) {
        return j + 1 == n ? 1.0 : 0.5 * (spectrum[j].code + spectrum[j + 1].code);
    };

    std::vector<LabelInterval> intervals;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && tags[j + 1] == tags[i]) ++j;
        if (tags[i] != PatternClass::Other) {
            const double lo = boundary_before(i);
            const double hi = boundary_after(j);
            if (lo < hi) intervals.push_back({lo, hi, tags[i]});
        }
        i = j + 1;
    }
    return LabelMap(std::move(intervals));
}

std::string labelmap_to_json(const LabelMap& map) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& iv : map.intervals())
        doc.push_back({{"lo", iv.lo}, {"hi", iv.hi}, {"class", std::string(to_string(iv.cls))}});
    return doc.dump(2) + "\n";
}

LabelMap labelmap_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("label map is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ValidationError("label map must be a JSON array of intervals");
    std::vector<LabelInterval> intervals;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("lo") || !item.contains("hi") || !item.contains("class"))
            throw ValidationError("label map entries need lo, hi and class");
        if (!item["lo"].is_number() || !item["hi"].is_number() || !item["class"].is_string())
            throw ValidationError("label map entry has wrongly typed fields");
        intervals.push_back({item["lo"].get<double>(), item["hi"].get<double>(),
                             parse_pattern_class(item["class"].get<std::string>())});
    }
    return LabelMap(std::move(intervals));
}

void save_labelmap(const LabelMap& map, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << labelmap_to_json(map);
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

LabelMap load_labelmap(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return labelmap_from_json(ss.str());
}

void write_spectrum_csv(const std::vector<SpectrumSample>& spectrum, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    const std::size_t n = spectrum.empty() ? 0 : spectrum.front().kernel.size();
    out << "code";
    for (std::size_t i = 0; i < n; ++i) out << ",w" << i;
    out << ",class,dissimilarity\n";
    for (const auto& s : spectrum) {
        out << format_number(s.code, 17);
        for (double w : s.kernel) out << ',' << format_number(w, 6);
        if (s.suggested)
            out << ',' << to_string(s.suggested->cls) << ',' << format_number(s.suggested->dissimilarity, 6);
        else
            out << ",,";
        out << '\n';
    }
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace kscope
