#include "kernelscope/initgen.hpp"

#include <cmath>
#include <numeric>

#include "kernelscope/error.hpp"
#include "kernelscope/random.hpp"

namespace kscope {

namespace {

constexpr InitGroup kGroups[] = {InitGroup::OnCentre, InitGroup::OffCentre, InitGroup::Cross,
                                 InitGroup::FirstDerivative, InitGroup::SecondDerivative};

void check_proportions(const GroupProportions& p) {
    double sum = 0.0;
    for (const auto& [g, f] : p) {
        if (!(f >= 0.0)) throw ValidationError("group proportions must be non-negative");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("group proportions must sum to 1");
}

InitGroup draw_group(const GroupProportions& p, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    InitGroup last = InitGroup::OnCentre;
    for (InitGroup g : kGroups) {
        const auto it = p.find(g);
        if (it == p.end() || it->second <= 0.0) continue;
        acc += it->second;
        last = g;
        if (u < acc) return g;
    }
    return last;
}

Polarity draw_polarity(Rng& rng) { return rng.below(2) == 0 ? Polarity::On : Polarity::Off; }

}  // namespace

std::string_view to_string(InitGroup group) noexcept {
    switch (group) {
        case InitGroup::OnCentre: return "on_centre";
        case InitGroup::OffCentre: return "off_centre";
        case InitGroup::Cross: return "cross";
        case InitGroup::FirstDerivative: return "first_derivative";
        case InitGroup::SecondDerivative: return "second_derivative";
    }
    return "on_centre";
}

InitGroup parse_init_group(std::string_view name) {
    for (InitGroup g : kGroups) {
        if (to_string(g) == name) return g;
    }
    throw ValidationError("unknown kernel group '" + std::string(name) + "'");
}

GroupProportions default_init_proportions() {
    return {{InitGroup::OnCentre, 0.45},
            {InitGroup::OffCentre, 0.10},
            {InitGroup::Cross, 0.15},
            {InitGroup::FirstDerivative, 0.20},
            {InitGroup::SecondDerivative, 0.10}};
}

InitGroup group_of(PatternClass cls) {
    switch (cls) {
        case PatternClass::OnCentre: return InitGroup::OnCentre;
        case PatternClass::OffCentre: return InitGroup::OffCentre;
        case PatternClass::OnCross:
        case PatternClass::OffCross: return InitGroup::Cross;
        case PatternClass::OnDx:
        case PatternClass::OffDx:
        case PatternClass::OnDy:
        case PatternClass::OffDy: return InitGroup::FirstDerivative;
        case PatternClass::OnSecond:
        case PatternClass::OffSecond: return InitGroup::SecondDerivative;
        default: break;
    }
    throw ValidationError("class " + std::string(to_string(cls)) + " has no generator group");
}

void validate(const InitSpec& spec) {
    if (spec.kernel_size < 3 || spec.kernel_size % 2 == 0)
        throw ValidationError("kernel_size must be an odd integer >= 3");
    check_proportions(spec.proportions);
    const auto [lo, hi] = spec.sigma1_range;
    if (!(lo > 0.0 && lo < hi)) throw ValidationError("sigma1_range must be positive with lo < hi");
    const auto [clo, chi] = spec.cross_sigma_range;
    if (!(clo > 0.0 && clo < chi)) throw ValidationError("cross_sigma_range must be positive with lo < hi");
    if (!(spec.sigma_ratio > 1.0)) throw ValidationError("sigma_ratio must exceed 1");
    if (hi * spec.sigma_ratio > spec.kernel_size)
        throw ValidationError("sigma1_range * sigma_ratio exceeds the kernel size");
}

GeneratedKernels generate_init_labeled(const InitSpec& spec) {
    validate(spec);
    const int k = static_cast<int>(spec.kernel_size);
    const double n = static_cast<double>(k) * k;
    const double target_std = std::sqrt(2.0 / n);

    std::vector<FilterRecord> records;
    GeneratedKernels out;
    for (std::uint32_t layer = 0; layer < spec.layer_channels.size(); ++layer) {
        for (std::uint32_t ch = 0; ch < spec.layer_channels[layer]; ++ch) {
            Rng rng(derive_seed(spec.seed, layer, ch));
            const InitGroup group = draw_group(spec.proportions, rng);
            TemplateSpec t;
            t.size = k;
            t.sigma1 = rng.uniform(spec.sigma1_range.first, spec.sigma1_range.second);
            t.sigma2 = spec.sigma_ratio * t.sigma1;
            switch (group) {
                case InitGroup::OnCentre:
                    t.family = Family::Dog;
                    t.polarity = Polarity::On;
                    break;
                case InitGroup::OffCentre:
                    t.family = Family::Dog;
                    t.polarity = Polarity::Off;
                    break;
                case InitGroup::Cross:
                    t.family = Family::Cross;
                    t.polarity = draw_polarity(rng);
                    t.sigma1 = rng.uniform(spec.cross_sigma_range.first, spec.cross_sigma_range.second);
                    t.sigma2 = t.sigma1;
                    break;
                case InitGroup::FirstDerivative: {
                    const auto variant = rng.below(4);
                    t.family = variant < 2 ? Family::DogDx : Family::DogDy;
                    t.polarity = variant % 2 == 0 ? Polarity::On : Polarity::Off;
                    break;
                }
                case InitGroup::SecondDerivative: {
                    const auto variant = rng.below(6);
                    constexpr Family kSecond[] = {Family::DogDxx, Family::DogDyy, Family::DogDxy};
                    t.family = kSecond[variant / 2];
                    t.polarity = variant % 2 == 0 ? Polarity::On : Polarity::Off;
                    break;
                }
            }
            const Vector raw = raw_kernel(t);
            const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
            double var = 0.0;
            for (double v : raw) var += (v - mean) * (v - mean);
            const double sd = std::sqrt(var / n);
            if (!(sd > 0.0)) throw DegenerateFilter(sd);

            FilterRecord rec;
            rec.model_id = spec.model_id;
            rec.layer_index = layer;
            rec.channel_index = ch;
            rec.kernel_size = spec.kernel_size;
            rec.weights.reserve(raw.size());
            for (double v : raw) rec.weights.push_back(static_cast<float>(v * target_std / sd));
            records.push_back(std::move(rec));
            out.classes.push_back(pattern_class_of(t.family, t.polarity));
            out.specs.push_back(t);
        }
    }
    out.corpus = Corpus(spec.kernel_size, std::move(records));
    return out;
}

Corpus generate_init(const InitSpec& spec) { return generate_init_labeled(spec).corpus; }

GeneratedKernels sample_bank_corpus(const TemplateBank& bank, const SyntheticSpec& spec) {
    if (bank.empty()) throw ValidationError("synthetic corpus needs a non-empty bank");
    if (spec.layers < 1) throw ValidationError("layers must be >= 1");
    check_proportions(spec.proportions);

    std::map<InitGroup, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < bank.size(); ++i) members[group_of(bank[i].cls)].push_back(i);
    for (const auto& [g, f] : spec.proportions) {
        if (f > 0.0 && members[g].empty())
            throw ValidationError("bank has no templates for group " + std::string(to_string(g)));
    }

    const std::size_t n = bank.front().kernel.size();
    const auto k = static_cast<std::uint32_t>(std::lround(std::sqrt(static_cast<double>(n))));
    const double noise_sd = spec.snr > 0.0 ? std::sqrt(1.0 / (static_cast<double>(n) * spec.snr)) : 0.0;

    GeneratedKernels out;
    std::vector<FilterRecord> records;
    records.reserve(spec.count);
    for (std::size_t i = 0; i < spec.count; ++i) {
        Rng rng(derive_seed(spec.seed, i));
        const auto& group = members[draw_group(spec.proportions, rng)];
        const Template& t = bank[group[rng.below(group.size())]];
        FilterRecord rec;
        rec.model_id = spec.model_id;
        rec.layer_index = static_cast<std::uint32_t>(i * spec.layers / std::max<std::size_t>(spec.count, 1));
        rec.channel_index = static_cast<std::uint32_t>(i);
        rec.kernel_size = k;
        rec.weights.reserve(n);
        for (double v : t.kernel) rec.weights.push_back(static_cast<float>(v + noise_sd * rng.normal()));
        records.push_back(std::move(rec));
        out.classes.push_back(t.cls);
        out.specs.push_back(t.spec);
    }
    out.corpus = Corpus(k, std::move(records));
    return out;
}

}  // namespace kscope
