#include "kernelscope/dogfamily.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kernelscope/error.hpp"

namespace kscope {

namespace {

bool is_dog_family(Family f) { return f != Family::Cross; }

double gaussian(double x, double y, double s) {
    return std::exp(-(x * x + y * y) / (2.0 * s * s)) / (2.0 * std::numbers::pi * s * s);
}

// Partial derivative of the normalized isotropic Gaussian.
double gaussian_partial(double x, double y, double s, Family f) {
    const double g = gaussian(x, y, s);
    const double s2 = s * s;
    const double s4 = s2 * s2;
    switch (f) {
        case Family::Dog: return g;
        case Family::DogDx: return -(x / s2) * g;
        case Family::DogDy: return -(y / s2) * g;
        case Family::DogDxx: return (x * x / s4 - 1.0 / s2) * g;
        case Family::DogDyy: return (y * y / s4 - 1.0 / s2) * g;
        case Family::DogDxy: return (x * y / s4) * g;
        case Family::Cross: break;
    }
    throw ValidationError("gaussian_partial: not a DoG family");
}

double sign_of(Polarity p) { return p == Polarity::On ? 1.0 : -1.0; }

void check_size(int size) {
    if (size < 3 || size % 2 == 0)
        throw ValidationError("kernel size must be an odd integer >= 3, got " + std::to_string(size));
}

Vector raw_dog_family(const TemplateSpec& spec, Family f) {
    check_size(spec.size);
    if (!(spec.sigma1 > 0.0) || !(spec.sigma2 > 0.0))
        throw ValidationError("sigmas must be positive");
    const double sgn = sign_of(spec.polarity);
    Vector out;
    out.reserve(static_cast<std::size_t>(spec.size) * spec.size);
    for (const auto& [x, y] : grid_coords(spec.size)) {
        const double v = gaussian_partial(x, y, spec.sigma1, f) - gaussian_partial(x, y, spec.sigma2, f);
        out.push_back(sgn * v);
    }
    return out;
}

}  // namespace

void validate(const TemplateSpec& spec) {
    check_size(spec.size);
    const double k = spec.size;
    if (!(spec.sigma1 > 0.0 && spec.sigma1 <= k))
        throw ValidationError("sigma1 must lie in (0, k]");
    if (is_dog_family(spec.family)) {
        if (!(spec.sigma2 > 0.0 && spec.sigma2 <= k))
            throw ValidationError("sigma2 must lie in (0, k]");
        if (!(spec.sigma1 < spec.sigma2))
            throw ValidationError("DoG templates need sigma1 < sigma2");
    } else if (spec.sigma1 < 0.3 || spec.sigma1 > 1.0) {
        throw ValidationError("cross sigma must lie in [0.3, 1.0]");
    }
}

std::vector<std::pair<double, double>> grid_coords(int size) {
    check_size(size);
    const int half = (size - 1) / 2;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(static_cast<std::size_t>(size) * size);
    for (int row = 0; row < size; ++row) {
        for (int col = 0; col < size; ++col) pts.emplace_back(col - half, row - half);
    }
    return pts;
}

Family derivative_family(DerivativeOrder order, Axis axis) {
    if (order == DerivativeOrder::First) {
        if (axis == Axis::X) return Family::DogDx;
        if (axis == Axis::Y) return Family::DogDy;
        throw ValidationError("first-order derivative has no mixed xy axis");
    }
    switch (axis) {
        case Axis::X: return Family::DogDxx;
        case Axis::Y: return Family::DogDyy;
        case Axis::XY: return Family::DogDxy;
    }
    throw ValidationError("invalid derivative axis");
}

Vector raw_dog(const TemplateSpec& spec) { return raw_dog_family(spec, Family::Dog); }

Vector raw_dog_derivative(const TemplateSpec& spec, DerivativeOrder order, Axis axis) {
    return raw_dog_family(spec, derivative_family(order, axis));
}

Vector raw_cross(const TemplateSpec& spec) {
    check_size(spec.size);
    if (!(spec.sigma1 > 0.0)) throw ValidationError("cross sigma must be positive");
    const double s2 = 2.0 * spec.sigma1 * spec.sigma1;
    const double sgn = sign_of(spec.polarity);
    Vector out;
    out.reserve(static_cast<std::size_t>(spec.size) * spec.size);
    for (const auto& [x, y] : grid_coords(spec.size))
        out.push_back(sgn * (std::exp(-x * x / s2) + std::exp(-y * y / s2)));
    return out;
}

Vector raw_kernel(const TemplateSpec& spec) {
    if (spec.family == Family::Cross) return raw_cross(spec);
    return raw_dog_family(spec, spec.family);
}

Vector dog_kernel(const TemplateSpec& spec) {
    if (spec.family != Family::Dog) throw ValidationError("dog_kernel needs family dog");
    validate(spec);
    return center_normalize(raw_dog(spec));
}

Vector dog_derivative_kernel(const TemplateSpec& spec, DerivativeOrder order, Axis axis) {
    TemplateSpec s = spec;
    s.family = derivative_family(order, axis);
    validate(s);
    return center_normalize(raw_kernel(s));
}

Vector cross_kernel(const TemplateSpec& spec) {
    if (spec.family != Family::Cross) throw ValidationError("cross_kernel needs family cross");
    validate(spec);
    return center_normalize(raw_cross(spec));
}

Vector render(const TemplateSpec& spec) {
    validate(spec);
    return center_normalize(raw_kernel(spec));
}

PatternClass pattern_class_of(Family family, Polarity polarity) {
    const bool on = polarity == Polarity::On;
    switch (family) {
        case Family::Dog: return on ? PatternClass::OnCentre : PatternClass::OffCentre;
        case Family::DogDx: return on ? PatternClass::OnDx : PatternClass::OffDx;
        case Family::DogDy: return on ? PatternClass::OnDy : PatternClass::OffDy;
        case Family::DogDxx:
        case Family::DogDyy:
        case Family::DogDxy: return on ? PatternClass::OnSecond : PatternClass::OffSecond;
        case Family::Cross: return on ? PatternClass::OnCross : PatternClass::OffCross;
    }
    return PatternClass::Other;
}

BankConfig default_bank_config() {
    BankConfig c;
    for (double s1 : {0.6, 0.9, 1.2}) c.sigma_grid.emplace_back(s1, 2.0 * s1);
    c.cross_sigmas = {0.4, 0.5, 0.6, 0.7, 0.8};
    return c;
}

TemplateBank template_bank(int size, const BankConfig& config) {
    if (config.sigma_grid.empty() || config.cross_sigmas.empty())
        throw ValidationError("template_bank needs non-empty sigma lists");
    TemplateBank bank;
    auto add = [&](Family f, Polarity p, double s1, double s2) {
        TemplateSpec spec{f, p, s1, s2, size};
        bank.push_back({pattern_class_of(f, p), spec, render(spec)});
    };
    constexpr Polarity kPolarities[] = {Polarity::On, Polarity::Off};
    for (const auto& [s1, s2] : config.sigma_grid)
        for (Polarity p : kPolarities) add(Family::Dog, p, s1, s2);
    for (const auto& [s1, s2] : config.sigma_grid)
        for (Polarity p : kPolarities)
            for (Family f : {Family::DogDx, Family::DogDy}) add(f, p, s1, s2);
    for (const auto& [s1, s2] : config.sigma_grid)
        for (Polarity p : kPolarities)
            for (Family f : {Family::DogDxx, Family::DogDyy, Family::DogDxy}) add(f, p, s1, s2);
    for (double s : config.cross_sigmas)
        for (Polarity p : kPolarities) add(Family::Cross, p, s, s);
    return bank;
}

TemplateBank default_template_bank(int size) { return template_bank(size, default_bank_config()); }

TemplateMatch nearest_template(std::span<const double> filter, const TemplateBank& bank) {
    if (bank.empty()) throw ValidationError("nearest_template needs a non-empty bank");
    TemplateMatch best;
    best.dissimilarity = 3.0;
    for (std::size_t i = 0; i < bank.size(); ++i) {
        const double d = mc_cosine_dissim(filter, bank[i].kernel);
        if (d < best.dissimilarity) best = {bank[i].cls, d, i};
    }
    return best;
}

}  // namespace kscope
