#pragma once

// Reference kernels: difference of Gaussians, its analytic first and second
// partial derivatives, and the sum-of-orthogonal-Gaussians cross model, all
// sampled on an integer grid centered at the origin.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "kernelscope/geometry.hpp"
#include "kernelscope/pattern_class.hpp"

namespace kscope {

enum class Family { Dog, DogDx, DogDy, DogDxx, DogDyy, DogDxy, Cross };
enum class Polarity { On, Off };

struct TemplateSpec {
    Family family = Family::Dog;
    Polarity polarity = Polarity::On;
    double sigma1 = 1.0;  // inner (or cross) std-dev in grid units
    double sigma2 = 2.0;  // outer std-dev; unused for Cross
    int size = 7;

    bool operator==(const TemplateSpec&) const = default;
};

enum class DerivativeOrder { First = 1, Second = 2 };
enum class Axis { X, Y, XY };

/// Throws ValidationError if the spec violates its invariants
/// (odd size >= 3; sigmas in (0, size]; sigma1 < sigma2 for DoG families;
/// sigma1 in [0.3, 1.0] for Cross).
void validate(const TemplateSpec& spec);

/// Base DoG (family ignored) at a continuous point, polarity applied.
/// Templated so callers can evaluate in extended precision.
template <std::floating_point T>
T dog_value(const TemplateSpec& spec, T x, T y) {
    const auto g = [&](T s) {
        return std::exp(-(x * x + y * y) / (T(2) * s * s)) / (T(2) * std::numbers::pi_v<T> * s * s);
    };
    const T v = g(static_cast<T>(spec.sigma1)) - g(static_cast<T>(spec.sigma2));
    return spec.polarity == Polarity::On ? v : -v;
}

/// Row-major (x, y) pairs; row index runs over y, column index over x.
std::vector<std::pair<double, double>> grid_coords(int size);

/// Unnormalized kernels with polarity applied. These skip validate() so that
/// boundary cases (sigma1 == sigma2, large cross sigma) can be evaluated.
Vector raw_dog(const TemplateSpec& spec);
Vector raw_dog_derivative(const TemplateSpec& spec, DerivativeOrder order, Axis axis);
Vector raw_cross(const TemplateSpec& spec);
/// Dispatches on spec.family.
Vector raw_kernel(const TemplateSpec& spec);

/// Validated, centered and unit-normalized kernels. Throw DegenerateFilter.
Vector dog_kernel(const TemplateSpec& spec);
Vector dog_derivative_kernel(const TemplateSpec& spec, DerivativeOrder order, Axis axis);
Vector cross_kernel(const TemplateSpec& spec);
Vector render(const TemplateSpec& spec);

/// Family of a (order, axis) pair; throws ValidationError for (First, XY).
Family derivative_family(DerivativeOrder order, Axis axis);

/// Cluster a rendered template belongs to. Derivative kernels take their
/// On/Off prefix from the polarity of the DoG they differentiate.
PatternClass pattern_class_of(Family family, Polarity polarity);

struct Template {
    PatternClass cls;
    TemplateSpec spec;
    Vector kernel;  // centered, unit norm
};

using TemplateBank = std::vector<Template>;

struct BankConfig {
    std::vector<std::pair<double, double>> sigma_grid;  // (sigma1, sigma2)
    std::vector<double> cross_sigmas;
};

/// sigma1 in {0.6, 0.9, 1.2}, sigma2 = 2 sigma1, cross sigma in {0.4 .. 0.8}.
BankConfig default_bank_config();

/// Every family x polarity x sigma setting, rendered. Order: DoG, first
/// derivatives (x, y), second derivatives (xx, yy, xy) per sigma pair, then
/// cross per sigma; On before Off within each.
TemplateBank template_bank(int size, const BankConfig& config);
TemplateBank default_template_bank(int size);

struct TemplateMatch {
    PatternClass cls = PatternClass::Other;
    double dissimilarity = 2.0;
    std::size_t index = 0;
};

/// Brute-force argmin of mc_cosine_dissim over the bank; ties go to the lowest index.
TemplateMatch nearest_template(std::span<const double> filter, const TemplateBank& bank);

}  // namespace kscope
