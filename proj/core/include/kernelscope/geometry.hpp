#pragma once

// Filter preprocessing: centering, unit normalization and the change of
// basis onto the central hyperplane 1^T r = 0, plus the mean-centered
// cosine dissimilarity used for both the training loss and classification.

#include <cstddef>
#include <span>
#include <vector>

namespace kscope {

using Vector = std::vector<double>;

/// Centered norms at or below this are treated as degenerate.
inline constexpr double kNormEpsilon = 1e-8;

/// Tolerance on |sum(v)| accepted by to_hyperplane.
inline constexpr double kCenteredTolerance = 1e-6;

Vector center(std::span<const double> v);

/// Throws DegenerateFilter when ||v|| <= kNormEpsilon.
Vector normalize(std::span<const double> v);

/// Orthonormal basis of {r in R^n : sum(r) = 0} (Helmert rows).
///
/// Row i (0-based, i = 0..n-2) holds 1/sqrt((i+1)(i+2)) in its first i+1
/// entries, -(i+1)/sqrt((i+1)(i+2)) at position i+1 and zeros after.
class HyperplaneBasis {
public:
    /// Throws ValidationError for n < 2.
    explicit HyperplaneBasis(std::size_t n);

    std::size_t n() const noexcept { return n_; }
    std::size_t reduced_dim() const noexcept { return n_ - 1; }

    /// Row i as a dense n-vector.
    std::span<const double> row(std::size_t i) const noexcept {
        return {rows_.data() + i * n_, n_};
    }

    /// basis * v. Throws NotCentered when |sum(v)| > kCenteredTolerance.
    Vector to_hyperplane(std::span<const double> v) const;

    /// basis^T * u; the result always sums to zero up to rounding.
    Vector from_hyperplane(std::span<const double> u) const;

    /// basis^T * u into a caller buffer of size n, without allocation.
    void from_hyperplane_into(std::span<const double> u, std::span<double> out) const;
    /// basis * v into a caller buffer of size n-1, without the centering check.
    void project_into(std::span<const double> v, std::span<double> out) const;

private:
    std::size_t n_;
    std::vector<double> rows_;  // (n-1) x n row-major
};

/// A centered unit-norm filter and its hyperplane coordinates.
struct PreprocessedFilter {
    Vector full;     // n = k^2 entries
    Vector reduced;  // n - 1 entries
    std::size_t source_index = 0;
};

/// center -> normalize -> to_hyperplane. Throws DegenerateFilter.
PreprocessedFilter preprocess(std::span<const double> raw, const HyperplaneBasis& basis,
                              std::size_t source_index = 0);

/// Centered unit-norm copy of v (center then normalize). Throws DegenerateFilter.
Vector center_normalize(std::span<const double> v);

/// 1 - cos(center(a), center(b)), clamped to [0, 2].
/// Throws DegenerateFilter when either centered argument has norm <= kNormEpsilon.
double mc_cosine_dissim(std::span<const double> a, std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

}  // namespace kscope
