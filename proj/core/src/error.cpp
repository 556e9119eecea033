#include "kernelscope/error.hpp"

namespace kscope {

DegenerateFilter::DegenerateFilter(double centered_norm)
    : Error("degenerate filter: centered norm " + std::to_string(centered_norm) +
            " is at or below the degeneracy threshold"),
      norm_(centered_norm) {}

NotCentered::NotCentered(double sum)
    : ValidationError("vector is not centered (entry sum " + std::to_string(sum) + ")") {}

ConstantFilter::ConstantFilter() : ValidationError("constant filter cannot be min-max encoded") {}

}  // namespace kscope
