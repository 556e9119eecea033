#include "kernelscope/pattern_class.hpp"

#include "kernelscope/error.hpp"

namespace kscope {

std::string_view to_string(PatternClass cls) noexcept {
    switch (cls) {
        case PatternClass::OnCentre: return "OnCentre";
        case PatternClass::OffCentre: return "OffCentre";
        case PatternClass::OnCross: return "OnCross";
        case PatternClass::OffCross: return "OffCross";
        case PatternClass::OnDx: return "OnDx";
        case PatternClass::OffDx: return "OffDx";
        case PatternClass::OnDy: return "OnDy";
        case PatternClass::OffDy: return "OffDy";
        case PatternClass::OnSecond: return "OnSecond";
        case PatternClass::OffSecond: return "OffSecond";
        case PatternClass::SquareOn: return "SquareOn";
        case PatternClass::SquareOff: return "SquareOff";
        case PatternClass::Other: return "Other";
    }
    return "Other";
}

PatternClass parse_pattern_class(std::string_view name) {
    for (PatternClass cls : kAllPatternClasses) {
        if (to_string(cls) == name) return cls;
    }
    throw ValidationError("unknown pattern class '" + std::string(name) + "'");
}

}  // namespace kscope
