#pragma once

#include <array>
#include <string>
#include <string_view>

namespace kscope {

/// Closed vocabulary of filter pattern clusters. The first ten are the
/// recurring DoG-family patterns; the square classes only appear in 5x5
/// models and only through manual labeling.
enum class PatternClass {
    OnCentre,
    OffCentre,
    OnCross,
    OffCross,
    OnDx,
    OffDx,
    OnDy,
    OffDy,
    OnSecond,
    OffSecond,
    SquareOn,
    SquareOff,
    Other,
};

inline constexpr std::size_t kPatternClassCount = 13;

inline constexpr std::array<PatternClass, kPatternClassCount> kAllPatternClasses = {
    PatternClass::OnCentre, PatternClass::OffCentre, PatternClass::OnCross,
    PatternClass::OffCross, PatternClass::OnDx,      PatternClass::OffDx,
    PatternClass::OnDy,     PatternClass::OffDy,     PatternClass::OnSecond,
    PatternClass::OffSecond, PatternClass::SquareOn, PatternClass::SquareOff,
    PatternClass::Other,
};

std::string_view to_string(PatternClass cls) noexcept;

/// Exact, case-sensitive match against the vocabulary; throws ValidationError otherwise.
PatternClass parse_pattern_class(std::string_view name);

}  // namespace kscope
