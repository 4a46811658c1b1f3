#pragma once

#include <array>
#include <string>
#include <string_view>

namespace persona {

/// Activity label. Labels never contain whitespace or commas so they can be
/// written verbatim into CSV and model files.
using Label = std::string;

inline constexpr std::array<std::string_view, 5> kDefaultActivities = {
    "walking", "running", "cycling", "driving", "idling"};

/// Throws Error(InvalidSpec) when `label` is empty or not writable verbatim.
void check_label(std::string_view label);

}  // namespace persona
