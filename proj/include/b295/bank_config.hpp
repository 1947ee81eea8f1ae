#pragma once

// JSON bank configuration. Every field is optional; anything left out takes
// the embedded default, and bands without explicit r2/r3 are calibrated.
//
//   {
//     "lowpass":    {"cutoff_hz": 100, "components": {"r": [..3], "c": [..3]}},
//     "highpass":   {"cutoff_hz": 7000},
//     "bands":      [{"band_hz": 200, "c1_c3": "47n", "attenuation": "high_480",
//                     "mixer_r": "39k", "r2": 93e3, "r3": 13.98e3}, ... 8 entries],
//     "inversions": "default" | "none" | [1, 3, 5],
//     "sliders":    [1, 1, 1, 1, 1, 1, 1, 1, 1, 1]
//   }
//
// Band entries match the defaults by position. Numeric fields accept either
// a JSON number or a string with an engineering suffix.

#include "b295/filterbank.hpp"

#include <set>
#include <string>
#include <string_view>

namespace b295::filterbank {

[[nodiscard]] BankConfig parse_bank_config(std::string_view json_text);
[[nodiscard]] BankConfig load_bank_config(const std::string& path);

/// "default", "none" or a comma-separated list of channel indices.
[[nodiscard]] std::set<std::size_t> parse_inversions(std::string_view text);

}  // namespace b295::filterbank
