#pragma once

#include <string>
#include <string_view>

namespace hybridloc {

/// Significant digits used by every CSV writer.
inline constexpr int kCsvDigits = 9;

/// "%.9g" rendering; the text written to every output file.
std::string format_decimal(double value);

/// Rounds a value to what survives a write/read cycle through format_decimal.
double quantize_decimal(double value);

/// Strict full-string parse of a finite or non-finite decimal. Returns false on garbage.
bool parse_decimal(std::string_view text, double& out);

}  // namespace hybridloc
