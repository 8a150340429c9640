#include "hybridloc/decimal.hpp"

#include <charconv>
#include <cstdio>
#include <system_error>

namespace hybridloc {

std::string format_decimal(double value) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof(buf), "%.*g", kCsvDigits, value);
    return std::string(buf, static_cast<std::size_t>(n));
}

double quantize_decimal(double value) {
    double out = 0.0;
    parse_decimal(format_decimal(value), out);
    return out;
}

bool parse_decimal(std::string_view text, double& out) {
    if (text.empty()) {
        return false;
    }
    // from_chars rejects a leading '+'.
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace hybridloc
