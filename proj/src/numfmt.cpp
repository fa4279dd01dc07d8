#include "pcekit/numfmt.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "pcekit/error.hpp"

namespace pcekit {

namespace {

std::string render(double value, std::chars_format fmt, int precision, bool use_precision) {
    char buf[64];
    auto res = use_precision ? std::to_chars(buf, buf + sizeof(buf), value, fmt, precision)
                             : std::to_chars(buf, buf + sizeof(buf), value);
    return {buf, res.ptr};
}

} // namespace

std::string format_exact(double value) {
    if (value == 0.0) value = 0.0;  // drop the sign of -0
    return render(value, std::chars_format::scientific, 16, true);
}

std::string format_short(double value) {
    if (value == 0.0) value = 0.0;
    return render(value, std::chars_format::general, 0, false);
}

std::string format_fixed(double value, int decimals) {
    std::string s = render(value, std::chars_format::fixed, decimals, true);
    // "-0.000" after rounding reads as noise
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string format_sci(double value, int digits) {
    if (value == 0.0) value = 0.0;
    return render(value, std::chars_format::scientific, digits, true);
}

double parse_double(std::string_view text, std::string_view what) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw IoError("invalid number '" + std::string(text) + "' in " + std::string(what));
    }
    return value;
}

} // namespace pcekit
