#pragma once

#include <string>
#include <string_view>

namespace pcekit {

/// Locale-independent decimal rendering with 17 significant digits
/// (scientific form, e.g. "6.6666666666666663e-01"). Round-trips exactly.
std::string format_exact(double value);

/// Shortest form that still round-trips ("%.17g"-like but locale independent).
std::string format_short(double value);

/// Fixed number of decimals, locale independent.
std::string format_fixed(double value, int decimals);

/// Scientific notation with `digits` digits after the point, locale independent.
std::string format_sci(double value, int digits);

/// Parses a complete decimal string. Throws IoError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);

} // namespace pcekit
