#pragma once

#include <ostream>
#include <string>

namespace critcf {

// 17 significant digits: enough for an exact round trip of any double.
std::string format_double(double value);

inline void write_field(std::ostream& out, double value) { out << format_double(value); }

}  // namespace critcf
