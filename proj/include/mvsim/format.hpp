#pragma once

#include <string>

namespace mvsim {

/// Shortest decimal form that round-trips to the same double; "nan",
/// "inf" and "-inf" for non-finite values.
std::string format_double(double value);

}  // namespace mvsim
