#pragma once

#include <string>

namespace gnglab {

/// Locale-independent shortest round-trip rendering; "inf", "-inf", "nan"
/// for non-finite values. Used for every CSV and JSON number so outputs are
/// byte-identical across runs.
std::string fmt_num(double v);

}  // namespace gnglab
