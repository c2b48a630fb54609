#pragma once

#include <string>
#include <string_view>

namespace stein {

// Shortest decimal form that parses back to the identical double
// (std::to_chars round-trip guarantee).  Every float written to a sample
// file or CSV goes through this, so emitted files are byte-stable and
// values survive a save/load cycle bit-for-bit.  NaN prints as "nan",
// infinities as "inf"/"-inf".
std::string format_double(double x);

// Inverse of format_double.  Accepts anything std::from_chars accepts plus
// the "nan"/"inf"/"-inf" spellings above.  Throws std::invalid_argument if
// the token is not a complete floating-point literal.
double parse_double(std::string_view token);

}  // namespace stein
