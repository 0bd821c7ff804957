#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <string>
#include <string_view>
#include <type_traits>

#include "kscert/errors.hpp"

namespace kscert {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.template convert_to<double>(); }

template <class S>
inline constexpr bool is_exact_scalar_v = std::is_same_v<S, Rational>;

/// Canonical "num/den" rendering, e.g. "9/10", "0/1", "-3/1".
std::string to_fraction_string(const Rational& x);

/// Parses "num/den", decimal ("0.9", "-1.25e-3") or integer text into an
/// exact rational. Throws ValidationError on malformed input.
Rational rational_from_text(std::string_view text);

/// Exact rational for the shortest decimal text that round-trips `x`.
/// This recovers the literal a human wrote in a JSON file ("0.9" -> 9/10)
/// rather than the binary expansion of the nearest double.
Rational rational_from_double_literal(double x);

/// Shortest round-trip decimal text of a double (std::to_chars).
std::string shortest_double_text(double x);

}  // namespace kscert
