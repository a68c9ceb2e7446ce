#pragma once

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace detnet {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

/// Formats as "p/q" (always with a denominator, "0/1" for zero).
std::string to_string(const Rational& value);

/// Parses "p/q" or a bare integer "p".  Throws InvalidArgument.
Rational parse_rational(const std::string& text);

}  // namespace detnet
