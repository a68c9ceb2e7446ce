#include "detnet/rational.hpp"

#include <regex>

#include "detnet/errors.hpp"

namespace detnet {

std::string to_string(const Rational& value) {
    return boost::multiprecision::numerator(value).str() + "/" + boost::multiprecision::denominator(value).str();
}

Rational parse_rational(const std::string& text) {
    static const std::regex kPattern(R"(^\s*(-?[0-9]+)\s*(?:/\s*([0-9]+))?\s*$)");
    std::smatch match;
    if (!std::regex_match(text, match, kPattern)) throw InvalidArgument("not a rational: '" + text + "'");
    const Integer num(match[1].str());
    const Integer den(match[2].matched ? match[2].str() : std::string("1"));
    if (den == 0) throw InvalidArgument("zero denominator: '" + text + "'");
    return Rational(num, den);
}

}  // namespace detnet
