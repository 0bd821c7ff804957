#include "kscert/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace kscert {

std::string to_fraction_string(const Rational& x) {
    return numerator(x).str() + "/" + denominator(x).str();
}

std::string shortest_double_text(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void bad_number(std::string_view text) {
    throw ValidationError("not a valid number: '" + std::string(text) + "'");
}

// Parses a decimal literal with optional sign, fraction part and exponent
// into an exact rational.
Rational parse_decimal(std::string_view text) {
    std::size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        neg = text[i] == '-';
        ++i;
    }
    BigInt mantissa = 0;
    long long exp10 = 0;
    bool any_digit = false;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
        mantissa = mantissa * 10 + (text[i] - '0');
        any_digit = true;
    }
    if (i < text.size() && text[i] == '.') {
        ++i;
        for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
            mantissa = mantissa * 10 + (text[i] - '0');
            --exp10;
            any_digit = true;
        }
    }
    if (!any_digit) bad_number(text);
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
            eneg = text[i] == '-';
            ++i;
        }
        if (i == text.size()) bad_number(text);
        long long e = 0;
        for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
            e = e * 10 + (text[i] - '0');
            if (e > 1'000'000) bad_number(text);
        }
        exp10 += eneg ? -e : e;
    }
    if (i != text.size()) bad_number(text);

    Rational value(mantissa);
    if (exp10 > 0) {
        value *= Rational(pow(BigInt(10), static_cast<unsigned>(exp10)));
    } else if (exp10 < 0) {
        value /= Rational(pow(BigInt(10), static_cast<unsigned>(-exp10)));
    }
    return neg ? -value : value;
}

}  // namespace

Rational rational_from_text(std::string_view text) {
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return parse_decimal(text);
    Rational num = parse_decimal(text.substr(0, slash));
    Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw ValidationError("zero denominator in '" + std::string(text) + "'");
    return num / den;
}

Rational rational_from_double_literal(double x) {
    if (!std::isfinite(x)) throw ValidationError("non-finite number cannot enter exact mode");
    return rational_from_text(shortest_double_text(x));
}

}  // namespace kscert
