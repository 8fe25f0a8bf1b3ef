#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace prooflog {

// Exact rational arithmetic. Repeated evaluation of the same expression is
// bit-identical; division by zero is an error, never a value.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

/// Canonical text form: integers without a decimal point ("27"), finite
/// decimals without trailing zeros ("2.7"), other rationals as "NrD" ("1r3").
std::string render_rational(const Rational& r);

/// Parses the unsigned literal forms produced by render_rational and the
/// tokenizer: "27", "2.70", "1r3". Signs are handled by the term layer.
std::optional<Rational> parse_rational(std::string_view text);

}  // namespace prooflog
