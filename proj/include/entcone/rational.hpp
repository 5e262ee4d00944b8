#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace entcone {

using Integer = mpz_class;
using Rational = mpq_class;
using IntVec = std::vector<Integer>;
using RatVec = std::vector<Rational>;

// Accepts "7", "-3/4" and plain decimals such as "0.125" or "1e-3".
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
std::string to_string(const Integer& z);

// Divides by the gcd of the entries; returns that gcd (0 for the zero vector).
Integer make_primitive(IntVec& v);

// Smallest positive multiple of v with integer entries, then made primitive.
IntVec to_primitive(const RatVec& v);
RatVec to_rational(const IntVec& v);

Integer dot(const IntVec& a, const IntVec& b);
Rational dot(const IntVec& a, const RatVec& b);
bool is_zero(const IntVec& v);

int compare_lex(const IntVec& a, const IntVec& b);

struct IntVecHash {
    std::size_t operator()(const IntVec& v) const noexcept;
};

}  // namespace entcone
