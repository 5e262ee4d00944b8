#include "entcone/rational.hpp"

#include <stdexcept>

namespace entcone {

Rational parse_rational(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw std::invalid_argument("empty number");
    if (s.find_first_of(".eE") != std::string::npos) {
        // Decimal literal: convert exactly from its digits rather than through double.
        std::size_t epos = s.find_first_of("eE");
        long exp10 = 0;
        std::string mant = s.substr(0, epos);
        if (epos != std::string::npos) exp10 = std::stol(s.substr(epos + 1));
        bool neg = false;
        if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
            neg = mant[0] == '-';
            mant.erase(0, 1);
        }
        std::size_t dot = mant.find('.');
        if (dot != std::string::npos) {
            exp10 -= static_cast<long>(mant.size() - dot - 1);
            mant.erase(dot, 1);
        }
        if (mant.empty() || mant.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("bad number: " + s);
        Rational q{Integer(mant, 10)};
        Integer p10;
        mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
        if (exp10 < 0)
            q /= p10;
        else
            q *= p10;
        return neg ? Rational(-q) : q;
    }
    Rational q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad number: " + s);
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
    q.canonicalize();
    return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }
std::string to_string(const Integer& z) { return z.get_str(); }

Integer make_primitive(IntVec& v) {
    Integer g = 0;
    for (const auto& x : v) {
        if (x != 0) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
        if (g == 1) return g;
    }
    if (g > 1)
        for (auto& x : v) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
    return g;
}

IntVec to_primitive(const RatVec& v) {
    Integer l = 1;
    for (const auto& x : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    IntVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        Rational t = v[i] * l;
        out[i] = t.get_num();
    }
    make_primitive(out);
    return out;
}

RatVec to_rational(const IntVec& v) {
    RatVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = Rational(v[i]);
    return out;
}

Integer dot(const IntVec& a, const IntVec& b) {
    Integer s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0 && b[i] != 0) s += a[i] * b[i];
    return s;
}

Rational dot(const IntVec& a, const RatVec& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0 && b[i] != 0) s += a[i] * b[i];
    return s;
}

bool is_zero(const IntVec& v) {
    for (const auto& x : v)
        if (x != 0) return false;
    return true;
}

int compare_lex(const IntVec& a, const IntVec& b) {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        int c = cmp(a[i], b[i]);
        if (c != 0) return c < 0 ? -1 : 1;
    }
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    return 0;
}

std::size_t IntVecHash::operator()(const IntVec& v) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (const auto& x : v) {
        long s = x.fits_slong_p() ? x.get_si() : static_cast<long>(mpz_size(x.get_mpz_t()));
        h ^= static_cast<std::size_t>(s) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

}  // namespace entcone
