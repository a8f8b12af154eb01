#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <stdexcept>
#include <string>

namespace bagsched {

using Rat = boost::multiprecision::mpq_rational;
using Int = boost::multiprecision::mpz_int;
using Real = boost::multiprecision::mpfr_float_50;

// base^e for integer e (e may be negative; base must be nonzero then).
inline Rat pow_rat(const Rat& base, long e) {
    bool inv = e < 0;
    unsigned long k = inv ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
    Rat r(1), b = base;
    while (k) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    if (inv) {
        if (r == 0) throw std::domain_error("pow_rat: zero base with negative exponent");
        return Rat(1) / r;
    }
    return r;
}

inline Int pow_int(const Int& base, unsigned long e) {
    Int r(1), b = base;
    while (e) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

// floor(a/b) for integers, b > 0
inline Int floor_div(const Int& a, const Int& b) {
    Int q = a / b;
    if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

inline Int ceil_div(const Int& a, const Int& b) {
    return -floor_div(-a, b);
}

inline Int rat_floor(const Rat& x) { return floor_div(numerator(x), denominator(x)); }
inline Int rat_ceil(const Rat& x) { return ceil_div(numerator(x), denominator(x)); }

inline Real to_real(const Rat& x) {
    return Real(numerator(x)) / Real(denominator(x));
}

// Parses "3", "-3", or "3/7". Throws std::invalid_argument on anything else.
Rat parse_rat(const std::string& s);

// "num/den", or just "num" when den == 1.
std::string rat_string(const Rat& x);

inline bool is_integer(const Rat& x) { return denominator(x) == 1; }

}  // namespace bagsched
