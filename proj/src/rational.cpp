#include "psm/rational.hpp"

#include <limits>
#include <numeric>
#include <ostream>

#include "psm/error.hpp"

namespace psm {

namespace {

__int128 gcd_wide(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

bool fits_int64(__int128 v) {
    return v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max();
}

} // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw Error(Errc::invalid_argument, "rational with zero denominator");
    *this = from_wide(num, den);
}

Rational Rational::from_wide(__int128 num, __int128 den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const __int128 g = gcd_wide(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (!fits_int64(num) || !fits_int64(den)) throw Error(Errc::overflow, "rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    if (r.num_ == 0) r.den_ = 1;
    return r;
}

Rational& Rational::operator+=(const Rational& rhs) {
    const __int128 n = static_cast<__int128>(num_) * rhs.den_ + static_cast<__int128>(rhs.num_) * den_;
    const __int128 d = static_cast<__int128>(den_) * rhs.den_;
    return *this = from_wide(n, d);
}

Rational& Rational::operator-=(const Rational& rhs) { return *this += -rhs; }

Rational& Rational::operator*=(const Rational& rhs) {
    // Cross-reduce first so products of already-reduced values stay small.
    const std::int64_t g1 = std::gcd(num_, rhs.den_);
    const std::int64_t g2 = std::gcd(rhs.num_, den_);
    const __int128 n = static_cast<__int128>(num_ / g1) * (rhs.num_ / g2);
    const __int128 d = static_cast<__int128>(den_ / g2) * (rhs.den_ / g1);
    return *this = from_wide(n, d);
}

Rational& Rational::operator/=(const Rational& rhs) {
    if (rhs.num_ == 0) throw Error(Errc::invalid_argument, "rational division by zero");
    return *this = from_wide(static_cast<__int128>(num_) * rhs.den_, static_cast<__int128>(den_) * rhs.num_);
}

Rational Rational::operator-() const {
    if (num_ == std::numeric_limits<std::int64_t>::min()) throw Error(Errc::overflow, "rational overflow");
    Rational r = *this;
    r.num_ = -num_;
    return r;
}

std::string Rational::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

BigRational to_big(const Rational& r) { return BigRational(r.num(), r.den()); }

} // namespace psm
