#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace pgt {

/// Exact rational number on 64-bit numerator/denominator, always normalized
/// (gcd 1, denominator > 0). Intermediate products go through 128-bit.
class Rational {
public:
    constexpr Rational() = default;
    Rational(long long value) : num_(value), den_(1) {}
    Rational(long long num, long long den) : num_(num), den_(den) { normalize(); }

    long long num() const { return num_; }
    long long den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }

    Rational operator-() const { return make_raw(-num_, den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        __int128 n = (__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_;
        __int128 d = (__int128)a.den_ * b.den_;
        return from128(n, d);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from128((__int128)a.num_ * b.num_, (__int128)a.den_ * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return from128((__int128)a.num_ * b.den_, (__int128)a.den_ * b.num_);
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return (__int128)a.num_ * b.den_ < (__int128)b.num_ * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    /// Renders `p/q`, or just `p` for integers.
    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

    /// Parses `p` or `p/q`. Throws std::invalid_argument on malformed input.
    static Rational parse(const std::string& text) {
        auto slash = text.find('/');
        try {
            if (slash == std::string::npos) return Rational(std::stoll(text));
            long long num = std::stoll(text.substr(0, slash));
            long long den = std::stoll(text.substr(slash + 1));
            return Rational(num, den);
        } catch (const std::logic_error&) {
            throw std::invalid_argument("malformed rational: " + text);
        }
    }

private:
    static Rational make_raw(long long n, long long d) {
        Rational r;
        r.num_ = n;
        r.den_ = d;
        return r;
    }
    static Rational from128(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("rational overflow");
        return make_raw((long long)n, (long long)d);
    }
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }
    void normalize() {
        if (den_ == 0) throw std::domain_error("rational with zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    long long num_ = 0;
    long long den_ = 1;
};

/// Edge weight: a nonnegative rational or the reserved infinity sentinel.
/// Infinity is a distinct state, never a large finite number, so exact cut
/// and flow comparisons stay meaningful.
class Weight {
public:
    Weight() = default;
    Weight(Rational value) : value_(value) {}
    Weight(long long value) : value_(value) {}

    static Weight infinity() {
        Weight w;
        w.infinite_ = true;
        return w;
    }

    bool is_infinite() const { return infinite_; }
    const Rational& finite() const {
        if (infinite_) throw std::domain_error("infinite weight has no finite value");
        return value_;
    }

    friend Weight operator+(const Weight& a, const Weight& b) {
        if (a.infinite_ || b.infinite_) return infinity();
        return Weight(a.value_ + b.value_);
    }
    Weight& operator+=(const Weight& o) { return *this = *this + o; }

    friend Weight operator*(const Weight& a, const Rational& k) {
        if (a.infinite_) return infinity();
        return Weight(a.value_ * k);
    }

    friend bool operator==(const Weight& a, const Weight& b) {
        if (a.infinite_ != b.infinite_) return false;
        return a.infinite_ || a.value_ == b.value_;
    }
    friend bool operator!=(const Weight& a, const Weight& b) { return !(a == b); }
    friend bool operator<(const Weight& a, const Weight& b) {
        if (a.infinite_) return false;
        if (b.infinite_) return true;
        return a.value_ < b.value_;
    }
    friend bool operator<=(const Weight& a, const Weight& b) { return !(b < a); }

    std::string str() const { return infinite_ ? "inf" : value_.str(); }
    friend std::ostream& operator<<(std::ostream& os, const Weight& w) { return os << w.str(); }

    static Weight parse(const std::string& text) {
        if (text == "inf") return infinity();
        return Weight(Rational::parse(text));
    }

private:
    Rational value_;
    bool infinite_ = false;
};

}  // namespace pgt
