#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ballsim {

using int128 = __int128;

inline int128 abs128(int128 v) { return v < 0 ? -v : v; }

inline int128 gcd128(int128 a, int128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

std::string int128_to_string(int128 v);

/// Exact rational over 128-bit integers. Always stored normalized with a
/// positive denominator. Arithmetic throws std::overflow_error when an
/// intermediate product leaves the 128-bit range.
class Rat {
public:
    Rat() : num_(0), den_(1) {}
    Rat(int64_t n) : num_(n), den_(1) {}
    Rat(int128 n, int128 d) : num_(n), den_(d) { normalize(); }

    static Rat of(int64_t num, int64_t den) { return Rat(int128(num), int128(den)); }

    int128 num() const { return num_; }
    int128 den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }
    int sign() const { return num_ < 0 ? -1 : (num_ > 0 ? 1 : 0); }

    Rat operator-() const { return Rat(-num_, den_, already_normalized{}); }

    friend Rat operator+(const Rat& a, const Rat& b) {
        int128 g = gcd128(a.den_, b.den_);
        int128 lhs = mul_checked(a.num_, b.den_ / g);
        int128 rhs = mul_checked(b.num_, a.den_ / g);
        return Rat(add_checked(lhs, rhs), mul_checked(a.den_, b.den_ / g));
    }
    friend Rat operator-(const Rat& a, const Rat& b) { return a + (-b); }
    friend Rat operator*(const Rat& a, const Rat& b) {
        int128 g1 = gcd128(a.num_, b.den_);
        int128 g2 = gcd128(b.num_, a.den_);
        return Rat(mul_checked(a.num_ / g1, b.num_ / g2),
                   mul_checked(a.den_ / g2, b.den_ / g1), already_normalized{});
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw std::domain_error("Rat: division by zero");
        return a * Rat(b.den_, b.num_);
    }

    Rat& operator+=(const Rat& o) { return *this = *this + o; }
    Rat& operator-=(const Rat& o) { return *this = *this - o; }
    Rat& operator*=(const Rat& o) { return *this = *this * o; }
    Rat& operator/=(const Rat& o) { return *this = *this / o; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) {
        return mul_checked(a.num_, b.den_) < mul_checked(b.num_, a.den_);
    }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
    friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

    Rat abs() const { return num_ < 0 ? -*this : *this; }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    /// "p/q", or just "p" when the value is an integer.
    std::string str() const {
        std::string s = int128_to_string(num_);
        if (den_ != 1) s += "/" + int128_to_string(den_);
        return s;
    }

private:
    struct already_normalized {};
    Rat(int128 n, int128 d, already_normalized) : num_(n), den_(d) {}

    static int128 add_checked(int128 a, int128 b) {
        int128 r;
        if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("Rat: add overflow");
        return r;
    }
    static int128 mul_checked(int128 a, int128 b) {
        int128 r;
        if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("Rat: mul overflow");
        return r;
    }

    void normalize() {
        if (den_ == 0) throw std::domain_error("Rat: zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        int128 g = gcd128(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
        if (num_ == 0) den_ = 1;
    }

    int128 num_;
    int128 den_;
};

}  // namespace ballsim
