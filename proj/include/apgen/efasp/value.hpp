#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace apgen::efasp {

// Exact rational arithmetic so average-hard attention ties are decidable.
class Rational {
public:
    Rational() = default;
    Rational(long long v) : num_(v), den_(1) {}  // NOLINT(google-explicit-constructor)
    Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }

    long long num() const { return num_; }
    long long den() const { return den_; }
    bool is_integer() const { return den_ == 1; }
    long long as_integer() const {
        if (den_ != 1) throw std::runtime_error("rational is not an integer");
        return num_;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational::from128(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                                 i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational::from128(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                                 i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational::from128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::runtime_error("rational division by zero");
        return Rational::from128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        i128 l = i128(a.num_) * b.den_;
        i128 r = i128(b.num_) * a.den_;
        return l < r ? std::strong_ordering::less
                     : l > r ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    std::string str() const {
        return den_ == 1 ? std::to_string(num_)
                         : std::to_string(num_) + "/" + std::to_string(den_);
    }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

private:
    using i128 = __int128;

    static Rational from128(i128 n, i128 d) {
        if (d == 0) throw std::runtime_error("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("rational overflow");
        Rational r;
        r.num_ = static_cast<long long>(n);
        r.den_ = static_cast<long long>(d);
        return r;
    }
    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) {
            i128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }
    void normalize() {
        if (den_ == 0) throw std::runtime_error("rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    long long num_ = 0;
    long long den_ = 1;
};

// A fixed-width vector of rationals; scalars have dimension 1.
using Value = std::vector<Rational>;

inline Value scalar(Rational r) { return Value{r}; }
inline bool truthy(const Rational& r) { return r.num() != 0; }

std::uint64_t hash_value(const Value& v);
std::string value_str(const Value& v);

}  // namespace apgen::efasp
