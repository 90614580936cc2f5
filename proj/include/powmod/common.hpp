#pragma once

// Shared substrate: error types, compensated accumulation, exact rationals
// for phase arithmetic, and the s = sigma + it point used across modules.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace powmod {

// Thrown when a requested computation exceeds a configured memory/term cap.
class resource_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Thrown when a requested accuracy target cannot be met within the term cap.
class precision_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// s = sigma + it together with the derived quantities tau = |t| + 3 and
// ell = log(q*tau) that parameterize the region formulas.
struct ComplexPoint {
    double sigma = 0.0;
    double t = 0.0;

    double tau() const { return std::abs(t) + 3.0; }
    double ell(double q) const { return std::log(q * tau()); }
    std::complex<double> value() const { return {sigma, t}; }
};

// Kahan-compensated accumulator; the complex variant compensates each part.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class KahanComplex {
  public:
    void add(std::complex<double> z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    std::complex<double> value() const { return {re_.value(), im_.value()}; }

  private:
    KahanSum re_;
    KahanSum im_;
};

// Minimal exact rational on int64, reduced with positive denominator.
// Only the operations the breakpoint checks need.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d) : num(n), den(d) { reduce(); }

    void reduce() {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    friend Rational operator+(Rational a, Rational b) {
        return {a.num * b.den + b.num * a.den, a.den * b.den};
    }
    friend Rational operator-(Rational a, Rational b) {
        return {a.num * b.den - b.num * a.den, a.den * b.den};
    }
    friend Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
    friend Rational operator/(Rational a, Rational b) { return {a.num * b.den, a.den * b.num}; }
    friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
    friend bool operator<(Rational a, Rational b) { return a.num * b.den < b.num * a.den; }
    friend bool operator<=(Rational a, Rational b) { return a.num * b.den <= b.num * a.den; }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// e(num/den) = exp(2*pi*i*num/den), phase recomputed from the reduced
// rational each call so long sums accumulate no phase drift.
inline std::complex<double> unit_phase(std::uint64_t num, std::uint64_t den) {
    num %= den;
    const double angle = kTwoPi * (static_cast<double>(num) / static_cast<double>(den));
    return {std::cos(angle), std::sin(angle)};
}

// FNV-1a 64-bit, used for the config hash embedded in every output.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace powmod
