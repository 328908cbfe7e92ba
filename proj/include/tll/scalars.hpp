#pragma once

// Coefficient scalars for the jet algebra: std::complex<double> for the
// floating mode and an exact complex-rational type for the exact mode.

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tll {

using Rational = boost::multiprecision::cpp_rational;

// Complex numbers with exact rational real/imaginary parts.  std::complex is
// only specified for the builtin floating types, so we carry our own minimal
// field implementation (add/sub/mul/div are all exact).
struct ComplexRational {
    Rational re{0};
    Rational im{0};

    ComplexRational() = default;
    ComplexRational(Rational r) : re(std::move(r)) {}
    ComplexRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    ComplexRational(long r) : re(r) {}
    ComplexRational(long num, long den) : re(Rational(num) / den) {}

    bool is_zero() const { return re == 0 && im == 0; }

    friend ComplexRational operator+(const ComplexRational& a, const ComplexRational& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend ComplexRational operator-(const ComplexRational& a, const ComplexRational& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend ComplexRational operator-(const ComplexRational& a) { return {-a.re, -a.im}; }
    friend ComplexRational operator*(const ComplexRational& a, const ComplexRational& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend ComplexRational operator/(const ComplexRational& a, const ComplexRational& b) {
        Rational n = b.re * b.re + b.im * b.im;
        if (n == 0) throw std::domain_error("ComplexRational: division by zero");
        return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
    }
    ComplexRational& operator+=(const ComplexRational& b) { *this = *this + b; return *this; }
    ComplexRational& operator-=(const ComplexRational& b) { *this = *this - b; return *this; }
    ComplexRational& operator*=(const ComplexRational& b) { *this = *this * b; return *this; }
    friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
        return a.re == b.re && a.im == b.im;
    }

    std::complex<double> to_complex() const {
        return {static_cast<double>(re), static_cast<double>(im)};
    }
};

// Uniform hooks the jet template needs from its scalar type.
template <class S>
struct scalar_ops;

template <>
struct scalar_ops<std::complex<double>> {
    using S = std::complex<double>;
    static constexpr bool exact = false;
    static S zero() { return {0.0, 0.0}; }
    static S one() { return {1.0, 0.0}; }
    static S from_int(long long n) { return {static_cast<double>(n), 0.0}; }
    static S div_int(const S& a, long long n) { return a / static_cast<double>(n); }
    static bool is_zero(const S& a) { return a == S{0.0, 0.0}; }
    static double abs(const S& a) { return std::abs(a); }
    static S conj(const S& a) { return std::conj(a); }
    // Principal branches; the constant term must stay off the negative real axis.
    static S sqrt(const S& a) {
        if (a.real() < 0.0 && a.imag() == 0.0)
            throw std::domain_error("jet_sqrt: constant term on the negative real axis (branch cut)");
        return std::sqrt(a);
    }
    static S log(const S& a) {
        if (a.real() < 0.0 && a.imag() == 0.0)
            throw std::domain_error("jet_log: constant term on the negative real axis (branch cut)");
        if (a == S{0.0, 0.0}) throw std::domain_error("jet_log: zero constant term");
        return std::log(a);
    }
    static S exp(const S& a) { return std::exp(a); }
};

template <>
struct scalar_ops<ComplexRational> {
    using S = ComplexRational;
    static constexpr bool exact = true;
    static S zero() { return {}; }
    static S one() { return {Rational(1)}; }
    static S from_int(long long n) { return {Rational(n)}; }
    static S div_int(const S& a, long long n) {
        return {a.re / Rational(n), a.im / Rational(n)};
    }
    static bool is_zero(const S& a) { return a.is_zero(); }
    static double abs(const S& a) { return std::abs(a.to_complex()); }
    static S conj(const S& a) { return {a.re, -a.im}; }
    // Exact mode supports the unit-constant-term cases only: sqrt(1)=1,
    // log(1)=0, exp(0)=1.  Anything else has no rational value.
    static S sqrt(const S& a) {
        if (a == one()) return one();
        throw std::domain_error("jet_sqrt: exact mode requires unit constant term");
    }
    static S log(const S& a) {
        if (a == one()) return zero();
        throw std::domain_error("jet_log: exact mode requires unit constant term");
    }
    static S exp(const S& a) {
        if (a.is_zero()) return one();
        throw std::domain_error("jet_exp: exact mode requires zero constant term");
    }
};

using Complex = std::complex<double>;

}  // namespace tll
