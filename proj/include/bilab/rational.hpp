#pragma once
// Exact rationals over arbitrary-precision integers.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace bilab {

using BigInt = boost::multiprecision::cpp_int;

class Rational {
public:
    using value_type = boost::multiprecision::cpp_rational;

    Rational() = default;
    Rational(long long v) : v_(v) {}  // NOLINT(google-explicit-constructor)
    Rational(const BigInt& num, const BigInt& den) {
        if (den == 0) throw std::domain_error("rational with zero denominator");
        v_ = value_type(num, den);
    }
    explicit Rational(const value_type& v) : v_(v) {}

    // Accepts "a", "a/b" and finite decimals such as "-2.75".
    static Rational parse(const std::string& text) {
        std::string s;
        for (char c : text)
            if (c != ' ' && c != '\t') s.push_back(c);
        if (s.empty()) throw std::invalid_argument("empty rational");
        auto slash = s.find('/');
        if (slash != std::string::npos) {
            BigInt a = parse_int(s.substr(0, slash));
            BigInt b = parse_int(s.substr(slash + 1));
            if (b == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
            return Rational(a, b);
        }
        auto dot = s.find('.');
        if (dot == std::string::npos) return Rational(parse_int(s), BigInt(1));
        std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
        if (fp.empty() || fp.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("bad decimal '" + text + "'");
        bool neg = !ip.empty() && ip[0] == '-';
        if (ip.empty() || ip == "-" || ip == "+") ip += "0";
        BigInt whole = parse_int(ip);
        if (whole < 0) whole = -whole;
        BigInt scale = 1;
        for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
        BigInt num = whole * scale + BigInt(fp);
        return Rational(neg ? BigInt(-num) : num, scale);
    }

    BigInt num() const { return boost::multiprecision::numerator(v_); }
    BigInt den() const { return boost::multiprecision::denominator(v_); }
    const value_type& value() const { return v_; }

    double to_double() const { return v_.convert_to<double>(); }

    std::string str() const {
        if (den() == 1) return num().str();
        return num().str() + "/" + den().str();
    }

    bool is_integer() const { return den() == 1; }
    int sign() const { return v_.sign(); }

    Rational operator-() const { return Rational(value_type(-v_)); }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.v_ == 0) throw std::domain_error("division by zero rational");
        v_ /= o.v_;
        return *this;
    }
    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend auto operator<=>(const Rational& a, const Rational& b) {
        if (a.v_ < b.v_) return std::strong_ordering::less;
        if (a.v_ > b.v_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    static BigInt parse_int(const std::string& s) {
        std::size_t start = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
        if (s.size() == start || s.find_first_not_of("0123456789", start) != std::string::npos)
            throw std::invalid_argument("bad integer '" + s + "'");
        BigInt v(s.substr(start));
        return s[0] == '-' ? BigInt(-v) : v;
    }

    value_type v_{0};
};

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

inline Rational reciprocal(const Rational& r) { return Rational(1) / r; }

// Hölder conjugate p' = p/(p-1); p must exceed 1.
inline Rational conjugate(const Rational& p) {
    if (p <= Rational(1)) throw std::domain_error("conjugate exponent needs p > 1, got " + p.str());
    return p / (p - Rational(1));
}

inline bool fits_int64(const BigInt& v) {
    return v >= BigInt(std::numeric_limits<std::int64_t>::min()) &&
           v <= BigInt(std::numeric_limits<std::int64_t>::max());
}

}  // namespace bilab
