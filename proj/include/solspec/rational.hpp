#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace solspec {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& x) { return x.convert_to<double>(); }

inline Int pow_int(unsigned base, unsigned exp) {
    return boost::multiprecision::pow(Int(base), exp);
}

// Largest v with p^v | n; n must be nonzero.
inline unsigned valuation(Int n, unsigned p) {
    if (n == 0) throw std::invalid_argument("valuation of zero is undefined");
    unsigned v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

inline Int floor_rat(const Rat& x) {
    Int q = numerator(x) / denominator(x);
    if (x < 0 && q * denominator(x) != numerator(x)) --q;
    return q;
}

inline Rat mod1(const Rat& x) { return x - floor_rat(x); }

inline std::string rat_to_string(const Rat& x) {
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

// Accepts "a" or "a/b" with optional sign and surrounding spaces.
inline Rat parse_rat(const std::string& text) {
    auto trim = [](std::string s) {
        const char* ws = " \t";
        auto b = s.find_first_not_of(ws);
        auto e = s.find_last_not_of(ws);
        if (b == std::string::npos) return std::string();
        return s.substr(b, e - b + 1);
    };
    std::string s = trim(text);
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    auto slash = s.find('/');
    auto check_int = [&](const std::string& part) {
        if (part.empty()) throw std::invalid_argument("bad rational literal: " + text);
        std::size_t i = (part[0] == '-' || part[0] == '+') ? 1 : 0;
        if (i == part.size()) throw std::invalid_argument("bad rational literal: " + text);
        for (; i < part.size(); ++i)
            if (part[i] < '0' || part[i] > '9')
                throw std::invalid_argument("bad rational literal: " + text);
    };
    if (slash == std::string::npos) {
        check_int(s);
        return Rat(Int(s));
    }
    std::string num = trim(s.substr(0, slash));
    std::string den = trim(s.substr(slash + 1));
    check_int(num);
    check_int(den);
    Int d(den);
    if (d == 0) throw std::invalid_argument("zero denominator: " + text);
    return Rat(Int(num), d);
}

} // namespace solspec
