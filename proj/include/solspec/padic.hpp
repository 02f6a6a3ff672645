#pragma once

#include "solspec/rational.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace solspec {

// Element of Z[1/p], kept in the canonical form num / p^expo with
// p not dividing num unless num == 0 (then expo == 0).
class PAdicRational {
public:
    PAdicRational(unsigned p, Int num, unsigned expo = 0)
        : p_(p), num_(std::move(num)), expo_(expo) {
        if (p_ < 2) throw std::invalid_argument("prime must be >= 2");
        canonicalize();
    }

    static PAdicRational zero(unsigned p) { return PAdicRational(p, 0, 0); }

    // value must have a p-power denominator.
    static PAdicRational from_rational(unsigned p, const Rat& value) {
        Int den = denominator(value);
        unsigned k = 0;
        while (den % p == 0) {
            den /= p;
            ++k;
        }
        if (den != 1)
            throw std::invalid_argument("denominator of " + rat_to_string(value) +
                                        " is not a power of " + std::to_string(p));
        return PAdicRational(p, boost::multiprecision::numerator(value), k);
    }

    unsigned prime() const { return p_; }
    const Int& numerator() const { return num_; }
    unsigned exponent() const { return expo_; }
    bool is_zero() const { return num_ == 0; }

    Rat value() const { return Rat(num_, pow_int(p_, expo_)); }

    PAdicRational operator-() const {
        PAdicRational r(*this);
        r.num_ = -r.num_;
        return r;
    }

    friend PAdicRational operator+(const PAdicRational& a, const PAdicRational& b) {
        a.require_same_prime(b);
        unsigned k = std::max(a.expo_, b.expo_);
        Int n = a.num_ * pow_int(a.p_, k - a.expo_) + b.num_ * pow_int(b.p_, k - b.expo_);
        return PAdicRational(a.p_, std::move(n), k);
    }

    friend PAdicRational operator-(const PAdicRational& a, const PAdicRational& b) {
        return a + (-b);
    }

    friend bool operator==(const PAdicRational& a, const PAdicRational& b) {
        return a.p_ == b.p_ && a.expo_ == b.expo_ && a.num_ == b.num_;
    }
    friend bool operator!=(const PAdicRational& a, const PAdicRational& b) { return !(a == b); }

private:
    void canonicalize() {
        if (num_ == 0) {
            expo_ = 0;
            return;
        }
        while (expo_ > 0 && num_ % p_ == 0) {
            num_ /= p_;
            --expo_;
        }
    }

    void require_same_prime(const PAdicRational& other) const {
        if (p_ != other.p_)
            throw std::invalid_argument("prime mismatch: " + std::to_string(p_) + " vs " +
                                        std::to_string(other.p_));
    }

    unsigned p_;
    Int num_;
    unsigned expo_;
};

// |r|_p: p^expo for noninteger r, p^{-v_p(num)} for integers, 0 at 0.
inline Rat padic_norm(const PAdicRational& x) {
    if (x.is_zero()) return Rat(0);
    if (x.exponent() > 0) return Rat(pow_int(x.prime(), x.exponent()));
    return Rat(1, pow_int(x.prime(), valuation(x.numerator(), x.prime())));
}

// Archimedean value together with the (numerator, exponent) data of the
// negated p-adic coordinate of the diagonal embedding r -> (r, -r).
struct LambdaEmbed {
    double archimedean;
    Int padic_numerator;
    unsigned padic_exponent;
};

inline LambdaEmbed lambda_embed(const PAdicRational& x) {
    return LambdaEmbed{to_double(x.value()), -x.numerator(), x.exponent()};
}

// Canonical scalar order used for all deterministic enumerations:
// by absolute value first, positive before negative on ties.
inline int compare_scalar(const PAdicRational& a, const PAdicRational& b) {
    Rat va = a.value();
    Rat vb = b.value();
    Rat ma = va < 0 ? -va : va;
    Rat mb = vb < 0 ? -vb : vb;
    if (ma != mb) return ma < mb ? -1 : 1;
    int ra = va < 0 ? 1 : 0;
    int rb = vb < 0 ? 1 : 0;
    if (ra != rb) return ra < rb ? -1 : 1;
    return 0;
}

// Element of Gamma = Z[1/p] x Z[1/p].
class GroupElement {
public:
    GroupElement(PAdicRational x1, PAdicRational x2)
        : x1_(std::move(x1)), x2_(std::move(x2)) {
        if (x1_.prime() != x2_.prime())
            throw std::invalid_argument("coordinate prime mismatch");
    }

    static GroupElement identity(unsigned p) {
        return GroupElement(PAdicRational::zero(p), PAdicRational::zero(p));
    }

    unsigned prime() const { return x1_.prime(); }
    const PAdicRational& first() const { return x1_; }
    const PAdicRational& second() const { return x2_; }
    bool is_identity() const { return x1_.is_zero() && x2_.is_zero(); }

    GroupElement operator-() const { return GroupElement(-x1_, -x2_); }

    friend GroupElement operator+(const GroupElement& a, const GroupElement& b) {
        return GroupElement(a.x1_ + b.x1_, a.x2_ + b.x2_);
    }
    friend GroupElement operator-(const GroupElement& a, const GroupElement& b) {
        return a + (-b);
    }
    friend bool operator==(const GroupElement& a, const GroupElement& b) {
        return a.x1_ == b.x1_ && a.x2_ == b.x2_;
    }
    friend bool operator!=(const GroupElement& a, const GroupElement& b) { return !(a == b); }

private:
    PAdicRational x1_;
    PAdicRational x2_;
};

inline int compare_element(const GroupElement& a, const GroupElement& b) {
    int c = compare_scalar(a.first(), b.first());
    if (c != 0) return c;
    return compare_scalar(a.second(), b.second());
}

struct GroupElementLess {
    bool operator()(const GroupElement& a, const GroupElement& b) const {
        return compare_element(a, b) < 0;
    }
};

// "a" for integers, "a/p^k" otherwise, e.g. "3/2^2".
inline std::string to_string(const PAdicRational& x) {
    if (x.exponent() == 0) return x.numerator().str();
    return x.numerator().str() + "/" + std::to_string(x.prime()) + "^" +
           std::to_string(x.exponent());
}

inline std::string to_string(const GroupElement& g) {
    return "(" + to_string(g.first()) + ", " + to_string(g.second()) + ")";
}

// Accepts "a", "a/p^k", or "a/b" with a p-power b.
inline PAdicRational parse_padic(const std::string& text, unsigned p) {
    auto caret = text.find('^');
    if (caret == std::string::npos) return PAdicRational::from_rational(p, parse_rat(text));
    auto slash = text.find('/');
    if (slash == std::string::npos || slash > caret)
        throw std::invalid_argument("bad p-adic literal: " + text);
    Rat num = parse_rat(text.substr(0, slash));
    if (denominator(num) != 1) throw std::invalid_argument("bad p-adic literal: " + text);
    Rat base = parse_rat(text.substr(slash + 1, caret - slash - 1));
    Rat expo = parse_rat(text.substr(caret + 1));
    if (denominator(base) != 1 || denominator(expo) != 1 || base != p || expo < 0)
        throw std::invalid_argument("bad p-adic literal: " + text);
    return PAdicRational(p, numerator(num), expo.convert_to<unsigned>());
}

inline GroupElement parse_group_element(const std::string& text, unsigned p) {
    auto open = text.find('(');
    auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close <= open)
        throw std::invalid_argument("bad group element literal: " + text);
    std::string inner = text.substr(open + 1, close - open - 1);
    auto comma = inner.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("bad group element literal: " + text);
    return GroupElement(parse_padic(inner.substr(0, comma), p),
                        parse_padic(inner.substr(comma + 1), p));
}

} // namespace solspec
