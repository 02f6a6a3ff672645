#pragma once

#include "solspec/padic.hpp"
#include "solspec/rational.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace solspec {

// Backward p-adic solenoid point: theta_0 in [0,1) together with an
// eventually periodic digit stream over {0,...,p-1} determining the lifts
// theta_n = (theta_{n-1} + digit(n)) / p, so that p * theta_n == theta_{n-1} (mod Z).
class ThetaSequence {
public:
    ThetaSequence(unsigned p, Rat theta0, std::vector<unsigned> preperiod = {},
                  std::vector<unsigned> period = {})
        : p_(p), theta0_(std::move(theta0)), preperiod_(std::move(preperiod)),
          period_(std::move(period)) {
        if (p_ < 2) throw std::invalid_argument("prime must be >= 2");
        if (theta0_ < 0 || theta0_ >= 1)
            throw std::invalid_argument("theta0 must lie in [0,1)");
        for (unsigned d : preperiod_)
            if (d >= p_) throw std::invalid_argument("digit out of range");
        for (unsigned d : period_)
            if (d >= p_) throw std::invalid_argument("digit out of range");
        memo_.push_back(theta0_);
    }

    unsigned prime() const { return p_; }
    const Rat& theta0() const { return theta0_; }
    const std::vector<unsigned>& preperiod() const { return preperiod_; }
    const std::vector<unsigned>& period() const { return period_; }

    // theta_n, memoized; an empty period continues the stream with zeros.
    Rat at(std::size_t n) const {
        std::lock_guard<std::mutex> lock(mu_);
        while (memo_.size() <= n) {
            std::size_t next = memo_.size(); // index of the term being produced
            memo_.push_back((memo_.back() + Int(digit(next))) / p_);
        }
        return memo_[n];
    }

    friend bool operator==(const ThetaSequence& a, const ThetaSequence& b) {
        return a.p_ == b.p_ && a.theta0_ == b.theta0_ && a.preperiod_ == b.preperiod_ &&
               a.period_ == b.period_;
    }
    friend bool operator!=(const ThetaSequence& a, const ThetaSequence& b) { return !(a == b); }

private:
    unsigned digit(std::size_t n) const { // n >= 1
        std::size_t i = n - 1;
        if (i < preperiod_.size()) return preperiod_[i];
        if (period_.empty()) return 0;
        return period_[(i - preperiod_.size()) % period_.size()];
    }

    unsigned p_;
    Rat theta0_;
    std::vector<unsigned> preperiod_;
    std::vector<unsigned> period_;
    mutable std::mutex mu_;
    mutable std::vector<Rat> memo_;
};

using ThetaPtr = std::shared_ptr<const ThetaSequence>;

inline ThetaPtr make_theta(unsigned p, const Rat& theta0, std::vector<unsigned> preperiod = {},
                           std::vector<unsigned> period = {}) {
    return std::make_shared<const ThetaSequence>(p, theta0, std::move(preperiod),
                                                 std::move(period));
}

// Angle in whole turns, reduced exactly into [0,1).
class PhaseAngle {
public:
    explicit PhaseAngle(const Rat& turns) : turns_(mod1(turns)) {}

    const Rat& turns() const { return turns_; }

    std::complex<double> value() const {
        double t = 2.0 * M_PI * to_double(turns_);
        return {std::cos(t), std::sin(t)};
    }

    friend PhaseAngle operator+(const PhaseAngle& a, const PhaseAngle& b) {
        return PhaseAngle(a.turns_ + b.turns_);
    }
    friend bool operator==(const PhaseAngle& a, const PhaseAngle& b) {
        return a.turns_ == b.turns_;
    }
    friend bool operator!=(const PhaseAngle& a, const PhaseAngle& b) { return !(a == b); }

private:
    Rat turns_;
};

inline std::complex<double> phase_to_complex(const PhaseAngle& a) { return a.value(); }

// Multiplier angle evaluated on raw presentations (q1 / p^k1, q4 / p^k4);
// the value depends only on the represented group elements.
inline Rat multiplier_turns_raw(const ThetaSequence& theta, const Int& q1, unsigned k1,
                                const Int& q4, unsigned k4) {
    if (q1 == 0 || q4 == 0) return Rat(0);
    return mod1(theta.at(std::size_t(k1) + k4) * q1 * q4);
}

inline PhaseAngle multiplier(const ThetaSequence& theta, const GroupElement& g1,
                             const GroupElement& g2) {
    if (theta.prime() != g1.prime() || theta.prime() != g2.prime())
        throw std::invalid_argument("prime mismatch between theta and group elements");
    return PhaseAngle(multiplier_turns_raw(theta, g1.first().numerator(),
                                           g1.first().exponent(), g2.second().numerator(),
                                           g2.second().exponent()));
}

} // namespace solspec
