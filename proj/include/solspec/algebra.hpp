#pragma once

#include "solspec/length.hpp"
#include "solspec/padic.hpp"
#include "solspec/theta.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace solspec {

using Complex = std::complex<double>;

// Finitely supported coefficient vector on Gamma, tied to a multiplier
// context. Exact zeros are never stored; dropping small coefficients is a
// separate explicit operation (prune_small).
class FiniteSupportElement {
public:
    explicit FiniteSupportElement(ThetaPtr theta) : theta_(std::move(theta)) {
        if (!theta_) throw std::invalid_argument("null theta context");
    }

    static FiniteSupportElement delta(ThetaPtr theta, const GroupElement& g,
                                      Complex c = Complex(1.0, 0.0)) {
        FiniteSupportElement f(std::move(theta));
        f.add_term(g, c);
        return f;
    }

    static FiniteSupportElement identity(ThetaPtr theta) {
        unsigned p = theta->prime();
        return delta(std::move(theta), GroupElement::identity(p));
    }

    const ThetaSequence& theta() const { return *theta_; }
    ThetaPtr theta_ptr() const { return theta_; }
    unsigned prime() const { return theta_->prime(); }

    void add_term(const GroupElement& g, Complex c) {
        if (g.prime() != prime()) throw std::invalid_argument("prime mismatch in add_term");
        auto [it, inserted] = coeffs_.try_emplace(g, c);
        if (!inserted) {
            it->second += c;
            if (it->second == Complex(0.0, 0.0)) coeffs_.erase(it);
            return;
        }
        if (c == Complex(0.0, 0.0)) coeffs_.erase(it);
    }

    Complex coeff(const GroupElement& g) const {
        auto it = coeffs_.find(g);
        return it == coeffs_.end() ? Complex(0.0, 0.0) : it->second;
    }

    std::size_t support_size() const { return coeffs_.size(); }
    bool empty() const { return coeffs_.empty(); }

    auto begin() const { return coeffs_.begin(); }
    auto end() const { return coeffs_.end(); }

    double l1_norm() const {
        double s = 0.0;
        for (const auto& [g, c] : coeffs_) s += std::abs(c);
        return s;
    }

    friend FiniteSupportElement operator*(Complex a, const FiniteSupportElement& f) {
        FiniteSupportElement out(f.theta_);
        for (const auto& [g, c] : f.coeffs_) out.add_term(g, a * c);
        return out;
    }

private:
    ThetaPtr theta_;
    std::map<GroupElement, Complex, GroupElementLess> coeffs_;
};

inline void require_same_context(const FiniteSupportElement& a, const FiniteSupportElement& b) {
    if (a.theta() != b.theta())
        throw std::invalid_argument("multiplier context mismatch between elements");
}

// dst += scale * src
inline void add_scaled(FiniteSupportElement& dst, const FiniteSupportElement& src,
                       Complex scale = Complex(1.0, 0.0)) {
    require_same_context(dst, src);
    for (const auto& [g, c] : src) dst.add_term(g, scale * c);
}

// (f * g)(gamma) = sum over gamma1 of f(gamma1) g(gamma - gamma1)
// sigma(gamma1, gamma - gamma1).
inline FiniteSupportElement twisted_convolve(const FiniteSupportElement& f,
                                             const FiniteSupportElement& g) {
    require_same_context(f, g);
    FiniteSupportElement out(f.theta_ptr());
    const ThetaSequence& theta = f.theta();
    for (const auto& [g1, c1] : f) {
        for (const auto& [g2, c2] : g) {
            Complex phase = multiplier(theta, g1, g2).value();
            out.add_term(g1 + g2, c1 * c2 * phase);
        }
    }
    return out;
}

// f*(gamma) = conj(f(-gamma) sigma(gamma, -gamma))
inline FiniteSupportElement adjoint(const FiniteSupportElement& f) {
    FiniteSupportElement out(f.theta_ptr());
    const ThetaSequence& theta = f.theta();
    for (const auto& [g, c] : f) {
        GroupElement h = -g;
        Complex phase = multiplier(theta, h, g).value();
        out.add_term(h, std::conj(c * phase));
    }
    return out;
}

struct PruneResult {
    FiniteSupportElement element;
    double removed_mass = 0.0;
};

inline PruneResult prune_small(const FiniteSupportElement& f, double threshold) {
    PruneResult r{FiniteSupportElement(f.theta_ptr()), 0.0};
    for (const auto& [g, c] : f) {
        if (std::abs(c) < threshold)
            r.removed_mass += std::abs(c);
        else
            r.element.add_term(g, c);
    }
    return r;
}

// ||f||_{1,s,L} = sum |f(gamma)| (1 + L(gamma))^s
inline double weighted_norm(const FiniteSupportElement& f, double s, const LengthSpec& spec) {
    double out = 0.0;
    for (const auto& [g, c] : f)
        out += std::abs(c) * std::pow(to_double(Rat(1) + length(spec, g)), s);
    return out;
}

// sup over integers N >= 1 of N^q ||(1 - chi_N) f||_1; the supremum of the
// finitely supported tail is attained at some N below the largest length.
inline double mu_q(const FiniteSupportElement& f, double q, const LengthSpec& spec) {
    if (f.empty()) return 0.0;
    std::vector<std::pair<Rat, double>> terms;
    terms.reserve(f.support_size());
    for (const auto& [g, c] : f) terms.emplace_back(length(spec, g), std::abs(c));
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> suffix(terms.size() + 1, 0.0);
    for (std::size_t i = terms.size(); i-- > 0;) suffix[i] = suffix[i + 1] + terms[i].second;
    Int nmax = floor_rat(terms.back().first) + 1;
    double best = 0.0;
    std::size_t idx = 0;
    for (Int n = 1; n <= nmax; ++n) {
        Rat rn(n);
        while (idx < terms.size() && terms[idx].first <= rn) ++idx;
        double tail = suffix[idx];
        if (tail == 0.0) break;
        best = std::max(best, std::pow(to_double(Rat(n)), q) * tail);
    }
    return best;
}

// Parts of f inside / outside the closed ball of radius R.
inline FiniteSupportElement restrict_inside(const FiniteSupportElement& f, const LengthSpec& spec,
                                            const Rat& R) {
    FiniteSupportElement out(f.theta_ptr());
    for (const auto& [g, c] : f)
        if (length(spec, g) <= R) out.add_term(g, c);
    return out;
}

inline FiniteSupportElement restrict_outside(const FiniteSupportElement& f,
                                             const LengthSpec& spec, const Rat& R) {
    FiniteSupportElement out(f.theta_ptr());
    for (const auto& [g, c] : f)
        if (length(spec, g) > R) out.add_term(g, c);
    return out;
}

// l1 mass of f outside the ball of radius sqrt(N), decided exactly via L^2 > N.
inline double tail_outside_sqrt(const FiniteSupportElement& f, const LengthSpec& spec, unsigned N) {
    double s = 0.0;
    for (const auto& [g, c] : f) {
        Rat L = length(spec, g);
        if (L * L > Int(N)) s += std::abs(c);
    }
    return s;
}

} // namespace solspec
