#pragma once

#include "solspec/algebra.hpp"
#include "solspec/length.hpp"
#include "solspec/operators.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace solspec {

// Does gamma lie in Gamma_n = (1/p^n)Z x (1/p^n)Z?
inline bool in_gamma_n(const GroupElement& g, unsigned n) {
    return g.first().exponent() <= n && g.second().exponent() <= n;
}

using Z2Point = std::pair<Int, Int>;

// upsilon_n(z) = (z1 / p^n, z2 / p^n)
inline GroupElement upsilon(unsigned p, unsigned n, const Z2Point& z) {
    return GroupElement(PAdicRational(p, z.first, n), PAdicRational(p, z.second, n));
}

inline Z2Point upsilon_inv(unsigned n, const GroupElement& g) {
    if (!in_gamma_n(g, n))
        throw std::invalid_argument("element is not in Gamma_" + std::to_string(n));
    unsigned p = g.prime();
    return {g.first().numerator() * pow_int(p, n - g.first().exponent()),
            g.second().numerator() * pow_int(p, n - g.second().exponent())};
}

// Finitely supported coefficients on the level-n copy of Z^2.
class Z2Element {
public:
    Z2Element(unsigned p, unsigned level) : p_(p), level_(level) {}

    static Z2Element delta(unsigned p, unsigned level, const Z2Point& z,
                           Complex c = Complex(1.0, 0.0)) {
        Z2Element f(p, level);
        f.add_term(z, c);
        return f;
    }

    unsigned prime() const { return p_; }
    unsigned level() const { return level_; }

    void add_term(const Z2Point& z, Complex c) {
        auto [it, inserted] = coeffs_.try_emplace(z, c);
        if (!inserted) {
            it->second += c;
            if (it->second == Complex(0.0, 0.0)) coeffs_.erase(it);
            return;
        }
        if (c == Complex(0.0, 0.0)) coeffs_.erase(it);
    }

    auto begin() const { return coeffs_.begin(); }
    auto end() const { return coeffs_.end(); }
    std::size_t support_size() const { return coeffs_.size(); }

    friend bool operator==(const Z2Element& a, const Z2Element& b) {
        return a.p_ == b.p_ && a.level_ == b.level_ && a.coeffs_ == b.coeffs_;
    }

private:
    unsigned p_;
    unsigned level_;
    std::map<Z2Point, Complex> coeffs_;
};

// phi_{j,k}: level-j coefficients to level-k coefficients, z -> p^{k-j} z.
// On Gamma-coordinates this is the identity, which realizes U -> U^{p^{k-j}}
// on the level generators.
inline Z2Element phi_embed(const Z2Element& f, unsigned k) {
    if (k < f.level())
        throw std::invalid_argument("cannot embed level " + std::to_string(f.level()) +
                                    " into lower level " + std::to_string(k));
    Int factor = pow_int(f.prime(), k - f.level());
    Z2Element out(f.prime(), k);
    for (const auto& [z, c] : f) out.add_term({z.first * factor, z.second * factor}, c);
    return out;
}

inline FiniteSupportElement to_group_algebra(const Z2Element& f, const ThetaPtr& theta) {
    if (theta->prime() != f.prime())
        throw std::invalid_argument("prime mismatch between element and theta");
    FiniteSupportElement out(theta);
    for (const auto& [z, c] : f) out.add_term(upsilon(f.prime(), f.level(), z), c);
    return out;
}

inline Z2Element from_group_algebra(const FiniteSupportElement& f, unsigned level) {
    Z2Element out(f.prime(), level);
    for (const auto& [g, c] : f) out.add_term(upsilon_inv(level, g), c);
    return out;
}

struct MorphismCheckReport {
    unsigned j = 0;
    unsigned k = 0;
    std::size_t samples = 0;
    bool support_ok = false;        // (1) finite support landing in Gamma_k
    double intertwine_deviation = 0.0; // (2) max |I pi_j(f) - pi_k(phi f) I|
    bool lengths_ok = false;        // (3) restricted lengths agree on Gamma_j
    bool pass = false;
};

// Checks the inductive-morphism conditions for phi_{j,k} on truncations at
// radius R: the embedded support stays finite and Gamma-invariant, the
// regular representations intertwine through the ball inclusion exactly,
// and the restricted length functions agree on the smaller ball.
inline MorphismCheckReport verify_morphism(const ThetaPtr& theta, unsigned j, unsigned k,
                                           const std::vector<Z2Element>& samples, const Rat& R,
                                           double tol = 0.0,
                                           std::size_t cap = default_ball_cap) {
    if (j > k) throw std::invalid_argument("verify_morphism needs j <= k");
    unsigned p = theta->prime();
    MorphismCheckReport rep;
    rep.j = j;
    rep.k = k;
    rep.samples = samples.size();

    LengthSpec spec_j = LengthSpec::restricted_sum(p, j);
    LengthSpec spec_k = LengthSpec::restricted_sum(p, k);
    BasisPtr basis_j = make_basis(spec_j, R, cap);
    BasisPtr basis_k = make_basis(spec_k, R, cap);

    std::vector<std::size_t> inject(basis_j->size());
    for (std::size_t i = 0; i < basis_j->size(); ++i) {
        auto idx = basis_k->find(basis_j->element(i));
        if (!idx) throw std::logic_error("Gamma_j ball element missing from Gamma_k ball");
        inject[i] = *idx;
    }

    rep.support_ok = true;
    for (const Z2Element& s : samples) {
        if (s.level() != j) throw std::invalid_argument("sample is not a level-j element");
        Z2Element embedded = phi_embed(s, k);
        FiniteSupportElement fj = to_group_algebra(s, theta);
        FiniteSupportElement fk = to_group_algebra(embedded, theta);
        if (embedded.support_size() != s.support_size()) rep.support_ok = false;
        for (const auto& [g, c] : fk) {
            if (!in_gamma_n(g, k)) rep.support_ok = false;
            if (fj.coeff(g) != c) rep.support_ok = false; // Gamma-coordinate invariance
        }

        TruncatedOperator mj = regular_rep_matrix(fj, basis_j);
        TruncatedOperator mk = regular_rep_matrix(fk, basis_k);
        std::vector<bool> from_j(basis_k->size(), false);
        for (std::size_t i = 0; i < basis_j->size(); ++i) from_j[inject[i]] = true;
        std::vector<std::size_t> back(basis_k->size(), 0);
        for (std::size_t i = 0; i < basis_j->size(); ++i) back[inject[i]] = i;
        for (std::size_t col = 0; col < basis_j->size(); ++col) {
            for (std::size_t row = 0; row < basis_k->size(); ++row) {
                Complex expected =
                    from_j[row] ? mj.at(back[row], col) : Complex(0.0, 0.0);
                double dev = std::abs(mk.at(row, inject[col]) - expected);
                rep.intertwine_deviation = std::max(rep.intertwine_deviation, dev);
            }
        }
    }

    rep.lengths_ok = true;
    for (std::size_t i = 0; i < basis_j->size(); ++i) {
        const GroupElement& g = basis_j->element(i);
        if (length(spec_j, g) != length(spec_k, g)) rep.lengths_ok = false;
    }

    rep.pass = rep.support_ok && rep.lengths_ok && rep.intertwine_deviation <= tol;
    return rep;
}

struct ResolventGap {
    double truncated_gap = 0.0; // sup over B(R) \ Gamma_j of |L - it|^{-1}
    double analytic_tail = 0.0; // (R^2 + t^2)^{-1/2}
    bool complement_empty = true;
};

// How far the level-j resolvent is from the limit resolvent on the ball of
// radius R: the gap is attained at the shortest element outside Gamma_j.
inline ResolventGap resolvent_gap(unsigned p, unsigned j, double t, const Rat& R,
                                  std::size_t cap = default_ball_cap) {
    if (t == 0.0) throw std::invalid_argument("resolvent gap requires nonzero t");
    Ball ball = enumerate_ball(LengthSpec::sum(p), R, cap);
    ResolventGap gap;
    gap.analytic_tail = 1.0 / std::hypot(to_double(R), t);
    for (std::size_t i = 0; i < ball.size(); ++i) {
        if (in_gamma_n(ball.elements[i], j)) continue;
        gap.complement_empty = false;
        gap.truncated_gap = 1.0 / std::hypot(to_double(ball.lengths[i]), t);
        break; // lengths ascend, the first excluded element attains the sup
    }
    return gap;
}

} // namespace solspec
