#pragma once

#include "solspec/algebra.hpp"
#include "solspec/length.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace solspec {

// Ball elements with index lookup; the truncation basis for all matrices.
class BallBasis {
public:
    explicit BallBasis(Ball ball) : ball_(std::move(ball)) {
        for (std::size_t i = 0; i < ball_.elements.size(); ++i)
            index_.emplace(ball_.elements[i], i);
        auto it = index_.find(GroupElement::identity(ball_.spec.prime));
        if (it != index_.end()) identity_ = it->second;
    }

    const Ball& ball() const { return ball_; }
    const LengthSpec& spec() const { return ball_.spec; }
    std::size_t size() const { return ball_.elements.size(); }
    const GroupElement& element(std::size_t i) const { return ball_.elements[i]; }
    const Rat& length_at(std::size_t i) const { return ball_.lengths[i]; }

    std::optional<std::size_t> find(const GroupElement& g) const {
        auto it = index_.find(g);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::size_t> identity_index() const { return identity_; }

private:
    Ball ball_;
    std::map<GroupElement, std::size_t, GroupElementLess> index_;
    std::optional<std::size_t> identity_;
};

using BasisPtr = std::shared_ptr<const BallBasis>;

inline BasisPtr make_basis(const LengthSpec& spec, const Rat& R,
                           std::size_t cap = default_ball_cap) {
    return std::make_shared<const BallBasis>(enumerate_ball(spec, R, cap));
}

// Dense row-major complex matrix over a ball basis.
class TruncatedOperator {
public:
    explicit TruncatedOperator(BasisPtr basis)
        : basis_(std::move(basis)), n_(basis_->size()), a_(n_ * n_, Complex(0.0, 0.0)) {}

    std::size_t dim() const { return n_; }
    const BallBasis& basis() const { return *basis_; }
    BasisPtr basis_ptr() const { return basis_; }

    Complex at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, Complex v) { a_[i * n_ + j] = v; }
    void add(std::size_t i, std::size_t j, Complex v) { a_[i * n_ + j] += v; }

    const std::vector<Complex>& data() const { return a_; }

    void apply(const std::vector<Complex>& x, std::vector<Complex>& y) const {
        y.assign(n_, Complex(0.0, 0.0));
        for (std::size_t i = 0; i < n_; ++i) {
            Complex s(0.0, 0.0);
            const Complex* row = a_.data() + i * n_;
            for (std::size_t j = 0; j < n_; ++j) s += row[j] * x[j];
            y[i] = s;
        }
    }

    void apply_adjoint(const std::vector<Complex>& x, std::vector<Complex>& y) const {
        y.assign(n_, Complex(0.0, 0.0));
        for (std::size_t i = 0; i < n_; ++i) {
            const Complex* row = a_.data() + i * n_;
            Complex xi = x[i];
            for (std::size_t j = 0; j < n_; ++j) y[j] += std::conj(row[j]) * xi;
        }
    }

    bool is_diagonal() const {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (i != j && a_[i * n_ + j] != Complex(0.0, 0.0)) return false;
        return true;
    }

    // At most one nonzero entry in every row and every column.
    bool is_weighted_partial_permutation() const {
        std::vector<bool> col_used(n_, false);
        for (std::size_t i = 0; i < n_; ++i) {
            bool row_used = false;
            for (std::size_t j = 0; j < n_; ++j) {
                if (a_[i * n_ + j] == Complex(0.0, 0.0)) continue;
                if (row_used || col_used[j]) return false;
                row_used = true;
                col_used[j] = true;
            }
        }
        return true;
    }

    double max_abs_entry() const {
        double m = 0.0;
        for (const Complex& v : a_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    BasisPtr basis_;
    std::size_t n_;
    std::vector<Complex> a_;
};

// Diagonal multiplication by the length function.
inline TruncatedOperator dirac_matrix(const LengthSpec& spec, const BasisPtr& basis) {
    if (!(basis->spec() == spec))
        throw std::invalid_argument("basis was enumerated for a different length spec");
    TruncatedOperator d(basis);
    for (std::size_t i = 0; i < d.dim(); ++i)
        d.set(i, i, Complex(to_double(basis->length_at(i)), 0.0));
    return d;
}

// Entry (gamma, eta) = f(gamma - eta) sigma(gamma - eta, eta); the compression
// of the left sigma-regular representation to the ball.
inline TruncatedOperator regular_rep_matrix(const FiniteSupportElement& f, const BasisPtr& basis) {
    const LengthSpec& spec = basis->spec();
    if (spec.kind != LengthKind::sum && spec.kind != LengthKind::restricted_sum)
        throw std::invalid_argument("representation matrices need a sum-type basis");
    if (f.prime() != spec.prime)
        throw std::invalid_argument("prime mismatch between element and basis");
    TruncatedOperator m(basis);
    const ThetaSequence& theta = f.theta();
    for (std::size_t j = 0; j < basis->size(); ++j) {
        const GroupElement& eta = basis->element(j);
        for (const auto& [g1, c] : f) {
            auto i = basis->find(g1 + eta);
            if (!i) continue;
            m.add(*i, j, c * multiplier(theta, g1, eta).value());
        }
    }
    return m;
}

// Largest singular value. Exact for diagonal and weighted-partial-permutation
// matrices; otherwise deterministic power iteration on M* M (fixed seed).
inline double operator_norm(const TruncatedOperator& m, double tol = 1e-10,
                            std::size_t max_iter = 100000) {
    std::size_t n = m.dim();
    if (n == 0) return 0.0;
    if (m.is_diagonal() || m.is_weighted_partial_permutation()) return m.max_abs_entry();
    if (m.max_abs_entry() == 0.0) return 0.0;

    std::mt19937_64 rng(0x5eedcafe1234abcdULL);
    auto unit_double = [&rng]() {
        return double(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; // in [-1, 1)
    };
    std::vector<Complex> v(n), w(n), y(n);
    auto norm2 = [](const std::vector<Complex>& x) {
        double s = 0.0;
        for (const Complex& c : x) s += std::norm(c);
        return std::sqrt(s);
    };

    for (int attempt = 0; attempt < 4; ++attempt) {
        for (auto& c : v) c = Complex(unit_double(), unit_double());
        double nv = norm2(v);
        for (auto& c : v) c /= nv;
        double prev = -1.0;
        for (std::size_t it = 0; it < max_iter; ++it) {
            m.apply(v, w);
            double sigma = norm2(w); // sqrt(<v, M*M v>) for unit v
            if (sigma == 0.0) break; // v in the kernel; retry with a fresh vector
            if (prev >= 0.0 && std::abs(sigma - prev) <= tol * std::max(sigma, 1e-300))
                return sigma;
            prev = sigma;
            m.apply_adjoint(w, y);
            double ny = norm2(y);
            if (ny == 0.0) break;
            for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / ny;
        }
        if (prev >= 0.0 && norm2(w) != 0.0)
            throw std::runtime_error("power iteration did not converge");
    }
    throw std::runtime_error("power iteration did not converge");
}

// [D_L, lambda(f)]: entries (L(gamma) - L(eta)) f(gamma - eta) sigma(gamma - eta, eta).
inline TruncatedOperator commutator_matrix(const FiniteSupportElement& f, const LengthSpec& spec,
                                           const BasisPtr& basis) {
    if (!(basis->spec() == spec))
        throw std::invalid_argument("basis was enumerated for a different length spec");
    TruncatedOperator m = regular_rep_matrix(f, basis);
    std::size_t n = m.dim();
    std::vector<double> len(n);
    for (std::size_t i = 0; i < n; ++i) len[i] = to_double(basis->length_at(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Complex v = m.at(i, j);
            if (v != Complex(0.0, 0.0)) m.set(i, j, (len[i] - len[j]) * v);
        }
    return m;
}

inline double commutator_norm(const FiniteSupportElement& f, const LengthSpec& spec,
                              const BasisPtr& basis, double tol = 1e-10) {
    return operator_norm(commutator_matrix(f, spec, basis), tol);
}

// k-fold commutator [D, [D, ... [D, lambda(f)]]]: entries scale by (L_i - L_j)^k.
inline TruncatedOperator higher_commutator_matrix(const FiniteSupportElement& f, unsigned k,
                                                  const LengthSpec& spec, const BasisPtr& basis) {
    if (k == 0) return regular_rep_matrix(f, basis);
    TruncatedOperator m = regular_rep_matrix(f, basis);
    std::size_t n = m.dim();
    std::vector<double> len(n);
    for (std::size_t i = 0; i < n; ++i) len[i] = to_double(basis->length_at(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Complex v = m.at(i, j);
            if (v != Complex(0.0, 0.0)) m.set(i, j, std::pow(len[i] - len[j], double(k)) * v);
        }
    return m;
}

inline double higher_commutator_norm(const FiniteSupportElement& f, unsigned k,
                                     const LengthSpec& spec, const BasisPtr& basis,
                                     double tol = 1e-10) {
    return operator_norm(higher_commutator_matrix(f, k, spec, basis), tol);
}

namespace detail {

// Compensated (Kahan) accumulation.
struct KahanSum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

} // namespace detail

struct SpectralReport {
    LengthSpec spec;
    double t = 0.0;
    unsigned n_max = 0;
    std::vector<std::size_t> ball_counts;    // |B(2^n)|, n = 0..n_max
    std::vector<std::size_t> annulus_counts; // |B(1)|, then differences
    std::vector<double> partial_traces;      // S_n over B(2^n)
    Int doubling_constant;                      // doubling constant used in the bound
    double geometric_tail_bound = 0.0;           // +inf when 2^t <= C
    double empirical_doubling = 0.0;
    double empirical_tail_bound = 0.0;
};

inline double geometric_trace_bound(double C, double b1, double t) {
    double r = C / std::exp2(t);
    if (r >= 1.0) return std::numeric_limits<double>::infinity();
    return std::max(1.0, C - 1.0) * b1 * (1.0 + 1.0 / (1.0 - r));
}

// Partial traces S_n = sum over B(2^n) of (1 + L^2)^{-t/2}, summed with
// compensated accumulation in descending term order, plus the geometric
// tail bound evaluated with the uniform doubling constant and with the observed one.
inline SpectralReport summability_trace(const LengthSpec& spec, double t, unsigned n_max,
                                        std::size_t cap = default_ball_cap) {
    if (!(t > 0.0)) throw std::invalid_argument("trace exponent t must be positive");
    SpectralReport rep;
    rep.spec = spec;
    rep.t = t;
    rep.n_max = n_max;
    rep.doubling_constant = uniform_doubling_bound(spec);

    Rat rmax(pow_int(2, n_max));
    Ball ball = enumerate_ball(spec, rmax, cap);

    detail::KahanSum acc; // lengths ascend, so terms are added in descending order
    std::size_t idx = 0;
    for (unsigned n = 0; n <= n_max; ++n) {
        Rat rn(pow_int(2, n));
        std::size_t upto = ball.count_within(rn);
        for (; idx < upto; ++idx) {
            double l2 = to_double(Rat(1) + ball.lengths[idx] * ball.lengths[idx]);
            acc.add(std::pow(l2, -t / 2.0));
        }
        rep.ball_counts.push_back(upto);
        rep.annulus_counts.push_back(n == 0 ? upto : upto - rep.ball_counts[n - 1]);
        rep.partial_traces.push_back(acc.s);
    }

    double b1 = double(rep.ball_counts[0]);
    rep.geometric_tail_bound = geometric_trace_bound(rep.doubling_constant.convert_to<double>(), b1, t);
    rep.empirical_doubling = 1.0;
    for (unsigned n = 1; n <= n_max; ++n)
        rep.empirical_doubling = std::max(
            rep.empirical_doubling, double(rep.ball_counts[n]) / double(rep.ball_counts[n - 1]));
    rep.empirical_tail_bound = geometric_trace_bound(rep.empirical_doubling, b1, t);
    return rep;
}

// (D - lambda)^{-1} on the truncation; requires diagonal D and Im(lambda) != 0.
inline TruncatedOperator resolvent_matrix(const TruncatedOperator& dirac, Complex lambda) {
    if (lambda.imag() == 0.0)
        throw std::invalid_argument("resolvent requires a nonreal spectral parameter");
    if (!dirac.is_diagonal())
        throw std::invalid_argument("resolvent expects the diagonal length operator");
    TruncatedOperator r(dirac.basis_ptr());
    for (std::size_t i = 0; i < r.dim(); ++i)
        r.set(i, i, 1.0 / (dirac.at(i, i) - lambda));
    return r;
}

// States used by the metric lower bound: the canonical trace f -> f(e) and
// unit vector states xi -> <lambda(f) xi, xi>.
struct State {
    enum class Kind { canonical_trace, vector_state } kind;
    std::optional<FiniteSupportElement> xi;

    static State canonical_trace() { return {Kind::canonical_trace, std::nullopt}; }
    static State vector_state(FiniteSupportElement v) {
        return {Kind::vector_state, std::move(v)};
    }
};

inline Complex evaluate_state(const State& state, const FiniteSupportElement& a,
                              const BasisPtr& basis) {
    if (state.kind == State::Kind::canonical_trace)
        return a.coeff(GroupElement::identity(a.prime()));

    const FiniteSupportElement& xi = *state.xi;
    require_same_context(a, xi);
    double n2 = 0.0;
    for (const auto& [g, c] : xi) n2 += std::norm(c);
    if (std::abs(n2 - 1.0) > 1e-12)
        throw std::invalid_argument("vector state must be l2-normalized");
    for (const auto& [x, cx] : xi) {
        if (!basis->find(x))
            throw std::invalid_argument("basis too small: vector support escapes the ball");
        for (const auto& [g1, c1] : a)
            if (!basis->find(g1 + x))
                throw std::invalid_argument(
                    "basis too small: translated vector support escapes the ball");
    }
    TruncatedOperator m = regular_rep_matrix(a, basis);
    std::size_t n = m.dim();
    std::vector<Complex> v(n, Complex(0.0, 0.0)), w;
    for (const auto& [x, cx] : xi) v[*basis->find(x)] = cx;
    m.apply(v, w);
    Complex out(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) out += std::conj(v[i]) * w[i];
    return out;
}

struct MKCandidateRow {
    double lipschitz_bound = 0.0; // sum L(gamma) |a(gamma)|, >= ||[D, lambda(a)]||
    double phi_value = 0.0;
    double psi_value = 0.0;
    double contribution = 0.0;
};

struct MKReport {
    double lower_bound = 0.0;
    std::vector<MKCandidateRow> rows;
};

// Monge-Kantorovich distance lower bound: max over rescaled self-adjoint
// candidates a of |phi(a) - psi(a)| / (sum L |a|).
inline MKReport mk_lower_bound(const State& phi, const State& psi,
                               const std::vector<FiniteSupportElement>& candidates,
                               const LengthSpec& spec, const BasisPtr& basis,
                               double tol = 1e-9) {
    MKReport rep;
    for (const FiniteSupportElement& a : candidates) {
        FiniteSupportElement diff = a;
        add_scaled(diff, adjoint(a), Complex(-1.0, 0.0));
        if (diff.l1_norm() > tol)
            throw std::invalid_argument("metric candidates must be self-adjoint");
        MKCandidateRow row;
        for (const auto& [g, c] : a)
            row.lipschitz_bound += to_double(length(spec, g)) * std::abs(c);
        Complex pv = evaluate_state(phi, a, basis);
        Complex qv = evaluate_state(psi, a, basis);
        row.phi_value = pv.real();
        row.psi_value = qv.real();
        if (row.lipschitz_bound > 0.0) {
            row.contribution = std::abs(pv - qv) / row.lipschitz_bound;
            rep.lower_bound = std::max(rep.lower_bound, row.contribution);
        }
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace solspec
