#pragma once

#include "solspec/algebra.hpp"
#include "solspec/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace solspec {

struct TailRow {
    unsigned N = 0;
    double tail = 0.0;  // ||(1 - chi_N)(g - delta_e)||_1
    double bound = 0.0; // [sqrt(N)]^2 ||(1 - chi_sqrt(N)) f|| + 4 ||f|| / 2^sqrt(N)
};

struct InversionReport {
    double norm_f = 0.0;
    unsigned terms = 0;
    bool converged = false;
    double residual = 0.0;       // ||(delta_e - f) * g - delta_e||_1
    double residual_right = 0.0; // ||g * (delta_e - f) - delta_e||_1
    double pruned_budget = 0.0;
    std::vector<double> residual_history;
    std::map<int, double> weighted_norms; // s -> ||g||_{1,s,L}
    std::map<int, double> mu_estimates;   // q -> mu_q(g)
    std::vector<TailRow> tail_rows;
};

struct NeumannResult {
    FiniteSupportElement inverse;
    InversionReport report;
};

inline double left_residual(const FiniteSupportElement& f, const FiniteSupportElement& g) {
    FiniteSupportElement r = g;
    add_scaled(r, twisted_convolve(f, g), Complex(-1.0, 0.0));
    r.add_term(GroupElement::identity(f.prime()), Complex(-1.0, 0.0));
    return r.l1_norm();
}

inline double right_residual(const FiniteSupportElement& f, const FiniteSupportElement& g) {
    FiniteSupportElement r = g;
    add_scaled(r, twisted_convolve(g, f), Complex(-1.0, 0.0));
    r.add_term(GroupElement::identity(f.prime()), Complex(-1.0, 0.0));
    return r.l1_norm();
}

// Partial sums of the Neumann series (delta_e - f)^{-1} = sum f^n for
// ||f||_1 < 1/2. Coefficients below prune_threshold are dropped with the
// discarded mass tracked in the report.
inline NeumannResult neumann_inverse(const FiniteSupportElement& f, const LengthSpec& spec,
                                     double tol = 1e-10, unsigned n_max = 64,
                                     double prune_threshold = 1e-16,
                                     const std::vector<int>& s_schedule = {0, 1, 2, 3},
                                     const std::vector<int>& q_schedule = {1, 2, 3}) {
    double nf = f.l1_norm();
    if (!(nf < 0.5))
        throw std::invalid_argument("Neumann inversion requires ||f||_1 < 1/2, got " +
                                    std::to_string(nf));
    if (n_max == 0) throw std::invalid_argument("n_max must be >= 1");
    InversionReport rep;
    rep.norm_f = nf;

    FiniteSupportElement g = FiniteSupportElement::identity(f.theta_ptr());
    FiniteSupportElement power = g;
    for (unsigned n = 1; n <= n_max; ++n) {
        power = twisted_convolve(power, f);
        PruneResult pruned = prune_small(power, prune_threshold);
        power = pruned.element;
        rep.pruned_budget += pruned.removed_mass;
        add_scaled(g, power);
        rep.terms = n;
        double res = left_residual(f, g);
        rep.residual_history.push_back(res);
        if (res <= tol) {
            rep.converged = true;
            break;
        }
    }
    rep.residual = rep.residual_history.back();
    rep.residual_right = right_residual(f, g);

    for (int s : s_schedule) rep.weighted_norms[s] = weighted_norm(g, double(s), spec);
    for (int q : q_schedule) rep.mu_estimates[q] = mu_q(g, double(q), spec);

    FiniteSupportElement series = g;
    series.add_term(GroupElement::identity(f.prime()), Complex(-1.0, 0.0));
    for (unsigned root = 1; root * root <= 64; ++root) {
        unsigned N = root * root;
        TailRow row;
        row.N = N;
        row.tail = 0.0;
        for (const auto& [gamma, c] : series)
            if (length(spec, gamma) > Int(N)) row.tail += std::abs(c);
        row.bound = double(root) * double(root) * tail_outside_sqrt(f, spec, N) +
                    4.0 * nf / std::exp2(std::sqrt(double(N)));
        rep.tail_rows.push_back(row);
    }

    return NeumannResult{std::move(g), std::move(rep)};
}

struct H1InfRow {
    unsigned N = 0;
    double tail = 0.0;
    std::map<int, double> nq_tail; // q -> N^q * tail
};

struct H1InfTable {
    std::vector<H1InfRow> rows;
    std::map<int, double> mu_estimates; // running maxima over the table
};

// Smoothness evidence table: decay of ||(1 - chi_N) g|| against N^{-q}.
inline H1InfTable h1inf_evidence(const FiniteSupportElement& g, const LengthSpec& spec,
                                 const std::vector<int>& q_schedule,
                                 const std::vector<unsigned>& n_range) {
    H1InfTable table;
    for (int q : q_schedule) table.mu_estimates[q] = 0.0;
    std::vector<std::pair<Rat, double>> terms;
    terms.reserve(g.support_size());
    for (const auto& [gamma, c] : g) terms.emplace_back(length(spec, gamma), std::abs(c));
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> suffix(terms.size() + 1, 0.0);
    for (std::size_t i = terms.size(); i-- > 0;) suffix[i] = suffix[i + 1] + terms[i].second;
    for (unsigned N : n_range) {
        H1InfRow row;
        row.N = N;
        std::size_t idx =
            std::upper_bound(terms.begin(), terms.end(), Rat(N),
                             [](const Rat& r, const auto& term) { return r < term.first; }) -
            terms.begin();
        row.tail = suffix[idx];
        for (int q : q_schedule) {
            double v = std::pow(double(N), double(q)) * row.tail;
            row.nq_tail[q] = v;
            table.mu_estimates[q] = std::max(table.mu_estimates[q], v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

struct GeneralInverseResult {
    FiniteSupportElement inverse;
    double u_norm = 0.0; // ||delta_e - h * h'||_1
    double residual_left = 0.0;
    double residual_right = 0.0;
    InversionReport neumann;
};

// Two-step inversion h^{-1} = h' * (h * h')^{-1}, valid once the approximate
// inverse h' brings ||delta_e - h * h'||_1 under 1/2.
inline GeneralInverseResult general_inverse(const FiniteSupportElement& h,
                                            const FiniteSupportElement& h_prime,
                                            const LengthSpec& spec, double tol = 1e-10,
                                            unsigned n_max = 64,
                                            double prune_threshold = 1e-16) {
    require_same_context(h, h_prime);
    FiniteSupportElement u = FiniteSupportElement::identity(h.theta_ptr());
    add_scaled(u, twisted_convolve(h, h_prime), Complex(-1.0, 0.0));
    double un = u.l1_norm();
    if (!(un < 0.5))
        throw std::invalid_argument(
            "approximate inverse is not good enough: ||delta_e - h*h'||_1 = " +
            std::to_string(un));
    NeumannResult nr = neumann_inverse(u, spec, tol, n_max, prune_threshold);
    FiniteSupportElement inv = twisted_convolve(h_prime, nr.inverse);
    GeneralInverseResult out{std::move(inv), un, 0.0, 0.0, std::move(nr.report)};
    out.residual_left = 0.0;
    {
        FiniteSupportElement r = twisted_convolve(h, out.inverse);
        r.add_term(GroupElement::identity(h.prime()), Complex(-1.0, 0.0));
        out.residual_left = r.l1_norm();
    }
    {
        FiniteSupportElement r = twisted_convolve(out.inverse, h);
        r.add_term(GroupElement::identity(h.prime()), Complex(-1.0, 0.0));
        out.residual_right = r.l1_norm();
    }
    return out;
}

enum class SpectralVerdict { certified_invertible, gap_closing, indeterminate };

inline std::string to_string(SpectralVerdict v) {
    switch (v) {
    case SpectralVerdict::certified_invertible: return "certified-invertible";
    case SpectralVerdict::gap_closing: return "gap-closing";
    case SpectralVerdict::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

struct SpectralConsistencyRow {
    double c = 0.0;
    bool l1_certified = false;
    double l1_gap = 0.0; // |c| - ||f||_1 when certified
    std::vector<double> sigma_min; // per radius
    SpectralVerdict verdict = SpectralVerdict::indeterminate;
    bool agree = false;
};

struct SpectralConsistencyReport {
    std::vector<Rat> radii;
    std::vector<std::size_t> dims;
    double norm_f = 0.0;
    std::vector<SpectralConsistencyRow> rows;
};

// Compares the l1 Neumann invertibility criterion for c - f against the
// minimum singular value of the truncated c - lambda(f) across ball radii.
// Numeric evidence only: a closing gap is consistent with spectrum at c but
// proves nothing, hence the three-valued verdict.
inline SpectralConsistencyReport spectral_consistency(const FiniteSupportElement& f,
                                                      const LengthSpec& spec,
                                                      const std::vector<Rat>& radii,
                                                      double tol = 1e-9,
                                                      std::vector<double> c_values = {},
                                                      std::size_t cap = default_ball_cap) {
    if (radii.empty()) throw std::invalid_argument("no radii given");
    {
        FiniteSupportElement diff = f;
        add_scaled(diff, adjoint(f), Complex(-1.0, 0.0));
        if (diff.l1_norm() > tol)
            throw std::invalid_argument("spectral consistency expects self-adjoint f");
    }
    SpectralConsistencyReport rep;
    rep.radii = radii;
    rep.norm_f = f.l1_norm();
    if (c_values.empty())
        c_values = {-rep.norm_f - 1.0, -rep.norm_f / 2.0, 0.0, rep.norm_f / 2.0,
                    rep.norm_f + 1.0};

    std::vector<Eigen::MatrixXcd> mats;
    for (const Rat& r : radii) {
        BasisPtr basis = make_basis(spec, r, cap);
        TruncatedOperator m = regular_rep_matrix(f, basis);
        std::size_t n = m.dim();
        rep.dims.push_back(n);
        Eigen::MatrixXcd a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) = m.at(i, j);
        mats.push_back(std::move(a));
    }

    for (double c : c_values) {
        SpectralConsistencyRow row;
        row.c = c;
        row.l1_certified = rep.norm_f < std::abs(c);
        row.l1_gap = row.l1_certified ? std::abs(c) - rep.norm_f : 0.0;
        for (const Eigen::MatrixXcd& m : mats) {
            Eigen::MatrixXcd a =
                Eigen::MatrixXcd::Identity(m.rows(), m.cols()) * c - m;
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
            row.sigma_min.push_back(svd.singularValues()(svd.singularValues().size() - 1));
        }
        if (row.l1_certified) {
            row.verdict = SpectralVerdict::certified_invertible;
            row.agree = row.sigma_min.back() >= row.l1_gap - tol;
        } else if (row.sigma_min.size() >= 2 &&
                   row.sigma_min.back() <= row.sigma_min.front() / 1.5 + 1e-12) {
            row.verdict = SpectralVerdict::gap_closing;
            row.agree = true;
        } else {
            row.verdict = SpectralVerdict::indeterminate;
            row.agree = false;
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

} // namespace solspec
