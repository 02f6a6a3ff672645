#include "solspec/operators.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <random>
#include <vector>

using namespace solspec;
using Catch::Approx;

namespace {

ThetaPtr standard_theta() { return make_theta(2, Rat(2, 3), {}, {0, 1}); }

GroupElement ge(unsigned p, Int q1, unsigned k1, Int q2, unsigned k2) {
    return GroupElement(PAdicRational(p, q1, k1), PAdicRational(p, q2, k2));
}

Eigen::MatrixXcd to_eigen(const TruncatedOperator& m) {
    Eigen::MatrixXcd out(m.dim(), m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) out(long(i), long(j)) = m.at(i, j);
    return out;
}

double svd_norm(const TruncatedOperator& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m));
    return svd.singularValues()(0);
}

TruncatedOperator random_matrix(const BasisPtr& basis, std::mt19937& rng) {
    TruncatedOperator m(basis);
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) {
            double re = double(rng() % 2001) / 1000.0 - 1.0;
            double im = double(rng() % 2001) / 1000.0 - 1.0;
            m.set(i, j, Complex(re, im));
        }
    return m;
}

} // namespace

TEST_CASE("basis lookup over a ball") {
    LengthSpec spec = LengthSpec::sum(2);
    BasisPtr basis = make_basis(spec, Rat(4));
    REQUIRE(basis->size() == 25);
    REQUIRE(basis->identity_index().has_value());
    CHECK(*basis->identity_index() == 0);
    for (std::size_t i = 0; i < basis->size(); ++i) {
        CHECK(basis->find(basis->element(i)) == i);
        CHECK(basis->length_at(i) == length(spec, basis->element(i)));
    }
    CHECK_FALSE(basis->find(ge(2, 100, 0, 0, 0)).has_value());
}

TEST_CASE("length operator is the diagonal of lengths") {
    LengthSpec spec = LengthSpec::sum(2);
    BasisPtr basis = make_basis(spec, Rat(4));
    TruncatedOperator d = dirac_matrix(spec, basis);
    CHECK(d.is_diagonal());
    CHECK(d.is_weighted_partial_permutation());
    for (std::size_t i = 0; i < d.dim(); ++i)
        CHECK(d.at(i, i) == Complex(to_double(basis->length_at(i)), 0.0));
    CHECK(operator_norm(d) == to_double(basis->ball().lengths.back()));

    BasisPtr other = make_basis(LengthSpec::restricted_sum(2, 1), Rat(4));
    CHECK_THROWS_AS(dirac_matrix(spec, other), std::invalid_argument);
}

TEST_CASE("representation columns are convolutions against basis deltas") {
    auto theta = standard_theta();
    LengthSpec spec = LengthSpec::sum(2);
    BasisPtr basis = make_basis(spec, Rat(4));
    FiniteSupportElement f(theta);
    f.add_term(ge(2, 1, 0, 0, 0), Complex(0.5, -0.25));
    f.add_term(ge(2, 1, 1, 1, 1), Complex(-0.3, 0.1));
    f.add_term(ge(2, 0, 0, 1, 0), Complex(0.0, 0.8));
    TruncatedOperator m = regular_rep_matrix(f, basis);
    for (std::size_t j = 0; j < basis->size(); ++j) {
        auto column = twisted_convolve(
            f, FiniteSupportElement::delta(theta, basis->element(j)));
        for (std::size_t i = 0; i < basis->size(); ++i) {
            Complex want = column.coeff(basis->element(i));
            CHECK(std::abs(m.at(i, j) - want) < 1e-15);
        }
    }

    TruncatedOperator ma = regular_rep_matrix(adjoint(f), basis);
    for (std::size_t i = 0; i < basis->size(); ++i)
        for (std::size_t j = 0; j < basis->size(); ++j)
            CHECK(std::abs(ma.at(i, j) - std::conj(m.at(j, i))) < 1e-14);

    BasisPtr scalar = make_basis(LengthSpec::base(2), Rat(4));
    CHECK_THROWS_AS(regular_rep_matrix(f, scalar), std::invalid_argument);
}

TEST_CASE("operator norms against a singular-value oracle") {
    LengthSpec spec = LengthSpec::sum(2);
    BasisPtr basis = make_basis(spec, Rat(3)); // 13 elements
    std::mt19937 rng(97);
    for (int trial = 0; trial < 5; ++trial) {
        TruncatedOperator m = random_matrix(basis, rng);
        double got = operator_norm(m, 1e-12);
        double want = svd_norm(m);
        CHECK(got <= want + 1e-9);
        CHECK(got >= want - 1e-6);
    }

    TruncatedOperator zero(basis);
    CHECK(operator_norm(zero) == 0.0);
}

TEST_CASE("representation norm is dominated by the summed coefficients") {
    auto theta = standard_theta();
    LengthSpec spec = LengthSpec::sum(2);
    BasisPtr basis = make_basis(spec, Rat(6));
    std::mt19937 rng(131);
    Ball pool = enumerate_ball(spec, Rat(3));
    for (int trial = 0; trial < 5; ++trial) {
        FiniteSupportElement f(theta);
        for (int t = 0; t < 4; ++t)
            f.add_term(pool.elements[rng() % pool.size()],
                       Complex(double(rng() % 2001) / 1000.0 - 1.0,
                               double(rng() % 2001) / 1000.0 - 1.0));
        if (f.empty()) continue;
        TruncatedOperator m = regular_rep_matrix(f, basis);
        double norm = operator_norm(m, 1e-10);
        CHECK(norm <= f.l1_norm() + 1e-8);
        CHECK(norm <= svd_norm(m) + 1e-9);
        CHECK(norm >= svd_norm(m) - 1e-4);
    }

    auto d = FiniteSupportElement::delta(theta, ge(2, 1, 0, 1, 0));
    TruncatedOperator dm = regular_rep_matrix(d, basis);
    CHECK(dm.is_weighted_partial_permutation());
    CHECK(operator_norm(dm) == Approx(1.0).margin(1e-15));
}

TEST_CASE("commutator scaling against brute-force products") {
    auto theta = standard_theta();
    LengthSpec spec = LengthSpec::sum(2);
    BasisPtr basis = make_basis(spec, Rat(4));
    TruncatedOperator dirac = dirac_matrix(spec, basis);

    FiniteSupportElement f(theta);
    f.add_term(ge(2, 1, 0, 0, 0), Complex(0.6, 0.1));
    f.add_term(ge(2, 1, 1, -1, 0), Complex(-0.2, 0.4));

    TruncatedOperator m = regular_rep_matrix(f, basis);
    TruncatedOperator c = commutator_matrix(f, spec, basis);
    Eigen::MatrixXcd brute =
        to_eigen(dirac) * to_eigen(m) - to_eigen(m) * to_eigen(dirac);
    for (std::size_t i = 0; i < c.dim(); ++i)
        for (std::size_t j = 0; j < c.dim(); ++j)
            CHECK(std::abs(c.at(i, j) - brute(long(i), long(j))) < 1e-12);

    TruncatedOperator c2 = higher_commutator_matrix(f, 2, spec, basis);
    Eigen::MatrixXcd brute2 = to_eigen(dirac) * Eigen::MatrixXcd(brute) -
                              Eigen::MatrixXcd(brute) * to_eigen(dirac);
    for (std::size_t i = 0; i < c2.dim(); ++i)
        for (std::size_t j = 0; j < c2.dim(); ++j)
            CHECK(std::abs(c2.at(i, j) - brute2(long(i), long(j))) < 1e-12);

    TruncatedOperator c0 = higher_commutator_matrix(f, 0, spec, basis);
    for (std::size_t i = 0; i < c0.dim(); ++i)
        for (std::size_t j = 0; j < c0.dim(); ++j)
            CHECK(c0.at(i, j) == m.at(i, j));
}

TEST_CASE("commutator with a point mass recovers its length exactly") {
    auto theta = standard_theta();
    LengthSpec spec = LengthSpec::sum(2);
    BasisPtr basis = make_basis(spec, Rat(8));
    for (const auto& g : {ge(2, 1, 0, 0, 0), ge(2, 1, 1, 1, 1), ge(2, 3, 2, 0, 0),
                          ge(2, 1, 0, 1, 0)}) {
        auto d = FiniteSupportElement::delta(theta, g);
        TruncatedOperator c = commutator_matrix(d, spec, basis);
        CHECK(c.is_weighted_partial_permutation());
        CHECK(commutator_norm(d, spec, basis) ==
              Approx(to_double(length(spec, g))).epsilon(1e-13));
    }
}

TEST_CASE("commutator norms respect the weighted-coefficient bounds") {
    auto theta = standard_theta();
    LengthSpec spec = LengthSpec::sum(2);
    BasisPtr basis = make_basis(spec, Rat(8));
    Ball pool = enumerate_ball(spec, Rat(4));
    std::mt19937 rng(163);
    for (int trial = 0; trial < 4; ++trial) {
        FiniteSupportElement f(theta);
        for (int t = 0; t < 4; ++t)
            f.add_term(pool.elements[rng() % pool.size()],
                       Complex(double(rng() % 2001) / 1000.0 - 1.0,
                               double(rng() % 2001) / 1000.0 - 1.0));
        double lip = 0.0;
        for (const auto& [g, c] : f) lip += to_double(length(spec, g)) * std::abs(c);
        CHECK(commutator_norm(f, spec, basis, 1e-8) <= lip + 1e-8);
        for (unsigned k : {1u, 2u, 3u})
            CHECK(higher_commutator_norm(f, k, spec, basis, 1e-8) <=
                  weighted_norm(f, double(k), spec) + 1e-6);
    }
}

TEST_CASE("trace partial sums over dyadic balls") {
    LengthSpec spec = LengthSpec::sum(2);
    SpectralReport rep = summability_trace(spec, 5.0, 2);
    REQUIRE(rep.ball_counts == std::vector<std::size_t>{1, 5, 25});
    REQUIRE(rep.annulus_counts == std::vector<std::size_t>{1, 4, 20});
    double s1 = 1.0 + 4.0 * std::pow(5.0, -2.5);
    double s2 = s1 + 8.0 * std::pow(7.25, -2.5) + 4.0 * std::pow(13.25, -2.5) +
                8.0 * std::pow(17.0, -2.5);
    REQUIRE(rep.partial_traces.size() == 3);
    CHECK(rep.partial_traces[0] == Approx(1.0).margin(1e-15));
    CHECK(rep.partial_traces[1] == Approx(s1).epsilon(1e-12));
    CHECK(rep.partial_traces[2] == Approx(s2).epsilon(1e-12));

    CHECK(rep.doubling_constant == pow_int(1024, 4));
    CHECK(std::isinf(rep.geometric_tail_bound)); // 2^5 is below the uniform constant
    CHECK(rep.empirical_doubling == 5.0);
    CHECK(std::isfinite(rep.empirical_tail_bound));
    CHECK(rep.partial_traces.back() <= rep.empirical_tail_bound);

    SpectralReport flat = summability_trace(spec, 41.0, 2);
    CHECK(std::isfinite(flat.geometric_tail_bound));
    CHECK(flat.partial_traces.back() <= flat.geometric_tail_bound);
    for (std::size_t i = 1; i < flat.partial_traces.size(); ++i)
        CHECK(flat.partial_traces[i] >= flat.partial_traces[i - 1]);

    CHECK_THROWS_AS(summability_trace(spec, 0.0, 1), std::invalid_argument);
}

TEST_CASE("geometric tail bound formula") {
    CHECK(std::isinf(geometric_trace_bound(32.0, 1.0, 5.0)));
    double c = 8.0, b1 = 3.0, t = 4.0; // ratio 1/2
    CHECK(geometric_trace_bound(c, b1, t) == Approx(7.0 * 3.0 * (1.0 + 2.0)).epsilon(1e-15));
}

TEST_CASE("resolvent of the diagonal length operator") {
    LengthSpec spec = LengthSpec::sum(2);
    BasisPtr basis = make_basis(spec, Rat(4));
    TruncatedOperator d = dirac_matrix(spec, basis);
    TruncatedOperator r = resolvent_matrix(d, Complex(0.0, 1.0));
    CHECK(r.is_diagonal());
    for (std::size_t i = 0; i < r.dim(); ++i) {
        double len = to_double(basis->length_at(i));
        CHECK(std::abs(r.at(i, i)) == Approx(1.0 / std::hypot(len, 1.0)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(resolvent_matrix(d, Complex(1.0, 0.0)), std::invalid_argument);
    TruncatedOperator nd(basis);
    nd.set(0, 1, Complex(1.0, 0.0));
    CHECK_THROWS_AS(resolvent_matrix(nd, Complex(0.0, 1.0)), std::invalid_argument);
}

TEST_CASE("state evaluation matches a direct expansion") {
    auto theta = standard_theta();
    LengthSpec spec = LengthSpec::sum(2);
    BasisPtr basis = make_basis(spec, Rat(8));

    FiniteSupportElement f(theta);
    f.add_term(ge(2, 1, 0, 0, 0), Complex(0.5, -0.25));
    f.add_term(ge(2, 1, 1, 1, 1), Complex(-0.3, 0.1));
    f.add_term(ge(2, 0, 0, 0, 0), Complex(0.2, 0.0));

    CHECK(evaluate_state(State::canonical_trace(), f, basis) == Complex(0.2, 0.0));

    double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    FiniteSupportElement xi(theta);
    xi.add_term(ge(2, 0, 0, 0, 0), Complex(inv_sqrt2, 0.0));
    xi.add_term(ge(2, 1, 0, 0, 0), Complex(0.0, inv_sqrt2));

    Complex direct(0.0, 0.0);
    for (const auto& [x, cx] : xi)
        for (const auto& [g, cg] : f)
            direct += std::conj(xi.coeff(g + x)) * cg * multiplier(*theta, g, x).value() * cx;
    Complex got = evaluate_state(State::vector_state(xi), f, basis);
    CHECK(std::abs(got - direct) < 1e-13);

    FiniteSupportElement bad(theta);
    bad.add_term(ge(2, 0, 0, 0, 0), Complex(0.5, 0.0));
    CHECK_THROWS_AS(evaluate_state(State::vector_state(bad), f, basis),
                    std::invalid_argument);
    BasisPtr tiny = make_basis(spec, Rat(2));
    CHECK_THROWS_AS(evaluate_state(State::vector_state(xi), f, tiny),
                    std::invalid_argument);
}

TEST_CASE("metric lower bound from state separation") {
    auto theta = standard_theta();
    LengthSpec spec = LengthSpec::sum(2);
    BasisPtr basis = make_basis(spec, Rat(8));

    FiniteSupportElement a(theta);
    a.add_term(ge(2, 1, 0, 0, 0), Complex(1.0, 0.0));
    a.add_term(ge(2, -1, 0, 0, 0), Complex(1.0, 0.0));

    double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    FiniteSupportElement xi(theta);
    xi.add_term(ge(2, 0, 0, 0, 0), Complex(inv_sqrt2, 0.0));
    xi.add_term(ge(2, 1, 0, 0, 0), Complex(inv_sqrt2, 0.0));

    State phi = State::canonical_trace();
    State psi = State::vector_state(xi);
    MKReport rep = mk_lower_bound(phi, psi, {a}, spec, basis);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].lipschitz_bound == Approx(4.0).epsilon(1e-15));
    CHECK(rep.rows[0].phi_value == Approx(0.0).margin(1e-15));
    Complex psv = evaluate_state(psi, a, basis);
    CHECK(rep.rows[0].psi_value == Approx(psv.real()).margin(1e-14));
    CHECK(rep.lower_bound ==
          Approx(std::abs(Complex(rep.rows[0].phi_value, 0.0) - psv) / 4.0).margin(1e-14));
    CHECK(rep.lower_bound > 0.0);

    auto skew = FiniteSupportElement::delta(theta, ge(2, 1, 0, 0, 0), Complex(0.0, 1.0));
    CHECK_THROWS_AS(mk_lower_bound(phi, psi, {skew}, spec, basis), std::invalid_argument);

    auto scalar = FiniteSupportElement::delta(theta, ge(2, 0, 0, 0, 0), Complex(0.7, 0.0));
    MKReport flat = mk_lower_bound(phi, psi, {scalar}, spec, basis);
    CHECK(flat.lower_bound == 0.0);
    CHECK(flat.rows[0].contribution == 0.0);
}
