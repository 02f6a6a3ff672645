#include "solspec/padic.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

using namespace solspec;

TEST_CASE("canonical form strips p factors from the denominator side") {
    PAdicRational a(2, 12, 2); // 12/4
    CHECK(a.numerator() == 3);
    CHECK(a.exponent() == 0);

    PAdicRational b(2, 4, 1); // 4/2
    CHECK(b.numerator() == 2);
    CHECK(b.exponent() == 0);

    PAdicRational z(2, 0, 5);
    CHECK(z.is_zero());
    CHECK(z.exponent() == 0);

    CHECK_THROWS_AS(PAdicRational(1, 1, 0), std::invalid_argument);
}

TEST_CASE("from_rational accepts exactly the p-power denominators") {
    PAdicRational a = PAdicRational::from_rational(2, Rat(3, 4));
    CHECK(a.numerator() == 3);
    CHECK(a.exponent() == 2);
    CHECK(a.value() == Rat(3, 4));

    CHECK(PAdicRational::from_rational(2, Rat(6, 2)) == PAdicRational(2, 3, 0));
    CHECK(PAdicRational::from_rational(3, Rat(-5, 27)).exponent() == 3);
    CHECK_THROWS_AS(PAdicRational::from_rational(2, Rat(5, 3)), std::invalid_argument);
    CHECK_THROWS_AS(PAdicRational::from_rational(3, Rat(1, 6)), std::invalid_argument);
}

TEST_CASE("p-adic norm values") {
    CHECK(padic_norm(PAdicRational::from_rational(2, Rat(3, 4))) == Rat(4));
    CHECK(padic_norm(PAdicRational(2, 12, 0)) == Rat(1, 4));
    CHECK(padic_norm(PAdicRational(2, 5, 0)) == Rat(1));
    CHECK(padic_norm(PAdicRational::zero(2)) == Rat(0));
    CHECK(padic_norm(PAdicRational(3, 6, 0)) == Rat(1, 3));
    CHECK(padic_norm(PAdicRational::from_rational(3, Rat(2, 9))) == Rat(9));
}

TEST_CASE("p-adic norm is an ultrametric absolute value") {
    for (unsigned p : {2u, 3u}) {
        std::vector<PAdicRational> grid;
        for (int n = -6; n <= 6; ++n)
            for (unsigned k = 0; k <= 2; ++k) grid.emplace_back(p, n, k);
        for (const auto& a : grid)
            for (const auto& b : grid) {
                Rat na = padic_norm(a);
                Rat nb = padic_norm(b);
                Rat ns = padic_norm(a + b);
                CHECK(ns <= std::max(na, nb));
                // equality whenever the two norms differ
                if (na != nb) CHECK(ns == std::max(na, nb));
            }
    }
}

TEST_CASE("addition forms an abelian group") {
    unsigned p = 2;
    std::vector<PAdicRational> grid;
    for (int n = -3; n <= 3; ++n)
        for (unsigned k = 0; k <= 2; ++k) grid.emplace_back(p, n, k);
    PAdicRational zero = PAdicRational::zero(p);
    for (const auto& a : grid) {
        CHECK(a + zero == a);
        CHECK(a + (-a) == zero);
        for (const auto& b : grid) {
            CHECK(a + b == b + a);
            CHECK((a + b).value() == a.value() + b.value());
        }
    }
    CHECK_THROWS_AS(PAdicRational(2, 1, 0) + PAdicRational(3, 1, 0), std::invalid_argument);
}

TEST_CASE("diagonal embedding data") {
    LambdaEmbed e = lambda_embed(PAdicRational::from_rational(2, Rat(3, 4)));
    CHECK(e.archimedean == 0.75);
    CHECK(e.padic_numerator == -3);
    CHECK(e.padic_exponent == 2);

    LambdaEmbed i = lambda_embed(PAdicRational(3, 2, 0));
    CHECK(i.archimedean == 2.0);
    CHECK(i.padic_numerator == -2);
    CHECK(i.padic_exponent == 0);
}

TEST_CASE("scalar order: magnitude first, positive before negative") {
    unsigned p = 2;
    std::vector<std::string> want = {"0", "1", "-1", "3/2^1", "-3/2^1", "2", "-2"};
    std::vector<PAdicRational> xs = {
        PAdicRational(p, 0, 0),  PAdicRational(p, 1, 0),  PAdicRational(p, -1, 0),
        PAdicRational(p, 3, 1),  PAdicRational(p, -3, 1), PAdicRational(p, 2, 0),
        PAdicRational(p, -2, 0)};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(to_string(xs[i]) == want[i]);
        CHECK(compare_scalar(xs[i], xs[i]) == 0);
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            CHECK(compare_scalar(xs[i], xs[j]) < 0);
            CHECK(compare_scalar(xs[j], xs[i]) > 0);
        }
    }
}

TEST_CASE("group elements combine coordinatewise") {
    unsigned p = 2;
    GroupElement a(PAdicRational(p, 1, 1), PAdicRational(p, -1, 0));
    GroupElement b(PAdicRational(p, 1, 1), PAdicRational(p, 1, 0));
    GroupElement s = a + b;
    CHECK(s.first() == PAdicRational(p, 1, 0));
    CHECK(s.second().is_zero());
    CHECK(a - a == GroupElement::identity(p));
    CHECK(GroupElement::identity(p).is_identity());
    CHECK_THROWS_AS(GroupElement(PAdicRational(2, 1, 0), PAdicRational(3, 1, 0)),
                    std::invalid_argument);
}

TEST_CASE("string round trips") {
    unsigned p = 2;
    CHECK(to_string(PAdicRational(p, -3, 2)) == "-3/2^2");
    CHECK(parse_padic("-3/2^2", p) == PAdicRational(p, -3, 2));
    CHECK(parse_padic("7", p) == PAdicRational(p, 7, 0));
    CHECK(parse_padic("3/4", p) == PAdicRational(p, 3, 2));
    CHECK_THROWS_AS(parse_padic("3/5", 2), std::invalid_argument);
    CHECK_THROWS_AS(parse_padic("3/3^1", 2), std::invalid_argument);
    CHECK_THROWS_AS(parse_padic("x", 2), std::invalid_argument);

    GroupElement g(PAdicRational(p, 3, 2), PAdicRational(p, -1, 0));
    CHECK(to_string(g) == "(3/2^2, -1)");
    CHECK(parse_group_element(to_string(g), p) == g);
    CHECK_THROWS_AS(parse_group_element("3/2^2", p), std::invalid_argument);
}
