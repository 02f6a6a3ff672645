#include "solspec/theta.hpp"

#include "solspec/padic.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace solspec;

namespace {

bool is_integer(const Rat& r) { return boost::multiprecision::denominator(r) == 1; }

} // namespace

TEST_CASE("digit stream with period (0,1) alternates 2/3, 1/3") {
    ThetaSequence theta(2, Rat(2, 3), {}, {0, 1});
    CHECK(theta.at(0) == Rat(2, 3));
    CHECK(theta.at(1) == Rat(1, 3));
    CHECK(theta.at(2) == Rat(2, 3));
    CHECK(theta.at(3) == Rat(1, 3));
    CHECK(theta.at(7) == Rat(1, 3));
}

TEST_CASE("successive entries satisfy p*theta_n - theta_{n-1} in Z") {
    ThetaSequence a(2, Rat(2, 3), {}, {0, 1});
    ThetaSequence b(3, Rat(1, 5), {1}, {0, 2, 1});
    ThetaSequence c(2, Rat(1, 2), {}, {});
    for (const ThetaSequence* t : {&a, &b, &c}) {
        for (unsigned n = 1; n <= 12; ++n) {
            Rat diff = Rat(t->prime()) * t->at(n) - t->at(n - 1);
            CHECK(is_integer(diff));
            CHECK(t->at(n) >= 0);
            CHECK(t->at(n) < 1);
        }
    }
}

TEST_CASE("empty period pads with zero digits") {
    ThetaSequence t(2, Rat(1, 2), {}, {});
    CHECK(t.at(1) == Rat(1, 4));
    CHECK(t.at(2) == Rat(1, 8));
    CHECK(t.at(10) == Rat(1, 2048));
}

TEST_CASE("constructor validates its inputs") {
    CHECK_THROWS_AS(ThetaSequence(2, Rat(1), {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(ThetaSequence(2, Rat(-1, 3), {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(ThetaSequence(2, Rat(1, 3), {2}, {}), std::invalid_argument);
    CHECK_THROWS_AS(ThetaSequence(2, Rat(1, 3), {}, {0, 3}), std::invalid_argument);
    CHECK_THROWS_AS(ThetaSequence(1, Rat(0), {}, {}), std::invalid_argument);
}

TEST_CASE("sequence equality compares defining data") {
    ThetaSequence a(2, Rat(2, 3), {}, {0, 1});
    ThetaSequence b(2, Rat(2, 3), {}, {0, 1});
    ThetaSequence c(2, Rat(2, 3), {}, {1, 0});
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("phase angles reduce mod 1 and land on the unit circle") {
    PhaseAngle a(Rat(7, 3));
    CHECK(a.turns() == Rat(1, 3));
    PhaseAngle b(Rat(-1, 4));
    CHECK(b.turns() == Rat(3, 4));
    CHECK((a + b).turns() == Rat(1, 12));

    for (const Rat& t : {Rat(0), Rat(1, 3), Rat(5, 8), Rat(99, 7)}) {
        std::complex<double> z = PhaseAngle(t).value();
        CHECK(std::abs(std::abs(z) - 1.0) < 1e-15);
    }
    CHECK(PhaseAngle(Rat(0)).value() == std::complex<double>(1.0, 0.0));
    CHECK(std::abs(PhaseAngle(Rat(1, 2)).value() - std::complex<double>(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("pairing angle is read off the canonical coordinates") {
    auto theta = make_theta(2, Rat(2, 3), {}, {0, 1});
    // first coordinate 3/2, second coordinate 5/4: angle = theta_3 * 3 * 5
    GroupElement g1(PAdicRational(2, 3, 1), PAdicRational::zero(2));
    GroupElement g2(PAdicRational::zero(2), PAdicRational(2, 5, 2));
    Rat turns = multiplier(*theta, g1, g2).turns();
    CHECK(turns == mod1(theta->at(3) * 15));

    // either slot vanishing kills the pairing
    CHECK(multiplier(*theta, GroupElement::identity(2), g2).turns() == 0);
    CHECK(multiplier(*theta, g1, GroupElement::identity(2)).turns() == 0);
    CHECK(multiplier(*theta, g1, g1).turns() == 0); // g1 has zero second coordinate
}

TEST_CASE("pairing angle ignores the presentation of each coordinate") {
    auto theta = make_theta(2, Rat(2, 3), {}, {0, 1});
    Rat canonical = multiplier_turns_raw(*theta, 3, 1, 5, 2);
    for (unsigned m1 = 0; m1 <= 3; ++m1)
        for (unsigned m2 = 0; m2 <= 3; ++m2) {
            Int q1 = Int(3) * pow_int(2, m1);
            Int q4 = Int(5) * pow_int(2, m2);
            CHECK(multiplier_turns_raw(*theta, q1, 1 + m1, q4, 2 + m2) == canonical);
        }
}

TEST_CASE("pairing rejects mismatched data") {
    auto theta = make_theta(2, Rat(2, 3), {}, {0, 1});
    GroupElement g3(PAdicRational(3, 1, 0), PAdicRational::zero(3));
    CHECK_THROWS_AS(multiplier(*theta, g3, g3), std::invalid_argument);
}
