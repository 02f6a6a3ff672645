#pragma once

#include "solspec/errors.hpp"
#include "solspec/padic.hpp"
#include "solspec/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace solspec {

enum class LengthKind {
    base,            // |r| + |r|_p on Z[1/p], carried as (r, 0)
    sum,             // coordinatewise base length summed over Gamma
    restricted_base, // base length restricted to (1/p^n) Z
    restricted_sum,  // sum length restricted to Gamma_n
    z2_pullback      // sum length pulled back to Z^2 via z -> z / p^n
};

struct LengthSpec {
    LengthKind kind = LengthKind::sum;
    unsigned prime = 2;
    unsigned level = 0; // meaningful for restricted_* and z2_pullback

    static LengthSpec base(unsigned p) { return {LengthKind::base, p, 0}; }
    static LengthSpec sum(unsigned p) { return {LengthKind::sum, p, 0}; }
    static LengthSpec restricted_base(unsigned p, unsigned n) {
        return {LengthKind::restricted_base, p, n};
    }
    static LengthSpec restricted_sum(unsigned p, unsigned n) {
        return {LengthKind::restricted_sum, p, n};
    }
    static LengthSpec z2_pullback(unsigned p, unsigned n) {
        return {LengthKind::z2_pullback, p, n};
    }

    bool uses_level() const { return kind != LengthKind::base && kind != LengthKind::sum; }
    bool is_base_kind() const {
        return kind == LengthKind::base || kind == LengthKind::restricted_base;
    }

    bool operator==(const LengthSpec&) const = default;

    std::string to_string() const {
        switch (kind) {
        case LengthKind::base: return "base";
        case LengthKind::sum: return "sum";
        case LengthKind::restricted_base: return "rbase:" + std::to_string(level);
        case LengthKind::restricted_sum: return "restricted:" + std::to_string(level);
        case LengthKind::z2_pullback: return "z2:" + std::to_string(level);
        }
        return "sum";
    }

    // "base" | "sum" | "restricted:n" | "rbase:n" | "z2:n"; the bare forms
    // "restricted" / "rbase" / "z2" take the level from fallback_level.
    static LengthSpec parse(const std::string& text, unsigned p, unsigned fallback_level = 0) {
        auto colon = text.find(':');
        std::string head = text.substr(0, colon);
        unsigned level = fallback_level;
        if (colon != std::string::npos) {
            Rat v = parse_rat(text.substr(colon + 1));
            if (denominator(v) != 1 || v < 0)
                throw std::invalid_argument("bad level in length spec: " + text);
            level = v.convert_to<unsigned>();
        }
        if (head == "base") return base(p);
        if (head == "sum") return sum(p);
        if (head == "rbase") return restricted_base(p, level);
        if (head == "restricted") return restricted_sum(p, level);
        if (head == "z2") return z2_pullback(p, level);
        throw std::invalid_argument("unknown length spec: " + text);
    }
};

inline Rat base_length(const PAdicRational& x) {
    Rat v = x.value();
    if (v < 0) v = -v;
    return v + padic_norm(x);
}

// Exact length of g under the spec; throws when g lies outside the
// spec's domain (nonzero second coordinate for base kinds, exponent
// above the level for restricted kinds, noninteger coordinates for z2).
inline Rat length(const LengthSpec& spec, const GroupElement& g) {
    if (g.prime() != spec.prime) throw std::invalid_argument("prime mismatch in length");
    switch (spec.kind) {
    case LengthKind::base:
        if (!g.second().is_zero())
            throw std::invalid_argument("base length expects (r, 0)");
        return base_length(g.first());
    case LengthKind::restricted_base:
        if (!g.second().is_zero() || g.first().exponent() > spec.level)
            throw std::invalid_argument("element outside restricted base domain");
        return base_length(g.first());
    case LengthKind::sum:
        return base_length(g.first()) + base_length(g.second());
    case LengthKind::restricted_sum:
        if (g.first().exponent() > spec.level || g.second().exponent() > spec.level)
            throw std::invalid_argument("element outside Gamma_n");
        return base_length(g.first()) + base_length(g.second());
    case LengthKind::z2_pullback: {
        if (g.first().exponent() != 0 || g.second().exponent() != 0)
            throw std::invalid_argument("z2 pullback expects integer coordinates");
        PAdicRational u1(spec.prime, g.first().numerator(), spec.level);
        PAdicRational u2(spec.prime, g.second().numerator(), spec.level);
        return base_length(u1) + base_length(u2);
    }
    }
    throw std::logic_error("unreachable");
}

struct Ball {
    LengthSpec spec;
    Rat radius;
    std::vector<GroupElement> elements; // sorted by (length, element order)
    std::vector<Rat> lengths;           // parallel to elements, nondecreasing

    std::size_t size() const { return elements.size(); }

    // Number of elements with length <= r (valid for r <= radius).
    std::size_t count_within(const Rat& r) const {
        return std::upper_bound(lengths.begin(), lengths.end(), r) - lengths.begin();
    }
};

namespace detail {

struct ScalarEntry {
    PAdicRational x;
    Rat len;
};

// Exact count of the scalar ball, used to honor the cap before materializing.
inline std::size_t scalar_ball_count(unsigned p, const Rat& R, std::optional<unsigned> level) {
    if (R < 0) return 0;
    std::size_t n = 1; // zero
    Int m0 = floor_rat(R);
    for (Int m = 1; m <= m0; ++m) {
        Rat len = Rat(m) + Rat(1, pow_int(p, valuation(m, p)));
        if (len <= R) n += 2;
    }
    for (unsigned j = 1; !level || j <= *level; ++j) {
        Int pj = pow_int(p, j);
        if (Rat(pj) >= R) break;
        Int bound = floor_rat(Rat(pj) * (R - Rat(pj)));
        if (bound >= 1) {
            Int coprime = bound - bound / p;
            n += std::size_t(2 * coprime.convert_to<std::uint64_t>());
        }
    }
    return n;
}

inline std::vector<ScalarEntry> enumerate_scalar_ball(unsigned p, const Rat& R,
                                                      std::optional<unsigned> level,
                                                      std::size_t cap) {
    std::vector<ScalarEntry> out;
    if (R < 0) return out;
    std::size_t total = scalar_ball_count(p, R, level);
    if (total > cap) throw cap_error(total, cap);
    out.reserve(total);
    out.push_back({PAdicRational::zero(p), Rat(0)});
    Int m0 = floor_rat(R);
    for (Int m = 1; m <= m0; ++m) {
        Rat len = Rat(m) + Rat(1, pow_int(p, valuation(m, p)));
        if (len <= R) {
            out.push_back({PAdicRational(p, m, 0), len});
            out.push_back({PAdicRational(p, -m, 0), len});
        }
    }
    for (unsigned j = 1; !level || j <= *level; ++j) {
        Int pj = pow_int(p, j);
        if (Rat(pj) >= R) break;
        Int bound = floor_rat(Rat(pj) * (R - Rat(pj)));
        for (Int m = 1; m <= bound; ++m) {
            if (m % p == 0) continue;
            Rat len = Rat(m, pj) + Rat(pj);
            out.push_back({PAdicRational(p, m, j), len});
            out.push_back({PAdicRational(p, -m, j), len});
        }
    }
    std::sort(out.begin(), out.end(), [](const ScalarEntry& a, const ScalarEntry& b) {
        if (a.len != b.len) return a.len < b.len;
        return compare_scalar(a.x, b.x) < 0;
    });
    return out;
}

inline std::optional<unsigned> level_of(const LengthSpec& spec) {
    if (spec.kind == LengthKind::base || spec.kind == LengthKind::sum) return std::nullopt;
    return spec.level;
}

} // namespace detail

// Exactly { g : length(spec, g) <= R }, sorted by (length, element order).
inline Ball enumerate_ball(const LengthSpec& spec, const Rat& R,
                           std::size_t cap = default_ball_cap) {
    unsigned p = spec.prime;
    Ball ball{spec, R, {}, {}};
    if (R < 0) return ball;

    if (spec.is_base_kind()) {
        auto scalars = detail::enumerate_scalar_ball(p, R, detail::level_of(spec), cap);
        ball.elements.reserve(scalars.size());
        ball.lengths.reserve(scalars.size());
        for (auto& e : scalars) {
            ball.elements.emplace_back(e.x, PAdicRational::zero(p));
            ball.lengths.push_back(e.len);
        }
        return ball; // scalar order ties agree with element order (second coord fixed)
    }

    auto scalars = detail::enumerate_scalar_ball(p, R, detail::level_of(spec), cap);
    std::vector<Rat> lens;
    lens.reserve(scalars.size());
    for (auto& e : scalars) lens.push_back(e.len);

    std::size_t total = 0;
    std::vector<std::size_t> widths(scalars.size());
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        Rat budget = R - scalars[i].len;
        widths[i] = std::upper_bound(lens.begin(), lens.end(), budget) - lens.begin();
        total += widths[i];
    }
    if (total > cap) throw cap_error(total, cap);

    ball.elements.reserve(total);
    ball.lengths.reserve(total);
    bool z2 = spec.kind == LengthKind::z2_pullback;
    Int pn = pow_int(p, spec.level);
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        for (std::size_t j = 0; j < widths[i]; ++j) {
            if (z2) {
                // store the Z^2 coordinates z = p^n * (x1, x2)
                Int z1 = scalars[i].x.numerator() *
                         pow_int(p, spec.level - scalars[i].x.exponent());
                Int z2c = scalars[j].x.numerator() *
                          pow_int(p, spec.level - scalars[j].x.exponent());
                ball.elements.emplace_back(PAdicRational(p, z1, 0), PAdicRational(p, z2c, 0));
            } else {
                ball.elements.emplace_back(scalars[i].x, scalars[j].x);
            }
            ball.lengths.push_back(scalars[i].len + scalars[j].len);
        }
    }

    std::vector<std::size_t> idx(ball.elements.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (ball.lengths[a] != ball.lengths[b]) return ball.lengths[a] < ball.lengths[b];
        return compare_element(ball.elements[a], ball.elements[b]) < 0;
    });
    std::vector<GroupElement> els;
    std::vector<Rat> ls;
    els.reserve(idx.size());
    ls.reserve(idx.size());
    for (std::size_t i : idx) {
        els.push_back(ball.elements[i]);
        ls.push_back(ball.lengths[i]);
    }
    ball.elements = std::move(els);
    ball.lengths = std::move(ls);
    return ball;
}

// Two-sided inclusion check for the base ball at radius p^d:
//   { m/p^{d-1} : |m| <= p^{2(d-1)} }  subset of  B(p^d)  subset of
//   { m/p^{d-1} : |m| <= p^{2d} },
// together with the cardinality bounds 2 p^{2(d-1)} + 1 <= |B(p^d)| <= 2 p^{2d} + 1.
struct SandwichReport {
    unsigned p = 2;
    unsigned d = 1;
    std::size_t ball_count = 0;
    Int inner_count;
    Int outer_count;
    bool inner_ok = false;
    bool outer_ok = false;
    bool card_ok = false;
    bool pass = false;
    std::vector<std::string> violations;
};

inline SandwichReport ball_sandwich_check(unsigned p, unsigned d,
                                          std::size_t cap = default_ball_cap) {
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    SandwichReport rep;
    rep.p = p;
    rep.d = d;
    rep.inner_count = 2 * pow_int(p, 2 * (d - 1)) + 1;
    rep.outer_count = 2 * pow_int(p, 2 * d) + 1;

    Rat R = Rat(pow_int(p, d));
    Ball ball = enumerate_ball(LengthSpec::base(p), R, cap);
    rep.ball_count = ball.size();

    std::set<std::pair<Int, unsigned>> members;
    for (const auto& g : ball.elements)
        members.insert({g.first().numerator(), g.first().exponent()});

    rep.inner_ok = true;
    Int inner_bound = pow_int(p, 2 * (d - 1));
    for (Int m = -inner_bound; m <= inner_bound; ++m) {
        PAdicRational x(p, m, d - 1);
        bool in_set = members.count({x.numerator(), x.exponent()}) > 0;
        bool len_ok = base_length(x) <= R;
        if (!in_set || !len_ok) {
            rep.inner_ok = false;
            if (rep.violations.size() < 8)
                rep.violations.push_back("inner: " + to_string(x));
        }
    }

    rep.outer_ok = true;
    Int outer_bound = pow_int(p, 2 * d);
    for (const auto& g : ball.elements) {
        const PAdicRational& x = g.first();
        bool ok = x.exponent() <= d - 1;
        if (ok) {
            Int m = x.numerator() * pow_int(p, d - 1 - x.exponent());
            ok = m <= outer_bound && -m <= outer_bound;
        }
        if (!ok) {
            rep.outer_ok = false;
            if (rep.violations.size() < 8)
                rep.violations.push_back("outer: " + to_string(x));
        }
    }

    rep.card_ok = Int(rep.ball_count) >= rep.inner_count && Int(rep.ball_count) <= rep.outer_count;
    rep.pass = rep.inner_ok && rep.outer_ok && rep.card_ok;
    return rep;
}

inline Int uniform_doubling_bound(const LengthSpec& spec) {
    Int c = 4 * pow_int(spec.prime, 8);
    if (spec.is_base_kind()) return c;
    return c * c * c * c;
}

struct DoublingRow {
    Rat R;
    std::size_t count_R = 0;
    std::size_t count_2R = 0;
    std::size_t count_pR = 0;
    double ratio2 = 0.0;
    double ratiop = 0.0;
    bool pass = false;
};

struct DoublingReport {
    LengthSpec spec;
    Int uniform_bound;
    std::vector<DoublingRow> rows;
    bool all_pass = true;
};

// Exact cardinalities |B(R)|, |B(2R)|, |B(pR)| against the uniform constants:
// base kinds check doubling and p-dilation against 4 p^8, sum kinds check
// doubling against (4 p^8)^4.
inline DoublingReport doubling_report(const LengthSpec& spec, const std::vector<Rat>& radii,
                                      std::size_t cap = default_ball_cap) {
    if (radii.empty()) throw std::invalid_argument("no radii given");
    DoublingReport rep{spec, uniform_doubling_bound(spec), {}, true};
    Rat rmax(0);
    for (const Rat& r : radii) {
        if (r < 1) throw std::invalid_argument("doubling radii must be >= 1");
        rmax = std::max(rmax, r);
    }
    unsigned factor = std::max(2u, spec.prime);
    Ball ball = enumerate_ball(spec, rmax * factor, cap);
    for (const Rat& r : radii) {
        DoublingRow row;
        row.R = r;
        row.count_R = ball.count_within(r);
        row.count_2R = ball.count_within(r * 2);
        row.count_pR = ball.count_within(r * int(spec.prime));
        row.ratio2 = double(row.count_2R) / double(row.count_R);
        row.ratiop = double(row.count_pR) / double(row.count_R);
        row.pass = Int(row.count_2R) <= rep.uniform_bound * Int(row.count_R);
        if (spec.is_base_kind())
            row.pass = row.pass && Int(row.count_pR) <= rep.uniform_bound * Int(row.count_R);
        rep.all_pass = rep.all_pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

struct GrowthReport {
    LengthSpec spec;
    double slope = 0.0;
    double max_residual = 0.0;
    std::vector<std::pair<double, double>> points; // (log R, log |B(R)|)
};

// Least-squares slope of log |B(R)| against log R over R = p, p^2, ..., <= Rmax.
inline GrowthReport growth_exponent(const LengthSpec& spec, const Rat& Rmax,
                                    std::size_t cap = default_ball_cap) {
    unsigned p = spec.prime;
    if (Rmax < Int(p) * Int(p))
        throw std::invalid_argument("growth fit needs Rmax >= p^2");
    std::vector<Rat> radii;
    for (unsigned d = 1;; ++d) {
        Rat r(pow_int(p, d));
        if (r > Rmax) break;
        radii.push_back(r);
    }
    Ball ball = enumerate_ball(spec, radii.back(), cap);
    GrowthReport rep{spec, 0.0, 0.0, {}};
    for (const Rat& r : radii) {
        std::size_t n = ball.count_within(r);
        rep.points.emplace_back(std::log(to_double(r)), std::log(double(n)));
    }
    double sx = 0, sy = 0;
    for (auto& [x, y] : rep.points) {
        sx += x;
        sy += y;
    }
    double n = double(rep.points.size());
    double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (auto& [x, y] : rep.points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    rep.slope = sxy / sxx;
    double intercept = my - rep.slope * mx;
    for (auto& [x, y] : rep.points)
        rep.max_residual = std::max(rep.max_residual, std::abs(y - (intercept + rep.slope * x)));
    return rep;
}

} // namespace solspec
