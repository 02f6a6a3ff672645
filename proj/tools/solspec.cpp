#include "solspec/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace solspec;

int g_exit = 0;

std::string trim(const std::string& s) {
    const char* ws = " \t\r";
    auto b = s.find_first_not_of(ws);
    auto e = s.find_last_not_of(ws);
    if (b == std::string::npos) return std::string();
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<Rat> parse_rat_list(const std::string& text) {
    std::vector<Rat> out;
    for (const std::string& item : split_list(text)) out.push_back(parse_rat(item));
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const std::string& item : split_list(text)) {
        Rat v = parse_rat(item);
        if (denominator(v) != 1)
            throw std::invalid_argument("expected an integer list, got: " + text);
        out.push_back(v.convert_to<int>());
    }
    return out;
}

std::vector<unsigned> parse_digit_list(const std::string& text) {
    std::vector<unsigned> out;
    for (int v : parse_int_list(text)) {
        if (v < 0) throw std::invalid_argument("digits must be nonnegative: " + text);
        out.push_back(unsigned(v));
    }
    return out;
}

std::size_t cap_from_env() {
    const char* v = std::getenv("SOLSPEC_MAX_ELEMENTS");
    if (!v) return default_ball_cap;
    Rat r = parse_rat(v);
    if (denominator(r) != 1 || r < 1)
        throw std::invalid_argument("SOLSPEC_MAX_ELEMENTS must be a positive integer");
    return r.convert_to<std::size_t>();
}

void require_prime(unsigned p) {
    if (p < 2) throw std::invalid_argument("p must be a prime >= 2");
    for (unsigned d = 2; d * d <= p; ++d)
        if (p % d == 0)
            throw std::invalid_argument("p must be prime, got " + std::to_string(p));
}

void require_positive_cap(std::size_t cap) {
    if (cap == 0) throw std::invalid_argument("max-elements must be positive");
}

void emit_report(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    write_text_file(out_path, text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json report_shell(json config) {
    json j;
    j["schema_version"] = schema_version;
    j["config"] = std::move(config);
    return j;
}

std::string element_label(const LengthSpec& spec, const GroupElement& g) {
    return spec.is_base_kind() ? to_string(g.first()) : to_string(g);
}

// ---- ball ----------------------------------------------------------------

struct BallOpts {
    unsigned p = 2;
    std::string spec_text = "base";
    unsigned level = 0;
    std::string radius = "2";
    std::size_t cap = default_ball_cap;
    std::string out;
    std::string format = "json";
    std::string config_path;
};

void run_ball(const BallOpts& o) {
    require_prime(o.p);
    require_positive_cap(o.cap);
    LengthSpec spec = LengthSpec::parse(o.spec_text, o.p, o.level);
    Rat R = parse_rat(o.radius);
    Ball ball = enumerate_ball(spec, R, o.cap);
    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "element,length\n";
        for (std::size_t i = 0; i < ball.size(); ++i)
            csv << '"' << element_label(spec, ball.elements[i]) << "\","
                << rat_to_string(ball.lengths[i]) << '\n';
        emit_report(csv.str(), o.out);
        return;
    }
    json cfg;
    cfg["p"] = o.p;
    cfg["spec"] = spec.to_string();
    cfg["radius"] = rat_to_string(R);
    cfg["max_elements"] = o.cap;
    json j = report_shell(std::move(cfg));
    j["count"] = ball.size();
    json els = json::array();
    json lens = json::array();
    for (std::size_t i = 0; i < ball.size(); ++i) {
        els.push_back(element_label(spec, ball.elements[i]));
        lens.push_back(rat_to_string(ball.lengths[i]));
    }
    j["elements"] = std::move(els);
    j["lengths"] = std::move(lens);
    emit_report(dump(j), o.out);
}

// ---- doubling ------------------------------------------------------------

struct DoublingOpts {
    unsigned p = 2;
    std::string spec_text = "base";
    unsigned level = 0;
    std::string radii = "1,2,4,8";
    std::size_t cap = default_ball_cap;
    std::string out;
    std::string format = "csv";
    std::string config_path;
};

void run_doubling(const DoublingOpts& o) {
    require_prime(o.p);
    require_positive_cap(o.cap);
    LengthSpec spec = LengthSpec::parse(o.spec_text, o.p, o.level);
    DoublingReport rep = doubling_report(spec, parse_rat_list(o.radii), o.cap);
    if (o.format == "csv") {
        emit_report(doubling_to_csv(rep), o.out);
        return;
    }
    json cfg;
    cfg["p"] = o.p;
    cfg["spec"] = spec.to_string();
    cfg["radii"] = o.radii;
    cfg["max_elements"] = o.cap;
    json j = report_shell(std::move(cfg));
    j.update(doubling_to_json(rep));
    emit_report(dump(j), o.out);
}

// ---- algebra ---------------------------------------------------------------

struct AlgebraOpts {
    std::string op = "convolve";
    std::string lhs;
    std::string rhs;
    std::string spec_text = "sum";
    unsigned level = 0;
    std::string s_schedule = "0,1,2,3";
    std::string q_schedule = "1,2,3";
    std::string out;
    std::string config_path;
};

void run_algebra(const AlgebraOpts& o) {
    FiniteSupportElement f = element_from_json(load_json_file(o.lhs));
    LengthSpec spec = LengthSpec::parse(o.spec_text, f.prime(), o.level);
    json cfg;
    cfg["op"] = o.op;
    cfg["lhs"] = o.lhs;
    if (!o.rhs.empty()) cfg["rhs"] = o.rhs;
    cfg["spec"] = spec.to_string();
    json j = report_shell(std::move(cfg));

    if (o.op == "convolve") {
        if (o.rhs.empty())
            throw std::invalid_argument("algebra convolve needs --rhs");
        FiniteSupportElement g = element_from_json(load_json_file(o.rhs));
        FiniteSupportElement h = twisted_convolve(f, g);
        j["l1_norm"] = h.l1_norm();
        j["product"] = element_to_json(h);
    } else if (o.op == "adjoint") {
        FiniteSupportElement h = adjoint(f);
        j["l1_norm"] = h.l1_norm();
        j["adjoint"] = element_to_json(h);
    } else if (o.op == "norms") {
        j["l1_norm"] = f.l1_norm();
        json wn = json::object();
        for (int s : parse_int_list(o.s_schedule))
            wn[std::to_string(s)] = weighted_norm(f, double(s), spec);
        j["weighted_norms"] = std::move(wn);
        json mu = json::object();
        for (int q : parse_int_list(o.q_schedule))
            mu[std::to_string(q)] = mu_q(f, double(q), spec);
        j["mu_estimates"] = std::move(mu);
    } else {
        throw std::invalid_argument("unknown algebra op: " + o.op);
    }
    emit_report(dump(j), o.out);
}

// ---- spectrum --------------------------------------------------------------

struct SpectrumOpts {
    unsigned p = 2;
    std::string spec_text = "sum";
    unsigned level = 0;
    std::string radius = "8";
    std::size_t cap = default_ball_cap;
    std::string out;
    std::string format = "json";
    std::string config_path;
};

void run_spectrum(const SpectrumOpts& o) {
    require_prime(o.p);
    require_positive_cap(o.cap);
    LengthSpec spec = LengthSpec::parse(o.spec_text, o.p, o.level);
    Rat R = parse_rat(o.radius);
    Ball ball = enumerate_ball(spec, R, o.cap);
    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "eigenvalue\n";
        for (const Rat& l : ball.lengths) csv << json(to_double(l)).dump() << '\n';
        emit_report(csv.str(), o.out);
        return;
    }
    json cfg;
    cfg["p"] = o.p;
    cfg["spec"] = spec.to_string();
    cfg["radius"] = rat_to_string(R);
    cfg["max_elements"] = o.cap;
    json j = report_shell(std::move(cfg));
    j["dim"] = ball.size();
    json ev = json::array();
    json evx = json::array();
    for (const Rat& l : ball.lengths) {
        ev.push_back(to_double(l));
        evx.push_back(rat_to_string(l));
    }
    j["eigenvalues"] = std::move(ev);
    j["eigenvalues_exact"] = std::move(evx);
    emit_report(dump(j), o.out);
}

// ---- summability -----------------------------------------------------------

struct SummabilityOpts {
    unsigned p = 2;
    std::string spec_text = "sum";
    unsigned level = 0;
    double t = 41.0;
    unsigned n_max = 4;
    std::size_t cap = default_ball_cap;
    std::string out;
    std::string format = "json";
    std::string config_path;
};

void run_summability(const SummabilityOpts& o) {
    require_prime(o.p);
    require_positive_cap(o.cap);
    LengthSpec spec = LengthSpec::parse(o.spec_text, o.p, o.level);
    SpectralReport rep = summability_trace(spec, o.t, o.n_max, o.cap);
    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "n,ball_count,annulus_count,partial_trace\n";
        for (unsigned n = 0; n <= rep.n_max; ++n)
            csv << n << ',' << rep.ball_counts[n] << ',' << rep.annulus_counts[n] << ','
                << json(rep.partial_traces[n]).dump() << '\n';
        emit_report(csv.str(), o.out);
        return;
    }
    json cfg;
    cfg["p"] = o.p;
    cfg["spec"] = spec.to_string();
    cfg["t"] = o.t;
    cfg["n_max"] = o.n_max;
    cfg["max_elements"] = o.cap;
    json j = report_shell(std::move(cfg));
    j.update(spectral_to_json(rep));
    emit_report(dump(j), o.out);
}

// ---- commutator ------------------------------------------------------------

struct CommutatorOpts {
    std::string input;
    std::string spec_text = "sum";
    unsigned level = 0;
    std::string radius = "8";
    unsigned k = 1;
    double tol = 1e-10;
    std::size_t cap = default_ball_cap;
    std::string out;
    std::string config_path;
};

void run_commutator(const CommutatorOpts& o) {
    require_positive_cap(o.cap);
    FiniteSupportElement f = element_from_json(load_json_file(o.input));
    LengthSpec spec = LengthSpec::parse(o.spec_text, f.prime(), o.level);
    Rat R = parse_rat(o.radius);
    BasisPtr basis = make_basis(spec, R, o.cap);
    double rep_norm = operator_norm(regular_rep_matrix(f, basis), o.tol);
    double com_norm = higher_commutator_norm(f, o.k, spec, basis, o.tol);
    double bound = weighted_norm(f, double(o.k), spec);
    json cfg;
    cfg["input"] = o.input;
    cfg["spec"] = spec.to_string();
    cfg["radius"] = rat_to_string(R);
    cfg["k"] = o.k;
    cfg["tol"] = o.tol;
    cfg["max_elements"] = o.cap;
    json j = report_shell(std::move(cfg));
    j["dim"] = basis->size();
    j["l1_norm"] = f.l1_norm();
    j["rep_norm"] = rep_norm;
    j["rep_within_l1"] = rep_norm <= f.l1_norm() + o.tol;
    j["commutator_norm"] = com_norm;
    j["weighted_bound"] = bound;
    j["within_bound"] = com_norm <= bound + o.tol;
    emit_report(dump(j), o.out);
}

// ---- mk-bound --------------------------------------------------------------

struct MKOpts {
    std::string xi;
    std::string candidates;
    std::string spec_text = "sum";
    unsigned level = 0;
    std::string radius = "8";
    double tol = 1e-9;
    std::size_t cap = default_ball_cap;
    std::string out;
    std::string config_path;
};

void run_mk_bound(const MKOpts& o) {
    require_positive_cap(o.cap);
    FiniteSupportElement xi = element_from_json(load_json_file(o.xi));
    std::vector<FiniteSupportElement> candidates;
    std::vector<std::string> paths = split_list(o.candidates);
    if (paths.empty()) throw std::invalid_argument("mk-bound needs --candidates");
    for (const std::string& path : paths)
        candidates.push_back(element_from_json(load_json_file(path)));
    LengthSpec spec = LengthSpec::parse(o.spec_text, xi.prime(), o.level);
    BasisPtr basis = make_basis(spec, parse_rat(o.radius), o.cap);
    MKReport rep = mk_lower_bound(State::canonical_trace(), State::vector_state(std::move(xi)),
                                  candidates, spec, basis, o.tol);
    json cfg;
    cfg["xi"] = o.xi;
    cfg["candidates"] = paths;
    cfg["spec"] = spec.to_string();
    cfg["radius"] = o.radius;
    cfg["tol"] = o.tol;
    cfg["max_elements"] = o.cap;
    json j = report_shell(std::move(cfg));
    j["lower_bound"] = rep.lower_bound;
    json rows = json::array();
    for (const MKCandidateRow& row : rep.rows) {
        json jr;
        jr["lipschitz_bound"] = row.lipschitz_bound;
        jr["phi"] = row.phi_value;
        jr["psi"] = row.psi_value;
        jr["contribution"] = row.contribution;
        rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
    emit_report(dump(j), o.out);
}

// ---- inductive -------------------------------------------------------------

struct InductiveOpts {
    unsigned p = 2;
    std::string theta0 = "2/3";
    std::string preperiod;
    std::string digits = "0,1";
    unsigned j = 0;
    unsigned k = 1;
    double t = 1.0;
    std::string radius = "4";
    double tol = 0.0;
    std::size_t cap = default_ball_cap;
    std::string out;
    std::string config_path;
};

std::vector<Z2Element> default_level_samples(unsigned p, unsigned level) {
    std::vector<Z2Element> out;
    out.push_back(Z2Element::delta(p, level, {1, 0}));
    out.push_back(Z2Element::delta(p, level, {0, 1}));
    out.push_back(Z2Element::delta(p, level, {1, 1}));
    Z2Element mix(p, level);
    mix.add_term({1, 0}, Complex(0.5, 0.0));
    mix.add_term({-1, 1}, Complex(0.25, -0.25));
    out.push_back(std::move(mix));
    return out;
}

void run_inductive(const InductiveOpts& o) {
    require_prime(o.p);
    require_positive_cap(o.cap);
    ThetaPtr theta = make_theta(o.p, parse_rat(o.theta0), parse_digit_list(o.preperiod),
                                parse_digit_list(o.digits));
    Rat R = parse_rat(o.radius);
    MorphismCheckReport morphism =
        verify_morphism(theta, o.j, o.k, default_level_samples(o.p, o.j), R, o.tol, o.cap);
    ResolventGap gap = resolvent_gap(o.p, o.j, o.t, R, o.cap);
    json cfg;
    cfg["p"] = o.p;
    cfg["theta"] = theta_to_json(*theta);
    cfg["j"] = o.j;
    cfg["k"] = o.k;
    cfg["t"] = o.t;
    cfg["radius"] = rat_to_string(R);
    cfg["tol"] = o.tol;
    cfg["max_elements"] = o.cap;
    json j = report_shell(std::move(cfg));
    j["morphism"] = morphism_to_json(morphism);
    json jg;
    jg["truncated_gap"] = gap.truncated_gap;
    jg["analytic_tail"] = gap.analytic_tail;
    jg["complement_empty"] = gap.complement_empty;
    j["resolvent_gap"] = std::move(jg);
    emit_report(dump(j), o.out);
}

// ---- wiener ----------------------------------------------------------------

struct WienerOpts {
    std::string input;
    std::string spec_text = "sum";
    unsigned level = 0;
    double tol = 1e-10;
    unsigned n_max = 64;
    double prune = 1e-16;
    std::string s_schedule = "0,1,2,3";
    std::string q_schedule = "1,2,3";
    bool emit_inverse = false;
    std::string out;
    std::string config_path;
};

void run_wiener(const WienerOpts& o) {
    FiniteSupportElement f = element_from_json(load_json_file(o.input));
    LengthSpec spec = LengthSpec::parse(o.spec_text, f.prime(), o.level);
    NeumannResult nr = neumann_inverse(f, spec, o.tol, o.n_max, o.prune,
                                       parse_int_list(o.s_schedule), parse_int_list(o.q_schedule));
    json cfg;
    cfg["input"] = o.input;
    cfg["spec"] = spec.to_string();
    cfg["tol"] = o.tol;
    cfg["nmax"] = o.n_max;
    cfg["prune"] = o.prune;
    cfg["s_schedule"] = o.s_schedule;
    cfg["q_schedule"] = o.q_schedule;
    json j = report_shell(std::move(cfg));
    j.update(inversion_to_json(nr.report));
    j["inverse_support"] = nr.inverse.support_size();
    if (o.emit_inverse) j["inverse"] = element_to_json(nr.inverse);
    emit_report(dump(j), o.out);
}

// ---- selftest --------------------------------------------------------------

struct SelftestOpts {
    std::string out;
    std::string config_path;
};

void run_selftest(const SelftestOpts& o) {
    unsigned p = 2;
    ThetaPtr theta = make_theta(p, Rat(2, 3), {}, {0, 1});
    LengthSpec sum = LengthSpec::sum(p);
    int failures = 0;
    json checks = json::array();

    auto guarded = [&](const std::string& name, auto&& fn) {
        json c;
        c["name"] = name;
        try {
            json detail = json::object();
            bool ok = fn(detail);
            c["pass"] = ok;
            if (!detail.empty()) c["detail"] = std::move(detail);
            if (!ok) ++failures;
        } catch (const std::exception& e) {
            c["pass"] = false;
            c["error"] = e.what();
            ++failures;
        }
        checks.push_back(std::move(c));
    };

    guarded("padic-norm-values", [&](json& d) {
        Rat n34 = padic_norm(parse_padic("3/2^2", p));
        Rat n12 = padic_norm(PAdicRational(p, 12, 0));
        d["norm(3/4)"] = rat_to_string(n34);
        d["norm(12)"] = rat_to_string(n12);
        return n34 == Rat(4) && n12 == Rat(1, 4);
    });

    guarded("padic-ultrametric", [&](json&) {
        for (int n1 = -4; n1 <= 4; ++n1)
            for (unsigned k1 = 0; k1 <= 2; ++k1)
                for (int n2 = -4; n2 <= 4; ++n2)
                    for (unsigned k2 = 0; k2 <= 2; ++k2) {
                        PAdicRational a(p, n1, k1), b(p, n2, k2);
                        if (padic_norm(a + b) > std::max(padic_norm(a), padic_norm(b)))
                            return false;
                    }
        return true;
    });

    guarded("theta-digit-stream", [&](json& d) {
        json vals = json::array();
        for (std::size_t n = 0; n <= 3; ++n) vals.push_back(rat_to_string(theta->at(n)));
        d["theta"] = std::move(vals);
        return theta->at(0) == Rat(2, 3) && theta->at(1) == Rat(1, 3) &&
               theta->at(2) == Rat(2, 3) && theta->at(3) == Rat(1, 3);
    });

    guarded("length-values", [&](json& d) {
        Rat l1 = base_length(parse_padic("3/2^2", p));
        Rat l2 = length(sum, GroupElement(PAdicRational(p, 1, 0), PAdicRational(p, 1, 0)));
        d["len(3/4)"] = rat_to_string(l1);
        d["len(1,1)"] = rat_to_string(l2);
        return l1 == Rat(19, 4) && l2 == Rat(4);
    });

    guarded("ball-enumeration", [&](json& d) {
        Ball b2 = enumerate_ball(LengthSpec::base(p), Rat(2));
        json els = json::array();
        for (const auto& g : b2.elements) els.push_back(to_string(g.first()));
        d["base_R2"] = els;
        Ball b8 = enumerate_ball(LengthSpec::base(p), Rat(8));
        Ball s4 = enumerate_ball(sum, Rat(4));
        d["base_R8_count"] = b8.size();
        d["sum_R4_count"] = s4.size();
        return els == json::array({"0", "1", "-1"}) && b8.size() == 43 && s4.size() == 25;
    });

    guarded("ball-sandwich", [&](json& d) {
        SandwichReport rep = ball_sandwich_check(2, 2);
        d["count"] = rep.ball_count;
        return rep.pass;
    });

    guarded("doubling-bound", [&](json& d) {
        DoublingReport rep = doubling_report(LengthSpec::base(p), {Rat(1), Rat(2), Rat(4)});
        d["all_pass"] = rep.all_pass;
        return rep.all_pass;
    });

    guarded("cocycle-identity", [&](json&) {
        std::vector<GroupElement> els;
        els.emplace_back(PAdicRational(p, 1, 1), PAdicRational::zero(p));
        els.emplace_back(PAdicRational::zero(p), PAdicRational(p, 1, 1));
        els.emplace_back(PAdicRational(p, 1, 0), PAdicRational(p, 3, 2));
        els.emplace_back(PAdicRational(p, -1, 1), PAdicRational(p, 2, 0));
        for (const auto& a : els)
            for (const auto& b : els)
                for (const auto& c : els) {
                    Rat lhs = mod1(multiplier(*theta, a, b).turns() +
                                   multiplier(*theta, a + b, c).turns());
                    Rat rhs = mod1(multiplier(*theta, b, c).turns() +
                                   multiplier(*theta, a, b + c).turns());
                    if (lhs != rhs) return false;
                }
        return true;
    });

    guarded("weyl-relation", [&](json& d) {
        bool ok = true;
        for (unsigned n = 0; n <= 2; ++n) {
            GroupElement u(PAdicRational(p, 1, n), PAdicRational::zero(p));
            GroupElement v(PAdicRational::zero(p), PAdicRational(p, 1, n));
            auto uv = twisted_convolve(FiniteSupportElement::delta(theta, u),
                                       FiniteSupportElement::delta(theta, v));
            auto vu = twisted_convolve(FiniteSupportElement::delta(theta, v),
                                       FiniteSupportElement::delta(theta, u));
            Complex want = PhaseAngle(theta->at(2 * std::size_t(n))).value() * vu.coeff(u + v);
            double err = std::abs(uv.coeff(u + v) - want);
            d["err_level_" + std::to_string(n)] = err;
            ok = ok && err <= 1e-12;
        }
        return ok;
    });

    auto sample_element = [&]() {
        FiniteSupportElement f(theta);
        f.add_term(GroupElement::identity(p), Complex(0.5, 0.0));
        f.add_term(GroupElement(PAdicRational(p, 1, 1), PAdicRational(p, 1, 0)),
                   Complex(0.3, -0.2));
        f.add_term(GroupElement(PAdicRational(p, -1, 0), PAdicRational(p, 3, 2)),
                   Complex(-0.1, 0.7));
        return f;
    };

    guarded("adjoint-involution", [&](json& d) {
        FiniteSupportElement f = sample_element();
        FiniteSupportElement diff = adjoint(adjoint(f));
        add_scaled(diff, f, Complex(-1.0, 0.0));
        d["err"] = diff.l1_norm();
        return diff.l1_norm() <= 1e-14;
    });

    guarded("convolution-associativity", [&](json& d) {
        FiniteSupportElement f = sample_element();
        FiniteSupportElement g =
            FiniteSupportElement::delta(theta, GroupElement(PAdicRational(p, 1, 0),
                                                            PAdicRational(p, -1, 1)),
                                        Complex(0.4, 0.1));
        FiniteSupportElement h =
            FiniteSupportElement::delta(theta, GroupElement(PAdicRational(p, 0, 0),
                                                            PAdicRational(p, 1, 2)),
                                        Complex(-0.2, 0.6));
        FiniteSupportElement lhs = twisted_convolve(twisted_convolve(f, g), h);
        FiniteSupportElement diff = twisted_convolve(f, twisted_convolve(g, h));
        add_scaled(diff, lhs, Complex(-1.0, 0.0));
        d["err"] = diff.l1_norm();
        return diff.l1_norm() <= 1e-12;
    });

    guarded("commutator-delta-norm", [&](json& d) {
        BasisPtr basis = make_basis(sum, Rat(4));
        GroupElement g(PAdicRational(p, 1, 0), PAdicRational(p, 1, 0));
        double norm = commutator_norm(FiniteSupportElement::delta(theta, g), sum, basis);
        d["norm"] = norm;
        return std::abs(norm - 4.0) <= 1e-12;
    });

    guarded("state-evaluation", [&](json& d) {
        FiniteSupportElement f(theta);
        f.add_term(GroupElement::identity(p), Complex(0.5, 0.0));
        f.add_term(GroupElement(PAdicRational(p, 1, 0), PAdicRational::zero(p)),
                   Complex(0.25, 0.0));
        BasisPtr basis = make_basis(sum, Rat(4));
        Complex tr = evaluate_state(State::canonical_trace(), f, basis);
        FiniteSupportElement xi = FiniteSupportElement::identity(theta);
        Complex vs = evaluate_state(State::vector_state(xi), f, basis);
        d["trace"] = tr.real();
        d["vector"] = vs.real();
        return std::abs(tr - Complex(0.5, 0.0)) == 0.0 &&
               std::abs(vs - Complex(0.5, 0.0)) <= 1e-14;
    });

    guarded("mu-q-value", [&](json& d) {
        GroupElement g(PAdicRational(p, 1, 0), PAdicRational(p, 1, 0));
        double v = mu_q(FiniteSupportElement::delta(theta, g), 1.0, sum);
        d["mu_1"] = v;
        return v == 3.0;
    });

    guarded("neumann-inversion", [&](json& d) {
        FiniteSupportElement f(theta);
        f.add_term(GroupElement(PAdicRational(p, 1, 0), PAdicRational::zero(p)),
                   Complex(0.25, 0.0));
        f.add_term(GroupElement(PAdicRational::zero(p), PAdicRational(p, 1, 0)),
                   Complex(0.0, 0.2));
        NeumannResult nr = neumann_inverse(f, sum);
        d["terms"] = nr.report.terms;
        d["residual"] = nr.report.residual;
        return nr.report.converged && nr.report.residual <= 1e-10 &&
               nr.report.residual_right <= 1e-8;
    });

    guarded("inductive-morphism", [&](json& d) {
        std::vector<Z2Element> samples{Z2Element::delta(p, 0, {1, 0}),
                                       Z2Element::delta(p, 0, {1, 1})};
        MorphismCheckReport rep = verify_morphism(theta, 0, 1, samples, Rat(4));
        d["intertwine_deviation"] = rep.intertwine_deviation;
        return rep.pass;
    });

    guarded("resolvent-gap", [&](json& d) {
        ResolventGap g0 = resolvent_gap(p, 0, 1.0, Rat(4));
        ResolventGap g1 = resolvent_gap(p, 1, 1.0, Rat(4));
        ResolventGap g2 = resolvent_gap(p, 2, 1.0, Rat(4));
        d["gaps"] = json::array(
            {g0.truncated_gap, g1.truncated_gap, g2.truncated_gap});
        double want = 1.0 / std::sqrt(25.0 / 4.0 + 1.0);
        return std::abs(g0.truncated_gap - want) <= 1e-15 &&
               g0.truncated_gap >= g1.truncated_gap && g1.truncated_gap >= g2.truncated_gap;
    });

    guarded("element-roundtrip", [&](json&) {
        FiniteSupportElement f = sample_element();
        FiniteSupportElement back = element_from_json(element_to_json(f));
        if (back.theta() != f.theta()) return false;
        FiniteSupportElement diff = back;
        add_scaled(diff, f, Complex(-1.0, 0.0));
        return diff.l1_norm() == 0.0;
    });

    guarded("spectral-consistency", [&](json& d) {
        FiniteSupportElement f(theta);
        f.add_term(GroupElement(PAdicRational(p, 1, 0), PAdicRational::zero(p)),
                   Complex(0.3, 0.0));
        f.add_term(GroupElement(PAdicRational(p, -1, 0), PAdicRational::zero(p)),
                   Complex(0.3, 0.0));
        SpectralConsistencyReport rep =
            spectral_consistency(f, sum, {Rat(2), Rat(3)}, 1e-9, {2.0, 0.0});
        d["verdicts"] = json::array({to_string(rep.rows[0].verdict),
                                     to_string(rep.rows[1].verdict)});
        return rep.rows[0].verdict == SpectralVerdict::certified_invertible &&
               rep.rows[0].agree &&
               rep.rows[1].verdict == SpectralVerdict::gap_closing;
    });

    json cfg;
    cfg["p"] = p;
    cfg["theta"] = theta_to_json(*theta);
    cfg["spec"] = sum.to_string();
    json j = report_shell(std::move(cfg));
    j["checks"] = std::move(checks);
    j["failures"] = failures;
    j["all_pass"] = failures == 0;
    emit_report(dump(j), o.out);
    if (failures > 0) g_exit = 1;
}

// ---- wiring ----------------------------------------------------------------

std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            break;
        }
    }
    if (path.empty()) return args;
    std::size_t sub = std::string::npos;
    for (std::size_t i = 0; i < args.size(); ++i)
        if (!args[i].empty() && args[i][0] != '-') {
            sub = i;
            break;
        }
    if (sub == std::string::npos) return args;

    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    std::vector<std::string> injected;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("bad config line (expected key=value): " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("bad config line (empty key): " + line);
        injected.push_back("--" + key + "=" + value);
    }
    // command-line flags come later and win via the take-last policy
    args.insert(args.begin() + sub + 1, injected.begin(), injected.end());
    return args;
}

template <typename T>
CLI::Option* opt(CLI::App* sub, const std::string& name, T& var, const std::string& desc) {
    return sub->add_option(name, var, desc)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite truncations of solenoid spectral data"};
    app.require_subcommand(1);

    std::size_t cap = default_ball_cap;

    BallOpts ball_o;
    DoublingOpts doubling_o;
    AlgebraOpts algebra_o;
    SpectrumOpts spectrum_o;
    SummabilityOpts summability_o;
    CommutatorOpts commutator_o;
    MKOpts mk_o;
    InductiveOpts inductive_o;
    WienerOpts wiener_o;
    SelftestOpts selftest_o;

    try {
        cap = cap_from_env();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    ball_o.cap = doubling_o.cap = spectrum_o.cap = summability_o.cap = commutator_o.cap =
        mk_o.cap = inductive_o.cap = cap;

    CLI::App* ball = app.add_subcommand("ball", "enumerate a closed ball of a length function");
    opt(ball, "--p", ball_o.p, "prime");
    opt(ball, "--spec", ball_o.spec_text, "length spec: base|sum|rbase:n|restricted:n|z2:n");
    opt(ball, "--level", ball_o.level, "level for restricted/pullback specs");
    opt(ball, "--radius,--R", ball_o.radius, "ball radius (rational)");
    opt(ball, "--max-elements", ball_o.cap, "enumeration cap");
    opt(ball, "--out", ball_o.out, "output path (stdout when empty)");
    opt(ball, "--format", ball_o.format, "json|csv");
    opt(ball, "--config", ball_o.config_path, "flat key=value config file");
    ball->callback([&] { run_ball(ball_o); });

    CLI::App* doubling = app.add_subcommand("doubling", "ball growth against the doubling bound");
    opt(doubling, "--p", doubling_o.p, "prime");
    opt(doubling, "--spec", doubling_o.spec_text, "length spec");
    opt(doubling, "--level", doubling_o.level, "level for restricted/pullback specs");
    opt(doubling, "--radii", doubling_o.radii, "comma-separated radii");
    opt(doubling, "--max-elements", doubling_o.cap, "enumeration cap");
    opt(doubling, "--out", doubling_o.out, "output path");
    opt(doubling, "--format", doubling_o.format, "json|csv");
    opt(doubling, "--config", doubling_o.config_path, "flat key=value config file");
    doubling->callback([&] { run_doubling(doubling_o); });

    CLI::App* algebra = app.add_subcommand("algebra", "twisted products, adjoints and norms");
    opt(algebra, "--op", algebra_o.op, "convolve|adjoint|norms");
    opt(algebra, "--lhs", algebra_o.lhs, "element file")->required();
    opt(algebra, "--rhs", algebra_o.rhs, "right element file (convolve)");
    opt(algebra, "--spec", algebra_o.spec_text, "length spec for norms");
    opt(algebra, "--level", algebra_o.level, "level for restricted/pullback specs");
    opt(algebra, "--s-schedule", algebra_o.s_schedule, "weights s for norms");
    opt(algebra, "--q-schedule", algebra_o.q_schedule, "powers q for tail estimates");
    opt(algebra, "--out", algebra_o.out, "output path");
    opt(algebra, "--config", algebra_o.config_path, "flat key=value config file");
    algebra->callback([&] { run_algebra(algebra_o); });

    CLI::App* spectrum = app.add_subcommand("spectrum", "truncated length-operator spectrum");
    opt(spectrum, "--p", spectrum_o.p, "prime");
    opt(spectrum, "--spec", spectrum_o.spec_text, "length spec");
    opt(spectrum, "--level", spectrum_o.level, "level for restricted/pullback specs");
    opt(spectrum, "--radius,--R", spectrum_o.radius, "truncation radius");
    opt(spectrum, "--max-elements", spectrum_o.cap, "enumeration cap");
    opt(spectrum, "--out", spectrum_o.out, "output path");
    opt(spectrum, "--format", spectrum_o.format, "json|csv");
    opt(spectrum, "--config", spectrum_o.config_path, "flat key=value config file");
    spectrum->callback([&] { run_spectrum(spectrum_o); });

    CLI::App* summability = app.add_subcommand("summability", "partial traces of (1+L^2)^{-t/2}");
    opt(summability, "--p", summability_o.p, "prime");
    opt(summability, "--spec", summability_o.spec_text, "length spec");
    opt(summability, "--level", summability_o.level, "level for restricted/pullback specs");
    opt(summability, "--t", summability_o.t, "trace exponent");
    opt(summability, "--nmax", summability_o.n_max, "largest dyadic radius 2^n");
    opt(summability, "--max-elements", summability_o.cap, "enumeration cap");
    opt(summability, "--out", summability_o.out, "output path");
    opt(summability, "--format", summability_o.format, "json|csv");
    opt(summability, "--config", summability_o.config_path, "flat key=value config file");
    summability->callback([&] { run_summability(summability_o); });

    CLI::App* commutator = app.add_subcommand("commutator", "length-commutator norms");
    opt(commutator, "--input", commutator_o.input, "element file")->required();
    opt(commutator, "--spec", commutator_o.spec_text, "length spec");
    opt(commutator, "--level", commutator_o.level, "level for restricted/pullback specs");
    opt(commutator, "--radius,--R", commutator_o.radius, "truncation radius");
    opt(commutator, "--k", commutator_o.k, "commutator order");
    opt(commutator, "--tol", commutator_o.tol, "norm iteration tolerance");
    opt(commutator, "--max-elements", commutator_o.cap, "enumeration cap");
    opt(commutator, "--out", commutator_o.out, "output path");
    opt(commutator, "--config", commutator_o.config_path, "flat key=value config file");
    commutator->callback([&] { run_commutator(commutator_o); });

    CLI::App* mk = app.add_subcommand("mk-bound", "state-distance lower bound");
    opt(mk, "--xi", mk_o.xi, "unit vector element file")->required();
    opt(mk, "--candidates", mk_o.candidates, "comma-separated candidate element files")
        ->required();
    opt(mk, "--spec", mk_o.spec_text, "length spec");
    opt(mk, "--level", mk_o.level, "level for restricted/pullback specs");
    opt(mk, "--radius,--R", mk_o.radius, "truncation radius");
    opt(mk, "--tol", mk_o.tol, "self-adjointness tolerance");
    opt(mk, "--max-elements", mk_o.cap, "enumeration cap");
    opt(mk, "--out", mk_o.out, "output path");
    opt(mk, "--config", mk_o.config_path, "flat key=value config file");
    mk->callback([&] { run_mk_bound(mk_o); });

    CLI::App* inductive = app.add_subcommand("inductive", "level embedding and resolvent checks");
    opt(inductive, "--p", inductive_o.p, "prime");
    opt(inductive, "--theta0", inductive_o.theta0, "theta_0 (rational in [0,1))");
    opt(inductive, "--preperiod", inductive_o.preperiod, "preperiodic digits");
    opt(inductive, "--digits", inductive_o.digits, "periodic digits");
    opt(inductive, "--j", inductive_o.j, "source level");
    opt(inductive, "--k", inductive_o.k, "target level");
    opt(inductive, "--t", inductive_o.t, "resolvent parameter");
    opt(inductive, "--radius,--R", inductive_o.radius, "truncation radius");
    opt(inductive, "--tol", inductive_o.tol, "intertwining tolerance");
    opt(inductive, "--max-elements", inductive_o.cap, "enumeration cap");
    opt(inductive, "--out", inductive_o.out, "output path");
    opt(inductive, "--config", inductive_o.config_path, "flat key=value config file");
    inductive->callback([&] { run_inductive(inductive_o); });

    CLI::App* wiener = app.add_subcommand("wiener", "Neumann-series inversion");
    opt(wiener, "--input", wiener_o.input, "element file")->required();
    opt(wiener, "--spec", wiener_o.spec_text, "length spec");
    opt(wiener, "--level", wiener_o.level, "level for restricted/pullback specs");
    opt(wiener, "--tol", wiener_o.tol, "residual tolerance");
    opt(wiener, "--nmax", wiener_o.n_max, "maximum series terms");
    opt(wiener, "--prune", wiener_o.prune, "coefficient pruning threshold");
    opt(wiener, "--s-schedule", wiener_o.s_schedule, "weights s reported");
    opt(wiener, "--q-schedule", wiener_o.q_schedule, "powers q reported");
    wiener->add_flag("--emit-inverse", wiener_o.emit_inverse, "include the inverse element");
    opt(wiener, "--out", wiener_o.out, "output path");
    opt(wiener, "--config", wiener_o.config_path, "flat key=value config file");
    wiener->callback([&] { run_wiener(wiener_o); });

    CLI::App* selftest = app.add_subcommand("selftest", "deterministic invariant battery");
    opt(selftest, "--out", selftest_o.out, "output path");
    opt(selftest, "--config", selftest_o.config_path, "flat key=value config file");
    selftest->callback([&] { run_selftest(selftest_o); });

    try {
        std::vector<std::string> args = expand_config({argv + 1, argv + argc});
        std::vector<const char*> cargv;
        cargv.push_back(argv[0]);
        for (const std::string& s : args) cargv.push_back(s.c_str());
        app.parse(int(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const cap_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return g_exit;
}
