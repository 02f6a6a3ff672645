#pragma once

#include "solspec/algebra.hpp"
#include "solspec/inductive.hpp"
#include "solspec/length.hpp"
#include "solspec/operators.hpp"
#include "solspec/theta.hpp"
#include "solspec/wiener.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace solspec {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

inline json theta_to_json(const ThetaSequence& theta) {
    json j;
    j["theta0"] = rat_to_string(theta.theta0());
    j["preperiod"] = theta.preperiod();
    j["period"] = theta.period();
    return j;
}

inline ThetaPtr theta_from_json(unsigned p, const json& j) {
    Rat theta0 = parse_rat(j.at("theta0").get<std::string>());
    std::vector<unsigned> pre = j.value("preperiod", std::vector<unsigned>{});
    std::vector<unsigned> per = j.value("period", std::vector<unsigned>{});
    return make_theta(p, theta0, std::move(pre), std::move(per));
}

inline json element_to_json(const FiniteSupportElement& f) {
    json j;
    j["p"] = f.prime();
    j["theta"] = theta_to_json(f.theta());
    json coeffs = json::array();
    for (const auto& [g, c] : f) {
        json term;
        term["gamma"] = to_string(g);
        term["re"] = c.real();
        term["im"] = c.imag();
        coeffs.push_back(std::move(term));
    }
    j["coefficients"] = std::move(coeffs);
    return j;
}

inline FiniteSupportElement element_from_json(const json& j) {
    unsigned p = j.at("p").get<unsigned>();
    ThetaPtr theta = theta_from_json(p, j.at("theta"));
    FiniteSupportElement f(theta);
    for (const json& term : j.at("coefficients")) {
        GroupElement g = parse_group_element(term.at("gamma").get<std::string>(), p);
        f.add_term(g, Complex(term.at("re").get<double>(), term.at("im").get<double>()));
    }
    return f;
}

inline json sandwich_to_json(const SandwichReport& r) {
    json j;
    j["p"] = r.p;
    j["d"] = r.d;
    j["ball_count"] = r.ball_count;
    j["inner_count"] = r.inner_count.str();
    j["outer_count"] = r.outer_count.str();
    j["inner_ok"] = r.inner_ok;
    j["outer_ok"] = r.outer_ok;
    j["card_ok"] = r.card_ok;
    j["pass"] = r.pass;
    if (!r.violations.empty()) j["violations"] = r.violations;
    return j;
}

inline json doubling_to_json(const DoublingReport& r) {
    json j;
    j["spec"] = r.spec.to_string();
    j["paper_bound"] = r.uniform_bound.str();
    json rows = json::array();
    for (const DoublingRow& row : r.rows) {
        json jr;
        jr["R"] = rat_to_string(row.R);
        jr["count_R"] = row.count_R;
        jr["count_2R"] = row.count_2R;
        jr["count_pR"] = row.count_pR;
        jr["ratio2"] = row.ratio2;
        jr["ratiop"] = row.ratiop;
        jr["pass"] = row.pass;
        rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
    j["all_pass"] = r.all_pass;
    return j;
}

inline std::string doubling_to_csv(const DoublingReport& r) {
    std::ostringstream out;
    out << "R,|B(R)|,|B(2R)|,|B(pR)|,ratio2,ratiop,paper_bound,pass\n";
    for (const DoublingRow& row : r.rows) {
        out << rat_to_string(row.R) << ',' << row.count_R << ',' << row.count_2R << ','
            << row.count_pR << ',' << json(row.ratio2).dump() << ','
            << json(row.ratiop).dump() << ',' << r.uniform_bound.str() << ','
            << (row.pass ? "true" : "false") << '\n';
    }
    return out.str();
}

inline json spectral_to_json(const SpectralReport& r) {
    json j;
    j["spec"] = r.spec.to_string();
    j["t"] = r.t;
    j["n_max"] = r.n_max;
    j["ball_counts"] = r.ball_counts;
    j["annulus_counts"] = r.annulus_counts;
    j["partial_traces"] = r.partial_traces;
    j["doubling_constant"] = r.doubling_constant.str();
    j["geometric_tail_bound"] =
        std::isinf(r.geometric_tail_bound) ? json("inf") : json(r.geometric_tail_bound);
    j["empirical_doubling"] = r.empirical_doubling;
    j["empirical_tail_bound"] =
        std::isinf(r.empirical_tail_bound) ? json("inf") : json(r.empirical_tail_bound);
    return j;
}

inline json inversion_to_json(const InversionReport& r) {
    json j;
    j["norm_f"] = r.norm_f;
    j["terms"] = r.terms;
    j["converged"] = r.converged;
    j["residual"] = r.residual;
    j["residual_right"] = r.residual_right;
    j["pruned_budget"] = r.pruned_budget;
    j["residual_history"] = r.residual_history;
    json wn = json::object();
    for (auto& [s, v] : r.weighted_norms) wn[std::to_string(s)] = v;
    j["weighted_norms"] = std::move(wn);
    json mu = json::object();
    for (auto& [q, v] : r.mu_estimates) mu[std::to_string(q)] = v;
    j["mu_estimates"] = std::move(mu);
    json rows = json::array();
    for (const TailRow& row : r.tail_rows) {
        json jr;
        jr["N"] = row.N;
        jr["tail"] = row.tail;
        jr["bound"] = row.bound;
        rows.push_back(std::move(jr));
    }
    j["tail_rows"] = std::move(rows);
    return j;
}

inline json morphism_to_json(const MorphismCheckReport& r) {
    json j;
    j["j"] = r.j;
    j["k"] = r.k;
    j["samples"] = r.samples;
    j["support_ok"] = r.support_ok;
    j["intertwine_deviation"] = r.intertwine_deviation;
    j["lengths_ok"] = r.lengths_ok;
    j["pass"] = r.pass;
    return j;
}

inline json consistency_to_json(const SpectralConsistencyReport& r) {
    json j;
    json radii = json::array();
    for (const Rat& rad : r.radii) radii.push_back(rat_to_string(rad));
    j["radii"] = std::move(radii);
    j["dims"] = r.dims;
    j["norm_f"] = r.norm_f;
    json rows = json::array();
    for (const SpectralConsistencyRow& row : r.rows) {
        json jr;
        jr["c"] = row.c;
        jr["l1_certified"] = row.l1_certified;
        jr["l1_gap"] = row.l1_gap;
        jr["sigma_min"] = row.sigma_min;
        jr["verdict"] = to_string(row.verdict);
        jr["agree"] = row.agree;
        rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
    return j;
}

inline json growth_to_json(const GrowthReport& r) {
    json j;
    j["spec"] = r.spec.to_string();
    j["slope"] = r.slope;
    j["max_residual"] = r.max_residual;
    json pts = json::array();
    for (auto& [x, y] : r.points) pts.push_back(json::array({x, y}));
    j["points"] = std::move(pts);
    return j;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    json j;
    in >> j;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << text;
}

} // namespace solspec
