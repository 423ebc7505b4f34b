#include "solvcert/report.hpp"

#include <cmath>
#include <cstdio>

namespace solvcert {

using nlohmann::json;

namespace {

// JSON has no infinity; emit null for non-finite values.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json opt(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

}  // namespace

std::string csv_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

json to_json(const CVector& v) {
    json out = json::array();
    for (const auto& z : v) out.push_back({num(z.real()), num(z.imag())});
    return out;
}

json to_json(const CertificateReport& r) {
    json out{{"lhs", num(r.lhs)},
             {"passed", r.passed},
             {"margin", num(r.margin)},
             {"r_used", opt(r.r_used)},
             {"terms",
              {{"a_vector", num(r.terms.first_vector)},
               {"a_matrix", num(r.terms.first_matrix)},
               {"b", num(r.terms.quadratic)},
               {"c_conj", num(r.terms.linear_conj)},
               {"c", num(r.terms.linear)}}}};
    if (r.envelope) out["envelope"] = {{"lower", r.envelope->lower}, {"upper", r.envelope->upper}};
    return out;
}

json to_json(const GainReport& g) {
    json out{{"lambda_cag", num(g.lambda_cag)}, {"lambda_m", num(g.lambda_m)}, {"cap", num(g.cap)},
             {"A", num(g.a)},                   {"B", num(g.b)},               {"sigma", num(g.sigma)},
             {"certified", g.certified},        {"lambda_b", opt(g.lambda_b)}, {"lambda_r", opt(g.lambda_r)}};
    if (g.lambda_b && g.lambda_r && *g.lambda_r > 0) out["ratio_cag_r"] = num(g.lambda_cag / *g.lambda_r);
    if (g.lambda_b && *g.lambda_b > 0) out["ratio_cag_b"] = num(g.lambda_cag / *g.lambda_b);
    return out;
}

json to_json(const ScreenResult& r) {
    json outcomes = json::array();
    for (const auto& o : r.outcomes) {
        const char* cls = o.cls == PointClass::solvable_seed ? "solved"
                          : o.cls == PointClass::certified  ? "certified"
                                                            : "insolvable";
        json row{{"class", cls}};
        if (o.seed) row["seed"] = *o.seed;
        if (o.lhs) row["lhs"] = num(*o.lhs);
        outcomes.push_back(std::move(row));
    }
    return {{"solvable_count", r.solvable.size()},
            {"insolvable_count", r.insolvable.size()},
            {"solvable", r.solvable},
            {"insolvable", r.insolvable},
            {"seeds_used", r.seeds_used},
            {"pf_calls", r.pf_calls},
            {"certificate_calls", r.certificate_calls},
            {"unverified_insolvable", r.unverified_insolvable},
            {"wall_time_s", r.wall_time.count()},
            {"outcomes", std::move(outcomes)}};
}

json to_json(const CoalescenceScan& s) {
    json rows = json::array();
    for (const auto& r : s.rows)
        rows.push_back({{"cos_phi", num(r.cos_phi)},
                        {"cot_phi", num(r.cot_phi)},
                        {"lambda_b", num(r.lambda_b)},
                        {"lambda_r", num(r.lambda_r)},
                        {"covering_ratio", num(r.covering_ratio)}});
    json out{{"rows", rows}};
    if (!s.rows.empty()) {
        const auto& b = s.rows[s.best];
        out["best"] = {{"cos_phi", num(b.cos_phi)},
                       {"cot_phi", num(b.cot_phi)},
                       {"max_covering_ratio", num(b.covering_ratio)}};
    }
    return out;
}

json to_json(const TimingTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) rows.push_back({{"n", r.n}, {"mean_certificate_time_s", num(r.mean_seconds)}});
    return {{"rows", rows}, {"loglog_slope", opt(t.loglog_slope)}};
}

json to_json(const BoundaryTrace& t) {
    json rays = json::array();
    for (const auto& r : t.rays)
        rays.push_back({{"theta", num(r.theta)},
                        {"certified_radius", num(r.certified_radius)},
                        {"true_radius", opt(r.true_radius)},
                        {"covering_ratio", opt(r.covering_ratio)}});
    return {{"r", opt(t.r)}, {"tol_rel", t.tol_rel}, {"rays", rays}};
}

void write_csv(std::ostream& os, const BoundaryTrace& t) {
    os << "theta,certified_radius,true_radius,covering_ratio\n";
    for (const auto& r : t.rays) {
        os << csv_number(r.theta) << ',' << csv_number(r.certified_radius) << ',';
        if (r.true_radius) os << csv_number(*r.true_radius);
        os << ',';
        if (r.covering_ratio) os << csv_number(*r.covering_ratio);
        os << '\n';
    }
}

}  // namespace solvcert
