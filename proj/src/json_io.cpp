#include "maxface/json_io.hpp"

namespace maxface {

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InvalidInput("json: complex number must be [re, im]");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

Json to_json(const PointExt& p) {
    if (p.is_inf()) return Json("inf");
    return to_json(p.z);
}

PointExt point_from_json(const Json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return PointExt::inf();
        throw InvalidInput("json: extended point must be [re, im] or \"inf\"");
    }
    return PointExt::at(complex_from_json(j));
}

Json to_json(const Poly& p) {
    Json arr = Json::array();
    for (const Complex& c : p.coeffs()) arr.push_back(to_json(c));
    return arr;
}

Poly poly_from_json(const Json& j) {
    if (!j.is_array()) throw InvalidInput("json: polynomial must be a coefficient array");
    std::vector<Complex> c;
    for (const auto& e : j) c.push_back(complex_from_json(e));
    return Poly(std::move(c));
}

Json to_json(const RationalFn& f) { return Json{{"num", to_json(f.num())}, {"den", to_json(f.den())}}; }

RationalFn rational_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("num") || !j.contains("den"))
        throw InvalidInput("json: rational function must have \"num\" and \"den\"");
    return RationalFn(poly_from_json(j.at("num")), poly_from_json(j.at("den")));
}

Json to_json(const WeierstrassData& d) {
    Json punctures = Json::array();
    for (const auto& p : d.punctures) punctures.push_back(to_json(p));
    return Json{{"g", to_json(d.g)},
                {"omega", to_json(d.omega)},
                {"punctures", punctures},
                {"base_point", to_json(d.base_point)}};
}

WeierstrassData weierstrass_from_json(const Json& j) {
    WeierstrassData d;
    d.g = rational_from_json(j.at("g"));
    d.omega = rational_from_json(j.at("omega"));
    if (j.contains("punctures"))
        for (const auto& e : j.at("punctures")) d.punctures.push_back(point_from_json(e));
    if (j.contains("base_point")) d.base_point = complex_from_json(j.at("base_point"));
    return d;
}

BlaschkeSpec blaschke_from_json(const Json& j) {
    BlaschkeSpec spec;
    if (j.contains("radius")) spec.radius = j.at("radius").get<double>();
    if (j.contains("zeros"))
        for (const auto& e : j.at("zeros")) spec.zeros.push_back(complex_from_json(e));
    if (j.contains("poles"))
        for (const auto& e : j.at("poles")) spec.poles.push_back(complex_from_json(e));
    return spec;
}

SingularCurveSpec singular_curve_from_json(const Json& j) {
    SingularCurveSpec spec;
    spec.precompose = rational_from_json(j.at("precompose"));
    spec.blaschke = blaschke_from_json(j.at("blaschke"));
    return spec;
}

Json to_json(const SolverReport& r) {
    Json coeffs = Json::array();
    for (const Complex& c : r.chosen_coeffs) coeffs.push_back(to_json(c));
    Json ends = Json::array();
    for (const auto& [p, ord] : r.end_orders)
        ends.push_back(Json{{"point", to_json(p)}, {"ord_omega", ord.first}, {"ord_g2omega", ord.second}});
    return Json{{"nullspace_dim", r.nullspace_dim},
                {"stage_nullspace_dims", r.stage_nullspace_dims},
                {"coefficients", coeffs},
                {"labels", r.labels},
                {"end_orders", ends},
                {"residual", r.residual}};
}

Json to_json(const VerificationReport& r) {
    Json loops = Json::array();
    for (const auto& lp : r.periods.loops) {
        Json per = Json::array();
        for (const Complex& w : lp.period) per.push_back(to_json(w));
        loops.push_back(Json{{"about", to_json(lp.about)}, {"period", per}, {"max_re", lp.max_re}});
    }
    Json ends = Json::array();
    for (const auto& e : r.ends)
        ends.push_back(Json{{"point", to_json(e.p)},
                            {"abs_g", std::isfinite(e.abs_g) ? Json(e.abs_g) : Json("inf")},
                            {"ord_omega", e.order_omega},
                            {"ord_g2omega", e.order_g2omega},
                            {"dominant_order", e.dominant_order},
                            {"light_like", e.light_like},
                            {"complete", e.complete},
                            {"simple", e.simple}});
    Json margins = Json::array();
    for (const auto& [p, m] : r.compactness.margins)
        margins.push_back(Json{{"point", to_json(p)}, {"margin", m}});
    return Json{{"periods", Json{{"pass", r.periods.pass}, {"worst", r.periods.worst}, {"loops", loops}}},
                {"divisor", Json{{"pass", r.divisor.pass}, {"mismatches", r.divisor.mismatches}}},
                {"ends", ends},
                {"compactness", Json{{"pass", r.compactness.pass}, {"margins", margins}}},
                {"is_maximal_map", r.is_maximal_map},
                {"is_maxface", r.is_maxface}};
}

}  // namespace maxface
