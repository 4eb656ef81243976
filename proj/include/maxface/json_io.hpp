#pragma once

#include <json.hpp>

#include "maxface/gauss_map.hpp"
#include "maxface/period_solver.hpp"
#include "maxface/weierstrass.hpp"

namespace maxface {

using Json = nlohmann::json;

// Complex numbers serialize as [re, im]; extended points as [re, im] or the
// string "inf"; polynomials as coefficient lists in ascending order.
Json to_json(Complex z);
Complex complex_from_json(const Json& j);

Json to_json(const PointExt& p);
PointExt point_from_json(const Json& j);

Json to_json(const Poly& p);
Poly poly_from_json(const Json& j);

Json to_json(const RationalFn& f);        // {"num": ..., "den": ...}
RationalFn rational_from_json(const Json& j);

Json to_json(const WeierstrassData& d);
WeierstrassData weierstrass_from_json(const Json& j);

BlaschkeSpec blaschke_from_json(const Json& j);
SingularCurveSpec singular_curve_from_json(const Json& j);

Json to_json(const SolverReport& r);
Json to_json(const VerificationReport& r);

}  // namespace maxface
