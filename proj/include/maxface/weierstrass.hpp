#pragma once

#include <array>

#include "maxface/rational.hpp"

namespace maxface {

// Weierstrass data (g, omega) on the sphere with the listed points removed.
// omega stores the coefficient function f of the form f dz.
struct WeierstrassData {
    RationalFn g;
    RationalFn omega;
    std::vector<PointExt> punctures;
    Complex base_point{0.0, 0.0};
};

// Coefficient functions of phi_1 = (1+g^2) f, phi_2 = i (1-g^2) f,
// phi_3 = -2 g f.
std::array<RationalFn, 3> weierstrass_forms(const WeierstrassData& data);

// Integral of the form a dz along the straight segment [z0, z1] by adaptive
// Simpson quadrature.
Complex integrate_segment(const RationalFn& a, Complex z0, Complex z1, double tol = 1e-10);

// X(z) = Re int_base^z (phi_1, phi_2, phi_3), along a polyline that detours
// around poles of the forms.
std::array<double, 3> evaluate_immersion(const WeierstrassData& data, Complex z, double tol = 1e-10);

// Conformal factor |1 - |g|^2| |f| of the induced metric.
double metric_factor(const WeierstrassData& data, Complex z);

struct LoopPeriod {
    PointExt about;
    std::array<Complex, 3> period;
    double max_re = 0.0;
};

struct PeriodReport {
    bool pass = false;
    double worst = 0.0;  // largest |Re period| over loops and components
    std::vector<LoopPeriod> loops;
};

// Loop integrals of the three forms around every puncture (trapezoid rule
// on circles with doubling until convergence); passes when every real part
// vanishes within tol.period.
PeriodReport verify_periods(const WeierstrassData& data, const Tolerances& tol = {});

struct DivisorReport {
    bool pass = false;
    std::vector<std::string> mismatches;
};

// Checks (omega)_0 = 2 (g)_inf away from the punctures, and that omega and
// g have no poles off the puncture set.
DivisorReport check_divisor_condition(const WeierstrassData& data);

struct EndReport {
    PointExt p;
    double abs_g = 0.0;  // +inf at poles of g
    int order_omega = 0;
    int order_g2omega = 0;
    int dominant_order = 0;  // form order of the dominant phi at the end
    bool light_like = false;
    bool complete = false;  // dominant order <= -2
    bool simple = false;    // dominant order == -2
};

EndReport classify_end(const WeierstrassData& data, const PointExt& p, const Tolerances& tol = {});

struct CompactnessReport {
    bool pass = false;
    // smallest ||g| - 1| observed near each puncture
    std::vector<std::pair<PointExt, double>> margins;
};

// The singular set {|g| = 1} is compact iff it stays away from every
// puncture; verified by sampling shrinking circles around each end.
CompactnessReport singular_set_compactness(const WeierstrassData& data, const Tolerances& tol = {});

struct VerificationReport {
    PeriodReport periods;
    DivisorReport divisor;
    std::vector<EndReport> ends;
    CompactnessReport compactness;
    bool is_maximal_map = false;  // periods + divisor
    bool is_maxface = false;      // additionally no light-like ends
};

VerificationReport verify_all(const WeierstrassData& data, const Tolerances& tol = {});

struct CurveExtraction {
    std::vector<std::vector<Complex>> components;
    std::vector<bool> closed;
};

// Zero level set of log |g| inside the window [lo, hi] by marching squares
// on a resolution x resolution grid; segments joined into polylines.
CurveExtraction singular_curve_extract(const RationalFn& g, Complex lo, Complex hi, int resolution);

}  // namespace maxface
