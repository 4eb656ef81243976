#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace maxface {

using Complex = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

// Thrown when a caller violates a documented precondition. The CLI maps
// this to exit code 2.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an algorithm fails to reach its accuracy contract
// (iteration stall, rank collapse, quadrature non-convergence). Exit code 3.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All tolerances used across the library, overridable from the CLI.
struct Tolerances {
    double tau_gcd = 1e-8;      // root identification during num/den reduction
    double tau_cluster = 1e-7;  // multiplicity clustering floor for poly_roots
    double tau_rank = 1e-9;     // relative rank cutoff for nullspace extraction
    double residual = 1e-9;     // accepted max residue magnitude for solvers
    double period = 1e-9;       // accepted |Re oint| per puncture
    double quadrature = 1e-10;  // per-segment adaptive quadrature tolerance
    double end_unit_margin = 1e-6;  // ||g|-1| margin deciding light-like ends
};

}  // namespace maxface
