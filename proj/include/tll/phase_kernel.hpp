#pragma once

// Complex-phase kernel pairs (q, a): the kernel function is the Laplace-type
// integral K(x,y) = \int_0^\infty e^{-T q(x,y)} a(x,y,T) dT, with q a jet that
// vanishes on the diagonal and a a Laurent symbol in T.  This header drives
// the stationary-phase composition of two such kernels: critical point of the
// total phase in the interior variables, Gaussian prefactor with a tracked
// determinant branch, and even-moment corrections, all on jets.

#include <optional>
#include <string>
#include <vector>

#include "tll/jet.hpp"
#include "tll/laurent.hpp"

namespace tll {

struct PhaseKernel {
    // Variables 0..dims-1 are the source point x, dims..2*dims-1 the target y.
    Jet phase;              // q(x,y)
    LaurentSymbol amplitude;  // T-degree -> jet in (x,y)
    int dims = 0;           // coordinates per point
    int n = 0;              // complex dimension parameter of the model family
    // Volume density of the chart (jet in dims variables, constant 1 for a
    // flat model).  Used as the measure at the middle point when composing.
    Jet measure;
    // The amplitude degrees are integers; a composed kernel over an even-
    // dimensional fiber picks up one extra half power: the kernel family is
    // a(x,y,lambda) * lambda^{-half_power_shift/2}.
    int half_power_shift = 0;
};

struct PhaseReport {
    bool ok = false;
    double c = 0.0;                 // certified transverse positivity margin
    double diagonal_residual = 0.0;  // max |coeff| of q(x,x)
    double gradient_residual = 0.0;  // max |coeff| of (d_x q + d_y q)(x,x)
    std::string message;
};

// Checks the kernel-phase invariants: q(x,x) = 0 as a jet, d_x q = -d_y q on
// the diagonal, and positivity of the transverse real Hessian.  The margin c
// is the least eigenvalue of the quadratic-form matrix of Re q(x, x-w) in w.
PhaseReport validate_phase(const PhaseKernel& k);

// Solve the stationary equations grad_int phi = 0 for the trailing n_interior
// variables as jets in the leading n_exterior ones, order by order.  The
// interior gradient must vanish at the origin and the interior Hessian there
// must be invertible.
std::vector<Jet> critical_point(const Jet& total_phase, int n_exterior, int n_interior);

// Asymptotics of \int e^{-lambda*phase(u)} amplitude(u) du over all variables
// of the phase.  Returns a Laurent symbol s with the leading term at degree
// large_parameter_degree and the j-th correction at degree
// large_parameter_degree - j (j <= order); the integral is asymptotic to
//   lambda^{-m/2} * sum_d s[d] * lambda^d          (m = number of variables).
// The coefficients carry the full Gaussian normalization
// (2*pi)^{m/2} det(Hessian)^{-1/2}.  The real part of the Hessian at the
// critical point must be positive definite.
LaurentSymbol laplace_expansion(const Jet& phase, const Jet& amplitude,
                                int large_parameter_degree, int order);

// Compose two kernels over the middle point: (K1 o K2)(x,y) =
// \int K1(x,u) K2(u,y) rho(u) du, with K1 read through its scale integral
// (T-density against e^{-T q1}) and K2 as a lambda-graded family.  For
// contact-type kernels (nonzero diagonal differential) the scale integral is
// evaluated in closed form, the resulting pole of q1^{-k-1} in one middle
// coordinate is integrated by residues, and the remaining middle coordinates
// by a Laplace point.  Quadratic-type kernels (zero diagonal differential,
// e.g. Gaussians) are composed at equal scales through a single Laplace
// point.  The result phase is the critical value and the amplitude carries
// the full prefactors.
PhaseKernel compose_kernels(const PhaseKernel& k1, const PhaseKernel& k2, int order);

// Model kernel of the unit sphere S^{2n-1} in C^n at the base point
// z = (1,0,...,0): phase q = 1 - z(x).conj(z(y)) in graph coordinates,
// amplitude the single term T^{n-1}/(2 pi^n), chart measure (1-r^2)^{-1/2}.
PhaseKernel sphere_szego_kernel(int n, int order);

struct IdempotenceReport {
    double phase_defect = 0.0;      // residual of q' = e*q over the fitted unit e
    double amplitude_defect = 0.0;  // max coefficient gap on the compared slots
    double unit_constant_gap = 0.0;  // |e(0) - 1|
    Jet unit;                        // fitted unit jet e
};

// Measure how far `composed` is from `original` as a kernel: fit the unit
// jet e with composed.phase = e * original.phase, renormalize the composed
// amplitude to the frame of the original (a_j -> a_j * e^{-j-1}), and compare
// coefficients on a fixed window (leading amplitude through exterior order
// two, diagonal value one degree down) that every admissible truncation
// populates; coarse truncations fill it only partially, so the defect
// decreases as the jet order grows.
IdempotenceReport idempotence_defect(const PhaseKernel& composed, const PhaseKernel& original);

namespace detail {
// Division in the jet ring: find e (order = target order - valuation of q)
// minimizing the coefficient residual of e*q - p, by least squares over the
// monomial basis.  Returns the residual in max-abs norm.
double jet_divide(const Jet& p, const Jet& q, Jet& quotient);

// Engine entry shared by laplace_expansion and compose_kernels: expand
// \int e^{-lambda*phase(x,v)} sum_d amp[d](x,v) lambda^d dv over the trailing
// n_interior variables.  Exterior-jet coefficients are kept; `strict`
// additionally requires a positive-definite real part of the interior
// Hessian (the relaxed mode only needs an invertible one, with the branch of
// det^{-1/2} tracked along a homotopy from the identity).  The returned map
// sends lambda-degrees to jets in the exterior variables; the caller accounts
// for the overall lambda^{-m/2}.  critical_value receives the phase value at
// the interior critical point.
std::map<int, Jet> laplace_interior(const Jet& phase, const std::map<int, Jet>& amp,
                                    int n_exterior, int n_interior, int depth, bool strict,
                                    Jet* critical_value, std::optional<ExtCap> cap);
}  // namespace detail

}  // namespace tll
