#pragma once

// Idempotent-correction algebra in three instantiations: complex matrices
// (with a spectral oracle), degree-filtered formal elements, and pointwise
// symbols on a fiber product of finite label sets.  The common mechanism is
// the series S = S0 + (2 S0 - 1) * sum_k C(k) R^k with R = S0 - S0^2 and
// C(k) = (2k-1)!/(k!(k-1)!), which corrects an approximate idempotent.

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tll/scalars.hpp"

namespace tll {

// --- series coefficients ---------------------------------------------------

// C(k) = (2k-1)!/(k!(k-1)!): 1, 3, 10, 35, ...
double projector_series_coefficient(int k);

// --- matrices ----------------------------------------------------------------

using Matrix = Eigen::MatrixXcd;

// R = S0 - S0^2.
Matrix residual(const Matrix& s0);

// Truncated correction series.  Requires the spectral radius of R to be
// strictly below 1/4 (the convergence radius of sum C(k) r^k); violations
// throw "S0 too far from a projector".
Matrix correct_projector(const Matrix& s0, int k_max);

// Spectral construction of the same projector: 2S - 1 = sign(2 S0 - 1)
// through the eigendecomposition.  Oracle for correct_projector.
Matrix spectral_sign_projector(const Matrix& s0);

struct DerivativeIdentityReport {
    double max_identity_residual = 0.0;  // max ||DS - [S, (2S-1) DS]||
    double max_projector_defect = 0.0;   // max ||S^2 - S|| over samples
    std::vector<double> traces;          // Re tr S_t per sample
    double trace_variation = 0.0;        // max |tr - tr_0|
};

// Central-difference check of the projector-derivative identity
// DS = [S, (2S-1) DS] along a family t -> S_t, plus trace constancy.
DerivativeIdentityReport derivative_identity_check(
    const std::function<Matrix(double)>& family, const std::vector<double>& t_samples,
    double h = 1e-4);

// --- degree-filtered elements ----------------------------------------------

// Formal element sum_{d <= d_max} c_d at integer degrees with scalar
// components, truncated below d_min.  Product adds degrees.
struct GradedElement {
    std::map<int, Complex> components;  // degree -> coefficient
    int d_min = -16;                    // truncation floor

    bool empty() const { return components.empty(); }
    int top_degree() const;
    void set(int degree, Complex value);
    Complex get(int degree) const;
};

GradedElement graded_add(const GradedElement& a, const GradedElement& b);
GradedElement graded_sub(const GradedElement& a, const GradedElement& b);
GradedElement graded_scale(const GradedElement& a, Complex c);
GradedElement graded_mul(const GradedElement& a, const GradedElement& b);
double graded_norm(const GradedElement& a);

GradedElement graded_residual(const GradedElement& s0);

// Correction series for graded elements; requires the residual to have top
// degree < 0, so each series term drops at least one degree and S^2 - S has
// top degree <= (top degree of R) * (k_max + 1).
GradedElement graded_correct_projector(const GradedElement& s0, int k_max);

// --- symbols on the fiber product --------------------------------------------

// The composition space: finitely many base labels; each base label carries
// outgoing and incoming fiber labels.  A symbol assigns a value to every pair
// (outgoing, incoming) over the same base label.
struct SymbolGrid {
    int num_base = 0;
    int fiber_out = 0;  // outgoing fiber points per base label
    int fiber_in = 0;   // incoming fiber points per base label
    // By convention fiber index 0 is the base point itself on both sides.
    bool operator==(const SymbolGrid&) const = default;
};

struct SymbolOnC {
    SymbolGrid grid;
    // values[b][i][j]: base label b, outgoing fiber i, incoming fiber j.
    std::vector<std::vector<std::vector<Complex>>> values;
    bool normalized_frame = false;  // J = 1 frame flag

    static SymbolOnC constant(const SymbolGrid& g, Complex v, bool normalized = true);
    Complex& at(int b, int i, int j);
    Complex at(int b, int i, int j) const;
    // a(xi0, xi0) at base label b: the (0, 0) entry.
    Complex base_value(int b) const { return at(b, 0, 0); }
};

// Product-form symbol a(xi', xi'') = f(xi') g(xi''): f indexed by (b, i),
// g by (b, j).
SymbolOnC product_symbol(const SymbolGrid& g,
                         const std::vector<std::vector<Complex>>& f,
                         const std::vector<std::vector<Complex>>& gfun);

// Pointwise composition in the normalized frame:
// (a o b)(xi', xi'') = a(xi', xi0) b(xi0, xi'').
SymbolOnC symbol_compose(const SymbolOnC& a, const SymbolOnC& b);

// Change of frame dividing out a multiplier J subject to the associativity
// constraint J(xi', xi0) = J(xi0, xi'') = J(xi0, xi0) at every base label:
// the rescaled symbol is J(xi',xi'') / J(xi0,xi0)^2 * a.  A constant
// multiplier kappa rescales the symbol by 1/kappa, and the J-weighted
// composition a(xi',xi0) b(xi0,xi'') / J(xi',xi'') turns into the plain
// product rule on the rescaled symbols.
SymbolOnC frame_normalize(const SymbolOnC& a, const SymbolOnC& J);

// Largest entry of |(a o a) - a| over the whole grid: idempotence defect.
double symbol_idempotence_defect(const SymbolOnC& a);

// Path of idempotent product-form symbols from (f0, g0) to (f1, g1):
// interpolate the factors linearly and renormalize so f_t g_t = 1 at every
// base point.  Throws when the renormalizer crosses zero.
std::vector<SymbolOnC> deform_idempotent_symbols(
    const SymbolGrid& g, const std::vector<std::vector<Complex>>& f0,
    const std::vector<std::vector<Complex>>& g0,
    const std::vector<std::vector<Complex>>& f1,
    const std::vector<std::vector<Complex>>& g1, int steps);

}  // namespace tll
