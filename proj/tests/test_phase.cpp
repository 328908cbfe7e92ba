// Quadratic-phase kernel engine: phase validation, stationary points as
// jets, steepest-descent expansions against direct quadrature and Gaussian
// moments, kernel composition, and the self-composition defect of the model
// kernel family.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tll/phase_kernel.hpp"
#include "tll/quadrature.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace tll;

namespace {

Jet V(int nv, int ord, int i) { return Jet::variable(nv, ord, i, Complex(1.0, 0.0)); }

// 1D kernel with phase c * (x - y)^2 and constant amplitude at T-degree 0.
PhaseKernel gaussian_kernel(double c, int ord) {
    PhaseKernel k;
    k.dims = 1;
    k.n = 1;
    Jet d = jet_sub(V(2, ord, 0), V(2, ord, 1));
    k.phase = jet_scale(jet_mul(d, d), Complex(c, 0.0));
    k.amplitude.nvars = 2;
    k.amplitude.order = ord;
    k.amplitude.set(0, Jet::constant(2, ord, Complex(1.0, 0.0)));
    k.measure = Jet::constant(1, ord, Complex(1.0, 0.0));
    return k;
}

double phase_gap(const Jet& a, const Jet& b) { return jet_sub(a, b).max_abs(); }

// Evaluate a degree-graded expansion sum_d s[d] lambda^d * lambda^{-m/2}.
double eval_expansion(const LaurentSymbol& s, double lam, int m) {
    double acc = 0.0;
    for (const auto& [d, jet] : s.terms)
        acc += jet.constant_term().real() * std::pow(lam, d);
    return acc * std::pow(lam, -0.5 * m);
}

}  // namespace

TEST_CASE("phase validation accepts the model kernel and certifies its margin") {
    PhaseKernel k = sphere_szego_kernel(2, 4);
    PhaseReport rep = validate_phase(k);
    CHECK(rep.ok);
    CHECK(rep.c > 0.0);
    CHECK(rep.diagonal_residual < 1e-14);
    CHECK(rep.gradient_residual < 1e-14);
}

TEST_CASE("phase validation: separated square passes with unit margin") {
    PhaseKernel k = gaussian_kernel(1.0, 4);
    PhaseReport rep = validate_phase(k);
    CHECK(rep.ok);
    CHECK(rep.c == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.diagonal_residual == 0.0);
    CHECK(rep.gradient_residual == 0.0);
}

TEST_CASE("phase validation rejects flat and off-diagonal phases") {
    // purely imaginary linear phase: no transverse positivity
    PhaseKernel k = gaussian_kernel(1.0, 4);
    Jet d = jet_sub(V(2, 4, 0), V(2, 4, 1));
    k.phase = jet_scale(d, Complex(0.0, 1.0));
    PhaseReport flat = validate_phase(k);
    CHECK_FALSE(flat.ok);

    // nonvanishing diagonal value
    PhaseKernel k2 = gaussian_kernel(1.0, 4);
    Jet x = V(2, 4, 0);
    k2.phase = jet_add(k2.phase, jet_mul(x, x));
    PhaseReport diag = validate_phase(k2);
    CHECK_FALSE(diag.ok);
    CHECK(diag.diagonal_residual > 0.5);
}

TEST_CASE("stationary point of the two-chord phase is the midpoint") {
    // phase (x - u)^2 + (u - y)^2 in (x, y; u): u*(x, y) = (x + y) / 2.
    int ord = 4;
    Jet x = V(3, ord, 0), y = V(3, ord, 1), u = V(3, ord, 2);
    Jet p = jet_add(jet_mul(jet_sub(x, u), jet_sub(x, u)),
                    jet_mul(jet_sub(u, y), jet_sub(u, y)));
    std::vector<Jet> sol = critical_point(p, 2, 1);
    REQUIRE(sol.size() == 1);
    CHECK(sol[0].coeff({1, 0}) == Complex(0.5, 0.0));
    CHECK(sol[0].coeff({0, 1}) == Complex(0.5, 0.0));
    CHECK(sol[0].terms().size() == 2);
}

TEST_CASE("stationary equations are solved order by order under a cubic term") {
    int ord = 6;
    Jet x = V(3, ord, 0), y = V(3, ord, 1), u = V(3, ord, 2);
    Jet p = jet_add(jet_mul(jet_sub(x, u), jet_sub(x, u)),
                    jet_mul(jet_sub(u, y), jet_sub(u, y)));
    p = jet_add(p, jet_scale(jet_mul(jet_mul(u, u), u), Complex(0.1, 0.0)));
    std::vector<Jet> sol = critical_point(p, 2, 1);
    REQUIRE(sol.size() == 1);

    // substitute back into the interior gradient: identically zero as a jet
    Jet grad = jet_diff(p, 2);
    Jet res = jet_compose(grad, {V(2, ord, 0), V(2, ord, 1), sol[0]});
    CHECK(res.max_abs() < 1e-12);
    // the quadratic correction to the midpoint is nontrivial
    CHECK(std::abs(sol[0].coeff({2, 0})) > 1e-4);
}

TEST_CASE("stationary solve rejects degenerate interior data") {
    int ord = 4;
    Jet x = V(3, ord, 0), y = V(3, ord, 1), u = V(3, ord, 2);
    // no interior dependence: singular interior Hessian
    Jet p = jet_mul(jet_sub(x, y), jet_sub(x, y));
    CHECK_THROWS(critical_point(p, 2, 1));
    // interior gradient not vanishing at the origin
    Jet q = jet_add(u, jet_mul(x, x));
    CHECK_THROWS(critical_point(q, 2, 1));
}

TEST_CASE("pure Gaussian integral has no corrections") {
    int ord = 6;
    Jet u = V(1, ord, 0);
    Jet phase = jet_scale(jet_mul(u, u), Complex(0.5, 0.0));
    LaurentSymbol s = laplace_expansion(phase, Jet::constant(1, ord, Complex(1.0, 0.0)), 0, 2);
    CHECK(std::abs(s.get(0)->constant_term() - Complex(std::sqrt(2.0 * M_PI), 0.0)) < 1e-12);
    for (int d : {-1, -2}) {
        const Jet* jet = s.get(d);
        if (jet) CHECK(jet->max_abs() < 1e-12);
    }
}

TEST_CASE("polynomial amplitudes reproduce Gaussian moments") {
    // phase u^2/2: \int u^{2k} e^{-lambda u^2/2} du = (2k-1)!! sqrt(2 pi) lambda^{-k-1/2}
    int ord = 6;
    Jet u = V(1, ord, 0);
    Jet phase = jet_scale(jet_mul(u, u), Complex(0.5, 0.0));
    Jet u2 = jet_mul(u, u);
    LaurentSymbol s2 = laplace_expansion(phase, u2, 0, 3);
    CHECK(std::abs(s2.get(-1)->constant_term() - Complex(std::sqrt(2.0 * M_PI), 0.0)) < 1e-12);
    LaurentSymbol s4 = laplace_expansion(phase, jet_mul(u2, u2), 0, 3);
    CHECK(std::abs(s4.get(-2)->constant_term() - Complex(3.0 * std::sqrt(2.0 * M_PI), 0.0)) < 1e-12);
    // odd moments vanish
    LaurentSymbol s1 = laplace_expansion(phase, u, 0, 3);
    for (const auto& [d, jet] : s1.terms) CHECK(jet.max_abs() < 1e-12);
}

TEST_CASE("cubic-phase three-term expansion matches direct quadrature") {
    // phase u^2/2 + u^3/6, amplitude 1, large parameter 50.  The j-th
    // correction gathers Wick terms of monomial degree 6j, so jet order 12
    // makes the first two corrections exact.
    int ord = 12;
    Jet u = V(1, ord, 0);
    Jet phase = jet_add(jet_scale(jet_mul(u, u), Complex(0.5, 0.0)),
                        jet_scale(jet_mul(jet_mul(u, u), u), Complex(1.0 / 6.0, 0.0)));
    LaurentSymbol s = laplace_expansion(phase, Jet::constant(1, ord, Complex(1.0, 0.0)), 0, 2);

    // closed-form coefficients: sum over even powers of the cubic exponent,
    // s[-m] = sqrt(2 pi) * (6m-1)!! / (36^m (2m)!)
    double root = std::sqrt(2.0 * M_PI);
    CHECK(std::abs(s.get(0)->constant_term() - Complex(root, 0.0)) < 1e-12);
    CHECK(std::abs(s.get(-1)->constant_term() - Complex(root * 5.0 / 24.0, 0.0)) < 1e-10);
    CHECK(std::abs(s.get(-2)->constant_term() - Complex(root * 10395.0 / 31104.0, 0.0)) < 1e-10);

    for (double lam : {50.0, 100.0}) {
        double numeric = adaptive_simpson(
            [&](double t) { return std::exp(-lam * (t * t / 2 + t * t * t / 6)); }, -1.5, 1.5,
            1e-12);
        double series = eval_expansion(s, lam, 1);
        CHECK(std::abs(series - numeric) / std::abs(numeric) < 1e-4);
    }
}

TEST_CASE("correction terms decay at the documented rate in the large parameter") {
    // Subtracting the leading term, the remainder scales like lambda^{-3/2}.
    int ord = 8;
    Jet u = V(1, ord, 0);
    Jet phase = jet_add(jet_scale(jet_mul(u, u), Complex(0.5, 0.0)),
                        jet_scale(jet_mul(jet_mul(u, u), u), Complex(1.0 / 6.0, 0.0)));
    LaurentSymbol s = laplace_expansion(phase, Jet::constant(1, ord, Complex(1.0, 0.0)), 0, 2);
    double t0 = s.get(0)->constant_term().real();
    double t1 = s.get(-1)->constant_term().real();
    auto remainder = [&](double lam) {
        double numeric = adaptive_simpson(
            [&](double t) { return std::exp(-lam * (t * t / 2 + t * t * t / 6)); }, -1.5, 1.5,
            1e-13);
        return (numeric - t0 * std::pow(lam, -0.5)) * std::pow(lam, 1.5);
    };
    double r1 = remainder(200.0), r2 = remainder(400.0);
    CHECK(std::abs(r1 - t1) / std::abs(t1) < 0.01);
    CHECK(std::abs(r2 - t1) / std::abs(t1) < 0.01);
}

TEST_CASE("decoupled variables factor into a coefficient convolution") {
    // jet order 12 keeps both corrections complete on each factor
    int ord = 12;
    auto one_d = [&](double cubic) {
        Jet u = V(1, ord, 0);
        Jet ph = jet_add(jet_scale(jet_mul(u, u), Complex(0.5, 0.0)),
                         jet_scale(jet_mul(jet_mul(u, u), u), Complex(cubic, 0.0)));
        return laplace_expansion(ph, Jet::constant(1, ord, Complex(1.0, 0.0)), 0, 2);
    };
    LaurentSymbol s1 = one_d(1.0 / 6.0);
    LaurentSymbol s2 = one_d(0.05);

    Jet u = V(2, ord, 0), v = V(2, ord, 1);
    Jet ph2 = jet_add(jet_add(jet_scale(jet_mul(u, u), Complex(0.5, 0.0)),
                              jet_scale(jet_mul(jet_mul(u, u), u), Complex(1.0 / 6.0, 0.0))),
                      jet_add(jet_scale(jet_mul(v, v), Complex(0.5, 0.0)),
                              jet_scale(jet_mul(jet_mul(v, v), v), Complex(0.05, 0.0))));
    LaurentSymbol s12 = laplace_expansion(ph2, Jet::constant(2, ord, Complex(1.0, 0.0)), 0, 2);

    auto coeff = [](const LaurentSymbol& s, int d) {
        const Jet* j = s.get(d);
        return j ? j->constant_term() : Complex(0.0, 0.0);
    };
    for (int d = 0; d >= -2; --d) {
        Complex conv = 0.0;
        for (int a = 0; a >= d; --a) conv += coeff(s1, a) * coeff(s2, d - a);
        CHECK(std::abs(coeff(s12, d) - conv) < 1e-10);
    }
}

TEST_CASE("expansion rejects concave and tilted phases") {
    int ord = 4;
    Jet u = V(1, ord, 0);
    Jet amp = Jet::constant(1, ord, Complex(1.0, 0.0));
    CHECK_THROWS(laplace_expansion(jet_scale(jet_mul(u, u), Complex(-0.5, 0.0)), amp, 0, 2));
    CHECK_THROWS(laplace_expansion(jet_add(u, jet_mul(u, u)), amp, 0, 2));
}

TEST_CASE("the model kernel carries its documented normalization") {
    PhaseKernel k = sphere_szego_kernel(2, 4);
    CHECK(k.dims == 2 * 2 - 1);  // graph coordinates of S^3 around the base point
    CHECK(k.n == 2);
    CHECK(k.amplitude.top_degree() == 1);
    CHECK(k.amplitude.bottom_degree() == 1);
    double c = 1.0 / (2.0 * M_PI * M_PI);
    CHECK(std::abs(k.amplitude.get(1)->constant_term() - Complex(c, 0.0)) < 1e-15);
    CHECK(std::abs(k.measure.constant_term() - Complex(1.0, 0.0)) < 1e-15);
}

TEST_CASE("two Gaussian chords compose into the half-width Gaussian") {
    int ord = 6;
    PhaseKernel g = gaussian_kernel(0.5, ord);  // e^{-T (x-u)^2 / 2}
    PhaseKernel c = compose_kernels(g, g, ord);

    // critical value of (x-u)^2/2 + (u-y)^2/2 is (x-y)^2/4
    CHECK(std::abs(c.phase.coeff({2, 0}) - Complex(0.25, 0.0)) < 1e-12);
    CHECK(std::abs(c.phase.coeff({1, 1}) - Complex(-0.5, 0.0)) < 1e-12);
    CHECK(std::abs(c.phase.coeff({0, 2}) - Complex(0.25, 0.0)) < 1e-12);
    double rest = 0.0;
    for (const auto& [key, val] : c.phase.terms())
        if (mono_degree(key) != 2) rest = std::max(rest, std::abs(val));
    CHECK(rest < 1e-12);

    // the fiber Gaussian contributes sqrt(pi / lambda): constant sqrt(pi)
    // and one half power of the large parameter
    CHECK(c.half_power_shift == 1);
    CHECK(c.amplitude.top_degree() == 0);
    CHECK(std::abs(c.amplitude.get(0)->constant_term() - Complex(std::sqrt(M_PI), 0.0)) < 1e-12);
}

TEST_CASE("composition is linear: zero amplitude stays zero") {
    int ord = 4;
    PhaseKernel g = gaussian_kernel(0.5, ord);
    PhaseKernel z = g;
    z.amplitude.terms.clear();
    PhaseKernel c = compose_kernels(z, g, ord);
    CHECK(c.amplitude.terms.empty());
}

TEST_CASE("model kernel self-composition is idempotent up to truncation") {
    PhaseKernel k = sphere_szego_kernel(2, 4);
    PhaseKernel kk = compose_kernels(k, k, 4);
    IdempotenceReport rep = idempotence_defect(kk, k);
    CHECK(rep.phase_defect < 1e-6);
    CHECK(rep.amplitude_defect < 1e-6);
    CHECK(rep.unit_constant_gap < 1e-6);
    CHECK(std::abs(rep.unit.constant_term() - Complex(1.0, 0.0)) < 1e-6);
}

TEST_CASE("the self-composition defect shrinks as the jet order grows") {
    PhaseKernel k2 = sphere_szego_kernel(2, 2);
    PhaseKernel k4 = sphere_szego_kernel(2, 4);
    double d2 = idempotence_defect(compose_kernels(k2, k2, 2), k2).amplitude_defect;
    double d4 = idempotence_defect(compose_kernels(k4, k4, 4), k4).amplitude_defect;
    CHECK(d4 < d2);
    CHECK(d4 < 1e-6);
}

TEST_CASE("circle model: single simple pole, no log slot") {
    PhaseKernel k = sphere_szego_kernel(1, 4);
    HolonomicSingularity h = kernel_expansion(k.amplitude, 1);
    double c = 1.0 / (2.0 * M_PI);
    CHECK(std::abs(diagonal_restriction(h.alpha.at(1)).constant_term() - Complex(c, 0.0)) < 1e-14);
    for (const auto& [kk, jet] : h.beta) CHECK(jet.max_abs() == 0.0);
    // self-composition stays idempotent
    IdempotenceReport rep = idempotence_defect(compose_kernels(k, k, 4), k);
    CHECK(rep.phase_defect < 1e-8);
    CHECK(rep.amplitude_defect < 1e-8);
}

TEST_CASE("composition is associative on the shared coefficient window") {
    // circle-type kernel with amplitude T at order 6: both association orders
    // populate every slot of total monomial degree <= order - 2; the cap
    // boundary slots differ by construction and are excluded.
    int ord = 6;
    PhaseKernel A = sphere_szego_kernel(1, ord);
    A.amplitude.terms.clear();
    A.amplitude.set(1, Jet::constant(2, ord, Complex(1.0, 0.0)));
    PhaseKernel AA = compose_kernels(A, A, ord);
    PhaseKernel L = compose_kernels(AA, A, ord);
    PhaseKernel R = compose_kernels(A, AA, ord);

    CHECK(phase_gap(L.phase, R.phase) < 1e-10);
    CHECK(L.half_power_shift == R.half_power_shift);

    int lo = std::min(L.amplitude.bottom_degree(), R.amplitude.bottom_degree());
    int hi = std::max(L.amplitude.top_degree(), R.amplitude.top_degree());
    double worst = 0.0;
    for (int d = lo; d <= hi; ++d) {
        const Jet* a = L.amplitude.get(d);
        const Jet* b = R.amplitude.get(d);
        Jet diff(2, ord);
        if (a && b) diff = jet_sub(*a, *b);
        else if (a) diff = *a;
        else if (b) diff = *b;
        for (const auto& [key, val] : diff.terms())
            if (mono_degree(key) <= ord - 2) worst = std::max(worst, std::abs(val));
    }
    CHECK(worst < 1e-8);
}
