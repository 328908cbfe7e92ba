// Laurent coefficient symbols: the index map to pole/log data, numeric scale
// integrals, the diagonal trace expansion, and the mixed-basis fit, with
// closed-form and quadrature oracles.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tll/laurent.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace tll;

namespace {

LaurentSymbol scalar_symbol(std::initializer_list<std::pair<int, double>> coeffs,
                            int nvars = 0, int order = 0) {
    LaurentSymbol s;
    s.nvars = nvars;
    s.order = order;
    for (const auto& [deg, c] : coeffs)
        if (c != 0.0) s.set(deg, Jet::constant(nvars, order, Complex(c, 0.0)));
    return s;
}

Complex const_of(const std::map<int, Jet>& m, int k) {
    auto it = m.find(k);
    return it == m.end() ? Complex(0.0, 0.0) : it->second.constant_term();
}

}  // namespace

TEST_CASE("pure first power feeds only the top pole slot") {
    // a = T with n = 2: alpha_2 = 1! * a_1 = 1, everything else zero.
    LaurentSymbol a = scalar_symbol({{1, 1.0}});
    HolonomicSingularity h = kernel_expansion(a, 2);
    CHECK(const_of(h.alpha, 2) == Complex(1.0, 0.0));
    CHECK(const_of(h.alpha, 1) == Complex(0.0, 0.0));
    for (const auto& [k, jet] : h.beta) CHECK(jet.max_abs() == 0.0);
}

TEST_CASE("pure inverse power feeds only the leading log slot") {
    // a = T^{-1}: beta_0 = a_{-1} = 1, no poles.
    LaurentSymbol a = scalar_symbol({{-1, 1.0}});
    HolonomicSingularity h = kernel_expansion(a, 2);
    CHECK(const_of(h.beta, 0) == Complex(1.0, 0.0));
    for (const auto& [k, jet] : h.alpha) CHECK(jet.max_abs() == 0.0);
}

TEST_CASE("mixed symbol routes every degree to its slot") {
    // a = 2T + 3 + 5T^{-1} + 7T^{-2}, n = 2:
    // alpha_2 = 2, alpha_1 = 3, beta_0 = 5, beta_1 = 7.
    LaurentSymbol a = scalar_symbol({{1, 2.0}, {0, 3.0}, {-1, 5.0}, {-2, 7.0}});
    HolonomicSingularity h = kernel_expansion(a, 2);
    CHECK(const_of(h.alpha, 2) == Complex(2.0, 0.0));
    CHECK(const_of(h.alpha, 1) == Complex(3.0, 0.0));
    CHECK(const_of(h.beta, 0) == Complex(5.0, 0.0));
    CHECK(const_of(h.beta, 1) == Complex(7.0, 0.0));
}

TEST_CASE("factorial weights on deep slots") {
    // alpha_k = (k-1)! a_{k-1}: a = T^3 with n = 4 gives alpha_4 = 6.
    HolonomicSingularity top = kernel_expansion(scalar_symbol({{3, 1.0}}), 4);
    CHECK(const_of(top.alpha, 4) == Complex(6.0, 0.0));
    // beta_k = a_{-1-k} / k!: a = T^{-3} gives beta_2 = 1/2.
    HolonomicSingularity low = kernel_expansion(scalar_symbol({{-3, 1.0}}), 2);
    CHECK(const_of(low.beta, 2) == Complex(0.5, 0.0));
}

TEST_CASE("the index map is exactly linear in the exact-coefficient mode") {
    auto make = [](std::initializer_list<std::pair<int, ComplexRational>> coeffs) {
        LaurentSymbolQ s;
        s.nvars = 0;
        s.order = 0;
        for (const auto& [deg, c] : coeffs)
            s.set(deg, JetQ::constant(0, 0, c));
        return s;
    };
    LaurentSymbolQ a = make({{2, ComplexRational(1L, 3L)}, {-1, ComplexRational(2L, 7L)}});
    LaurentSymbolQ b = make({{2, ComplexRational(5L, 3L)}, {-2, ComplexRational(1L, 11L)}});
    LaurentSymbolQ sum = make({{2, ComplexRational(2L)},
                               {-1, ComplexRational(2L, 7L)},
                               {-2, ComplexRational(1L, 11L)}});
    HolonomicSingularityQ ha = kernel_expansion(a, 3);
    HolonomicSingularityQ hb = kernel_expansion(b, 3);
    HolonomicSingularityQ hs = kernel_expansion(sum, 3);
    // alpha_3 = 2! * a_2: 2/3 + 10/3 = 4 exactly
    CHECK(hs.alpha.at(3).constant_term() == ComplexRational(4L));
    CHECK(ha.alpha.at(3).constant_term() + hb.alpha.at(3).constant_term() ==
          hs.alpha.at(3).constant_term());
    CHECK(hs.beta.at(0).constant_term() == ha.beta.at(0).constant_term());
    CHECK(hs.beta.at(1).constant_term() == hb.beta.at(1).constant_term());
}

TEST_CASE("log slot sign alternates starting negative") {
    CHECK(log_sign(0) == -1.0);
    CHECK(log_sign(1) == 1.0);
    CHECK(log_sign(2) == -1.0);
    CHECK(log_sign(3) == 1.0);
}

TEST_CASE("numeric scale integral matches closed forms on nonnegative powers") {
    // constant: integral of e^{-sT} = 1/s
    CHECK(std::abs(laplace_transform_numeric(scalar_symbol({{0, 1.0}}), 2.0) - Complex(0.5, 0.0)) < 1e-9);
    // T: 1/s^2
    for (double s : {0.7, 1.3, 2.5}) {
        Complex v = laplace_transform_numeric(scalar_symbol({{1, 1.0}}), s);
        CHECK(std::abs(v - Complex(1.0 / (s * s), 0.0)) < 1e-8 / (s * s));
    }
    // T^2: 2/s^3, and linear combinations add up
    Complex mixed = laplace_transform_numeric(scalar_symbol({{2, 3.0}, {0, 4.0}}), 1.5);
    double expected = 3.0 * 2.0 / std::pow(1.5, 3) + 4.0 / 1.5;
    CHECK(std::abs(mixed - Complex(expected, 0.0)) < 1e-8);
}

TEST_CASE("numeric scale integral of the inverse power drifts like minus log") {
    // The regularized integral behaves like -log(s) for small s; the local
    // slope in log s tends to -1 with an O(s * cutoff) defect.
    LaurentSymbol a = scalar_symbol({{-1, 1.0}});
    double s1 = 2e-4, s2 = 1e-3;
    double v1 = laplace_transform_numeric(a, s1).real();
    double v2 = laplace_transform_numeric(a, s2).real();
    double slope = (v2 - v1) / (std::log(s2) - std::log(s1));
    CHECK(std::abs(slope + 1.0) < 1e-3);
}

TEST_CASE("numeric scale integral rejects bad parameters") {
    LaurentSymbol a = scalar_symbol({{0, 1.0}});
    CHECK_THROWS(laplace_transform_numeric(a, 0.0));
    CHECK_THROWS(laplace_transform_numeric(a, -1.0));
    CHECK_THROWS(laplace_transform_numeric(a, 1.0, 0.0));
}

TEST_CASE("diagonal restriction collapses paired variables") {
    // (x - y)^2 vanishes on the diagonal
    Jet x = Jet::variable(2, 4, 0, Complex(1.0, 0.0));
    Jet y = Jet::variable(2, 4, 1, Complex(1.0, 0.0));
    Jet d = jet_sub(x, y);
    CHECK(diagonal_restriction(jet_mul(d, d)).max_abs() == 0.0);
    // x * y restricts to x^2
    Jet xy = jet_mul(x, y);
    Jet r = diagonal_restriction(xy);
    CHECK(r.num_vars() == 1);
    CHECK(r.coeff({2}) == Complex(1.0, 0.0));
    CHECK(r.terms().size() == 1);
    // odd variable counts are rejected
    CHECK_THROWS(diagonal_restriction(Jet::constant(3, 2, Complex(1.0, 0.0))));
}

TEST_CASE("trace expansion weights diagonal constants by the measure") {
    // alpha_1 = 1 against the unit measure: a single simple pole of weight 1.
    LaurentSymbol unit = scalar_symbol({{0, 1.0}}, 2, 2);
    HolonomicSingularity h = kernel_expansion(unit, 1);
    EpsilonExpansion e = epsilon_trace_expansion(h, {1, 1.0});
    CHECK(std::abs(e.pole.at(1) - Complex(1.0, 0.0)) < 1e-14);

    // beta_0 = 1 against the three-sphere weight 2 pi^2.
    LaurentSymbol inv = scalar_symbol({{-1, 1.0}}, 2, 2);
    HolonomicSingularity hb = kernel_expansion(inv, 1);
    double w = 2.0 * M_PI * M_PI;
    EpsilonExpansion eb = epsilon_trace_expansion(hb, {1, w});
    CHECK(std::abs(eb.log.at(0) - Complex(w, 0.0)) < 1e-6);

    // measure dimension must match the jet pairing
    CHECK_THROWS(epsilon_trace_expansion(hb, {3, 1.0}));
}

TEST_CASE("mixed-basis fit recovers a synthetic expansion to high accuracy") {
    std::vector<std::pair<double, Complex>> samples;
    for (int i = 0; i < 40; ++i) {
        double eps = 1e-3 * std::pow(100.0, i / 39.0);
        double v = 2.0 / (eps * eps) + 3.0 / eps + 0.7 * std::log(eps) + 1.0 + eps;
        samples.push_back({eps, Complex(v, 0.0)});
    }
    EpsilonExpansion fit = fit_epsilon_expansion(samples, FitOptions{2, 2, 1});
    CHECK(std::abs(fit.pole.at(2) - Complex(2.0, 0.0)) < 1e-6);
    CHECK(std::abs(fit.pole.at(1) - Complex(3.0, 0.0)) < 1e-6);
    CHECK(std::abs(fit.log.at(0) - Complex(0.7, 0.0)) < 1e-6);
    CHECK(std::abs(fit.taylor.at(0) - Complex(1.0, 0.0)) < 1e-6);
    CHECK(std::abs(fit.taylor.at(1) - Complex(1.0, 0.0)) < 1e-6);
    CHECK(std::abs(fit.log.at(1)) < 1e-6);  // absent from the data
    CHECK(fit.residual < 1e-8);
    CHECK(fit.condition < 1e12);
}

TEST_CASE("circle heat sum shows a pure simple pole and no log") {
    // sum_{k>=1} e^{-k eps} = 1/(e^eps - 1) = 1/eps - 1/2 + eps/12 - ...
    std::vector<std::pair<double, Complex>> samples;
    for (int i = 0; i < 12; ++i) {
        double eps = 0.02 * std::pow(12.5, i / 11.0);
        double sum = 0.0;
        for (int k = 1;; ++k) {
            double term = std::exp(-k * eps);
            sum += term;
            if (term < 1e-18) break;
        }
        samples.push_back({eps, Complex(sum, 0.0)});
    }
    EpsilonExpansion fit = fit_epsilon_expansion(samples, FitOptions{2, 2, 1});
    CHECK(std::abs(fit.pole.at(1) - Complex(1.0, 0.0)) < 1e-4);
    CHECK(std::abs(fit.log.at(0)) < 1e-4);
    CHECK(std::abs(fit.taylor.at(0) - Complex(-0.5, 0.0)) < 1e-3);
}

TEST_CASE("fit of identically zero data returns zero coefficients") {
    std::vector<std::pair<double, Complex>> samples;
    for (int i = 0; i < 10; ++i) samples.push_back({0.01 * (i + 1), Complex(0.0, 0.0)});
    EpsilonExpansion fit = fit_epsilon_expansion(samples, FitOptions{2, 2, 1});
    for (const auto& [k, c] : fit.pole) CHECK(std::abs(c) == 0.0);
    for (const auto& [k, c] : fit.log) CHECK(std::abs(c) == 0.0);
    for (const auto& [k, c] : fit.taylor) CHECK(std::abs(c) == 0.0);
    CHECK(fit.residual == 0.0);
}

TEST_CASE("transform-then-fit inverts the index map on nonnegative degrees") {
    // a = T + 2: expansion has alpha_2 = 1, alpha_1 = 2; the numeric
    // transform is 1/s^2 + 2/s and the fit must hand the poles back.
    LaurentSymbol a = scalar_symbol({{1, 1.0}, {0, 2.0}});
    std::vector<std::pair<double, Complex>> samples;
    for (int i = 0; i < 12; ++i) {
        double eps = 0.05 * std::pow(10.0, i / 11.0);
        samples.push_back({eps, laplace_transform_numeric(a, eps)});
    }
    EpsilonExpansion fit = fit_epsilon_expansion(samples, FitOptions{2, 2, 1});
    HolonomicSingularity h = kernel_expansion(a, 2);
    CHECK(std::abs(fit.pole.at(2) - h.alpha.at(2).constant_term()) < 1e-4);
    CHECK(std::abs(fit.pole.at(1) - h.alpha.at(1).constant_term()) < 1e-4);
    CHECK(std::abs(fit.log.at(0)) < 1e-4);
}

TEST_CASE("transform-then-fit pins the log slot with its sign") {
    // a = T^{-1}: beta_0 = 1 and the transform behaves like -log(eps), so the
    // fitted log coefficient is log_sign(0) * beta_0 = -1.
    LaurentSymbol a = scalar_symbol({{-1, 1.0}});
    auto fit_with_cutoff = [&](double cutoff) {
        std::vector<std::pair<double, Complex>> samples;
        for (int i = 0; i < 10; ++i) {
            double eps = 0.01 * std::pow(12.0, i / 9.0);
            samples.push_back({eps, laplace_transform_numeric(a, eps, cutoff)});
        }
        // Cubic Taylor column: the transform's eps^3 term scales with
        // cutoff^3 and must not leak into the Log column.
        return fit_epsilon_expansion(samples, FitOptions{0, 3, 1});
    };
    EpsilonExpansion f1 = fit_with_cutoff(1.0);
    EpsilonExpansion f2 = fit_with_cutoff(2.0);
    HolonomicSingularity h = kernel_expansion(a, 1);
    Complex expected = log_sign(0) * h.beta.at(0).constant_term();
    CHECK(std::abs(f1.log.at(0) - expected) < 1e-3);
    // the log slot does not depend on the regularization cutoff
    CHECK(std::abs(f1.log.at(0) - f2.log.at(0)) < 1e-4);
    // the constant slot does (it absorbs log(cutoff))
    CHECK(std::abs(f1.taylor.at(0) - f2.taylor.at(0)) > 0.1);
}

TEST_CASE("fit failure modes: short data, duplicate nodes, bad eps") {
    std::vector<std::pair<double, Complex>> two = {{0.1, 1.0}, {0.2, 2.0}};
    CHECK_THROWS(fit_epsilon_expansion(two, FitOptions{2, 2, 1}));

    std::vector<std::pair<double, Complex>> dup(12, {0.1, Complex(1.0, 0.0)});
    CHECK_THROWS(fit_epsilon_expansion(dup, FitOptions{2, 2, 1}));

    std::vector<std::pair<double, Complex>> bad(12, {0.1, Complex(1.0, 0.0)});
    for (int i = 0; i < 12; ++i) bad[i].first = 0.01 * (i + 1);
    bad[3].first = -0.2;
    CHECK_THROWS(fit_epsilon_expansion(bad, FitOptions{2, 2, 1}));
}

TEST_CASE("symbol container enforces a single shape") {
    LaurentSymbol s;
    s.nvars = 2;
    s.order = 3;
    s.set(1, Jet::constant(2, 3, Complex(1.0, 0.0)));
    CHECK_THROWS(s.set(0, Jet::constant(1, 3, Complex(1.0, 0.0))));  // wrong variable count
    CHECK_THROWS(s.set(0, Jet::constant(2, 4, Complex(1.0, 0.0))));  // deeper than the symbol
    s.set(0, Jet::constant(2, 2, Complex(1.0, 0.0)));  // coarser truncations embed fine
    CHECK(s.top_degree() == 1);
    CHECK(s.bottom_degree() == 0);
    CHECK(s.get(-1) == nullptr);
    CHECK(s.get(1) != nullptr);
}
