#pragma once

// Laurent symbols in the scale parameter T with jet coefficients, their
// singularity expansions (pole + logarithmic parts), a numeric regularized
// Laplace transform, and a least-squares fitter for epsilon-expansions.

#include <map>
#include <vector>

#include "tll/jet.hpp"

namespace tll {

template <class S>
struct LaurentSymbolT {
    int nvars = 0;
    int order = 0;                  // truncation order of the coefficient jets
    std::map<int, JetT<S>> terms;   // T-degree -> coefficient jet

    void set(int degree, JetT<S> jet) {
        if (jet.empty()) return;
        if (jet.num_vars() != nvars || jet.order() > order)
            throw std::invalid_argument("laurent symbol: coefficient jet shape mismatch");
        terms[degree] = std::move(jet);
    }
    const JetT<S>* get(int degree) const {
        auto it = terms.find(degree);
        return it == terms.end() ? nullptr : &it->second;
    }
    int top_degree() const { return terms.empty() ? 0 : terms.rbegin()->first; }
    int bottom_degree() const { return terms.empty() ? 0 : terms.begin()->first; }
    bool empty() const { return terms.empty(); }
};

using LaurentSymbol = LaurentSymbolT<Complex>;
using LaurentSymbolQ = LaurentSymbolT<ComplexRational>;

// Singularity data of a kernel along the diagonal: pole coefficients
// alpha_k (k = 1..n) and log coefficients beta_k (k >= 0), all jets.
template <class S>
struct HolonomicSingularityT {
    int n = 0;
    std::map<int, JetT<S>> alpha;
    std::map<int, JetT<S>> beta;
};

using HolonomicSingularity = HolonomicSingularityT<Complex>;
using HolonomicSingularityQ = HolonomicSingularityT<ComplexRational>;

// Relation between the T-side symbol and the singularity data, as dictated
// by  int_0^inf T^{k} e^{-Tq} dT = k! q^{-k-1}  and, for negative degrees,
// by the regularized transform below:
//   alpha_k = (k-1)! a_{k-1}        for k = 1..n,
//   beta_k  = a_{-1-k} / k!         for k >= 0.
// The fitted coefficient of eps^k Log(eps) in the regularized transform of
// T^{-1-k} is (-1)^{k+1} / k!; that measured sign convention is exposed as
// log_sign(k) and asserted in the tests.
template <class S>
HolonomicSingularityT<S> kernel_expansion(const LaurentSymbolT<S>& symbol, int n);

inline double log_sign(int k) { return (k % 2 == 0) ? -1.0 : 1.0; }

// Numeric oracle: evaluate int e^{-sT} a(T) dT at s = q + eps > 0 by adaptive
// quadrature, using the constant terms of the coefficient jets.  Degrees
// <= -1 integrate from `cutoff` upward (regularization); the Log coefficient
// of the result is cutoff-independent.
Complex laplace_transform_numeric(const LaurentSymbol& symbol, double s,
                                  double cutoff = 1.0, double rel_tol = 1e-9);

// A diagonal measure: the manifold dimension (coefficient jets live in
// 2*dim variables) and the total weight of the quadrature rule.
struct DiagonalMeasure {
    int dim = 0;
    double total_weight = 0.0;
};

struct EpsilonExpansion {
    std::map<int, Complex> pole;    // k >= 1: coefficient of eps^{-k}
    std::map<int, Complex> log;     // k >= 0: coefficient of eps^k Log(eps)
    std::map<int, Complex> taylor;  // k >= 0: coefficient of eps^k
    double residual = 0.0;          // max abs fit residual (0 for exact paths)
    double condition = 0.0;         // scaled design-matrix condition number
};

// Restriction of jets in (x, y) to the diagonal y = x.
template <class S>
JetT<S> diagonal_restriction(const JetT<S>& jet);

// Integrate the diagonal values of the singularity data against a measure.
// The library kernels are homogeneous (the base point is moved by the group
// action), so the diagonal value is the constant term of the restriction.
EpsilonExpansion epsilon_trace_expansion(const HolonomicSingularity& sing,
                                         const DiagonalMeasure& measure);

struct FitOptions {
    int max_pole = 2;
    int max_taylor = 2;
    int max_log = 1;  // Log columns eps^k Log(eps), k = 0..max_log
};

// Least-squares fit of samples (eps, value) in the mixed basis
// {eps^{-k}} + {eps^k Log eps} + {eps^k}, with column scaling; rejects
// condition numbers above 1e12.
EpsilonExpansion fit_epsilon_expansion(const std::vector<std::pair<double, Complex>>& samples,
                                       const FitOptions& opt);

}  // namespace tll
