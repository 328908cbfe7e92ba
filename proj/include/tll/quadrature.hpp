#pragma once

#include <functional>
#include <vector>

namespace tll {

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b] (Golub-Welsch).
Rule1D gauss_legendre(int n, double a, double b);

// Adaptive Simpson integration with a relative/absolute target; throws if the
// recursion depth is exhausted before the target is met.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, double abs_tol = 1e-300);

// Exponential integral E_n(x) = int_1^inf e^{-x t} t^{-n} dt for x > 0, n >= 1.
double expint_en(int n, double x);

}  // namespace tll
