#include "tll/laurent.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "tll/quadrature.hpp"

namespace tll {

template <class S>
HolonomicSingularityT<S> kernel_expansion(const LaurentSymbolT<S>& symbol, int n) {
    if (n < 1) throw std::invalid_argument("kernel_expansion: n must be positive");
    if (!symbol.empty() && symbol.top_degree() > n - 1)
        throw std::invalid_argument("kernel_expansion: symbol degree exceeds n-1");
    HolonomicSingularityT<S> out;
    out.n = n;
    for (const auto& [deg, jet] : symbol.terms) {
        if (deg >= 0) {
            // T^deg integrates to deg! (q)^{-deg-1}
            long long fact = 1;
            for (int i = 2; i <= deg; ++i) fact *= i;
            out.alpha[deg + 1] = jet_scale(jet, scalar_ops<S>::from_int(fact));
        } else {
            int k = -1 - deg;  // T^{-1-k} carries the eps^k Log eps piece
            long long fact = 1;
            for (int i = 2; i <= k; ++i) fact *= i;
            out.beta[k] = jet_scale(jet, scalar_ops<S>::one() / scalar_ops<S>::from_int(fact));
        }
    }
    return out;
}

template HolonomicSingularityT<Complex> kernel_expansion(const LaurentSymbolT<Complex>&, int);
template HolonomicSingularityT<ComplexRational> kernel_expansion(const LaurentSymbolT<ComplexRational>&, int);

Complex laplace_transform_numeric(const LaurentSymbol& symbol, double s, double cutoff,
                                  double rel_tol) {
    if (s <= 0) throw std::invalid_argument("laplace_transform_numeric: need q + eps > 0");
    if (cutoff <= 0) throw std::invalid_argument("laplace_transform_numeric: cutoff must be positive");
    Complex acc = 0.0;
    for (const auto& [deg, jet] : symbol.terms) {
        Complex a = jet.constant_term();
        if (a == Complex(0.0)) continue;
        double t_max = (60.0 + 6.0 * std::abs(deg)) / s;  // tail < 1e-24 relative
        auto integrand = [&](double t) { return std::pow(t, deg) * std::exp(-s * t); };
        double lo = deg >= 0 ? 0.0 : cutoff;
        double val = adaptive_simpson(integrand, lo, std::max(t_max, lo + 1.0), rel_tol);
        acc += a * val;
    }
    return acc;
}

template <class S>
JetT<S> diagonal_restriction(const JetT<S>& jet) {
    if (jet.num_vars() % 2 != 0)
        throw std::invalid_argument("diagonal_restriction: jet must live in (x, y) pairs");
    int d = jet.num_vars() / 2;
    std::vector<JetT<S>> args;
    args.reserve(jet.num_vars());
    for (int i = 0; i < jet.num_vars(); ++i)
        args.push_back(JetT<S>::variable(d, jet.order(), i % d, scalar_ops<S>::one()));
    return jet_compose(jet, args);
}

template JetT<Complex> diagonal_restriction(const JetT<Complex>&);
template JetT<ComplexRational> diagonal_restriction(const JetT<ComplexRational>&);

EpsilonExpansion epsilon_trace_expansion(const HolonomicSingularity& sing,
                                         const DiagonalMeasure& measure) {
    EpsilonExpansion out;
    auto integrate = [&](const Jet& jet) -> Complex {
        if (jet.num_vars() != 2 * measure.dim)
            throw std::invalid_argument("epsilon_trace_expansion: measure/jet dimension mismatch");
        return diagonal_restriction(jet).constant_term() * measure.total_weight;
    };
    for (const auto& [k, jet] : sing.alpha) out.pole[k] = integrate(jet);
    for (const auto& [k, jet] : sing.beta) out.log[k] = integrate(jet);
    return out;
}

EpsilonExpansion fit_epsilon_expansion(const std::vector<std::pair<double, Complex>>& samples,
                                       const FitOptions& opt) {
    const int n_pole = opt.max_pole;
    const int n_log = opt.max_log + 1;
    const int n_tay = opt.max_taylor + 1;
    const int cols = n_pole + n_log + n_tay;
    const int rows = static_cast<int>(samples.size());
    if (rows < cols)
        throw std::invalid_argument("fit_epsilon_expansion: fewer samples than basis functions");
    for (const auto& [eps, v] : samples)
        if (eps <= 0) throw std::invalid_argument("fit_epsilon_expansion: eps must be positive");

    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXcd y(rows);
    for (int i = 0; i < rows; ++i) {
        double eps = samples[i].first;
        int c = 0;
        for (int k = opt.max_pole; k >= 1; --k) A(i, c++) = std::pow(eps, -k);
        for (int k = 0; k <= opt.max_log; ++k) A(i, c++) = std::pow(eps, k) * std::log(eps);
        for (int k = 0; k <= opt.max_taylor; ++k) A(i, c++) = std::pow(eps, k);
        y(i) = samples[i].second;
    }

    // Column scaling keeps the mixed basis from swamping the QR.
    Eigen::VectorXd scale(cols);
    for (int c = 0; c < cols; ++c) {
        scale(c) = A.col(c).norm();
        if (scale(c) == 0.0) scale(c) = 1.0;
        A.col(c) /= scale(c);
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double cond = svd.singularValues()(0) / svd.singularValues()(cols - 1);
    if (!std::isfinite(cond) || cond > 1e12)
        throw std::runtime_error("fit_epsilon_expansion: ill-conditioned fit; adjust eps range or model orders");

    // JacobiSVD on a real matrix solves real systems; run real/imag parts.
    Eigen::VectorXd cr = svd.solve(y.real().eval());
    Eigen::VectorXd ci = svd.solve(y.imag().eval());
    Eigen::VectorXcd coef(cols);
    for (int c = 0; c < cols; ++c) coef(c) = Complex(cr(c), ci(c)) / scale(c);

    EpsilonExpansion out;
    out.condition = cond;
    int c = 0;
    for (int k = opt.max_pole; k >= 1; --k) out.pole[k] = coef(c++);
    for (int k = 0; k <= opt.max_log; ++k) out.log[k] = coef(c++);
    for (int k = 0; k <= opt.max_taylor; ++k) out.taylor[k] = coef(c++);

    double resid = 0.0;
    for (int i = 0; i < rows; ++i) {
        double eps = samples[i].first;
        Complex model = 0.0;
        for (const auto& [k, v] : out.pole) model += v * std::pow(eps, -k);
        for (const auto& [k, v] : out.log) model += v * std::pow(eps, k) * std::log(eps);
        for (const auto& [k, v] : out.taylor) model += v * std::pow(eps, k);
        resid = std::max(resid, std::abs(model - samples[i].second));
    }
    out.residual = resid;
    return out;
}

}  // namespace tll
