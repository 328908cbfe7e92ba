#include "tll/projector.hpp"

#include <cmath>
#include <stdexcept>

namespace tll {

double projector_series_coefficient(int k) {
    if (k < 1) throw std::invalid_argument("projector_series_coefficient: k must be >= 1");
    // C(1) = 1, C(k+1) = C(k) * 2(2k+1)/(k+1).
    double c = 1.0;
    for (int j = 1; j < k; ++j) c *= 2.0 * (2 * j + 1) / (j + 1);
    return c;
}

Matrix residual(const Matrix& s0) {
    return s0 - s0 * s0;
}

namespace {

double spectral_radius(const Matrix& m) {
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Matrix correct_projector(const Matrix& s0, int k_max) {
    if (s0.rows() != s0.cols()) throw std::invalid_argument("correct_projector: matrix not square");
    if (k_max < 0) throw std::invalid_argument("correct_projector: k_max must be >= 0");
    Matrix r = residual(s0);
    if (!(spectral_radius(r) < 0.25))
        throw std::invalid_argument("correct_projector: S0 too far from a projector");
    const int n = static_cast<int>(s0.rows());
    Matrix sum = Matrix::Zero(n, n);
    Matrix rk = Matrix::Identity(n, n);
    for (int k = 1; k <= k_max; ++k) {
        rk = rk * r;
        sum += projector_series_coefficient(k) * rk;
    }
    Matrix one = Matrix::Identity(n, n);
    return s0 + (2.0 * s0 - one) * sum;
}

Matrix spectral_sign_projector(const Matrix& s0) {
    if (s0.rows() != s0.cols())
        throw std::invalid_argument("spectral_sign_projector: matrix not square");
    Eigen::ComplexEigenSolver<Matrix> es(2.0 * s0 - Matrix::Identity(s0.rows(), s0.cols()));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_sign_projector: eigendecomposition failed");
    Eigen::VectorXcd lam = es.eigenvalues();
    for (int i = 0; i < lam.size(); ++i) {
        if (std::abs(lam(i).real()) < 1e-12)
            throw std::invalid_argument(
                "spectral_sign_projector: eigenvalue on the critical line, sign undefined");
        lam(i) = (lam(i).real() > 0) ? Complex(1.0, 0.0) : Complex(-1.0, 0.0);
    }
    Matrix v = es.eigenvectors();
    Matrix sign = v * lam.asDiagonal() * v.inverse();
    return 0.5 * (sign + Matrix::Identity(s0.rows(), s0.cols()));
}

DerivativeIdentityReport derivative_identity_check(
    const std::function<Matrix(double)>& family, const std::vector<double>& t_samples, double h) {
    DerivativeIdentityReport rep;
    for (double t : t_samples) {
        Matrix s = family(t);
        double defect = (s * s - s).norm();
        if (defect > 1e-8 * std::max(1.0, s.norm()))
            throw std::invalid_argument("derivative_identity_check: family sample is not a projector");
        rep.max_projector_defect = std::max(rep.max_projector_defect, defect);

        Matrix ds = (family(t + h) - family(t - h)) / (2.0 * h);
        Matrix one = Matrix::Identity(s.rows(), s.cols());
        Matrix m = (2.0 * s - one) * ds;
        Matrix commutator = s * m - m * s;
        rep.max_identity_residual = std::max(rep.max_identity_residual, (ds - commutator).norm());
        rep.traces.push_back(s.trace().real());
    }
    for (double tr : rep.traces)
        rep.trace_variation = std::max(rep.trace_variation, std::abs(tr - rep.traces.front()));
    return rep;
}

// --- degree-filtered elements ----------------------------------------------

int GradedElement::top_degree() const {
    if (components.empty()) throw std::logic_error("graded element: top degree of zero element");
    return components.rbegin()->first;
}

void GradedElement::set(int degree, Complex value) {
    if (degree < d_min) return;
    if (std::abs(value) == 0.0)
        components.erase(degree);
    else
        components[degree] = value;
}

Complex GradedElement::get(int degree) const {
    auto it = components.find(degree);
    return it == components.end() ? Complex(0.0, 0.0) : it->second;
}

GradedElement graded_add(const GradedElement& a, const GradedElement& b) {
    GradedElement out;
    out.d_min = std::max(a.d_min, b.d_min);
    for (const auto& [d, v] : a.components) out.set(d, v);
    for (const auto& [d, v] : b.components) out.set(d, out.get(d) + v);
    return out;
}

GradedElement graded_sub(const GradedElement& a, const GradedElement& b) {
    return graded_add(a, graded_scale(b, Complex(-1.0, 0.0)));
}

GradedElement graded_scale(const GradedElement& a, Complex c) {
    GradedElement out;
    out.d_min = a.d_min;
    for (const auto& [d, v] : a.components) out.set(d, c * v);
    return out;
}

GradedElement graded_mul(const GradedElement& a, const GradedElement& b) {
    GradedElement out;
    out.d_min = std::max(a.d_min, b.d_min);
    for (const auto& [da, va] : a.components)
        for (const auto& [db, vb] : b.components) {
            int d = da + db;
            if (d < out.d_min) continue;
            out.set(d, out.get(d) + va * vb);
        }
    return out;
}

double graded_norm(const GradedElement& a) {
    double m = 0.0;
    for (const auto& [d, v] : a.components) m = std::max(m, std::abs(v));
    return m;
}

GradedElement graded_residual(const GradedElement& s0) {
    return graded_sub(s0, graded_mul(s0, s0));
}

GradedElement graded_correct_projector(const GradedElement& s0, int k_max) {
    GradedElement r = graded_residual(s0);
    if (!r.empty() && r.top_degree() >= 0)
        throw std::invalid_argument(
            "graded_correct_projector: residual has a component of degree >= 0");
    GradedElement sum;
    sum.d_min = s0.d_min;
    GradedElement rk;
    rk.d_min = s0.d_min;
    rk.set(0, Complex(1.0, 0.0));
    for (int k = 1; k <= k_max; ++k) {
        rk = graded_mul(rk, r);
        if (rk.empty()) break;
        sum = graded_add(sum, graded_scale(rk, Complex(projector_series_coefficient(k), 0.0)));
    }
    GradedElement two_s0_minus_1 = graded_scale(s0, Complex(2.0, 0.0));
    two_s0_minus_1.set(0, two_s0_minus_1.get(0) - Complex(1.0, 0.0));
    return graded_add(s0, graded_mul(two_s0_minus_1, sum));
}

// --- symbols on the fiber product --------------------------------------------

SymbolOnC SymbolOnC::constant(const SymbolGrid& g, Complex v, bool normalized) {
    SymbolOnC s;
    s.grid = g;
    s.normalized_frame = normalized;
    s.values.assign(g.num_base, std::vector<std::vector<Complex>>(
                                    g.fiber_out, std::vector<Complex>(g.fiber_in, v)));
    return s;
}

Complex& SymbolOnC::at(int b, int i, int j) { return values.at(b).at(i).at(j); }
Complex SymbolOnC::at(int b, int i, int j) const { return values.at(b).at(i).at(j); }

SymbolOnC product_symbol(const SymbolGrid& g, const std::vector<std::vector<Complex>>& f,
                         const std::vector<std::vector<Complex>>& gfun) {
    if (static_cast<int>(f.size()) != g.num_base || static_cast<int>(gfun.size()) != g.num_base)
        throw std::invalid_argument("product_symbol: factor tables must cover every base label");
    SymbolOnC s = SymbolOnC::constant(g, Complex(0.0, 0.0));
    for (int b = 0; b < g.num_base; ++b) {
        if (static_cast<int>(f[b].size()) != g.fiber_out ||
            static_cast<int>(gfun[b].size()) != g.fiber_in)
            throw std::invalid_argument("product_symbol: factor tables must cover every fiber point");
        for (int i = 0; i < g.fiber_out; ++i)
            for (int j = 0; j < g.fiber_in; ++j) s.at(b, i, j) = f[b][i] * gfun[b][j];
    }
    return s;
}

SymbolOnC symbol_compose(const SymbolOnC& a, const SymbolOnC& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("symbol_compose: grid mismatch");
    if (!a.normalized_frame || !b.normalized_frame)
        throw std::invalid_argument("symbol_compose: symbols must be in the normalized frame");
    SymbolOnC out = SymbolOnC::constant(a.grid, Complex(0.0, 0.0));
    for (int bl = 0; bl < a.grid.num_base; ++bl)
        for (int i = 0; i < a.grid.fiber_out; ++i)
            for (int j = 0; j < a.grid.fiber_in; ++j)
                out.at(bl, i, j) = a.at(bl, i, 0) * b.at(bl, 0, j);
    return out;
}

SymbolOnC frame_normalize(const SymbolOnC& a, const SymbolOnC& J) {
    if (!(a.grid == J.grid)) throw std::invalid_argument("frame_normalize: grid mismatch");
    double scale = 0.0;
    for (int b = 0; b < J.grid.num_base; ++b)
        for (int i = 0; i < J.grid.fiber_out; ++i)
            for (int j = 0; j < J.grid.fiber_in; ++j) scale = std::max(scale, std::abs(J.at(b, i, j)));
    for (int b = 0; b < J.grid.num_base; ++b) {
        Complex j0 = J.at(b, 0, 0);
        if (std::abs(j0) < 1e-14 * std::max(1.0, scale))
            throw std::invalid_argument("frame_normalize: multiplier vanishes at a base point");
        for (int i = 0; i < J.grid.fiber_out; ++i)
            if (std::abs(J.at(b, i, 0) - j0) > 1e-8 * std::max(1.0, scale))
                throw std::invalid_argument(
                    "frame_normalize: multiplier violates the associativity constraint");
        for (int j = 0; j < J.grid.fiber_in; ++j)
            if (std::abs(J.at(b, 0, j) - j0) > 1e-8 * std::max(1.0, scale))
                throw std::invalid_argument(
                    "frame_normalize: multiplier violates the associativity constraint");
        for (int i = 0; i < J.grid.fiber_out; ++i)
            for (int j = 0; j < J.grid.fiber_in; ++j)
                if (std::abs(J.at(b, i, j)) < 1e-14 * std::max(1.0, scale))
                    throw std::invalid_argument("frame_normalize: multiplier vanishes on the grid");
    }
    SymbolOnC out = a;
    out.normalized_frame = true;
    for (int b = 0; b < a.grid.num_base; ++b) {
        Complex j0 = J.at(b, 0, 0);
        for (int i = 0; i < a.grid.fiber_out; ++i)
            for (int j = 0; j < a.grid.fiber_in; ++j)
                out.at(b, i, j) = a.at(b, i, j) * J.at(b, i, j) / (j0 * j0);
    }
    return out;
}

double symbol_idempotence_defect(const SymbolOnC& a) {
    double m = 0.0;
    SymbolOnC aa = symbol_compose(a, a);
    for (int b = 0; b < a.grid.num_base; ++b)
        for (int i = 0; i < a.grid.fiber_out; ++i)
            for (int j = 0; j < a.grid.fiber_in; ++j)
                m = std::max(m, std::abs(aa.at(b, i, j) - a.at(b, i, j)));
    return m;
}

std::vector<SymbolOnC> deform_idempotent_symbols(
    const SymbolGrid& g, const std::vector<std::vector<Complex>>& f0,
    const std::vector<std::vector<Complex>>& g0, const std::vector<std::vector<Complex>>& f1,
    const std::vector<std::vector<Complex>>& g1, int steps) {
    if (steps < 1) throw std::invalid_argument("deform_idempotent_symbols: steps must be >= 1");
    std::vector<SymbolOnC> path;
    for (int s = 0; s <= steps; ++s) {
        double t = static_cast<double>(s) / steps;
        std::vector<std::vector<Complex>> ft(g.num_base), gt(g.num_base);
        for (int b = 0; b < g.num_base; ++b) {
            ft[b].resize(g.fiber_out);
            gt[b].resize(g.fiber_in);
            for (int i = 0; i < g.fiber_out; ++i) ft[b][i] = (1.0 - t) * f0[b][i] + t * f1[b][i];
            for (int j = 0; j < g.fiber_in; ++j) gt[b][j] = (1.0 - t) * g0[b][j] + t * g1[b][j];
        }
        // Renormalize so the base value is exactly 1.
        for (int b = 0; b < g.num_base; ++b) {
            Complex c = ft[b][0] * gt[b][0];
            if (std::abs(c) < 1e-12)
                throw std::runtime_error(
                    "deform_idempotent_symbols: path leaves the elliptic locus; choose another "
                    "interpolation");
            for (int i = 0; i < g.fiber_out; ++i) ft[b][i] /= c;
        }
        SymbolOnC sym = product_symbol(g, ft, gt);
        sym.normalized_frame = true;
        path.push_back(std::move(sym));
    }
    return path;
}

}  // namespace tll
