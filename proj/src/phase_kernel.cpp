#include "tll/phase_kernel.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tll {

namespace {

using JetMat = std::vector<std::vector<Jet>>;

std::vector<int> identity_map(int n) {
    std::vector<int> m(n);
    for (int i = 0; i < n; ++i) m[i] = i;
    return m;
}

// Quadratic-form coefficient c of x_i x_j (i <= j) read off the jet.
Complex quad_coeff(const Jet& q, int i, int j) {
    std::vector<int> e(q.num_vars(), 0);
    e[i] += 1;
    e[j] += 1;
    return q.coeff(e);
}

Complex linear_coeff(const Jet& q, int i) {
    std::vector<int> e(q.num_vars(), 0);
    e[i] = 1;
    return q.coeff(e);
}

// Determinant of a small jet matrix by cofactor expansion.
Jet jet_det(const JetMat& m) {
    const int n = static_cast<int>(m.size());
    if (n == 1) return m[0][0];
    Jet acc(m[0][0].num_vars(), m[0][0].order());
    for (int c = 0; c < n; ++c) {
        if (m[0][c].empty()) continue;
        JetMat minor(n - 1);
        for (int r = 1; r < n; ++r)
            for (int cc = 0; cc < n; ++cc)
                if (cc != c) minor[r - 1].push_back(m[r][cc]);
        Jet term = jet_mul(m[0][c], jet_det(minor));
        acc = (c % 2 == 0) ? jet_add(acc, term) : jet_sub(acc, term);
    }
    return acc;
}

// Continuous argument of det((1-t)I + t*H0) along t in [0,1].  Keeps the
// square root of the Gaussian determinant on the branch connected to the
// identity; throws if the homotopy hits a (near-)singular matrix.
double track_det_arg(const Eigen::MatrixXcd& H0) {
    const int steps = 1024;
    const int n = static_cast<int>(H0.rows());
    Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
    double theta = 0.0;
    Complex prev(1.0, 0.0);
    for (int s = 1; s <= steps; ++s) {
        double t = static_cast<double>(s) / steps;
        Complex det = Eigen::MatrixXcd((1.0 - t) * I + t * H0).determinant();
        if (std::abs(det) < 1e-12)
            throw std::runtime_error(
                "laplace_expansion: Hessian determinant homotopy crosses zero (branch cut)");
        double dphi = std::arg(det / prev);
        if (std::abs(dphi) > 1.5)
            throw std::runtime_error(
                "laplace_expansion: Hessian determinant winds too fast to track the branch");
        theta += dphi;
        prev = det;
    }
    return theta;
}

}  // namespace

PhaseReport validate_phase(const PhaseKernel& k) {
    PhaseReport rep;
    const int d = k.dims;
    const Jet& q = k.phase;
    if (d <= 0 || q.num_vars() != 2 * d)
        throw std::invalid_argument("validate_phase: phase must live in 2*dims variables");
    const double scale = std::max(1.0, q.max_abs());

    // q(x,x) as a jet in x.
    std::vector<Jet> args;
    for (int i = 0; i < 2 * d; ++i)
        args.push_back(Jet::variable(d, q.order(), i % d, Complex(1.0, 0.0)));
    rep.diagonal_residual = jet_compose(q, args).max_abs();

    // (d_x q + d_y q)(x,x) componentwise.
    double grad = 0.0;
    for (int i = 0; i < d; ++i) {
        Jet g = jet_add(jet_diff(q, i), jet_diff(q, d + i));
        std::vector<Jet> ar;
        for (int j = 0; j < 2 * d; ++j)
            ar.push_back(Jet::variable(d, g.order(), j % d, Complex(1.0, 0.0)));
        grad = std::max(grad, jet_compose(g, ar).max_abs());
    }
    rep.gradient_residual = grad;

    // Transverse real Hessian: quadratic form of Re q(x, x - w) in w at x = 0,
    // i.e. the y-block quadratic part of q.
    Eigen::MatrixXd form(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            double c = quad_coeff(q, d + i, d + j).real();
            form(i, j) = form(j, i) = (i == j) ? c : c / 2.0;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form);
    rep.c = es.eigenvalues().minCoeff();

    std::ostringstream msg;
    rep.ok = true;
    if (rep.diagonal_residual > 1e-9 * scale) {
        rep.ok = false;
        msg << "phase does not vanish on the diagonal (residual " << rep.diagonal_residual << "); ";
    }
    if (rep.gradient_residual > 1e-9 * scale) {
        rep.ok = false;
        msg << "d_x q != -d_y q on the diagonal (residual " << rep.gradient_residual << "); ";
    }
    if (!(rep.c > 1e-9)) {
        rep.ok = false;
        msg << "transverse real Hessian not positive definite (min eigenvalue " << rep.c << "); ";
    }
    rep.message = rep.ok ? "ok" : msg.str();
    return rep;
}

std::vector<Jet> critical_point(const Jet& total_phase, int n_exterior, int n_interior) {
    if (n_exterior < 0 || n_interior <= 0 || n_exterior + n_interior != total_phase.num_vars())
        throw std::invalid_argument("critical_point: variable split does not match the phase");
    const int N = total_phase.order();
    const double scale = std::max(1.0, total_phase.max_abs());

    std::vector<Jet> grad;
    for (int j = 0; j < n_interior; ++j) grad.push_back(jet_diff(total_phase, n_exterior + j));
    for (const Jet& g : grad)
        if (std::abs(g.constant_term()) > 1e-9 * scale)
            throw std::invalid_argument("critical_point: interior gradient does not vanish at the origin");

    Eigen::MatrixXcd H0(n_interior, n_interior);
    for (int j = 0; j < n_interior; ++j)
        for (int kk = 0; kk < n_interior; ++kk)
            H0(j, kk) = linear_coeff(grad[j], n_exterior + kk);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(H0);
    if (!lu.isInvertible()) throw std::runtime_error("critical_point: singular interior Hessian");
    Eigen::MatrixXcd Hinv = lu.inverse();

    const int solord = std::max(N - 1, 0);
    std::vector<Jet> u(n_interior, Jet(n_exterior, solord));
    // Modified Newton with the base-point Hessian gains at least one order of
    // accuracy per sweep.
    for (int it = 0; it <= N; ++it) {
        std::vector<Jet> args;
        for (int i = 0; i < n_exterior; ++i)
            args.push_back(Jet::variable(n_exterior, solord, i, Complex(1.0, 0.0)));
        for (int j = 0; j < n_interior; ++j) args.push_back(u[j]);
        std::vector<Jet> gv;
        double res = 0.0;
        for (int j = 0; j < n_interior; ++j) {
            gv.push_back(jet_compose(grad[j], args));
            res = std::max(res, gv.back().max_abs());
        }
        if (res < 1e-14 * scale) break;
        for (int j = 0; j < n_interior; ++j) {
            Jet delta(n_exterior, solord);
            for (int kk = 0; kk < n_interior; ++kk)
                delta = jet_add(delta, jet_scale(gv[kk], Hinv(j, kk)));
            u[j] = jet_sub(u[j], delta);
        }
    }
    return u;
}

namespace detail {

std::map<int, Jet> laplace_interior(const Jet& phase, const std::map<int, Jet>& amp,
                                    int n_exterior, int n_interior, int depth, bool strict,
                                    Jet* critical_value, std::optional<ExtCap> cap) {
    const int nE = n_exterior, nI = n_interior, NV = nE + nI;
    const int N = phase.order();
    const double scale = std::max(1.0, phase.max_abs());

    // Recenter the interior variables at the critical point.
    std::vector<Jet> ustar = critical_point(phase, nE, nI);
    auto shift_all = [&](Jet f) {
        for (int j = 0; j < nI; ++j) {
            if (ustar[j].empty()) continue;
            Jet s = ustar[j].embedded(NV, identity_map(nE));
            f = jet_shift_var(f, nE + j, s, cap);
        }
        return f;
    };
    Jet ph = shift_all(phase);

    // Split the recentered phase by interior degree: constant = critical
    // value, linear must vanish, quadratic = Hessian, the rest is the
    // anharmonic remainder W.
    std::vector<std::pair<MonoKey, Complex>> w_terms;
    JetMat H(nI, std::vector<Jet>(nI, Jet(nE, N)));
    std::vector<std::vector<std::vector<std::pair<MonoKey, Complex>>>> h_terms(
        nI, std::vector<std::vector<std::pair<MonoKey, Complex>>>(nI));
    std::vector<std::pair<MonoKey, Complex>> crit_terms;
    double linear_residual = 0.0;
    for (const auto& [key, val] : ph.terms()) {
        int ext_deg = mono_ext_degree(key, nE);
        int int_deg = mono_degree(key) - ext_deg;
        if (int_deg == 0) {
            crit_terms.push_back({key, val});
        } else if (int_deg == 1) {
            linear_residual = std::max(linear_residual, std::abs(val));
        } else if (int_deg == 2) {
            int j = -1, kk = -1;
            for (int t = 0; t < nI; ++t) {
                int e = mono_exp(key, nE + t);
                if (e == 1) (j < 0 ? j : kk) = t;
                if (e == 2) j = kk = t;
            }
            MonoKey head = key - (MonoKey(2) << 56);
            head -= MonoKey(1) << (4 * (nE + j));
            head -= MonoKey(1) << (4 * (nE + kk));
            // phase = ... + (1/2) sum_{jk} H_jk v_j v_k with H symmetric
            Complex hval = (j == kk) ? Complex(2.0, 0.0) * val : val;
            h_terms[j][kk].push_back({head, hval});
        } else {
            w_terms.push_back({key, val});
        }
    }
    if (linear_residual > 1e-7 * scale)
        throw std::runtime_error("laplace_expansion: recentering left an interior linear term");
    Jet crit = jet_head_restrict(Jet::from_terms(NV, N, std::move(crit_terms)), nE);
    if (critical_value) *critical_value = crit;
    for (int j = 0; j < nI; ++j)
        for (int kk = j; kk < nI; ++kk) {
            Jet h = Jet::from_terms(nE, N, std::move(h_terms[j][kk]));
            H[j][kk] = h;
            if (kk != j) H[kk][j] = h;
        }
    Jet W = Jet::from_terms(NV, N, std::move(w_terms), cap);

    Eigen::MatrixXcd H0(nI, nI);
    for (int j = 0; j < nI; ++j)
        for (int kk = 0; kk < nI; ++kk) H0(j, kk) = H[j][kk].constant_term();
    if (strict) {
        Eigen::MatrixXd ReH = H0.real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (ReH + ReH.transpose()));
        if (!(es.eigenvalues().minCoeff() > 0))
            throw std::runtime_error(
                "laplace_expansion: interior Hessian real part not positive definite");
    }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(H0);
    if (!lu.isInvertible())
        throw std::runtime_error("laplace_expansion: singular interior Hessian");
    Eigen::MatrixXcd Hinv = lu.inverse();

    // Covariance jets C(x) = H(x)^{-1} by a terminating Neumann series:
    // C = sum_k (-Hinv Hv)^k Hinv with Hv = H - H0 of valuation >= 1.
    auto num_mat = [&](const Eigen::MatrixXcd& M) {
        JetMat J(nI, std::vector<Jet>(nI, Jet(nE, N)));
        for (int j = 0; j < nI; ++j)
            for (int kk = 0; kk < nI; ++kk) J[j][kk] = Jet::constant(nE, N, M(j, kk));
        return J;
    };
    auto mat_mul = [&](const JetMat& A, const JetMat& B) {
        JetMat R(nI, std::vector<Jet>(nI, Jet(nE, N)));
        for (int j = 0; j < nI; ++j)
            for (int kk = 0; kk < nI; ++kk)
                for (int t = 0; t < nI; ++t)
                    if (!A[j][t].empty() && !B[t][kk].empty())
                        R[j][kk] = jet_add(R[j][kk], jet_mul(A[j][t], B[t][kk]));
        return R;
    };
    auto mat_empty = [&](const JetMat& A) {
        for (const auto& row : A)
            for (const auto& e : row)
                if (!e.empty()) return false;
        return true;
    };
    JetMat Hv = H;
    for (int j = 0; j < nI; ++j)
        for (int kk = 0; kk < nI; ++kk)
            Hv[j][kk] = jet_sub(H[j][kk], Jet::constant(nE, N, H0(j, kk)));
    JetMat HinvJ = num_mat(Hinv);
    JetMat step = num_mat(-Hinv);
    step = mat_mul(step, Hv);  // -Hinv*Hv, valuation >= 1
    JetMat C = HinvJ;
    JetMat acc_pow = HinvJ;
    for (int k = 1; k <= N; ++k) {
        acc_pow = mat_mul(step, acc_pow);
        if (mat_empty(acc_pow)) break;
        for (int j = 0; j < nI; ++j)
            for (int kk = 0; kk < nI; ++kk) C[j][kk] = jet_add(C[j][kk], acc_pow[j][kk]);
    }

    // Gaussian prefactor (2 pi)^{nI/2} det(H(x))^{-1/2}, branch tracked from
    // the identity matrix.
    Jet D = jet_det(H);
    Complex D0 = D.constant_term();
    double theta = track_det_arg(H0);
    Complex scalar_invsqrt = std::polar(1.0 / std::sqrt(std::abs(D0)), -theta / 2.0);
    Jet pre = jet_scale(jet_invert(jet_sqrt(jet_scale(D, Complex(1.0, 0.0) / D0))),
                        scalar_invsqrt * std::pow(2.0 * std::numbers::pi, nI / 2.0));

    std::map<int, Jet> out;
    if (amp.empty()) return out;
    const int dtop = amp.rbegin()->first;
    const int min_keep = dtop - depth;

    JetMat Cemb(nI, std::vector<Jet>(nI));
    for (int j = 0; j < nI; ++j)
        for (int kk = 0; kk < nI; ++kk) Cemb[j][kk] = C[j][kk].embedded(NV, identity_map(nE));

    std::vector<int> zeros(nI, 0);
    auto max_int_deg = [&](const Jet& f) {
        int m = 0;
        for (const auto& [key, val] : f.terms()) {
            (void)val;
            m = std::max(m, mono_degree(key) - mono_ext_degree(key, nE));
        }
        return m;
    };

    std::map<int, Jet> amp_shifted;
    for (const auto& [deg, A] : amp) amp_shifted.emplace(deg, shift_all(A));

    Jet Wp = Jet::constant(NV, N, Complex(1.0, 0.0));
    double inv_fact = 1.0;
    const int p_max = 2 * depth;
    for (int p = 0; p <= p_max; ++p) {
        if (p > 0) {
            Wp = jet_mul(Wp, W, cap);
            if (Wp.empty()) break;
            inv_fact /= p;
        }
        const Complex fac = (p % 2 ? -inv_fact : inv_fact);
        for (const auto& [deg, As] : amp_shifted) {
            Jet B = jet_scale(jet_mul(Wp, As, cap), fac);
            int r = 0;
            while (true) {
                if (deg + p - r < min_keep) break;
                Jet contrib = jet_tail_coeff(B, nE, zeros);
                if (!contrib.empty()) {
                    auto it = out.find(deg + p - r);
                    if (it == out.end())
                        out.emplace(deg + p - r, contrib);
                    else
                        it->second = jet_add(it->second, contrib);
                }
                if (B.empty() || B.order() < 2 || max_int_deg(B) < 2) break;
                // B <- L(B) / (2 (r+1)), L = sum C_jk d_j d_k
                Jet next(NV, B.order() - 2);
                for (int j = 0; j < nI; ++j)
                    for (int kk = j; kk < nI; ++kk) {
                        if (Cemb[j][kk].empty()) continue;
                        Jet dd = jet_diff(jet_diff(B, nE + j), nE + kk);
                        if (dd.empty()) continue;
                        Jet piece = jet_mul(dd, Cemb[j][kk], cap);
                        if (j != kk) piece = jet_scale(piece, Complex(2.0, 0.0));
                        next = jet_add(next, piece);
                    }
                B = jet_scale(next, Complex(1.0 / (2.0 * (r + 1)), 0.0));
                ++r;
            }
        }
    }

    for (auto& [deg, jet] : out) jet = jet_mul(jet, pre, cap);
    return out;
}

double jet_divide(const Jet& p, const Jet& q, Jet& quotient) {
    check_same_space(p, q, "jet_divide");
    const int nv = p.num_vars();
    const int N = p.order();

    // Enumerate all monomials of the space up to the target order.
    std::vector<MonoKey> monos;
    std::vector<int> exps(nv, 0);
    std::function<void(int, int)> gen = [&](int var, int left) {
        if (var == nv) {
            monos.push_back(mono_pack(exps));
            return;
        }
        for (int e = 0; e <= left; ++e) {
            exps[var] = e;
            gen(var + 1, left - e);
        }
        exps[var] = 0;
    };
    gen(0, N);
    std::sort(monos.begin(), monos.end());
    std::map<MonoKey, int> row_of;
    for (std::size_t i = 0; i < monos.size(); ++i) row_of[monos[i]] = static_cast<int>(i);

    // Quotient ansatz: order N-1 (the divisor has valuation >= 1).
    std::vector<MonoKey> cols;
    for (MonoKey m : monos)
        if (mono_degree(m) <= N - 1) cols.push_back(m);

    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(monos.size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (const auto& [key, val] : q.terms()) {
            if (mono_degree(cols[c]) + mono_degree(key) > N) break;
            bool fits = true;
            for (int i = 0; i < nv; ++i)
                if (mono_exp(cols[c], i) + mono_exp(key, i) > 15) { fits = false; break; }
            if (!fits) continue;
            A(row_of.at(cols[c] + key), c) += val;
        }
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(monos.size());
    for (const auto& [key, val] : p.terms()) rhs(row_of.at(key)) = val;

    Eigen::VectorXcd sol = A.colPivHouseholderQr().solve(rhs);
    double residual = (A * sol - rhs).cwiseAbs().maxCoeff();

    std::vector<std::pair<MonoKey, Complex>> terms;
    for (std::size_t c = 0; c < cols.size(); ++c)
        if (std::abs(sol(c)) > 0) terms.push_back({cols[c], sol(c)});
    quotient = Jet::from_terms(nv, N - 1, std::move(terms));
    return residual;
}

}  // namespace detail

LaurentSymbol laplace_expansion(const Jet& phase, const Jet& amplitude,
                                int large_parameter_degree, int order) {
    check_same_space(phase, amplitude, "laplace_expansion");
    std::map<int, Jet> amp{{large_parameter_degree, amplitude}};
    Jet crit;
    auto out = detail::laplace_interior(phase, amp, 0, phase.num_vars(), order,
                                        /*strict=*/true, &crit, std::nullopt);
    if (crit.max_abs() > 1e-12 * std::max(1.0, phase.max_abs()))
        throw std::invalid_argument(
            "laplace_expansion: phase does not vanish at its critical point; "
            "factor out exp(-lambda*phase(u*)) first");
    LaurentSymbol sym;
    sym.nvars = 0;
    sym.order = phase.order();
    for (auto& [deg, jet] : out)
        if (deg >= large_parameter_degree - order) sym.set(deg, jet);
    return sym;
}

namespace {

// Pads a jet to a (higher) recorded order without changing its terms.
Jet jet_reorder(const Jet& a, int order) {
    if (a.order() == order) return a;
    std::vector<std::pair<MonoKey, Complex>> t(a.terms().begin(), a.terms().end());
    return Jet::from_terms(a.num_vars(), order, std::move(t));
}

// Solves f(..., x_var = U(...)) = 0 by Newton iteration for a jet U that does
// not involve x_var.  Requires d f / d x_var to be invertible at the base.
Jet solve_variable_zero(const Jet& f, int var, double scale) {
    const int NV = f.num_vars();
    const int No = f.order();
    Jet df = jet_reorder(jet_diff(f, var), No);
    Jet U(NV, No);
    double res = 0.0;
    for (int it = 0; it <= No + 1; ++it) {
        Jet R = jet_set_var_zero(jet_shift_var(f, var, U), var);
        res = R.max_abs();
        if (res <= 1e-13 * scale) break;
        Jet D = jet_set_var_zero(jet_shift_var(df, var, U), var);
        U = jet_sub(U, jet_mul(R, jet_invert(D)));
    }
    if (res > 1e-9 * scale)
        throw std::runtime_error(
            "compose_kernels: stationary-set solve in the contact direction did not converge");
    return U;
}

// Divides a jet that vanishes along {x_var = 0} by x_var, reporting the
// residual mass that fails to divide.
Jet divide_by_variable(const Jet& a, int var, double* residual) {
    std::vector<std::pair<MonoKey, Complex>> out;
    double res = 0.0;
    std::vector<int> exps(a.num_vars());
    for (const auto& [key, val] : a.terms()) {
        if (mono_exp(key, var) == 0) {
            res = std::max(res, std::abs(val));
            continue;
        }
        for (int i = 0; i < a.num_vars(); ++i) exps[i] = mono_exp(key, i);
        exps[var] -= 1;
        out.push_back({mono_pack(exps), val});
    }
    if (residual) *residual = res;
    return Jet::from_terms(a.num_vars(), a.order(), std::move(out));
}

}  // namespace

PhaseKernel compose_kernels(const PhaseKernel& k1, const PhaseKernel& k2, int order) {
    if (k1.dims != k2.dims)
        throw std::invalid_argument("compose_kernels: kernels have different dimensions");
    if (k1.half_power_shift != 0 || k2.half_power_shift != 0)
        throw std::invalid_argument(
            "compose_kernels: half-integer amplitude families cannot be composed again");
    PhaseReport r1 = validate_phase(k1);
    if (!r1.ok) throw std::invalid_argument("compose_kernels: first kernel invalid: " + r1.message);
    PhaseReport r2 = validate_phase(k2);
    if (!r2.ok) throw std::invalid_argument("compose_kernels: second kernel invalid: " + r2.message);

    const int d = k1.dims;
    const int No = std::min({k1.phase.order(), k2.phase.order(), kMaxOrder});
    const double scale = std::max({1.0, k1.phase.max_abs(), k2.phase.max_abs()});

    // Diagonal differentials d_x q at the base point decide the kernel type.
    Eigen::VectorXcd v1(d), v2(d);
    for (int i = 0; i < d; ++i) {
        v1(i) = linear_coeff(k1.phase, i);
        v2(i) = linear_coeff(k2.phase, i);
    }
    const bool contact = v1.norm() > 1e-10 * scale && v2.norm() > 1e-10 * scale;
    const bool quadratic = v1.norm() <= 1e-10 * scale && v2.norm() <= 1e-10 * scale;
    if (!contact && !quadratic)
        throw std::invalid_argument(
            "compose_kernels: one kernel is contact type and the other quadratic type");

    const int nE = 2 * d;
    const int NV = 3 * d;
    if (NV > kMaxVars)
        throw std::invalid_argument("compose_kernels: total variable count exceeds the jet packing limit");

    PhaseKernel res;
    res.dims = d;
    res.n = k1.n;
    res.measure = k1.measure;
    res.amplitude.nvars = nE;
    res.amplitude.order = order;

    if (quadratic) {
        // Equal-scale mode: a single Laplace point in all d middle variables.
        std::vector<int> map1(2 * d), map2(2 * d), mapu(d);
        for (int i = 0; i < d; ++i) {
            map1[i] = i;
            map1[d + i] = 2 * d + i;
            map2[i] = 2 * d + i;
            map2[d + i] = d + i;
            mapu[i] = 2 * d + i;
        }
        Jet q1e = k1.phase.truncated(No).embedded(NV, map1);
        Jet q2e = k2.phase.truncated(No).embedded(NV, map2);
        Jet psi = jet_add(q1e, q2e);
        Jet rho = k2.measure.empty() ? Jet::constant(NV, No, Complex(1.0, 0.0))
                                     : k2.measure.truncated(No).embedded(NV, mapu);
        std::map<int, Jet> amp;
        for (const auto& [ka, a1] : k1.amplitude.terms) {
            Jet a1e = jet_mul(a1.truncated(No).embedded(NV, map1), rho);
            for (const auto& [kb, a2] : k2.amplitude.terms) {
                Jet piece = jet_mul(a1e, a2.truncated(No).embedded(NV, map2));
                auto it = amp.find(ka + kb);
                if (it == amp.end())
                    amp.emplace(ka + kb, piece);
                else
                    it->second = jet_add(it->second, piece);
            }
        }
        Jet qprime;
        auto out = detail::laplace_interior(psi, amp, nE, d, order, /*strict=*/false,
                                            &qprime, std::nullopt);
        res.phase = qprime.truncated(order);
        res.half_power_shift = d % 2;
        const int shift = (d - res.half_power_shift) / 2;
        for (auto& [deg, jet] : out) {
            Jet tj = jet.truncated(order);
            if (!tj.empty()) res.amplitude.set(deg - shift, tj);
        }
        PhaseReport rr = validate_phase(res);
        if (!rr.ok)
            throw std::runtime_error("compose_kernels: composed kernel failed validation: " +
                                     rr.message);
        return res;
    }

    // Contact mode.  The first kernel is read as a scale density a1(T) against
    // exp(-T q1); integrating T exactly gives sum_k a1_k k! q1^{-k-1}.  The
    // middle integral then has a simple zero of q1 in one contact coordinate
    // u_c (a pole of the integrand) and genuine critical directions in the
    // remaining d-1 middle coordinates.  The u_c integral is a residue, the
    // rest a Laplace point.
    Complex kappa = (v1.adjoint() * v2)(0) / (v1.adjoint() * v1)(0);
    double par_res = (v2 - kappa * v1).norm();
    if (par_res > 1e-8 * v2.norm())
        throw std::invalid_argument("compose_kernels: diagonal differentials are not parallel");
    if (!(kappa.real() > 0) || std::abs(kappa.imag()) > 1e-8 * std::abs(kappa))
        throw std::invalid_argument("compose_kernels: scale ratio is not positive");

    int cvar = 0;
    for (int i = 1; i < d; ++i)
        if (std::abs(v1(i)) > std::abs(v1(cvar))) cvar = i;
    if (std::abs(v2(cvar).imag()) < 1e-10 * v2.norm())
        throw std::invalid_argument(
            "compose_kernels: no decay half-plane in the contact direction");
    // exp(-lambda q2) decays for Im u_c > 0 exactly when Im v2_c < 0; the zero
    // of the regularized q1 sits in the same half-plane, so the contour
    // closing on the decay side always encloses it.
    const Complex circ = (v2(cvar).imag() < 0) ? Complex(0.0, 2.0 * std::numbers::pi)
                                               : Complex(0.0, -2.0 * std::numbers::pi);

    // Layout: x (d), y (d), middle coordinates other than u_c, then u_c last.
    const int vc = NV - 1;
    std::vector<int> map1(2 * d), map2(2 * d), mapu(d);
    int slot = 2 * d;
    for (int i = 0; i < d; ++i) mapu[i] = (i == cvar) ? vc : slot++;
    for (int i = 0; i < d; ++i) {
        map1[i] = i;
        map1[d + i] = mapu[i];
        map2[i] = mapu[i];
        map2[d + i] = d + i;
    }

    Jet q1e = k1.phase.truncated(No).embedded(NV, map1);
    Jet q2e = k2.phase.truncated(No).embedded(NV, map2);
    Jet rho = k2.measure.empty() ? Jet::constant(NV, No, Complex(1.0, 0.0))
                                 : k2.measure.truncated(No).embedded(NV, mapu);

    // u_c = U(x, y, u_perp) kills q1; recenter every factor there.
    Jet U = solve_variable_zero(q1e, vc, scale);
    Jet q1s = jet_shift_var(q1e, vc, U);
    double div_res = 0.0;
    Jet E = divide_by_variable(q1s, vc, &div_res);
    if (div_res > 1e-9 * scale)
        throw std::runtime_error(
            "compose_kernels: q1 does not factor through the contact coordinate");
    Jet Einv = jet_invert(E);
    Jet q2s = jet_shift_var(q2e, vc, U);
    Jet mdq2 = jet_neg(jet_reorder(jet_diff(q2s, vc), No));
    Jet rhos = jet_shift_var(rho, vc, U);

    // Residue at the k-th order pole: (1/k!) d^k/du_c^k of
    // E^{-k-1} rho a1 a2 exp(-lambda (q2 - q2(U))) at u_c = U; the k! from the
    // scale integral cancels it.  Each derivative acting on the exponential
    // lifts the lambda-degree by one through -d(q2)/du_c.
    std::map<int, Jet> amp2;
    for (const auto& [ka, a1] : k1.amplitude.terms) {
        if (ka < 0)
            throw std::invalid_argument(
                "compose_kernels: negative scale powers in the first amplitude are not supported");
        Jet a1s = jet_shift_var(a1.truncated(No).embedded(NV, map1), vc, U);
        Jet gk = jet_mul(jet_pow(Einv, ka + 1), jet_mul(rhos, a1s));
        for (const auto& [kb, a2] : k2.amplitude.terms) {
            Jet a2s = jet_shift_var(a2.truncated(No).embedded(NV, map2), vc, U);
            std::map<int, Jet> A{{kb, jet_mul(gk, a2s)}};
            for (int step = 0; step < ka; ++step) {
                std::map<int, Jet> nx;
                auto acc = [&](int m, const Jet& j) {
                    if (j.empty()) return;
                    auto it = nx.find(m);
                    if (it == nx.end())
                        nx.emplace(m, j);
                    else
                        it->second = jet_add(it->second, j);
                };
                for (const auto& [m, jm] : A) {
                    acc(m, jet_reorder(jet_diff(jm, vc), No));
                    acc(m + 1, jet_mul(mdq2, jm));
                }
                A = std::move(nx);
            }
            for (const auto& [m, jm] : A) {
                Jet ev = jet_set_var_zero(jm, vc);
                if (ev.empty()) continue;
                auto it = amp2.find(m);
                if (it == amp2.end())
                    amp2.emplace(m, ev);
                else
                    it->second = jet_add(it->second, ev);
            }
        }
    }

    Jet Phi = jet_head_restrict(jet_set_var_zero(q2s, vc), NV - 1);
    std::map<int, Jet> ampR;
    for (const auto& [m, jm] : amp2) ampR.emplace(m, jet_head_restrict(jm, NV - 1));

    if (d == 1) {
        // No transverse directions remain; the residue is the whole answer.
        res.phase = Phi.truncated(order);
        res.half_power_shift = 0;
        for (const auto& [deg, jet] : ampR) {
            Jet tj = jet_scale(jet, circ).truncated(order);
            if (!tj.empty()) res.amplitude.set(deg, tj);
        }
    } else {
        Jet qprime;
        auto out = detail::laplace_interior(Phi, ampR, nE, d - 1, order, /*strict=*/false,
                                            &qprime, std::nullopt);
        res.phase = qprime.truncated(order);
        res.half_power_shift = (d - 1) % 2;
        const int shift = (d - 1 - res.half_power_shift) / 2;
        for (auto& [deg, jet] : out) {
            Jet tj = jet_scale(jet, circ).truncated(order);
            if (!tj.empty()) res.amplitude.set(deg - shift, tj);
        }
    }

    PhaseReport rr = validate_phase(res);
    if (!rr.ok)
        throw std::runtime_error("compose_kernels: composed kernel failed validation: " + rr.message);
    return res;
}

PhaseKernel sphere_szego_kernel(int n, int order) {
    if (n < 1) throw std::invalid_argument("sphere_szego_kernel: n must be >= 1");
    const int d = 2 * n - 1;
    if (2 * d > kMaxVars) throw std::invalid_argument("sphere_szego_kernel: dimension too large");

    // Graph chart of S^{2n-1} at z = (1, 0, ..., 0): the first coordinate
    // carries sqrt(1 - r^2) as its real part, every other real coordinate is
    // a linear slot.
    std::vector<std::pair<MonoKey, Complex>> r2t;
    std::vector<int> e(d, 0);
    for (int i = 0; i < d; ++i) {
        e[i] = 2;
        r2t.push_back({mono_pack(e), Complex(1.0, 0.0)});
        e[i] = 0;
    }
    Jet r2 = Jet::from_terms(d, order, std::move(r2t));
    Jet s = jet_sqrt(jet_sub(Jet::constant(d, order, Complex(1.0, 0.0)), r2));

    std::vector<Jet> z(n);
    z[0] = jet_add(s, Jet::variable(d, order, 0, Complex(0.0, 1.0)));
    for (int j = 1; j < n; ++j)
        z[j] = jet_add(Jet::variable(d, order, 2 * j - 1, Complex(1.0, 0.0)),
                       Jet::variable(d, order, 2 * j, Complex(0.0, 1.0)));

    std::vector<int> xmap(d), ymap(d);
    for (int i = 0; i < d; ++i) {
        xmap[i] = i;
        ymap[i] = d + i;
    }
    Jet q = Jet::constant(2 * d, order, Complex(1.0, 0.0));
    for (int j = 0; j < n; ++j)
        q = jet_sub(q, jet_mul(z[j].embedded(2 * d, xmap), jet_conj(z[j]).embedded(2 * d, ymap)));

    PhaseKernel k;
    k.phase = q;
    k.dims = d;
    k.n = n;
    k.measure = jet_invert(s);  // (1 - r^2)^{-1/2}
    k.amplitude.nvars = 2 * d;
    k.amplitude.order = order;
    k.amplitude.set(n - 1, Jet::constant(2 * d, order,
                                         Complex(1.0 / (2.0 * std::pow(std::numbers::pi, n)), 0.0)));
    return k;
}

IdempotenceReport idempotence_defect(const PhaseKernel& composed, const PhaseKernel& original) {
    IdempotenceReport rep;
    rep.phase_defect = detail::jet_divide(composed.phase, original.phase, rep.unit);
    rep.unit_constant_gap = std::abs(rep.unit.constant_term() - Complex(1.0, 0.0));

    // Renormalize the composed amplitude to the input frame: with
    // q' = e q, substituting lambda' = e*lambda sends a'_j to a'_j e^{-j-1}.
    Jet einv = jet_invert(rep.unit);
    const int N = original.phase.order();
    const int jtop = original.amplitude.top_degree();
    double defect = 0.0;
    int lo = std::min(original.amplitude.bottom_degree(), composed.amplitude.bottom_degree());
    int hi = std::max(original.amplitude.top_degree(), composed.amplitude.top_degree());
    for (int j = lo; j <= hi; ++j) {
        // Compare on the fixed window every admissible truncation populates:
        // the leading amplitude through exterior order two and the diagonal
        // value one step down.  Coarse truncations fill these entries only
        // partially, so the defect measures convergence of the truncation.
        const int s = jtop - j;
        if (s < 0 || s > 1) continue;
        const int max_ord = (s == 0) ? 2 : 0;
        Jet diff(composed.phase.num_vars(), N);
        const Jet* ca = composed.amplitude.get(j);
        const Jet* oa = original.amplitude.get(j);
        if (ca) {
            Jet frame = (j + 1 >= 0) ? jet_pow(einv, j + 1) : jet_pow(rep.unit, -(j + 1));
            diff = jet_mul(*ca, frame);
        }
        if (oa) diff = jet_sub(diff, *oa);
        for (const auto& [key, val] : diff.terms())
            if (mono_degree(key) <= max_ord) defect = std::max(defect, std::abs(val));
    }
    rep.amplitude_defect = defect;
    return rep;
}

}  // namespace tll
