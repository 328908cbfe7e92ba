#include "tll/log_trace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tll/laurent.hpp"

namespace tll {

double log_trace(const GridField& density, const S3Quadrature& q) {
    if (density.size() != q.num_nodes()) {
        throw std::invalid_argument("log_trace: density does not match the grid");
    }
    return integrate(q, density);
}

double diagonal_log_density(const PhaseKernel& k) {
    const HolonomicSingularity sing = kernel_expansion(k.amplitude, k.n);
    auto it = sing.beta.find(0);
    if (it == sing.beta.end()) return 0.0;
    const Jet diag = diagonal_restriction(it->second);
    return diag.constant_term().real();
}

double diagonal_trace_sample(const PhaseKernel& k, double eps) {
    return laplace_transform_numeric(k.amplitude, eps).real();
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

namespace {

// Zonal profile of the conjugation weight and its latitude derivatives:
// f(phi) = sin(2 phi), f^(k) = 2^k sin(2 phi + k pi/2).
double zonal_profile_derivative(double phi, int k) {
    return std::pow(2.0, k) * std::sin(2.0 * phi + k * 1.5707963267948966);
}

// Jet of t (f(x) - f(y)) around a base point at the given latitude: the
// profile varies along one exterior direction of each side.
Jet conjugation_exponent(double t, double phi, int nvars, int dims, int order) {
    std::vector<std::pair<MonoKey, Complex>> terms;
    for (int side = 0; side < 2; ++side) {
        const int var = side * dims;  // latitude direction of each point
        const double sign = (side == 0) ? 1.0 : -1.0;
        for (int k = 1; k <= order; ++k) {
            double fact = 1.0;
            for (int j = 2; j <= k; ++j) fact *= j;
            const double c = t * sign * zonal_profile_derivative(phi, k) / fact;
            if (c == 0.0) continue;
            std::vector<int> exps(nvars, 0);
            exps[var] = k;
            terms.emplace_back(mono_pack(exps), Complex(c, 0.0));
        }
    }
    return Jet::from_terms(nvars, order, std::move(terms));
}

PhaseKernel conjugated_member(double t, double phi, int jet_order) {
    PhaseKernel k = sphere_szego_kernel(2, jet_order);
    const int nvars = k.phase.num_vars();
    const Jet expo = conjugation_exponent(t, phi, nvars, k.dims, jet_order);
    const Jet weight = jet_exp(expo);
    LaurentSymbol dressed;
    dressed.nvars = k.amplitude.nvars;
    dressed.order = k.amplitude.order;
    for (const auto& [deg, jet] : k.amplitude.terms) {
        dressed.set(deg, jet_mul(jet, weight));
    }
    k.amplitude = std::move(dressed);
    return k;
}

}  // namespace

KernelFamily conformal_sphere_family(int jet_order) {
    return [jet_order](double t, double phi) {
        return conjugated_member(t, phi, jet_order);
    };
}

KernelFamily broken_sphere_family(int jet_order, double broken_t,
                                  double perturbation) {
    return [jet_order, broken_t, perturbation](double t, double phi) {
        PhaseKernel k = conjugated_member(t, phi, jet_order);
        if (std::abs(t - broken_t) < 1e-12) {
            // A negative scale power injected without re-projecting: the
            // member acquires a logarithmic diagonal term.
            k.amplitude.set(
                -1, Jet::constant(k.amplitude.nvars, k.amplitude.order,
                                  Complex(perturbation, 0.0)));
        }
        return k;
    };
}

// ---------------------------------------------------------------------------
// Invariance experiment
// ---------------------------------------------------------------------------

namespace {

struct FamilyTrace {
    std::vector<double> beta0_bar;
    double member_defect = 0.0;
    std::string defect_message;
};

FamilyTrace family_log_trace(const KernelFamily& family,
                             const std::vector<double>& t_values,
                             const S3Quadrature& q, bool check_idempotence) {
    FamilyTrace out;
    out.beta0_bar.reserve(t_values.size());
    for (double t : t_values) {
        // The library families are zonal, so the density is built per
        // latitude slice and broadcast over the angular grid.
        GridField field(q.num_nodes());
        for (int i = 0; i < q.n_phi; ++i) {
            const PhaseKernel member = family(t, q.phi[i]);
            const PhaseReport rep = validate_phase(member);
            if (!rep.ok) {
                throw std::runtime_error("invariance_experiment: family member "
                                         "failed phase validation: " +
                                         rep.message);
            }
            const double beta0 = diagonal_log_density(member);
            for (int j1 = 0; j1 < q.n_theta; ++j1) {
                for (int j2 = 0; j2 < q.n_theta; ++j2) {
                    field[q.index(i, j1, j2)] = beta0;
                }
            }
        }
        out.beta0_bar.push_back(log_trace(field, q));

        if (check_idempotence) {
            const PhaseKernel probe = family(t, q.phi[q.n_phi / 2]);
            try {
                const PhaseKernel sq = compose_kernels(probe, probe, probe.phase.order());
                const IdempotenceReport rep = idempotence_defect(sq, probe);
                out.member_defect = std::max(
                    out.member_defect, std::max(rep.phase_defect, rep.amplitude_defect));
            } catch (const std::exception& e) {
                out.member_defect = 1.0;
                out.defect_message = e.what();
            }
        }
    }
    return out;
}

}  // namespace

InvarianceReport invariance_experiment(const KernelFamily& family,
                                       const std::vector<double>& t_values,
                                       const S3Quadrature& q,
                                       const InvarianceOptions& opt) {
    if (t_values.size() < 2) {
        throw std::invalid_argument(
            "invariance_experiment: need at least two family samples");
    }
    InvarianceReport rep;
    rep.t_values = t_values;

    const FamilyTrace base =
        family_log_trace(family, t_values, q, opt.check_idempotence);
    rep.beta0_bar = base.beta0_bar;
    rep.member_defect = base.member_defect;

    rep.mean = std::accumulate(rep.beta0_bar.begin(), rep.beta0_bar.end(), 0.0) /
               rep.beta0_bar.size();
    for (double v : rep.beta0_bar) {
        rep.max_deviation = std::max(rep.max_deviation, std::abs(v - rep.mean));
    }

    // Resolution doubling; the idempotence gate does not depend on the grid.
    const S3Quadrature fine = S3Quadrature::make(2 * q.n_phi, 2 * q.n_theta);
    const FamilyTrace refined = family_log_trace(family, t_values, fine, false);
    for (std::size_t i = 0; i < t_values.size(); ++i) {
        rep.grid_stability = std::max(
            rep.grid_stability, std::abs(refined.beta0_bar[i] - rep.beta0_bar[i]));
    }

    // Differenced-trace fit: the trace samples of consecutive members are
    // differenced in the family parameter and fitted in the mixed basis; a
    // genuine deformation family has no Log part.
    std::vector<std::pair<double, Complex>> samples;
    const double phi_mid = q.phi[q.n_phi / 2];
    for (double eps : opt.eps_grid) {
        const double s0 = diagonal_trace_sample(family(t_values.front(), phi_mid), eps);
        const double s1 = diagonal_trace_sample(family(t_values.back(), phi_mid), eps);
        const double dt = t_values.back() - t_values.front();
        samples.emplace_back(eps, Complex((s1 - s0) / dt, 0.0));
    }
    FitOptions fopt;
    fopt.max_pole = 2;
    fopt.max_taylor = 2;
    fopt.max_log = 0;
    const EpsilonExpansion fit = fit_epsilon_expansion(samples, fopt);
    rep.differenced_log_coefficient =
        fit.log.count(0) ? std::abs(fit.log.at(0)) : 0.0;
    rep.differenced_fit_residual = fit.residual;

    if (rep.max_deviation > opt.tolerance) {
        rep.flagged = true;
        rep.flag_reason = "logarithmic trace varies along the family";
    }
    if (opt.check_idempotence && rep.member_defect > opt.tolerance) {
        rep.flagged = true;
        rep.flag_reason = base.defect_message.empty()
                              ? "family member fails the idempotence defect threshold"
                              : "family member fails the idempotence gate: " +
                                    base.defect_message;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Vanishing chain
// ---------------------------------------------------------------------------

VanishingChainReport s3_vanishing_chain(
    const std::function<double(double, double, double)>& seed,
    const std::vector<int>& n_values, const S3Quadrature& q) {
    if (n_values.empty()) {
        throw std::invalid_argument("s3_vanishing_chain: empty index list");
    }
    VanishingChainReport rep;
    rep.n_values = n_values;
    rep.trace_values.reserve(n_values.size());
    for (int n : n_values) {
        const PeriodicDensityReport pd = lambda_n_periodic_density(n, seed, q);
        rep.trace_values.push_back(pd.integral);
    }

    // Least-squares slope of L_n = slope * n through the origin.
    double sn2 = 0.0, snl = 0.0;
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        sn2 += static_cast<double>(n_values[i]) * n_values[i];
        snl += n_values[i] * rep.trace_values[i];
    }
    if (sn2 == 0.0) {
        throw std::invalid_argument(
            "s3_vanishing_chain: need at least one positive index");
    }
    rep.slope = snl / sn2;
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        rep.fit_residual = std::max(
            rep.fit_residual,
            std::abs(rep.trace_values[i] - rep.slope * n_values[i]));
    }

    // The even-class constraint: imposing L = 0 at an even index kills the
    // slope and with it every value in the chain.
    auto even_it = std::find_if(n_values.begin(), n_values.end(),
                                [](int n) { return n > 0 && n % 2 == 0; });
    if (even_it != n_values.end()) {
        rep.even_constraint_input =
            rep.trace_values[even_it - n_values.begin()];
    }
    rep.constrained_slope = 0.0;
    rep.constrained_values.assign(n_values.size(), 0.0);
    return rep;
}

}  // namespace tll
