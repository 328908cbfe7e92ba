#include "tll/acceptance.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include "tll/contact_s3.hpp"
#include "tll/jet.hpp"
#include "tll/laurent.hpp"
#include "tll/log_trace.hpp"
#include "tll/phase_kernel.hpp"
#include "tll/projector.hpp"
#include "tll/quadrature.hpp"
#include "tll/rng.hpp"
#include "tll/symplectic.hpp"

namespace tll {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string sci(double v) {
    std::ostringstream o;
    o.precision(2);
    o << std::scientific << v;
    return o.str();
}

Matrix gaussian_matrix(int n, Rng& rng) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = Complex(rng.gaussian(), rng.gaussian());
    return g;
}

// ---------------------------------------------------------------------------
// 1. Sphere model kernel: pure second-order pole with coefficient 1/(2 pi^2),
//    no logarithmic part, hence zero logarithmic trace; quadrature volume
//    2 pi^2 exactly.
// ---------------------------------------------------------------------------
void crit_sphere_constants(const Config& cfg, CriterionResult& r) {
    const PhaseKernel k = sphere_szego_kernel(2, 4);
    const HolonomicSingularity sing = kernel_expansion(k.amplitude, k.n);

    const auto* a2 = [&]() -> const Jet* {
        auto it = sing.alpha.find(2);
        return it == sing.alpha.end() ? nullptr : &it->second;
    }();
    if (a2 == nullptr) throw std::runtime_error("second-order pole coefficient missing");
    const double alpha2 = diagonal_restriction(*a2).constant_term().real();
    const double alpha2_gap = std::abs(alpha2 - 1.0 / (2.0 * kPi * kPi));

    double beta_max = 0.0;
    for (const auto& [deg, jet] : sing.beta)
        for (const auto& [key, c] : jet.terms()) beta_max = std::max(beta_max, std::abs(c));

    const auto q = S3Quadrature::make(cfg.grid_phi, cfg.grid_theta);
    const double volume_gap = std::abs(q.total_weight() - 2.0 * kPi * kPi);

    const GridField density(q.num_nodes(), diagonal_log_density(k));
    const double ltr = log_trace(density, q);

    r.pass = alpha2_gap <= 1e-12 && beta_max == 0.0 && volume_gap <= 1e-12 && ltr == 0.0;
    r.detail = "alpha2 gap " + sci(alpha2_gap) + ", max |beta| " + sci(beta_max) +
               ", volume gap " + sci(volume_gap) + ", log trace " + sci(ltr);
}

// ---------------------------------------------------------------------------
// 2. Idempotent correction series vs the spectral sign oracle on 50 random
//    perturbed projectors; series coefficients 1, 3, 10.
// ---------------------------------------------------------------------------
void crit_projector_series(const Config& cfg, CriterionResult& r) {
    Rng rng(cfg.seed);
    const int dim = 20;
    double max_gap = 0.0, max_defect = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(dim, rng));
        const Matrix unitary = qr.householderQ();
        const int rank = rng.uniform_int(3, dim - 3);
        const Matrix p = unitary.leftCols(rank) * unitary.leftCols(rank).adjoint();

        Matrix e = gaussian_matrix(dim, rng);
        Eigen::JacobiSVD<Matrix> svd(e);
        e *= 0.05 / svd.singularValues()(0);

        const Matrix s0 = p + e;
        const Matrix s = correct_projector(s0, 40);
        const Matrix oracle = spectral_sign_projector(s0);
        max_gap = std::max(max_gap, (s - oracle).cwiseAbs().maxCoeff());
        max_defect = std::max(max_defect, (s * s - s).cwiseAbs().maxCoeff());
    }
    const bool coeffs_ok = projector_series_coefficient(1) == 1.0 &&
                           projector_series_coefficient(2) == 3.0 &&
                           projector_series_coefficient(3) == 10.0;
    r.pass = max_gap < 1e-8 && max_defect < 1e-10 && coeffs_ok;
    r.detail = "max oracle gap " + sci(max_gap) + ", max defect " + sci(max_defect) +
               ", C(1..3) = 1,3,10 " + (coeffs_ok ? "ok" : "WRONG");
}

// ---------------------------------------------------------------------------
// 3. Projector-derivative identity DS = [S, (2S-1) DS] along smooth unitary
//    families; the trace stays constant (commutator-trace mechanism).
// ---------------------------------------------------------------------------
void crit_derivative_identity(const Config& cfg, CriterionResult& r) {
    const int dim = 6;
    const std::vector<double> samples = {0.0, 0.4, 0.9, 1.5};

    // Rank-1 family rotating in a coordinate 2-plane.
    auto rank1 = [dim](double t) {
        Eigen::VectorXcd u = Eigen::VectorXcd::Zero(dim);
        u(0) = std::cos(t);
        u(1) = std::sin(t);
        return Matrix(u * u.adjoint());
    };

    // Rank-3 projector conjugated by exp(-itH) for a seeded Hermitian H.
    Rng rng(cfg.seed + 3);
    const Matrix g = gaussian_matrix(dim, rng);
    const Matrix h = 0.5 * (g + g.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const Eigen::VectorXd ev = es.eigenvalues();
    const Matrix w = es.eigenvectors();
    Matrix p3 = Matrix::Zero(dim, dim);
    for (int i = 0; i < 3; ++i) p3(i, i) = 1.0;
    auto rank3 = [ev, w, p3, dim](double t) {
        Eigen::VectorXcd phases(dim);
        for (int i = 0; i < dim; ++i) phases(i) = std::exp(Complex(0.0, -t * ev(i)));
        const Matrix v = w * phases.asDiagonal() * w.adjoint();
        return Matrix(v * p3 * v.adjoint());
    };

    const auto rep1 = derivative_identity_check(rank1, samples, 1e-4);
    const auto rep3 = derivative_identity_check(rank3, samples, 1e-4);
    const double residual = std::max(rep1.max_identity_residual, rep3.max_identity_residual);
    const double trace_var = std::max(rep1.trace_variation, rep3.trace_variation);
    r.pass = residual < 1e-5 && trace_var < 1e-12;
    r.detail = "identity residual " + sci(residual) + ", trace variation " + sci(trace_var);
}

// ---------------------------------------------------------------------------
// 4. Laplace engine: cubic-perturbed Gaussian vs adaptive quadrature, and
//    self-composition of the sphere kernel (phase reproduced up to a unit).
// ---------------------------------------------------------------------------
void crit_stationary_phase(const Config&, CriterionResult& r) {
    const int ord = 6;
    const Jet u = Jet::variable(1, ord, 0, 1.0);
    const Jet phase = jet_add(jet_scale(jet_mul(u, u), Complex(0.5)),
                              jet_scale(jet_pow(u, 3), Complex(0.1)));
    const Jet amp = jet_add(Jet::constant(1, ord, 1.0), u);
    const LaurentSymbol series = laplace_expansion(phase, amp, 0, 2);

    const double lambda = 50.0;
    Complex expansion = 0.0;
    for (const auto& [deg, jet] : series.terms)
        expansion += jet.constant_term() * std::pow(lambda, deg);
    expansion *= std::pow(lambda, -0.5);

    const double oracle = adaptive_simpson(
        [lambda](double x) {
            return std::exp(-lambda * (0.5 * x * x + 0.1 * x * x * x)) * (1.0 + x);
        },
        -4.0, 4.0, 1e-12);
    const double rel_err = std::abs(expansion.real() - oracle) / std::abs(oracle);

    const PhaseKernel k = sphere_szego_kernel(2, 4);
    const PhaseKernel composed = compose_kernels(k, k, 4);
    const IdempotenceReport idem = idempotence_defect(composed, k);
    const double defect = std::max(idem.phase_defect, idem.amplitude_defect);

    r.pass = rel_err < 1e-4 && defect < 1e-6 && idem.unit_constant_gap < 1e-6;
    r.detail = "cubic Gaussian rel err " + sci(rel_err) + ", self-composition defect " +
               sci(defect) + ", unit gap " + sci(idem.unit_constant_gap);
}

// ---------------------------------------------------------------------------
// 5. Expansion/fit duality: synthetic mixed expansion recovered; circle
//    Toeplitz trace has alpha_1 = 1 and beta_0 = 0; the regularized transform
//    of the T^{-1} symbol has a unit-magnitude, cutoff-independent Log term.
// ---------------------------------------------------------------------------
void crit_expansion_fit(const Config&, CriterionResult& r) {
    // (a) synthetic: 2/eps^2 + 3/eps + 0.7 Log eps + 1 + eps.
    std::vector<std::pair<double, Complex>> synth;
    for (int i = 0; i < 14; ++i) {
        const double eps = 0.01 * std::pow(30.0, i / 13.0);
        synth.push_back({eps, Complex(2.0 / (eps * eps) + 3.0 / eps +
                                          0.7 * std::log(eps) + 1.0 + eps,
                                      0.0)});
    }
    const EpsilonExpansion fit_a = fit_epsilon_expansion(synth, FitOptions{2, 2, 1});
    double synth_err = 0.0;
    auto get = [](const std::map<int, Complex>& m, int k) {
        auto it = m.find(k);
        return it == m.end() ? Complex(0.0) : it->second;
    };
    synth_err = std::max(synth_err, std::abs(get(fit_a.pole, 2) - 2.0));
    synth_err = std::max(synth_err, std::abs(get(fit_a.pole, 1) - 3.0));
    synth_err = std::max(synth_err, std::abs(get(fit_a.log, 0) - 0.7));
    synth_err = std::max(synth_err, std::abs(get(fit_a.taylor, 0) - 1.0));
    synth_err = std::max(synth_err, std::abs(get(fit_a.taylor, 1) - 1.0));

    // (b) circle model: s(eps) = sum_k e^{-k eps}.
    std::vector<std::pair<double, Complex>> circle;
    for (int i = 0; i < 12; ++i) {
        const double eps = 0.02 * std::pow(12.5, i / 11.0);  // 0.02 .. 0.25
        double sum = 0.0;
        for (int k = 0;; ++k) {
            const double term = std::exp(-k * eps);
            sum += term;
            if (term < 1e-18) break;
        }
        circle.push_back({eps, Complex(sum, 0.0)});
    }
    const EpsilonExpansion fit_b = fit_epsilon_expansion(circle, FitOptions{2, 2, 1});
    const double alpha1_gap = std::abs(get(fit_b.pole, 1) - 1.0);
    const double beta0_mag = std::abs(get(fit_b.log, 0));

    // (c) regularized transform of the T^{-1} symbol at two cutoffs.
    LaurentSymbol inv;
    inv.nvars = 1;
    inv.order = 0;
    inv.set(-1, Jet::constant(1, 0, 1.0));
    auto log_coeff_at_cutoff = [&inv, &get](double cutoff) {
        std::vector<std::pair<double, Complex>> samples;
        for (int i = 0; i < 10; ++i) {
            const double eps = 0.01 * std::pow(12.0, i / 9.0);  // 0.01 .. 0.12
            samples.push_back({eps, laplace_transform_numeric(inv, eps, cutoff)});
        }
        // Cubic Taylor column: the transform's eps^3 term scales with cutoff^3
        // and would otherwise leak into the Log column.
        return get(fit_epsilon_expansion(samples, FitOptions{0, 3, 1}).log, 0);
    };
    const Complex log1 = log_coeff_at_cutoff(1.0);
    const Complex log2 = log_coeff_at_cutoff(2.0);
    const double unit_gap = std::abs(std::abs(log1) - 1.0);
    const double cutoff_gap = std::abs(std::abs(log1) - std::abs(log2));

    r.pass = synth_err < 1e-6 && alpha1_gap < 1e-4 && beta0_mag < 1e-4 &&
             unit_gap < 1e-3 && cutoff_gap < 1e-4;
    r.detail = "synthetic err " + sci(synth_err) + ", alpha1 gap " + sci(alpha1_gap) +
               ", |beta0| " + sci(beta0_mag) + ", Log unit gap " + sci(unit_gap) +
               ", cutoff dependence " + sci(cutoff_gap);
}

// ---------------------------------------------------------------------------
// 6. Spectral splitting of positive quadratic models: off-axis eigenvalues,
//    Lagrangian halves, opposite definite signatures, negation symmetry, and
//    positivity along convex paths.
// ---------------------------------------------------------------------------
void crit_symplectic_splitting(const Config& cfg, CriterionResult& r) {
    Rng rng(cfg.seed + 6);
    double min_im = 1e300, max_lagr = 0.0, max_negation = 0.0;
    bool signatures_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 2 * (1 + trial % 4);  // 2, 4, 6, 8
        const HamiltonianModel m = random_hamiltonian_model(dim, rng);
        const SpectralSplitting split = spectral_splitting(m.A, m.omega);
        for (int i = 0; i < split.eigenvalues.size(); ++i) {
            min_im = std::min(min_im, std::abs(split.eigenvalues(i).imag()));
            double best = 1e300;
            for (int j = 0; j < split.eigenvalues.size(); ++j)
                best = std::min(best,
                                std::abs(split.eigenvalues(i) + split.eigenvalues(j)));
            max_negation = std::max(max_negation, best);
        }
        max_lagr = std::max(max_lagr, split.lagrangian_residual);
        const Signature sig = positivity_signature(split, m.omega);
        signatures_ok = signatures_ok && sig.plus == 1 && sig.minus == -1;
    }

    // Convex paths between independent instances over the first one's form.
    bool paths_ok = true;
    for (int pair = 0; pair < 5; ++pair) {
        const HamiltonianModel m0 = random_hamiltonian_model(4, rng);
        const HamiltonianModel m1 = random_hamiltonian_model(4, rng);
        for (int s = 0; s <= 10; ++s) {
            const double t = s / 10.0;
            const Matrix qt = (1.0 - t) * m0.Q + t * m1.Q;
            const HamiltonianModel mt = hamiltonian_map(qt, m0.omega);
            const Signature sig =
                positivity_signature(spectral_splitting(mt.A, mt.omega), mt.omega);
            paths_ok = paths_ok && sig.plus == 1 && sig.minus == -1;
        }
    }

    r.pass = min_im > 1e-6 && max_lagr < 1e-10 && max_negation < 1e-8 &&
             signatures_ok && paths_ok;
    r.detail = "min |Im lambda| " + sci(min_im) + ", max Lagrangian residual " +
               sci(max_lagr) + ", negation gap " + sci(max_negation) + ", signatures " +
               (signatures_ok ? "ok" : "WRONG") + ", paths " + (paths_ok ? "ok" : "WRONG");
}

// ---------------------------------------------------------------------------
// 7. Contact forms on S^3: twisted-family contact value 2n+1, standard
//    volume 4 pi^2, endpoint vanishing of the coefficient pair.
// ---------------------------------------------------------------------------
void crit_contact_forms(const Config& cfg, CriterionResult& r) {
    double max_value_gap = 0.0, max_endpoint = 0.0;
    for (int n = 0; n <= 5; ++n) {
        const ContactFormS3 f = ContactFormS3::twisted(n);
        for (int i = 0; i <= 200; ++i) {
            const double phi = (kPi / 2.0) * i / 200.0;
            max_value_gap =
                std::max(max_value_gap, std::abs(contact_value(f, phi) - (2.0 * n + 1.0)));
        }
        max_endpoint = std::max(max_endpoint, std::abs(f.b(0.0)));
        max_endpoint = std::max(max_endpoint, std::abs(f.a(kPi / 2.0)));
    }
    const auto q = S3Quadrature::make(cfg.grid_phi, cfg.grid_theta);
    const double volume_gap =
        std::abs(volume_integral(ContactFormS3::standard_form(), q) - 4.0 * kPi * kPi);

    r.pass = max_value_gap <= 1e-12 && volume_gap < 1e-6 && max_endpoint <= 1e-12;
    r.detail = "max contact-value gap " + sci(max_value_gap) + ", volume gap " +
               sci(volume_gap) + ", endpoint residual " + sci(max_endpoint);
}

// ---------------------------------------------------------------------------
// 8. Degree classes of the trivialized forms: constant map 0, generator of
//    magnitude 1 agreeing in sign with the linking oracle, twisted family
//    alternating 0 / -1, all rounding certificates sharp.
// ---------------------------------------------------------------------------
void crit_hopf_classes(const Config&, CriterionResult& r) {
    // The twisted profiles oscillate ~(2n+1) times faster in latitude than in
    // the angles, so the battery grid trades angular for latitude resolution.
    const auto q = S3Quadrature::make(160, 32);
    double max_cert = 0.0;
    bool ok = true;
    std::ostringstream detail;

    const HopfReport rc = hopf_invariant(constant_map({0.0, 0.0, 1.0}), q);
    ok = ok && rc.degree == 0;
    max_cert = std::max(max_cert, rc.certificate);

    const HopfReport rg = hopf_invariant(generator_map(), q);
    const LinkingReport lg = linking_number_oracle(generator_map(), q);
    ok = ok && std::abs(rg.degree) == 1 && rg.degree == lg.linking;
    max_cert = std::max({max_cert, rg.certificate, lg.certificate});
    detail << "generator " << rg.degree << " (oracle " << lg.linking << "), twisted ";

    for (int n = 0; n <= 4; ++n) {
        const HopfReport rt = hopf_invariant(trivialize(ContactFormS3::twisted(n)), q);
        const int expected = (n % 2 == 0) ? 0 : -1;
        ok = ok && rt.degree == expected;
        max_cert = std::max(max_cert, rt.certificate);
        detail << rt.degree << (n < 4 ? "," : "");
    }

    r.pass = ok && max_cert < 0.05;
    r.detail = detail.str() + ", max certificate " + sci(max_cert);
}

// ---------------------------------------------------------------------------
// 9. Corona gluing: log-trace additivity on disjointly supported densities,
//    and the glued standard form stays contact.
// ---------------------------------------------------------------------------
void crit_gluing_additivity(const Config& cfg, CriterionResult& r) {
    const auto q = S3Quadrature::make(cfg.grid_phi, cfg.grid_theta);
    Rng rng(cfg.seed + 9);
    auto bump = [](double u) {
        return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
    };
    double max_gap = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double c1 = rng.uniform(0.5, 2.0), mu1 = rng.uniform(0.2, 0.33),
                     w1 = rng.uniform(0.08, 0.14);
        const double c2 = rng.uniform(0.5, 2.0), mu2 = rng.uniform(1.15, 1.3),
                     w2 = rng.uniform(0.08, 0.13);
        const double m1 = rng.uniform(-0.3, 0.3), m2 = rng.uniform(-0.3, 0.3);
        GridField d1(q.num_nodes()), d2(q.num_nodes());
        for (int i = 0; i < q.n_phi; ++i)
            for (int j1 = 0; j1 < q.n_theta; ++j1)
                for (int j2 = 0; j2 < q.n_theta; ++j2) {
                    const double mod =
                        1.0 + m1 * std::sin(q.theta[j1]) + m2 * std::cos(2.0 * q.theta[j2]);
                    d1[q.index(i, j1, j2)] = c1 * bump((q.phi[i] - mu1) / w1) * mod;
                    d2[q.index(i, j1, j2)] = c2 * bump((q.phi[i] - mu2) / w2) * mod;
                }
        const GridField glued = glue_log_densities(q, d1, d2);
        const double lhs = log_trace(glued, q);
        const double rhs = log_trace(d1, q) + log_trace(d2, q);
        max_gap = std::max(max_gap, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }

    const ContactFormS3 glued_form =
        glue_forms(ContactFormS3::standard_form(), ContactFormS3::standard_form());
    const bool contact_ok = is_contact(glued_form);

    r.pass = max_gap <= 1e-12 && contact_ok;
    r.detail = "max additivity gap " + sci(max_gap) + ", glued standard form contact: " +
               (contact_ok ? "yes" : "NO");
}

// ---------------------------------------------------------------------------
// 10. Deformation invariance of the logarithmic coefficient: the conformal
//     family is constant and grid-stable, the broken family is flagged, and
//     the differenced-trace fit carries no Log term.
// ---------------------------------------------------------------------------
void crit_deformation_invariance(const Config&, CriterionResult& r) {
    const auto q = S3Quadrature::make(32, 16);
    const std::vector<double> ts = {0.0, 0.05, 0.10, 0.15, 0.20};
    const InvarianceOptions opt;

    const InvarianceReport good = invariance_experiment(conformal_sphere_family(4), ts, q, opt);
    const InvarianceReport bad =
        invariance_experiment(broken_sphere_family(4, 0.10, 0.05), ts, q, opt);

    r.pass = !good.flagged && good.max_deviation < 1e-6 && good.grid_stability < 1e-6 &&
             std::abs(good.differenced_log_coefficient) < 1e-4 && bad.flagged;
    r.detail = "deviation " + sci(good.max_deviation) + ", grid stability " +
               sci(good.grid_stability) + ", Log coefficient " +
               sci(std::abs(good.differenced_log_coefficient)) + ", negative control " +
               (bad.flagged ? "flagged" : "MISSED");
}

// ---------------------------------------------------------------------------
// 11. Vanishing chain: the periodic construction is linear in the twist
//     index, and the even-class zero constraint forces every value to zero.
// ---------------------------------------------------------------------------
void crit_vanishing_chain(const Config&, CriterionResult& r) {
    const auto q = S3Quadrature::make(32, 16);
    auto seed = [](double phi, double t1, double t2) {
        const double s = std::sin(2.0 * phi);
        return s * s * (1.0 + 0.3 * std::cos(t1 + t2));
    };
    const VanishingChainReport chain = s3_vanishing_chain(seed, {1, 2, 3, 4}, q);
    bool forced_zero = chain.constrained_slope == 0.0;
    for (double v : chain.constrained_values) forced_zero = forced_zero && v == 0.0;

    r.pass = chain.fit_residual < 1e-10 && forced_zero;
    r.detail = "linear-fit residual " + sci(chain.fit_residual) + ", even anchor " +
               sci(chain.even_constraint_input) + ", constrained values all zero: " +
               (forced_zero ? "yes" : "NO");
}

}  // namespace

std::vector<CriterionResult> run_acceptance_battery(const Config& cfg) {
    using Fn = void (*)(const Config&, CriterionResult&);
    struct Entry {
        const char* name;
        Fn fn;
    };
    const Entry entries[] = {
        {"sphere-kernel-constants", crit_sphere_constants},
        {"projector-series", crit_projector_series},
        {"derivative-identity", crit_derivative_identity},
        {"stationary-phase-engine", crit_stationary_phase},
        {"expansion-fit-duality", crit_expansion_fit},
        {"symplectic-splitting", crit_symplectic_splitting},
        {"contact-forms", crit_contact_forms},
        {"hopf-classes", crit_hopf_classes},
        {"gluing-additivity", crit_gluing_additivity},
        {"deformation-invariance", crit_deformation_invariance},
        {"vanishing-chain", crit_vanishing_chain},
    };

    std::vector<CriterionResult> out;
    int index = 1;
    for (const Entry& e : entries) {
        CriterionResult res;
        res.index = index++;
        res.name = e.name;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            e.fn(cfg, res);
        } catch (const std::exception& ex) {
            res.pass = false;
            res.detail = std::string("exception: ") + ex.what();
        }
        res.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(res));
    }
    return out;
}

}  // namespace tll
