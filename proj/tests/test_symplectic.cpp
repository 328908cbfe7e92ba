// Linear symplectic models: quadratic form -> Hamiltonian map, spectral
// splitting into conjugate Lagrangian subspaces, positivity signature, and
// stability of the splitting along convex paths.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tll/rng.hpp"
#include "tll/scalars.hpp"
#include "tll/symplectic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>

using namespace tll;

namespace {

Eigen::MatrixXd standard_omega(int dim) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i + 1 < dim; i += 2) {
        w(i, i + 1) = 1.0;
        w(i + 1, i) = -1.0;
    }
    return w;
}

}  // namespace

TEST_CASE("flat plane model: identity form maps to the rotation generator") {
    Eigen::MatrixXd omega = standard_omega(2);
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Identity(2, 2);
    HamiltonianModel m = hamiltonian_map(Q, omega);

    Eigen::MatrixXcd expected(2, 2);
    expected << 0.0, -1.0, 1.0, 0.0;
    CHECK((m.A - expected).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(m.residual < 1e-14);
}

TEST_CASE("the map is linear in the quadratic form") {
    Rng rng(101);
    Eigen::MatrixXd omega = standard_omega(4);
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j <= i; ++j) {
            Q(i, j) = rng.complex_in_disc();
            Q(j, i) = Q(i, j);  // complex symmetric quadratic form
        }
    HamiltonianModel m1 = hamiltonian_map(Q, omega);
    HamiltonianModel m3 = hamiltonian_map(Complex(3.0, 0.0) * Q, omega);
    CHECK((m3.A - 3.0 * m1.A).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("random models round-trip the defining identity") {
    Rng rng(7);
    for (int dim : {2, 4, 6, 8}) {
        HamiltonianModel m = random_hamiltonian_model(dim, rng);
        CHECK(m.residual < 1e-12);
        // rebuild the form from the map and compare
        HamiltonianModel again = hamiltonian_map(m.Q, m.omega);
        CHECK((again.A - m.A).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("seeded model generation is reproducible") {
    Rng a(99), b(99);
    HamiltonianModel ma = random_hamiltonian_model(6, a);
    HamiltonianModel mb = random_hamiltonian_model(6, b);
    CHECK((ma.Q - mb.Q).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ma.A - mb.A).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("plane model splitting: conjugate eigenlines, certified positivity") {
    Eigen::MatrixXd omega = standard_omega(2);
    Eigen::MatrixXcd A(2, 2);
    A << 0.0, -1.0, 1.0, 0.0;
    SpectralSplitting sp = spectral_splitting(A, omega);

    // eigenvalues are +-i
    double ev_gap = 1e9;
    for (int i = 0; i < 2; ++i)
        ev_gap = std::min(ev_gap, std::abs(sp.eigenvalues(i) - Complex(0.0, 1.0)));
    CHECK(ev_gap < 1e-12);
    CHECK(std::abs(sp.eigenvalues(0) + sp.eigenvalues(1)) < 1e-12);

    // The positive subspace is the +i eigenline span{(1, -i)}; the sign is
    // pinned by positivity of the induced Hermitian form, not by ordering.
    Eigen::MatrixXcd line(2, 1);
    line << Complex(1.0, 0.0), Complex(0.0, -1.0);
    CHECK(subspace_gap(sp.e_plus, line) < 1e-10);

    CHECK(sp.lagrangian_residual < 1e-14);
    CHECK(sp.duality_min_singular > 0.1);

    Signature sig = positivity_signature(sp, omega);
    CHECK(sig.plus == 1);
    CHECK(sig.minus == -1);
    CHECK(sig.min_abs_eigenvalue > 0.5);

    // swapping the two subspaces flips both signs
    SpectralSplitting swapped = sp;
    std::swap(swapped.e_plus, swapped.e_minus);
    Signature flipped = positivity_signature(swapped, omega);
    CHECK(flipped.plus == -1);
    CHECK(flipped.minus == 1);
}

TEST_CASE("direct sums split blockwise") {
    Eigen::MatrixXd omega = standard_omega(4);
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Identity(4, 4);
    Q(2, 2) = Q(3, 3) = 2.0;  // second block twice as stiff
    HamiltonianModel m = hamiltonian_map(Q, omega);
    SpectralSplitting sp = spectral_splitting(m.A, omega);

    // block eigenlines (1, -i) in each plane
    Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(4, 2);
    expect(0, 0) = 1.0;
    expect(1, 0) = Complex(0.0, -1.0);
    expect(2, 1) = 1.0;
    expect(3, 1) = Complex(0.0, -1.0);
    CHECK(subspace_gap(sp.e_plus, expect) < 1e-10);

    // eigenvalue magnitudes 1 and 2
    double lo = 1e9, hi = 0.0;
    for (int i = 0; i < 4; ++i) {
        lo = std::min(lo, std::abs(sp.eigenvalues(i)));
        hi = std::max(hi, std::abs(sp.eigenvalues(i)));
    }
    CHECK(std::abs(lo - 1.0) < 1e-12);
    CHECK(std::abs(hi - 2.0) < 1e-12);
}

TEST_CASE("random ensembles keep spectra off the real axis with dual Lagrangian pieces") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        int dim = 2 * (1 + trial % 4);
        HamiltonianModel m = random_hamiltonian_model(dim, rng);
        SpectralSplitting sp = spectral_splitting(m.A, m.omega);

        double min_im = 1e9;
        for (int i = 0; i < dim; ++i) min_im = std::min(min_im, std::abs(sp.eigenvalues(i).imag()));
        CHECK(min_im > 1e-6);
        CHECK(sp.lagrangian_residual < 1e-10);
        CHECK(sp.duality_min_singular > 1e-6);

        // spectrum symmetric under negation
        double worst_pair = 0.0;
        for (int i = 0; i < dim; ++i) {
            double best = 1e9;
            for (int j = 0; j < dim; ++j)
                best = std::min(best, std::abs(sp.eigenvalues(i) + sp.eigenvalues(j)));
            worst_pair = std::max(worst_pair, best);
        }
        CHECK(worst_pair < 1e-8);

        Signature sig = positivity_signature(sp, m.omega);
        CHECK(sig.plus == 1);
        CHECK(sig.minus == -1);
        CHECK(sig.min_abs_eigenvalue > 1e-6);
    }
}

TEST_CASE("the splitting moves continuously along convex paths of forms") {
    Rng rng(29);
    HamiltonianModel m0 = random_hamiltonian_model(4, rng);
    HamiltonianModel m1 = random_hamiltonian_model(4, rng);
    Eigen::MatrixXcd prev;
    for (int k = 0; k <= 10; ++k) {
        double t = k / 10.0;
        Eigen::MatrixXcd Qt = (1.0 - t) * m0.Q + t * m1.Q;
        HamiltonianModel mt = hamiltonian_map(Qt, m0.omega);
        SpectralSplitting sp = spectral_splitting(mt.A, m0.omega);
        Signature sig = positivity_signature(sp, m0.omega);
        CHECK(sig.plus == 1);
        CHECK(sig.minus == -1);
        if (k > 0) CHECK(subspace_gap(prev, sp.e_plus) < 0.2);
        prev = sp.e_plus;
    }
}

TEST_CASE("subspace projector and gap behave as metric primitives") {
    Rng rng(37);
    Eigen::MatrixXcd basis(4, 2);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) basis(i, j) = rng.complex_in_disc();
    Eigen::MatrixXcd P = subspace_projector(basis);
    CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((P * basis - basis).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((P - P.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

    // invariance under change of basis of the same span
    Eigen::MatrixXcd mixed = basis;
    mixed.col(0) = 2.0 * basis.col(0) + Complex(0.0, 1.0) * basis.col(1);
    CHECK(subspace_gap(basis, mixed) < 1e-12);

    // orthogonal coordinate planes are at unit gap
    Eigen::MatrixXcd e0 = Eigen::MatrixXcd::Zero(4, 1), e1 = Eigen::MatrixXcd::Zero(4, 1);
    e0(0, 0) = 1.0;
    e1(1, 0) = 1.0;
    CHECK(subspace_gap(e0, e1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectra touching the real axis are rejected") {
    Eigen::MatrixXd omega = standard_omega(2);
    Eigen::MatrixXcd A(2, 2);
    A << 1.0, 0.0, 0.0, -1.0;  // hyperbolic: real eigenvalues
    CHECK_THROWS(spectral_splitting(A, omega));
}
