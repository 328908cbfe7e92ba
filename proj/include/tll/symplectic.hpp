#pragma once

// Linear symplectic models: the map A attached to a complex quadratic form q
// by q(x, y) = -omega(Ax, y), its eigen-splitting into conjugate Lagrangian
// subspaces, and the definiteness signature of the induced Hermitian form.

#include <Eigen/Dense>

#include "tll/rng.hpp"

namespace tll {

struct HamiltonianModel {
    Eigen::MatrixXcd Q;      // complex symmetric
    Eigen::MatrixXd omega;   // real antisymmetric invertible
    Eigen::MatrixXcd A;      // omega^{-1} Q
    double residual = 0.0;   // max entry of Q + A^T omega (defining identity)
};

// Build A from (q, omega); validates symmetry/antisymmetry/invertibility.
HamiltonianModel hamiltonian_map(const Eigen::MatrixXcd& Q, const Eigen::MatrixXd& omega);

struct SpectralSplitting {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd e_plus;    // orthonormal basis, eigenvalues with Im > 0
    Eigen::MatrixXcd e_minus;   // orthonormal basis, eigenvalues with Im < 0
    double lagrangian_residual = 0.0;  // max |omega(b_i, b_j)| within each half
    double duality_min_singular = 0.0; // smallest singular value of the pairing
};

// Split C^{2n} by the sign of Im(lambda); errors if any eigenvalue is within
// 1e-8 of the real axis or if the halves are unbalanced.
SpectralSplitting spectral_splitting(const Eigen::MatrixXcd& A, const Eigen::MatrixXd& omega);

struct Signature {
    int plus = 0;                    // sign of the form on E^+ (+1/-1)
    int minus = 0;                   // sign on E^-
    double min_abs_eigenvalue = 0.0; // definiteness margin across both halves
};

// Definiteness of h(z) = Re[(1/i) omega(z, conj z)] on E^+/-.  Convention
// fixed here: with omega(u,v) = u^T Omega v, the standard R^2 model
// (omega = [[0,1],[-1,0]], q = I) gives h > 0 on E^+ (eigenvalue +i,
// eigenvector (1, -i)) and h < 0 on E^-.
Signature positivity_signature(const SpectralSplitting& split, const Eigen::MatrixXd& omega);

// Orthogonal projector onto the column span; the basis need not be
// orthonormal (it is orthonormalized internally).
Eigen::MatrixXcd subspace_projector(const Eigen::MatrixXcd& basis);

// Spectral gap between two subspaces: ||P1 - P2||_2.
double subspace_gap(const Eigen::MatrixXcd& basis1, const Eigen::MatrixXcd& basis2);

// Seeded random model with Re Q positive definite (so A has no real
// eigenvalues) and omega a random congruence image of the standard form.
HamiltonianModel random_hamiltonian_model(int dim, Rng& rng);

}  // namespace tll
