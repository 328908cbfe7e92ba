#include "tll/symplectic.hpp"

#include <complex>
#include <stdexcept>

namespace tll {

using Complex = std::complex<double>;

HamiltonianModel hamiltonianModel_checks(const Eigen::MatrixXcd& Q, const Eigen::MatrixXd& omega) {
    if (Q.rows() != Q.cols() || omega.rows() != omega.cols() || Q.rows() != omega.rows())
        throw std::invalid_argument("hamiltonian_map: dimension mismatch");
    if (Q.rows() % 2 != 0) throw std::invalid_argument("hamiltonian_map: dimension must be even");
    double qs = (Q - Q.transpose()).cwiseAbs().maxCoeff();
    if (qs > 1e-10 * std::max(1.0, Q.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("hamiltonian_map: q is not symmetric");
    double os = (omega + omega.transpose()).cwiseAbs().maxCoeff();
    if (os > 1e-10 * std::max(1.0, omega.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("hamiltonian_map: omega is not antisymmetric");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(omega);
    if (!lu.isInvertible()) throw std::invalid_argument("hamiltonian_map: omega is degenerate");
    HamiltonianModel m;
    m.Q = Q;
    m.omega = omega;
    m.A = lu.solve(Eigen::MatrixXd::Identity(omega.rows(), omega.cols())).cast<Complex>() * Q;
    m.residual = (Q + m.A.transpose() * omega.cast<Complex>()).cwiseAbs().maxCoeff();
    return m;
}

HamiltonianModel hamiltonian_map(const Eigen::MatrixXcd& Q, const Eigen::MatrixXd& omega) {
    return hamiltonianModel_checks(Q, omega);
}

SpectralSplitting spectral_splitting(const Eigen::MatrixXcd& A, const Eigen::MatrixXd& omega) {
    const int n = static_cast<int>(A.rows());
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A);
    if (es.info() != Eigen::Success) throw std::runtime_error("spectral_splitting: eigensolver failed");

    std::vector<int> plus, minus;
    for (int i = 0; i < n; ++i) {
        double im = es.eigenvalues()(i).imag();
        if (std::abs(im) < 1e-8)
            throw std::runtime_error("spectral_splitting: eigenvalue too close to the real axis");
        (im > 0 ? plus : minus).push_back(i);
    }
    if (plus.size() != minus.size())
        throw std::runtime_error("spectral_splitting: unbalanced eigenvalue halves");

    auto gather = [&](const std::vector<int>& idx) {
        Eigen::MatrixXcd B(n, idx.size());
        for (std::size_t c = 0; c < idx.size(); ++c) B.col(c) = es.eigenvectors().col(idx[c]);
        // Orthonormalize for stable residuals and projectors.
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(B);
        Eigen::MatrixXcd Qm = qr.householderQ() * Eigen::MatrixXcd::Identity(n, idx.size());
        return Qm;
    };

    SpectralSplitting s;
    s.eigenvalues = es.eigenvalues();
    s.e_plus = gather(plus);
    s.e_minus = gather(minus);

    Eigen::MatrixXcd Oc = omega.cast<Complex>();
    double lag = 0.0;
    for (const auto* B : {&s.e_plus, &s.e_minus}) {
        Eigen::MatrixXcd G = B->transpose() * Oc * (*B);  // omega restricted to the half
        lag = std::max(lag, G.cwiseAbs().maxCoeff());
    }
    s.lagrangian_residual = lag;

    Eigen::MatrixXcd P = s.e_plus.transpose() * Oc * s.e_minus;  // duality pairing
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(P);
    s.duality_min_singular = svd.singularValues().minCoeff();
    return s;
}

namespace {
int definite_sign(const Eigen::MatrixXcd& basis, const Eigen::MatrixXd& omega, double& margin) {
    // h(z) = Re[(1/i) z^T Omega conj(z)]; on a basis B with z = B c the value
    // is c^H M c for M = conj((1/i) B^T Omega conj(B)), Hermitian up to
    // roundoff for omega-isotropic subspaces.
    Eigen::MatrixXcd G = Complex(0, -1) * basis.transpose() * omega.cast<Complex>() * basis.conjugate();
    Eigen::MatrixXcd M = G.conjugate();
    Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    margin = std::min(std::abs(lo), std::abs(hi));
    if (lo > 0) return 1;
    if (hi < 0) return -1;
    throw std::runtime_error("positivity_signature: restricted form is indefinite");
}
}  // namespace

Signature positivity_signature(const SpectralSplitting& split, const Eigen::MatrixXd& omega) {
    Signature sig;
    double m1 = 0, m2 = 0;
    sig.plus = definite_sign(split.e_plus, omega, m1);
    sig.minus = definite_sign(split.e_minus, omega, m2);
    sig.min_abs_eigenvalue = std::min(m1, m2);
    return sig;
}

Eigen::MatrixXcd subspace_projector(const Eigen::MatrixXcd& basis) {
    // Orthonormalize first so the projector depends only on the span.
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(basis);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(basis.rows(), basis.cols());
    return q * q.adjoint();
}

double subspace_gap(const Eigen::MatrixXcd& basis1, const Eigen::MatrixXcd& basis2) {
    Eigen::MatrixXcd D = subspace_projector(basis1) - subspace_projector(basis2);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(D);
    return svd.singularValues().maxCoeff();
}

HamiltonianModel random_hamiltonian_model(int dim, Rng& rng) {
    if (dim % 2 != 0 || dim < 2) throw std::invalid_argument("random_hamiltonian_model: dim must be even");
    // Re Q = R R^T + I keeps the real part positive definite.
    Eigen::MatrixXd R(dim, dim), Qi(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) R(i, j) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) Qi(i, j) = Qi(j, i) = 0.3 * rng.uniform(-1.0, 1.0);
    Eigen::MatrixXcd Q =
        (R * R.transpose() + Eigen::MatrixXd::Identity(dim, dim)).cast<Complex>() +
        Complex(0, 1) * Qi.cast<Complex>();

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim / 2; ++i) {
        J(i, dim / 2 + i) = 1.0;
        J(dim / 2 + i, i) = -1.0;
    }
    // Congruence by a well-conditioned random S keeps omega antisymmetric.
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) S(i, j) += 0.3 * rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd omega = S.transpose() * J * S;
    return hamiltonian_map(Q, omega);
}

}  // namespace tll
