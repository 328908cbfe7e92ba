#pragma once

// Contact geometry of the unit three-sphere in quaternionic coordinates.
//
// The sphere is parametrized by two complex numbers z1 = x0 + i x1 = r1 e^{i th1},
// z2 = x2 + i x3 = r2 e^{i th2} with r1^2 + r2^2 = 1, and by the latitude
// phi in [0, pi/2] defined through tan(phi) = (r2/r1)^2.  A coefficient-pair
// contact form is a(phi) dth1 + b(phi) dth2; the library ships the standard
// form, its opposite-orientation partner, and the twisted family with
// coefficients (cos((2n+1)phi), sin((2n+1)phi)).
//
// The module provides: contact condition and volume checks, a product
// quadrature reproducing the round measure, the cotangent trivialization
// sending a nonvanishing coefficient form to a map S^3 -> S^2, the integer
// degree of such maps in pi_3(S^2) (with a linking-number cross-check),
// connected-sum gluing of forms and of scalar densities, and the periodic
// extension of a density seed over the twisted family.

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace tll {

// ---------------------------------------------------------------------------
// Quaternions and torus coordinates
// ---------------------------------------------------------------------------

struct Quaternion {
    double x0 = 0.0, x1 = 0.0, x2 = 0.0, x3 = 0.0;

    Quaternion conjugate() const { return {x0, -x1, -x2, -x3}; }
    double norm_sq() const { return x0 * x0 + x1 * x1 + x2 * x2 + x3 * x3; }
    double norm() const;
    bool is_unit(double tol = 1e-12) const;

    Quaternion operator*(const Quaternion& o) const;
    Quaternion operator+(const Quaternion& o) const {
        return {x0 + o.x0, x1 + o.x1, x2 + o.x2, x3 + o.x3};
    }
    Quaternion operator-(const Quaternion& o) const {
        return {x0 - o.x0, x1 - o.x1, x2 - o.x2, x3 - o.x3};
    }
    Quaternion scaled(double c) const { return {c * x0, c * x1, c * x2, c * x3}; }

    // Components of the imaginary part, in the (I, J, K) basis.
    std::array<double, 3> imaginary() const { return {x1, x2, x3}; }
};

double dot(const Quaternion& a, const Quaternion& b);

struct TorusCoords {
    double r1 = 1.0, r2 = 0.0;
    double theta1 = 0.0, theta2 = 0.0;
    double phi = 0.0;  // latitude, tan(phi) = (r2/r1)^2

    static TorusCoords from_quaternion(const Quaternion& x);
    static TorusCoords from_angles(double phi, double theta1, double theta2);
    Quaternion to_quaternion() const;

    // Rescaled latitude used by the twisted family: psi = (2n+1) phi.
    double psi(int n) const { return (2 * n + 1) * phi; }
};

// ---------------------------------------------------------------------------
// Coefficient-pair contact forms
// ---------------------------------------------------------------------------

// A 1-form a(phi) dtheta1 + b(phi) dtheta2 with smooth coefficients supplied
// together with their derivatives.  Smoothness of the form on the whole
// sphere requires b(0) = 0 and a(pi/2) = 0 (the angle whose circle collapses
// at an end of the latitude interval must lose its coefficient there); the
// factories enforce both.
struct ContactFormS3 {
    std::function<double(double)> a, da, b, db;
    std::string name;

    // Standard form r1^2 dth1 + r2^2 dth2 expressed in the latitude variable.
    static ContactFormS3 standard_form();
    // Opposite-orientation partner -r1^2 dth1 + r2^2 dth2.
    static ContactFormS3 standard_opposite();
    // Twisted family (cos((2n+1)phi), sin((2n+1)phi)), n >= 0.
    static ContactFormS3 twisted(int n);
    // Constant multiple.
    static ContactFormS3 scaled(const ContactFormS3& f, double kappa);
    // Multiply by a positive function of latitude: (g a, g b).
    static ContactFormS3 conformal_multiple(const ContactFormS3& f,
                                            std::function<double(double)> g,
                                            std::function<double(double)> dg,
                                            const std::string& label = "");
    // Natural cubic spline through samples on a latitude grid (at least four
    // nodes; derivative comes from the spline polynomial).
    static ContactFormS3 from_samples(const std::vector<double>& phi,
                                      const std::vector<double>& a,
                                      const std::vector<double>& b);
};

// a b' - b a' at the given latitude; positive everywhere for a positively
// oriented contact form.
double contact_value(const ContactFormS3& form, double phi);

// Positivity of contact_value on a 1000-point latitude grid plus the
// endpoint vanishing conditions.
bool is_contact(const ContactFormS3& form);

// ---------------------------------------------------------------------------
// Quadrature on the round sphere
// ---------------------------------------------------------------------------

// Product grid: Gauss-Legendre in the angle alpha (r1 = cos alpha,
// r2 = sin alpha), uniform trapezoid in theta1 and theta2.  The per-node
// weights reproduce the round volume element; the total weight is
// Vol(S^3) = 2 pi^2.
struct S3Quadrature {
    int n_phi = 64;    // latitude nodes
    int n_theta = 64;  // nodes per angular circle

    std::vector<double> alpha;     // Gauss nodes in (0, pi/2)
    std::vector<double> w_alpha;   // Gauss weights
    std::vector<double> phi;       // latitude of each node, atan(tan^2 alpha)
    std::vector<double> dphi;      // d phi / d alpha at each node
    std::vector<double> theta;     // uniform angles [0, 2pi)

    static S3Quadrature make(int n_phi = 64, int n_theta = 64);

    std::size_t num_nodes() const {
        return static_cast<std::size_t>(n_phi) * n_theta * n_theta;
    }
    std::size_t index(int i, int j1, int j2) const {
        return (static_cast<std::size_t>(i) * n_theta + j1) * n_theta + j2;
    }
    TorusCoords node(int i, int j1, int j2) const;
    // Round-measure weight of every node in latitude slice i.
    double slice_weight(int i) const;
    double total_weight() const;

    // Integral against the round measure.
    double integrate(const std::function<double(const TorusCoords&)>& f) const;
};

// Scalar field sampled on the quadrature grid, one value per node.
using GridField = std::vector<double>;

GridField sample_field(const S3Quadrature& q,
                       const std::function<double(const TorusCoords&)>& f);
double integrate(const S3Quadrature& q, const GridField& field);

// Integral of form /\ d(form) over the sphere via the coefficient expression
// (a b' - b a') dphi dth1 dth2.
double volume_integral(const ContactFormS3& form, const S3Quadrature& q);

// volume_integral for the standard form; expected 2 Vol(S^3) = 4 pi^2.
double standard_volume_check(const S3Quadrature& q);

// ---------------------------------------------------------------------------
// Trivialization and the degree in pi_3(S^2)
// ---------------------------------------------------------------------------

// A map S^3 -> S^2, values as unit imaginary quaternions in the (I, J, K)
// basis.
struct HopfMap {
    std::function<std::array<double, 3>(const TorusCoords&)> u;
    std::string name;
};

// Express the coefficient form in the right-translation coframe: at x the
// covector is (u x) for a unique imaginary quaternion u(x); normalizing u
// gives the direction map.  Requires (a, b) to have no common zero.  The
// standard form maps to the constant I.
HopfMap trivialize(const ContactFormS3& form);

HopfMap constant_map(const std::array<double, 3>& axis);
// x -> x I conj(x), the generator fibration.
HopfMap generator_map();
// x -> conj(x) I x, the quaternionic conjugate of the generator.
HopfMap generator_conjugate_map();
// Compose a map with a rotation of the target sphere (row-major 3x3 matrix).
HopfMap rotate_map(const HopfMap& m, const std::array<double, 9>& rot);

struct HopfReport {
    int degree = 0;          // rounded integer class
    double value = 0.0;      // pre-rounding float
    double certificate = 0.0;  // |value - degree|
    int winding1 = 0, winding2 = 0;  // angular windings of the transverse phase
    double equivariance_residual = 0.0;
    double cos_start = 0.0, cos_end = 0.0;  // axis component at the two poles
};

// Degree of the map in pi_3(S^2).  The map must be equivariant: a rotation
// about a fixed axis of the target by m1 th1 + m2 th2 composed with a
// latitude profile (every map produced by trivialize and the generator maps
// are of this type; the residual against that structure is checked and
// reported).  The pullback of the normalized area form is integrated against
// the primitive solved in the reduced latitude variable.  The sign convention
// is calibrated so that the opposite-orientation standard form reports -1;
// see docs/formats.md.
//
// Throws when the samples are too coarse (neighboring values further than
// 0.5 apart on the target), when the equivariance residual exceeds 1e-6, or
// when the rounding certificate exceeds 0.1.
HopfReport hopf_invariant(const HopfMap& map, const S3Quadrature& q);

struct LinkingReport {
    int linking = 0;
    double value = 0.0;
    double certificate = 0.0;
};

// Independent cross-check of the degree: extract the preimage circles of two
// regular values, push them to R^3 by stereographic projection, and evaluate
// the Gauss linking integral.  Requires the latitude profile to cross the
// sampled levels exactly once (true for the generator maps).
LinkingReport linking_number_oracle(const HopfMap& map, const S3Quadrature& q,
                                    int curve_samples = 512);

// ---------------------------------------------------------------------------
// Connected-sum gluing
// ---------------------------------------------------------------------------

// Smooth transition profile on [0, 1]: 0 near the left end, 1 near the right.
struct CollarProfile {
    std::function<double(double)> chi, dchi;

    // Cumulative integral of the bump exp(1 - 1/(1 - (2s-1)^2)), normalized.
    static CollarProfile standard_profile();
    // Transition compressed into [center - width/2, center + width/2]; small
    // widths produce a derivative spike.
    static CollarProfile steep_profile(double center, double width);
};

// Glue two coefficient forms across the latitude corona (phi_lo, phi_hi):
// the result equals f1 below, f2 above, and interpolates through the collar
// profile inside.  The interpolant must itself satisfy the contact
// condition; otherwise throws "collar deformation failed".
ContactFormS3 glue_forms(const ContactFormS3& f1, const ContactFormS3& f2,
                         const CollarProfile& collar = CollarProfile::standard_profile(),
                         double phi_lo = 0.5, double phi_hi = 1.0);

// Glue two scalar fields supported away from their caps: d1 must vanish for
// phi >= phi_lo, d2 for phi <= phi_hi.  The sum then restricts to each
// summand on its support and the integral is exactly additive.
GridField glue_log_densities(const S3Quadrature& q, const GridField& d1,
                             const GridField& d2, double phi_lo = 0.5,
                             double phi_hi = 1.0, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Periodic densities over the twisted family
// ---------------------------------------------------------------------------

struct PeriodicDensityReport {
    int n = 0;
    int copies = 0;            // 2n
    double seed_integral = 0.0;
    double integral = 0.0;     // = copies * seed_integral
    std::vector<double> field;  // block-concatenated samples, one block per copy
};

// Extend a density seed, given on one period of the rescaled latitude
// psi in [0, pi/2] and vanishing near the period ends, to 2n copies via the
// symmetry (psi, th1, th2) -> (psi + pi/2, -th2, th1).  The integral is
// exactly copies * seed_integral at quadrature level.
PeriodicDensityReport lambda_n_periodic_density(
    int n, const std::function<double(double, double, double)>& seed,
    const S3Quadrature& q);

// ---------------------------------------------------------------------------
// Homotopy of nonvanishing coefficient triples
// ---------------------------------------------------------------------------

struct HomotopyReport {
    int n = 0;
    double min_triple_norm = 0.0;  // min over the path of |(a, b, chi)|
    int start_class = 0;
    int end_class = 0;
    bool parity_consistent = false;
};

// Three-stage deformation of the twisted form to its parity representative
// (n even -> the n = 0 member, n odd -> the n = 1 member): grow a positive
// dphi component, interpolate the coefficient pair, remove the dphi
// component.  Reports the minimal triple norm along the sampled path and the
// degrees at both ends.
HomotopyReport twisted_homotopy_report(int n, const S3Quadrature& q,
                                       int t_samples = 21, int phi_samples = 257);

}  // namespace tll
