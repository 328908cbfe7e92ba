#include "tll/contact_s3.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "tll/quadrature.hpp"

namespace tll {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Global sign convention for the degree computation: the orientation of the
// (phi, theta1, theta2) coordinate volume is fixed so that the
// opposite-orientation standard form lands on the class -1.
constexpr double kHopfSign = -1.0;

// The linking oracle carries the matching convention through the
// stereographic chart; pinned against kHopfSign on the generator map.
constexpr double kOracleSign = 1.0;

double wrap_angle(double t) {
    while (t <= -kPi) t += 2.0 * kPi;
    while (t > kPi) t -= 2.0 * kPi;
    return t;
}

std::array<double, 3> cross(const std::array<double, 3>& a,
                            const std::array<double, 3>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

double norm3(const std::array<double, 3>& a) { return std::sqrt(dot3(a, a)); }

std::array<double, 3> normalized3(const std::array<double, 3>& a) {
    const double n = norm3(a);
    if (n < 1e-300) throw std::runtime_error("cannot normalize a zero vector");
    return {a[0] / n, a[1] / n, a[2] / n};
}

// Rotation of v about the unit axis e by angle t (Rodrigues).
std::array<double, 3> rotate_about(const std::array<double, 3>& e,
                                   const std::array<double, 3>& v, double t) {
    const double c = std::cos(t), s = std::sin(t);
    const std::array<double, 3> exv = cross(e, v);
    const double ev = dot3(e, v);
    return {v[0] * c + exv[0] * s + e[0] * ev * (1.0 - c),
            v[1] * c + exv[1] * s + e[1] * ev * (1.0 - c),
            v[2] * c + exv[2] * s + e[2] * ev * (1.0 - c)};
}

double geodesic_distance(const std::array<double, 3>& a,
                         const std::array<double, 3>& b) {
    return std::acos(std::clamp(dot3(a, b), -1.0, 1.0));
}

}  // namespace

// ---------------------------------------------------------------------------
// Quaternions and torus coordinates
// ---------------------------------------------------------------------------

double Quaternion::norm() const { return std::sqrt(norm_sq()); }

bool Quaternion::is_unit(double tol) const {
    return std::abs(norm_sq() - 1.0) < tol;
}

Quaternion Quaternion::operator*(const Quaternion& o) const {
    return {x0 * o.x0 - x1 * o.x1 - x2 * o.x2 - x3 * o.x3,
            x0 * o.x1 + x1 * o.x0 + x2 * o.x3 - x3 * o.x2,
            x0 * o.x2 - x1 * o.x3 + x2 * o.x0 + x3 * o.x1,
            x0 * o.x3 + x1 * o.x2 - x2 * o.x1 + x3 * o.x0};
}

double dot(const Quaternion& a, const Quaternion& b) {
    return a.x0 * b.x0 + a.x1 * b.x1 + a.x2 * b.x2 + a.x3 * b.x3;
}

TorusCoords TorusCoords::from_quaternion(const Quaternion& x) {
    TorusCoords t;
    t.r1 = std::hypot(x.x0, x.x1);
    t.r2 = std::hypot(x.x2, x.x3);
    t.theta1 = (t.r1 > 0.0) ? std::atan2(x.x1, x.x0) : 0.0;
    t.theta2 = (t.r2 > 0.0) ? std::atan2(x.x3, x.x2) : 0.0;
    if (t.theta1 < 0.0) t.theta1 += 2.0 * kPi;
    if (t.theta2 < 0.0) t.theta2 += 2.0 * kPi;
    t.phi = std::atan2(t.r2 * t.r2, t.r1 * t.r1);
    return t;
}

TorusCoords TorusCoords::from_angles(double phi, double theta1, double theta2) {
    if (phi < 0.0 || phi > kPi / 2.0 + 1e-12) {
        throw std::invalid_argument("TorusCoords: latitude must lie in [0, pi/2]");
    }
    TorusCoords t;
    // tan(phi) = (r2/r1)^2 with r1^2 + r2^2 = 1 gives
    // r1^2 = cos(phi) / (cos(phi) + sin(phi)).
    const double c = std::cos(phi), s = std::sin(phi);
    t.r1 = std::sqrt(c / (c + s));
    t.r2 = std::sqrt(s / (c + s));
    t.theta1 = theta1;
    t.theta2 = theta2;
    t.phi = phi;
    return t;
}

Quaternion TorusCoords::to_quaternion() const {
    return {r1 * std::cos(theta1), r1 * std::sin(theta1), r2 * std::cos(theta2),
            r2 * std::sin(theta2)};
}

// ---------------------------------------------------------------------------
// Contact forms
// ---------------------------------------------------------------------------

namespace {

void check_endpoints(const ContactFormS3& f) {
    if (std::abs(f.b(0.0)) > 1e-12) {
        throw std::invalid_argument(
            "ContactFormS3: the dtheta2 coefficient must vanish at phi = 0");
    }
    if (std::abs(f.a(kPi / 2.0)) > 1e-12) {
        throw std::invalid_argument(
            "ContactFormS3: the dtheta1 coefficient must vanish at phi = pi/2");
    }
}

}  // namespace

ContactFormS3 ContactFormS3::standard_form() {
    ContactFormS3 f;
    // r1^2 = cos/(cos+sin), r2^2 = sin/(cos+sin).
    f.a = [](double p) { return std::cos(p) / (std::cos(p) + std::sin(p)); };
    f.b = [](double p) { return std::sin(p) / (std::cos(p) + std::sin(p)); };
    f.da = [](double p) {
        const double d = std::cos(p) + std::sin(p);
        return -1.0 / (d * d);
    };
    f.db = [](double p) {
        const double d = std::cos(p) + std::sin(p);
        return 1.0 / (d * d);
    };
    f.name = "standard";
    check_endpoints(f);
    return f;
}

ContactFormS3 ContactFormS3::standard_opposite() {
    ContactFormS3 f = standard_form();
    auto a = f.a;
    auto da = f.da;
    f.a = [a](double p) { return -a(p); };
    f.da = [da](double p) { return -da(p); };
    f.name = "standard-opposite";
    check_endpoints(f);
    return f;
}

ContactFormS3 ContactFormS3::twisted(int n) {
    if (n < 0) throw std::invalid_argument("twisted: n must be >= 0");
    const double k = 2.0 * n + 1.0;
    ContactFormS3 f;
    f.a = [k](double p) { return std::cos(k * p); };
    f.b = [k](double p) { return std::sin(k * p); };
    f.da = [k](double p) { return -k * std::sin(k * p); };
    f.db = [k](double p) { return k * std::cos(k * p); };
    f.name = "twisted-" + std::to_string(n);
    // cos(k pi/2) = 0 for odd k exactly up to rounding; snap the check.
    if (std::abs(f.b(0.0)) > 1e-12 || std::abs(f.a(kPi / 2.0)) > 1e-12) {
        throw std::invalid_argument("twisted: endpoint conditions violated");
    }
    return f;
}

ContactFormS3 ContactFormS3::scaled(const ContactFormS3& f, double kappa) {
    ContactFormS3 g;
    auto a = f.a, b = f.b, da = f.da, db = f.db;
    g.a = [a, kappa](double p) { return kappa * a(p); };
    g.b = [b, kappa](double p) { return kappa * b(p); };
    g.da = [da, kappa](double p) { return kappa * da(p); };
    g.db = [db, kappa](double p) { return kappa * db(p); };
    g.name = f.name + "-scaled";
    return g;
}

ContactFormS3 ContactFormS3::conformal_multiple(const ContactFormS3& f,
                                                std::function<double(double)> g,
                                                std::function<double(double)> dg,
                                                const std::string& label) {
    ContactFormS3 h;
    auto a = f.a, b = f.b, da = f.da, db = f.db;
    h.a = [a, g](double p) { return g(p) * a(p); };
    h.b = [b, g](double p) { return g(p) * b(p); };
    h.da = [a, da, g, dg](double p) { return dg(p) * a(p) + g(p) * da(p); };
    h.db = [b, db, g, dg](double p) { return dg(p) * b(p) + g(p) * db(p); };
    h.name = label.empty() ? f.name + "-conformal" : label;
    check_endpoints(h);
    return h;
}

namespace {

// Natural cubic spline with analytic derivative.
struct CubicSpline {
    std::vector<double> x, y, m;  // nodes, values, second derivatives

    static CubicSpline fit(const std::vector<double>& x,
                           const std::vector<double>& y) {
        const std::size_t n = x.size();
        CubicSpline s;
        s.x = x;
        s.y = y;
        s.m.assign(n, 0.0);
        // Thomas algorithm for the natural-spline tridiagonal system.
        std::vector<double> diag(n, 2.0), off(n, 0.0), rhs(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
            diag[i] = 2.0 * (h0 + h1);
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
            const double lower = (i > 1) ? h0 : 0.0;
            const double denom = diag[i] - lower * c[i - 1];
            c[i] = h1 / denom;
            d[i] = (rhs[i] - lower * d[i - 1]) / denom;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            s.m[i] = d[i] - c[i] * s.m[i + 1];
            if (i == 1) break;
        }
        return s;
    }

    std::size_t segment(double t) const {
        std::size_t lo =
            std::upper_bound(x.begin(), x.end(), t) - x.begin();
        if (lo == 0) return 0;
        if (lo >= x.size()) return x.size() - 2;
        return lo - 1;
    }

    double eval(double t) const {
        const std::size_t i = segment(t);
        const double h = x[i + 1] - x[i];
        const double u = (x[i + 1] - t) / h, v = (t - x[i]) / h;
        return u * y[i] + v * y[i + 1] +
               ((u * u * u - u) * m[i] + (v * v * v - v) * m[i + 1]) * h * h / 6.0;
    }

    double deriv(double t) const {
        const std::size_t i = segment(t);
        const double h = x[i + 1] - x[i];
        const double u = (x[i + 1] - t) / h, v = (t - x[i]) / h;
        return (y[i + 1] - y[i]) / h +
               ((3.0 * v * v - 1.0) * m[i + 1] - (3.0 * u * u - 1.0) * m[i]) * h / 6.0;
    }
};

}  // namespace

ContactFormS3 ContactFormS3::from_samples(const std::vector<double>& phi,
                                          const std::vector<double>& a,
                                          const std::vector<double>& b) {
    if (phi.size() < 4) {
        throw std::invalid_argument(
            "ContactFormS3::from_samples: need at least four sample points for a "
            "cubic spline with usable derivatives");
    }
    if (phi.size() != a.size() || phi.size() != b.size()) {
        throw std::invalid_argument(
            "ContactFormS3::from_samples: sample arrays must have equal length");
    }
    if (!std::is_sorted(phi.begin(), phi.end())) {
        throw std::invalid_argument(
            "ContactFormS3::from_samples: latitude samples must be increasing");
    }
    auto sa = std::make_shared<CubicSpline>(CubicSpline::fit(phi, a));
    auto sb = std::make_shared<CubicSpline>(CubicSpline::fit(phi, b));
    ContactFormS3 f;
    f.a = [sa](double p) { return sa->eval(p); };
    f.da = [sa](double p) { return sa->deriv(p); };
    f.b = [sb](double p) { return sb->eval(p); };
    f.db = [sb](double p) { return sb->deriv(p); };
    f.name = "spline";
    check_endpoints(f);
    return f;
}

double contact_value(const ContactFormS3& form, double phi) {
    return form.a(phi) * form.db(phi) - form.b(phi) * form.da(phi);
}

bool is_contact(const ContactFormS3& form) {
    if (std::abs(form.b(0.0)) > 1e-12) return false;
    if (std::abs(form.a(kPi / 2.0)) > 1e-12) return false;
    const int n = 1000;
    for (int k = 0; k < n; ++k) {
        const double p = kPi / 2.0 * k / (n - 1.0);
        if (!(contact_value(form, p) > 0.0)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

S3Quadrature S3Quadrature::make(int n_phi, int n_theta) {
    if (n_phi < 4 || n_theta < 4) {
        throw std::invalid_argument("S3Quadrature: resolution too small");
    }
    S3Quadrature q;
    q.n_phi = n_phi;
    q.n_theta = n_theta;
    const Rule1D rule = gauss_legendre(n_phi, 0.0, kPi / 2.0);
    q.alpha = rule.nodes;
    q.w_alpha = rule.weights;
    q.phi.resize(n_phi);
    q.dphi.resize(n_phi);
    for (int i = 0; i < n_phi; ++i) {
        const double t = std::tan(q.alpha[i]);
        // phi = atan(tan^2 alpha); stable on both halves of the interval.
        q.phi[i] = (q.alpha[i] <= kPi / 4.0)
                       ? std::atan(t * t)
                       : kPi / 2.0 - std::atan(1.0 / (t * t));
        // dphi/dalpha = 2 tan (1 + tan^2) / (1 + tan^4)
        const double t2 = t * t;
        q.dphi[i] = (q.alpha[i] <= kPi / 4.0)
                        ? 2.0 * t * (1.0 + t2) / (1.0 + t2 * t2)
                        : 2.0 * (1.0 / t + 1.0 / (t * t2)) / (1.0 + 1.0 / (t2 * t2));
    }
    q.theta.resize(n_theta);
    for (int j = 0; j < n_theta; ++j) q.theta[j] = 2.0 * kPi * j / n_theta;
    return q;
}

TorusCoords S3Quadrature::node(int i, int j1, int j2) const {
    TorusCoords t;
    t.r1 = std::cos(alpha[i]);
    t.r2 = std::sin(alpha[i]);
    t.theta1 = theta[j1];
    t.theta2 = theta[j2];
    t.phi = phi[i];
    return t;
}

double S3Quadrature::slice_weight(int i) const {
    const double dtheta = 2.0 * kPi / n_theta;
    return w_alpha[i] * std::cos(alpha[i]) * std::sin(alpha[i]) * dtheta * dtheta;
}

double S3Quadrature::total_weight() const {
    double s = 0.0;
    for (int i = 0; i < n_phi; ++i) {
        s += slice_weight(i) * n_theta * n_theta;
    }
    return s;
}

double S3Quadrature::integrate(
    const std::function<double(const TorusCoords&)>& f) const {
    double total = 0.0;
    for (int i = 0; i < n_phi; ++i) {
        const double w = slice_weight(i);
        double slice = 0.0;
        for (int j1 = 0; j1 < n_theta; ++j1) {
            for (int j2 = 0; j2 < n_theta; ++j2) {
                slice += f(node(i, j1, j2));
            }
        }
        total += w * slice;
    }
    return total;
}

GridField sample_field(const S3Quadrature& q,
                       const std::function<double(const TorusCoords&)>& f) {
    GridField field(q.num_nodes());
    for (int i = 0; i < q.n_phi; ++i) {
        for (int j1 = 0; j1 < q.n_theta; ++j1) {
            for (int j2 = 0; j2 < q.n_theta; ++j2) {
                field[q.index(i, j1, j2)] = f(q.node(i, j1, j2));
            }
        }
    }
    return field;
}

double integrate(const S3Quadrature& q, const GridField& field) {
    if (field.size() != q.num_nodes()) {
        throw std::invalid_argument("integrate: field size does not match the grid");
    }
    double total = 0.0;
    for (int i = 0; i < q.n_phi; ++i) {
        const double w = q.slice_weight(i);
        double slice = 0.0;
        for (int j1 = 0; j1 < q.n_theta; ++j1) {
            for (int j2 = 0; j2 < q.n_theta; ++j2) {
                slice += field[q.index(i, j1, j2)];
            }
        }
        total += w * slice;
    }
    return total;
}

double volume_integral(const ContactFormS3& form, const S3Quadrature& q) {
    // form /\ d(form) = (a b' - b a') dphi dtheta1 dtheta2; the angular
    // integrals contribute (2 pi)^2 and the latitude integral runs on the
    // Gauss grid through the alpha substitution.
    double s = 0.0;
    for (int i = 0; i < q.n_phi; ++i) {
        s += q.w_alpha[i] * q.dphi[i] * contact_value(form, q.phi[i]);
    }
    return s * 4.0 * kPi * kPi;
}

double standard_volume_check(const S3Quadrature& q) {
    return volume_integral(ContactFormS3::standard_form(), q);
}

// ---------------------------------------------------------------------------
// Trivialization
// ---------------------------------------------------------------------------

HopfMap trivialize(const ContactFormS3& form) {
    // Guard against a common zero of the coefficient pair.
    for (int k = 0; k < 1000; ++k) {
        const double p = kPi / 2.0 * k / 999.0;
        const double av = form.a(p), bv = form.b(p);
        if (av * av + bv * bv < 1e-20) {
            throw std::invalid_argument(
                "trivialize: coefficient pair vanishes; the form is not a "
                "nonvanishing covector field");
        }
    }
    auto a = form.a;
    auto b = form.b;
    HopfMap m;
    m.name = "trivialize(" + form.name + ")";
    m.u = [a, b](const TorusCoords& t) -> std::array<double, 3> {
        const double av = a(t.phi), bv = b(t.phi);
        std::array<double, 3> u;
        if (t.r1 < 1e-8 || t.r2 < 1e-8) {
            // At a degenerate circle the transverse part vanishes and the
            // direction is the sign of the surviving coefficient.
            const double s = av + bv;
            u = {s, 0.0, 0.0};
        } else {
            const Quaternion x = t.to_quaternion();
            // Covector a grad(theta1) + b grad(theta2) as a quaternion.
            const Quaternion c = {-av * x.x1 / (t.r1 * t.r1),
                                  av * x.x0 / (t.r1 * t.r1),
                                  -bv * x.x3 / (t.r2 * t.r2),
                                  bv * x.x2 / (t.r2 * t.r2)};
            const Quaternion w = c * x.conjugate();
            u = w.imaginary();
        }
        const double n = norm3(u);
        if (n < 1e-14) {
            throw std::runtime_error("trivialize: covector vanished at a sample");
        }
        return {u[0] / n, u[1] / n, u[2] / n};
    };
    return m;
}

HopfMap constant_map(const std::array<double, 3>& axis) {
    const std::array<double, 3> e = normalized3(axis);
    HopfMap m;
    m.name = "constant";
    m.u = [e](const TorusCoords&) { return e; };
    return m;
}

HopfMap generator_map() {
    HopfMap m;
    m.name = "generator";
    m.u = [](const TorusCoords& t) {
        const Quaternion x = t.to_quaternion();
        const Quaternion i = {0.0, 1.0, 0.0, 0.0};
        const Quaternion u = x * i * x.conjugate();
        return normalized3(u.imaginary());
    };
    return m;
}

HopfMap generator_conjugate_map() {
    HopfMap m;
    m.name = "generator-conjugate";
    m.u = [](const TorusCoords& t) {
        const Quaternion x = t.to_quaternion();
        const Quaternion i = {0.0, 1.0, 0.0, 0.0};
        const Quaternion u = x.conjugate() * i * x;
        return normalized3(u.imaginary());
    };
    return m;
}

HopfMap rotate_map(const HopfMap& m, const std::array<double, 9>& rot) {
    auto f = m.u;
    HopfMap r;
    r.name = m.name + "-rotated";
    r.u = [f, rot](const TorusCoords& t) -> std::array<double, 3> {
        const std::array<double, 3> v = f(t);
        return {rot[0] * v[0] + rot[1] * v[1] + rot[2] * v[2],
                rot[3] * v[0] + rot[4] * v[1] + rot[5] * v[2],
                rot[6] * v[0] + rot[7] * v[1] + rot[8] * v[2]};
    };
    return r;
}

// ---------------------------------------------------------------------------
// Degree computation
// ---------------------------------------------------------------------------

namespace {

struct EquivariantData {
    std::array<double, 3> e;        // rotation axis on the target
    std::array<double, 3> f1, f2;   // right-handed completion of the axis
    std::vector<double> cos_theta;  // slice profile of the axis component
    std::vector<double> transverse;  // slice profile of the transverse size
    std::vector<std::array<double, 3>> reference;  // u at theta = (0, 0)
    int m1 = 0, m2 = 0;
    double residual = 0.0;
    bool constant = false;
};

// Winding number of a closed sequence of phases.
double phase_winding(const std::vector<double>& chi) {
    double w = 0.0;
    for (std::size_t j = 0; j < chi.size(); ++j) {
        const double next = chi[(j + 1) % chi.size()];
        w += wrap_angle(next - chi[j]);
    }
    return w / (2.0 * kPi);
}

EquivariantData analyze_map(const HopfMap& map, const S3Quadrature& q) {
    const int np = q.n_phi, nt = q.n_theta;
    std::vector<std::array<double, 3>> u(q.num_nodes());
    for (int i = 0; i < np; ++i) {
        for (int j1 = 0; j1 < nt; ++j1) {
            for (int j2 = 0; j2 < nt; ++j2) {
                const std::array<double, 3> v = map.u(q.node(i, j1, j2));
                const double n = norm3(v);
                if (std::abs(n - 1.0) > 1e-10) {
                    throw std::invalid_argument(
                        "hopf_invariant: map values are not unit vectors");
                }
                u[q.index(i, j1, j2)] = v;
            }
        }
    }

    // Resolution: neighboring samples must stay close on the target sphere.
    double max_step = 0.0;
    for (int i = 0; i < np; ++i) {
        for (int j1 = 0; j1 < nt; ++j1) {
            for (int j2 = 0; j2 < nt; ++j2) {
                const auto& v = u[q.index(i, j1, j2)];
                max_step = std::max(
                    max_step, geodesic_distance(v, u[q.index(i, (j1 + 1) % nt, j2)]));
                max_step = std::max(
                    max_step, geodesic_distance(v, u[q.index(i, j1, (j2 + 1) % nt)]));
                if (i + 1 < np) {
                    max_step = std::max(
                        max_step, geodesic_distance(v, u[q.index(i + 1, j1, j2)]));
                }
            }
        }
    }
    if (max_step > 0.5) {
        throw std::runtime_error(
            "hopf_invariant: under-resolved (neighboring samples further than 0.5 "
            "apart on the target)");
    }

    EquivariantData d;

    double spread = 0.0;
    for (const auto& v : u) spread = std::max(spread, geodesic_distance(v, u[0]));
    if (spread < 1e-8) {
        d.constant = true;
        d.e = u[0];
        return d;
    }

    // Axis: the mean over the first latitude slice points along the axis
    // because the transverse phase averages out.
    std::array<double, 3> acc = {0.0, 0.0, 0.0};
    for (int j1 = 0; j1 < nt; ++j1) {
        for (int j2 = 0; j2 < nt; ++j2) {
            const auto& v = u[q.index(0, j1, j2)];
            for (int k = 0; k < 3; ++k) acc[k] += v[k];
        }
    }
    if (norm3(acc) < 1e-8 * nt * nt) {
        throw std::runtime_error(
            "hopf_invariant: could not detect the equivariance axis");
    }
    d.e = normalized3(acc);

    // Right-handed frame completing the axis.
    int least = 0;
    for (int k = 1; k < 3; ++k) {
        if (std::abs(d.e[k]) < std::abs(d.e[least])) least = k;
    }
    std::array<double, 3> seed = {0.0, 0.0, 0.0};
    seed[least] = 1.0;
    const double proj = dot3(seed, d.e);
    for (int k = 0; k < 3; ++k) seed[k] -= proj * d.e[k];
    d.f1 = normalized3(seed);
    d.f2 = cross(d.e, d.f1);

    d.cos_theta.resize(np);
    d.transverse.resize(np);
    d.reference.resize(np);
    for (int i = 0; i < np; ++i) {
        double c = 0.0, tr = 0.0;
        for (int j1 = 0; j1 < nt; ++j1) {
            for (int j2 = 0; j2 < nt; ++j2) {
                const double ce = dot3(u[q.index(i, j1, j2)], d.e);
                c += ce;
                tr += std::sqrt(std::max(0.0, 1.0 - ce * ce));
            }
        }
        d.cos_theta[i] = c / (nt * nt);
        d.transverse[i] = tr / (nt * nt);
        d.reference[i] = u[q.index(i, 0, 0)];
    }

    // Windings of the transverse phase in each angle, measured where the
    // transverse part is largest.
    const int istar =
        std::max_element(d.transverse.begin(), d.transverse.end()) -
        d.transverse.begin();
    if (d.transverse[istar] > 1e-8) {
        std::vector<double> chi1(nt), chi2(nt);
        for (int j = 0; j < nt; ++j) {
            const auto& v1 = u[q.index(istar, j, 0)];
            chi1[j] = std::atan2(dot3(v1, d.f2), dot3(v1, d.f1));
            const auto& v2 = u[q.index(istar, 0, j)];
            chi2[j] = std::atan2(dot3(v2, d.f2), dot3(v2, d.f1));
        }
        const double w1 = phase_winding(chi1), w2 = phase_winding(chi2);
        if (std::abs(w1 - std::round(w1)) > 1e-3 ||
            std::abs(w2 - std::round(w2)) > 1e-3) {
            throw std::runtime_error(
                "hopf_invariant: transverse phase winding is not an integer");
        }
        d.m1 = static_cast<int>(std::lround(w1));
        d.m2 = static_cast<int>(std::lround(w2));
    }

    // Residual against the equivariant model: u(phi, th1, th2) equals the
    // reference value rotated about the axis by m1 th1 + m2 th2.
    double res = 0.0;
    for (int i = 0; i < np; ++i) {
        for (int j1 = 0; j1 < nt; ++j1) {
            for (int j2 = 0; j2 < nt; ++j2) {
                const std::array<double, 3> model = rotate_about(
                    d.e, d.reference[i], d.m1 * q.theta[j1] + d.m2 * q.theta[j2]);
                const auto& v = u[q.index(i, j1, j2)];
                const std::array<double, 3> diff = {v[0] - model[0], v[1] - model[1],
                                                    v[2] - model[2]};
                res = std::max(res, norm3(diff));
            }
        }
    }
    d.residual = res;
    if (res > 1e-6) {
        throw std::runtime_error(
            "hopf_invariant: reduced solve residual above 1e-6 (map is not "
            "equivariant about a fixed target axis)");
    }
    return d;
}

// Linear extrapolation of the axis-component profile to a latitude endpoint.
double extrapolate_profile(const std::vector<double>& phi,
                           const std::vector<double>& c, bool to_start) {
    const std::size_t n = phi.size();
    if (to_start) {
        const double t = (0.0 - phi[0]) / (phi[1] - phi[0]);
        return c[0] + t * (c[1] - c[0]);
    }
    const double t = (kPi / 2.0 - phi[n - 1]) / (phi[n - 1] - phi[n - 2]);
    return c[n - 1] + t * (c[n - 1] - c[n - 2]);
}

}  // namespace

HopfReport hopf_invariant(const HopfMap& map, const S3Quadrature& q) {
    const EquivariantData d = analyze_map(map, q);
    HopfReport r;
    if (d.constant) {
        r.degree = 0;
        r.value = 0.0;
        r.certificate = 0.0;
        r.cos_start = 1.0;
        r.cos_end = 1.0;
        return r;
    }
    r.winding1 = d.m1;
    r.winding2 = d.m2;
    r.equivariance_residual = d.residual;

    // The pullback of the normalized area form is
    //   (1/4pi) sin(Theta) Theta'(phi) dphi /\ (m1 dth1 + m2 dth2),
    // and the primitive alpha = g dth1 + h dth2 regular at both degenerate
    // circles has g, h equal to -cos(Theta)/(4 pi) scaled by m1, m2 and
    // anchored at the two ends.  The invariant integral telescopes to
    //   m1 m2 (cos Theta(0) - cos Theta(pi/2))^2 / 4
    // times the orientation sign of the coordinate volume.
    r.cos_start = extrapolate_profile(q.phi, d.cos_theta, true);
    r.cos_end = extrapolate_profile(q.phi, d.cos_theta, false);
    if (std::abs(std::abs(r.cos_start) - 1.0) > 0.5 ||
        std::abs(std::abs(r.cos_end) - 1.0) > 0.5) {
        throw std::runtime_error(
            "hopf_invariant: under-resolved (axis component does not reach the "
            "poles at the latitude ends)");
    }
    const double delta = r.cos_start - r.cos_end;
    r.value = kHopfSign * d.m1 * d.m2 * delta * delta / 4.0;
    r.degree = static_cast<int>(std::lround(r.value));
    r.certificate = std::abs(r.value - r.degree);
    if (r.certificate > 0.1) {
        throw std::runtime_error(
            "hopf_invariant: under-resolved (rounding certificate above 0.1)");
    }
    return r;
}

// ---------------------------------------------------------------------------
// Linking-number oracle
// ---------------------------------------------------------------------------

namespace {

// Latitude at which the axis-component profile crosses the given level;
// requires exactly one crossing.
double single_crossing(const std::vector<double>& phi,
                       const std::vector<double>& c, double level) {
    int count = 0;
    double found = -1.0;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        if ((c[i] - level) * (c[i + 1] - level) <= 0.0 && c[i] != c[i + 1]) {
            ++count;
            const double t = (level - c[i]) / (c[i + 1] - c[i]);
            found = phi[i] + t * (phi[i + 1] - phi[i]);
        }
    }
    if (count != 1) {
        throw std::runtime_error(
            "linking_number_oracle: latitude profile must cross the sampled levels "
            "exactly once");
    }
    return found;
}

std::array<double, 3> stereographic(const Quaternion& x) {
    // Projection from the pole x0 = -1; curves on interior latitude tori stay
    // clear of it.
    const double d = 1.0 + x.x0;
    return {x.x1 / d, x.x2 / d, x.x3 / d};
}

}  // namespace

LinkingReport linking_number_oracle(const HopfMap& map, const S3Quadrature& q,
                                    int curve_samples) {
    const EquivariantData d = analyze_map(map, q);
    if (d.constant) {
        throw std::runtime_error(
            "linking_number_oracle: the constant map has no regular values");
    }
    if (std::abs(d.m1) != 1 || std::abs(d.m2) != 1) {
        throw std::runtime_error(
            "linking_number_oracle: supported for unit angular windings only");
    }
    const double phi_a = single_crossing(q.phi, d.cos_theta, 0.35);
    const double phi_b = single_crossing(q.phi, d.cos_theta, -0.35);

    // Preimage circles of the two regular values sit on the latitude tori
    // phi_a, phi_b along the angular line m1 th1 + m2 th2 = const.
    const double slope = -static_cast<double>(d.m1) / d.m2;

    // Orient the circles so that (tangent, complement) matches the pullback
    // orientation of the target at the sampled value.
    auto orientation_sign = [&](double phi_c) {
        const double h = 1e-5;
        const std::array<double, 3> p = map.u(TorusCoords::from_angles(phi_c, 0.0, 0.0));
        const std::array<double, 3> up =
            map.u(TorusCoords::from_angles(phi_c + h, 0.0, 0.0));
        const std::array<double, 3> um =
            map.u(TorusCoords::from_angles(phi_c - h, 0.0, 0.0));
        // Second transverse direction: move along (th1, th2) = (1, m1/m2)t,
        // transverse to the fiber line (1, -m1/m2).
        const std::array<double, 3> vp =
            map.u(TorusCoords::from_angles(phi_c, h, -slope * h));
        const std::array<double, 3> vm =
            map.u(TorusCoords::from_angles(phi_c, -h, slope * h));
        std::array<double, 3> w1, w2;
        for (int k = 0; k < 3; ++k) {
            w1[k] = (up[k] - um[k]) / (2.0 * h);
            w2[k] = (vp[k] - vm[k]) / (2.0 * h);
        }
        const double img = dot3(p, cross(w1, w2));
        // Coordinate determinant of (fiber tangent, dphi direction, second
        // transverse direction) in (phi, th1, th2) is -2 m1/m2.
        const double dom = -2.0 * slope * -1.0;  // = 2 m1/m2
        // Align the fiber direction with the pullback orientation.
        return (img * dom >= 0.0) ? 1.0 : -1.0;
    };

    const double dir_a = orientation_sign(phi_a);
    const double dir_b = orientation_sign(phi_b);

    const int n = curve_samples;
    auto build_curve = [&](double phi_c, double dir) {
        std::vector<std::array<double, 3>> pts(n);
        for (int i = 0; i < n; ++i) {
            const double t = dir * 2.0 * kPi * i / n;
            pts[i] = stereographic(
                TorusCoords::from_angles(phi_c, t, slope * t).to_quaternion());
        }
        return pts;
    };
    const std::vector<std::array<double, 3>> ca = build_curve(phi_a, dir_a);
    const std::vector<std::array<double, 3>> cb = build_curve(phi_b, dir_b);

    auto tangents = [&](const std::vector<std::array<double, 3>>& c) {
        std::vector<std::array<double, 3>> t(n);
        for (int i = 0; i < n; ++i) {
            const auto& p = c[(i + 1) % n];
            const auto& m = c[(i + n - 1) % n];
            t[i] = {(p[0] - m[0]) / 2.0, (p[1] - m[1]) / 2.0, (p[2] - m[2]) / 2.0};
        }
        return t;
    };
    const auto ta = tangents(ca);
    const auto tb = tangents(cb);

    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const std::array<double, 3> r = {ca[i][0] - cb[j][0], ca[i][1] - cb[j][1],
                                             ca[i][2] - cb[j][2]};
            const double dist = norm3(r);
            acc += dot3(cross(ta[i], tb[j]), r) / (dist * dist * dist);
        }
    }
    LinkingReport rep;
    rep.value = kOracleSign * acc / (4.0 * kPi);
    rep.linking = static_cast<int>(std::lround(rep.value));
    rep.certificate = std::abs(rep.value - rep.linking);
    return rep;
}

// ---------------------------------------------------------------------------
// Gluing
// ---------------------------------------------------------------------------

namespace {

double bump_unit(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

double bump_norm() {
    static const double norm = [] {
        const Rule1D r = gauss_legendre(200, -1.0, 1.0);
        double s = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            s += r.weights[i] * bump_unit(r.nodes[i]);
        }
        return s;
    }();
    return norm;
}

}  // namespace

CollarProfile CollarProfile::standard_profile() {
    const double norm = bump_norm();
    CollarProfile p;
    p.chi = [norm](double s) {
        if (s <= 0.0) return 0.0;
        if (s >= 1.0) return 1.0;
        const Rule1D r = gauss_legendre(100, -1.0, 2.0 * s - 1.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            acc += r.weights[i] * bump_unit(r.nodes[i]);
        }
        return acc / norm;
    };
    p.dchi = [norm](double s) {
        if (s <= 0.0 || s >= 1.0) return 0.0;
        return 2.0 * bump_unit(2.0 * s - 1.0) / norm;
    };
    return p;
}

CollarProfile CollarProfile::steep_profile(double center, double width) {
    if (width <= 0.0 || width > 1.0) {
        throw std::invalid_argument("steep_profile: width must lie in (0, 1]");
    }
    const CollarProfile base = standard_profile();
    auto chi = base.chi;
    auto dchi = base.dchi;
    const double lo = center - width / 2.0;
    CollarProfile p;
    p.chi = [chi, lo, width](double s) { return chi((s - lo) / width); };
    p.dchi = [dchi, lo, width](double s) { return dchi((s - lo) / width) / width; };
    return p;
}

ContactFormS3 glue_forms(const ContactFormS3& f1, const ContactFormS3& f2,
                         const CollarProfile& collar, double phi_lo,
                         double phi_hi) {
    if (!(0.0 < phi_lo && phi_lo < phi_hi && phi_hi < kPi / 2.0)) {
        throw std::invalid_argument("glue_forms: corona must be an interior interval");
    }
    auto a1 = f1.a, da1 = f1.da, b1 = f1.b, db1 = f1.db;
    auto a2 = f2.a, da2 = f2.da, b2 = f2.b, db2 = f2.db;
    auto chi = collar.chi, dchi = collar.dchi;
    const double width = phi_hi - phi_lo;

    auto blend = [chi, phi_lo, width](double p, const std::function<double(double)>& u,
                                      const std::function<double(double)>& v) {
        if (p <= phi_lo) return u(p);
        if (p >= phi_lo + width) return v(p);
        const double c = chi((p - phi_lo) / width);
        return (1.0 - c) * u(p) + c * v(p);
    };
    auto blend_deriv = [chi, dchi, phi_lo, width](
                           double p, const std::function<double(double)>& u,
                           const std::function<double(double)>& du,
                           const std::function<double(double)>& v,
                           const std::function<double(double)>& dv) {
        if (p <= phi_lo) return du(p);
        if (p >= phi_lo + width) return dv(p);
        const double s = (p - phi_lo) / width;
        const double c = chi(s);
        return (1.0 - c) * du(p) + c * dv(p) + dchi(s) / width * (v(p) - u(p));
    };

    ContactFormS3 g;
    g.a = [blend, a1, a2](double p) { return blend(p, a1, a2); };
    g.b = [blend, b1, b2](double p) { return blend(p, b1, b2); };
    g.da = [blend_deriv, a1, da1, a2, da2](double p) {
        return blend_deriv(p, a1, da1, a2, da2);
    };
    g.db = [blend_deriv, b1, db1, b2, db2](double p) {
        return blend_deriv(p, b1, db1, b2, db2);
    };
    g.name = "glue(" + f1.name + "," + f2.name + ")";
    if (!is_contact(g)) {
        throw std::runtime_error(
            "glue_forms: collar deformation failed; supply a different profile");
    }
    return g;
}

GridField glue_log_densities(const S3Quadrature& q, const GridField& d1,
                             const GridField& d2, double phi_lo, double phi_hi,
                             double tol) {
    if (d1.size() != q.num_nodes() || d2.size() != q.num_nodes()) {
        throw std::invalid_argument(
            "glue_log_densities: field sizes do not match the grid");
    }
    for (int i = 0; i < q.n_phi; ++i) {
        const bool cap1 = q.phi[i] >= phi_lo;  // first summand's cap
        const bool cap2 = q.phi[i] <= phi_hi;  // second summand's cap
        if (!cap1 && !cap2) continue;
        for (int j1 = 0; j1 < q.n_theta; ++j1) {
            for (int j2 = 0; j2 < q.n_theta; ++j2) {
                const std::size_t k = q.index(i, j1, j2);
                if (cap1 && std::abs(d1[k]) > tol) {
                    throw std::invalid_argument(
                        "glue_log_densities: first density does not vanish on its cap");
                }
                if (cap2 && std::abs(d2[k]) > tol) {
                    throw std::invalid_argument(
                        "glue_log_densities: second density does not vanish on its cap");
                }
            }
        }
    }
    GridField out(d1.size());
    for (std::size_t k = 0; k < d1.size(); ++k) out[k] = d1[k] + d2[k];
    return out;
}

// ---------------------------------------------------------------------------
// Periodic densities
// ---------------------------------------------------------------------------

PeriodicDensityReport lambda_n_periodic_density(
    int n, const std::function<double(double, double, double)>& seed,
    const S3Quadrature& q) {
    if (n < 0) {
        throw std::invalid_argument("lambda_n_periodic_density: n must be >= 0");
    }
    // The seed must vanish near the period ends.
    for (int i : {0, q.n_phi - 1}) {
        for (int j1 = 0; j1 < q.n_theta; ++j1) {
            for (int j2 = 0; j2 < q.n_theta; ++j2) {
                if (std::abs(seed(q.phi[i], q.theta[j1], q.theta[j2])) > 1e-8) {
                    throw std::invalid_argument(
                        "lambda_n_periodic_density: seed must vanish near the period "
                        "ends");
                }
            }
        }
    }

    PeriodicDensityReport rep;
    rep.n = n;
    rep.copies = 2 * n;

    double seed_integral = 0.0;
    for (int i = 0; i < q.n_phi; ++i) {
        const double w = q.slice_weight(i);
        for (int j1 = 0; j1 < q.n_theta; ++j1) {
            for (int j2 = 0; j2 < q.n_theta; ++j2) {
                seed_integral += w * seed(q.phi[i], q.theta[j1], q.theta[j2]);
            }
        }
    }
    rep.seed_integral = seed_integral;

    rep.field.assign(static_cast<std::size_t>(rep.copies) * q.num_nodes(), 0.0);
    double total = 0.0;
    for (int k = 0; k < rep.copies; ++k) {
        // Transport by the inverse symmetry (th1, th2) -> (th2, -th1), applied
        // k times, maps the k-th copy back to the seed period.
        for (int i = 0; i < q.n_phi; ++i) {
            const double w = q.slice_weight(i);
            for (int j1 = 0; j1 < q.n_theta; ++j1) {
                for (int j2 = 0; j2 < q.n_theta; ++j2) {
                    double t1 = q.theta[j1], t2 = q.theta[j2];
                    for (int s = 0; s < (k % 4); ++s) {
                        const double nt1 = t2, nt2 = -t1;
                        t1 = nt1;
                        t2 = nt2;
                    }
                    const double v = seed(q.phi[i], t1, t2);
                    rep.field[static_cast<std::size_t>(k) * q.num_nodes() +
                              q.index(i, j1, j2)] = v;
                    total += w * v;
                }
            }
        }
    }
    rep.integral = total;
    return rep;
}

// ---------------------------------------------------------------------------
// Homotopy of coefficient triples
// ---------------------------------------------------------------------------

HomotopyReport twisted_homotopy_report(int n, const S3Quadrature& q,
                                       int t_samples, int phi_samples) {
    if (n < 0) throw std::invalid_argument("twisted_homotopy_report: n must be >= 0");
    const ContactFormS3 start = ContactFormS3::twisted(n);
    const ContactFormS3 target = ContactFormS3::twisted((n % 2 == 1) ? 1 : 0);

    // Positive latitude bump, infinitely flat at both ends.
    auto chi0 = [](double p) {
        return 0.5 * bump_unit((p - kPi / 4.0) / (kPi / 4.0));
    };

    double min_norm = 1e300;
    auto visit = [&](double a, double b, double c) {
        min_norm = std::min(min_norm, std::sqrt(a * a + b * b + c * c));
    };
    for (int ti = 0; ti < t_samples; ++ti) {
        const double t = static_cast<double>(ti) / (t_samples - 1);
        for (int pi_idx = 0; pi_idx < phi_samples; ++pi_idx) {
            const double p = kPi / 2.0 * pi_idx / (phi_samples - 1);
            // Stage 1: grow the dphi component on the start form.
            visit(start.a(p), start.b(p), t * chi0(p));
            // Stage 2: interpolate the coefficient pair under the full bump.
            visit((1.0 - t) * start.a(p) + t * target.a(p),
                  (1.0 - t) * start.b(p) + t * target.b(p), chi0(p));
            // Stage 3: remove the dphi component from the target form.
            visit(target.a(p), target.b(p), (1.0 - t) * chi0(p));
        }
    }

    HomotopyReport rep;
    rep.n = n;
    rep.min_triple_norm = min_norm;
    rep.start_class = hopf_invariant(trivialize(start), q).degree;
    rep.end_class = hopf_invariant(trivialize(target), q).degree;
    const int expected = (n % 2 == 1) ? -1 : 0;
    rep.parity_consistent =
        rep.start_class == expected && rep.end_class == expected;
    return rep;
}

}  // namespace tll
