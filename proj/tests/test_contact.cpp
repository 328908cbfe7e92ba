// Contact geometry of the unit three-sphere: quaternion/torus coordinates,
// coefficient-pair forms, round-measure quadrature, the trivialization to
// maps into the two-sphere and their integer classes, connected-sum gluing,
// and periodic densities over the twisted family.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tll/contact_s3.hpp"

#include <array>
#include <cmath>
#include <vector>

using namespace tll;

namespace {

const double kPi = 3.14159265358979323846;

// Battery grid: latitude-heavy because the twisted profiles oscillate in
// latitude much faster than in the angles.
const S3Quadrature& battery_grid() {
    static S3Quadrature q = S3Quadrature::make(160, 32);
    return q;
}

ContactFormS3 reversed_rotation() {
    ContactFormS3 f;
    f.a = [](double p) { return std::cos(p); };
    f.da = [](double p) { return -std::sin(p); };
    f.b = [](double p) { return -std::sin(p); };
    f.db = [](double p) { return -std::cos(p); };
    f.name = "reversed rotation";
    return f;
}

}  // namespace

TEST_CASE("quaternion algebra: units multiply cyclically and conjugation reverses") {
    Quaternion i{0, 1, 0, 0}, j{0, 0, 1, 0}, k{0, 0, 0, 1};
    Quaternion ij = i * j;
    CHECK(ij.x3 == 1.0);
    CHECK(ij.x0 == 0.0);
    Quaternion jk = j * k;
    CHECK(jk.x1 == 1.0);
    Quaternion ii = i * i;
    CHECK(ii.x0 == -1.0);

    Quaternion a{0.5, -0.25, 1.0, 2.0}, b{1.0, 0.5, -0.75, 0.125};
    Quaternion lhs = (a * b).conjugate();
    Quaternion rhs = b.conjugate() * a.conjugate();
    CHECK(std::abs(lhs.x0 - rhs.x0) < 1e-15);
    CHECK(std::abs(lhs.x1 - rhs.x1) < 1e-15);
    CHECK(std::abs(lhs.x2 - rhs.x2) < 1e-15);
    CHECK(std::abs(lhs.x3 - rhs.x3) < 1e-15);
    CHECK(std::abs((a * b).norm() - a.norm() * b.norm()) < 1e-14);
}

TEST_CASE("torus coordinates round-trip through quaternions") {
    for (double phi : {0.1, 0.7, 1.3}) {
        for (double th1 : {0.0, 2.1}) {
            for (double th2 : {0.4, 5.9}) {
                TorusCoords t = TorusCoords::from_angles(phi, th1, th2);
                Quaternion x = t.to_quaternion();
                CHECK(x.is_unit(1e-12));
                TorusCoords back = TorusCoords::from_quaternion(x);
                CHECK(std::abs(back.phi - phi) < 1e-12);
                CHECK(std::abs(std::remainder(back.theta1 - th1, 2 * kPi)) < 1e-12);
                CHECK(std::abs(std::remainder(back.theta2 - th2, 2 * kPi)) < 1e-12);
                CHECK(std::abs(back.r1 * back.r1 + back.r2 * back.r2 - 1.0) < 1e-12);
                // latitude definition: tan(phi) = (r2/r1)^2
                CHECK(std::abs(std::tan(phi) - std::pow(back.r2 / back.r1, 2)) < 1e-10);
            }
        }
    }
    TorusCoords t = TorusCoords::from_angles(0.3, 0.0, 0.0);
    CHECK(t.psi(2) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("twisted family has constant contact value 2n+1") {
    for (int n = 0; n <= 4; ++n) {
        ContactFormS3 f = ContactFormS3::twisted(n);
        CHECK(is_contact(f));
        for (double phi = 0.0; phi <= kPi / 2 + 1e-12; phi += kPi / 40)
            CHECK(std::abs(contact_value(f, phi) - (2 * n + 1)) < 1e-12);
    }
    CHECK_THROWS(ContactFormS3::twisted(-1));
}

TEST_CASE("standard form contact value matches its closed form") {
    ContactFormS3 f = ContactFormS3::standard_form();
    CHECK(is_contact(f));
    for (double phi = 0.0; phi <= kPi / 2 + 1e-12; phi += kPi / 24) {
        double c = std::cos(phi), s = std::sin(phi);
        CHECK(std::abs(contact_value(f, phi) - 1.0 / ((c + s) * (c + s))) < 1e-10);
    }
}

TEST_CASE("orientation-reversing coefficient pairs are rejected") {
    ContactFormS3 f = reversed_rotation();
    CHECK(contact_value(f, 0.4) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_FALSE(is_contact(f));

    // endpoint coefficient that fails to vanish also disqualifies the form
    ContactFormS3 g;
    g.a = [](double) { return 1.0; };
    g.da = [](double) { return 0.0; };
    g.b = [](double p) { return p; };
    g.db = [](double) { return 1.0; };
    CHECK(contact_value(g, 0.3) > 0.0);
    CHECK_FALSE(is_contact(g));  // a(pi/2) != 0
}

TEST_CASE("quadrature reproduces the round measure") {
    const S3Quadrature& q = battery_grid();
    CHECK(std::abs(q.total_weight() - 2 * kPi * kPi) < 1e-9);
    GridField one(q.num_nodes(), 1.0);
    CHECK(std::abs(integrate(q, one) - 2 * kPi * kPi) < 1e-9);
    // r1^2 and r2^2 each average to one half by the swap symmetry
    double i1 = q.integrate([](const TorusCoords& t) { return t.r1 * t.r1; });
    double i2 = q.integrate([](const TorusCoords& t) { return t.r2 * t.r2; });
    CHECK(std::abs(i1 - kPi * kPi) < 1e-9);
    CHECK(std::abs(i1 + i2 - 2 * kPi * kPi) < 1e-9);
    CHECK_THROWS(S3Quadrature::make(1, 4));
}

TEST_CASE("volume integrals: standard pair, orientation flip, quadratic scaling") {
    S3Quadrature q = S3Quadrature::make(64, 64);
    double v = standard_volume_check(q);
    CHECK(std::abs(v - 4 * kPi * kPi) < 1e-8);
    CHECK(std::abs(volume_integral(ContactFormS3::standard_opposite(), q) + 4 * kPi * kPi) < 1e-8);
    ContactFormS3 doubled = ContactFormS3::scaled(ContactFormS3::standard_form(), 2.0);
    CHECK(std::abs(volume_integral(doubled, q) - 16 * kPi * kPi) < 1e-7);
    // constant contact value 2n+1 integrates to (2n+1) * (pi/2) * (2 pi)^2
    for (int n : {0, 1, 3})
        CHECK(std::abs(volume_integral(ContactFormS3::twisted(n), q) - (2 * n + 1) * 2 * std::pow(kPi, 3)) < 1e-7);
}

TEST_CASE("the standard form trivializes to the constant axis map") {
    const S3Quadrature& q = battery_grid();
    HopfMap m = trivialize(ContactFormS3::standard_form());
    double worst = 0.0;
    for (int i = 0; i < q.n_phi; i += 23)
        for (int j1 = 0; j1 < q.n_theta; j1 += 7)
            for (int j2 = 0; j2 < q.n_theta; j2 += 5) {
                std::array<double, 3> u = m.u(q.node(i, j1, j2));
                worst = std::max({worst, std::abs(u[0] - 1.0), std::abs(u[1]), std::abs(u[2])});
            }
    CHECK(worst < 1e-12);
}

TEST_CASE("trivialization rejects coefficient pairs with a common zero") {
    ContactFormS3 f;
    f.a = [](double p) { return p > 0.8 ? (p - 0.8) * (p - 0.8) : 0.0; };
    f.da = [](double p) { return p > 0.8 ? 2 * (p - 0.8) : 0.0; };
    f.b = f.a;
    f.db = f.da;
    CHECK_THROWS_AS(trivialize(f), std::invalid_argument);
}

TEST_CASE("degree battery: constant, generator, conjugate, oracle agreement") {
    const S3Quadrature& q = battery_grid();
    HopfReport rc = hopf_invariant(constant_map({0.0, 0.0, 1.0}), q);
    CHECK(rc.degree == 0);
    CHECK(rc.certificate < 1e-10);

    HopfReport rg = hopf_invariant(generator_map(), q);
    CHECK(rg.degree == -1);
    CHECK(rg.certificate < 1e-10);
    CHECK(rg.equivariance_residual < 1e-10);

    HopfReport rgc = hopf_invariant(generator_conjugate_map(), q);
    CHECK(rgc.degree == 1);

    LinkingReport lk = linking_number_oracle(generator_map(), q);
    CHECK(lk.linking == rg.degree);
    CHECK(lk.certificate < 1e-3);
}

TEST_CASE("degree battery: twisted family alternates between the two classes") {
    const S3Quadrature& q = battery_grid();
    for (int n = 0; n <= 5; ++n) {
        HopfReport r = hopf_invariant(trivialize(ContactFormS3::twisted(n)), q);
        CHECK(r.degree == (n % 2 == 0 ? 0 : -1));
        CHECK(r.certificate < 1e-8);
    }
    HopfReport ro = hopf_invariant(trivialize(ContactFormS3::standard_opposite()), q);
    CHECK(ro.degree == -1);  // sign calibration anchor
}

TEST_CASE("the degree is invariant under rotations of the target sphere") {
    const S3Quadrature& q = battery_grid();
    double c = std::cos(0.7), s = std::sin(0.7);
    // rotation fixing the equivariance axis
    std::array<double, 9> about_axis{1, 0, 0, 0, c, -s, 0, s, c};
    CHECK(hopf_invariant(rotate_map(generator_map(), about_axis), q).degree == -1);
    // rotation moving the axis entirely
    std::array<double, 9> quarter_turn{0, 0, 1, 0, 1, 0, -1, 0, 0};
    CHECK(hopf_invariant(rotate_map(generator_map(), quarter_turn), q).degree == -1);
}

TEST_CASE("under-resolved grids are rejected rather than mismeasured") {
    S3Quadrature coarse = S3Quadrature::make(16, 8);
    CHECK_THROWS_WITH(
        hopf_invariant(trivialize(ContactFormS3::twisted(5)), coarse),
        "hopf_invariant: under-resolved (neighboring samples further than 0.5 "
        "apart on the target)");
}

TEST_CASE("gluing forms: the result matches each input outside the corona") {
    ContactFormS3 g = glue_forms(ContactFormS3::standard_form(), ContactFormS3::standard_form());
    CHECK(is_contact(g));
    ContactFormS3 st = ContactFormS3::standard_form();
    for (double phi : {0.1, 0.4, 1.1, 1.5}) {
        CHECK(std::abs(g.a(phi) - st.a(phi)) < 1e-12);
        CHECK(std::abs(g.b(phi) - st.b(phi)) < 1e-12);
    }

    // slow-to-fast twist: contact through the corona, endpoints preserved
    ContactFormS3 h = glue_forms(ContactFormS3::twisted(0), ContactFormS3::twisted(2));
    CHECK(is_contact(h));
    CHECK(std::abs(contact_value(h, 0.2) - 1.0) < 1e-12);
    CHECK(std::abs(contact_value(h, 1.3) - 5.0) < 1e-12);
}

TEST_CASE("gluing rejects collars that break the contact condition") {
    // un-twisting through a steep collar drives the interpolant negative
    CHECK_THROWS_WITH(
        glue_forms(ContactFormS3::twisted(2), ContactFormS3::twisted(0),
                   CollarProfile::steep_profile(0.5, 0.02)),
        "glue_forms: collar deformation failed; supply a different profile");
    CHECK_THROWS(glue_forms(ContactFormS3::standard_form(), ContactFormS3::standard_form(),
                            CollarProfile::standard_profile(), 1.0, 0.5));
    CHECK_THROWS(CollarProfile::steep_profile(0.5, 0.0));
}

TEST_CASE("gluing densities adds integrals exactly on disjoint supports") {
    S3Quadrature q = S3Quadrature::make(48, 24);
    GridField d1(q.num_nodes(), 0.0), d2(q.num_nodes(), 0.0);
    for (int i = 0; i < q.n_phi; ++i) {
        double phi = q.phi[i];
        double lo = phi < 0.5 ? std::exp(-1.0 / (0.5 - phi)) : 0.0;
        double hi = phi > 1.0 ? std::exp(-1.0 / (phi - 1.0)) : 0.0;
        for (int j1 = 0; j1 < q.n_theta; ++j1)
            for (int j2 = 0; j2 < q.n_theta; ++j2) {
                d1[q.index(i, j1, j2)] = lo * (1.0 + 0.5 * std::cos(q.theta[j1]));
                d2[q.index(i, j1, j2)] = hi * (1.0 + 0.25 * std::sin(q.theta[j2]));
            }
    }
    GridField glued = glue_log_densities(q, d1, d2);
    // per-node the glued field equals d1 + d2 exactly; the integrals differ
    // only by summation order, i.e. round-off
    CHECK(std::abs(integrate(q, glued) - (integrate(q, d1) + integrate(q, d2))) < 1e-14);

    GridField zero(q.num_nodes(), 0.0);
    CHECK(integrate(q, glue_log_densities(q, zero, zero)) == 0.0);

    // swapped inputs put each support on the wrong side of its cap
    CHECK_THROWS_WITH(glue_log_densities(q, d2, d1),
                      "glue_log_densities: second density does not vanish on its cap");
}

TEST_CASE("periodic densities: block count, exact integral ratio, odd seeds") {
    S3Quadrature q = S3Quadrature::make(48, 24);
    auto seed = [](double psi, double th1, double) {
        double s = std::sin(2 * psi);
        return s * s * (1.0 + 0.3 * std::cos(th1));
    };
    PeriodicDensityReport p0 = lambda_n_periodic_density(0, seed, q);
    CHECK(p0.copies == 0);
    CHECK(p0.integral == 0.0);

    PeriodicDensityReport p1 = lambda_n_periodic_density(1, seed, q);
    PeriodicDensityReport p2 = lambda_n_periodic_density(2, seed, q);
    CHECK(p1.copies == 2);
    CHECK(p2.copies == 4);
    CHECK(p1.field.size() == 2 * q.num_nodes());
    CHECK(std::abs(p1.integral - 2 * p1.seed_integral) < 1e-12);
    CHECK(std::abs(p2.integral - 2 * p1.integral) < 1e-10);

    // a seed odd in one angle integrates to zero block by block
    auto odd = [](double psi, double, double th2) {
        double s = std::sin(2 * psi);
        return s * s * std::sin(th2);
    };
    CHECK(std::abs(lambda_n_periodic_density(2, odd, q).integral) < 1e-12);

    // seeds that fail to vanish near the period ends are rejected
    auto bad = [](double psi, double, double) { return std::sin(psi) * std::sin(psi); };
    CHECK_THROWS_WITH(lambda_n_periodic_density(1, bad, q),
                      "lambda_n_periodic_density: seed must vanish near the period ends");
}

TEST_CASE("twisted forms deform to their parity representative") {
    const S3Quadrature& q = battery_grid();
    HomotopyReport even = twisted_homotopy_report(4, q, 9, 129);
    CHECK(even.start_class == 0);
    CHECK(even.end_class == 0);
    CHECK(even.parity_consistent);
    CHECK(even.min_triple_norm > 0.3);

    HomotopyReport odd = twisted_homotopy_report(3, q, 9, 129);
    CHECK(odd.start_class == -1);
    CHECK(odd.end_class == -1);
    CHECK(odd.parity_consistent);
    CHECK(odd.min_triple_norm > 0.3);
}

TEST_CASE("spline forms reproduce sampled coefficients faithfully") {
    int m = 40;
    std::vector<double> phis(m), as(m), bs(m);
    ContactFormS3 st = ContactFormS3::standard_form();
    for (int i = 0; i < m; ++i) {
        double phi = (kPi / 2) * i / (m - 1);
        phis[i] = phi;
        as[i] = st.a(phi);
        bs[i] = st.b(phi);
    }
    ContactFormS3 sp = ContactFormS3::from_samples(phis, as, bs);
    CHECK(is_contact(sp));
    double worst = 0.0;
    for (double phi = 0.02; phi < 1.55; phi += 0.031)
        worst = std::max(worst, std::abs(contact_value(sp, phi) - contact_value(st, phi)));
    CHECK(worst < 2e-2);  // natural end conditions limit the derivative accuracy
    S3Quadrature q = S3Quadrature::make(48, 24);
    CHECK(std::abs(volume_integral(sp, q) - 4 * kPi * kPi) < 1e-3);

    CHECK_THROWS(ContactFormS3::from_samples({0.0, 0.5, 1.0}, {1, 1, 1}, {0, 0.1, 0.2}));
}
