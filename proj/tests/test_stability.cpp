#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tslin/simulate.hpp"
#include "tslin/stability.hpp"

using namespace tslin;

TEST_SUITE_BEGIN("stability");

TEST_CASE("coefficient test on hand-checked matrices") {
    const auto [ok1, c1] = coefficient_test(Matrix{{-1.0, 2.0}, {1.0, -3.0}});
    CHECK(ok1);
    REQUIRE(c1.size() == 3);
    CHECK(c1[0] == doctest::Approx(1.0).epsilon(1e-13)); // x^2 + 4x + 1, ascending
    CHECK(c1[1] == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(c1[2] == 1.0);

    const auto [ok2, c2] = coefficient_test(Matrix{{-1.0, 1.0}, {1.0, -1.0}});
    CHECK_FALSE(ok2); // constant coefficient is zero, strict positivity fails
    CHECK(c2[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(c2[1] == doctest::Approx(2.0).epsilon(1e-14));

    Matrix neg_id = Matrix::identity(3) * -1.0;
    const auto [ok3, c3] = coefficient_test(neg_id);
    CHECK(ok3);
    const double binomials[4] = {1.0, 3.0, 3.0, 1.0}; // (x + 1)^3
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(c3[i] == doctest::Approx(binomials[i]).epsilon(1e-13));
}

TEST_CASE("disc membership") {
    auto [in1, m1] = disc_membership(Complex(-0.5, 0.0), 1.0);
    CHECK(in1);
    CHECK(m1 == doctest::Approx(0.5).epsilon(1e-14));

    auto [in2, m2] = disc_membership(Complex(-2.5, 0.0), 1.0);
    CHECK_FALSE(in2);
    CHECK(m2 == doctest::Approx(-0.5).epsilon(1e-14));

    auto [in3, m3] = disc_membership(Complex(-1.0, 5.0), kTimeInfinity);
    CHECK(in3);
    CHECK(m3 == 1.0);

    CHECK_THROWS_AS(disc_membership(Complex(-1.0, 0.0), 0.0), PreconditionError);
}

TEST_CASE("stability assessment routes positive systems through coefficients") {
    const Matrix a{{-1.0, 2.0}, {1.0, -3.0}};
    const StabilityReport rep = assess_stability(a, make_timescale(UniformGridSpec{1.0 / 3.0, 0.0, 9.0}));
    CHECK(rep.verdict == StabilityVerdict::Stable);
    CHECK(rep.method == StabilityMethod::CoefficientTest);
    CHECK(rep.exact_region);

    // same answer through the bundled-system overload
    const PositiveSystem sys = make_positive_system(
        a, Matrix{{0.0}, {1.0}}, make_timescale(UniformGridSpec{1.0 / 3.0, 0.0, 9.0}));
    CHECK(sys.certificate.verdict);
    CHECK(assess_stability(sys).verdict == StabilityVerdict::Stable);
}

TEST_CASE("zero eigenvalue on the continuous scale is unstable") {
    const Matrix a{{-1.0, 1.0}, {1.0, -1.0}};
    const StabilityReport rep = assess_stability(a, make_timescale(ContinuousSpec{0.0, 10.0}));
    CHECK(rep.verdict == StabilityVerdict::Unstable);
    CHECK(rep.exact_region);
}

TEST_CASE("non-Metzler matrix misses the exact disc on the integer grid") {
    const Matrix a{{-3.0, -1.0}, {2.0, -3.0}};
    const StabilityReport rep = assess_stability(a, make_timescale(UniformGridSpec{1.0, 0.0, 20.0}));
    // oracle: eigenvalues -3 +/- sqrt(2) i, |lambda + 1| = sqrt(6) > 1
    CHECK(testutil::spectra_distance(
              rep.spectrum, {Complex(-3.0, std::sqrt(2.0)), Complex(-3.0, -std::sqrt(2.0))}) <= 1e-9);
    CHECK(rep.verdict == StabilityVerdict::Unstable);
    CHECK(rep.method == StabilityMethod::DiscTest);
    CHECK(rep.exact_region);
}

TEST_CASE("mixed scales give inconclusive verdicts outside the disc") {
    ExplicitAtomsSpec spec;
    spec.atoms = {TimeScaleAtom::point(0.0), TimeScaleAtom::interval(0.5, 1.0)};
    spec.extension = PeriodicExtension{2.0, std::nullopt};
    const TimeScale ts = make_timescale(spec); // mu_bar = 1, not homogeneous
    REQUIRE(ts.gamma() == 1.0);
    REQUIRE_FALSE(ts.is_uniform_discrete());

    const Matrix a{{-3.0, -1.0}, {0.0, -0.5}}; // not Metzler; eigenvalues -3, -0.5
    const StabilityReport rep = assess_stability(a, ts);
    CHECK(rep.verdict == StabilityVerdict::Inconclusive);
    CHECK_FALSE(rep.exact_region);

    // a right-half-plane eigenvalue is unstable even on mixed scales
    const Matrix b{{0.5, -1.0}, {0.0, -0.5}};
    CHECK(assess_stability(b, ts).verdict == StabilityVerdict::Unstable);
}

TEST_CASE("general systems on dense scales use the half-plane test") {
    // not Metzler, eigenvalues -1 +/- i: stable on the continuous scale
    const Matrix a{{-1.0, -1.0}, {1.0, -1.0}};
    const StabilityReport rep = assess_stability(a, make_timescale(ContinuousSpec{0.0, 10.0}));
    CHECK(rep.method == StabilityMethod::HalfPlaneTest);
    CHECK(rep.verdict == StabilityVerdict::Stable);
    CHECK(rep.exact_region);
    for (double m : rep.disc_margins)
        CHECK(m == doctest::Approx(1.0).epsilon(1e-12)); // -Re(lambda)
}

TEST_CASE("unbounded graininess is rejected") {
    const TimeScale geo = make_timescale(GeometricSpec{2.0, 1.0, 64.0});
    CHECK_THROWS_AS(assess_stability(Matrix{{-1.0}}, geo), PreconditionError);
}

TEST_CASE("near-zero coefficients are flagged as marginal") {
    Matrix a(2, 2, 0.0);
    a(0, 0) = -1e-10;
    a(1, 1) = -1.0;
    const StabilityReport rep = assess_stability(a, make_timescale(ContinuousSpec{0.0, 1.0}));
    CHECK(rep.marginal);
}

TEST_CASE("coefficient test agrees with the eigenvalue region on positive systems") {
    testutil::Rng rng(37);
    int checked = 0;
    for (int trial = 0; trial < 150; ++trial) {
        const double h = std::vector<double>{0.25, 0.5, 1.0}[static_cast<std::size_t>(
            testutil::uniform_int(rng, 0, 2))];
        const bool dense = trial % 3 == 0;
        const TimeScale ts =
            dense ? testutil::continuous_scale(0.0, 10.0) : testutil::uniform_scale(h, 0.0, 10.0);
        const std::size_t n = static_cast<std::size_t>(testutil::uniform_int(rng, 2, 5));
        const Matrix a = testutil::random_positive_matrix(rng, n, ts.gamma(), trial % 2 == 0);

        const auto [all_positive, coeffs] = coefficient_test(a);
        bool region = true;
        double min_margin = std::numeric_limits<double>::infinity();
        for (const Complex& z : spectrum(a)) {
            const auto [inside, margin] = disc_membership(z, ts.gamma());
            region = region && inside;
            min_margin = std::min(min_margin, std::abs(margin));
        }
        double min_coeff = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < coeffs.size(); ++i)
            min_coeff = std::min(min_coeff, std::abs(coeffs[i]));
        if (min_margin < 1e-9 || min_coeff < 1e-9)
            continue; // boundary band excluded from the equivalence
        ++checked;
        CHECK(all_positive == region);
    }
    CHECK(checked > 100);
}

TEST_CASE("products of stable factors have positive coefficients") {
    testutil::Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        Polynomial chi = Polynomial::constant(1.0);
        const int pairs = testutil::uniform_int(rng, 0, 2);
        const int reals = testutil::uniform_int(rng, pairs == 0 ? 1 : 0, 3);
        for (int i = 0; i < pairs; ++i) {
            const double re = testutil::uniform(rng, 0.05, 2.0);
            const double im = testutil::uniform(rng, 0.01, 2.0);
            chi = chi * Polynomial({re * re + im * im, 2.0 * re, 1.0});
        }
        for (int i = 0; i < reals; ++i)
            chi = chi * Polynomial({testutil::uniform(rng, 0.05, 2.0), 1.0});
        for (std::size_t i = 0; i < chi.coefficients().size(); ++i)
            CHECK(chi.coeff(i) > 0.0);
    }
}

TEST_CASE("stable verdicts come with decaying transition norms") {
    testutil::Rng rng(43);
    int stable_seen = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const TimeScale ts = testutil::random_scale(rng);
        const std::size_t n = static_cast<std::size_t>(testutil::uniform_int(rng, 2, 4));
        const Matrix a = testutil::random_positive_matrix(rng, n, ts.gamma(), true);
        const StabilityReport rep = assess_stability(a, ts);
        if (rep.verdict != StabilityVerdict::Stable)
            continue;
        ++stable_seen;
        const double t0 = ts.min_time();
        const double t_end = ts.floor_time(t0 + 30.0);
        std::vector<double> times, norms;
        transition_norms(a, ts, t0, t_end, times, norms);
        CHECK(decay_fit(times, norms).alpha_hat > 0.0);
    }
    CHECK(stable_seen >= 8);
}

TEST_SUITE_END();
