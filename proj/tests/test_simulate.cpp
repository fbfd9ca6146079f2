#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tslin/simulate.hpp"

using namespace tslin;

TEST_SUITE_BEGIN("simulate");

TEST_CASE("transition matrix on a uniform grid is the step power") {
    const TimeScale ts = make_timescale(UniformGridSpec{0.5, 0.0, 10.0});
    const Matrix a{{-1.0}};
    CHECK(transition_matrix(a, ts, 0.0, 1.0)(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(transition_matrix(a, ts, 0.0, 0.0)(0, 0) == 1.0);
}

TEST_CASE("transition matrix on a dense scale is the matrix exponential") {
    const TimeScale ts = make_timescale(ContinuousSpec{0.0, 5.0});
    const Matrix a{{-0.4, 1.0}, {0.2, -1.1}};
    const Matrix direct = expm(a, 3.2);
    const Matrix walked = transition_matrix(a, ts, 0.0, 3.2);
    CHECK((walked - direct).max_abs() <= 1e-12);
}

TEST_CASE("transition matrix across a jump and a dense run") {
    ExplicitAtomsSpec spec;
    spec.atoms = {TimeScaleAtom::point(0.0), TimeScaleAtom::interval(1.0, 2.0)};
    const TimeScale ts = make_timescale(spec);
    const double lambda = 0.3;
    const Matrix a{{lambda}};
    // factor (1 + lambda) over the unit jump, then e^lambda over the unit run
    CHECK(transition_matrix(a, ts, 0.0, 2.0)(0, 0) ==
          doctest::Approx((1.0 + lambda) * std::exp(lambda)).epsilon(1e-12));

    CHECK_THROWS_AS(transition_matrix(a, ts, 0.0, 3.0), DomainError);
}

TEST_CASE("transition semigroup property on random scales") {
    testutil::Rng rng(47);
    for (int trial = 0; trial < 25; ++trial) {
        const TimeScale ts = testutil::random_scale(rng);
        const std::size_t n = static_cast<std::size_t>(testutil::uniform_int(rng, 2, 4));
        const Matrix a = testutil::random_matrix(rng, n, -1.0, 1.0);
        const double t0 = ts.min_time();
        const double t1 = ts.floor_time(t0 + testutil::uniform(rng, 0.5, 4.0));
        const double t2 = ts.floor_time(t1 + testutil::uniform(rng, 0.5, 4.0));
        const Matrix whole = transition_matrix(a, ts, t0, t2);
        const Matrix split = transition_matrix(a, ts, t1, t2) * transition_matrix(a, ts, t0, t1);
        CHECK((whole - split).max_abs() <= 1e-10 * std::max(1.0, whole.max_abs()));
    }
}

TEST_CASE("autonomous simulation follows the transition matrix") {
    testutil::Rng rng(53);
    const TimeScale ts = testutil::mixed_scale(rng);
    const Matrix a = testutil::random_matrix(rng, 3, -1.0, 1.0);
    const Vector x0{1.0, -0.5, 2.0};
    const double t0 = ts.min_time();
    const double t_end = ts.floor_time(t0 + 5.0);
    const Trajectory traj = simulate(a, Matrix(3, 1, 0.0), ts, x0, zero_input(1), t0, t_end);
    for (std::size_t i = 0; i < traj.times.size(); i += 7) {
        const Vector expected = transition_matrix(a, ts, t0, traj.times[i]) * x0;
        for (std::size_t r = 0; r < 3; ++r)
            CHECK(traj.states[i][r] == doctest::Approx(expected[r]).epsilon(1e-10));
    }
}

TEST_CASE("pure integrator accumulates the constant input") {
    const TimeScale ts = make_timescale(UniformGridSpec{1.0, 0.0, 10.0});
    const Matrix a(2, 2, 0.0);
    const Matrix b = Matrix::identity(2);
    const Vector x0{1.0, -1.0};
    const Trajectory traj =
        simulate(a, b, ts, x0, constant_input(Vector{0.5, 2.0}), 0.0, 6.0);
    const Vector& last = traj.states.back();
    CHECK(last[0] == 1.0 + 6.0 * 0.5);
    CHECK(last[1] == -1.0 + 6.0 * 2.0);
}

TEST_CASE("simulation matches the brute-force recursion on discrete scales") {
    testutil::Rng rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        const TimeScale ts = testutil::uniform_scale(
            std::vector<double>{0.25, 0.5, 1.0}[static_cast<std::size_t>(
                testutil::uniform_int(rng, 0, 2))],
            0.0, 12.0);
        const std::size_t n = static_cast<std::size_t>(testutil::uniform_int(rng, 2, 4));
        const Matrix a = testutil::random_matrix(rng, n, -1.0, 1.0);
        Matrix b(n, 1);
        for (std::size_t i = 0; i < n; ++i)
            b(i, 0) = testutil::uniform(rng, -1.0, 1.0);
        Vector x0(n);
        for (double& v : x0)
            v = testutil::uniform(rng, -1.0, 1.0);
        const InputSignal u = constant_input(Vector{0.7});

        const double t_end = ts.floor_time(8.0);
        const Trajectory traj = simulate(a, b, ts, x0, u, 0.0, t_end);
        const auto points = testutil::grid_points(ts, 0.0, t_end);
        const auto expected = testutil::brute_force_discrete(a, b, points, x0, u);
        REQUIRE(traj.states.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i)
            for (std::size_t r = 0; r < n; ++r)
                CHECK(traj.states[i][r] == doctest::Approx(expected[i][r]).epsilon(1e-12));
    }
}

TEST_CASE("positive systems keep nonnegative trajectories") {
    testutil::Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const TimeScale ts = testutil::random_scale(rng);
        const std::size_t n = 3;
        const Matrix a = testutil::random_positive_matrix(rng, n, ts.gamma(), false);
        Matrix b(n, 1);
        for (std::size_t i = 0; i < n; ++i)
            b(i, 0) = testutil::uniform(rng, 0.0, 1.0);
        const Vector x0 = testutil::random_nonneg_vector(rng, n);
        const double t0 = ts.min_time();
        const Trajectory traj = simulate(a, b, ts, x0, [](double t) { return Vector{std::abs(std::sin(t))}; },
                                         t0, ts.floor_time(t0 + 8.0));
        CHECK(traj.min_component() >= -1e-9);
    }
}

TEST_CASE("feedback simulation records the applied input") {
    const TimeScale ts = make_timescale(ContinuousSpec{0.0, 5.0});
    const Matrix a{{-1.0, 1.0}, {1.0, -1.0}};
    const Matrix b{{0.0}, {1.0}};
    const Vector k{-1.0, -0.5};
    const Vector x0{1.0, 1.0};

    const Trajectory closed = simulate_feedback(a, b, k, ts, x0, 0.0, 5.0);
    // oracle: closed-loop eigenvalues -1 and -1.5; the windowed fit lands between
    const DecayFit fit = decay_fit(closed);
    CHECK(fit.alpha_hat > 0.8);
    CHECK(fit.alpha_hat < 1.6);
    CHECK(norm2(closed.states.back()) <= fit.k_hat * std::exp(-fit.alpha_hat * 5.0) *
                                             norm2(x0) * (1.0 + 1e-9));
    for (std::size_t i = 0; i < closed.times.size(); i += 11)
        CHECK(closed.inputs[i][0] == doctest::Approx(dot(k, closed.states[i])).epsilon(1e-12));

    // zero gain reproduces the open loop
    const Trajectory open = simulate(a, Matrix(2, 1, 0.0), ts, x0, zero_input(1), 0.0, 5.0);
    const Trajectory zero_k = simulate_feedback(a, b, Vector{0.0, 0.0}, ts, x0, 0.0, 5.0);
    REQUIRE(open.states.size() == zero_k.states.size());
    for (std::size_t i = 0; i < open.states.size(); ++i)
        for (std::size_t r = 0; r < 2; ++r)
            CHECK(zero_k.states[i][r] == doctest::Approx(open.states[i][r]).epsilon(1e-12));

    // equilibrium stays put
    const Trajectory still = simulate_feedback(a, b, k, ts, Vector{0.0, 0.0}, 0.0, 5.0);
    for (const Vector& x : still.states)
        CHECK(norm2(x) == 0.0);
}

TEST_CASE("decay fit on an exact exponential") {
    std::vector<double> times, norms;
    for (int i = 0; i <= 50; ++i) {
        times.push_back(0.1 * i);
        norms.push_back(std::exp(-2.0 * 0.1 * i));
    }
    const DecayFit fit = decay_fit(times, norms);
    CHECK(fit.alpha_hat == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fit.k_hat == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.residual <= 1e-12);
}

TEST_CASE("decay fit reports growth as a negative rate") {
    std::vector<double> times, norms;
    for (int i = 0; i <= 30; ++i) {
        times.push_back(0.1 * i);
        norms.push_back(std::exp(0.8 * 0.1 * i));
    }
    CHECK(decay_fit(times, norms).alpha_hat < 0.0);
}

TEST_CASE("decay fit envelope covers oscillating trajectories") {
    const TimeScale ts = make_timescale(ContinuousSpec{0.0, 20.0});
    const Matrix a{{-0.2, 2.0}, {-2.0, -0.2}};
    const Trajectory traj =
        simulate(a, Matrix(2, 1, 0.0), ts, Vector{1.0, 0.0}, zero_input(1), 0.0, 20.0);
    const DecayFit fit = decay_fit(traj);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double bound =
            fit.k_hat * std::exp(-fit.alpha_hat * (traj.times[i] - traj.times[0])) *
            norm2(traj.states[0]);
        CHECK(norm2(traj.states[i]) <= bound * (1.0 + 1e-12));
    }
    CHECK(fit.residual <= 1e-12);
}

TEST_CASE("decay fit needs three positive samples") {
    CHECK_THROWS_AS(decay_fit({0.0, 1.0}, {1.0, 0.5}), DataError);
    CHECK_THROWS_AS(decay_fit({0.0, 1.0, 2.0, 3.0}, {1.0, 0.5, 0.0, 0.0}), DataError);
    CHECK_THROWS_AS(decay_fit({0.0, 1.0, 2.0}, {1.0, 0.0, 0.5}), DataError);
}

TEST_SUITE_END();
