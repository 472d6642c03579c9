#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kerrbath/analytic.hpp"
#include "kerrbath/errors.hpp"
#include "kerrbath/fock_oracle.hpp"
#include "scenarios.hpp"

using namespace kerrbath;
using kerrbath::testing::rel_diff;
using kerrbath::testing::standard_bath;
using kerrbath::testing::standard_system;

namespace {

constexpr double pi = std::numbers::pi;

// Truncated geometric series sum_mu (1 - x) x^mu e^{-i theta mu}.
complex geometric_series(double x, double theta, int mu_max) {
    complex sum{};
    double w = 1.0 - x;
    for (int mu = 0; mu <= mu_max; ++mu, w *= x) sum += w * std::polar(1.0, -theta * mu);
    return sum;
}

}  // namespace

TEST_CASE("closed_amplitude reduces to the linear oscillator when mu = 0") {
    SystemParams sys{1.0, 0.0, 1.0, {2.0, 0.0}};
    for (double t : {0.0, 0.3, 1.7, 12.0}) {
        CHECK(std::abs(closed_amplitude(sys, t) - 2.0 * std::polar(1.0, -t)) < 1e-14);
    }
}

TEST_CASE("closed_amplitude is the identity at t = 0") {
    SystemParams sys{0.7, 0.3, 0.5, {1.2, -0.4}};
    CHECK(closed_amplitude(sys, 0.0) == sys.alpha0);
}

TEST_CASE("closed_amplitude at the revival time") {
    const auto sys = standard_system();
    const complex a = closed_amplitude(sys, 10.0 * pi);
    CHECK(std::abs(a - complex{-2.0, 0.0}) < 1e-12);
}

TEST_CASE("closed_amplitude matches the Fock-sum oracle and a frozen value") {
    const auto sys = standard_system();
    const EnvironmentSpec closed;
    const auto trunc = auto_truncation(sys.alpha0, closed, 1e-14);
    const complex a = closed_amplitude(sys, 1.0);
    CHECK(std::abs(a - oracle_open_amplitude(sys, closed, 1.0, trunc)) < 1e-10);
    // 40-digit direct Fock sum
    const complex frozen{-0.58771665510167073, -1.7507085015375005};
    CHECK(std::abs(a - frozen) < 1e-13);
}

TEST_CASE("closed_amplitude modulus never exceeds |alpha0|") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        SystemParams sys{2.0 * u(rng), 0.5 * u(rng), 0.2 + u(rng), std::polar(3.0 * u(rng), 6.0 * u(rng))};
        const double t = 50.0 * u(rng);
        CHECK(std::abs(closed_amplitude(sys, t)) <= std::abs(sys.alpha0) * (1.0 + 1e-14));
    }
}

TEST_CASE("mode_decoherence edge cases") {
    EnvironmentSpec env = standard_bath();
    const EnvMode mode = env.modes[1];
    SUBCASE("t = 0") { CHECK(mode_decoherence(mode, env, 0.0) == complex{1.0, 0.0}); }
    SUBCASE("zero temperature") {
        env.temperature = 0.0;
        CHECK(mode_decoherence(mode, env, 3.7) == complex{1.0, 0.0});
    }
    SUBCASE("period 2 pi hbar / g") {
        const double period = 2.0 * pi * env.hbar / mode.g;
        CHECK(std::abs(mode_decoherence(mode, env, period) - 1.0) < 1e-12);
    }
    SUBCASE("x = 1/2, theta = pi gives 1/3") {
        EnvironmentSpec half;
        half.temperature = 1.0 / std::numbers::ln2;  // hbar omega / k_B T = ln 2
        const EnvMode m{1.0, 1.0};
        const complex r = mode_decoherence(m, half, pi);
        const complex oracle = geometric_series(0.5, pi, 80);
        CHECK(std::abs(r - oracle) < 1e-15);
        CHECK(std::abs(r - complex{1.0 / 3.0, 0.0}) < 1e-15);
    }
}

TEST_CASE("closed and polar forms of the mode factor agree") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, 4.0 * pi);
    for (int i = 0; i < 10000; ++i) {
        double x = ux(rng);
        if (x == 0.0) continue;
        const double theta = ut(rng);
        CHECK(rel_diff(decoherence_closed_form(x, theta), decoherence_polar_form(x, theta)) < 1e-12);
    }
}

TEST_CASE("mode_decoherence modulus lies in (0, 1] and is periodic") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        EnvironmentSpec env;
        env.temperature = 0.1 + 3.0 * u(rng);
        const EnvMode mode{0.2 + 2.0 * u(rng), 0.01 + u(rng)};
        const double t = 100.0 * u(rng);
        const complex r = mode_decoherence(mode, env, t);
        CHECK(std::abs(r) > 0.0);
        CHECK(std::abs(r) <= 1.0 + 1e-15);
        const double period = 2.0 * pi * env.hbar / mode.g;
        CHECK(rel_diff(mode_decoherence(mode, env, t + period), r) < 1e-12);
    }
}

TEST_CASE("total_decoherence") {
    SUBCASE("empty bath") {
        EnvironmentSpec env;
        CHECK(total_decoherence(env, 4.2) == complex{1.0, 0.0});
    }
    SUBCASE("two identical modes square the single-mode factor") {
        auto env = EnvironmentSpec::identical(2, 1.3, 0.07, 0.8);
        const complex single = mode_decoherence(env.modes[0], env, 9.0);
        CHECK(std::abs(total_decoherence(env, 9.0) - single * single) < 1e-15);
    }
    SUBCASE("standard bath at t = 5 against the truncated mode traces") {
        const auto env = standard_bath();
        TruncationSpec trunc{1, 200, 1e-14};
        const complex oracle = mode_trace_factor(env.modes[0], env, 1, 5.0, trunc) *
                               mode_trace_factor(env.modes[1], env, 1, 5.0, trunc);
        const complex r = total_decoherence(env, 5.0);
        CHECK(std::abs(r - oracle) < 1e-10);
        const complex frozen{0.91609791352010410, -0.23335996658871614};
        CHECK(std::abs(r - frozen) < 1e-14);
    }
}

TEST_CASE("open_amplitude") {
    const auto sys = standard_system();
    SUBCASE("decoupled bath") {
        auto env = standard_bath();
        for (auto& m : env.modes) m.g = 0.0;
        CHECK(open_amplitude(sys, env, 2.5).a_expect == closed_amplitude(sys, 2.5));
    }
    SUBCASE("t = 0") {
        const auto s = open_amplitude(sys, standard_bath(), 0.0);
        CHECK(s.a_expect == sys.alpha0);
        CHECK(s.r_total == complex{1.0, 0.0});
    }
    SUBCASE("standard scenario at t = 3") {
        const auto env = standard_bath();
        const auto s = open_amplitude(sys, env, 3.0);
        const auto trunc = auto_truncation(sys.alpha0, env, 1e-13);
        CHECK(std::abs(s.a_expect - oracle_open_amplitude(sys, env, 3.0, trunc)) < 1e-10);
        const complex frozen{0.81967814488565932, 0.52632866031222554};
        CHECK(std::abs(s.a_expect - frozen) < 1e-13);
        CHECK(std::abs(std::abs(s.r_total) - s.r_abs) < 1e-15);
    }
    SUBCASE("limit chain: g -> 0, T -> 0 and N = 0 give alpha(t)") {
        const double t = 7.3;
        const complex closed = closed_amplitude(sys, t);
        auto cold = standard_bath();
        cold.temperature = 0.0;
        CHECK(open_amplitude(sys, cold, t).a_expect == closed);
        CHECK(open_amplitude(sys, EnvironmentSpec{}, t).a_expect == closed);
        auto weak = standard_bath();
        for (auto& m : weak.modes) m.g = 0.0;
        CHECK(open_amplitude(sys, weak, t).a_expect == closed);
    }
    SUBCASE("mismatched hbar is rejected") {
        auto env = standard_bath();
        env.hbar = 2.0;
        CHECK_THROWS_AS((void)open_amplitude(sys, env, 1.0), std::invalid_argument);
    }
}

TEST_CASE("open_trajectory unwraps the phase of R") {
    const auto sys = standard_system();
    auto env = EnvironmentSpec::identical(30, 1.0, 0.3, 2.0);
    const auto grid = linspace(0.0, 40.0, 4001);
    const auto traj = open_trajectory(sys, env, grid);
    for (std::size_t i = 1; i < traj.size(); ++i) {
        CHECK(std::abs(traj[i].r_phase - traj[i - 1].r_phase) <= pi);
        const double wrapped = std::remainder(traj[i].r_phase - std::arg(traj[i].r_total), 2.0 * pi);
        CHECK(std::abs(wrapped) < 1e-9);
    }
}

TEST_CASE("unwrap_phases removes 2 pi jumps") {
    std::vector<double> phases{3.0, -3.1, -2.9, 3.05, 0.0};
    unwrap_phases(phases);
    CHECK(phases[1] == doctest::Approx(-3.1 + 2.0 * pi));
    CHECK(phases[2] == doctest::Approx(-2.9 + 2.0 * pi));
    CHECK(phases[3] == doctest::Approx(3.05));
    CHECK(phases[4] == doctest::Approx(0.0));
}

TEST_CASE("gaussian_lobe") {
    auto env = EnvironmentSpec::identical(50, 1.0, 0.05, 1.0);
    const double t1 = 2.0 * pi / 0.05;
    CHECK(gaussian_lobe(env, 0, 0.0) == 1.0);
    CHECK(gaussian_lobe(env, 1, t1) == doctest::Approx(1.0).epsilon(1e-15));

    SUBCASE("exponent is linear in N") {
        auto doubled = EnvironmentSpec::identical(100, 1.0, 0.05, 1.0);
        const double single = gaussian_lobe(env, 1, t1 + 1.3);
        CHECK(gaussian_lobe(doubled, 1, t1 + 1.3) == doctest::Approx(single * single).epsilon(1e-13));
    }
    SUBCASE("close to the exact modulus near the lobe center") {
        for (int p : {0, 1}) {
            const double t = (p == 0 ? 0.0 : t1) + 0.5;
            CHECK(std::abs(gaussian_lobe(env, p, t) - std::abs(total_decoherence(env, t))) < 0.05);
        }
    }
    SUBCASE("non-identical bath") {
        CHECK_THROWS_AS((void)gaussian_lobe(standard_bath(), 0, 1.0), NonIdenticalBath);
    }
    SUBCASE("empty bath") {
        CHECK_THROWS_AS((void)gaussian_lobe(EnvironmentSpec{}, 0, 1.0), std::invalid_argument);
    }
    SUBCASE("half width at half maximum") {
        const double hw = gaussian_lobe_hwhm(env);
        CHECK(gaussian_lobe(env, 1, t1 + hw) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("timescales") {
    const auto sys = standard_system();
    SUBCASE("Ehrenfest and revival times") {
        const auto ts = timescales(sys, EnvironmentSpec{}, 0);
        CHECK(ts.t_ehrenfest == doctest::Approx(2.5).epsilon(1e-15));
        CHECK(ts.t_revival == doctest::Approx(10.0 * pi).epsilon(1e-15));
        CHECK(ts.t_ehrenfest < ts.t_revival);
        CHECK(ts.recurrence_times.empty());
    }
    SUBCASE("recurrence times of an identical bath") {
        const auto env = EnvironmentSpec::identical(10, 1.0, 0.05, 1.0);
        const auto ts = timescales(sys, env, 2);
        REQUIRE(ts.recurrence_times.size() == 3);
        CHECK(ts.recurrence_times[0] == 0.0);
        CHECK(ts.recurrence_times[1] == doctest::Approx(40.0 * pi).epsilon(1e-15));
        CHECK(ts.recurrence_times[2] == doctest::Approx(80.0 * pi).epsilon(1e-15));
    }
    SUBCASE("non-identical bath has no recurrence list") {
        CHECK(timescales(sys, standard_bath(), 3).recurrence_times.empty());
    }
    SUBCASE("mu = 0") {
        SystemParams linear = sys;
        linear.mu = 0.0;
        CHECK_THROWS_AS((void)timescales(linear, EnvironmentSpec{}, 1), DegenerateNonlinearity);
    }
}

TEST_CASE("validation") {
    SystemParams bad = standard_system();
    bad.hbar = 0.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = standard_system();
    bad.mu = -1.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    auto env = standard_bath();
    env.modes[0].omega = 0.0;
    CHECK_THROWS_AS(validate(env), NonPositiveFrequency);
    env = standard_bath();
    env.temperature = -1.0;
    CHECK_THROWS_AS(validate(env), std::invalid_argument);
    CHECK_NOTHROW(validate(standard_bath()));
}
