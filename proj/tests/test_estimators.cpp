#include "doctest.h"

#include "spt/error.hpp"
#include "spt/estimators.hpp"
#include "spt/walker.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace spt;

namespace {

LocalEnergySeries constant_series(double c, std::size_t n, double step = 0.01) {
    LocalEnergySeries s;
    s.values.assign(n, c);
    s.step = step;
    return s;
}

// AR(1) with unit marginal variance and lag-one correlation rho
LocalEnergySeries ar1(double rho, std::size_t n, std::uint64_t seed, double step = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    LocalEnergySeries s;
    s.step = step;
    double x = g(rng);
    for (std::size_t i = 0; i < n; ++i) {
        x = rho * x + std::sqrt(1 - rho * rho) * g(rng);
        s.values.push_back(x);
    }
    return s;
}

const LocalEnergySeries& harmonic_run() {
    static const LocalEnergySeries s = [] {
        LangevinRunOptions o;
        o.epsilon = 0.01;
        o.steps = 2000000;
        o.burn_in = 2000;
        o.seed = 4;
        return sample_local_energy(GaussianTrial{1.2}, HarmonicPotential{}, o);
    }();
    return s;
}

} // namespace

TEST_CASE("series validation and CSV round trip") {
    LocalEnergySeries s;
    s.values = {0.5, 0.25, -1.125, 3.0};
    s.step = 0.1;
    s.burn_in = 1;
    CHECK_NOTHROW(validate(s));
    std::ostringstream os;
    write_csv(os, s);
    CHECK(os.str().rfind("step,W\n0,0.5\n", 0) == 0);
    std::istringstream is(os.str());
    const auto back = read_csv(is, 0.1, 1);
    CHECK(back.values == s.values);
    CHECK(back.burn_in == 1);

    auto bad = s;
    bad.values[2] = std::nan("");
    CHECK_THROWS_AS(validate(bad), Error);
    bad = s;
    bad.burn_in = 4;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = s;
    bad.step = 0.0;
    CHECK_THROWS_AS(validate(bad), Error);

    std::istringstream garbage("step,W\n0,abc\n");
    CHECK_THROWS_AS(read_csv(garbage, 0.1), Error);
}

TEST_CASE("vmc estimate on a constant series") {
    const auto e = vmc_estimate(constant_series(0.5, 5000));
    CHECK(e.mean == 0.5);
    CHECK(e.std_error == 0.0);
    CHECK(e.effective_samples <= 5000.0);
}

TEST_CASE("vmc estimate on white noise") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    LocalEnergySeries s;
    s.step = 1.0;
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) s.values.push_back(g(rng));
    const auto e = vmc_estimate(s);
    CHECK(std::abs(e.std_error * std::sqrt(double(n)) - 1.0) < 0.2);
    CHECK(e.effective_samples <= double(n));
    CHECK(e.autocorr_time == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("vmc estimate requires enough samples") {
    try {
        vmc_estimate(constant_series(0.5, 999));
        FAIL("expected series_too_short");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::series_too_short);
    }
}

TEST_CASE("blocking recovers correlated errors") {
    const double rho = 0.9;
    const auto s = ar1(rho, 400000, 21);
    const auto b = blocking_analysis(s.values);
    // exact error of the mean for AR(1): sqrt((1 + rho) / (1 - rho) / n)
    const double exact = std::sqrt((1 + rho) / (1 - rho) / s.values.size());
    CHECK(b.error == doctest::Approx(exact).epsilon(0.15));
    CHECK(b.plateau > 0);
    CHECK(b.levels.front().error < b.error);

    const auto w = integrated_autocorrelation(s.values);
    CHECK(w.tau_int == doctest::Approx(0.5 * (1 + rho) / (1 - rho)).epsilon(0.1));
    CHECK(double(w.window) >= 6.0 * w.tau_int);
}

TEST_CASE("window selection fails on a non-decaying series") {
    LocalEnergySeries s;
    s.step = 1.0;
    for (int i = 0; i < 4000; ++i) s.values.push_back(i * 1e-3);
    CHECK_THROWS_AS(integrated_autocorrelation(s.values), Error);
    try {
        autocorrelation_integral(s);
        FAIL("expected window_selection");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::window_selection);
    }
}

TEST_CASE("autocovariance") {
    const std::vector<double> v = {1, 2, 3, 4};
    CHECK(autocovariance(v, 2.5, 0) == doctest::Approx(1.25));
    CHECK(autocovariance(v, 2.5, 1) == doctest::Approx((-1.5 * -0.5 + -0.5 * 0.5 + 0.5 * 1.5) / 3));
    CHECK(autocovariance(v, 2.5, 4) == 0.0);
}

TEST_CASE("autocorrelation integral") {
    CHECK(autocorrelation_integral(constant_series(0.5, 5000)).mean == 0.0);

    // AR(1): step * (c0/2 + sum_k rho^k) = (1/2 + rho/(1-rho))
    const double rho = 0.8;
    const auto s = ar1(rho, 400000, 31, 0.5);
    const auto e = autocorrelation_integral(s);
    const double exact = -0.5 * (0.5 + rho / (1 - rho));
    CHECK(std::abs(e.mean - exact) < 3.0 * e.std_error);
    CHECK(e.std_error > 0.0);
}

TEST_CASE("reduced cumulants") {
    // Gaussian action with mean m and variance v: gamma_1 = m, gamma_2 = v/2, higher zero
    const double m = 1.3, v = 0.4;
    const std::vector<double> lambdas = {1.0, m, (v + m * m) / 2, (m * m * m + 3 * m * v) / 6,
                                         (m * m * m * m + 6 * m * m * v + 3 * v * v) / 24};
    const auto g = reduced_cumulants(lambdas);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == doctest::Approx(m));
    CHECK(g[2] == doctest::Approx(v / 2));
    CHECK(std::abs(g[3]) < 1e-14);
    CHECK(std::abs(g[4]) < 1e-14);
}

TEST_CASE("action moments of a constant series") {
    const double c = 0.7;
    const auto s = constant_series(c, 20000, 0.01);
    const std::vector<double> grid = {0.5, 1.0, 2.0};
    const auto am = action_moments(s, grid, 4);
    for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(am.lambda(j, 0) == 1.0);
        double term = 1.0;
        for (int n = 1; n <= 4; ++n) {
            term *= c * am.tau_grid[j] / n;
            CHECK(am.lambda(j, n) == doctest::Approx(term).epsilon(1e-12));
        }
    }
    const auto eps = stochastic_epsilons(am, 3);
    CHECK(eps[0].mean == doctest::Approx(c).epsilon(1e-12));
    CHECK(std::abs(eps[1].mean) < 1e-9);
    CHECK(std::abs(eps[2].mean) < 1e-9);
}

TEST_CASE("action moment grid checks") {
    const auto s = constant_series(0.5, 2000, 0.01);
    CHECK_THROWS_AS(action_moments(s, std::vector<double>{30.0}, 2), Error);
    CHECK_THROWS_AS(action_moments(s, std::vector<double>{0.5, 0.3}, 2), Error);
    CHECK_THROWS_AS(action_moments(s, std::vector<double>{}, 2), Error);
    CHECK_THROWS_AS(action_moments(s, std::vector<double>{0.001}, 2), Error);
}

TEST_CASE("gaussian-action moments give vanishing higher cumulants") {
    // white-noise W: S(tau) is Gaussian, so gamma_3 grows with zero slope
    std::mt19937_64 rng(41);
    std::normal_distribution<double> g(1.0, 1.0);
    LocalEnergySeries s;
    s.step = 0.1;
    for (int i = 0; i < 400000; ++i) s.values.push_back(g(rng));
    const std::vector<double> grid = {1.0, 2.0, 3.0, 4.0, 5.0};
    const auto am = action_moments(s, grid, 4);
    const auto fits = fit_cumulants(am, 4);
    CHECK(std::abs(fits[2].slope) < 3.0 * fits[2].slope_error);
    CHECK(std::abs(fits[3].slope) < 3.0 * fits[3].slope_error);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        CHECK(std::abs(fits[2].gamma[j]) < 3.0 * fits[2].gamma_errors[j]);
        CHECK(std::abs(fits[3].gamma[j]) < 3.0 * fits[3].gamma_errors[j]);
    }
}

TEST_CASE("stochastic orders on the harmonic run") {
    const auto& s = harmonic_run();
    const double alpha = 1.2;
    const auto vmc = vmc_estimate(s);
    CHECK(std::abs(vmc.mean - (alpha / 4 + 1 / (4 * alpha))) < 3 * vmc.std_error);

    const double tau_w = 1.0 / (2 * alpha);
    std::vector<double> grid;
    for (int j = 0; j < 8; ++j) grid.push_back(tau_w * (10 + 30.0 * j / 7));
    const auto am = action_moments(s, grid, 3);
    for (std::size_t j = 0; j < grid.size(); ++j)
        CHECK(std::abs(am.lambda(j, 1) - vmc.mean * am.tau_grid[j]) < 3 * am.errors(j, 1));

    const auto eps = stochastic_epsilons(am, 2);
    CHECK(std::abs(eps[0].mean - vmc.mean) < 3 * eps[0].std_error);
    const auto ac = autocorrelation_integral(s);
    CHECK(std::abs(eps[1].mean - ac.mean) < 3 * std::hypot(eps[1].std_error, ac.std_error));
    const double exact = -std::pow(1 - alpha * alpha, 2) / (16 * std::pow(alpha, 3));
    CHECK(std::abs(ac.mean - exact) < 3 * ac.std_error);
}

TEST_CASE("non-linear cumulants are rejected") {
    // windows far shorter than the correlation time: Var S grows like tau^2
    const auto s = ar1(0.995, 1000000, 5);
    const std::vector<double> grid = {5.0, 10.0, 20.0, 40.0};
    const auto am = action_moments(s, grid, 2);
    const auto fits = fit_cumulants(am, 2);
    CHECK(fits[1].max_residual_sigma > 5.0);
    try {
        stochastic_epsilons(am, 2);
        FAIL("expected non_linearity");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::non_linearity);
    }
}
