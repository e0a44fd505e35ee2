#include "doctest.h"

#include "micro_oracle.hpp"
#include "spt/error.hpp"
#include "spt/estimators.hpp"
#include "spt/rqmc.hpp"
#include "spt/walker.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace spt;

namespace {

LangevinPathModel<GaussianTrial> harmonic(double alpha, double eps) { return {GaussianTrial{alpha}, HarmonicPotential{}, eps}; }

WalkerState origin(const LangevinPathModel<GaussianTrial>& m) { return m.make_state(Position::Zero(1)); }

double x2(const WalkerState& s) { return s.position.squaredNorm(); }

} // namespace

TEST_CASE("reptile initialization") {
    const auto m = harmonic(1.2, 0.05);
    RandomStream rng(3, "test");
    const auto two = init_reptile(m, origin(m), 2, rng, 10);
    CHECK(two.size() == 2);
    CHECK(two.links() == 1);
    CHECK(two.action == doctest::Approx(0.025 * (two.beads[0].local_energy + two.beads[1].local_energy)).epsilon(1e-15));

    const auto exact = init_reptile(GaussianTrial{1.0}, HarmonicPotential{}, 50, 0.05, rng);
    CHECK(exact.action == doctest::Approx(0.5 * 0.05 * 49).epsilon(1e-13));

    const auto r = init_reptile(m, origin(m), 100, rng);
    CHECK(std::abs(r.action - recompute_action(m, r)) < 1e-12);
    CHECK(link_cache_error(m, r) < 1e-12);
    CHECK(r.length() == doctest::Approx(0.05 * 99));

    CHECK_THROWS_AS(init_reptile(m, origin(m), 1, rng), Error);
}

TEST_CASE("acceptance ratio of a single move") {
    const auto m = harmonic(1.2, 0.05);
    RandomStream rng(4, "test");
    const auto r = init_reptile(m, origin(m), 10, rng, 100);
    const WalkerState c = m.make_state(Position::Constant(1, 0.7));

    const double head = log_acceptance_ratio(m, r, Direction::head, c, false);
    const double added = 0.025 * (r.beads.back().local_energy + c.local_energy);
    CHECK(head == doctest::Approx(r.link_actions.front() - added).epsilon(1e-14));

    const double tail = log_acceptance_ratio(m, r, Direction::tail, c, false);
    CHECK(tail == doctest::Approx(r.link_actions.back() - 0.025 * (c.local_energy + r.beads.front().local_energy)));

    // correction for a tail move: new R_0 is the candidate
    const auto& a = r.beads.front();
    const double corr = m.log_weight(c) + m.log_transition(c, a) - m.log_weight(a) - m.log_transition(a, c);
    CHECK(log_acceptance_ratio(m, r, Direction::tail, c, true) == doctest::Approx(tail + corr));

    auto moved = r;
    apply_move(m, moved, Direction::head, c);
    CHECK(moved.size() == r.size());
    CHECK(moved.beads.back().position(0) == 0.7);
    CHECK(moved.beads.front().position(0) == r.beads[1].position(0));
    CHECK(std::abs(moved.action - recompute_action(m, moved)) < 1e-12);
}

TEST_CASE("exact trial function is always accepted") {
    RQMCOptions o;
    o.n_beads = 100;
    o.sweeps = 200;
    o.burn_in_sweeps = 10;
    const auto res = run_rqmc(harmonic(1.0, 0.05), origin(harmonic(1.0, 0.05)), o);
    CHECK(res.acceptance_rate == 1.0);
    CHECK(res.energy.mean == 0.5);
    CHECK(res.energy.std_error == 0.0);
}

TEST_CASE("equal link actions are always accepted") {
    TabulatedPathModel m;
    m.energies = {0.3, 0.3, 0.3};
    m.weights = {1.0, 2.0, 1.0};
    m.transition = {{0.2, 0.5, 0.3}, {0.1, 0.1, 0.8}, {0.6, 0.2, 0.2}};
    m.epsilon = 0.1;
    RQMCOptions o;
    o.n_beads = 20;
    o.sweeps = 100;
    for (auto policy : {DirectionPolicy::bounce, DirectionPolicy::random}) {
        o.moves.policy = policy;
        const auto res = run_rqmc(m, 0, o);
        CHECK(res.acceptance_rate == 1.0);
        CHECK(res.accepted == res.moves);
        CHECK(res.moves == 100 * 20);
    }
}

TEST_CASE("acceptance rate for an inexact trial function") {
    RQMCOptions o;
    o.n_beads = 100;
    o.sweeps = 1000;
    o.seed = 42;
    const auto m = harmonic(1.2, 0.05);
    const auto a = run_rqmc(m, origin(m), o);
    const auto b = run_rqmc(m, origin(m), o);
    CHECK(a.acceptance_rate > 0.0);
    CHECK(a.acceptance_rate < 1.0);
    CHECK(a.acceptance_rate == b.acceptance_rate);
    CHECK(a.energy.mean == b.energy.mean);
    CHECK(a.accepted == 99729u);
}

TEST_CASE("incremental action stays consistent") {
    const auto m = harmonic(1.2, 0.05);
    RandomStream rng(11, "test");
    auto r = init_reptile(m, origin(m), 100, rng);
    for (const auto policy : {DirectionPolicy::bounce, DirectionPolicy::random}) {
        MoveOptions opts;
        opts.policy = policy;
        for (int i = 0; i < 100000; ++i) reptation_move(m, r, rng, opts);
        CHECK(std::abs(r.action - recompute_action(m, r)) < 1e-9);
        CHECK(link_cache_error(m, r) < 1e-12);
        CHECK(r.size() == 100);
    }
}

TEST_CASE("stationary distribution on a finite state space") {
    const auto reversible = micro::make_model(true, 7);
    const auto general = micro::make_model(false, 9);
    for (const auto policy : {DirectionPolicy::bounce, DirectionPolicy::random}) {
        CAPTURE(static_cast<int>(policy));
        MoveOptions plain{policy, false}, corrected{policy, true};
        CHECK(micro::total_variation(micro::stationary(reversible, plain), micro::target(reversible)) < 1e-6);
        CHECK(micro::total_variation(micro::stationary(reversible, corrected), micro::target(reversible)) < 1e-6);
        CHECK(micro::total_variation(micro::stationary(general, corrected), micro::target(general)) < 1e-6);
        // without the correction a non-reversible walk samples the wrong distribution
        CHECK(micro::total_variation(micro::stationary(general, plain), micro::target(general)) > 1e-3);
    }
}

TEST_CASE("energy estimator") {
    const std::vector<double> flat(100, 0.5);
    const auto e = energy_estimator(flat);
    CHECK(e.mean == 0.5);
    CHECK(e.std_error == 0.0);

    RQMCOptions o;
    o.n_beads = 501;
    o.sweeps = 4000;
    o.seed = 5;
    const auto m = harmonic(1.2, 0.01);
    const auto res = run_rqmc(m, origin(m), o);
    CHECK(std::abs(res.energy.mean - 0.5) < 3 * res.energy.std_error);
    CHECK(res.head_energies.size() == res.tail_energies.size());
    CHECK(res.actions.size() == res.head_energies.size());

    // the mixed estimate cannot sit above the variational one
    LangevinRunOptions vo;
    vo.epsilon = 0.01;
    vo.steps = 1000000;
    vo.seed = 5;
    const auto vmc = vmc_estimate(sample_local_energy(GaussianTrial{1.2}, HarmonicPotential{}, vo));
    CHECK(res.energy.mean <= vmc.mean + 3 * vmc.std_error);
}

TEST_CASE("pure estimator") {
    for (const double alpha : {1.0, 1.2}) {
        CAPTURE(alpha);
        RQMCOptions o;
        o.n_beads = 601;
        o.sweeps = 4000;
        o.seed = 6;
        o.projection_time = 3.0;
        const auto m = harmonic(alpha, 0.01);
        const std::map<std::string, Observable<WalkerState>> obs = {
            {"one", [](const WalkerState&) { return 1.0; }}, {"x2", x2}};
        const auto res = run_rqmc(m, origin(m), o, obs);
        CHECK(res.pure_observables.at("one").mean == 1.0);
        CHECK(res.pure_observables.at("one").std_error == 0.0);
        const auto& e = res.pure_observables.at("x2");
        CHECK(std::abs(e.mean - 0.5) < 3 * e.std_error);
        CHECK(res.warnings.empty());
    }
}

TEST_CASE("short paths warn about the pure estimator") {
    RQMCOptions o;
    o.n_beads = 50;
    o.sweeps = 64;
    const auto m = harmonic(1.2, 0.05);
    const auto plain = run_rqmc(m, origin(m), o);
    CHECK(plain.warnings.empty());
    const auto res = run_rqmc(m, origin(m), o, {{"x2", x2}});
    REQUIRE(res.warnings.size() == 1);
    CHECK(res.warnings[0].find("projection") != std::string::npos);
}

TEST_CASE("path action cumulants agree with the free walk") {
    // reweighting paths by e^{+S} recovers the free walk, whose mean action is <W> tau
    const double eps = 0.01;
    const std::size_t n_beads = 251;
    const double tau = eps * (n_beads - 1);
    RQMCOptions o;
    o.n_beads = n_beads;
    o.sweeps = 20000;
    o.seed = 8;
    const auto m = harmonic(1.2, eps);
    const auto res = run_rqmc(m, origin(m), o);

    const std::size_t batches = 32, per = res.actions.size() / batches;
    std::vector<double> num(batches), den(batches);
    const double shift = res.actions.front();
    for (std::size_t b = 0; b < batches; ++b)
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) {
            const double w = std::exp(res.actions[i] - shift);
            num[b] += res.actions[i] * w;
            den[b] += w;
        }
    const double total_num = std::accumulate(num.begin(), num.end(), 0.0);
    const double total_den = std::accumulate(den.begin(), den.end(), 0.0);
    const double lambda1 = total_num / total_den;
    std::vector<double> jack(batches);
    for (std::size_t b = 0; b < batches; ++b) jack[b] = (total_num - num[b]) / (total_den - den[b]);
    const double jm = std::accumulate(jack.begin(), jack.end(), 0.0) / batches;
    double jv = 0.0;
    for (double j : jack) jv += (j - jm) * (j - jm);
    const double lambda1_err = std::sqrt((batches - 1.0) / batches * jv);

    LangevinRunOptions vo;
    vo.epsilon = eps;
    vo.steps = 1000000;
    vo.seed = 8;
    const auto series = sample_local_energy(GaussianTrial{1.2}, HarmonicPotential{}, vo);
    const auto am = action_moments(series, std::vector<double>{tau}, 1);
    CHECK(std::abs(lambda1 - am.lambda(0, 1)) < 3 * std::hypot(lambda1_err, am.errors(0, 1)));
}

TEST_CASE("equilibration cut") {
    const std::vector<double> flat(1000, 1.0);
    CHECK(equilibration_cut(flat, 50) == 0);

    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> relax;
    for (int i = 0; i < 4000; ++i) relax.push_back(g(rng) + 20.0 * std::exp(-i / 50.0));
    const std::size_t cut = equilibration_cut(relax, 100);
    CHECK(cut >= 200);
    CHECK(cut <= 2000);

    std::vector<double> ramp;
    for (int i = 0; i < 2000; ++i) ramp.push_back(i);
    CHECK(equilibration_cut(ramp, 100) <= 1000);
}

TEST_CASE("parallel workers") {
    RQMCOptions o;
    o.n_beads = 100;
    o.sweeps = 500;
    o.workers = 3;
    o.seed = 12;
    const auto m = harmonic(1.2, 0.05);
    const auto a = run_rqmc(m, origin(m), o);
    const auto b = run_rqmc(m, origin(m), o);
    CHECK(a.moves == 3 * 500 * 100);
    CHECK(a.discarded_sweeps.size() == 3);
    CHECK(a.energy.mean == b.energy.mean);
    CHECK(a.energy.std_error == b.energy.std_error);
    CHECK(a.head_energies == b.head_energies);

    o.workers = 0;
    CHECK_THROWS_AS(run_rqmc(m, origin(m), o), Error);
    o.workers = 1;
    o.sweeps = 63;
    CHECK_THROWS_AS(run_rqmc(m, origin(m), o), Error);
}
