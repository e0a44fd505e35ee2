#pragma once

// Reptation Monte Carlo. A reptile is a discretized path R_0..R_n of the
// drift-diffusion walk; it moves by growing one bead at one end and dropping
// the bead at the other, accepted with min(1, exp(-dS)) where S is the
// trapezoidal action of the local energy along the path.

#include "spt/error.hpp"
#include "spt/estimators.hpp"
#include "spt/random.hpp"
#include "spt/walker.hpp"

#include <cmath>
#include <concepts>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace spt {

/// What the sampler needs from the underlying walk.
template <typename M>
concept PathModel = requires(const M& m, const typename M::State& a, const typename M::State& b, RandomStream& rng) {
    typename M::State;
    { m.local_energy(a) } -> std::convertible_to<double>;
    { m.propose(a, rng) } -> std::same_as<typename M::State>;
    { m.log_transition(a, b) } -> std::convertible_to<double>;
    { m.log_weight(a) } -> std::convertible_to<double>;
    { m.time_step() } -> std::convertible_to<double>;
};

/// Langevin walk in the trial-function drift. log_weight is log Phi0^2.
template <TrialWavefunction T>
struct LangevinPathModel {
    using State = WalkerState;

    T trial;
    Potential potential;
    double epsilon = 0.05;

    double local_energy(const State& s) const { return s.local_energy; }
    State propose(const State& s, RandomStream& rng) const { return langevin_step(s, trial, potential, rng); }
    double log_transition(const State& from, const State& to) const {
        const Position mean = from.position + 0.5 * epsilon * from.drift;
        const double d = static_cast<double>(from.position.size());
        return -(to.position - mean).squaredNorm() / (2.0 * epsilon) -
               0.5 * d * std::log(2.0 * std::numbers::pi * epsilon);
    }
    double log_weight(const State& s) const { return 2.0 * trial.log_value(s.position); }
    double time_step() const { return epsilon; }

    State make_state(Position r) const { return make_walker(trial, potential, std::move(r), epsilon); }
};

/// Walk on a finite set of sites with tabulated local energy, weight and transition matrix.
struct TabulatedPathModel {
    using State = int;

    std::vector<double> energies;   ///< W per site
    std::vector<double> weights;    ///< p per site, need not be normalized
    std::vector<std::vector<double>> transition; ///< row-stochastic T[from][to]
    double epsilon = 0.1;

    double local_energy(int s) const { return energies.at(static_cast<std::size_t>(s)); }
    int propose(int s, RandomStream& rng) const {
        const auto& row = transition.at(static_cast<std::size_t>(s));
        double u = rng.uniform();
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (u < row[j]) return static_cast<int>(j);
            u -= row[j];
        }
        return static_cast<int>(row.size()) - 1;
    }
    double log_transition(int from, int to) const {
        return std::log(transition.at(static_cast<std::size_t>(from)).at(static_cast<std::size_t>(to)));
    }
    double log_weight(int s) const { return std::log(weights.at(static_cast<std::size_t>(s))); }
    double time_step() const { return epsilon; }
};

enum class Direction { head, tail };
enum class DirectionPolicy { bounce, random };

inline Direction opposite(Direction d) { return d == Direction::head ? Direction::tail : Direction::head; }

inline double link_action(double epsilon, double w0, double w1) { return 0.5 * epsilon * (w0 + w1); }

/// beads.front() is R_0 (tail end), beads.back() is R_n (head end).
template <typename State>
struct Reptile {
    std::deque<State> beads;
    std::deque<double> link_actions;
    Direction direction = Direction::head;
    double epsilon = 0.0;
    double action = 0.0;

    std::size_t size() const { return beads.size(); }
    std::size_t links() const { return link_actions.size(); }
    double length() const { return epsilon * static_cast<double>(links()); }
};

/// Sum of link actions recomputed from the bead energies.
template <PathModel M>
double recompute_action(const M& model, const Reptile<typename M::State>& r) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < r.beads.size(); ++i)
        s += link_action(r.epsilon, model.local_energy(r.beads[i]), model.local_energy(r.beads[i + 1]));
    return s;
}

/// Largest deviation of the cached link actions from recomputation.
template <PathModel M>
double link_cache_error(const M& model, const Reptile<typename M::State>& r) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < r.beads.size(); ++i) {
        const double l = link_action(r.epsilon, model.local_energy(r.beads[i]), model.local_energy(r.beads[i + 1]));
        worst = std::max(worst, std::abs(l - r.link_actions[i]));
    }
    return worst;
}

/// Reptile from given beads, caches filled.
template <PathModel M>
Reptile<typename M::State> make_reptile(const M& model, std::deque<typename M::State> beads,
                                        Direction direction = Direction::head) {
    if (beads.size() < 2) throw Error(ErrorCategory::argument_range, "a reptile needs at least two beads");
    Reptile<typename M::State> r;
    r.epsilon = model.time_step();
    r.direction = direction;
    r.beads = std::move(beads);
    for (std::size_t i = 0; i + 1 < r.beads.size(); ++i) {
        r.link_actions.push_back(
            link_action(r.epsilon, model.local_energy(r.beads[i]), model.local_energy(r.beads[i + 1])));
        r.action += r.link_actions.back();
    }
    return r;
}

/// Walks `equilibration` steps from `start`, then records n_beads consecutive states.
template <PathModel M>
Reptile<typename M::State> init_reptile(const M& model, typename M::State start, std::size_t n_beads,
                                        RandomStream& rng, std::size_t equilibration = 1000) {
    if (n_beads < 2) throw Error(ErrorCategory::argument_range, "n_beads must be at least 2");
    if (!(model.time_step() > 0.0)) throw Error(ErrorCategory::argument_range, "time step must be positive");
    for (std::size_t i = 0; i < equilibration; ++i) start = model.propose(start, rng);
    std::deque<typename M::State> beads;
    beads.push_back(std::move(start));
    while (beads.size() < n_beads) beads.push_back(model.propose(beads.back(), rng));
    return make_reptile(model, std::move(beads));
}

template <TrialWavefunction T>
Reptile<WalkerState> init_reptile(const T& trial, const Potential& v, std::size_t n_beads, double epsilon,
                                  RandomStream& rng, std::size_t equilibration = 1000) {
    const LangevinPathModel<T> model{trial, v, epsilon};
    return init_reptile(model, model.make_state(Position::Zero(1)), n_beads, rng, equilibration);
}

struct MoveOptions {
    DirectionPolicy policy = DirectionPolicy::bounce;
    /// Multiply the acceptance by the detailed-balance ratio of the proposal.
    bool proposal_correction = false;
};

/// log of the Metropolis ratio for growing `candidate` at end `d` (before the min with 0).
template <PathModel M>
double log_acceptance_ratio(const M& model, const Reptile<typename M::State>& r, Direction d,
                            const typename M::State& candidate, bool proposal_correction) {
    const bool head = d == Direction::head;
    const auto& end = head ? r.beads.back() : r.beads.front();
    const double removed = head ? r.link_actions.front() : r.link_actions.back();
    const double added = link_action(r.epsilon, model.local_energy(end), model.local_energy(candidate));
    double log_ratio = -(added - removed);
    if (proposal_correction) {
        // a is the current R_0; b is the R_0 of the proposed path
        const auto& a = r.beads.front();
        const auto& b = head ? r.beads[1] : candidate;
        log_ratio += model.log_weight(b) + model.log_transition(b, a) - model.log_weight(a) -
                     model.log_transition(a, b);
    }
    return log_ratio;
}

/// Applies an accepted growth at end d.
template <PathModel M>
void apply_move(const M& model, Reptile<typename M::State>& r, Direction d, typename M::State candidate) {
    if (d == Direction::head) {
        const double added = link_action(r.epsilon, model.local_energy(r.beads.back()), model.local_energy(candidate));
        r.action += added - r.link_actions.front();
        r.beads.pop_front();
        r.link_actions.pop_front();
        r.beads.push_back(std::move(candidate));
        r.link_actions.push_back(added);
    } else {
        const double added = link_action(r.epsilon, model.local_energy(candidate), model.local_energy(r.beads.front()));
        r.action += added - r.link_actions.back();
        r.beads.pop_back();
        r.link_actions.pop_back();
        r.beads.push_front(std::move(candidate));
        r.link_actions.push_front(added);
    }
}

/// One reptation move. Returns whether it was accepted.
template <PathModel M>
bool reptation_move(const M& model, Reptile<typename M::State>& r, RandomStream& rng, const MoveOptions& opts = {}) {
    if (opts.policy == DirectionPolicy::random) r.direction = rng.uniform() < 0.5 ? Direction::head : Direction::tail;
    const Direction d = r.direction;
    auto candidate = model.propose(d == Direction::head ? r.beads.back() : r.beads.front(), rng);
    const double log_ratio = log_acceptance_ratio(model, r, d, candidate, opts.proposal_correction);
    const bool accept = log_ratio >= 0.0 || rng.uniform() < std::exp(log_ratio);
    if (accept)
        apply_move(model, r, d, std::move(candidate));
    else if (opts.policy == DirectionPolicy::bounce)
        r.direction = opposite(d);
    return accept;
}

/// Mixed estimator from per-sample (W(R_0) + W(R_n)) / 2, blocking errors.
EstimateWithError energy_estimator(std::span<const double> end_energies);

/// Average of an observable at the middle bead, blocking errors.
EstimateWithError pure_estimator(std::span<const double> middle_values);

struct RQMCOptions {
    std::size_t n_beads = 100;
    std::size_t sweeps = 10000;
    std::size_t burn_in_sweeps = 100;
    MoveOptions moves;
    std::size_t workers = 1;
    std::uint64_t seed = 1;
    /// Walk steps before the first reptile is laid down.
    std::size_t equilibration_steps = 1000;
    /// Minimum path length on each side of the middle bead for the pure estimator.
    double projection_time = 2.5;
};

struct RQMCRunResult {
    EstimateWithError energy;
    double acceptance_rate = 0.0;
    std::size_t moves = 0;
    std::size_t accepted = 0;
    std::map<std::string, EstimateWithError> pure_observables;
    /// Per recorded sweep, after burn-in, concatenated over workers.
    std::vector<double> head_energies;
    std::vector<double> tail_energies;
    std::vector<double> actions;
    /// Sweeps dropped by the equilibration check, per worker.
    std::vector<std::size_t> discarded_sweeps;
    std::vector<std::string> warnings;
};

/// Number of leading samples to drop: windows are discarded until the means of two
/// consecutive windows agree within one combined standard error. Never more than half.
std::size_t equilibration_cut(std::span<const double> values, std::size_t window);

template <typename State>
using Observable = std::function<double(const State&)>;

namespace detail {

template <typename State>
struct WorkerTrace {
    std::vector<double> head, tail, action;
    std::map<std::string, std::vector<double>> middle;
    std::size_t moves = 0, accepted = 0;
};

template <PathModel M>
WorkerTrace<typename M::State> run_worker(const M& model, const typename M::State& start, const RQMCOptions& opts,
                                          const std::map<std::string, Observable<typename M::State>>& observables,
                                          std::size_t index) {
    RandomStream rng(opts.seed, "rqmc", index);
    auto reptile = init_reptile(model, start, opts.n_beads, rng, opts.equilibration_steps);
    WorkerTrace<typename M::State> trace;
    const std::size_t moves_per_sweep = opts.n_beads;
    for (std::size_t s = 0; s < opts.burn_in_sweeps; ++s)
        for (std::size_t k = 0; k < moves_per_sweep; ++k) reptation_move(model, reptile, rng, opts.moves);
    for (std::size_t s = 0; s < opts.sweeps; ++s) {
        for (std::size_t k = 0; k < moves_per_sweep; ++k) {
            trace.accepted += reptation_move(model, reptile, rng, opts.moves) ? 1 : 0;
            ++trace.moves;
        }
        trace.head.push_back(model.local_energy(reptile.beads.back()));
        trace.tail.push_back(model.local_energy(reptile.beads.front()));
        trace.action.push_back(reptile.action);
        const auto& mid = reptile.beads[reptile.size() / 2];
        for (const auto& [name, f] : observables) trace.middle[name].push_back(f(mid));
    }
    return trace;
}

inline EstimateWithError merge_estimates(const std::vector<EstimateWithError>& parts,
                                         const std::vector<std::size_t>& counts) {
    EstimateWithError out;
    double total = 0.0, var = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const double w = static_cast<double>(counts[i]);
        total += w;
        out.mean += w * parts[i].mean;
        var += w * w * parts[i].std_error * parts[i].std_error;
        out.effective_samples += parts[i].effective_samples;
        out.autocorr_time = std::max(out.autocorr_time, parts[i].autocorr_time);
    }
    out.mean /= total;
    out.std_error = std::sqrt(var) / total;
    return out;
}

} // namespace detail

/// Independent reptiles per worker, each with its own stream; results merged
/// with sample-count weights. With one worker the run is fully deterministic.
template <PathModel M>
RQMCRunResult run_rqmc(const M& model, const typename M::State& start, const RQMCOptions& opts,
                       const std::map<std::string, Observable<typename M::State>>& observables = {}) {
    if (opts.n_beads < 2) throw Error(ErrorCategory::argument_range, "n_beads must be at least 2");
    if (opts.workers < 1) throw Error(ErrorCategory::argument_range, "workers must be at least 1");
    if (opts.sweeps < 64) throw Error(ErrorCategory::argument_range, "rqmc needs at least 64 recorded sweeps");

    std::vector<detail::WorkerTrace<typename M::State>> traces(opts.workers);
    if (opts.workers == 1) {
        traces[0] = detail::run_worker(model, start, opts, observables, 0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < opts.workers; ++w)
            pool.emplace_back([&, w] { traces[w] = detail::run_worker(model, start, opts, observables, w); });
        for (auto& t : pool) t.join();
    }

    RQMCRunResult result;
    std::vector<EstimateWithError> energies;
    std::map<std::string, std::vector<EstimateWithError>> pure;
    std::vector<std::size_t> counts;
    for (const auto& t : traces) {
        std::vector<double> ends(t.head.size());
        for (std::size_t i = 0; i < ends.size(); ++i) ends[i] = 0.5 * (t.head[i] + t.tail[i]);
        const std::size_t cut = equilibration_cut(ends, std::max<std::size_t>(ends.size() / 20, 16));
        result.discarded_sweeps.push_back(cut);
        const std::span<const double> kept = std::span<const double>(ends).subspan(cut);
        energies.push_back(energy_estimator(kept));
        counts.push_back(kept.size());
        for (const auto& [name, values] : t.middle)
            pure[name].push_back(pure_estimator(std::span<const double>(values).subspan(cut)));
        result.head_energies.insert(result.head_energies.end(), t.head.begin() + static_cast<long>(cut), t.head.end());
        result.tail_energies.insert(result.tail_energies.end(), t.tail.begin() + static_cast<long>(cut), t.tail.end());
        result.actions.insert(result.actions.end(), t.action.begin() + static_cast<long>(cut), t.action.end());
        result.moves += t.moves;
        result.accepted += t.accepted;
    }
    result.energy = detail::merge_estimates(energies, counts);
    for (const auto& [name, parts] : pure) result.pure_observables[name] = detail::merge_estimates(parts, counts);
    result.acceptance_rate = result.moves ? static_cast<double>(result.accepted) / static_cast<double>(result.moves) : 0.0;

    const double length = model.time_step() * static_cast<double>(opts.n_beads - 1);
    if (!observables.empty() && length < 2.0 * opts.projection_time)
        result.warnings.push_back("pure estimator: path length " + std::to_string(length) +
                                  " is below twice the projection time " + std::to_string(opts.projection_time));
    return result;
}

} // namespace spt
