#pragma once

// Classical-quantum mapping: a trial wavefunction Phi0 defines the drift of an
// overdamped Langevin walk whose equilibrium density is Phi0^2, and the local
// energy W = (H Phi0) / Phi0 is the perturbation sampled along the walk.
//
// Units: H = -1/2 Laplacian + V, so the walk has diffusion constant 1/2,
// step variance epsilon and drift displacement (epsilon / 2) F with F = 2 grad log Phi0.

#include "spt/random.hpp"
#include "spt/series.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <numbers>
#include <variant>

namespace spt {

using Position = Eigen::VectorXd;

template <typename T>
concept TrialWavefunction = requires(const T& trial, const Position& r) {
    { trial.log_value(r) } -> std::convertible_to<double>;
    { trial.gradient_log(r) } -> std::convertible_to<Position>;
    { trial.laplacian_log(r) } -> std::convertible_to<double>;
};

/// log Phi0 = -alpha |R|^2 / 2.
struct GaussianTrial {
    double alpha = 1.0;

    double log_value(const Position& r) const { return -0.5 * alpha * r.squaredNorm(); }
    Position gradient_log(const Position& r) const { return -alpha * r; }
    double laplacian_log(const Position& r) const { return -alpha * static_cast<double>(r.size()); }
};

/// V = |R|^2 / 2.
struct HarmonicPotential {
    double value(const Position& r) const { return 0.5 * r.squaredNorm(); }
};

/// V = |R|^2 / 2 + coupling * sum x_i^4.
struct QuarticPotential {
    double coupling = 0.0;
    double value(const Position& r) const {
        return 0.5 * r.squaredNorm() + coupling * r.array().pow(4).sum();
    }
};

/// V = barrier * sum (x_i^2 / minimum^2 - 1)^2.
struct DoubleWellPotential {
    double barrier = 1.0;
    double minimum = 1.0;
    double value(const Position& r) const {
        return barrier * ((r.array() / minimum).square() - 1.0).square().sum();
    }
};

using Potential = std::variant<HarmonicPotential, QuarticPotential, DoubleWellPotential>;

inline double potential_value(const Potential& v, const Position& r) {
    return std::visit([&](const auto& p) { return p.value(r); }, v);
}

/// F(R) = -dU/dR with U = -2 log Phi0.
template <TrialWavefunction T>
Position drift(const T& trial, const Position& r) {
    return 2.0 * trial.gradient_log(r);
}

/// V_aux = (Laplacian Phi0) / (2 Phi0); Phi0 is the zero-energy ground state of -1/2 Laplacian + V_aux.
template <TrialWavefunction T>
double auxiliary_potential(const T& trial, const Position& r) {
    return 0.5 * (trial.laplacian_log(r) + trial.gradient_log(r).squaredNorm());
}

/// W(R) = V(R) - V_aux(R) = (H Phi0)(R) / Phi0(R).
template <TrialWavefunction T>
double local_energy(const T& trial, const Potential& v, const Position& r) {
    return (potential_value(v, r) - 0.5 * trial.gradient_log(r).squaredNorm()) - 0.5 * trial.laplacian_log(r);
}

/// Walker with caches for the stored position.
struct WalkerState {
    Position position;
    Position drift;
    double local_energy = 0.0;
    double epsilon = 0.0;
};

template <TrialWavefunction T>
WalkerState make_walker(const T& trial, const Potential& v, Position r, double epsilon) {
    WalkerState s;
    s.drift = spt::drift(trial, r);
    s.local_energy = spt::local_energy(trial, v, r);
    s.position = std::move(r);
    s.epsilon = epsilon;
    return s;
}

/// R' = R + (epsilon/2) F(R) + noise. `noise` is the Gaussian increment (variance epsilon per coordinate).
template <TrialWavefunction T>
WalkerState langevin_step(const WalkerState& s, const T& trial, const Potential& v, const Position& noise) {
    Position next = s.position + 0.5 * s.epsilon * s.drift + noise;
    return make_walker(trial, v, std::move(next), s.epsilon);
}

template <TrialWavefunction T>
WalkerState langevin_step(const WalkerState& s, const T& trial, const Potential& v, RandomStream& rng) {
    const double sd = std::sqrt(s.epsilon);
    Position noise(s.position.size());
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = sd * rng.normal();
    return langevin_step(s, trial, v, noise);
}

/// log of the Gaussian proposal density of langevin_step from `from` to `to`.
template <TrialWavefunction T>
double log_transition_density(const T& trial, double epsilon, const Position& from, const Position& to) {
    const Position mean = from + 0.5 * epsilon * spt::drift(trial, from);
    const double d = static_cast<double>(from.size());
    return -(to - mean).squaredNorm() / (2.0 * epsilon) - 0.5 * d * std::log(2.0 * std::numbers::pi * epsilon);
}

template <TrialWavefunction T>
double transition_density(const T& trial, double epsilon, const Position& from, const Position& to) {
    return std::exp(log_transition_density(trial, epsilon, from, to));
}

struct LangevinRunOptions {
    double epsilon = 0.01;
    std::size_t steps = 100000;
    std::size_t burn_in = 1000;
    std::uint64_t seed = 1;
    /// Start position; empty means the origin in one dimension.
    Position start;
};

/// Local energies along one walk; burn_in + steps samples, the first burn_in flagged as discarded.
template <TrialWavefunction T>
LocalEnergySeries sample_local_energy(const T& trial, const Potential& v, const LangevinRunOptions& opts) {
    RandomStream rng(opts.seed, "walker");
    Position start = opts.start.size() > 0 ? opts.start : Position::Zero(1);
    WalkerState s = make_walker(trial, v, std::move(start), opts.epsilon);
    LocalEnergySeries series;
    series.step = opts.epsilon;
    series.burn_in = opts.burn_in;
    series.values.reserve(opts.burn_in + opts.steps);
    for (std::size_t i = 0; i < opts.burn_in + opts.steps; ++i) {
        s = langevin_step(s, trial, v, rng);
        series.values.push_back(s.local_energy);
    }
    return series;
}

} // namespace spt
