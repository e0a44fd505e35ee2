#pragma once

// Numeric backend for the symbolic corrections: finite split Hamiltonians
// H(lambda) = diag(E) + lambda W, the chain sums g_n^(l), and two independent
// brute-force oracles (Laurent coefficients of G_n(z), Taylor coefficients of
// the exact ground-state energy).

#include "spt/error.hpp"
#include "spt/symexpr.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace spt {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Unperturbed spectrum with E_0 = 0 and the perturbation in that eigenbasis.
template <typename Scalar = double>
struct SpectralModel {
    VectorX<Scalar> energies;
    MatrixX<Scalar> wmat;

    Eigen::Index dim() const { return energies.size(); }

    template <typename Other>
    SpectralModel<Other> cast() const {
        return {energies.template cast<Other>(), wmat.template cast<Other>()};
    }
};

template <typename Scalar>
void validate(const SpectralModel<Scalar>& model) {
    const Eigen::Index d = model.dim();
    if (d < 1 || model.wmat.rows() != d || model.wmat.cols() != d)
        throw Error(ErrorCategory::invalid_model, "wmat must be square and match the number of energies");
    if (model.energies(0) != Scalar(0))
        throw Error(ErrorCategory::invalid_model, "the unperturbed ground energy must be exactly 0");
    for (Eigen::Index k = 1; k < d; ++k)
        if (!(model.energies(k) > Scalar(0)))
            throw Error(ErrorCategory::invalid_model,
                        "excitation energy E_" + std::to_string(k) + " must be positive");
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            if (std::abs(static_cast<double>(model.wmat(i, j) - model.wmat(j, i))) > 1e-12)
                throw Error(ErrorCategory::invalid_model, "wmat is not symmetric");
}

/// h_l(x_1..x_m): sum of all degree-l monomials, by the prefix recurrence
/// h_l(x_1..x_m) = h_l(x_1..x_{m-1}) + x_m h_{l-1}(x_1..x_m).
template <typename Derived>
typename Derived::Scalar complete_homogeneous(int l, const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    if (l < 0) throw Error(ErrorCategory::argument_range, "complete_homogeneous requires l >= 0");
    VectorX<Scalar> h = VectorX<Scalar>::Zero(l + 1);
    h(0) = Scalar(1);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        for (int k = 1; k <= l; ++k) h(k) += x(i) * h(k - 1);
    return h(l);
}

/// g_n^(l) = d^l/dz^l of the ground-state-excluded chain sum at z = 0.
///
/// The l derivative slots are distributed over the n-1 resolvents
/// (E_k + z)^-1 of the chain; each slot taken by a resolvent raises its
/// power by one and contributes -1, so the result carries (-1)^l l!.
template <typename Scalar>
Scalar g_value(const SpectralModel<Scalar>& model, int n, int l) {
    if (n < 1 || l < 0)
        throw Error(ErrorCategory::argument_range, "g_value requires n >= 1 and l >= 0");
    validate(model);
    if (n == 1) return l == 0 ? model.wmat(0, 0) : Scalar(0);

    const Eigen::Index q = model.dim() - 1;
    if (q == 0) return Scalar(0);
    const VectorX<Scalar> w = model.wmat.col(0).tail(q);
    const MatrixX<Scalar> wq = model.wmat.bottomRightCorner(q, q);
    const VectorX<Scalar> inv = model.energies.tail(q).cwiseInverse();

    // powers[j] = inv^(j+1), elementwise
    std::vector<VectorX<Scalar>> powers(static_cast<std::size_t>(l + 1));
    powers[0] = inv;
    for (int j = 1; j <= l; ++j) powers[j] = powers[j - 1].cwiseProduct(inv);

    // chain[s]: partial chain ending at the innermost resolvent with s slots used
    std::vector<VectorX<Scalar>> chain(static_cast<std::size_t>(l + 1));
    for (int s = 0; s <= l; ++s) chain[s] = powers[s].cwiseProduct(w);

    for (int link = 2; link < n; ++link) {
        std::vector<VectorX<Scalar>> coupled(static_cast<std::size_t>(l + 1));
        for (int s = 0; s <= l; ++s) coupled[s] = wq * chain[s];
        for (int s = 0; s <= l; ++s) {
            VectorX<Scalar> acc = VectorX<Scalar>::Zero(q);
            for (int j = 0; j <= s; ++j) acc += powers[j].cwiseProduct(coupled[s - j]);
            chain[s] = std::move(acc);
        }
    }

    Scalar factorial(1);
    for (int k = 2; k <= l; ++k) factorial *= Scalar(k);
    const Scalar sign = (l % 2 == 0) ? Scalar(1) : Scalar(-1);
    return sign * factorial * w.dot(chain[l]);
}

/// Numeric values for every variable in `vars`.
GBindings g_bindings(const SpectralModel<double>& model, const std::set<GVar>& vars);

struct LaurentOptions {
    /// Contour radius as a fraction of the smallest excitation energy.
    double radius_fraction = 0.5;
    int points = 64;
};

struct LaurentCoefficients {
    double lambda0;    ///< coefficient of z^1 in G_n(z)
    double lambdadot0; ///< coefficient of z^0 in G_n(z)
};

/// Literal index summation of G_n(z) (ground state included) on a circle
/// around z = 0, projected onto z^1 and z^0. Brute force, exponential in n.
LaurentCoefficients laurent_oracle(const SpectralModel<double>& model, int n, const LaurentOptions& opts = {});

struct TaylorOptions {
    /// Largest |lambda| times ||W|| as a fraction of the smallest unperturbed gap.
    double coupling_fraction = 0.01;
    /// Extra polynomial degree beyond N.
    int extra_degree = 2;
    /// Grid points per side beyond degree - 1 (default grid: 2N + 3 points).
    int extra_points = 0;
    double residual_threshold = 1e-12;
};

struct TaylorCoefficients {
    std::vector<double> coeffs; ///< c_1..c_N
    double fit_residual = 0.0;  ///< max |E_0(lambda) - fit| over the grid
    double delta = 0.0;         ///< grid spacing in lambda
    bool trusted = false;       ///< fit_residual below the configured threshold
};

/// Taylor coefficients of the exact ground-state energy of diag(E) + lambda W
/// from extended-precision diagonalization on a symmetric coupling grid.
TaylorCoefficients taylor_oracle(const SpectralModel<double>& model, int N, const TaylorOptions& opts = {});

/// epsilon_1..epsilon_N by binding the symbolic corrections to this model.
std::vector<double> evaluate_epsilons(const SpectralModel<double>& model, int N);

/// <m|x|n> in the harmonic-oscillator basis (hbar = m = omega = 1).
MatrixX<double> position_matrix(int basis_size);

/// Oscillator spectrum E_k = k with W = quartic_coupling * x^4 (truncated basis).
SpectralModel<double> build_anharmonic_model(int basis_size, double quartic_coupling);

/// Lowest eigenvalue of p^2/2 + x^2/2 + quartic_coupling x^4 in a truncated basis.
double anharmonic_ground_energy(int basis_size, double quartic_coupling);

struct RandomModelOptions {
    double energy_min = 0.5;
    double energy_max = 3.0;
    double coupling = 0.3;
    double min_gap = 0.3;
};

/// Random model: sorted excitation energies, symmetric W. Rejects spectra
/// with any level spacing (ground state included) below min_gap.
SpectralModel<double> random_model(int dim, std::mt19937_64& rng, const RandomModelOptions& opts = {});

} // namespace spt
