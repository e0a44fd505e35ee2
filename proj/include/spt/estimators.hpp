#pragma once

// Statistics of local-energy time series: VMC mean with blocking errors, the
// autocovariance integral for the second-order correction, and stochastic
// perturbation theory through moments and reduced cumulants of the action
// S(tau) = integral of W over a window of length tau.

#include "spt/series.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace spt {

struct EstimateWithError {
    double mean = 0.0;
    double std_error = 0.0;
    double autocorr_time = 0.0;     ///< integrated autocorrelation time, time units
    double effective_samples = 0.0;
};

struct BlockingLevel {
    std::size_t block_size;
    std::size_t blocks;
    double error;          ///< standard error of the mean at this level
    double error_of_error;
};

struct BlockingAnalysis {
    std::vector<BlockingLevel> levels;
    std::size_t plateau = 0; ///< index into levels
    double mean = 0.0;
    double error = 0.0;
};

/// Flyvbjerg-Petersen blocking: block sizes double while at least min_blocks
/// remain. The plateau is the first level not exceeded, within its own error,
/// by the next two levels. Throws series_too_short if no plateau is found.
BlockingAnalysis blocking_analysis(std::span<const double> values, std::size_t min_blocks = 16);

/// Sample autocovariance c(k) = <(x_i - m)(x_{i+k} - m)> over the overlapping pairs.
double autocovariance(std::span<const double> values, double mean, std::size_t lag);

struct AutocorrelationWindow {
    double tau_int = 0.5;    ///< 1/2 + sum_{k=1..window} rho(k), in steps
    std::size_t window = 0;  ///< k*
    double variance = 0.0;   ///< c(0)
    std::vector<double> covariances; ///< c(0..window)
};

/// Self-consistent truncation: smallest k with k >= c * tau_int(k).
/// Throws window_selection when no such k exists below the maximum lag.
AutocorrelationWindow integrated_autocorrelation(std::span<const double> values, double window_factor = 6.0);

/// Mean of W; error from blocking, autocorrelation time from the windowed sum.
EstimateWithError vmc_estimate(const LocalEnergySeries& series);

struct AutocorrelationOptions {
    double window_factor = 6.0;
    std::size_t batches = 32;
};

/// epsilon_2 = -step * (c(0)/2 + sum_{k=1..k*} c(k)); error from batch means.
EstimateWithError autocorrelation_integral(const LocalEnergySeries& series, const AutocorrelationOptions& opts = {});

/// Reduced cumulants gamma_1..gamma_N from lambda_0..lambda_N (lambda_n = <S^n>/n!).
/// Element 0 of the result is gamma_0 = 0.
std::vector<double> reduced_cumulants(std::span<const double> lambdas);

struct ActionMoments {
    std::vector<double> tau_grid;  ///< window lengths actually used (multiples of the step)
    Eigen::MatrixXd lambda;        ///< rows: grid points, cols: orders 0..N
    Eigen::MatrixXd errors;
    /// Per-batch lambda matrices over non-overlapping segments of window starts.
    std::vector<Eigen::MatrixXd> batches;

    int max_order() const { return static_cast<int>(lambda.cols()) - 1; }
};

/// lambda_n(tau) = <S(tau)^n>/n! over all overlapping windows, S by the trapezoidal rule.
ActionMoments action_moments(const LocalEnergySeries& series, std::span<const double> tau_grid, int max_order,
                             std::size_t batches = 32);

struct CumulantFit {
    int order = 0;
    std::vector<double> gamma;        ///< gamma_n(tau) on the grid
    std::vector<double> gamma_errors;
    double intercept = 0.0;
    double slope = 0.0;
    double slope_error = 0.0;
    double r_squared = 1.0;
    double max_residual_sigma = 0.0;  ///< largest |residual| / error over the grid
};

struct StochasticFitOptions {
    /// Grid points with tau below this are left out of the fit.
    double tau_min = 0.0;
    /// Fit residuals above this many standard errors raise non_linearity.
    double residual_tolerance = 5.0;
};

inline constexpr int default_stochastic_order = 3;

/// gamma_n(tau) for n = 1..N with jackknife errors, and the linear fit a + b tau.
std::vector<CumulantFit> fit_cumulants(const ActionMoments& moments, int N, const StochasticFitOptions& opts = {});

/// epsilon_n = (-1)^(n+1) d gamma_n / d tau from the fitted slopes, jackknife errors.
std::vector<EstimateWithError> stochastic_epsilons(const ActionMoments& moments, int N,
                                                   const StochasticFitOptions& opts = {});

} // namespace spt
