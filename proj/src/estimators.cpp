#include "spt/estimators.hpp"

#include "spt/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace spt {

// ---------------------------------------------------------------------------
// blocking

BlockingAnalysis blocking_analysis(std::span<const double> values, std::size_t min_blocks) {
    if (values.size() < 2 * min_blocks)
        throw Error(ErrorCategory::series_too_short, "blocking analysis needs at least " +
                                                         std::to_string(2 * min_blocks) + " samples");
    BlockingAnalysis out;
    std::vector<double> blocks(values.begin(), values.end());
    out.mean = std::accumulate(blocks.begin(), blocks.end(), 0.0) / static_cast<double>(blocks.size());

    std::size_t block_size = 1;
    while (blocks.size() >= min_blocks) {
        const double b = static_cast<double>(blocks.size());
        const double m = std::accumulate(blocks.begin(), blocks.end(), 0.0) / b;
        double ss = 0.0;
        for (double x : blocks) ss += (x - m) * (x - m);
        const double err = std::sqrt(ss / (b - 1.0) / b);
        out.levels.push_back({block_size, blocks.size(), err, err / std::sqrt(2.0 * (b - 1.0))});

        std::vector<double> next(blocks.size() / 2);
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = 0.5 * (blocks[2 * i] + blocks[2 * i + 1]);
        blocks = std::move(next);
        block_size *= 2;
    }

    const auto& lv = out.levels;
    for (std::size_t l = 0; l + 1 < lv.size(); ++l) {
        bool flat = true;
        for (std::size_t j = l + 1; j <= l + 2 && j < lv.size(); ++j)
            if (lv[j].error - lv[l].error > lv[j].error_of_error) flat = false;
        if (flat) {
            out.plateau = l;
            out.error = lv[l].error;
            return out;
        }
    }
    throw Error(ErrorCategory::series_too_short, "no blocking plateau: series too short for its correlation time");
}

// ---------------------------------------------------------------------------
// autocorrelation

double autocovariance(std::span<const double> values, double mean, std::size_t lag) {
    const std::size_t n = values.size();
    if (lag >= n) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (values[i] - mean) * (values[i + lag] - mean);
    return s / static_cast<double>(n - lag);
}

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

AutocorrelationWindow integrated_autocorrelation(std::span<const double> values, double window_factor) {
    AutocorrelationWindow out;
    const double m = mean_of(values);
    const double c0 = autocovariance(values, m, 0);
    out.variance = c0;
    out.covariances.push_back(c0);
    if (c0 <= 0.0) return out;

    const std::size_t max_lag = values.size() / 4;
    double tau = 0.5;
    for (std::size_t k = 1; k < max_lag; ++k) {
        const double ck = autocovariance(values, m, k);
        out.covariances.push_back(ck);
        tau += ck / c0;
        if (static_cast<double>(k) >= window_factor * tau) {
            out.tau_int = tau;
            out.window = k;
            return out;
        }
    }
    throw Error(ErrorCategory::window_selection, "autocorrelation does not decay within a quarter of the series");
}

EstimateWithError vmc_estimate(const LocalEnergySeries& series) {
    validate(series);
    const auto x = series.equilibrated();
    if (x.size() < 1000)
        throw Error(ErrorCategory::series_too_short, "vmc_estimate needs at least 1000 equilibrated samples");
    const BlockingAnalysis blocking = blocking_analysis(x);
    EstimateWithError out;
    out.mean = blocking.mean;
    out.std_error = blocking.error;
    const AutocorrelationWindow acw = integrated_autocorrelation(x);
    if (acw.variance > 0.0) {
        out.autocorr_time = acw.tau_int * series.step;
        out.effective_samples = std::min(static_cast<double>(x.size()), x.size() / (2.0 * acw.tau_int));
    } else {
        out.effective_samples = static_cast<double>(x.size());
    }
    return out;
}

namespace {

double windowed_integral(std::span<const double> x, std::size_t window, double step) {
    const double m = mean_of(x);
    double sum = 0.5 * autocovariance(x, m, 0);
    for (std::size_t k = 1; k <= window; ++k) sum += autocovariance(x, m, k);
    return -step * sum;
}

} // namespace

EstimateWithError autocorrelation_integral(const LocalEnergySeries& series, const AutocorrelationOptions& opts) {
    validate(series);
    const auto x = series.equilibrated();
    const AutocorrelationWindow acw = integrated_autocorrelation(x, opts.window_factor);

    EstimateWithError out;
    out.effective_samples = static_cast<double>(x.size());
    if (acw.variance <= 0.0) return out;

    double full = 0.5 * acw.covariances[0];
    for (std::size_t k = 1; k <= acw.window; ++k) full += acw.covariances[k];
    out.mean = -series.step * full;
    out.autocorr_time = acw.tau_int * series.step;
    out.effective_samples = std::min(static_cast<double>(x.size()), x.size() / (2.0 * acw.tau_int));

    const std::size_t nb = opts.batches;
    const std::size_t len = x.size() / nb;
    if (nb < 2 || len < 4 * (acw.window + 1))
        throw Error(ErrorCategory::window_selection,
                    "batches too short for the autocorrelation window (" + std::to_string(acw.window) + " lags)");
    std::vector<double> est(nb);
    for (std::size_t b = 0; b < nb; ++b) est[b] = windowed_integral(x.subspan(b * len, len), acw.window, series.step);
    const double bm = std::accumulate(est.begin(), est.end(), 0.0) / static_cast<double>(nb);
    double ss = 0.0;
    for (double e : est) ss += (e - bm) * (e - bm);
    out.std_error = std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
    return out;
}

// ---------------------------------------------------------------------------
// action moments and cumulants

std::vector<double> reduced_cumulants(std::span<const double> lambdas) {
    const int n_max = static_cast<int>(lambdas.size()) - 1;
    std::vector<double> gamma(lambdas.size(), 0.0);
    for (int n = 1; n <= n_max; ++n) {
        double g = lambdas[static_cast<std::size_t>(n)];
        for (int k = 1; k < n; ++k)
            g -= static_cast<double>(n - k) / n * gamma[static_cast<std::size_t>(n - k)] *
                 lambdas[static_cast<std::size_t>(k)];
        gamma[static_cast<std::size_t>(n)] = g;
    }
    return gamma;
}

ActionMoments action_moments(const LocalEnergySeries& series, std::span<const double> tau_grid, int max_order,
                             std::size_t batches) {
    validate(series);
    if (max_order < 1) throw Error(ErrorCategory::argument_range, "action_moments requires max_order >= 1");
    if (tau_grid.empty()) throw Error(ErrorCategory::argument_range, "empty tau grid");
    if (batches < 2) throw Error(ErrorCategory::argument_range, "action_moments needs at least two batches");
    const auto x = series.equilibrated();
    const std::size_t n = x.size();

    std::vector<std::size_t> links;
    for (double tau : tau_grid) {
        const long m = std::lround(tau / series.step);
        if (m < 1) throw Error(ErrorCategory::argument_range, "tau grid point shorter than one step");
        if (!links.empty() && static_cast<std::size_t>(m) <= links.back())
            throw Error(ErrorCategory::argument_range, "tau grid must be strictly increasing on the step lattice");
        links.push_back(static_cast<std::size_t>(m));
    }
    const std::size_t m_max = links.back();
    if (m_max + batches * 10 >= n)
        throw Error(ErrorCategory::argument_range, "tau grid exceeds the series length");
    const std::size_t per_batch = (n - m_max) / batches;

    // prefix[i] = trapezoidal integral of W from sample 0 to sample i
    std::vector<long double> prefix(n, 0.0L);
    for (std::size_t i = 1; i < n; ++i)
        prefix[i] = prefix[i - 1] + 0.5L * series.step * (static_cast<long double>(x[i - 1]) + x[i]);

    const Eigen::Index g = static_cast<Eigen::Index>(links.size());
    ActionMoments out;
    out.batches.assign(batches, Eigen::MatrixXd::Zero(g, max_order + 1));
    std::vector<double> inv_fact(static_cast<std::size_t>(max_order + 1), 1.0);
    for (int k = 1; k <= max_order; ++k) inv_fact[k] = inv_fact[k - 1] / k;

    for (Eigen::Index j = 0; j < g; ++j) {
        const std::size_t m = links[static_cast<std::size_t>(j)];
        out.tau_grid.push_back(static_cast<double>(m) * series.step);
        for (std::size_t b = 0; b < batches; ++b) {
            std::vector<double> sums(static_cast<std::size_t>(max_order + 1), 0.0);
            for (std::size_t i = b * per_batch; i < (b + 1) * per_batch; ++i) {
                const double s = static_cast<double>(prefix[i + m] - prefix[i]);
                double p = 1.0;
                for (int k = 1; k <= max_order; ++k) {
                    p *= s;
                    sums[k] += p;
                }
            }
            Eigen::MatrixXd& mb = out.batches[b];
            mb(j, 0) = 1.0;
            for (int k = 1; k <= max_order; ++k) mb(j, k) = sums[k] / static_cast<double>(per_batch) * inv_fact[k];
        }
    }

    out.lambda = Eigen::MatrixXd::Zero(g, max_order + 1);
    for (const auto& mb : out.batches) out.lambda += mb;
    out.lambda /= static_cast<double>(batches);
    out.errors = Eigen::MatrixXd::Zero(g, max_order + 1);
    for (const auto& mb : out.batches) out.errors += (mb - out.lambda).cwiseAbs2();
    out.errors = (out.errors / static_cast<double>(batches - 1) / static_cast<double>(batches)).cwiseSqrt();
    return out;
}

namespace {

struct Line {
    double intercept = 0.0;
    double slope = 0.0;
};

Line weighted_line(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
        sxx += w[i] * x[i] * x[i];
        sxy += w[i] * x[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    if (!(std::abs(det) > 0.0)) throw Error(ErrorCategory::argument_range, "degenerate tau grid for the linear fit");
    Line l;
    l.slope = (sw * sxy - sx * sy) / det;
    l.intercept = (sy - l.slope * sx) / sw;
    return l;
}

// gamma_n(tau_j) for n = 1..N from a lambda matrix
Eigen::MatrixXd gamma_table(const Eigen::MatrixXd& lambda, int N) {
    Eigen::MatrixXd out(lambda.rows(), N + 1);
    for (Eigen::Index j = 0; j < lambda.rows(); ++j) {
        std::vector<double> lam(static_cast<std::size_t>(N + 1));
        for (int k = 0; k <= N; ++k) lam[k] = lambda(j, k);
        const auto gam = reduced_cumulants(lam);
        for (int k = 0; k <= N; ++k) out(j, k) = gam[k];
    }
    return out;
}

} // namespace

std::vector<CumulantFit> fit_cumulants(const ActionMoments& moments, int N, const StochasticFitOptions& opts) {
    if (N < 1 || N > moments.max_order())
        throw Error(ErrorCategory::argument_range, "requested order exceeds the available action moments");
    const std::size_t nb = moments.batches.size();
    if (nb < 2) throw Error(ErrorCategory::argument_range, "jackknife needs at least two batches");

    std::vector<std::size_t> used;
    for (std::size_t j = 0; j < moments.tau_grid.size(); ++j)
        if (moments.tau_grid[j] >= opts.tau_min) used.push_back(j);
    if (used.size() < 2) throw Error(ErrorCategory::argument_range, "fewer than two grid points in the fit region");
    std::vector<double> xs;
    for (std::size_t j : used) xs.push_back(moments.tau_grid[j]);

    const Eigen::MatrixXd full = gamma_table(moments.lambda, N);
    std::vector<Eigen::MatrixXd> jack;
    jack.reserve(nb);
    for (const auto& mb : moments.batches) {
        const Eigen::MatrixXd loo = (moments.lambda * static_cast<double>(nb) - mb) / static_cast<double>(nb - 1);
        jack.push_back(gamma_table(loo, N));
    }
    const double jf = static_cast<double>(nb - 1) / static_cast<double>(nb);

    std::vector<CumulantFit> fits;
    for (int n = 1; n <= N; ++n) {
        CumulantFit f;
        f.order = n;
        for (std::size_t j = 0; j < moments.tau_grid.size(); ++j) {
            const auto r = static_cast<Eigen::Index>(j);
            double mean = 0.0;
            for (const auto& t : jack) mean += t(r, n);
            mean /= static_cast<double>(nb);
            double var = 0.0;
            for (const auto& t : jack) var += (t(r, n) - mean) * (t(r, n) - mean);
            f.gamma.push_back(full(r, n));
            f.gamma_errors.push_back(std::sqrt(jf * var));
        }

        std::vector<double> ys, ws;
        bool weighted = true;
        for (std::size_t j : used) {
            ys.push_back(f.gamma[j]);
            if (!(f.gamma_errors[j] > 0.0)) weighted = false;
        }
        for (std::size_t j : used) ws.push_back(weighted ? 1.0 / (f.gamma_errors[j] * f.gamma_errors[j]) : 1.0);

        const Line line = weighted_line(xs, ys, ws);
        f.intercept = line.intercept;
        f.slope = line.slope;

        double ybar = 0.0, wsum = 0.0;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            ybar += ws[i] * ys[i];
            wsum += ws[i];
        }
        ybar /= wsum;
        double ss_res = 0.0, ss_tot = 0.0, yscale = 1.0;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            const double r = ys[i] - (line.intercept + line.slope * xs[i]);
            ss_res += ws[i] * r * r;
            ss_tot += ws[i] * (ys[i] - ybar) * (ys[i] - ybar);
            yscale = std::max(yscale, std::abs(ys[i]));
        }
        f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            const double r = std::abs(ys[i] - (line.intercept + line.slope * xs[i]));
            const double err = f.gamma_errors[used[i]];
            // residuals at rounding level are not evidence of curvature
            if (r > 1e-10 * yscale && err > 0.0) f.max_residual_sigma = std::max(f.max_residual_sigma, r / err);
        }

        // jackknife of the slope, refitting with the same weights
        std::vector<double> slopes;
        for (const auto& t : jack) {
            std::vector<double> yj;
            for (std::size_t j : used) yj.push_back(t(static_cast<Eigen::Index>(j), n));
            slopes.push_back(weighted_line(xs, yj, ws).slope);
        }
        const double sm = std::accumulate(slopes.begin(), slopes.end(), 0.0) / static_cast<double>(nb);
        double sv = 0.0;
        for (double s : slopes) sv += (s - sm) * (s - sm);
        f.slope_error = std::sqrt(jf * sv);
        fits.push_back(std::move(f));
    }
    return fits;
}

std::vector<EstimateWithError> stochastic_epsilons(const ActionMoments& moments, int N,
                                                   const StochasticFitOptions& opts) {
    const auto fits = fit_cumulants(moments, N, opts);
    std::vector<EstimateWithError> out;
    for (const auto& f : fits) {
        if (f.max_residual_sigma > opts.residual_tolerance) {
            std::ostringstream msg;
            msg << "gamma_" << f.order << "(tau) is not linear on the fit grid (residual " << f.max_residual_sigma
                << " sigma); move the grid to larger tau";
            throw Error(ErrorCategory::non_linearity, msg.str());
        }
        EstimateWithError e;
        const double sign = (f.order % 2 == 1) ? 1.0 : -1.0;
        e.mean = sign * f.slope;
        e.std_error = f.slope_error;
        e.effective_samples = static_cast<double>(moments.batches.size());
        out.push_back(e);
    }
    return out;
}

} // namespace spt
