#pragma once

// Rayleigh-Schroedinger corrections to a non-degenerate ground-state energy,
// generated symbolically from ordinary Bell polynomials and the
// moment-to-reduced-cumulant recursion.

#include "spt/symexpr.hpp"

#include <span>
#include <string>
#include <vector>

namespace spt {

/// Asymptotic constants of one perturbative order n.
struct PTOrderResult {
    int order = 0;
    GExpression lambda0;    ///< O(1) term of lambda_n(tau)
    GExpression lambdadot0; ///< O(1) term of d lambda_n / d tau
    GExpression gamma0;     ///< O(1) term of gamma_n(tau)
    GExpression gammadot0;  ///< large-tau limit of d gamma_n / d tau
    GExpression epsilon;    ///< (-1)^(n+1) gammadot0
};

/// Ordinary Bell polynomial B_{n,l}(g_1, ..., g_{n-l+1}) at deriv 0.
GExpression ordinary_bell(int n, int l);

struct LambdaNaughts {
    GExpression lambda0;
    GExpression lambdadot0;
};

/// Coefficients of z^1 and z^0 in the Laurent expansion of G_n(z).
LambdaNaughts lambda_naughts(int n);

struct GammaNaughts {
    GExpression gamma0;
    GExpression gammadot0;
};

/// Reduced-cumulant recursion for order n. `cache[k-1]` must hold order k for k < n.
GammaNaughts gamma_naughts(int n, std::span<const PTOrderResult> cache);

inline constexpr int default_max_order = 10;

/// Memoized bottom-up generator of PTOrderResults.
class PerturbationSeries {
public:
    explicit PerturbationSeries(int max_order = default_max_order);

    /// Result for order n, generating all missing lower orders first.
    const PTOrderResult& order(int n);
    std::span<const PTOrderResult> computed() const { return results_; }
    int max_order() const { return max_order_; }

private:
    int max_order_;
    std::vector<PTOrderResult> results_;
};

/// Orders 1..N; element i holds order i + 1.
std::vector<PTOrderResult> epsilon_series(int N, int max_order = default_max_order);

/// Replaces every g_m^(k) by its primed multiple sum over excited states.
std::string render_sum_over_states(const GExpression& e);

} // namespace spt
