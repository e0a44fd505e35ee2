#include "spt/rspt.hpp"

#include "spt/error.hpp"

#include <functional>

namespace spt {
namespace {

BigInt factorial(int n) {
    BigInt f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Enumerates j_1..j_m >= 0 with sum j_k = parts and sum k j_k = total.
void for_each_composition(int parts, int total, int m,
                          const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> j(static_cast<std::size_t>(m), 0);
    std::function<void(int, int, int)> rec = [&](int k, int parts_left, int total_left) {
        if (k > m) {
            if (parts_left == 0 && total_left == 0) visit(j);
            return;
        }
        for (int jk = 0; jk <= parts_left && jk * k <= total_left; ++jk) {
            const int rest_parts = parts_left - jk;
            const int rest_total = total_left - jk * k;
            // every remaining part weighs at least k + 1
            if (rest_parts * (k + 1) > rest_total) continue;
            j[static_cast<std::size_t>(k - 1)] = jk;
            rec(k + 1, rest_parts, rest_total);
        }
        j[static_cast<std::size_t>(k - 1)] = 0;
    };
    rec(1, parts, total);
}

} // namespace

GExpression ordinary_bell(int n, int l) {
    if (n < 1 || l < 1 || l > n)
        throw Error(ErrorCategory::argument_range,
                    "ordinary_bell requires 1 <= l <= n, got n=" + std::to_string(n) +
                        " l=" + std::to_string(l));
    const int m = n - l + 1;
    const BigInt lfact = factorial(l);
    GExpression out;
    for_each_composition(l, n, m, [&](const std::vector<int>& j) {
        BigInt denom = 1;
        GMonomial mono;
        for (int k = 1; k <= m; ++k) {
            int jk = j[static_cast<std::size_t>(k - 1)];
            if (jk == 0) continue;
            denom *= factorial(jk);
            mono = mono * GMonomial(GVar(k), jk);
        }
        out.add_term(mono, Rational(lfact, denom));
    });
    return out;
}

LambdaNaughts lambda_naughts(int n) {
    if (n < 1) throw Error(ErrorCategory::argument_range, "lambda_naughts requires n >= 1");
    LambdaNaughts out;
    for (int l = 1; l <= n; ++l) {
        GExpression bell = ordinary_bell(n, l);
        GExpression d_lm1 = differentiate_z(bell, l - 1);
        out.lambdadot0 += d_lm1 * Rational(1, factorial(l - 1));
        out.lambda0 += differentiate_z(d_lm1) * Rational(1, factorial(l));
    }
    return out;
}

GammaNaughts gamma_naughts(int n, std::span<const PTOrderResult> cache) {
    if (n < 1) throw Error(ErrorCategory::argument_range, "gamma_naughts requires n >= 1");
    for (int k = 1; k < n; ++k) {
        if (static_cast<int>(cache.size()) < k || cache[static_cast<std::size_t>(k - 1)].order != k)
            throw Error(ErrorCategory::missing_cache,
                        "gamma_naughts(" + std::to_string(n) + ") needs cached order " + std::to_string(k));
    }
    auto at = [&](int k) -> const PTOrderResult& { return cache[static_cast<std::size_t>(k - 1)]; };

    LambdaNaughts lam = lambda_naughts(n);
    GammaNaughts out{lam.lambda0, lam.lambdadot0};
    for (int k = 1; k < n; ++k) {
        const Rational w(n - k, n);
        const PTOrderResult& g = at(n - k);
        const PTOrderResult& l = at(k);
        out.gamma0 -= (g.gamma0 * l.lambda0) * w;
        out.gammadot0 -= (g.gammadot0 * l.lambda0 + g.gamma0 * l.lambdadot0) * w;
    }
    return out;
}

PerturbationSeries::PerturbationSeries(int max_order) : max_order_(max_order) {
    if (max_order < 1) throw Error(ErrorCategory::argument_range, "max_order must be >= 1");
}

const PTOrderResult& PerturbationSeries::order(int n) {
    if (n < 1 || n > max_order_)
        throw Error(ErrorCategory::argument_range,
                    "perturbative order " + std::to_string(n) + " outside [1, " +
                        std::to_string(max_order_) + "]");
    while (static_cast<int>(results_.size()) < n) {
        const int k = static_cast<int>(results_.size()) + 1;
        PTOrderResult r;
        r.order = k;
        LambdaNaughts lam = lambda_naughts(k);
        r.lambda0 = std::move(lam.lambda0);
        r.lambdadot0 = std::move(lam.lambdadot0);
        GammaNaughts gam = gamma_naughts(k, results_);
        r.gamma0 = std::move(gam.gamma0);
        r.gammadot0 = std::move(gam.gammadot0);
        r.epsilon = (k % 2 == 1) ? r.gammadot0 : -r.gammadot0;
        results_.push_back(std::move(r));
    }
    return results_[static_cast<std::size_t>(n - 1)];
}

std::vector<PTOrderResult> epsilon_series(int N, int max_order) {
    if (N < 1) throw Error(ErrorCategory::argument_range, "epsilon_series requires N >= 1");
    PerturbationSeries series(max_order);
    series.order(N);
    auto done = series.computed();
    return {done.begin(), done.end()};
}

// ---------------------------------------------------------------------------

namespace {

// Sum-over-states text for g_m^(k), without the (-1)^k k! prefactor.
std::string chain_text(GVar v) {
    if (v.order == 1) return "W_{00}";
    const int m = v.order;
    const int l = v.deriv;
    if (m == 2) {
        std::string s = "Σ'_k W_{0k} W_{k0} / E_k";
        if (l > 0) s += "^" + std::to_string(l + 1);
        return s;
    }
    auto idx = [](int i) { return "k" + std::to_string(i); };
    std::string s = "Σ'_{";
    for (int i = 1; i < m; ++i) s += (i > 1 ? "," : "") + idx(i);
    s += "} W_{0" + idx(m - 1) + "}";
    for (int i = m - 1; i > 1; --i) s += " W_{" + idx(i) + idx(i - 1) + "}";
    s += " W_{" + idx(1) + "0} / (";
    for (int i = m - 1; i >= 1; --i) s += std::string(i < m - 1 ? " " : "") + "E_{" + idx(i) + "}";
    s += ")";
    if (l > 0) {
        s += " h_" + std::to_string(l) + "(";
        for (int i = 1; i < m; ++i) s += std::string(i > 1 ? ", " : "") + "1/E_{" + idx(i) + "}";
        s += ")";
    }
    return s;
}

} // namespace

std::string render_sum_over_states(const GExpression& e) {
    if (e.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [mono, coeff] : e.terms()) {
        Rational c = coeff;
        for (const auto& [v, p] : mono.factors()) {
            if (v.order == 1) continue;
            Rational pref = Rational(factorial(v.deriv)) * (v.deriv % 2 ? -1 : 1);
            for (int i = 0; i < p; ++i) c *= pref;
        }
        Rational mag = c < 0 ? Rational(-c) : c;
        out += first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ");
        first = false;

        const bool single = mono.factors().size() == 1 && mono.factors().front().second == 1;
        std::string body;
        for (const auto& [v, p] : mono.factors()) {
            if (!body.empty()) body += " ";
            if (single)
                body += chain_text(v);
            else
                body += "[" + chain_text(v) + "]" + (p > 1 ? "^" + std::to_string(p) : "");
        }
        if (body.empty())
            out += to_string(mag);
        else if (mag == 1)
            out += body;
        else
            out += to_string(mag) + " " + body;
    }
    return out;
}

} // namespace spt
