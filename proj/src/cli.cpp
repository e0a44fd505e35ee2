#include "spt/cli.hpp"

#include "spt/error.hpp"
#include "spt/estimators.hpp"
#include "spt/rqmc.hpp"
#include "spt/rspt.hpp"
#include "spt/spectral.hpp"
#include "spt/walker.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#ifndef SPT_VERSION
#define SPT_VERSION "0.1.0"
#endif
#ifndef SPT_GIT_DESCRIBE
#define SPT_GIT_DESCRIBE "unknown"
#endif

namespace spt::cli {

using nlohmann::json;

std::string version_string() { return std::string("spt ") + SPT_VERSION + " (" + SPT_GIT_DESCRIBE + ")"; }

// ---------------------------------------------------------------------------
// schema

namespace {

enum class Kind { integer, number, boolean, string, list, matrix };

struct KeySpec {
    std::string name;
    Kind kind;
    json fallback;                 ///< null: no default
    bool required = false;
    std::vector<std::string> choices = {};
    double min = -std::numeric_limits<double>::infinity();
    bool min_exclusive = false;
};

const char* kind_name(Kind k) {
    switch (k) {
    case Kind::integer: return "an integer";
    case Kind::number: return "a number";
    case Kind::boolean: return "true or false";
    case Kind::string: return "a string";
    case Kind::list: return "a numeric list";
    case Kind::matrix: return "a numeric matrix";
    }
    return "";
}

std::vector<KeySpec> walker_keys(bool alpha_required) {
    return {
        {"trial", Kind::string, "gaussian", false, {"gaussian"}},
        {"alpha", Kind::number, nullptr, alpha_required, {}, 0.0, true},
        {"potential", Kind::string, "harmonic", false, {"harmonic", "quartic", "doublewell"}},
        {"quartic_coupling", Kind::number, 0.0, false, {}, 0.0},
        {"barrier", Kind::number, 1.0, false, {}, 0.0, true},
        {"well_minimum", Kind::number, 1.0, false, {}, 0.0, true},
        {"dimension", Kind::integer, 1, false, {}, 1},
        {"epsilon", Kind::number, 0.01, false, {}, 0.0, true},
        {"steps", Kind::integer, 100000, false, {}, 1},
        {"burn_in", Kind::integer, 1000, false, {}, 0},
        {"seed", Kind::integer, nullptr},
    };
}

std::vector<KeySpec> schema(std::string_view sub) {
    if (sub == "symbolic")
        return {{"order", Kind::integer, nullptr, true, {}, 1}, {"sum_over_states", Kind::boolean, false}};
    if (sub == "spectral" || sub == "model")
        return {
            {"order", Kind::integer, 4, false, {}, 1},
            {"oracle", Kind::boolean, false},
            {"energies", Kind::list, nullptr},
            {"wmat", Kind::matrix, nullptr},
            {"builder", Kind::string, nullptr, false, {"anharmonic"}},
            {"basis_size", Kind::integer, 60, false, {}, 20},
            {"quartic_coupling", Kind::number, 0.0, false, {}, 0.0},
            {"coupling_fraction", Kind::number, 0.01, false, {}, 0.0, true},
        };
    if (sub == "vmc" || sub == "spt-orders") {
        auto keys = walker_keys(true);
        keys.push_back({"series_file", Kind::string, nullptr});
        keys.push_back({"batches", Kind::integer, 32, false, {}, 2});
        keys.push_back({"window_factor", Kind::number, 6.0, false, {}, 0.0, true});
        if (sub == "spt-orders") {
            keys.push_back({"orders", Kind::integer, default_stochastic_order, false, {}, 1});
            keys.push_back({"tau_grid", Kind::list, nullptr});
            keys.push_back({"grid_min_factor", Kind::number, 10.0, false, {}, 0.0, true});
            keys.push_back({"grid_max_factor", Kind::number, 40.0, false, {}, 0.0, true});
            keys.push_back({"grid_points", Kind::integer, 8, false, {}, 2});
            keys.push_back({"residual_tolerance", Kind::number, 5.0, false, {}, 0.0, true});
            keys.push_back({"allow_high_orders", Kind::boolean, false});
        }
        return keys;
    }
    if (sub == "rqmc") {
        auto keys = walker_keys(true);
        keys.push_back({"n_beads", Kind::integer, 100, false, {}, 2});
        keys.push_back({"sweeps", Kind::integer, 10000, false, {}, 64});
        keys.push_back({"burn_in_sweeps", Kind::integer, 100, false, {}, 0});
        keys.push_back({"direction_policy", Kind::string, "bounce", false, {"bounce", "random"}});
        keys.push_back({"proposal_correction", Kind::boolean, false});
        keys.push_back({"workers", Kind::integer, 1, false, {}, 1});
        keys.push_back({"projection_time", Kind::number, 2.5, false, {}, 0.0, true});
        for (auto& k : keys)
            if (k.name == "epsilon") k.fallback = 0.05;
        return keys;
    }
    throw Error(ErrorCategory::validation, "unknown subcommand '" + std::string(sub) + "'");
}

bool is_numeric_list(const json& v) {
    return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
}

bool matches(const KeySpec& spec, const json& v) {
    switch (spec.kind) {
    case Kind::integer: return v.is_number_integer();
    case Kind::number: return v.is_number();
    case Kind::boolean: return v.is_boolean();
    case Kind::string: return v.is_string();
    case Kind::list: return is_numeric_list(v);
    case Kind::matrix:
        return v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), is_numeric_list);
    }
    return false;
}

/// Typed value from the right-hand side of `key = value`.
json parse_value(const std::string& raw) {
    std::string text = raw;
    text.erase(0, text.find_first_not_of(" \t"));
    text.erase(text.find_last_not_of(" \t\r") + 1);
    if (text.empty()) throw Error(ErrorCategory::parse, "empty value");
    json v = json::parse(text, nullptr, false);
    if (!v.is_discarded()) return v;
    if (text.front() == '[' || text.front() == '"') throw Error(ErrorCategory::parse, "malformed value '" + text + "'");
    return text; // bare word
}

} // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::vector<std::string> known_keys(std::string_view subcommand) {
    std::vector<std::string> out;
    for (const auto& k : schema(subcommand)) out.push_back(k.name);
    return out;
}

RunConfig make_config(std::string_view subcommand, json parameters) {
    const auto keys = schema(subcommand);
    for (const auto& [name, value] : parameters.items()) {
        const auto it = std::find_if(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.name == name; });
        if (it == keys.end()) {
            std::string best;
            std::size_t best_d = std::numeric_limits<std::size_t>::max();
            for (const auto& k : keys) {
                const std::size_t d = edit_distance(name, k.name);
                if (d < best_d) {
                    best_d = d;
                    best = k.name;
                }
            }
            std::string msg = "unknown key '" + name + "' for " + std::string(subcommand);
            if (best_d <= std::max<std::size_t>(2, name.size() / 3)) msg += "; did you mean '" + best + "'?";
            throw Error(ErrorCategory::validation, msg);
        }
        if (!matches(*it, value))
            throw Error(ErrorCategory::validation, "key '" + name + "' must be " + kind_name(it->kind));
        if (!it->choices.empty() &&
            std::find(it->choices.begin(), it->choices.end(), value.get<std::string>()) == it->choices.end()) {
            std::string list;
            for (const auto& c : it->choices) list += (list.empty() ? "" : ", ") + c;
            throw Error(ErrorCategory::validation, "key '" + name + "' must be one of: " + list);
        }
        if (value.is_number()) {
            const double x = value.get<double>();
            if (x < it->min || (it->min_exclusive && x == it->min))
                throw Error(ErrorCategory::validation, "key '" + name + "' must be " +
                                                           (it->min_exclusive ? "greater than " : "at least ") +
                                                           json(it->min).dump());
        }
    }
    for (const auto& k : keys) {
        if (parameters.contains(k.name)) continue;
        if (k.required) throw Error(ErrorCategory::validation, "missing required key '" + k.name + "'");
        if (!k.fallback.is_null()) parameters[k.name] = k.fallback;
    }

    if (subcommand == "spectral" || subcommand == "model") {
        const bool explicit_model = parameters.contains("energies") || parameters.contains("wmat");
        const bool builder = parameters.contains("builder");
        if (explicit_model == builder)
            throw Error(ErrorCategory::validation, "model needs either 'energies' and 'wmat' or 'builder'");
        if (explicit_model && !(parameters.contains("energies") && parameters.contains("wmat")))
            throw Error(ErrorCategory::validation,
                        std::string("missing required key '") + (parameters.contains("energies") ? "wmat" : "energies") +
                            "'");
    }

    if (subcommand == "spt-orders" && parameters["orders"].get<int>() > default_stochastic_order &&
        !parameters["allow_high_orders"].get<bool>())
        throw Error(ErrorCategory::validation, "key 'orders' above " + std::to_string(default_stochastic_order) +
                                                   " needs allow_high_orders = true");

    RunConfig cfg;
    cfg.subcommand = std::string(subcommand == "model" ? "spectral" : subcommand);
    cfg.parameters = std::move(parameters);
    if (cfg.parameters.contains("seed")) cfg.seed = cfg.parameters["seed"].get<std::uint64_t>();
    return cfg;
}

RunConfig parse_config(std::string_view text, std::string_view subcommand) {
    boost::property_tree::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error(ErrorCategory::parse, "config line " + std::to_string(e.line()) + ": " + e.message());
    }

    // line numbers for value errors
    std::map<std::string, std::size_t> line_of;
    {
        std::istringstream lines{std::string(text)};
        std::string line;
        for (std::size_t n = 1; std::getline(lines, line); ++n) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(0, eq);
            key.erase(0, key.find_first_not_of(" \t"));
            key.erase(key.find_last_not_of(" \t") + 1);
            line_of.emplace(key, n);
        }
    }

    json params = json::object();
    auto take = [&](const std::string& key, const std::string& raw) {
        if (params.contains(key)) throw Error(ErrorCategory::parse, "key '" + key + "' given more than once");
        try {
            params[key] = parse_value(raw);
        } catch (const Error& e) {
            throw Error(ErrorCategory::parse, "config line " + std::to_string(line_of[key]) + ": " + e.what());
        }
    };
    for (const auto& [name, node] : tree) {
        if (node.empty() && node.data().empty() && !line_of.count(name)) continue; // empty section
        if (node.empty())
            take(name, node.data());
        else
            for (const auto& [key, leaf] : node) take(key, leaf.data());
    }
    return make_config(subcommand, std::move(params));
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCategory::io, "cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw Error(ErrorCategory::io, "write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorCategory::io, "cannot move output into place at " + path + ": " + ec.message());
    }
}

json to_json(const GExpression& e) {
    auto big = [](const BigInt& x) -> json {
        if (x >= std::numeric_limits<std::int64_t>::min() && x <= std::numeric_limits<std::int64_t>::max())
            return static_cast<std::int64_t>(x);
        return x.str();
    };
    json terms = json::array();
    for (const auto& [mono, coeff] : e.terms()) {
        json factors = json::array();
        for (const auto& [v, exp] : mono.factors()) factors.push_back({{"m", v.order}, {"k", v.deriv}, {"exp", exp}});
        terms.push_back({{"coeff_num", big(numerator(coeff))},
                         {"coeff_den", big(denominator(coeff))},
                         {"factors", std::move(factors)}});
    }
    return terms;
}

// ---------------------------------------------------------------------------
// dispatch

namespace {

json estimate_json(const EstimateWithError& e) {
    return {{"mean", e.mean},
            {"err", e.std_error},
            {"autocorr_time", e.autocorr_time},
            {"effective_samples", e.effective_samples}};
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Potential make_potential(const json& p) {
    const auto name = p["potential"].get<std::string>();
    if (name == "quartic") return QuarticPotential{p["quartic_coupling"].get<double>()};
    if (name == "doublewell") return DoubleWellPotential{p["barrier"].get<double>(), p["well_minimum"].get<double>()};
    return HarmonicPotential{};
}

GaussianTrial make_trial(const json& p) { return GaussianTrial{p["alpha"].get<double>()}; }

LocalEnergySeries obtain_series(const RunConfig& cfg) {
    const json& p = cfg.parameters;
    const double eps = p["epsilon"].get<double>();
    const auto burn_in = p["burn_in"].get<std::size_t>();
    if (p.contains("series_file")) {
        const auto file = p["series_file"].get<std::string>();
        std::ifstream in(file);
        if (!in) throw Error(ErrorCategory::io, "cannot read series file " + file);
        return read_csv(in, eps, burn_in);
    }
    LangevinRunOptions opts;
    opts.epsilon = eps;
    opts.steps = p["steps"].get<std::size_t>();
    opts.burn_in = burn_in;
    opts.seed = cfg.seed;
    opts.start = Position::Zero(p["dimension"].get<Eigen::Index>());
    return sample_local_energy(make_trial(p), make_potential(p), opts);
}

std::string series_csv(const LocalEnergySeries& s) {
    std::ostringstream os;
    write_csv(os, s);
    return os.str();
}

json run_symbolic(const RunConfig& cfg, const RunFlags& flags, std::string& text) {
    const int order = cfg.parameters["order"].get<int>();
    const bool sos = flags.sum_over_states || cfg.parameters["sum_over_states"].get<bool>();
    const auto series = epsilon_series(order, std::max(order, default_max_order));
    json orders = json::array();
    std::ostringstream os;
    for (const auto& r : series) {
        json entry = {{"n", r.order}, {"text", to_string(r.epsilon)}, {"terms", to_json(r.epsilon)}};
        os << "epsilon_" << r.order << " = " << to_string(r.epsilon) << '\n';
        if (sos) {
            const std::string rendered = render_sum_over_states(r.epsilon);
            entry["sum_over_states"] = rendered;
            os << "  = " << rendered << '\n';
        }
        orders.push_back(std::move(entry));
    }
    text = os.str();
    return {{"orders", std::move(orders)}};
}

SpectralModel<double> model_from(const json& p) {
    if (p.contains("builder"))
        return build_anharmonic_model(p["basis_size"].get<int>(), p["quartic_coupling"].get<double>());
    SpectralModel<double> m;
    const auto e = p["energies"].get<std::vector<double>>();
    const auto w = p["wmat"].get<std::vector<std::vector<double>>>();
    m.energies = Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
    m.wmat.resize(static_cast<Eigen::Index>(w.size()), w.empty() ? 0 : static_cast<Eigen::Index>(w[0].size()));
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (static_cast<Eigen::Index>(w[i].size()) != m.wmat.cols())
            throw Error(ErrorCategory::invalid_model, "wmat rows have different lengths");
        for (std::size_t j = 0; j < w[i].size(); ++j)
            m.wmat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w[i][j];
    }
    if (m.wmat.rows() != m.energies.size())
        throw Error(ErrorCategory::invalid_model, "wmat dimension does not match the number of energies");
    validate(m);
    return m;
}

json run_spectral(const RunConfig& cfg, const RunFlags& flags, std::string& text) {
    const json& p = cfg.parameters;
    const int order = p["order"].get<int>();
    const bool oracle = flags.oracle || p["oracle"].get<bool>();
    const auto model = model_from(p);
    const auto eps = evaluate_epsilons(model, order);
    std::ostringstream os;
    json rows = json::array();
    if (oracle) {
        TaylorOptions topts;
        topts.coupling_fraction = p["coupling_fraction"].get<double>();
        const auto t = taylor_oracle(model, order, topts);
        os << "n,epsilon,oracle,rel_diff\n";
        for (int n = 1; n <= order; ++n) {
            const double e = eps[static_cast<std::size_t>(n - 1)];
            const double c = t.coeffs[static_cast<std::size_t>(n - 1)];
            const double rel = std::abs(e - c) / std::max(std::abs(c), 1e-10);
            os << n << ',' << format_double(e) << ',' << format_double(c) << ',' << format_double(rel) << '\n';
            rows.push_back({{"n", n}, {"epsilon", e}, {"oracle", c}, {"rel_diff", rel}});
        }
    } else {
        os << "n,epsilon\n";
        for (int n = 1; n <= order; ++n) {
            const double e = eps[static_cast<std::size_t>(n - 1)];
            os << n << ',' << format_double(e) << '\n';
            rows.push_back({{"n", n}, {"epsilon", e}});
        }
    }
    text = os.str();
    return {{"orders", std::move(rows)}};
}

json blocking_json(const BlockingAnalysis& b) {
    json levels = json::array();
    for (const auto& l : b.levels)
        levels.push_back({{"block_size", l.block_size}, {"blocks", l.blocks}, {"error", l.error}});
    return {{"plateau_level", b.plateau}, {"levels", std::move(levels)}};
}

json run_vmc(const RunConfig& cfg, const RunFlags& flags, std::string& series_out) {
    const json& p = cfg.parameters;
    const auto series = obtain_series(cfg);
    if (flags.want_series) series_out = series_csv(series);
    const auto energy = vmc_estimate(series);
    AutocorrelationOptions aopts;
    aopts.batches = p["batches"].get<std::size_t>();
    aopts.window_factor = p["window_factor"].get<double>();
    const auto e2 = autocorrelation_integral(series, aopts);
    const auto eq = series.equilibrated();
    return {{"epsilon_n", {{"1", {{"mean", energy.mean}, {"err", energy.std_error}}},
                           {"2", {{"mean", e2.mean}, {"err", e2.std_error}}}}},
            {"energy", estimate_json(energy)},
            {"tau_w", energy.autocorr_time},
            {"diagnostics",
             {{"samples", eq.size()}, {"step", series.step}, {"blocking", blocking_json(blocking_analysis(eq))}}}};
}

json run_spt_orders(const RunConfig& cfg, const RunFlags& flags, std::string& series_out) {
    const json& p = cfg.parameters;
    const auto series = obtain_series(cfg);
    if (flags.want_series) series_out = series_csv(series);
    const int orders = p["orders"].get<int>();
    json warnings = json::array();
    if (orders > default_stochastic_order) {
        warnings.push_back("orders above " + std::to_string(default_stochastic_order) +
                           " come from ill-conditioned moment-to-cumulant conversions; expect large errors");
    }
    const auto acw = integrated_autocorrelation(series.equilibrated(), p["window_factor"].get<double>());
    const double tau_w = acw.variance > 0.0 ? acw.tau_int * series.step : 0.0;

    std::vector<double> grid;
    if (p.contains("tau_grid")) {
        grid = p["tau_grid"].get<std::vector<double>>();
    } else {
        const double unit = tau_w > 0.0 ? tau_w : series.step;
        const double lo = p["grid_min_factor"].get<double>() * unit;
        const double hi = p["grid_max_factor"].get<double>() * unit;
        const int pts = p["grid_points"].get<int>();
        for (int j = 0; j < pts; ++j) grid.push_back(lo + (hi - lo) * j / (pts - 1));
    }
    const auto moments = action_moments(series, grid, orders, p["batches"].get<std::size_t>());
    StochasticFitOptions fopts;
    fopts.residual_tolerance = p["residual_tolerance"].get<double>();
    const auto fits = fit_cumulants(moments, orders, fopts);
    const auto eps = stochastic_epsilons(moments, orders, fopts);

    json eps_json = json::object();
    for (std::size_t i = 0; i < eps.size(); ++i)
        eps_json[std::to_string(i + 1)] = {{"mean", eps[i].mean}, {"err", eps[i].std_error}};
    json fit_json = json::array();
    for (const auto& f : fits)
        fit_json.push_back({{"order", f.order},
                            {"slope", f.slope},
                            {"slope_err", f.slope_error},
                            {"intercept", f.intercept},
                            {"r_squared", f.r_squared},
                            {"max_residual_sigma", f.max_residual_sigma},
                            {"gamma", f.gamma},
                            {"gamma_err", f.gamma_errors}});
    AutocorrelationOptions aopts;
    aopts.batches = p["batches"].get<std::size_t>();
    aopts.window_factor = p["window_factor"].get<double>();
    const auto e2 = autocorrelation_integral(series, aopts);
    return {{"epsilon_n", std::move(eps_json)},
            {"tau_w", tau_w},
            {"diagnostics",
             {{"tau_grid", moments.tau_grid},
              {"fits", std::move(fit_json)},
              {"epsilon_2_autocorrelation", {{"mean", e2.mean}, {"err", e2.std_error}}},
              {"samples", series.equilibrated().size()}}},
            {"warnings", std::move(warnings)}};
}

json run_rqmc_cmd(const RunConfig& cfg, const RunFlags& flags, std::string& series_out) {
    const json& p = cfg.parameters;
    const LangevinPathModel<GaussianTrial> model{make_trial(p), make_potential(p), p["epsilon"].get<double>()};
    RQMCOptions opts;
    opts.n_beads = p["n_beads"].get<std::size_t>();
    opts.sweeps = p["sweeps"].get<std::size_t>();
    opts.burn_in_sweeps = p["burn_in_sweeps"].get<std::size_t>();
    opts.moves.policy =
        p["direction_policy"].get<std::string>() == "random" ? DirectionPolicy::random : DirectionPolicy::bounce;
    opts.moves.proposal_correction = p["proposal_correction"].get<bool>();
    opts.workers = p["workers"].get<std::size_t>();
    opts.seed = cfg.seed;
    opts.equilibration_steps = p["burn_in"].get<std::size_t>();
    opts.projection_time = p["projection_time"].get<double>();
    const std::map<std::string, Observable<WalkerState>> observables{
        {"x2", [](const WalkerState& s) { return s.position.squaredNorm(); }},
        {"local_energy", [](const WalkerState& s) { return s.local_energy; }},
    };
    const auto start = model.make_state(Position::Zero(p["dimension"].get<Eigen::Index>()));
    const auto r = run_rqmc(model, start, opts, observables);

    if (flags.want_series) {
        std::ostringstream os;
        os << "sweep,W_head,W_tail,S\n";
        for (std::size_t i = 0; i < r.head_energies.size(); ++i)
            os << i << ',' << format_double(r.head_energies[i]) << ',' << format_double(r.tail_energies[i]) << ','
               << format_double(r.actions[i]) << '\n';
        series_out = os.str();
    }
    json pure = json::object();
    for (const auto& [name, e] : r.pure_observables) pure[name] = estimate_json(e);
    return {{"energy", estimate_json(r.energy)},
            {"acceptance_rate", r.acceptance_rate},
            {"moves", r.moves},
            {"accepted", r.accepted},
            {"path_length", model.time_step() * static_cast<double>(opts.n_beads - 1)},
            {"pure_observables", std::move(pure)},
            {"discarded_sweeps", r.discarded_sweeps},
            {"recorded_sweeps", r.head_energies.size()},
            {"warnings", r.warnings}};
}

} // namespace

RunOutput run(const RunConfig& config, const RunFlags& flags) {
    const auto t0 = std::chrono::steady_clock::now();
    RunOutput out;
    json results;
    const std::string& sub = config.subcommand;
    if (sub == "symbolic")
        results = run_symbolic(config, flags, out.text);
    else if (sub == "spectral")
        results = run_spectral(config, flags, out.text);
    else if (sub == "vmc")
        results = run_vmc(config, flags, out.series_csv);
    else if (sub == "spt-orders")
        results = run_spt_orders(config, flags, out.series_csv);
    else if (sub == "rqmc")
        results = run_rqmc_cmd(config, flags, out.series_csv);
    else
        throw Error(ErrorCategory::validation, "unknown subcommand '" + sub + "'");

    json report = {{"schema_version", schema_version},
                   {"version", version_string()},
                   {"subcommand", sub},
                   {"config", config.parameters},
                   {"seed", config.seed},
                   {"results", std::move(results)}};
    if (flags.timing)
        report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.report = std::move(report);
    return out;
}

} // namespace spt::cli
