#include "spt/cli.hpp"
#include "spt/error.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw spt::Error(spt::ErrorCategory::io, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Common {
    std::string config_file;
    std::string output;
    std::string series;
    std::optional<std::uint64_t> seed;
    bool timing = false;
};

void add_common(CLI::App* app, Common& c, bool stochastic) {
    app->add_option("--config", c.config_file, "config file (key = value)");
    app->add_option("-o,--output", c.output, "write the report here instead of stdout");
    app->add_flag("--timing", c.timing, "include wall time in the report");
    if (stochastic) {
        app->add_option("--seed", c.seed, "master seed (overrides SPT_SEED and the config)");
        app->add_option("--series", c.series, "export the sampled series as CSV");
    }
}

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("SPT_SEED");
    if (!s || !*s) return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw spt::Error(spt::ErrorCategory::validation, "SPT_SEED must be an unsigned integer");
    return v;
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty())
        std::cout << content;
    else
        spt::cli::write_atomic(path, content);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Perturbative corrections: symbolic, spectral and stochastic"};
    app.set_version_flag("--version", spt::cli::version_string());
    app.require_subcommand(1);

    Common sym_c, spec_c, vmc_c, orders_c, rqmc_c;
    int sym_order = 0;
    bool sym_json = false, sym_sos = false;
    auto* sym = app.add_subcommand("symbolic", "energy corrections as polynomials in g_m^(k)");
    add_common(sym, sym_c, false);
    sym->add_option("--order", sym_order, "highest order")->check(CLI::Range(1, 12));
    sym->add_flag("--json", sym_json, "print the JSON report");
    sym->add_flag("--sum-over-states", sym_sos, "also render as sums over states");

    std::string model_file;
    int spec_order = 0;
    bool spec_oracle = false;
    auto* spec = app.add_subcommand("spectral", "evaluate corrections on a model spectrum");
    add_common(spec, spec_c, false);
    spec->add_option("--model", model_file, "model file")->required();
    spec->add_option("--order", spec_order, "highest order")->check(CLI::Range(1, 12));
    spec->add_flag("--oracle", spec_oracle, "compare with the diagonalization oracle");

    auto* vmc = app.add_subcommand("vmc", "variational Monte Carlo energy and second-order correction");
    add_common(vmc, vmc_c, true);
    auto* orders = app.add_subcommand("spt-orders", "corrections from cumulants of the action");
    add_common(orders, orders_c, true);
    auto* rqmc = app.add_subcommand("rqmc", "reptation Monte Carlo ground-state energy");
    add_common(rqmc, rqmc_c, true);
    for (auto* sub : {vmc, orders, rqmc}) sub->get_option("--config")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* chosen = app.get_subcommands().front();
        const std::string name = chosen->get_name();
        Common& c = name == "symbolic" ? sym_c
                    : name == "spectral" ? spec_c
                    : name == "vmc" ? vmc_c
                    : name == "spt-orders" ? orders_c
                                           : rqmc_c;

        spt::cli::RunFlags flags;
        flags.timing = c.timing;
        flags.want_series = !c.series.empty();
        spt::cli::RunConfig cfg;
        if (name == "symbolic") {
            nlohmann::json params = c.config_file.empty() ? nlohmann::json::object()
                                                          : spt::cli::parse_config(read_file(c.config_file), name).parameters;
            if (sym_order > 0) params["order"] = sym_order;
            cfg = spt::cli::make_config(name, params);
            flags.json = sym_json;
            flags.sum_over_states = sym_sos;
        } else if (name == "spectral") {
            nlohmann::json params = spt::cli::parse_config(read_file(model_file), "model").parameters;
            if (spec_order > 0) params["order"] = spec_order;
            cfg = spt::cli::make_config("spectral", params);
            flags.oracle = spec_oracle;
        } else {
            cfg = spt::cli::parse_config(read_file(c.config_file), name);
            if (auto s = env_seed()) cfg.seed = *s;
            if (c.seed) cfg.seed = *c.seed;
            cfg.parameters["seed"] = cfg.seed;
        }

        const auto out = spt::cli::run(cfg, flags);
        if (name == "spectral" || (name == "symbolic" && !flags.json))
            emit(c.output, out.text);
        else
            emit(c.output, out.report.dump(2) + "\n");
        if (flags.want_series) spt::cli::write_atomic(c.series, out.series_csv);
        return 0;
    } catch (const spt::Error& e) {
        std::cerr << "spt: " << spt::category_name(e.category()) << ": " << e.what() << '\n';
        return spt::exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "spt: internal: " << e.what() << '\n';
        return 1;
    }
}
