#include "doctest.h"

#include "spt/cli.hpp"
#include "spt/error.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace spt;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ErrorCategory category_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.category();
    }
    FAIL("no error thrown");
    return ErrorCategory::io;
}

std::string message_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / "spt_cli_test";
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << content;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Invocation {
    int status;
    std::string out;
};

Invocation spt_tool(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " SPT_TOOL " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

const char* small_vmc = "alpha = 1.2\nepsilon = 0.02\nsteps = 100000\nburn_in = 500\n";

} // namespace

TEST_CASE("parse simple keys") {
    const auto c = cli::parse_config("order = 6\n", "symbolic");
    CHECK(c.subcommand == "symbolic");
    CHECK(c.parameters["order"] == 6);
    CHECK(c.parameters["sum_over_states"] == false);
}

TEST_CASE("defaults are filled in") {
    const auto c = cli::parse_config("# harmonic walk\nalpha = 1.2\n", "vmc");
    CHECK(c.parameters["alpha"] == 1.2);
    CHECK(c.parameters["epsilon"] == 0.01);
    CHECK(c.parameters["trial"] == "gaussian");
    CHECK(c.parameters["potential"] == "harmonic");
    CHECK(c.seed == 1);
    CHECK(cli::parse_config("alpha = 1.2\nseed = 77\n", "vmc").seed == 77);
}

TEST_CASE("sections group keys") {
    const auto c = cli::parse_config("[walk]\nalpha = 1.1\nepsilon = 0.02\n[run]\nsteps = 5000\n", "vmc");
    CHECK(c.parameters["alpha"] == 1.1);
    CHECK(c.parameters["steps"] == 5000);
    CHECK(cli::parse_config("[empty]\n[walk]\nalpha = 1.1\n", "vmc").parameters["alpha"] == 1.1);
}

TEST_CASE("matrices and lists") {
    const auto c = cli::parse_config("energies = [0, 1]\nwmat = [[0, 0.1], [0.1, 0]]\norder = 6\n", "spectral");
    CHECK(c.parameters["wmat"][0][1] == 0.1);
    CHECK(c.parameters["energies"].size() == 2);
    CHECK(category_of([] { cli::parse_config("energies = [0, 1\nwmat = [[0]]\n", "spectral"); }) ==
          ErrorCategory::parse);
}

TEST_CASE("missing required key is named") {
    const auto msg = message_of([] { cli::parse_config("epsilon = 0.01\n", "vmc"); });
    CHECK(msg.find("'alpha'") != std::string::npos);
    CHECK(category_of([] { cli::parse_config("epsilon = 0.01\n", "vmc"); }) == ErrorCategory::validation);
}

TEST_CASE("unknown keys suggest the nearest known key") {
    const auto msg = message_of([] { cli::parse_config("alpa = 1.2\n", "vmc"); });
    CHECK(msg.find("unknown key 'alpa'") != std::string::npos);
    CHECK(msg.find("did you mean 'alpha'") != std::string::npos);
    CHECK(message_of([] { cli::parse_config("alpha = 1\nzzzzzzzz = 1\n", "vmc"); }).find("did you mean") ==
          std::string::npos);
    CHECK(cli::edit_distance("alpa", "alpha") == 1);
    CHECK(cli::edit_distance("", "abc") == 3);
    CHECK(cli::edit_distance("kitten", "sitting") == 3);
}

TEST_CASE("type, range and choice errors") {
    CHECK(category_of([] { cli::parse_config("alpha = fast\n", "vmc"); }) == ErrorCategory::validation);
    CHECK(category_of([] { cli::parse_config("alpha = -1\n", "vmc"); }) == ErrorCategory::validation);
    CHECK(category_of([] { cli::parse_config("alpha = 0\n", "vmc"); }) == ErrorCategory::validation);
    const auto msg = message_of([] { cli::parse_config("alpha = 1\npotential = cubic\n", "vmc"); });
    CHECK(msg.find("one of") != std::string::npos);
    CHECK(category_of([] { cli::parse_config("order = 6\norder = 7\n", "symbolic"); }) == ErrorCategory::parse);
    CHECK(category_of([] { cli::parse_config("alpha = 1\norders = 5\n", "spt-orders"); }) ==
          ErrorCategory::validation);
    CHECK_NOTHROW(cli::parse_config("alpha = 1\norders = 5\nallow_high_orders = true\n", "spt-orders"));
    CHECK(category_of([] { cli::parse_config("alpha = 1\nsweeps = 10\n", "rqmc"); }) == ErrorCategory::validation);
    CHECK(category_of([] { cli::parse_config("order = 4\n", "spectral"); }) == ErrorCategory::validation);
    CHECK(category_of([] { cli::parse_config("builder = anharmonic\nbasis_size = 10\n", "spectral"); }) ==
          ErrorCategory::validation);
}

TEST_CASE("parse errors carry the line number") {
    const auto msg = message_of([] { cli::parse_config("alpha = 1.2\n\nthis line has no equals sign\n", "vmc"); });
    CHECK(msg.find("line 3") != std::string::npos);
    const auto value_msg = message_of([] { cli::parse_config("alpha = 1.2\nepsilon = [0.1\n", "vmc"); });
    CHECK(value_msg.find("line 2") != std::string::npos);
}

TEST_CASE("symbolic run") {
    const auto c = cli::parse_config("order = 3\n", "symbolic");
    const auto out = cli::run(c);
    CHECK(out.text.find("g3") != std::string::npos);
    CHECK(out.report["schema_version"] == 1);
    CHECK(out.report["subcommand"] == "symbolic");
    CHECK(out.report["results"].is_object());
    CHECK(!out.report.contains("wall_time_s"));
    cli::RunFlags timed;
    timed.timing = true;
    CHECK(cli::run(c, timed).report.contains("wall_time_s"));
    CHECK(cli::version_string().rfind("spt 0.1.0", 0) == 0);
}

TEST_CASE("spectral run") {
    const auto c = cli::parse_config("energies = [0, 1]\nwmat = [[0, 0.1], [0.1, 0]]\norder = 4\n", "spectral");
    cli::RunFlags f;
    f.oracle = true;
    const auto out = cli::run(c, f);
    CHECK(out.text.rfind("n,epsilon,oracle,rel_diff\n", 0) == 0);
    CHECK(out.text.find("\n2,-0.01") != std::string::npos);
    const auto plain = cli::run(c);
    CHECK(plain.text.rfind("n,epsilon\n", 0) == 0);
}

TEST_CASE("vmc run and series export") {
    auto c = cli::parse_config(small_vmc, "vmc");
    cli::RunFlags f;
    f.want_series = true;
    const auto out = cli::run(c, f);
    const auto& r = out.report["results"];
    CHECK(r["energy"]["mean"].is_number());
    CHECK(r["epsilon_n"].size() == 2);
    CHECK(out.series_csv.rfind("step,W\n", 0) == 0);
    CHECK(out.report["config"]["alpha"] == 1.2);

    // re-analysis of an exported series gives the same estimate
    const auto series = write_file("series.csv", out.series_csv);
    auto again = cli::parse_config(std::string(small_vmc) + "series_file = " + series.string() + "\n", "vmc");
    CHECK(cli::run(again).report["results"]["energy"] == r["energy"]);
}

TEST_CASE("write_atomic") {
    const fs::path p = scratch() / "report.json";
    cli::write_atomic(p.string(), "first");
    cli::write_atomic(p.string(), "second");
    CHECK(slurp(p) == "second");
    CHECK(!fs::exists(fs::path(p.string() + ".tmp")));
    CHECK(category_of([] { cli::write_atomic("/nonexistent/dir/out.json", "x"); }) == ErrorCategory::io);
}

TEST_CASE("json rendering of expressions") {
    const json j = cli::to_json(GExpression(GMonomial(GVar(2, 0)), Rational(-1)));
    CHECK(j[0]["coeff_num"] == -1);
    CHECK(j[0]["coeff_den"] == 1);
}

TEST_CASE("tool exit codes") {
    CHECK(spt_tool("symbolic --order 2").status == 0);
    CHECK(spt_tool("symbolic --order 2").out.find("g2") != std::string::npos);
    CHECK(spt_tool("--version").out.find("spt 0.1.0") != std::string::npos);
    CHECK(spt_tool("vmc --config " + write_file("bad.cfg", "alpa = 1\n").string()).status == 2);
    CHECK(spt_tool("vmc --config " + write_file("unparsable.cfg", "alpha = 1\nbroken line\n").string()).status == 2);
    CHECK(spt_tool("vmc --config " + (scratch() / "missing.cfg").string()).status == 5);
    const auto model = write_file("cross.cfg", "energies = [1, 0]\nwmat = [[0, 0.1], [0.1, 0]]\n");
    CHECK(spt_tool("spectral --model " + model.string()).status == 3);
    const auto shortrun = write_file("short.cfg", "alpha = 1.2\nsteps = 500\nburn_in = 10\n");
    CHECK(spt_tool("vmc --config " + shortrun.string()).status == 4);
}

TEST_CASE("seed priority") {
    const auto cfg = write_file("seeded.cfg", std::string(small_vmc) + "seed = 3\n");
    auto seed_of = [](const Invocation& i) { return json::parse(i.out)["seed"].get<std::uint64_t>(); };
    CHECK(seed_of(spt_tool("vmc --config " + cfg.string())) == 3);
    CHECK(seed_of(spt_tool("vmc --config " + cfg.string(), "SPT_SEED=9")) == 9);
    CHECK(seed_of(spt_tool("vmc --config " + cfg.string() + " --seed 11", "SPT_SEED=9")) == 11);
    const auto plain = write_file("unseeded.cfg", small_vmc);
    CHECK(seed_of(spt_tool("vmc --config " + plain.string())) == 1);

    const auto a = spt_tool("vmc --config " + cfg.string() + " --seed 11");
    const auto b = spt_tool("vmc --config " + cfg.string(), "SPT_SEED=11");
    CHECK(json::parse(a.out)["results"] == json::parse(b.out)["results"]);
    CHECK(spt_tool("vmc --config " + cfg.string(), "SPT_SEED=abc").status == 2);
}

TEST_CASE("output file") {
    const auto cfg = write_file("out.cfg", small_vmc);
    const fs::path out = scratch() / "vmc.json";
    fs::remove(out);
    const auto r = spt_tool("vmc --config " + cfg.string() + " -o " + out.string());
    CHECK(r.status == 0);
    CHECK(r.out.empty());
    CHECK(json::parse(slurp(out))["subcommand"] == "vmc");
}
