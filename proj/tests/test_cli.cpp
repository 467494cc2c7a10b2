#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "cylkam/cli.hpp"

using namespace cylkam;
using cylkam::cli::parse_config;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("cylkam_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json minimal_kam() {
    return json{{"alpha", "golden"},
                {"kam",
                 {{"pert",
                   {{"mode", "manufactured"},
                    {"h1", "1.5915494309189535e-4*sin(2*pi*x)"},
                    {"h2", "1.5915494309189535e-4*cos(2*pi*x)"}}}}}};
}

} // namespace

TEST_CASE("parse_config: minimal kam config gets the documented defaults") {
    const auto cfg = parse_config(minimal_kam(), "kam");
    REQUIRE(cfg.nx == 64);
    REQUIRE(cfg.ny == 32);
    REQUIRE(cfg.tol == 1e-9);
    REQUIRE(cfg.max_iter == 12);
    REQUIRE(cfg.delta0 == 0.25);
}

TEST_CASE("parse_config: alpha is required and named in the violation") {
    json j = minimal_kam();
    j.erase("alpha");
    try {
        parse_config(j, "kam");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        bool named = false;
        for (const auto& v : e.violations)
            if (v.find("alpha") != std::string::npos) named = true;
        REQUIRE(named);
    }
}

TEST_CASE("parse_config: golden resolves to (sqrt 5 - 1)/2") {
    const auto cfg = parse_config(minimal_kam(), "kam");
    REQUIRE(cfg.alpha == Catch::Approx(0.6180339887498949).margin(1e-12));
}

TEST_CASE("parse_config: unknown keys are rejected, all violations listed") {
    json j = minimal_kam();
    j["mystery"] = 1;
    j["grid"] = {{"nx", 12}, {"ny", 32}};
    try {
        parse_config(j, "kam");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        REQUIRE(e.violations.size() >= 2);
    }
}

TEST_CASE("parse_config: explicit kam pair requires the semi-conjugacy input") {
    json j = minimal_kam();
    j["kam"]["pert"] = {{"mode", "explicit"}, {"f1", "0"}, {"f2", "0"}, {"k1", "0"}, {"k2", "0"}};
    try {
        parse_config(j, "kam");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        bool named = false;
        for (const auto& v : e.violations)
            if (v.find("semiconj") != std::string::npos) named = true;
        REQUIRE(named);
    }
}

TEST_CASE("parse_config: auto constants on a rational alpha is a config error") {
    json j = minimal_kam();
    j["alpha"] = 0.5;
    REQUIRE_THROWS_AS(parse_config(j, "kam"), ConfigError);
}

TEST_CASE("execute kam: manufactured fixture converges with exit 0") {
    const auto dir = fresh_dir("kam_ok");
    json j = minimal_kam();
    j["output_dir"] = dir.string();
    const auto cfg = parse_config(j, "kam");
    REQUIRE(cli::execute(cfg) == cli::exit_ok);
    const json report = json::parse(slurp(dir / "report.json"));
    REQUIRE(report["status"] == "Converged");
    REQUIRE(report["iterations"].get<int>() <= 8);
    REQUIRE(report.contains("reproducibility"));
    REQUIRE(fs::exists(dir / "steps.csv"));
}

TEST_CASE("execute kam: rational alpha exits 2 naming the Diophantine violation") {
    const auto dir = fresh_dir("kam_rational");
    json j = {{"alpha", 1.0 / 3.0},
              {"dioph", {{"sigma", 0.5}, {"tau", 1.0}}},
              {"output_dir", dir.string()},
              {"kam",
               {{"pert",
                 {{"mode", "explicit"},
                  {"f1", "0.1*sin(2*pi*3*x)/(2*pi*3)^2"},
                  {"f2", "0.1*sin(2*pi*3*x)/(2*pi*3)^2"},
                  {"k1", "0"},
                  {"k2", "0"},
                  {"semiconj", {{"v", "0"}, {"lipschitz", 1.5}}}}}}}};
    const auto cfg = parse_config(j, "kam");
    REQUIRE(cli::execute(cfg) == cli::exit_hypothesis);
    const json report = json::parse(slurp(dir / "report.json"));
    REQUIRE(report["status"] == "HypothesisViolated");
    REQUIRE(report["hypothesis"] == "diophantine");
}

TEST_CASE("execute kam: constant-sign f2 exits 2 on the intersection check") {
    const auto dir = fresh_dir("kam_intersection");
    json j = {{"alpha", "golden"},
              {"output_dir", dir.string()},
              {"kam",
               {{"pert",
                 {{"mode", "explicit"},
                  {"f1", "0"},
                  {"f2", "0.001"},
                  {"k1", "0"},
                  {"k2", "0"},
                  {"semiconj", {{"v", "0"}, {"lipschitz", 1.5}}}}}}}};
    const auto cfg = parse_config(j, "kam");
    REQUIRE(cli::execute(cfg) == cli::exit_hypothesis);
    const json report = json::parse(slurp(dir / "report.json"));
    REQUIRE(report["hypothesis"] == "intersection");
}

TEST_CASE("execute kam: omega reduction path on a trivial pair") {
    const auto dir = fresh_dir("kam_omega");
    json j = {{"alpha", "golden"},
              {"output_dir", dir.string()},
              {"kam",
               {{"omega", {{"forward", "2*y"}, {"inverse", "y/2"}}},
                {"pert",
                 {{"mode", "explicit"},
                  {"f1", "0"},
                  {"f2", "0"},
                  {"k1", "0"},
                  {"k2", "0"},
                  {"semiconj", {{"v", "0"}, {"lipschitz", 1.5}}}}}}}};
    const auto cfg = parse_config(j, "kam");
    REQUIRE(cli::execute(cfg) == cli::exit_ok);
    const json report = json::parse(slurp(dir / "report.json"));
    REQUIRE(report["status"] == "Converged");
}

TEST_CASE("execute kam: omega path transports the semi-conjugacy") {
    auto base_config = [](const std::string& v_expr, const fs::path& dir) {
        return json{{"alpha", "golden"},
                    {"output_dir", dir.string()},
                    {"kam",
                     {{"omega", {{"forward", "2*y"}, {"inverse", "y/2"}}},
                      {"pert",
                       {{"mode", "explicit"},
                        {"f1", "0"},
                        {"f2", "0"},
                        {"k1", "0"},
                        {"k2", "0"},
                        {"semiconj", {{"v", v_expr}, {"lipschitz", 1.5}}}}}}}};
    };
    // a y-only v is a valid semi-conjugacy for any exact translation
    const auto dir_ok = fresh_dir("kam_omega_v_ok");
    REQUIRE(cli::execute(parse_config(base_config("0.01*sin(2*pi*y)", dir_ok), "kam")) ==
            cli::exit_ok);
    // an x-dependent v is not; the transported check must reject the run
    const auto dir_bad = fresh_dir("kam_omega_v_bad");
    REQUIRE(cli::execute(parse_config(base_config("0.01*sin(2*pi*x)", dir_bad), "kam")) ==
            cli::exit_hypothesis);
    const json report = json::parse(slurp(dir_bad / "report.json"));
    REQUIRE(report["hypothesis"] == "semi-conjugacy");
}

TEST_CASE("execute cohomology: writes residual and bound ratio") {
    const auto dir = fresh_dir("cohomology");
    json j = {{"alpha", "golden"},
              {"interval", {{"lo", -1.0}, {"hi", 1.0}}},
              {"output_dir", dir.string()},
              {"cohomology", {{"phi", "cos(2*pi*x)*(1 + y/2)"}}}};
    const auto cfg = parse_config(j, "cohomology");
    REQUIRE(cli::execute(cfg) == cli::exit_ok);
    const json report = json::parse(slurp(dir / "report.json"));
    REQUIRE(report["residual_c0"].get<double>() <= 1e-10);
    REQUIRE(report["bound_ratio"].get<double>() > 0.0);
}

TEST_CASE("execute standard-map: deterministic portrait with exact row count") {
    json base = {{"alpha", "golden"},
                 {"interval", {{"lo", -1.0}, {"hi", 2.0}}},
                 {"standard-map",
                  {{"epsilon", 0.95},
                   {"q", 3},
                   {"r", 2},
                   {"n_iter", 200},
                   {"seeds", {{"count", 20}, {"y_lo", 0.2}, {"y_hi", 0.8}}}}}};
    const auto dir_a = fresh_dir("portrait_a");
    const auto dir_b = fresh_dir("portrait_b");
    json ja = base;
    ja["output_dir"] = dir_a.string();
    json jb = base;
    jb["output_dir"] = dir_b.string();
    REQUIRE(cli::execute(parse_config(ja, "standard-map")) == cli::exit_ok);
    REQUIRE(cli::execute(parse_config(jb, "standard-map")) == cli::exit_ok);
    const std::string a = slurp(dir_a / "portrait.csv");
    const std::string b = slurp(dir_b / "portrait.csv");
    REQUIRE(a == b); // byte-identical across runs
    const json report = json::parse(slurp(dir_a / "report.json"));
    REQUIRE(report["rows"].get<long>() == 20L * 200L);
    REQUIRE(report["escaped_seeds"].empty());
}

TEST_CASE("execute counterexample-2d: positive minimum gap") {
    const auto dir = fresh_dir("counterexample");
    json j = {{"alpha", "golden"},
              {"output_dir", dir.string()},
              {"counterexample-2d", {{"delta", 0.05}, {"n_scan", 100000}}}};
    REQUIRE(cli::execute(parse_config(j, "counterexample-2d")) == cli::exit_ok);
    const json report = json::parse(slurp(dir / "report.json"));
    REQUIRE(report["min_gap"].get<double>() > 0.0);
    REQUIRE(report["h_at_zero"].get<double>() == Catch::Approx(-2.0).margin(1e-12));
    REQUIRE(report["h_at_half"].get<double>() == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("execute diagnose: reports all probes") {
    const auto dir = fresh_dir("diagnose");
    json j = {{"alpha", "golden"},
              {"output_dir", dir.string()},
              {"diagnose",
               {{"pert",
                 {{"mode", "manufactured"},
                  {"h1", "1e-4*sin(2*pi*x)"},
                  {"h2", "1e-4*cos(2*pi*x)"}}}}}};
    REQUIRE(cli::execute(parse_config(j, "diagnose")) == cli::exit_ok);
    const json report = json::parse(slurp(dir / "report.json"));
    REQUIRE(report["commutator"]["direct"].get<double>() <= 1e-9);
    REQUIRE(report["intersection"]["pass"].get<bool>());
    REQUIRE(report["diophantine"]["pass"].get<bool>());
    REQUIRE(report["k2_average"]["ratio"].get<double>() <= 1.0 + 1e-6);
    REQUIRE(report["semiconjugacy"]["residual"].get<double>() <= 1e-9);
}

TEST_CASE("execute constants: smoothing table lands in constants.csv") {
    const auto dir = fresh_dir("constants");
    json j = {{"alpha", "golden"},
              {"interval", {{"lo", -1.0}, {"hi", 1.0}}},
              {"output_dir", dir.string()},
              {"constants",
               {{"m", 10000},
                {"smoothing", {{"n_list", {4.0, 8.0}}, {"s", 0.0}, {"l", 2.0}}}}}};
    REQUIRE(cli::execute(parse_config(j, "constants")) == cli::exit_ok);
    const json report = json::parse(slurp(dir / "report.json"));
    REQUIRE(report["tau"].get<double>() >= 0.99);
    REQUIRE(report["tau"].get<double>() <= 1.05);
    const std::string csv = slurp(dir / "constants.csv");
    REQUIRE(csv.rfind("f_id,N,s,l,ratio\n", 0) == 0);
}

TEST_CASE("artifact dir carries the exact config; it round-trips through parse_config") {
    const auto dir = fresh_dir("roundtrip");
    json j = minimal_kam();
    j["output_dir"] = dir.string();
    j["max_iter"] = 6;
    const auto cfg = parse_config(j, "kam");
    REQUIRE(cli::execute(cfg) == cli::exit_ok);
    const json echoed = json::parse(slurp(dir / "config.json"));
    const auto cfg2 = parse_config(echoed, "kam");
    REQUIRE(cfg2.resolved == cfg.resolved);
    REQUIRE(cfg2.alpha == cfg.alpha);
    REQUIRE(cfg2.sigma == cfg.sigma);
    REQUIRE(cfg2.max_iter == 6);
}

TEST_CASE("kam steps.csv is byte-identical across runs with the same seed") {
    const auto dir_a = fresh_dir("kam_det_a");
    const auto dir_b = fresh_dir("kam_det_b");
    json ja = minimal_kam();
    ja["output_dir"] = dir_a.string();
    ja["seed"] = 99;
    json jb = minimal_kam();
    jb["output_dir"] = dir_b.string();
    jb["seed"] = 99;
    REQUIRE(cli::execute(parse_config(ja, "kam")) == cli::exit_ok);
    REQUIRE(cli::execute(parse_config(jb, "kam")) == cli::exit_ok);
    REQUIRE(slurp(dir_a / "steps.csv") == slurp(dir_b / "steps.csv"));
}

TEST_CASE("execute cohomology: resonant alpha maps to a numerical-failure exit") {
    const auto dir = fresh_dir("cohomology_resonant");
    json j = {{"alpha", 0.25},
              {"dioph", {{"sigma", 0.5}, {"tau", 1.0}, {"m", 32}}},
              {"interval", {{"lo", -1.0}, {"hi", 1.0}}},
              {"output_dir", dir.string()},
              {"cohomology", {{"phi", "cos(2*pi*x)"}}}};
    REQUIRE(cli::execute(parse_config(j, "cohomology")) == cli::exit_numerical);
}

TEST_CASE("serialize: cylinder function round trip is exact") {
    const GridSpec grid(16, 8, Interval(-0.5, 1.5));
    const auto f = CylinderFunction::fit(
        [](double x, double y) { return std::sin(two_pi * x) * (1.0 + 0.25 * y); }, grid);
    const auto g = deserialize_function(serialize(f));
    REQUIRE(g.grid() == f.grid());
    REQUIRE(sub(f, g).coeff_abs_max() == 0.0);
}

TEST_CASE("serialize: documented coefficient layout is row-major in (m, j)") {
    const GridSpec grid(16, 8, Interval(-1.0, 1.0));
    const auto f = CylinderFunction::fit(
        [](double x, double y) { return std::cos(two_pi * 2.0 * x) * y; }, grid);
    const auto j = serialize(f);
    auto stored = [&](int m, int jj) {
        const std::size_t idx = static_cast<std::size_t>(m + grid.nx / 2) * grid.ny + jj;
        return std::complex<double>(j["coeffs"][idx][0].get<double>(),
                                    j["coeffs"][idx][1].get<double>());
    };
    for (int m : {-8, -2, 0, 2, 7})
        for (int jj : {0, 1, 3})
            REQUIRE(stored(m, jj) == f.coeff(m, jj));
}

TEST_CASE("serialize: cylinder map round trip") {
    const GridSpec grid(16, 8, Interval(0.0, 1.0));
    const auto m = standard_family(0.1, 3, 2, grid);
    const auto m2 = deserialize_map(serialize(m));
    REQUIRE(base_tag(m2.base) == "twist");
    REQUIRE(sub(m2.pert->c1, m.pert->c1).coeff_abs_max() == 0.0);

    const CylinderMap ft{FrequencyTwistBase{[](double y) { return 2.0 * y; },
                                            [](double y) { return 0.5 * y; }, "2*y", "y/2"},
                         std::nullopt};
    const auto ft2 = deserialize_map(serialize(ft));
    const auto& b = std::get<FrequencyTwistBase>(ft2.base);
    REQUIRE(b.omega(0.3) == Catch::Approx(0.6).margin(1e-15));
    REQUIRE(b.omega_inv(0.6) == Catch::Approx(0.3).margin(1e-15));
}
