#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cylkam/corpus.hpp"
#include "cylkam/diagnostics.hpp"
#include "cylkam/dsl.hpp"
#include "cylkam/kam.hpp"
#include "cylkam/serialize.hpp"
#include "cylkam/version.hpp"

namespace cylkam::cli {

using nlohmann::json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_hypothesis = 2;
inline constexpr int exit_numerical = 3;
inline constexpr int exit_config = 4;

/// Validated, defaults-filled run configuration. alpha and (sigma, tau) arrive resolved:
/// "golden" -> (sqrt(5)-1)/2 and "auto:M" -> the empirical constants at M.
struct RunConfig {
    std::string subcommand;
    double alpha = 0.0;
    double sigma = 0.0;
    double tau = 0.0;
    long m_check = 10000;
    Interval interval{0.0, 1.0};
    double delta0 = 0.25;
    int nx = 64;
    int ny = 32;
    double tol = 1e-9;
    int max_iter = 12;
    std::uint64_t seed = 20260809ULL;
    int threads = 1;
    std::string output_dir = "out";
    json payload;  // subcommand-specific block
    json resolved; // full config echo (defaults filled, constants resolved)

    DiophantineParams dio() const { return derived_params(alpha, sigma, tau, m_check); }
    NormOptions norms() const {
        NormOptions o;
        o.seed = seed;
        return o;
    }
};

namespace detail {

inline const std::set<std::string> known_subcommands = {
    "cohomology", "kam", "standard-map", "diagnose", "counterexample-2d", "constants"};

inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where, std::vector<std::string>& bad) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) bad.push_back("unknown key '" + key + "' in " + where);
}

inline bool need_number(const json& j, const std::string& key, double& out,
                        std::vector<std::string>& bad, const std::string& where) {
    if (!j.contains(key)) {
        bad.push_back("missing key '" + key + "' in " + where);
        return false;
    }
    if (!j[key].is_number()) {
        bad.push_back("'" + key + "' in " + where + " must be a number");
        return false;
    }
    out = j[key].get<double>();
    return true;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Schema-validate and resolve a config object for the given subcommand.
/// Violations are collected and reported together.
inline RunConfig parse_config(const json& j, const std::string& subcommand) {
    std::vector<std::string> bad;
    if (!detail::known_subcommands.count(subcommand))
        throw ConfigError({"unknown subcommand '" + subcommand + "'"});
    if (!j.is_object()) throw ConfigError({"config root must be a JSON object"});

    RunConfig cfg;
    cfg.subcommand = subcommand;

    std::set<std::string> allowed = {"alpha",    "dioph",      "interval", "grid",
                                     "delta0",   "tol",        "max_iter", "seed",
                                     "threads",  "output_dir", subcommand};
    detail::check_keys(j, allowed, "config root", bad);

    // alpha: number or "golden"
    if (!j.contains("alpha")) {
        bad.push_back("missing key 'alpha'");
    } else if (j["alpha"].is_string()) {
        if (j["alpha"].get<std::string>() == "golden")
            cfg.alpha = golden_mean();
        else
            bad.push_back("'alpha' must be a number or the string \"golden\"");
    } else if (j["alpha"].is_number()) {
        cfg.alpha = j["alpha"].get<double>();
    } else {
        bad.push_back("'alpha' must be a number or the string \"golden\"");
    }

    // dioph: Diophantine constants, {"sigma","tau"[,"m"]} or "auto:M"
    bool auto_constants = true;
    long auto_m = 10000;
    if (j.contains("dioph")) {
        const json& c = j["dioph"];
        if (c.is_string()) {
            const std::string s = c.get<std::string>();
            if (s.rfind("auto:", 0) == 0) {
                try {
                    auto_m = std::stol(s.substr(5));
                } catch (...) {
                    bad.push_back("'dioph' auto form must be \"auto:<M>\"");
                }
                if (auto_m < 100) bad.push_back("'dioph' auto M must be >= 100");
            } else {
                bad.push_back("'dioph' must be {sigma, tau} or \"auto:<M>\"");
            }
        } else if (c.is_object()) {
            detail::check_keys(c, {"sigma", "tau", "m"}, "'dioph'", bad);
            double sigma = 0, tau = 0;
            const bool oks = detail::need_number(c, "sigma", sigma, bad, "'dioph'");
            const bool okt = detail::need_number(c, "tau", tau, bad, "'dioph'");
            if (oks && okt) {
                if (sigma <= 0) bad.push_back("'dioph.sigma' must be positive");
                if (tau <= 0) bad.push_back("'dioph.tau' must be positive");
                cfg.sigma = sigma;
                cfg.tau = tau;
                auto_constants = false;
            }
            if (c.contains("m") && c["m"].is_number_integer())
                cfg.m_check = c["m"].get<long>();
        } else {
            bad.push_back("'dioph' must be {sigma, tau} or \"auto:<M>\"");
        }
    }

    if (j.contains("interval")) {
        const json& iv = j["interval"];
        if (!iv.is_object()) {
            bad.push_back("'interval' must be {lo, hi}");
        } else {
            detail::check_keys(iv, {"lo", "hi"}, "'interval'", bad);
            double lo = 0, hi = 1;
            if (detail::need_number(iv, "lo", lo, bad, "'interval'") &
                detail::need_number(iv, "hi", hi, bad, "'interval'")) {
                if (lo < hi)
                    cfg.interval = Interval(lo, hi);
                else
                    bad.push_back("'interval' requires lo < hi");
            }
        }
    }

    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (!g.is_object()) {
            bad.push_back("'grid' must be {nx, ny}");
        } else {
            detail::check_keys(g, {"nx", "ny"}, "'grid'", bad);
            if (g.contains("nx") && g["nx"].is_number_integer()) cfg.nx = g["nx"].get<int>();
            else if (g.contains("nx")) bad.push_back("'grid.nx' must be an integer");
            if (g.contains("ny") && g["ny"].is_number_integer()) cfg.ny = g["ny"].get<int>();
            else if (g.contains("ny")) bad.push_back("'grid.ny' must be an integer");
            if (cfg.nx < 8 || (cfg.nx & (cfg.nx - 1)) != 0)
                bad.push_back("'grid.nx' must be a power of two >= 8");
            if (cfg.ny < 4) bad.push_back("'grid.ny' must be >= 4");
        }
    }

    auto take_number = [&](const char* key, double& out, bool positive) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) {
            bad.push_back(std::string("'") + key + "' must be a number");
            return;
        }
        out = j[key].get<double>();
        if (positive && !(out > 0.0)) bad.push_back(std::string("'") + key + "' must be positive");
    };
    take_number("delta0", cfg.delta0, true);
    if (cfg.delta0 > 0.5) bad.push_back("'delta0' must lie in (0, 1/2]");
    take_number("tol", cfg.tol, true);
    if (j.contains("max_iter")) {
        if (j["max_iter"].is_number_integer() && j["max_iter"].get<int>() >= 0)
            cfg.max_iter = j["max_iter"].get<int>();
        else
            bad.push_back("'max_iter' must be a non-negative integer");
    }
    if (j.contains("seed")) {
        if (j["seed"].is_number_unsigned() || j["seed"].is_number_integer())
            cfg.seed = j["seed"].get<std::uint64_t>();
        else
            bad.push_back("'seed' must be an unsigned integer");
    }
    if (j.contains("threads")) {
        if (j["threads"].is_number_integer() && j["threads"].get<int>() >= 1)
            cfg.threads = j["threads"].get<int>();
        else
            bad.push_back("'threads' must be an integer >= 1");
    }
    if (j.contains("output_dir")) {
        if (j["output_dir"].is_string()) cfg.output_dir = j["output_dir"].get<std::string>();
        else bad.push_back("'output_dir' must be a string");
    }

    if (!j.contains(subcommand)) {
        bad.push_back("missing payload key '" + subcommand + "'");
    } else if (!j[subcommand].is_object()) {
        bad.push_back("payload '" + subcommand + "' must be an object");
    } else {
        cfg.payload = j[subcommand];
    }

    // payload-specific schema
    if (cfg.payload.is_object()) {
        const json& p = cfg.payload;
        auto expr_key = [&](const json& obj, const std::string& key, const std::string& where) {
            if (!obj.contains(key)) {
                bad.push_back("missing key '" + key + "' in " + where);
                return;
            }
            if (!obj[key].is_string()) {
                bad.push_back("'" + key + "' in " + where + " must be an expression string");
                return;
            }
            try {
                dsl::parse(obj[key].get<std::string>());
            } catch (const ParseError& e) {
                bad.push_back("'" + key + "' in " + where + ": " + e.what());
            }
        };
        if (subcommand == "cohomology") {
            detail::check_keys(p, {"phi", "order"}, "'cohomology'", bad);
            expr_key(p, "phi", "'cohomology'");
            if (p.contains("order") && !p["order"].is_number())
                bad.push_back("'cohomology.order' must be a number");
        } else if (subcommand == "kam" || subcommand == "diagnose") {
            const std::string where = "'" + subcommand + "'";
            std::set<std::string> keys = {"pert"};
            if (subcommand == "kam") {
                keys.insert("lipschitz0");
                keys.insert("omega");
            }
            detail::check_keys(p, keys, where, bad);
            if (!p.contains("pert") || !p["pert"].is_object()) {
                bad.push_back("missing object 'pert' in " + where);
            } else {
                const json& pair = p["pert"];
                const std::string mode =
                    pair.contains("mode") && pair["mode"].is_string()
                        ? pair["mode"].get<std::string>()
                        : std::string();
                if (mode == "manufactured") {
                    detail::check_keys(pair, {"mode", "h1", "h2"}, "'pert'", bad);
                    expr_key(pair, "h1", "'pert'");
                    expr_key(pair, "h2", "'pert'");
                } else if (mode == "explicit") {
                    detail::check_keys(pair, {"mode", "f1", "f2", "k1", "k2", "semiconj"},
                                       "'pert'", bad);
                    for (const char* k : {"f1", "f2", "k1", "k2"}) expr_key(pair, k, "'pert'");
                    if (subcommand == "kam") {
                        // the semi-conjugacy input is mandatory for an explicit run
                        if (!pair.contains("semiconj") || !pair["semiconj"].is_object()) {
                            bad.push_back("missing object 'pert.semiconj' (explicit kam runs "
                                          "require the semi-conjugacy input)");
                        }
                    }
                    if (pair.contains("semiconj") && pair["semiconj"].is_object()) {
                        const json& sc = pair["semiconj"];
                        detail::check_keys(sc, {"v", "lipschitz"}, "'pert.semiconj'", bad);
                        expr_key(sc, "v", "'pert.semiconj'");
                        double lip = 0;
                        if (detail::need_number(sc, "lipschitz", lip, bad, "'pert.semiconj'") &&
                            !(lip > 1.0))
                            bad.push_back("'pert.semiconj.lipschitz' must exceed 1");
                    }
                } else {
                    bad.push_back("'pert.mode' must be \"manufactured\" or \"explicit\"");
                }
            }
            if (p.contains("lipschitz0") && !(p["lipschitz0"].is_number() &&
                                              p["lipschitz0"].get<double>() > 1.0))
                bad.push_back("'kam.lipschitz0' must be a number > 1");
            if (p.contains("omega")) {
                if (!p["omega"].is_object()) {
                    bad.push_back("'kam.omega' must be {forward, inverse}");
                } else {
                    detail::check_keys(p["omega"], {"forward", "inverse"}, "'kam.omega'", bad);
                    expr_key(p["omega"], "forward", "'kam.omega'");
                    expr_key(p["omega"], "inverse", "'kam.omega'");
                }
            }
        } else if (subcommand == "standard-map") {
            detail::check_keys(p, {"epsilon", "q", "r", "seeds", "n_iter"}, "'standard-map'",
                               bad);
            double tmp;
            detail::need_number(p, "epsilon", tmp, bad, "'standard-map'");
            for (const char* k : {"q", "r", "n_iter"}) {
                if (!p.contains(k) || !p[k].is_number_integer() || p[k].get<int>() < 0)
                    bad.push_back(std::string("'standard-map.") + k +
                                  "' must be a non-negative integer");
            }
            if (p.contains("q") && p["q"].is_number_integer() && p["q"].get<int>() < 1)
                bad.push_back("'standard-map.q' must be >= 1");
            if (!p.contains("seeds")) {
                bad.push_back("missing key 'seeds' in 'standard-map'");
            } else if (p["seeds"].is_object()) {
                detail::check_keys(p["seeds"], {"count", "y_lo", "y_hi", "x0"},
                                   "'standard-map.seeds'", bad);
                if (!p["seeds"].contains("count") || !p["seeds"]["count"].is_number_integer() ||
                    p["seeds"]["count"].get<int>() < 1)
                    bad.push_back("'standard-map.seeds.count' must be a positive integer");
                double lo, hi;
                detail::need_number(p["seeds"], "y_lo", lo, bad, "'standard-map.seeds'");
                detail::need_number(p["seeds"], "y_hi", hi, bad, "'standard-map.seeds'");
            } else if (!p["seeds"].is_array()) {
                bad.push_back("'standard-map.seeds' must be an object or an array of [x, y]");
            }
        } else if (subcommand == "counterexample-2d") {
            detail::check_keys(p, {"delta", "n_scan"}, "'counterexample-2d'", bad);
            double tmp;
            if (detail::need_number(p, "delta", tmp, bad, "'counterexample-2d'") &&
                !(tmp > 0.0 && tmp < 1.0 / two_pi))
                bad.push_back("'counterexample-2d.delta' must lie in (0, 1/(2 pi))");
            if (!p.contains("n_scan") || !p["n_scan"].is_number_integer() ||
                p["n_scan"].get<long>() < 2)
                bad.push_back("'counterexample-2d.n_scan' must be an integer >= 2");
        } else if (subcommand == "constants") {
            detail::check_keys(p, {"m", "smoothing"}, "'constants'", bad);
            if (p.contains("m") &&
                (!p["m"].is_number_integer() || p["m"].get<long>() < 100))
                bad.push_back("'constants.m' must be an integer >= 100");
            if (p.contains("smoothing")) {
                if (!p["smoothing"].is_object()) {
                    bad.push_back("'constants.smoothing' must be {n_list, s, l}");
                } else {
                    detail::check_keys(p["smoothing"], {"n_list", "s", "l"},
                                       "'constants.smoothing'", bad);
                    double s = 0, l = 0;
                    detail::need_number(p["smoothing"], "s", s, bad, "'constants.smoothing'");
                    detail::need_number(p["smoothing"], "l", l, bad, "'constants.smoothing'");
                    if (!p["smoothing"].contains("n_list") || !p["smoothing"]["n_list"].is_array())
                        bad.push_back("'constants.smoothing.n_list' must be an array of numbers");
                }
            }
        }
    }

    if (!bad.empty()) throw ConfigError(bad);

    // resolve auto constants after structural validation
    if (auto_constants && cfg.sigma == 0.0) {
        try {
            const auto [sigma, tau] = estimate_constants(cfg.alpha, auto_m);
            cfg.sigma = sigma;
            cfg.tau = tau;
            cfg.m_check = auto_m;
        } catch (const DegenerateAlphaError& e) {
            throw ConfigError({std::string("constants \"auto\" failed: ") + e.what() +
                               "; give sigma and tau explicitly"});
        }
    }

    // full echo with defaults and resolved constants, for archival round-trips
    json echo;
    echo["alpha"] = cfg.alpha;
    echo["dioph"] = {{"sigma", cfg.sigma}, {"tau", cfg.tau}, {"m", cfg.m_check}};
    echo["interval"] = {{"lo", cfg.interval.lo}, {"hi", cfg.interval.hi}};
    echo["grid"] = {{"nx", cfg.nx}, {"ny", cfg.ny}};
    echo["delta0"] = cfg.delta0;
    echo["tol"] = cfg.tol;
    echo["max_iter"] = cfg.max_iter;
    echo["seed"] = cfg.seed;
    echo["threads"] = cfg.threads;
    echo["output_dir"] = cfg.output_dir;
    echo[subcommand] = cfg.payload;
    cfg.resolved = std::move(echo);
    return cfg;
}

/// Load, schema-validate, fill defaults, resolve "golden" / "auto:M".
inline RunConfig load_config(const std::string& path, const std::string& subcommand) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
    }
    return parse_config(j, subcommand);
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write artifact " + p.string());
    out << text;
}

inline json repro_stanza(const RunConfig& cfg) {
    return json{{"config_hash", hex64(fnv1a64(cfg.resolved.dump()))},
                {"engine_version", engine_version},
                {"seed", cfg.seed}};
}

inline void write_report(const RunConfig& cfg, json report) {
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    report["reproducibility"] = repro_stanza(cfg);
    report["subcommand"] = cfg.subcommand;
    write_text(dir / "report.json", report.dump(2) + "\n");
    write_text(dir / "config.json", cfg.resolved.dump(2) + "\n");
}

struct BuiltPair {
    CylinderMap F;
    CylinderMap K;
    SemiConjugacy W;
    double lipschitz0;
};

/// Build the (F, K, W) triple described by a kam/diagnose payload.
inline BuiltPair build_pair(const RunConfig& cfg) {
    const Interval strip = cfg.interval.widened(cfg.delta0);
    const GridSpec grid(cfg.nx, cfg.ny, strip);
    const GridSpec wide(cfg.nx, cfg.ny, strip.widened(0.1));
    const json& pair = cfg.payload.at("pert");
    const std::string mode = pair.at("mode").get<std::string>();
    double lipschitz0 = 1.25;
    if (cfg.payload.contains("lipschitz0")) lipschitz0 = cfg.payload["lipschitz0"].get<double>();

    if (mode == "manufactured") {
        const VectorFunction h_gen(
            dsl::lower_to_function(dsl::parse(pair.at("h1").get<std::string>()), wide),
            dsl::lower_to_function(dsl::parse(pair.at("h2").get<std::string>()), wide));
        auto made = manufacture_commuting_pair(h_gen, cfg.alpha, grid, strip, cfg.norms());
        const double lip = std::max(lipschitz0, made.W_true.lipschitz);
        return BuiltPair{std::move(made.F), std::move(made.K), std::move(made.W_true), lip};
    }

    auto lower = [&](const char* key, const GridSpec& g) {
        return dsl::lower_to_function(dsl::parse(pair.at(key).get<std::string>()), g);
    };
    CylinderMap F{TwistBase{}, VectorFunction(lower("f1", grid), lower("f2", grid))};
    CylinderMap K{TranslationBase{cfg.alpha}, VectorFunction(lower("k1", grid), lower("k2", grid))};
    if (pair.contains("semiconj")) {
        const json& sc = pair["semiconj"];
        SemiConjugacy W(
            dsl::lower_to_function(dsl::parse(sc.at("v").get<std::string>()), wide),
            sc.at("lipschitz").get<double>());
        return BuiltPair{std::move(F), std::move(K), std::move(W),
                         std::max(lipschitz0, sc.at("lipschitz").get<double>())};
    }
    SemiConjugacy W(CylinderFunction::zero(wide), lipschitz0); // projection default
    return BuiltPair{std::move(F), std::move(K), std::move(W), lipschitz0};
}

inline int run_cohomology(const RunConfig& cfg) {
    const GridSpec grid(cfg.nx, cfg.ny, cfg.interval);
    const auto phi = dsl::lower_to_function(dsl::parse(cfg.payload.at("phi").get<std::string>()),
                                            grid);
    const double order = cfg.payload.contains("order") ? cfg.payload["order"].get<double>() : 0.0;
    const DiophantineParams dio = cfg.dio();
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve_delta_alpha(phi, dio, order, cfg.norms());
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    json report;
    report["residual_c0"] = sol.residual_c0;
    report["bound_ratio"] = sol.bound_ratio;
    report["order"] = order;
    report["lemma_constant"] = dio.lemma_constant;
    report["solution"] = serialize(sol.u);
    report["wall_ms"] = ms;
    write_report(cfg, std::move(report));
    return exit_ok;
}

inline int run_kam(const RunConfig& cfg, bool quiet) {
    BuiltPair built = build_pair(cfg);
    Interval base = cfg.interval;
    double delta0 = cfg.delta0;
    if (cfg.payload.contains("omega")) {
        const json& o = cfg.payload["omega"];
        const auto fe = dsl::parse(o.at("forward").get<std::string>());
        const auto ie = dsl::parse(o.at("inverse").get<std::string>());
        FrequencyTwistBase ft{[fe](double y) { return dsl::evaluate(*fe, 0.0, y); },
                              [ie](double y) { return dsl::evaluate(*ie, 0.0, y); },
                              o.at("forward").get<std::string>(),
                              o.at("inverse").get<std::string>()};
        const GridSpec strip_grid(cfg.nx, cfg.ny, cfg.interval.widened(cfg.delta0));
        CylinderMap F_freq{ft, built.F.pert};
        auto [f_red, k_red] = reduce_by_frequency(F_freq, built.K, strip_grid);
        built.F = std::move(f_red);
        built.K = std::move(k_red);
        // transport the base interval and the domain budget through omega
        const double wl = ft.omega(cfg.interval.lo), wh = ft.omega(cfg.interval.hi);
        base = Interval(std::min(wl, wh), std::max(wl, wh));
        const Interval image = built.F.pert->grid().interval;
        delta0 = std::min({base.lo - image.lo, image.hi - base.hi, 0.5});
        // transport the semi-conjugacy through Q: v_red(x, ytil) = v(x, omega^{-1}(ytil))
        // on the omega-image of v's own domain (clamped against round-trip slack); the
        // stored bound is refreshed against the measured slope of the transported v
        const Interval v_dom = built.W.v.grid().interval;
        const double vl = ft.omega(v_dom.lo), vh = ft.omega(v_dom.hi);
        const GridSpec wgrid(cfg.nx, cfg.ny, Interval(std::min(vl, vh), std::max(vl, vh)));
        const CylinderFunction& v_src = built.W.v;
        CylinderFunction v_red = CylinderFunction::fit(
            [&](double x, double ytil) {
                const double y = std::clamp(ft.omega_inv(ytil), v_dom.lo, v_dom.hi);
                return v_src.evaluate(x, y);
            },
            wgrid);
        const double slope = cylkam::detail::holder_seminorm(v_red, 1.0, cfg.norms());
        built.W = SemiConjugacy(std::move(v_red),
                                std::max({built.W.lipschitz, 1.25 * slope, 1.01}));
    }

    KamConfig kcfg{cfg.dio(), base};
    kcfg.delta0 = delta0;
    kcfg.nx = cfg.nx;
    kcfg.ny = cfg.ny;
    kcfg.tol_e0 = cfg.tol;
    kcfg.max_iter = cfg.max_iter;
    kcfg.lipschitz0 = built.lipschitz0;
    kcfg.norms = cfg.norms();

    const auto t0 = std::chrono::steady_clock::now();
    const KamResult res = run(built.F, built.K, built.W, kcfg);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["status"] = to_string(res.status);
    if (!res.hypothesis.empty()) report["hypothesis"] = res.hypothesis;
    if (!res.detail.empty()) report["detail"] = res.detail;
    report["mu"] = cfg.dio().mu;
    report["mu_eff"] = res.mu_eff;
    report["profile_y_scale"] = kam_y_scale;
    report["wall_ms"] = ms;
    std::string csv = "i,N,delta,e0,e_mu,u1,lipschitz\n";
    if (res.final_state) {
        json steps = json::array();
        for (const auto& r : res.final_state->history) {
            steps.push_back({{"i", r.i},
                             {"N", r.n_smoothing},
                             {"delta", r.delta},
                             {"e0", r.e0},
                             {"e_mu", r.e_mu},
                             {"u1", r.u1},
                             {"lipschitz", r.lipschitz},
                             {"c_emp", r.c_emp},
                             {"decay_ok", r.decay_ok},
                             {"wall_ms", r.wall_ms}});
            csv += std::to_string(r.i) + "," + fmt(r.n_smoothing) + "," + fmt(r.delta) + "," +
                   fmt(r.e0) + "," + fmt(r.e_mu) + "," + fmt(r.u1) + "," + fmt(r.lipschitz) +
                   "\n";
        }
        report["steps"] = std::move(steps);
        report["final_delta"] = res.final_state->delta;
        report["iterations"] = res.final_state->i;
    }
    if (res.status == RunStatus::Converged) {
        report["residual_f"] = res.residual_f;
        report["residual_k"] = res.residual_k;
    }
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    write_text(dir / "steps.csv", csv);
    write_report(cfg, std::move(report));
    if (!quiet)
        std::fprintf(stderr, "kam: %s after %d step(s)\n", to_string(res.status).c_str(),
                     res.final_state ? res.final_state->i : 0);
    switch (res.status) {
        case RunStatus::Converged: return exit_ok;
        case RunStatus::HypothesisViolated: return exit_hypothesis;
        default: return exit_numerical;
    }
}

inline int run_standard_map(const RunConfig& cfg) {
    const GridSpec grid(cfg.nx, cfg.ny, cfg.interval);
    const json& p = cfg.payload;
    const auto map = standard_family(p.at("epsilon").get<double>(), p.at("q").get<int>(),
                                     p.at("r").get<int>(), grid);
    std::vector<Point> seeds;
    if (p["seeds"].is_array()) {
        for (const auto& s : p["seeds"]) seeds.push_back({s[0].get<double>(), s[1].get<double>()});
    } else {
        const int count = p["seeds"]["count"].get<int>();
        const double ylo = p["seeds"]["y_lo"].get<double>();
        const double yhi = p["seeds"]["y_hi"].get<double>();
        const double x0 = p["seeds"].contains("x0") ? p["seeds"]["x0"].get<double>() : 0.0;
        for (int i = 0; i < count; ++i) {
            const double t = count > 1 ? static_cast<double>(i) / (count - 1) : 0.5;
            seeds.push_back({x0 + golden_mean() * i - std::floor(x0 + golden_mean() * i),
                             ylo + (yhi - ylo) * t});
        }
    }
    const int n_iter = p.at("n_iter").get<int>();
    const auto portrait = phase_portrait(map, seeds, n_iter);
    std::string csv = "seed_id,n,x,y\n";
    csv.reserve(portrait.points.size() * 48);
    for (const auto& pt : portrait.points)
        csv += std::to_string(pt.seed_id) + "," + std::to_string(pt.n) + "," + fmt(pt.x) + "," +
               fmt(pt.y) + "\n";
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    write_text(dir / "portrait.csv", csv);
    json report;
    report["rows"] = portrait.points.size();
    report["seeds"] = seeds.size();
    report["n_iter"] = n_iter;
    report["escaped_seeds"] = portrait.escaped_seeds;
    write_report(cfg, std::move(report));
    return exit_ok;
}

inline int run_diagnose(const RunConfig& cfg) {
    const BuiltPair built = build_pair(cfg);
    const Interval strip = cfg.interval.widened(cfg.delta0);
    const double move = std::max(c0_norm(built.F.pert->c2), c0_norm(built.K.pert->c2)) + 1e-9;
    const GridSpec probe(cfg.nx, cfg.ny, strip.widened(-2.0 * move));
    const GridSpec grid(cfg.nx, cfg.ny, strip);

    json report;
    const auto comm = commutator_residual(built.F, built.K, probe, cfg.norms());
    report["commutator"] = {{"direct", comm.direct}, {"operator", comm.operator_norm}};
    const auto isec = intersection_check(built.F, grid);
    report["intersection"] = {{"pass", isec.pass}, {"margin", isec.margin}};
    const auto k2 = k2_average_probe(built.F, built.K, grid, cfg.norms());
    report["k2_average"] = {{"value", k2.value}, {"bound", k2.bound}, {"ratio", k2.ratio}};
    const auto semi = semiconjugacy_residual(built.W, built.K, cfg.alpha, probe, cfg.norms());
    report["semiconjugacy"] = {{"residual", semi.residual},
                               {"lipschitz_slope", semi.lipschitz_slope},
                               {"lipschitz_bound", built.W.lipschitz}};
    const auto dio = check_diophantine(cfg.alpha, cfg.sigma, cfg.tau, cfg.m_check);
    report["diophantine"] = {{"pass", dio.pass},
                             {"first_violation", dio.first_violation},
                             {"worst_margin", dio.worst_margin}};
    write_report(cfg, std::move(report));
    return exit_ok;
}

inline int run_counterexample(const RunConfig& cfg) {
    const auto r = counterexample_2d(cfg.payload.at("delta").get<double>(),
                                     cfg.payload.at("n_scan").get<long>());
    json report;
    report["min_gap"] = r.min_gap;
    report["argmin"] = r.argmin;
    report["h_at_zero"] = r.h_at_zero;
    report["h_at_half"] = r.h_at_half;
    write_report(cfg, std::move(report));
    return exit_ok;
}

inline int run_constants(const RunConfig& cfg) {
    long m = cfg.payload.contains("m") ? cfg.payload["m"].get<long>() : 10000;
    const auto [sigma, tau] = estimate_constants(cfg.alpha, m);
    const auto params = derived_params(cfg.alpha, sigma, tau, m);
    json report;
    report["sigma"] = sigma;
    report["tau"] = tau;
    report["rho"] = params.rho;
    report["mu"] = params.mu;
    report["lemma_constant"] = params.lemma_constant;
    report["m"] = m;
    report["configured"] = {{"sigma", cfg.sigma}, {"tau", cfg.tau}};

    if (cfg.payload.contains("smoothing")) {
        const json& sm = cfg.payload["smoothing"];
        const GridSpec grid(cfg.nx, cfg.ny, cfg.interval);
        const auto corpus = make_test_corpus(grid, cfg.seed);
        std::vector<double> n_list;
        for (const auto& n : sm.at("n_list")) n_list.push_back(n.get<double>());
        const double s = sm.at("s").get<double>();
        const double l = sm.at("l").get<double>();
        const auto table = verify_smoothing_bounds(corpus, n_list, s, l,
                                                   CutoffProfile::quintic(), cfg.norms());
        std::string csv = "f_id,N,s,l,ratio\n";
        for (const auto& row : table.rows) {
            csv += "f" + std::to_string(row.f_id) + ":S," + fmt(row.N) + "," + fmt(s) + "," +
                   fmt(l) + "," + fmt(row.ratio_smooth) + "\n";
            csv += "f" + std::to_string(row.f_id) + ":R," + fmt(row.N) + "," + fmt(s) + "," +
                   fmt(l) + "," + fmt(row.ratio_remainder) + "\n";
        }
        const std::filesystem::path dir(cfg.output_dir);
        std::filesystem::create_directories(dir);
        write_text(dir / "constants.csv", csv);
        json consts = json::object();
        for (double n : n_list) {
            consts[fmt(n)] = {{"smooth", table.empirical_smooth_constant(n)},
                              {"remainder", table.empirical_remainder_constant(n)}};
        }
        report["smoothing_constants"] = std::move(consts);
    }
    write_report(cfg, std::move(report));
    return exit_ok;
}

} // namespace detail

/// Dispatch a validated config; writes artifacts into cfg.output_dir and returns the
/// process exit status (0 ok, 2 hypothesis violation, 3 numerical failure, 4 config).
inline int execute(const RunConfig& cfg, bool quiet = true) {
    try {
        if (cfg.subcommand == "cohomology") return detail::run_cohomology(cfg);
        if (cfg.subcommand == "kam") return detail::run_kam(cfg, quiet);
        if (cfg.subcommand == "standard-map") return detail::run_standard_map(cfg);
        if (cfg.subcommand == "diagnose") return detail::run_diagnose(cfg);
        if (cfg.subcommand == "counterexample-2d") return detail::run_counterexample(cfg);
        if (cfg.subcommand == "constants") return detail::run_constants(cfg);
        throw ConfigError({"unknown subcommand '" + cfg.subcommand + "'"});
    } catch (const ConfigError& e) {
        if (!quiet) std::fprintf(stderr, "%s\n", e.what());
        return exit_config;
    } catch (const Error& e) {
        if (!quiet) std::fprintf(stderr, "%s\n", e.what());
        return exit_numerical;
    }
}

} // namespace cylkam::cli
