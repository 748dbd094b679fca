#pragma once

// Command-line front end: eval | sweep | validate | reduce.
// SNRs cross this boundary in dB; the library underneath is linear only.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbsec/fbsec.hpp"

namespace fbsec::cli {

using json = nlohmann::json;

enum exit_code : int { kOk = 0, kUsage = 2, kNonConvergence = 3, kValidationFailed = 4 };

class usage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LinkSpec {
    double mu = 1.0;
    double m = 1.0;
    double kappa = 0.0;
    double eta = 1.0;
    double rho2 = 1.0;
    double snr_db = 0.0;

    FBParams params() const { return {mu, m, kappa, eta, rho2, db_to_linear(snr_db)}; }
};

inline double parse_number(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw usage_error(what + ": '" + text + "' is not a number");
    }
    if (used != text.size()) throw usage_error(what + ": '" + text + "' is not a number");
    return v;
}

// "k=v,k=v" into an ordered list of pairs.
inline std::vector<std::pair<std::string, double>> parse_kv(const std::string& text, const std::string& flag) {
    std::vector<std::pair<std::string, double>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw usage_error(flag + ": expected key=value, got '" + item + "'");
        out.emplace_back(item.substr(0, eq), parse_number(item.substr(eq + 1), flag + " " + item.substr(0, eq)));
    }
    return out;
}

inline void set_link_field(LinkSpec& s, const std::string& key, double v, const std::string& flag) {
    if (key == "mu") s.mu = v;
    else if (key == "m") s.m = v;
    else if (key == "kappa") s.kappa = v;
    else if (key == "eta") s.eta = v;
    else if (key == "rho2") s.rho2 = v;
    else if (key == "snr_db") s.snr_db = v;
    else throw usage_error(flag + ": unknown key '" + key + "' (expected mu, m, kappa, eta, rho2, snr_db)");
}

inline LinkSpec parse_link(const std::string& text, const std::string& flag) {
    LinkSpec s;
    for (const auto& [k, v] : parse_kv(text, flag)) set_link_field(s, k, v, flag);
    return s;
}

inline LinkSpec link_from_json(const json& j, const std::string& flag) {
    if (j.is_string()) return parse_link(j.get<std::string>(), flag);
    if (!j.is_object()) throw usage_error(flag + ": expected an object or a key=value string");
    LinkSpec s;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number()) throw usage_error(flag + " " + k + ": expected a number");
        set_link_field(s, k, v.get<double>(), flag);
    }
    return s;
}

inline json link_to_json(const LinkSpec& s) {
    return {{"mu", s.mu}, {"m", s.m}, {"kappa", s.kappa}, {"eta", s.eta}, {"rho2", s.rho2}, {"snr_db", s.snr_db}};
}

// parameter_error::what() is "field: reason"; keep the reason.
inline std::string reason(const parameter_error& e) {
    const std::string w = e.what();
    return w.size() > e.field().size() + 2 ? w.substr(e.field().size() + 2) : w;
}

inline void check_link(const LinkSpec& s, const std::string& flag) {
    try {
        s.params().validate();
    } catch (const parameter_error& e) {
        std::string field = e.field() == "avg_snr" ? "snr_db" : e.field();
        throw usage_error(flag + " " + field + ": " + reason(e));
    }
}

inline const std::vector<std::string>& all_metrics() {
    static const std::vector<std::string> m{"asc", "sop", "sopl", "spsc"};
    return m;
}

inline std::vector<std::string> parse_metrics(const std::string& text) {
    if (text == "all") return all_metrics();
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        bool known = false;
        for (const auto& m : all_metrics()) known = known || m == item;
        if (!known) throw usage_error("--metric: unknown metric '" + item + "'");
        out.push_back(item);
    }
    if (out.empty()) throw usage_error("--metric: empty list");
    return out;
}

struct Options {
    LinkSpec bob;
    LinkSpec eve;
    bool have_bob = false;
    bool have_eve = false;
    double rs = 0.0;
    std::string metric = "all";
    std::uint64_t mc_samples = 0;
    std::uint64_t seed = 1;
    std::uint32_t mc_streams = 64;
    InversionControl inv;
    std::string out;
    std::string format;
    std::string units = "nats";
    std::string axis = "lambda_db";
    double start = 0.0;
    double stop = 30.0;
    double step = 1.0;
};

inline void check_options(const Options& o) {
    if (!o.have_bob) throw usage_error("--bob: required");
    if (!o.have_eve) throw usage_error("--eve: required");
    check_link(o.bob, "--bob");
    check_link(o.eve, "--eve");
    if (!std::isfinite(o.rs) || o.rs < 0.0) throw usage_error("--rs: must be a finite value >= 0");
    parse_metrics(o.metric);
    try {
        o.inv.validate();
    } catch (const parameter_error& e) {
        std::string flag = e.field();
        for (auto& c : flag) c = c == '_' ? '-' : c;
        throw usage_error("--" + flag + ": " + reason(e));
    }
    if (o.mc_samples != 0 && o.mc_samples < 10'000) throw usage_error("--mc-samples: must be 0 or >= 10000");
    if (o.units != "nats" && o.units != "bits") throw usage_error("--units: expected nats or bits");
    if (!o.format.empty() && o.format != "csv" && o.format != "json") throw usage_error("--format: expected csv or json");
    if (o.axis != "lambda_db" && o.axis != "snr_bob_db") throw usage_error("--axis: expected lambda_db or snr_bob_db");
    if (!(o.step > 0.0)) throw usage_error("--step: must be > 0");
    if (!(o.start <= o.stop)) throw usage_error("--start: must not exceed --stop");
}

// --- evaluation ---------------------------------------------------------------

struct PointResult {
    std::string path; // "case2" or "numeric"
    std::vector<std::pair<std::string, MetricValue>> values;
    std::optional<MCResults> mc;
};

inline const MCEstimate& pick(const MCResults& r, const std::string& metric) {
    if (metric == "asc") return r.asc;
    if (metric == "sop") return r.sop;
    if (metric == "sopl") return r.sopl;
    return r.spsc;
}

inline PointResult evaluate_point(const FBParams& bob, const FBParams& eve, double rs,
                                  const std::vector<std::string>& metrics, const InversionControl& inv,
                                  std::uint64_t mc_samples, std::uint64_t seed, std::uint32_t streams,
                                  bool force_numeric = false) {
    const auto sc = SecrecyConfig::from_rate(rs);
    PointResult r;
    const bool closed = !force_numeric && case2_applicable(bob) && case2_applicable(eve);
    r.path = closed ? "case2" : "numeric";
    if (closed) {
        const auto pb = partial_fractions(bob);
        const auto pe = partial_fractions(eve);
        for (const auto& m : metrics) {
            double v = 0.0;
            if (m == "asc") v = asc_case2(pb, pe);
            else if (m == "sop") v = sop_case2(pb, pe, sc);
            else if (m == "sopl") v = sopl_case2(pb, pe, sc);
            else v = spsc_case2(pb, pe);
            r.values.emplace_back(m, MetricValue{v, 0.0});
        }
    } else {
        for (const auto& m : metrics) {
            MetricValue v;
            if (m == "asc") v = asc_numeric_detailed(bob, eve, inv);
            else if (m == "sop") v = sop_numeric_detailed(bob, eve, sc, inv);
            else if (m == "sopl") v = sopl_numeric_detailed(bob, eve, sc, inv);
            else v = spsc_numeric_detailed(bob, eve, inv);
            r.values.emplace_back(m, v);
        }
    }
    if (mc_samples > 0) {
        MCConfig mc;
        mc.n_samples = mc_samples;
        mc.seed = seed;
        mc.n_streams = streams;
        r.mc = estimate_all(bob, eve, sc, mc);
    }
    return r;
}

inline double unit_scale(const std::string& metric, const std::string& units) {
    return metric == "asc" && units == "bits" ? 1.0 / std::log(2.0) : 1.0;
}

inline std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline json eval_json(const Options& o) {
    const auto metrics = parse_metrics(o.metric);
    const auto r = evaluate_point(o.bob.params(), o.eve.params(), o.rs, metrics, o.inv, o.mc_samples, o.seed,
                                  o.mc_streams);
    json j;
    j["path"] = r.path;
    j["units"] = o.units;
    j["rs"] = o.rs;
    json errs = json::object();
    for (const auto& [m, v] : r.values) {
        const double s = unit_scale(m, o.units);
        j[m] = v.value * s;
        errs[m] = v.error_estimate * s;
    }
    j["error_estimates"] = errs;
    if (r.mc) {
        json mc = json::object();
        for (const auto& m : metrics) {
            const auto& e = pick(*r.mc, m);
            const double s = unit_scale(m, o.units);
            mc[m] = {{"mean", e.mean * s}, {"std_error", e.std_error * s}, {"n", e.n}, {"seed", e.seed}};
        }
        j["mc"] = mc;
    }
    j["bob"] = link_to_json(o.bob);
    j["eve"] = link_to_json(o.eve);
    return j;
}

struct SweepRow {
    double x_db = 0.0;
    PointResult result;
};

inline std::vector<SweepRow> run_sweep(const Options& o) {
    const auto metrics = parse_metrics(o.metric);
    const auto n = static_cast<std::size_t>(std::floor((o.stop - o.start) / o.step + 1e-9)) + 1;
    std::vector<SweepRow> rows(n);
    std::vector<std::string> failures(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const double x = o.start + static_cast<double>(i) * o.step;
            LinkSpec bob = o.bob;
            bob.snr_db = o.axis == "lambda_db" ? o.eve.snr_db + x : x;
            try {
                rows[i] = {x, evaluate_point(bob.params(), o.eve.params(), o.rs, metrics, o.inv, o.mc_samples,
                                             o.seed, o.mc_streams)};
            } catch (const convergence_error& e) {
                failures[i] = "x_db=" + fmt12(x) + ": " + e.what();
            }
        }
    };
    const unsigned nt = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(n)));
    if (nt == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& f : failures) {
        if (!f.empty()) throw convergence_error("sweep: " + f, 0.0);
    }
    return rows;
}

inline std::string sweep_csv(const Options& o, const std::vector<SweepRow>& rows) {
    const auto metrics = parse_metrics(o.metric);
    std::string s = "x_db";
    for (const auto& m : metrics) s += "," + m;
    if (o.mc_samples > 0) {
        for (const auto& m : metrics) s += ",mc_mean_" + m + ",mc_se_" + m;
    }
    s += "\n";
    for (const auto& row : rows) {
        s += fmt12(row.x_db);
        for (const auto& [m, v] : row.result.values) s += "," + fmt12(v.value * unit_scale(m, o.units));
        if (row.result.mc) {
            for (const auto& m : metrics) {
                const auto& e = pick(*row.result.mc, m);
                const double sc = unit_scale(m, o.units);
                s += "," + fmt12(e.mean * sc) + "," + fmt12(e.std_error * sc);
            }
        }
        s += "\n";
    }
    return s;
}

inline json sweep_json(const Options& o, const std::vector<SweepRow>& rows) {
    const auto metrics = parse_metrics(o.metric);
    json arr = json::array();
    for (const auto& row : rows) {
        json r;
        r["x_db"] = row.x_db;
        r["path"] = row.result.path;
        for (const auto& [m, v] : row.result.values) r[m] = v.value * unit_scale(m, o.units);
        if (row.result.mc) {
            for (const auto& m : metrics) {
                const auto& e = pick(*row.result.mc, m);
                r["mc_mean_" + m] = e.mean * unit_scale(m, o.units);
                r["mc_se_" + m] = e.std_error * unit_scale(m, o.units);
            }
        }
        arr.push_back(r);
    }
    return {{"axis", o.axis}, {"units", o.units}, {"rows", arr}};
}

// Standard error used for MC comparisons: never below the binomial error at
// the model value, nor below one sample's worth.
inline double comparison_se(const std::string& metric, const MCEstimate& e, double model) {
    double se = e.std_error;
    if (metric != "asc") {
        const double p = std::clamp(model, 0.0, 1.0);
        se = std::max({se, std::sqrt(p * (1.0 - p) / static_cast<double>(e.n)), 1.0 / static_cast<double>(e.n)});
    }
    return se;
}

inline std::pair<json, bool> validation_report(const Options& o) {
    const auto metrics = all_metrics();
    const auto bob = o.bob.params(), eve = o.eve.params();
    const std::uint64_t n_mc = o.mc_samples ? o.mc_samples : 1'000'000;

    json rep;
    std::optional<PointResult> closed;
    if (case2_applicable(bob) && case2_applicable(eve)) {
        closed = evaluate_point(bob, eve, o.rs, metrics, o.inv, 0, o.seed, o.mc_streams);
    }
    const auto numeric = evaluate_point(bob, eve, o.rs, metrics, o.inv, n_mc, o.seed, o.mc_streams, true);
    const auto& mc = *numeric.mc;

    auto values = [](const PointResult& r) {
        json j;
        for (const auto& [m, v] : r.values) j[m] = v.value;
        return j;
    };
    rep["closed_form"] = closed ? values(*closed) : json("n/a (case 1)");
    rep["numeric"] = values(numeric);
    json mcj;
    for (const auto& m : metrics) {
        const auto& e = pick(mc, m);
        mcj[m] = {{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}, {"seed", e.seed}};
    }
    rep["mc"] = mcj;

    json cmp = json::array();
    bool all_pass = true;
    auto add = [&](const std::string& m, const std::string& pair, double dev, double thr) {
        const bool pass = dev <= thr;
        all_pass = all_pass && pass;
        cmp.push_back({{"metric", m}, {"pair", pair}, {"deviation", dev}, {"threshold", thr}, {"pass", pass}});
    };
    for (std::size_t k = 0; k < metrics.size(); ++k) {
        const auto& m = metrics[k];
        const double nv = numeric.values[k].second.value;
        const auto& e = pick(mc, m);
        add(m, "numeric_vs_mc", std::abs(nv - e.mean), 3.0 * comparison_se(m, e, nv));
        if (closed) {
            const double cv = closed->values[k].second.value;
            add(m, "closed_vs_numeric", std::abs(cv - nv), 1e-6 * std::abs(cv) + 1e-12);
            add(m, "closed_vs_mc", std::abs(cv - e.mean), 3.0 * comparison_se(m, e, cv));
        }
    }
    rep["comparisons"] = cmp;
    rep["pass"] = all_pass;
    rep["bob"] = link_to_json(o.bob);
    rep["eve"] = link_to_json(o.eve);
    rep["rs"] = o.rs;
    return {rep, all_pass};
}

inline json reduce_json(const std::string& family, const std::string& params_text, double snr_db) {
    std::map<std::string, double> kv;
    for (const auto& [k, v] : parse_kv(params_text, "--params")) kv[k] = v;
    auto get = [&](const std::string& k) {
        const auto it = kv.find(k);
        if (it == kv.end()) throw usage_error("--params: '" + family + "' needs " + k);
        return it->second;
    };
    const double snr = db_to_linear(snr_db);
    FBParams p;
    bool experimental = false;
    try {
        if (family == "kappa-mu-shadowed") p = from_kappa_mu_shadowed(get("kappa"), get("mu"), get("m"), snr);
        else if (family == "rician-shadowed") p = from_rician_shadowed(get("K"), get("m"), snr);
        else if (family == "nakagami") p = from_nakagami(get("m"), snr);
        else if (family == "rayleigh") p = from_rayleigh(snr);
        else if (family == "eta-mu") {
            p = from_eta_mu(get("eta"), get("mu"), snr);
            experimental = true;
        } else if (family == "beckmann") {
            const double ml = kv.count("m_large") ? kv["m_large"] : kUnshadowedM;
            p = from_beckmann(get("K"), get("q"), get("r"), snr, ml);
        } else {
            throw usage_error("reduce: unknown family '" + family +
                              "' (kappa-mu-shadowed, eta-mu, beckmann, nakagami, rayleigh, rician-shadowed)");
        }
    } catch (const parameter_error& e) {
        throw usage_error("--params " + e.field() + ": " + reason(e));
    }
    json j{{"family", family}, {"mu", p.mu}, {"m", p.m}, {"kappa", p.kappa}, {"eta", p.eta}, {"rho2", p.rho2},
           {"snr_db", snr_db}};
    if (experimental) j["experimental"] = true;
    return j;
}

// --- flag plumbing --------------------------------------------------------------

namespace detail {

struct RawFlags {
    std::string bob, eve, metric, out, format, units, config, axis;
    double rs = 0.0, quad_rel_tol = 0.0, start = 0.0, stop = 0.0, step = 0.0;
    std::uint64_t mc_samples = 0, seed = 0;
    int talbot_nodes = 0;
};

inline void add_common(CLI::App* app, RawFlags& f) {
    app->add_option("--bob", f.bob, "Bob link, e.g. mu=2,m=1,kappa=0,eta=1,rho2=1,snr_db=10");
    app->add_option("--eve", f.eve, "Eve link, same keys as --bob");
    app->add_option("--rs", f.rs, "Target secrecy rate in nats");
    app->add_option("--metric", f.metric, "asc|sop|sopl|spsc|all or a comma list");
    app->add_option("--mc-samples", f.mc_samples, "Monte Carlo samples (0 disables)");
    app->add_option("--seed", f.seed, "Monte Carlo seed");
    app->add_option("--talbot-nodes", f.talbot_nodes, "Talbot contour nodes (even, >= 16)");
    app->add_option("--quad-rel-tol", f.quad_rel_tol, "Quadrature relative tolerance");
    app->add_option("--out", f.out, "Output file (default stdout)");
    app->add_option("--format", f.format, "csv|json");
    app->add_option("--units", f.units, "nats|bits (scales ASC only)");
    app->add_option("--config", f.config, "JSON file with the same keys; flags win");
}

inline void apply_config(Options& o, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("--config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw usage_error("--config: " + std::string(e.what()));
    }
    try {
        if (j.contains("bob")) {
            o.bob = link_from_json(j["bob"], "--bob");
            o.have_bob = true;
        }
        if (j.contains("eve")) {
            o.eve = link_from_json(j["eve"], "--eve");
            o.have_eve = true;
        }
        if (j.contains("rs")) o.rs = j["rs"].get<double>();
        if (j.contains("metric")) o.metric = j["metric"].get<std::string>();
        if (j.contains("mc_samples")) o.mc_samples = j["mc_samples"].get<std::uint64_t>();
        if (j.contains("seed")) o.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("talbot_nodes")) o.inv.talbot_nodes = j["talbot_nodes"].get<int>();
        if (j.contains("quad_rel_tol")) o.inv.quad_rel_tol = j["quad_rel_tol"].get<double>();
        if (j.contains("format")) o.format = j["format"].get<std::string>();
        if (j.contains("units")) o.units = j["units"].get<std::string>();
        if (j.contains("out")) o.out = j["out"].get<std::string>();
        if (j.contains("axis")) o.axis = j["axis"].get<std::string>();
        if (j.contains("start")) o.start = j["start"].get<double>();
        if (j.contains("stop")) o.stop = j["stop"].get<double>();
        if (j.contains("step")) o.step = j["step"].get<double>();
    } catch (const json::exception& e) {
        throw usage_error("--config: " + std::string(e.what()));
    }
}

inline Options resolve(const CLI::App* app, const RawFlags& f) {
    Options o;
    if (app->count("--config")) apply_config(o, f.config);
    if (app->count("--bob")) {
        o.bob = parse_link(f.bob, "--bob");
        o.have_bob = true;
    }
    if (app->count("--eve")) {
        o.eve = parse_link(f.eve, "--eve");
        o.have_eve = true;
    }
    if (app->count("--rs")) o.rs = f.rs;
    if (app->count("--metric")) o.metric = f.metric;
    if (app->count("--mc-samples")) o.mc_samples = f.mc_samples;
    if (app->count("--seed")) o.seed = f.seed;
    if (app->count("--talbot-nodes")) o.inv.talbot_nodes = f.talbot_nodes;
    if (app->count("--quad-rel-tol")) o.inv.quad_rel_tol = f.quad_rel_tol;
    if (app->count("--out")) o.out = f.out;
    if (app->count("--format")) o.format = f.format;
    if (app->count("--units")) o.units = f.units;
    if (app->get_option_no_throw("--axis") && app->count("--axis")) o.axis = f.axis;
    if (app->get_option_no_throw("--start") && app->count("--start")) o.start = f.start;
    if (app->get_option_no_throw("--stop") && app->count("--stop")) o.stop = f.stop;
    if (app->get_option_no_throw("--step") && app->count("--step")) o.step = f.step;
    return o;
}

inline void emit(const Options& o, std::ostream& out, const std::string& text) {
    if (o.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f) throw usage_error("--out: cannot write '" + o.out + "'");
    f << text;
}

} // namespace detail

// args excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Secrecy metrics over Fluctuating Beckmann fading links", "fbsec"};
    app.require_subcommand(1);

    detail::RawFlags ef, sf, vf;
    auto* eval = app.add_subcommand("eval", "Evaluate metrics at one operating point (JSON)");
    detail::add_common(eval, ef);
    auto* sweep = app.add_subcommand("sweep", "Sweep an SNR axis (CSV by default)");
    detail::add_common(sweep, sf);
    sweep->add_option("--axis", sf.axis, "lambda_db (Bob minus Eve SNR) or snr_bob_db");
    sweep->add_option("--start", sf.start, "First abscissa in dB");
    sweep->add_option("--stop", sf.stop, "Last abscissa in dB");
    sweep->add_option("--step", sf.step, "Abscissa step in dB");
    auto* validate = app.add_subcommand("validate", "Cross-check closed form, numeric and Monte Carlo paths");
    detail::add_common(validate, vf);

    std::string family, rparams;
    double rsnr = 0.0;
    auto* reduce = app.add_subcommand("reduce", "Print the FB embedding of a classical fading family");
    reduce->add_option("family", family, "kappa-mu-shadowed|eta-mu|beckmann|nakagami|rayleigh|rician-shadowed")
        ->required();
    reduce->add_option("--params", rparams, "Family parameters, e.g. kappa=2,mu=2,m=3");
    reduce->add_option("--snr-db", rsnr, "Average SNR in dB");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*reduce) {
            out << reduce_json(family, rparams, rsnr).dump(2) << "\n";
            return kOk;
        }
        if (*eval) {
            const auto o = detail::resolve(eval, ef);
            check_options(o);
            detail::emit(o, out, eval_json(o).dump(2) + "\n");
            return kOk;
        }
        if (*sweep) {
            const auto o = detail::resolve(sweep, sf);
            check_options(o);
            const auto rows = run_sweep(o);
            detail::emit(o, out, o.format == "json" ? sweep_json(o, rows).dump(2) + "\n" : sweep_csv(o, rows));
            return kOk;
        }
        if (*validate) {
            const auto o = detail::resolve(validate, vf);
            check_options(o);
            const auto [rep, pass] = validation_report(o);
            detail::emit(o, out, rep.dump(2) + "\n");
            if (!pass) {
                for (const auto& c : rep["comparisons"]) {
                    if (!c["pass"].get<bool>()) {
                        err << "validation failed: " << c["metric"].get<std::string>() << " "
                            << c["pair"].get<std::string>() << " deviation " << c["deviation"].get<double>()
                            << " > " << c["threshold"].get<double>() << "\n";
                    }
                }
                return kValidationFailed;
            }
            return kOk;
        }
    } catch (const usage_error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const parameter_error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const convergence_error& e) {
        err << "error: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const error& e) {
        err << "error: " << e.what() << "\n";
        return kNonConvergence;
    }
    return kUsage;
}

} // namespace fbsec::cli
