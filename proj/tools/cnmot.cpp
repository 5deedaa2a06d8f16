// cnmot: command-line front end.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cnmot/bass.hpp"
#include "cnmot/errors.hpp"
#include "cnmot/io.hpp"
#include "cnmot/normal.hpp"
#include "cnmot/numeraire.hpp"
#include "cnmot/paths.hpp"
#include "cnmot/shadow.hpp"

namespace fs = std::filesystem;
using namespace cnmot;

namespace {

constexpr const char* kOutDirEnv = "CNMOT_OUT_DIR";

struct Args {
    std::string out_dir;
    // transform
    std::string measure, coupling, lifted, ensemble, out;
    int digits = 15;
    // shared marginals
    std::string mu, nu;
    // bass
    double tol = 1e-8;
    int max_iter = 500;
    std::size_t grid_size = kDefaultGridSize;
    // simulate
    std::size_t n_paths = 10000, n_steps = 256, write_paths = 500, qv_window = 0;
    std::uint64_t seed = 42;
    std::string resample = "importance";
    double bound = 0.0;
    unsigned threads = 0;
    std::vector<std::string> checks, costs;
    // shadow
    std::string preset = "monotone", verify = "none";
    std::size_t K = kDefaultCells;
    double shadow_tol = 1e-8;
    // value
    std::string kind = "gsbm";
};

// Reads `key = value` lines; '#' starts a comment, [sections] are ignored.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read config " + path);
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        s.erase(0, s.find_first_not_of(ws));
        s.erase(s.find_last_not_of(ws) + 1);
        return s;
    };
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    for (int no = 1; std::getline(in, line); ++no) {
        line = trim(line.substr(0, line.find('#')));
        if (line.empty() || line.front() == '[') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidInput(path + ":" + std::to_string(no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        for (char& c : key)
            if (c == '_') c = '-';
        kv.emplace_back(key, val);
    }
    return kv;
}

// Splices config entries in front of the user's flags; keys given on the
// command line are dropped from the config.
std::vector<std::string> expand_config(const std::vector<std::string>& argv, const std::set<std::string>& subcommands,
                                       std::string& config_path)
{
    std::vector<std::string> args;
    for (std::size_t i = 0; i < argv.size(); ++i) {
        if (argv[i] == "--config" && i + 1 < argv.size()) {
            config_path = argv[++i];
        } else if (argv[i].rfind("--config=", 0) == 0) {
            config_path = argv[i].substr(9);
        } else {
            args.push_back(argv[i]);
        }
    }
    if (config_path.empty()) return args;
    std::set<std::string> given;
    for (const auto& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    std::vector<std::string> injected;
    for (const auto& [k, v] : read_config(config_path)) {
        if (given.count(k)) continue;
        std::stringstream vs(v);
        injected.push_back("--" + k);
        // lists are comma separated
        for (std::string item; std::getline(vs, item, ',');) {
            item.erase(0, item.find_first_not_of(' '));
            item.erase(item.find_last_not_of(' ') + 1);
            injected.push_back(item);
        }
    }
    std::vector<std::string> out;
    bool done = false;
    for (const auto& a : args) {
        out.push_back(a);
        if (!done && subcommands.count(a)) {
            out.insert(out.end(), injected.begin(), injected.end());
            done = true;
        }
    }
    return out;
}

// Every option of the subcommand with its resolved value.
Json resolved_config(const CLI::App* sub, const std::string& config_path)
{
    Json j;
    j["subcommand"] = sub->get_name();
    if (!config_path.empty()) j["config_file"] = config_path;
    for (const CLI::Option* opt : sub->get_options()) {
        std::string name = opt->get_single_name();
        if (name == "help") continue;
        std::vector<std::string> vals = opt->count() ? opt->results() : std::vector<std::string>{};
        const bool list = opt->get_expected_max() > 1;
        if (vals.empty() && !list && !opt->get_default_str().empty()) vals = {opt->get_default_str()};
        if (list) j[name] = vals;
        else j[name] = vals.empty() ? std::string() : vals.back();
    }
    return j;
}

std::string out_path(const Args& a, const std::string& file)
{
    fs::create_directories(a.out_dir);
    return (fs::path(a.out_dir) / file).string();
}

std::vector<double> sorted_difference(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) d.push_back(std::abs(a[i] - b[i]));
    if (a.size() != b.size()) d.push_back(INFINITY);
    return d;
}

double max_of(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

int cmd_transform(const Args& a, const Json& config)
{
    int given = !a.measure.empty() + !a.coupling.empty() + !a.lifted.empty() + !a.ensemble.empty();
    if (given != 1) throw InvalidInput("give exactly one of --measure, --coupling, --lifted, --ensemble");
    Json ver;
    if (!a.measure.empty()) {
        Measure1D m = read_measure(a.measure);
        Measure1D s = cn_measure(m), back = cn_measure(s);
        ver["involution_residual"] = std::max(max_of(sorted_difference(back.atoms(), m.atoms())),
                                              max_of(sorted_difference(back.weights(), m.weights())));
        ver["barycenter_product"] = s.mean() * m.mean();
        Json j = measure_to_json(s, a.digits);
        j["verification"] = ver;
        j["config"] = config;
        std::string path = a.out.empty() ? out_path(a, "transform.json") : a.out;
        write_json(path, j);
        std::cout << "wrote " << path << "\n";
    } else if (!a.coupling.empty()) {
        MartingaleCoupling pi = read_coupling(a.coupling);
        MartingaleCoupling s = cn_coupling(pi);
        ver["involution_residual"] = cn_coupling(s).max_abs_diff(pi);
        ver["barycenter_product"] = s.target_marginal().mean() * pi.target_marginal().mean();
        ver["martingale_residual"] = s.martingale_residual();
        Json j = coupling_to_json(s, a.digits);
        j["verification"] = ver;
        j["config"] = config;
        std::string path = a.out.empty() ? out_path(a, "transform.json") : a.out;
        write_json(path, j);
        std::cout << "wrote " << path << "\n";
    } else if (!a.lifted.empty()) {
        LiftedCoupling pi = read_lifted_csv(a.lifted);
        std::string path = a.out.empty() ? out_path(a, "transform.csv") : a.out;
        write_lifted_csv(path, cn_lifted(pi));
        std::cout << "wrote " << path << "\n";
    } else {
        PathEnsemble e = read_ensemble_csv(a.ensemble);
        std::string path = a.out.empty() ? out_path(a, "transform.csv") : a.out;
        write_ensemble_csv(path, cn_paths(e));
        std::cout << "wrote " << path << "\n";
    }
    return 0;
}

// Gaussian parameters when the file declares {"gaussian": ...}
bool gaussian_params(const std::string& path, double& mean, double& sd)
{
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return false;
    Json j = read_json(path);
    if (!j.is_object() || !j.contains("gaussian")) return false;
    mean = j["gaussian"]["mean"].get<double>();
    sd = j["gaussian"]["sd"].get<double>();
    return true;
}

BassOptions bass_options(const Args& a)
{
    BassOptions o;
    o.tol = a.tol;
    o.max_iter = a.max_iter;
    o.grid_size = a.grid_size;
    return o;
}

void write_residuals(const std::string& path, const std::vector<double>& h)
{
    std::ofstream out(path);
    out << "iteration,residual\n";
    for (std::size_t k = 0; k < h.size(); ++k) out << k + 1 << ',' << format_double(h[k]) << '\n';
}

int cmd_bass(const Args& a, const Json& config)
{
    Law mu = read_law(a.mu), nu = read_law(a.nu);
    BassOptions o = bass_options(a);
    Json j;
    j["config"] = config;
    const auto* mm = std::get_if<Measure1D>(&mu);
    const auto* nm = std::get_if<Measure1D>(&nu);
    bool split = false;
    if (mm && nm && !mm->is_dirac()) {
        Decomposition d = irreducible_components(*mm, *nm);
        if (d.components.empty()) throw DegeneratePair("mu equals nu; no irreducible component");
        split = d.components.size() > 1 || !d.frozen.empty();
    }
    if (split) {
        BassDecomposition dec = bass_solve_components(*mm, *nm, o);
        j["frozen"] = measure_to_json(dec.frozen.empty() ? Measure1D() : dec.frozen);
        std::vector<double> hist;
        for (std::size_t k = 0; k < dec.parts.size(); ++k) {
            const auto& p = dec.parts[k];
            Json c;
            c["lower"] = p.component.lower;
            c["upper"] = p.component.upper;
            c["mass"] = p.component.mass;
            c["solution"] = bass_to_json(p.solution);
            j["components"].push_back(c);
            hist.insert(hist.end(), p.solution.residual_history.begin(), p.solution.residual_history.end());
        }
        write_residuals(out_path(a, "residuals.csv"), hist);
    } else {
        BassSolution s = bass_solve(mu, nu, o);
        j["solution"] = bass_to_json(s);
        write_residuals(out_path(a, "residuals.csv"), s.residual_history);
        if (const auto* F = std::get_if<CdfGrid>(&s.alpha)) write_cdf_csv(out_path(a, "alpha.csv"), *F);
        double m1, s1, m2, s2;
        if (gaussian_params(a.mu, m1, s1) && gaussian_params(a.nu, m2, s2) && s2 > s1) {
            // alpha = N(0, a^2) with a^2 = s1^2 / (s2^2 - s1^2); T_1(x) = m + k x
            double va = s1 * s1 / (s2 * s2 - s1 * s1), k = std::sqrt(s2 * s2 - s1 * s1);
            double sa = std::sqrt(va);
            double kol = 0.0, t1err = 0.0;
            const CdfGrid* F = std::get_if<CdfGrid>(&s.alpha);
            for (int i = -4000; i <= 4000; ++i) {
                double x = sa * i / 1000.0;
                if (F) kol = std::max(kol, std::abs(F->cdf(x) - normal::cdf(x / sa)));
                t1err = std::max(t1err, std::abs(s.t1(x) - (m1 + k * x)));
            }
            j["kolmogorov_error"] = kol;
            j["t1_error"] = t1err;
        }
        std::cout << "iterations " << s.iterations << " residual " << s.residual << "\n";
    }
    std::string path = out_path(a, "bass.json");
    write_json(path, j);
    std::cout << "wrote " << path << "\n";
    return 0;
}

const char* kPlotScript = R"PY(#!/usr/bin/env python3
# Fan charts of the BM, SBM and gSBM ensembles written next to this script.
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
panels = [("bm.csv", "Brownian motion"), ("sbm.csv", "SBM between S(mu), S(nu)"), ("gsbm.csv", "gSBM between mu, nu")]
fig, axes = plt.subplots(1, 3, figsize=(15, 4.5))
for ax, (name, title) in zip(axes, panels):
    data = np.loadtxt(os.path.join(here, name), delimiter=",", skiprows=1)
    paths, w = data[:, :-1], data[:, -1]
    t = np.linspace(0.0, 1.0, paths.shape[1])
    for i in range(min(40, paths.shape[0])):
        ax.plot(t, paths[i], lw=0.6, alpha=0.5)
    order = np.argsort(paths, axis=0)
    for lo, hi in [(0.05, 0.95), (0.25, 0.75)]:
        qs = []
        for k in range(paths.shape[1]):
            col, ww = paths[order[:, k], k], w[order[:, k]]
            c = np.cumsum(ww) / ww.sum()
            qs.append((col[np.searchsorted(c, lo)], col[min(np.searchsorted(c, hi), len(col) - 1)]))
        qs = np.array(qs)
        ax.fill_between(t, qs[:, 0], qs[:, 1], color="grey", alpha=0.25)
    ax.set_title(title)
    ax.set_xlabel("t")
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "paths.png")
fig.savefig(out, dpi=150)
print("wrote", out)
)PY";

CostH parse_cost(const std::string& key)
{
    if (key == "t1:1") return cost_t1(key, [](double, double) { return 1.0; });
    if (key == "t1:exp") return cost_t1(key, [](double, double x) { return std::exp(-x); });
    if (key == "t2:sqrt")
        return cost_generic(key, [](double, double x, double s) { return std::sqrt(1.0 + x * x) * s * s; });
    throw InvalidInput("unknown cost " + key + " (expected t1:1, t1:exp or t2:sqrt)");
}

Resample parse_resample(const std::string& s)
{
    if (s == "importance") return Resample::importance_weights;
    if (s == "systematic") return Resample::systematic;
    if (s == "rejection") return Resample::rejection;
    throw InvalidInput("unknown resample mode " + s);
}

int cmd_simulate(const Args& a, const Json& config)
{
    Measure1D mu = read_measure(a.mu), nu = read_measure(a.nu);
    SimConfig cfg;
    cfg.n_paths = a.n_paths;
    cfg.n_steps = a.n_steps;
    cfg.seed = a.seed;
    cfg.resample = parse_resample(a.resample);
    cfg.bound = a.bound;
    cfg.threads = a.threads;
    cfg.qv_window = a.qv_window;
    cfg.validate();
    BassOptions o = bass_options(a);

    Measure1D smu = cn_measure(mu), snu = cn_measure(nu);
    BassDecomposition dec = bass_solve_components(smu, snu, o);
    const double h = grid_spacing(dec);
    PathEnsemble gsbm = sample_gsbm(mu, nu, cfg, o);
    PathEnsemble sbm = sample_sbm(dec, cfg);
    Law alpha = dec.parts.empty() ? Law{Measure1D::dirac(0.0)} : dec.parts.front().solution.alpha;
    PathEnsemble bm = sample_brownian(alpha, cfg);

    write_ensemble_csv(out_path(a, "bm.csv"), bm, a.write_paths);
    write_ensemble_csv(out_path(a, "sbm.csv"), sbm, a.write_paths);
    write_ensemble_csv(out_path(a, "gsbm.csv"), gsbm, a.write_paths);
    {
        std::ofstream py(out_path(a, "plot_paths.py"));
        py << kPlotScript;
    }

    // grid tolerance of the terminal laws: W1 legs of the components, carried through y -> 1/y
    double tol_sbm = 0.0;
    for (const auto& p : dec.parts) tol_sbm += p.component.mass * p.solution.nu_leg_error;
    const double tol_gsbm = tol_sbm * nu.atoms().back() * nu.atoms().back() * snu.atoms().back() / snu.mean();

    Json checks = Json::array();
    bool pass = true;
    auto add = [&](CheckReport r, const std::string& name = "") {
        if (!name.empty()) r.name = name;
        checks.push_back(report_to_json(r));
        pass = pass && r.pass;
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " diff " << r.diff << " threshold " << r.threshold() << "\n";
    };
    add(check_marginal(sbm, cfg.n_steps, Law{snu}, tol_sbm), "marginal:sbm");
    add(check_marginal(gsbm, cfg.n_steps, Law{nu}, tol_gsbm), "marginal:gsbm");
    for (const auto& [name, e] : {std::pair<std::string, const PathEnsemble*>{"sbm", &sbm}, {"gsbm", &gsbm}}) {
        MartingaleDiagnostic md = martingale_diagnostic(*e, 10);
        CheckReport r;
        r.name = "martingale:" + name;
        r.lhs = md.residual;
        r.rhs = 0.0;
        r.diff = md.residual;
        r.allowance = md.threshold;
        r.pass = md.pass;
        add(r);
    }
    for (const auto& c : a.checks) {
        if (c == "lemma35") {
            add(check_lemma35(gsbm, mu, nu, h));
        } else if (c == "ct-identity") {
            std::vector<std::string> costs = a.costs.empty() ? std::vector<std::string>{"t1:1"} : a.costs;
            for (const auto& key : costs) {
                CheckReport r = check_ct_identity(gsbm, parse_cost(key), h);
                r.name = "ct-identity:" + key;
                add(r);
            }
        } else if (c == "value") {
            add(check_value(gsbm, value_gsbm(mu, nu, o), h));
        } else {
            throw InvalidInput("unknown check " + c + " (expected lemma35, ct-identity or value)");
        }
    }
    Json j;
    j["config"] = config;
    j["pass"] = pass;
    j["checks"] = checks;
    j["effective_size"] = gsbm.effective_size();
    std::string path = out_path(a, "report.json");
    write_json(path, j);
    std::cout << "wrote " << path << "\n";
    return pass ? 0 : 1;
}

Source make_source(const std::string& preset, const Measure1D& mu, std::size_t K)
{
    if (preset == "monotone") return source_monotone(mu, K);
    if (preset == "antitone") return source_antitone(mu, K);
    if (preset == "product") return source_product(mu, K);
    throw InvalidInput("unknown preset " + preset + " (expected monotone, antitone or product)");
}

int cmd_shadow(const Args& a, const Json& config)
{
    Measure1D mu = read_measure(a.mu), nu = read_measure(a.nu);
    Source src = make_source(a.preset, mu, a.K);
    ShadowCoupling sc = shadow_coupling(src, nu);
    write_lifted_csv(out_path(a, "lifted.csv"), sc.lifted);
    Json cj = coupling_to_json(sc.projection);
    cj["value"] = sc.value;
    cj["left_monotone"] = is_left_monotone(sc.projection, 1e-10);
    cj["right_monotone"] = is_right_monotone(sc.projection, 1e-10);
    write_json(out_path(a, "coupling.json"), cj);
    int rc = 0;
    Json j;
    j["config"] = config;
    j["value"] = sc.value;
    if (a.verify == "cn") {
        CheckReport r = verify_cn_shadow(src, nu, a.shadow_tol);
        Json rj = report_to_json(r);
        rj["max_diff"] = r.diff;
        j["verification"] = rj;
        j["pass"] = r.pass;
        std::cout << (r.pass ? "PASS" : "FAIL") << " cn-shadow max_diff " << r.diff << "\n";
        rc = r.pass ? 0 : 1;
    } else if (a.verify != "none") {
        throw InvalidInput("unknown --verify " + a.verify + " (expected cn or none)");
    }
    std::string path = out_path(a, "report.json");
    write_json(path, j);
    std::cout << "wrote " << path << "\n";
    return rc;
}

int cmd_mcov(const Args& a, const Json& config)
{
    double v = mcov(read_law(a.measure));
    Json j;
    j["config"] = config;
    j["mcov"] = v;
    write_json(out_path(a, "mcov.json"), j);
    std::cout << "mcov " << format_double(v) << "\n";
    return 0;
}

int cmd_value(const Args& a, const Json& config)
{
    double v;
    if (a.kind == "sbm") v = value_sbm(read_law(a.mu), read_law(a.nu), bass_options(a));
    else if (a.kind == "gsbm") v = value_gsbm(read_measure(a.mu), read_measure(a.nu), bass_options(a));
    else throw InvalidInput("unknown --kind " + a.kind + " (expected sbm or gsbm)");
    Json j;
    j["config"] = config;
    j["kind"] = a.kind;
    j["value"] = v;
    write_json(out_path(a, "value.json"), j);
    std::cout << a.kind << " value " << format_double(v) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    Args a;
    const char* env = std::getenv(kOutDirEnv);
    a.out_dir = env && *env ? env : "out";

    CLI::App app{"Change-of-numeraire tools for martingale optimal transport"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("--config", "key = value file; command-line flags take precedence");

    auto common = [&](CLI::App* s) {
        s->add_option("--out-dir", a.out_dir, std::string("output directory (default $") + kOutDirEnv + " or ./out)");
    };
    auto bass_opts = [&](CLI::App* s) {
        s->add_option("--tol", a.tol, "fixed-point tolerance")->check(CLI::PositiveNumber);
        s->add_option("--max-iter", a.max_iter, "fixed-point iteration cap")->check(CLI::PositiveNumber);
        s->add_option("--grid-size", a.grid_size, "cdf grid nodes")->check(CLI::Range(16, 1 << 20));
    };

    CLI::App* tr = app.add_subcommand("transform", "apply S to a measure, coupling, lifted coupling or ensemble");
    tr->add_option("--measure", a.measure, "measure JSON");
    tr->add_option("--coupling", a.coupling, "coupling JSON");
    tr->add_option("--lifted", a.lifted, "lifted coupling CSV");
    tr->add_option("--ensemble", a.ensemble, "ensemble CSV");
    tr->add_option("--out", a.out, "output file");
    tr->add_option("--digits", a.digits, "significant digits in JSON output")->check(CLI::Range(1, 17));
    common(tr);

    CLI::App* ba = app.add_subcommand("bass", "solve the Bass fixed point");
    ba->add_option("--mu", a.mu, "initial law")->required();
    ba->add_option("--nu", a.nu, "terminal law")->required();
    bass_opts(ba);
    common(ba);

    CLI::App* si = app.add_subcommand("simulate", "sample BM, SBM and gSBM paths and run checks");
    si->add_option("--mu", a.mu, "initial measure")->required();
    si->add_option("--nu", a.nu, "terminal measure")->required();
    si->add_option("--n-paths", a.n_paths)->check(CLI::PositiveNumber);
    si->add_option("--n-steps", a.n_steps)->check(CLI::PositiveNumber);
    si->add_option("--seed", a.seed);
    si->add_option("--resample", a.resample, "importance, systematic or rejection");
    si->add_option("--bound", a.bound, "rejection bound M");
    si->add_option("--threads", a.threads, "0 uses all cores");
    si->add_option("--qv-window", a.qv_window, "steps per realized-variance window (0: automatic)");
    si->add_option("--write-paths", a.write_paths, "paths written per CSV (0: all)");
    si->add_option("--check", a.checks, "lemma35, ct-identity, value")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    si->set_help_flag("--help", "Print this help message and exit");
    si->add_option("--h", a.costs, "costs for ct-identity: t1:1, t1:exp, t2:sqrt")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    bass_opts(si);
    common(si);

    CLI::App* sh = app.add_subcommand("shadow", "shadow coupling for a source preset");
    sh->add_option("--mu", a.mu, "initial measure")->required();
    sh->add_option("--nu", a.nu, "terminal measure")->required();
    sh->add_option("--preset", a.preset, "monotone, antitone or product");
    sh->add_option("--K", a.K, "u-cells")->check(CLI::Range(1, 4096));
    sh->add_option("--verify", a.verify, "cn or none");
    sh->add_option("--verify-tol", a.shadow_tol, "pass threshold for --verify cn");
    common(sh);

    CLI::App* mc = app.add_subcommand("mcov", "maximal covariance with the standard Gaussian");
    mc->add_option("--measure", a.measure, "measure or law file")->required();
    common(mc);

    CLI::App* va = app.add_subcommand("value", "V of the stretched (sbm) or geometric stretched (gsbm) problem");
    va->add_option("--mu", a.mu, "initial law")->required();
    va->add_option("--nu", a.nu, "terminal law")->required();
    va->add_option("--kind", a.kind, "sbm or gsbm");
    bass_opts(va);
    common(va);

    std::set<std::string> names;
    for (const CLI::App* s : app.get_subcommands({})) names.insert(s->get_name());
    std::string config_path;
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = expand_config(args, names, config_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const CLI::App* sub = app.get_subcommands().front();
    Json config = resolved_config(sub, config_path);
    try {
        if (sub == tr) return cmd_transform(a, config);
        if (sub == ba) return cmd_bass(a, config);
        if (sub == si) return cmd_simulate(a, config);
        if (sub == sh) return cmd_shadow(a, config);
        if (sub == mc) return cmd_mcov(a, config);
        return cmd_value(a, config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
