#include "cnmot/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cnmot/errors.hpp"

namespace cnmot {

std::string format_double(double x)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

double round_sig(double x, int digits)
{
    if (!std::isfinite(x) || x == 0.0) return x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return std::strtod(buf, nullptr);
}

namespace {

std::vector<double> rounded(const std::vector<double>& v, int digits)
{
    std::vector<double> out(v);
    if (digits < 17)
        for (double& x : out) x = round_sig(x, digits);
    return out;
}

std::vector<double> numbers(const Json& j, const char* what)
{
    if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array of numbers");
    std::vector<double> v;
    for (const auto& x : j) {
        if (!x.is_number()) throw InvalidInput(std::string(what) + " must be an array of numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

const Json& field(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read " + path);
    return in;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    return out;
}

// rows of comma separated numbers after a header line
std::vector<std::vector<double>> read_csv(const std::string& path, std::vector<std::string>& header)
{
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput(path + " is empty");
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) {
            double v = 0.0;
            auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (r.ec != std::errc() || r.ptr != cell.data() + cell.size())
                throw InvalidInput(path + ": not a number: " + cell);
            row.push_back(v);
        }
        if (row.size() != header.size()) throw InvalidInput(path + ": row length does not match header");
        rows.push_back(std::move(row));
    }
    return rows;
}

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Json measure_to_json(const Measure1D& m, int digits)
{
    Json j;
    j["atoms"] = rounded(m.atoms(), digits);
    j["weights"] = rounded(m.weights(), digits);
    return j;
}

Measure1D measure_from_json(const Json& j)
{
    return Measure1D(numbers(field(j, "atoms"), "atoms"), numbers(field(j, "weights"), "weights"));
}

Law law_from_json(const Json& j)
{
    if (j.is_object() && j.contains("gaussian")) {
        const Json& g = j.at("gaussian");
        double mean = field(g, "mean").get<double>(), sd = field(g, "sd").get<double>();
        if (!(sd > 0.0)) throw InvalidInput("gaussian sd must be positive");
        std::size_t n = g.contains("n") ? g.at("n").get<std::size_t>() : kDefaultGridSize;
        return CdfGrid::gaussian(mean, sd, n);
    }
    if (j.is_object() && j.contains("grid")) {
        const Json& g = j.at("grid");
        return CdfGrid(numbers(field(g, "x"), "x"), numbers(field(g, "F"), "F"));
    }
    return measure_from_json(j);
}

Json law_to_json(const Law& law)
{
    if (const auto* m = std::get_if<Measure1D>(&law)) return measure_to_json(*m);
    const CdfGrid& F = std::get<CdfGrid>(law);
    Json j;
    j["grid"]["x"] = F.grid();
    j["grid"]["F"] = F.values();
    return j;
}

Json coupling_to_json(const MartingaleCoupling& pi, int digits)
{
    Json j;
    j["source"] = measure_to_json(pi.source_marginal(), digits);
    j["target"] = measure_to_json(pi.target_marginal(), digits);
    Json rows = Json::array();
    for (std::size_t i = 0; i < pi.rows(); ++i) {
        std::vector<double> r(pi.weights().begin() + static_cast<std::ptrdiff_t>(i * pi.cols()),
                              pi.weights().begin() + static_cast<std::ptrdiff_t>((i + 1) * pi.cols()));
        rows.push_back(rounded(r, digits));
    }
    j["weights"] = rows;
    return j;
}

MartingaleCoupling coupling_from_json(const Json& j)
{
    const Json& src = field(j, "source");
    const Json& tgt = field(j, "target");
    std::vector<double> x = numbers(field(src, "atoms"), "source atoms");
    std::vector<double> y = numbers(field(tgt, "atoms"), "target atoms");
    const Json& rows = field(j, "weights");
    if (!rows.is_array() || rows.size() != x.size()) throw InvalidInput("coupling weights need one row per source atom");
    std::vector<double> w;
    for (const auto& r : rows) {
        std::vector<double> row = numbers(r, "coupling row");
        if (row.size() != y.size()) throw InvalidInput("coupling row length must match target atoms");
        w.insert(w.end(), row.begin(), row.end());
    }
    MartingaleCoupling pi(std::move(x), std::move(y), std::move(w));
    // declared marginals must agree with the table
    auto agree = [](const Measure1D& a, const Json& decl) {
        if (!decl.contains("weights")) return true;
        std::vector<double> v = numbers(decl.at("weights"), "marginal weights");
        if (v.size() != a.size()) return false;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (std::abs(v[i] - a.weights()[i]) > 1e-9) return false;
        return true;
    };
    if (!agree(pi.source_marginal(), src) || !agree(pi.target_marginal(), tgt))
        throw InvalidInput("coupling marginals disagree with the weight table");
    return pi;
}

Json read_json(const std::string& path)
{
    std::ifstream in = open_in(path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

void write_json(const std::string& path, const Json& j)
{
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

Law read_law(const std::string& path)
{
    if (ends_with(path, ".csv")) return read_cdf_csv(path);
    try {
        return law_from_json(read_json(path));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

Measure1D read_measure(const std::string& path)
{
    Law l = read_law(path);
    if (const auto* m = std::get_if<Measure1D>(&l)) return *m;
    throw InvalidInput(path + ": a discrete measure is required here");
}

MartingaleCoupling read_coupling(const std::string& path)
{
    try {
        return coupling_from_json(read_json(path));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

void write_cdf_csv(const std::string& path, const CdfGrid& F)
{
    std::ofstream out = open_out(path);
    out << "x,F\n";
    for (std::size_t k = 0; k < F.size(); ++k) out << format_double(F.grid()[k]) << ',' << format_double(F.values()[k]) << '\n';
}

CdfGrid read_cdf_csv(const std::string& path)
{
    std::vector<std::string> header;
    auto rows = read_csv(path, header);
    if (header.size() != 2) throw InvalidInput(path + ": expected columns x,F");
    std::vector<double> x, F;
    for (const auto& r : rows) {
        x.push_back(r[0]);
        F.push_back(r[1]);
    }
    return CdfGrid(std::move(x), std::move(F));
}

void write_lifted_csv(const std::string& path, const LiftedCoupling& pi)
{
    std::ofstream out = open_out(path);
    out << "x0,u,x1,w\n";
    for (const auto& c : pi.cells())
        out << format_double(c.x0) << ',' << format_double(c.u) << ',' << format_double(c.x1) << ',' << format_double(c.w)
            << '\n';
}

LiftedCoupling read_lifted_csv(const std::string& path)
{
    std::vector<std::string> header;
    auto rows = read_csv(path, header);
    if (header.size() != 4) throw InvalidInput(path + ": expected columns x0,u,x1,w");
    std::vector<LiftedCell> cells;
    for (const auto& r : rows) cells.push_back({r[0], r[1], r[2], r[3]});
    return LiftedCoupling(std::move(cells));
}

void write_ensemble_csv(const std::string& path, const PathEnsemble& e, std::size_t max_paths)
{
    std::size_t n = (max_paths == 0) ? e.n_paths : std::min(max_paths, e.n_paths);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += e.weights[i];
    std::ofstream out = open_out(path);
    for (std::size_t k = 0; k < e.n_times(); ++k) out << "t_" << k << ',';
    out << "weight\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < e.n_times(); ++k) out << format_double(e.at(i, k)) << ',';
        out << format_double(total > 0.0 ? e.weights[i] / total : 0.0) << '\n';
    }
}

PathEnsemble read_ensemble_csv(const std::string& path)
{
    std::vector<std::string> header;
    auto rows = read_csv(path, header);
    if (header.size() < 3 || header.back() != "weight") throw InvalidInput(path + ": expected columns t_0,...,t_M,weight");
    const std::size_t M = header.size() - 2;
    std::vector<double> times;
    for (std::size_t k = 0; k <= M; ++k) times.push_back(static_cast<double>(k) / static_cast<double>(M));
    PathEnsemble e = make_ensemble(times, rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k <= M; ++k) e.path(i)[k] = rows[i][k];
        e.weights[i] = rows[i][M + 1];
    }
    e.validate();
    e.positive = true;
    for (double v : e.values) e.positive = e.positive && v > 0.0;
    return e;
}

Json report_to_json(const CheckReport& r)
{
    Json j;
    j["name"] = r.name;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["diff"] = r.diff;
    j["mc_error"] = r.mc_error;
    j["allowance"] = r.allowance;
    j["threshold"] = r.threshold();
    j["pass"] = r.pass;
    for (const auto& [k, v] : r.extra) j["extra"][k] = v;
    return j;
}

Json bass_to_json(const BassSolution& s)
{
    Json j;
    j["alpha"] = law_to_json(s.alpha);
    j["t1"]["nodes"] = s.t1.nodes();
    j["t1"]["left"] = s.t1.left();
    j["t1"]["right"] = s.t1.right();
    j["t1"]["below"] = s.t1.below();
    j["t1"]["above"] = s.t1.above();
    j["diagnostics"]["iterations"] = s.iterations;
    j["diagnostics"]["residual"] = s.residual;
    j["diagnostics"]["residual_history"] = s.residual_history;
    j["diagnostics"]["grid_spacing"] = s.grid_spacing;
    j["diagnostics"]["mu_leg_error"] = s.mu_leg_error;
    j["diagnostics"]["nu_leg_error"] = s.nu_leg_error;
    return j;
}

}  // namespace cnmot
