#pragma once

#include <string>

#include "json.hpp"

#include "cnmot/bass.hpp"
#include "cnmot/coupling.hpp"
#include "cnmot/ensemble.hpp"
#include "cnmot/measure.hpp"
#include "cnmot/report.hpp"

namespace cnmot {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal form.
std::string format_double(double x);
// x rounded to `digits` significant decimal digits
double round_sig(double x, int digits = 15);

// {"atoms":[...],"weights":[...]}
Json measure_to_json(const Measure1D& m, int digits = 17);
Measure1D measure_from_json(const Json& j);
// Also accepts {"gaussian":{"mean":m,"sd":s[,"n":N]}} and {"grid":{"x":[...],"F":[...]}}.
Law law_from_json(const Json& j);
Json law_to_json(const Law& law);

// {"source":{...},"target":{...},"weights":[[...],...]}
Json coupling_to_json(const MartingaleCoupling& pi, int digits = 17);
MartingaleCoupling coupling_from_json(const Json& j);

Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);
// JSON measure/law files; a .csv path is read as a cdf grid.
Law read_law(const std::string& path);
Measure1D read_measure(const std::string& path);
MartingaleCoupling read_coupling(const std::string& path);

// two columns x,F
void write_cdf_csv(const std::string& path, const CdfGrid& F);
CdfGrid read_cdf_csv(const std::string& path);
// x0,u,x1,w
void write_lifted_csv(const std::string& path, const LiftedCoupling& pi);
LiftedCoupling read_lifted_csv(const std::string& path);
// t_0,...,t_M,weight; times are k/M. At most max_paths rows are written, with
// their weights renormalised.
void write_ensemble_csv(const std::string& path, const PathEnsemble& e, std::size_t max_paths = 0);
PathEnsemble read_ensemble_csv(const std::string& path);

Json report_to_json(const CheckReport& r);
Json bass_to_json(const BassSolution& s);

}  // namespace cnmot
