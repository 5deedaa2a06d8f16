#pragma once

#include <map>
#include <string>

namespace cnmot {

// Outcome of a numerical identity check.
struct CheckReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double diff = 0.0;       // |lhs - rhs|
    double mc_error = 0.0;   // standard error of lhs - rhs
    double allowance = 0.0;  // discretisation allowance
    bool pass = false;
    std::map<std::string, double> extra;

    double threshold() const { return 3.0 * mc_error + allowance; }
};

}  // namespace cnmot
