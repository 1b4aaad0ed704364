#pragma once
#include <string>
#include <vector>

#include "copsched/marginal.hpp"
#include "copsched/mechanism.hpp"

namespace copsched {

// Shortest decimal form that round-trips a double (17 significant digits),
// locale-independent. Non-finite values print as "inf", "-inf", "nan".
std::string fmt17(double v);

// Whole-file write; throws std::runtime_error when the path is unwritable.
void write_text_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

// Instance files: CSV is two rows of n comma-separated times (machine 1 then
// machine 2); JSON is {"t": [[...],[...]]}. Dispatch is by .json extension.
Instance load_instance_csv(const std::string& path);
Instance load_instance_json(const std::string& path);
Instance load_instance(const std::string& path);

// Marginal description file:
//   {"kind": "piecewise", "a": 1.715, "b": 0.76}
//   {"kind": "transcendental"}
//   {"kind": "tabulated", "points": [[x1, F1], ...]}
Marginal load_marginal_json(const std::string& path);

} // namespace copsched
