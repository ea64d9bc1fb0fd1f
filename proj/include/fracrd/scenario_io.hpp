#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracrd/fd_oracle.hpp"
#include "fracrd/residual.hpp"
#include "fracrd/solution.hpp"

namespace fracrd {

/// Settings for the residual part of `verify`.
struct ResidualSettings {
    double T = 0.0;  ///< 0 disables the residual report
    std::vector<double> x;
    ResidualOptions options;
};

/// Everything a scenario file can describe.
struct ScenarioBundle {
    Scenario scenario;
    FDGrid fd;
    FDOptions fd_options;
    ResidualSettings residual;
};

/// Parses the sectioned key-value format documented in README.md.
/// Errors are InvalidParameter with "origin:line: section.key ..." addressing.
/// Relative table paths are resolved against `base_dir`.
ScenarioBundle parse_scenario(const std::string& text, const std::string& origin = "<scenario>",
                              const std::string& base_dir = ".");

/// Reads and parses a scenario file.
ScenarioBundle load_scenario(const std::string& path);

/// Loads a uniform profile table. Accepts two-column "x,value" files or the
/// CSV written by `solve` (t,x,N,imag_residue), in which case the rows at time
/// `t_select` are used (the first time present when not given).
UniformSamples load_profile_table(const std::string& path, const std::string& field,
                                  std::optional<double> t_select = std::nullopt);

/// Loads a source table from rows "t,x,value" (uniform in both t and x).
/// The solve CSV is accepted as well, its N column taken as the value.
SourceSpec load_source_table(const std::string& path, const std::string& field);

/// Fixed 15-significant-digit scientific notation.
std::string format_number(double v);

/// Header "t,x,N,imag_residue" and one row per (t, x) in t-major order.
void write_field_csv(std::ostream& os, const Field& field);

/// Two-column "x,value" table.
void write_profile_table(std::ostream& os, const UniformSamples& table);

}  // namespace fracrd
