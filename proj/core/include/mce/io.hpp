#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mce/forms.hpp"

namespace mce {

/// Legacy ASCII VTK of a solved field. Points are the macro vertices, then the edge
/// split points, then the centroids; every macro triangle contributes its 6 subtriangles.
/// The pressure cell data is omitted when the solution has no pressure.
void write_vtk(std::ostream& out, const FESpace& space, const FieldSolution& solution);
/// Throws Error when the file cannot be written.
void write_vtk(const std::string& path, const FESpace& space, const FieldSolution& solution);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

std::vector<int> parse_int_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

/// Everything the command line front end can be told. Unset optionals fall back to
/// per-experiment defaults.
struct RunConfig {
    std::string subcommand;  ///< stokes, darcy, cooks, brinkman or mesh-info
    std::vector<int> levels{4, 8, 16, 32};
    std::vector<double> nu{0.3, 0.4999, 0.49999};
    std::vector<double> mu;
    std::optional<double> sigma;
    std::optional<double> gamma;
    std::string bc;  ///< strong, nitsche-tangential or nitsche-slip; empty for the default
    std::string mesh_file;
    std::string out = ".";
    int threads = 1;
    std::optional<int> grid;
    unsigned seed = 7;
    std::string scenario = "tangential";  ///< brinkman: normal or tangential

    /// Sets one key from its text form. Keys match the long CLI flags without dashes.
    /// Throws ConfigError for unknown keys and malformed values.
    void set(const std::string& key, const std::string& value);
    /// Throws ConfigError describing the first inconsistency.
    void validate() const;
};

/// All keys accepted by RunConfig::set, in a fixed order.
const std::vector<std::string>& config_keys();

/// Applies a flat `key = value` file on top of `config`. Blank lines and lines starting
/// with '#' are skipped. Errors carry the line number.
void read_config(std::istream& in, RunConfig& config);

}  // namespace mce
