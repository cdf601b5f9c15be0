#include "mce/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mce/error.hpp"

namespace mce {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& raw) {
    const std::string text = trim(raw);
    T value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (!text.empty() && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError("not a number: '" + text + "'");
    }
    return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& text) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(item));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

void write_point(std::ostream& out, const Vec2& p) {
    out << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<int> parse_int_list(const std::string& text) { return parse_list<int>(text); }
std::vector<double> parse_double_list(const std::string& text) { return parse_list<double>(text); }

// ---------------------------------------------------------------------------
// VTK

void write_vtk(std::ostream& out, const FESpace& space, const FieldSolution& solution) {
    const SubdividedMesh& sub = space.subdivision();
    const MacroMesh& mesh = space.mesh();
    const int nv = mesh.num_vertices(), ne = mesh.num_edges(), nt = mesh.num_triangles();
    const int np = nv + ne + nt;

    // global point index of every local node, and the field value there
    std::vector<Vec2> values(np);
    std::vector<std::array<int, kLocalNodes>> ids(nt);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles()[t];
        const auto vals = local_node_values(space, solution.velocity, t);
        for (int k = 0; k < 3; ++k) {
            ids[t][k] = tri[k];
            ids[t][3 + k] = nv + mesh.triangle_edge(t, k);
        }
        ids[t][kCentroidNode] = nv + ne + t;
        for (int i = 0; i < kLocalNodes; ++i) values[ids[t][i]] = vals[i];
    }

    out << "# vtk DataFile Version 3.0\n";
    out << "mce solution\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << np << " double\n";
    for (int v = 0; v < nv; ++v) write_point(out, mesh.vertex(v));
    for (int e = 0; e < ne; ++e) write_point(out, sub.split_point(e));
    for (int t = 0; t < nt; ++t) write_point(out, sub.centroid(t));

    const int nc = kSubTriangles * nt;
    out << "CELLS " << nc << ' ' << 4 * nc << '\n';
    for (int t = 0; t < nt; ++t) {
        for (int s = 0; s < kSubTriangles; ++s) {
            const auto nodes = subtriangle_nodes(s);
            out << 3 << ' ' << ids[t][nodes[0]] << ' ' << ids[t][nodes[1]] << ' ' << ids[t][nodes[2]] << '\n';
        }
    }
    out << "CELL_TYPES " << nc << '\n';
    for (int c = 0; c < nc; ++c) out << "5\n";

    out << "POINT_DATA " << np << '\n';
    out << "VECTORS velocity double\n";
    for (const Vec2& v : values) write_point(out, v);

    if (!solution.pressure.empty()) {
        out << "CELL_DATA " << nc << '\n';
        out << "SCALARS pressure double 1\n";
        out << "LOOKUP_TABLE default\n";
        for (int t = 0; t < nt; ++t) {
            const std::string p = format_double(solution.pressure[t]);
            for (int s = 0; s < kSubTriangles; ++s) out << p << '\n';
        }
    }
}

void write_vtk(const std::string& path, const FESpace& space, const FieldSolution& solution) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_vtk(out, space, solution);
    out.flush();
    if (!out) throw Error("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Run configuration

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{"levels", "nu",   "mu",      "sigma", "gamma", "bc",
                                               "mesh-file", "out", "threads", "grid",  "seed",  "scenario"};
    return keys;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    try {
        if (key == "levels") levels = parse_int_list(value);
        else if (key == "nu") nu = parse_double_list(value);
        else if (key == "mu") mu = parse_double_list(value);
        else if (key == "sigma") sigma = parse_number<double>(value);
        else if (key == "gamma") gamma = parse_number<double>(value);
        else if (key == "bc") bc = value;
        else if (key == "mesh-file") mesh_file = value;
        else if (key == "out") out = value;
        else if (key == "threads") threads = parse_number<int>(value);
        else if (key == "grid") grid = parse_number<int>(value);
        else if (key == "seed") seed = parse_number<unsigned>(value);
        else if (key == "scenario") scenario = value;
        else throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError& e) {
        if (std::string(e.what()).starts_with("unknown key")) throw;
        throw ConfigError(key + ": " + e.what());
    }
}

void RunConfig::validate() const {
    static const std::vector<std::string> commands{"stokes", "darcy", "cooks", "brinkman", "mesh-info"};
    if (std::find(commands.begin(), commands.end(), subcommand) == commands.end()) {
        throw ConfigError("unknown experiment '" + subcommand + "'");
    }
    for (int n : levels) {
        if (n < 1) throw ConfigError("levels must be positive");
    }
    if ((subcommand == "stokes" || subcommand == "darcy") && mesh_file.empty() && levels.size() < 3) {
        throw ConfigError("a convergence study needs at least three levels");
    }
    for (double v : nu) {
        if (!(v > 0.0 && v < 0.5)) throw ConfigError("nu must lie in (0, 0.5)");
    }
    for (double v : mu) {
        if (!(v >= 0.0)) throw ConfigError("mu must be non-negative");
    }
    if (subcommand == "darcy" && mu.size() > 1) throw ConfigError("darcy takes a single mu");
    if (sigma && !(*sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
    if (gamma && !(*gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (!bc.empty() && bc != "strong" && bc != "nitsche-tangential" && bc != "nitsche-slip") {
        throw ConfigError("bc must be strong, nitsche-tangential or nitsche-slip");
    }
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (grid) {
        if (*grid < 1) throw ConfigError("grid must be positive");
        if (subcommand == "brinkman" && *grid % 2 != 0) throw ConfigError("brinkman grid must be even");
    }
    if (scenario != "normal" && scenario != "tangential") {
        throw ConfigError("scenario must be normal or tangential");
    }
    if (subcommand == "mesh-info" && mesh_file.empty()) throw ConfigError("mesh-info needs --mesh-file");
    if (out.empty()) throw ConfigError("output directory must not be empty");
}

void read_config(std::istream& in, RunConfig& config) {
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        }
        try {
            config.set(trim(text.substr(0, eq)), text.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(number) + ": " + e.what());
        }
    }
}

}  // namespace mce
