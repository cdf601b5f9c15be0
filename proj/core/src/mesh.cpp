#include "mce/mesh.hpp"

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "mce/error.hpp"

namespace mce {

std::uint64_t MacroMesh::edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

std::array<double, 3> barycentric(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    const double area = signed_area(a, b, c);
    const double l0 = signed_area(p, b, c) / area;
    const double l1 = signed_area(a, p, c) / area;
    return {l0, l1, 1.0 - l0 - l1};
}

MacroMesh::MacroMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                     const std::vector<std::pair<std::array<int, 2>, std::string>>& boundary_tags,
                     const std::string& default_tag)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    auto& lookup = edge_lookup_;
    lookup.reserve(triangles_.size() * 2);
    triangle_edges_.resize(triangles_.size());
    for (int t = 0; t < num_triangles(); ++t) {
        for (int k = 0; k < 3; ++k) {
            const int a = triangles_[t][k];
            const int b = triangles_[t][(k + 1) % 3];
            auto [it, inserted] = lookup.try_emplace(edge_key(a, b), num_edges());
            if (inserted) {
                Edge e;
                e.verts = {a, b};
                edges_.push_back(e);
            }
            Edge& e = edges_[it->second];
            if (e.incidence < 2) e.tris[e.incidence] = t;
            ++e.incidence;
            triangle_edges_[t][k] = it->second;
        }
    }
    for (auto& e : edges_) {
        if (e.on_boundary()) e.tag = default_tag;
    }
    for (const auto& [verts, tag] : boundary_tags) {
        const int e = find_edge(verts[0], verts[1]);
        if (e < 0 || !edges_[e].on_boundary()) {
            throw MeshError("boundary tag '" + tag + "' given for (" + std::to_string(verts[0]) +
                            ", " + std::to_string(verts[1]) + ") which is not a boundary edge");
        }
        edges_[e].tag = tag;
    }
}

int MacroMesh::num_boundary_edges() const {
    int count = 0;
    for (const auto& e : edges_) count += e.on_boundary() ? 1 : 0;
    return count;
}

std::array<Vec2, 3> MacroMesh::triangle_points(int t) const {
    const auto& tri = triangles_[t];
    return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

double MacroMesh::triangle_area(int t) const {
    const auto p = triangle_points(t);
    return signed_area(p[0], p[1], p[2]);
}

int MacroMesh::find_edge(int a, int b) const {
    if (a < 0 || b < 0 || a >= num_vertices() || b >= num_vertices()) return -1;
    const auto it = edge_lookup_.find(edge_key(a, b));
    return it == edge_lookup_.end() ? -1 : it->second;
}

Vec2 MacroMesh::outward_normal(int e) const {
    const Edge& edge = edges_[e];
    const Vec2 a = vertices_[edge.verts[0]];
    const Vec2 b = vertices_[edge.verts[1]];
    const Vec2 d = b - a;
    Vec2 n = Vec2{d.y, -d.x} / norm(d);
    const auto& tri = triangles_[edge.tris[0]];
    int opposite = tri[0];
    for (int v : tri) {
        if (v != edge.verts[0] && v != edge.verts[1]) opposite = v;
    }
    if (dot(n, vertices_[opposite] - a) > 0.0) n = -n;
    return n;
}

double MacroMesh::edge_length(int e) const {
    const Edge& edge = edges_[e];
    return norm(vertices_[edge.verts[1]] - vertices_[edge.verts[0]]);
}

bool operator==(const MacroMesh& a, const MacroMesh& b) {
    if (a.vertices_ != b.vertices_ || a.triangles_ != b.triangles_) return false;
    if (a.edges_.size() != b.edges_.size()) return false;
    for (std::size_t i = 0; i < a.edges_.size(); ++i) {
        const Edge& x = a.edges_[i];
        const Edge& y = b.edges_[i];
        if (x.verts != y.verts || x.tris != y.tris || x.incidence != y.incidence || x.tag != y.tag)
            return false;
    }
    return true;
}

MacroMesh generate_rectangle_mesh(int nx, int ny, Vec2 lo, Vec2 hi) {
    if (nx < 1 || ny < 1) throw ConfigError("rectangle mesh needs at least one cell per direction");
    std::vector<Vec2> verts;
    verts.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const double s = static_cast<double>(i) / nx;
            const double t = static_cast<double>(j) / ny;
            verts.push_back({lo.x + s * (hi.x - lo.x), lo.y + t * (hi.y - lo.y)});
        }
    }
    const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            tris.push_back({a, b, c});
            tris.push_back({a, c, d});
        }
    }
    std::vector<std::pair<std::array<int, 2>, std::string>> tags;
    for (int i = 0; i < nx; ++i) {
        tags.push_back({{id(i, 0), id(i + 1, 0)}, "bottom"});
        tags.push_back({{id(i, ny), id(i + 1, ny)}, "top"});
    }
    for (int j = 0; j < ny; ++j) {
        tags.push_back({{id(0, j), id(0, j + 1)}, "left"});
        tags.push_back({{id(nx, j), id(nx, j + 1)}, "right"});
    }
    return MacroMesh(std::move(verts), std::move(tris), tags);
}

MacroMesh generate_unit_square_mesh(int n) {
    if (n < 1) throw ConfigError("unit square mesh needs n >= 1");
    return generate_rectangle_mesh(n, n, {0.0, 0.0}, {1.0, 1.0});
}

MacroMesh generate_cook_mesh(int n) {
    if (n < 1) throw ConfigError("Cook mesh needs n >= 1");
    constexpr Vec2 p0{0.0, 0.0}, p1{48.0, 44.0}, p2{48.0, 60.0}, p3{0.0, 44.0};
    std::vector<Vec2> verts;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const double s = static_cast<double>(i) / n;
            const double t = static_cast<double>(j) / n;
            verts.push_back((1 - s) * (1 - t) * p0 + s * (1 - t) * p1 + s * t * p2 + (1 - s) * t * p3);
        }
    }
    const auto id = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            tris.push_back({a, b, c});
            tris.push_back({a, c, d});
        }
    }
    std::vector<std::pair<std::array<int, 2>, std::string>> tags;
    for (int i = 0; i < n; ++i) {
        tags.push_back({{id(i, 0), id(i + 1, 0)}, "traction-free"});
        tags.push_back({{id(i, n), id(i + 1, n)}, "traction-free"});
    }
    for (int j = 0; j < n; ++j) {
        tags.push_back({{id(0, j), id(0, j + 1)}, "clamped"});
        tags.push_back({{id(n, j), id(n, j + 1)}, "loaded"});
    }
    return MacroMesh(std::move(verts), std::move(tris), tags);
}

// ---------------------------------------------------------------------------
// Text format

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    /// Next non-blank line split into tokens; empty at end of input.
    std::vector<std::string> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            std::istringstream ss(line);
            std::vector<std::string> tokens;
            for (std::string tok; ss >> tok;) tokens.push_back(tok);
            if (!tokens.empty()) return tokens;
        }
        ++line_no_;
        return {};
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw MeshError("line " + std::to_string(line_no_) + ": " + msg);
    }

    int line() const { return line_no_; }

private:
    std::istream& in_;
    int line_no_ = 0;
};

template <typename T>
T parse_number(const LineReader& reader, const std::string& tok) {
    T value{};
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) reader.fail("cannot parse '" + tok + "'");
    return value;
}

int parse_count(LineReader& reader, const std::string& keyword) {
    const auto tokens = reader.next();
    if (tokens.size() != 2 || tokens[0] != keyword) reader.fail("expected '" + keyword + " <count>'");
    const int count = parse_number<int>(reader, tokens[1]);
    if (count < 0) reader.fail("negative count");
    return count;
}

void write_double(std::ostream& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, res.ptr - buf);
}

}  // namespace

MacroMesh read_mesh(std::istream& in, std::vector<std::string>* warnings) {
    LineReader reader(in);
    const auto header = reader.next();
    if (header.size() != 2 || header[0] != "mce-mesh" || header[1] != "1") {
        reader.fail("expected header 'mce-mesh 1'");
    }

    const int nv = parse_count(reader, "vertices");
    std::vector<Vec2> verts(static_cast<std::size_t>(nv));
    for (auto& v : verts) {
        const auto tok = reader.next();
        if (tok.size() != 2) reader.fail("expected 'x y'");
        v = {parse_number<double>(reader, tok[0]), parse_number<double>(reader, tok[1])};
    }

    const int nt = parse_count(reader, "triangles");
    std::vector<std::array<int, 3>> tris(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) {
        const auto tok = reader.next();
        if (tok.size() != 3) reader.fail("expected 'i j k'");
        for (int k = 0; k < 3; ++k) {
            const int idx = parse_number<int>(reader, tok[k]);
            if (idx < 0 || idx >= nv) {
                reader.fail("vertex index " + std::to_string(idx) + " out of range [0, " +
                            std::to_string(nv) + ")");
            }
            tris[t][k] = idx;
        }
        auto& tri = tris[t];
        if (signed_area(verts[tri[0]], verts[tri[1]], verts[tri[2]]) < 0.0) {
            std::swap(tri[1], tri[2]);
            if (warnings) {
                warnings->push_back("line " + std::to_string(reader.line()) + ": triangle " +
                                    std::to_string(t) + " was clockwise and has been reoriented");
            }
        }
    }

    std::vector<std::pair<std::array<int, 2>, std::string>> tags;
    const auto tok = reader.next();
    if (!tok.empty()) {
        if (tok.size() != 2 || tok[0] != "boundary") reader.fail("expected 'boundary <count>'");
        const int nb = parse_number<int>(reader, tok[1]);
        for (int b = 0; b < nb; ++b) {
            const auto line = reader.next();
            if (line.size() != 3) reader.fail("expected 'i j tag'");
            const int i = parse_number<int>(reader, line[0]);
            const int j = parse_number<int>(reader, line[1]);
            if (i < 0 || i >= nv || j < 0 || j >= nv) reader.fail("boundary vertex index out of range");
            tags.push_back({{i, j}, line[2]});
        }
    }

    try {
        return MacroMesh(std::move(verts), std::move(tris), tags);
    } catch (const MeshError& e) {
        throw MeshError(std::string("boundary section: ") + e.what());
    }
}

void write_mesh(std::ostream& out, const MacroMesh& mesh) {
    out << "mce-mesh 1\n";
    out << "vertices " << mesh.num_vertices() << '\n';
    for (const auto& v : mesh.vertices()) {
        write_double(out, v.x);
        out << ' ';
        write_double(out, v.y);
        out << '\n';
    }
    out << "triangles " << mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "boundary " << mesh.num_boundary_edges() << '\n';
    for (const auto& e : mesh.edges()) {
        if (e.on_boundary()) out << e.verts[0] << ' ' << e.verts[1] << ' ' << e.tag << '\n';
    }
}

std::vector<std::string> validate_mesh(const MacroMesh& mesh) {
    std::vector<std::string> report;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double area = mesh.triangle_area(t);
        if (area < 0.0) {
            report.push_back("negative area at triangle " + std::to_string(t));
        } else if (area == 0.0) {
            report.push_back("zero area at triangle " + std::to_string(t));
        }
    }
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        if (edge.verts[0] == edge.verts[1] || mesh.edge_length(e) == 0.0) {
            report.push_back("degenerate edge " + std::to_string(e));
        }
        if (edge.incidence > 2) {
            report.push_back("edge " + std::to_string(e) + " has " + std::to_string(edge.incidence) +
                             " incident triangles");
        }
        if (edge.on_boundary() == edge.tag.empty()) {
            report.push_back("edge " + std::to_string(e) + " boundary tag inconsistent with incidence");
        }
    }
    // A hanging vertex shows up as a vertex in the open interior of a boundary-like edge.
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        if (!edge.on_boundary()) continue;
        const Vec2 a = mesh.vertex(edge.verts[0]);
        const Vec2 b = mesh.vertex(edge.verts[1]);
        const double len2 = dot(b - a, b - a);
        if (len2 == 0.0) continue;
        for (int v = 0; v < mesh.num_vertices(); ++v) {
            if (v == edge.verts[0] || v == edge.verts[1]) continue;
            const Vec2 p = mesh.vertex(v);
            const double r = dot(p - a, b - a) / len2;
            const double dist = std::abs(cross(b - a, p - a)) / std::sqrt(len2);
            if (r > 1e-12 && r < 1.0 - 1e-12 && dist <= 1e-12 * std::sqrt(len2)) {
                report.push_back("hanging vertex " + std::to_string(v) + " on edge " + std::to_string(e));
            }
        }
    }
    return report;
}

}  // namespace mce
