#include "mce/quadrature.hpp"

#include <string>

#include "mce/error.hpp"

namespace mce {

namespace {

using Rule = std::vector<QuadraturePoint>;

// Weights below are normalized to total 1 and scaled by 1/2 on insertion.
void add_centroid(Rule& r, double w) { r.push_back({{1.0 / 3.0, 1.0 / 3.0}, 0.5 * w}); }

void add_orbit3(Rule& r, double a, double w) {
    const double b = 1.0 - 2.0 * a;
    r.push_back({{a, a}, 0.5 * w});
    r.push_back({{b, a}, 0.5 * w});
    r.push_back({{a, b}, 0.5 * w});
}

void add_orbit6(Rule& r, double a, double b, double w) {
    const double c = 1.0 - a - b;
    for (const auto& p : {Vec2{a, b}, Vec2{b, a}, Vec2{a, c}, Vec2{c, a}, Vec2{b, c}, Vec2{c, b}}) {
        r.push_back({p, 0.5 * w});
    }
}

std::array<Rule, 7> make_rules() {
    std::array<Rule, 7> rules;
    add_centroid(rules[1], 1.0);

    add_orbit3(rules[2], 1.0 / 6.0, 1.0 / 3.0);

    // Degree 3 reuses the positive 6-point degree-4 rule.
    add_orbit3(rules[4], 0.44594849091596488632, 0.22338158967801146570);
    add_orbit3(rules[4], 0.09157621350977074346, 0.10995174365532186764);
    rules[3] = rules[4];

    add_centroid(rules[5], 0.225);
    add_orbit3(rules[5], 0.47014206410511508977, 0.13239415278850618074);
    add_orbit3(rules[5], 0.10128650732345633880, 0.12593918054482715260);

    add_orbit3(rules[6], 0.24928674517091042129, 0.11678627572637936603);
    add_orbit3(rules[6], 0.06308901449150222834, 0.05084490637020681692);
    add_orbit6(rules[6], 0.31035245103378440542, 0.05314504984481694735, 0.08285107561837357519);
    return rules;
}

}  // namespace

const std::vector<QuadraturePoint>& quadrature_rule(int degree) {
    static const auto rules = make_rules();
    if (degree < 1 || degree > 6) {
        throw ConfigError("unsupported triangle quadrature degree " + std::to_string(degree));
    }
    return rules[degree];
}

const std::vector<std::array<double, 2>>& gauss_legendre(int points) {
    // Nodes on [-1, 1] mapped to [0, 1]: s = (1 + x) / 2, w = w_x / 2.
    static const auto rules = [] {
        const std::vector<std::vector<std::array<double, 2>>> ref = {
            {},
            {{0.0, 2.0}},
            {{-0.57735026918962576451, 1.0}, {0.57735026918962576451, 1.0}},
            {{-0.77459666924148337704, 5.0 / 9.0}, {0.0, 8.0 / 9.0}, {0.77459666924148337704, 5.0 / 9.0}},
            {{-0.86113631159405257522, 0.34785484513745385737},
             {-0.33998104358485626480, 0.65214515486254614263},
             {0.33998104358485626480, 0.65214515486254614263},
             {0.86113631159405257522, 0.34785484513745385737}},
            {{-0.90617984593866399280, 0.23692688505618908751},
             {-0.53846931010568309104, 0.47862867049936646804},
             {0.0, 0.56888888888888888889},
             {0.53846931010568309104, 0.47862867049936646804},
             {0.90617984593866399280, 0.23692688505618908751}},
        };
        std::vector<std::vector<std::array<double, 2>>> out(ref.size());
        for (std::size_t n = 0; n < ref.size(); ++n) {
            for (const auto& [x, w] : ref[n]) out[n].push_back({0.5 * (1.0 + x), 0.5 * w});
        }
        return out;
    }();
    if (points < 1 || points > 5) {
        throw ConfigError("unsupported Gauss-Legendre point count " + std::to_string(points));
    }
    return rules[points];
}

}  // namespace mce
