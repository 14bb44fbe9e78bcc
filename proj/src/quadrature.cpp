#include "fpsi/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace fpsi {

namespace {

// Adds the three permutations of barycentric (a, b, b); weights are given
// relative to the triangle area and scaled here to the reference area 1/2.
void add_orbit3(TriangleRule& rule, double a, double b, double w)
{
    rule.points.push_back({b, b, 0.5 * w});
    rule.points.push_back({a, b, 0.5 * w});
    rule.points.push_back({b, a, 0.5 * w});
}

void add_orbit6(TriangleRule& rule, double a, double b, double c, double w)
{
    std::array<double, 3> l{a, b, c};
    std::sort(l.begin(), l.end());
    do {
        rule.points.push_back({l[1], l[2], 0.5 * w});
    } while (std::next_permutation(l.begin(), l.end()));
}

TriangleRule make_degree5()
{
    TriangleRule rule;
    rule.degree = 5;
    const double s15 = std::sqrt(15.0);
    rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 0.5 * 9.0 / 40.0});
    const double a1 = (6.0 - s15) / 21.0, a2 = (6.0 + s15) / 21.0;
    add_orbit3(rule, 1.0 - 2.0 * a1, a1, (155.0 - s15) / 1200.0);
    add_orbit3(rule, 1.0 - 2.0 * a2, a2, (155.0 + s15) / 1200.0);
    return rule;
}

// Dunavant (1985), degree 9.
TriangleRule make_degree9()
{
    TriangleRule rule;
    rule.degree = 9;
    rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 0.5 * 0.097135796282799});
    add_orbit3(rule, 0.020634961602525, 0.489682519198738, 0.031334700227139);
    add_orbit3(rule, 0.125820817014127, 0.437089591492937, 0.077827541004774);
    add_orbit3(rule, 0.623592928761935, 0.188203535619033, 0.079647738927210);
    add_orbit3(rule, 0.910540973211095, 0.044729513394453, 0.025577675658698);
    add_orbit6(rule, 0.036838412054736, 0.221962989160766, 0.741198598784498, 0.043283539377289);
    return rule;
}

LineRule make_gauss3()
{
    LineRule rule;
    rule.degree = 5;
    const double d = 0.5 * std::sqrt(3.0 / 5.0);
    rule.points = {{0.5 - d, 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 + d, 5.0 / 18.0}};
    return rule;
}

} // namespace

const TriangleRule& triangle_rule_degree5()
{
    static const TriangleRule rule = make_degree5();
    return rule;
}

const TriangleRule& triangle_rule_degree9()
{
    static const TriangleRule rule = make_degree9();
    return rule;
}

const LineRule& gauss3()
{
    static const LineRule rule = make_gauss3();
    return rule;
}

} // namespace fpsi
