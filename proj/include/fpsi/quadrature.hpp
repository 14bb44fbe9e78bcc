#pragma once

#include <vector>

namespace fpsi {

/// Rule on the reference triangle {(r,s): r,s >= 0, r+s <= 1}; weights sum
/// to the reference area 1/2.
struct TriangleRule {
    struct Point {
        double r, s, weight;
    };
    std::vector<Point> points;
    int degree = 0;
};

/// Rule on [0,1]; weights sum to 1.
struct LineRule {
    struct Point {
        double x, weight;
    };
    std::vector<Point> points;
    int degree = 0;
};

/// 7-point rule, exact for degree 5. Used for assembly.
const TriangleRule& triangle_rule_degree5();

/// 19-point rule, exact for degree 9. Used for error norms.
const TriangleRule& triangle_rule_degree9();

/// 3-point Gauss-Legendre, exact for degree 5.
const LineRule& gauss3();

} // namespace fpsi
