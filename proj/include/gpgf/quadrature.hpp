#pragma once

// Simplex quadrature via the Grundmann-Moller construction: arbitrary odd
// degree in any dimension, points given in barycentric coordinates, weights
// normalized to sum to 1 (element integrals multiply by the element volume).

#include <cmath>
#include <vector>

#include "gpgf/common.hpp"

namespace gpgf {

struct QuadratureRule {
    int dim = 1;
    int exactness_degree = 1;
    std::vector<std::array<double, 4>> points;  // barycentric, dim+1 used entries
    std::vector<double> weights;                // sum to 1

    int size() const { return static_cast<int>(weights.size()); }
};

namespace detail {

inline void compositions(int total, int parts, std::array<int, 4>& cur, int pos,
                         std::vector<std::array<int, 4>>& out) {
    if (pos == parts - 1) {
        cur[pos] = total;
        out.push_back(cur);
        return;
    }
    for (int k = 0; k <= total; ++k) {
        cur[pos] = k;
        compositions(total - k, parts, cur, pos + 1, out);
    }
}

}  // namespace detail

inline QuadratureRule simplex_rule(int dim, int degree) {
    const int s = std::max(0, (degree - 1 + 1) / 2);  // ceil((degree-1)/2)
    const int d = 2 * s + 1;                          // realized degree >= requested
    QuadratureRule rule;
    rule.dim = dim;
    rule.exactness_degree = d;

    auto factorial = [](int k) {
        long double f = 1.0L;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };

    long double wsum = 0.0L;
    for (int i = 0; i <= s; ++i) {
        const int denom = d + dim - 2 * i;
        long double w = std::pow(2.0L, -2.0L * s) * std::pow((long double)denom, (long double)d) /
                        (factorial(i) * factorial(d + dim - i));
        if (i % 2 == 1) w = -w;
        std::vector<std::array<int, 4>> betas;
        std::array<int, 4> cur{0, 0, 0, 0};
        detail::compositions(s - i, dim + 1, cur, 0, betas);
        for (const auto& beta : betas) {
            std::array<double, 4> pt{0.0, 0.0, 0.0, 0.0};
            for (int j = 0; j <= dim; ++j) pt[j] = (2.0 * beta[j] + 1.0) / denom;
            rule.points.push_back(pt);
            rule.weights.push_back(static_cast<double>(w));
            wsum += w;
        }
    }
    for (auto& w : rule.weights) w = static_cast<double>(w / wsum);
    return rule;
}

}  // namespace gpgf
