#pragma once
// Random placement problems shaped like the refiner's: a poor element's vertices plus nearby
// sites, picking region intersected with petal/snow globe, and a few forbidden regions.

#include <random>

#include "globemesh/optimizer.hpp"
#include "globemesh/quality.hpp"
#include "globemesh/regions.hpp"

namespace testing_support {

using namespace globemesh;

inline PlacementProblem random_problem(int dim, std::mt19937_64& rng, int max_avoid = 3) {
    std::uniform_real_distribution<double> u(-1, 1);
    const double alpha = dim == 2 ? 1.05 : 1.2;
    const double rho_star = dim == 2 ? std::sqrt(5.0) / 2 : 2.0;
    while (true) {
        std::vector<Point> el(dim + 1);
        for (auto& p : el) p = {u(rng), u(rng), dim == 3 ? u(rng) : 0.0};
        const auto m = measure_or_degenerate(el);
        if (m.degenerate || m.rho < 1.5 || m.rho > 6.0) continue;
        PlacementProblem pr;
        pr.dim = dim;
        pr.sites = el;
        std::uniform_int_distribution<int> extra(0, dim == 3 ? 4 : 3);
        const int ne = extra(rng);
        for (int i = 0; i < ne; ++i) {
            Point d{u(rng), u(rng), dim == 3 ? u(rng) : 0.0};
            if (norm(d) == 0) continue;
            pr.sites.push_back(m.circumcenter + (m.circumradius * (1.0 + 0.5 * std::abs(u(rng)))) * normalized(d));
        }
        pr.feasible.constraints.push_back(picking_constraint(m.circumcenter, m.rho, m.shortest_edge, alpha));
        std::vector<int> ids(dim + 1);
        for (int i = 0; i <= dim; ++i) ids[i] = i;
        if (dim == 2) {
            const auto e = shortest_edge(el, ids);
            const int apex = 3 - e[0] - e[1];
            pr.feasible.constraints.push_back(Constraint::inside(petal(el[e[0]], el[e[1]], rho_star, el[apex])));
        } else {
            const auto fc = smallest_facet(el, ids);
            const Point f[] = {el[fc.facet[0]], el[fc.facet[1]], el[fc.facet[2]]};
            if (auto g = snow_globe(f, el[fc.opposite], rho_star)) pr.feasible.constraints.push_back(Constraint::inside(*g));
        }
        if (dim == 3 && max_avoid > 0) {
            std::uniform_int_distribution<int> na(0, max_avoid);
            const int n = na(rng);
            const auto ball = *pr.feasible.bounding_ball();
            for (int i = 0; i < n; ++i) {
                const Point c = ball.center + (0.7 * ball.radius) * Point{u(rng), u(rng), u(rng)};
                const double s = 0.3 * m.shortest_edge;
                const Point b[] = {c + s * Point{u(rng), u(rng), u(rng)}, c + s * Point{u(rng), u(rng), u(rng)},
                                   c + s * Point{u(rng), u(rng), u(rng)}};
                if (triangle_area(b[0], b[1], b[2]) < 0.02 * s * s) continue;
                auto f = forbidden_region(b, rho_star, 0.05);
                f.base = {100 + 3 * i, 101 + 3 * i, 102 + 3 * i};
                pr.avoid.push_back(f);
            }
        }
        return pr;
    }
}

}  // namespace testing_support
