#include "slideeval/assignment.hpp"

#include <limits>

namespace slideeval {

// Shortest augmenting path formulation; index 0 is a sentinel column.
std::vector<std::size_t> solve_assignment(const CostMatrix& cost) {
    const std::size_t n = cost.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);

    for (std::size_t row = 1; row <= n; ++row) {
        owner[0] = row;
        std::size_t col0 = 0;
        std::vector<double> min_slack(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[col0] = true;
            const std::size_t r = owner[col0];
            double delta = inf;
            std::size_t col1 = 0;
            for (std::size_t c = 1; c <= n; ++c) {
                if (used[c]) continue;
                const double slack = cost(r - 1, c - 1) - u[r] - v[c];
                if (slack < min_slack[c]) {
                    min_slack[c] = slack;
                    way[c] = col0;
                }
                if (min_slack[c] < delta) {
                    delta = min_slack[c];
                    col1 = c;
                }
            }
            for (std::size_t c = 0; c <= n; ++c) {
                if (used[c]) {
                    u[owner[c]] += delta;
                    v[c] -= delta;
                } else {
                    min_slack[c] -= delta;
                }
            }
            col0 = col1;
        } while (owner[col0] != 0);
        do {
            const std::size_t prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
        } while (col0 != 0);
    }

    std::vector<std::size_t> assignment(n, 0);
    for (std::size_t c = 1; c <= n; ++c) {
        if (owner[c] != 0) assignment[owner[c] - 1] = c - 1;
    }
    return assignment;
}

}  // namespace slideeval
