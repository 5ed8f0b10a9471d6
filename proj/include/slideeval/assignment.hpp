#pragma once

#include <cstddef>
#include <vector>

namespace slideeval {

/// Dense row-major square cost matrix.
class CostMatrix {
public:
    explicit CostMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const { return n_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

private:
    std::size_t n_;
    std::vector<double> data_;
};

/// Minimum-cost perfect assignment (Kuhn-Munkres with row/column potentials,
/// O(n^3)). Returns the column assigned to each row.
std::vector<std::size_t> solve_assignment(const CostMatrix& cost);

}  // namespace slideeval
