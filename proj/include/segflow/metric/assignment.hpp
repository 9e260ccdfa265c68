#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace segflow {

// Minimum-cost perfect assignment on a dense n x n row-major cost matrix
// (shortest augmenting paths with potentials, O(n^3)). Returns col[i], the
// column matched to row i.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n);

} // namespace segflow
