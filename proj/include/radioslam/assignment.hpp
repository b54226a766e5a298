#pragma once

#include "radioslam/types.hpp"

#include <limits>
#include <vector>

namespace radioslam {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

/// Dense cost matrix; +inf marks a forbidden pairing.
using CostMatrix = Mat;

struct Assignment {
    /// Column chosen for each row; -1 only when there are more rows than
    /// columns and the row is left out.
    std::vector<int> row_to_col;
    double cost = 0.0;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Sum of the selected entries, accumulated in row order.
double assignment_cost(const CostMatrix& c, const std::vector<int>& row_to_col);

/// Minimum-cost one-to-one assignment covering min(rows, cols) pairs,
/// by shortest augmenting paths with dual potentials. Throws Infeasible when
/// every complete assignment uses a forbidden entry.
Assignment solve_lap(const CostMatrix& c);

/// The k lowest-cost distinct assignments in non-decreasing cost order
/// (Murty's partitioning). Equal costs are ordered lexicographically by
/// row_to_col. Returns fewer than k when fewer exist; throws Infeasible when
/// none exist.
std::vector<Assignment> kbest(const CostMatrix& c, int k);

}  // namespace radioslam
