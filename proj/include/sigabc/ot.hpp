#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sigabc {

struct TransportEntry {
    std::size_t row;
    std::size_t col;
    std::int64_t mass;
};

struct TransportSolution {
    double cost = 0.0;                 ///< sum of cost * mass over the plan
    std::vector<TransportEntry> plan;  ///< basic cells, zero-mass ones included
    std::size_t pivots = 0;
};

/**
 * Exact balanced transportation problem solved with the primal network
 * simplex on the complete bipartite graph.
 *
 * Masses are integers so flows stay exact and degenerate pivots are detected
 * without tolerances.  `cost` is row-major supply.size() x demand.size().
 * Starts from the north-west corner solution, prices in blocks, and falls back
 * to Bland's rule after a long run of degenerate pivots.
 */
TransportSolution solve_transport(std::span<const std::int64_t> supply,
                                  std::span<const std::int64_t> demand,
                                  std::span<const double> cost);

}  // namespace sigabc
