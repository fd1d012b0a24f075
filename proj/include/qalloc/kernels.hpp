#pragma once

// Data-parallel kernels. Each OpenMP kernel has a serial counterpart in
// qalloc::kernels::serial that computes the same result; the serial versions
// are the reference for tests and the baseline for bench/.

#include <cstddef>
#include <span>
#include <vector>

#include "qalloc/topology.hpp"

namespace qalloc::kernels {

/// One BFS per source, sources distributed across threads.
DistanceMatrix bfs_all_pairs(std::span<const std::vector<Qubit>> adjacency);

namespace serial {

DistanceMatrix bfs_all_pairs(std::span<const std::vector<Qubit>> adjacency);

/// Floyd–Warshall over the edge list. O(n³); reference only.
DistanceMatrix floyd_warshall(std::size_t n, std::span<const Edge> edges);

}  // namespace serial

/// Threads OpenMP will use for the parallel kernels (1 when built without OpenMP).
int max_threads();

}  // namespace qalloc::kernels
