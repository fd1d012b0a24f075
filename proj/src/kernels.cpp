#include "qalloc/kernels.hpp"

#include <algorithm>
#include <cstdint>

#ifdef QALLOC_HAVE_OPENMP
#include <omp.h>
#endif

namespace qalloc::kernels {

namespace {

void bfs_from(std::span<const std::vector<Qubit>> adjacency, Qubit source, std::span<int> out,
              std::vector<Qubit>& queue) {
  std::fill(out.begin(), out.end(), kUnreachable);
  queue.clear();
  out[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Qubit u = queue[head];
    for (Qubit w : adjacency[u]) {
      if (out[w] == kUnreachable) {
        out[w] = out[u] + 1;
        queue.push_back(w);
      }
    }
  }
}

}  // namespace

DistanceMatrix bfs_all_pairs(std::span<const std::vector<Qubit>> adjacency) {
  const auto n = static_cast<std::int64_t>(adjacency.size());
  DistanceMatrix dist(adjacency.size(), kUnreachable);
#ifdef QALLOC_HAVE_OPENMP
#pragma omp parallel if (n >= 128)
#endif
  {
    std::vector<Qubit> queue;
    queue.reserve(adjacency.size());
#ifdef QALLOC_HAVE_OPENMP
#pragma omp for schedule(static)
#endif
    for (std::int64_t s = 0; s < n; ++s) {
      bfs_from(adjacency, static_cast<Qubit>(s), dist.row(static_cast<Qubit>(s)), queue);
    }
  }
  return dist;
}

namespace serial {

DistanceMatrix bfs_all_pairs(std::span<const std::vector<Qubit>> adjacency) {
  DistanceMatrix dist(adjacency.size(), kUnreachable);
  std::vector<Qubit> queue;
  queue.reserve(adjacency.size());
  for (std::size_t s = 0; s < adjacency.size(); ++s) {
    bfs_from(adjacency, static_cast<Qubit>(s), dist.row(static_cast<Qubit>(s)), queue);
  }
  return dist;
}

DistanceMatrix floyd_warshall(std::size_t n, std::span<const Edge> edges) {
  DistanceMatrix dist(n, kUnreachable);
  for (std::size_t i = 0; i < n; ++i) dist.at(static_cast<Qubit>(i), static_cast<Qubit>(i)) = 0;
  for (const Edge& e : edges) {
    dist.at(e.u, e.v) = 1;
    dist.at(e.v, e.u) = 1;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const int ik = dist(static_cast<Qubit>(i), static_cast<Qubit>(k));
      if (ik == kUnreachable) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const int kj = dist(static_cast<Qubit>(k), static_cast<Qubit>(j));
        if (kj == kUnreachable) continue;
        int& ij = dist.at(static_cast<Qubit>(i), static_cast<Qubit>(j));
        ij = std::min(ij, ik + kj);
      }
    }
  }
  return dist;
}

}  // namespace serial

int max_threads() {
#ifdef QALLOC_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace qalloc::kernels
