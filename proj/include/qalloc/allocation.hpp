#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "qalloc/calibration.hpp"
#include "qalloc/topology.hpp"

namespace qalloc {

struct AllocationRequest {
  std::size_t size;       ///< qubits needed, >= 1
  QubitSubset available;  ///< qubits not yet taken this round
};

/// A successful allocation. The score is the attractor's CFM for Greedy and
/// the partition's CRI for COMDAP.
struct Partition {
  QubitSubset members;
  double score;
};

/// Disjoint cover of the available qubits, each community connected.
/// Communities are ordered by smallest member, members ascending.
using CommunitySet = std::vector<QubitSubset>;

enum class AllocatorKind { Greedy, Comdap };
std::string_view to_string(AllocatorKind kind);
AllocatorKind parse_allocator(std::string_view name);  ///< throws ConfigError

/// Louvain edge weights: Fidelity uses max(0, 1 − cnot_error), Uniform uses 1.
enum class EdgeWeighting { Fidelity, Uniform };
std::string_view to_string(EdgeWeighting w);
EdgeWeighting parse_edge_weighting(std::string_view name);  ///< throws ConfigError

/// How COMDAP cuts a community down to the requested size. Exact enumerates
/// every connected subset and is limited to pools of at most 12 qubits.
enum class ExtractionMode { Greedy, Exact };

struct ComdapOptions {
  EdgeWeighting weighting = EdgeWeighting::Fidelity;
  ExtractionMode extraction = ExtractionMode::Greedy;
};

/// Composite Fidelity Metric: degree + (1 − (avg CNOT error + readout error)).
double cfm(const CouplingGraph& g, const CalibrationSnapshot& snap, Qubit q);

/// Attractor-node greedy allocation. Starts at the available qubit with the
/// highest CFM and repeatedly adds the best-CFM available neighbour of the
/// partition. Returns nullopt when the frontier empties before `size` is
/// reached; the scheduler treats that as "defer this job".
std::optional<Partition> greedy_allocate(const CouplingGraph& g, const CalibrationSnapshot& snap,
                                         const AllocationRequest& req);

/// Deterministic Louvain modularity optimisation on the subgraph induced by
/// `available`. Nodes are visited in ascending order and each moves to the
/// neighbouring community with the largest strictly positive gain. Communities
/// that end up disconnected are split into their connected pieces.
CommunitySet louvain(const CouplingGraph& g, const CalibrationSnapshot& snap, const QubitSubset& available,
                     EdgeWeighting weighting = EdgeWeighting::Fidelity);

/// Connectivity and Reliability Index of s, normalised by the same quantity
/// over the whole device (alpha = 1). Throws DataError if s is disconnected.
double cri(const CouplingGraph& g, const CalibrationSnapshot& snap, const QubitSubset& s);

/// Connected subset of `pool` with `size` qubits. Greedy mode grows from the
/// pool's best-CFM qubit, each step taking the candidate with the most edges
/// into the subset (then higher CFM, then lower index). Exact mode returns a
/// subset with the maximum induced edge count (then higher CRI, then
/// lexicographically smallest). `pool` must induce a connected subgraph.
QubitSubset extract_dense_subset(const CouplingGraph& g, const CalibrationSnapshot& snap, const QubitSubset& pool,
                                 std::size_t size, ExtractionMode mode = ExtractionMode::Greedy);

/// Community-based allocation:
///   1. a community of exactly the requested size (highest CRI) is returned verbatim;
///   2. otherwise a dense subset is cut from each larger community, best CRI wins;
///   3. otherwise communities are merged outward from the highest-CRI one, taking
///      adjacent communities by descending CRI, and step 2 runs on the merged set.
/// A one-qubit request with no singleton community takes the highest-CFM qubit.
std::optional<Partition> comdap_allocate(const CouplingGraph& g, const CalibrationSnapshot& snap,
                                         const AllocationRequest& req, const ComdapOptions& options = {});

std::optional<Partition> allocate(AllocatorKind kind, const CouplingGraph& g, const CalibrationSnapshot& snap,
                                  const AllocationRequest& req, const ComdapOptions& options = {});

}  // namespace qalloc
