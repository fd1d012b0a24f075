#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qalloc/allocation.hpp"
#include "qalloc/calibration.hpp"
#include "qalloc/topology.hpp"

namespace qalloc {

enum class GateKind { OneQubit, TwoQubit, Measure };

/// Logical gate. For TwoQubit, a is the control and b the target; other kinds use a only.
struct Gate {
  GateKind kind;
  Qubit a = 0;
  Qubit b = 0;

  friend bool operator==(const Gate&, const Gate&) = default;
};

struct LogicalCircuit {
  std::size_t qubit_count = 0;
  std::vector<Gate> gates;

  /// Throws DataError if any index is out of range or a two-qubit gate acts on one qubit.
  void validate() const;
  std::size_t two_qubit_gate_count() const;

  friend bool operator==(const LogicalCircuit&, const LogicalCircuit&) = default;
};

/// Parses the supported QASM subset: one `qreg` and at most one `creg`,
/// gates h x y z s t rx ry rz cx, `measure q[i] -> c[j];`, and `//` comments.
/// The OPENQASM header and `include "qelib1.inc";` are accepted and ignored.
/// Throws ParseError with the offending line.
LogicalCircuit parse_qasm_subset(std::string_view text);

/// Emits the circuit in the same subset (one-qubit gates are written as `h`).
std::string to_qasm(const LogicalCircuit& c);

/// logical → physical
using Layout = std::vector<Qubit>;

enum class PhysOpKind { OneQubit, Cnot, Measure };

struct PhysicalOp {
  PhysOpKind kind;
  Qubit p0 = 0;
  Qubit p1 = 0;
  bool routing = false;  ///< CNOT belonging to an inserted SWAP
};

struct RoutedCircuit {
  std::vector<Qubit> partition;  ///< physical qubits available to this job
  Layout initial_layout;
  Layout final_layout;
  std::vector<PhysicalOp> ops;
  std::size_t swap_count = 0;

  std::size_t cnot_count() const;
};

/// Busiest logical qubits first, each placed on the unused partition qubit
/// with the most already-placed interaction partners adjacent to it, then
/// highest CFM, then lowest index. Throws std::invalid_argument if
/// |partition| != circuit.qubit_count.
Layout initial_layout(const LogicalCircuit& c, const QubitSubset& partition, const CouplingGraph& g,
                      const CalibrationSnapshot& reported);

/// Shortest-path SWAP routing confined to the partition. A two-qubit gate on
/// non-adjacent qubits moves the control's carrier along a shortest path inside
/// the partition until it neighbours the target; each SWAP is three CNOTs.
/// Throws DataError if the partition is disconnected.
RoutedCircuit route(const LogicalCircuit& c, const Layout& layout, const QubitSubset& partition,
                    const CouplingGraph& g);

/// ASAP layer count; every op occupies its qubits for one layer.
std::size_t depth(const RoutedCircuit& r);

/// Analytic success probability against the true error rates: the product of
/// (1 − cnot error) over emitted CNOTs and (1 − readout error) over measured
/// physical qubits. One-qubit gates are error-free.
double pst_estimate(const RoutedCircuit& r, const CouplingGraph& g, const CalibrationSnapshot& truth);

}  // namespace qalloc
