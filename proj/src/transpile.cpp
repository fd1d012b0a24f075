#include "qalloc/transpile.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "qalloc/error.hpp"

namespace qalloc {

void LogicalCircuit::validate() const {
  if (qubit_count == 0) throw DataError("circuit has no qubits");
  for (const Gate& g : gates) {
    if (g.a >= qubit_count || (g.kind == GateKind::TwoQubit && g.b >= qubit_count)) {
      throw DataError("gate index outside the circuit's " + std::to_string(qubit_count) + " qubits");
    }
    if (g.kind == GateKind::TwoQubit && g.a == g.b) throw DataError("two-qubit gate with control = target");
  }
}

std::size_t LogicalCircuit::two_qubit_gate_count() const {
  return static_cast<std::size_t>(
      std::count_if(gates.begin(), gates.end(), [](const Gate& g) { return g.kind == GateKind::TwoQubit; }));
}

// ---------------------------------------------------------------------------
// QASM subset parser

namespace {

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space_and_comments();
    if (pos_ >= src_.size()) return {Tok::End, "", line_};
    const char c = src_[pos_];
    const std::size_t start = pos_;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      return {Tok::Ident, std::string(src_.substr(start, pos_ - start)), line_};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() &&
                                                        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
      return {Tok::Number, std::string(src_.substr(start, pos_ - start)), line_};
    }
    if (c == '"') {
      ++pos_;
      while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') ++pos_;
      if (pos_ >= src_.size() || src_[pos_] != '"') throw ParseError(line_, "unterminated string");
      ++pos_;
      return {Tok::String, std::string(src_.substr(start + 1, pos_ - start - 2)), line_};
    }
    if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      pos_ += 2;
      return {Tok::Punct, "->", line_};
    }
    if (std::string_view(";,[]()+-*/^").find(c) != std::string_view::npos) {
      ++pos_;
      return {Tok::Punct, std::string(1, c), line_};
    }
    throw ParseError(line_, std::string("unexpected character '") + c + "'");
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

struct Register {
  std::string name;
  std::size_t size = 0;
};

class QasmParser {
 public:
  explicit QasmParser(std::string_view text) : lex_(text) { advance(); }

  LogicalCircuit parse() {
    bool first = true;
    while (cur_.kind != Tok::End) {
      statement(first);
      first = false;
    }
    if (!qreg_) throw ParseError(cur_.line, "program declares no qreg");
    circuit_.qubit_count = qreg_->size;
    return std::move(circuit_);
  }

 private:
  void advance() { cur_ = lex_.next(); }

  bool at(std::string_view text) const { return cur_.kind != Tok::End && cur_.text == text && cur_.kind != Tok::String; }

  void expect(std::string_view text) {
    if (!at(text)) throw ParseError(cur_.line, "expected '" + std::string(text) + "' but found '" + describe() + "'");
    advance();
  }

  std::string describe() const { return cur_.kind == Tok::End ? "end of input" : cur_.text; }

  std::string identifier() {
    if (cur_.kind != Tok::Ident) throw ParseError(cur_.line, "expected identifier but found '" + describe() + "'");
    std::string s = cur_.text;
    advance();
    return s;
  }

  std::size_t integer() {
    if (cur_.kind != Tok::Number) throw ParseError(cur_.line, "expected integer but found '" + describe() + "'");
    std::size_t v = 0;
    const auto& t = cur_.text;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) throw ParseError(cur_.line, "expected integer, got '" + t + "'");
    advance();
    return v;
  }

  void statement(bool first) {
    const std::size_t line = cur_.line;
    if (cur_.kind != Tok::Ident) throw ParseError(line, "expected statement but found '" + describe() + "'");
    const std::string head = identifier();
    if (head == "OPENQASM") {
      if (!first) throw ParseError(line, "OPENQASM header must come first");
      if (cur_.kind != Tok::Number) throw ParseError(cur_.line, "expected version number");
      advance();
      expect(";");
    } else if (head == "include") {
      if (cur_.kind != Tok::String || cur_.text != "qelib1.inc") {
        throw ParseError(line, "only include \"qelib1.inc\" is supported");
      }
      advance();
      expect(";");
    } else if (head == "qreg" || head == "creg") {
      declaration(head == "qreg" ? qreg_ : creg_, head, line);
    } else if (head == "measure") {
      const Qubit q = operand(qreg_, "qreg", line);
      expect("->");
      operand(creg_, "creg", line);
      expect(";");
      circuit_.gates.push_back({GateKind::Measure, q, 0});
    } else {
      gate(head, line);
    }
  }

  void declaration(std::optional<Register>& reg, const std::string& kind, std::size_t line) {
    if (reg) throw ParseError(line, "only one " + kind + " is supported");
    Register r;
    r.name = identifier();
    expect("[");
    r.size = integer();
    expect("]");
    expect(";");
    if (r.size == 0) throw ParseError(line, kind + " of size 0");
    reg = std::move(r);
  }

  Qubit operand(const std::optional<Register>& reg, const char* kind, std::size_t line) {
    const std::string name = identifier();
    if (!reg) throw ParseError(line, std::string("use of '") + name + "' before any " + kind + " declaration");
    if (name != reg->name) throw ParseError(line, "unknown register '" + name + "'");
    expect("[");
    const std::size_t idx = integer();
    expect("]");
    if (idx >= reg->size) {
      throw ParseError(line, "index " + std::to_string(idx) + " overflows register '" + name + "[" +
                                 std::to_string(reg->size) + "]'");
    }
    return static_cast<Qubit>(idx);
  }

  // Angle expressions are validated and discarded.
  void expression() {
    term();
    while (at("+") || at("-")) {
      advance();
      term();
    }
  }
  void term() {
    factor();
    while (at("*") || at("/") || at("^")) {
      advance();
      factor();
    }
  }
  void factor() {
    if (at("-") || at("+")) {
      advance();
      factor();
    } else if (cur_.kind == Tok::Number) {
      advance();
    } else if (cur_.kind == Tok::Ident && cur_.text == "pi") {
      advance();
    } else if (at("(")) {
      advance();
      expression();
      expect(")");
    } else {
      throw ParseError(cur_.line, "bad angle expression near '" + describe() + "'");
    }
  }

  void gate(const std::string& name, std::size_t line) {
    static constexpr std::string_view kOneQubit[] = {"h", "x", "y", "z", "s", "t"};
    static constexpr std::string_view kRotation[] = {"rx", "ry", "rz"};
    const bool plain = std::find(std::begin(kOneQubit), std::end(kOneQubit), name) != std::end(kOneQubit);
    const bool rotation = std::find(std::begin(kRotation), std::end(kRotation), name) != std::end(kRotation);
    if (!plain && !rotation && name != "cx") throw ParseError(line, "unknown gate '" + name + "'");
    if (rotation) {
      expect("(");
      expression();
      expect(")");
    }
    const Qubit a = operand(qreg_, "qreg", line);
    if (name == "cx") {
      expect(",");
      const Qubit b = operand(qreg_, "qreg", line);
      if (a == b) throw ParseError(line, "cx control and target are both q[" + std::to_string(a) + "]");
      circuit_.gates.push_back({GateKind::TwoQubit, a, b});
    } else {
      circuit_.gates.push_back({GateKind::OneQubit, a, 0});
    }
    expect(";");
  }

  Lexer lex_;
  Token cur_{Tok::End, "", 1};
  std::optional<Register> qreg_;
  std::optional<Register> creg_;
  LogicalCircuit circuit_;
};

}  // namespace

LogicalCircuit parse_qasm_subset(std::string_view text) { return QasmParser(text).parse(); }

std::string to_qasm(const LogicalCircuit& c) {
  std::ostringstream out;
  out << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
  out << "qreg q[" << c.qubit_count << "];\ncreg c[" << c.qubit_count << "];\n";
  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::OneQubit: out << "h q[" << g.a << "];\n"; break;
      case GateKind::TwoQubit: out << "cx q[" << g.a << "],q[" << g.b << "];\n"; break;
      case GateKind::Measure: out << "measure q[" << g.a << "] -> c[" << g.a << "];\n"; break;
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Layout and routing

std::size_t RoutedCircuit::cnot_count() const {
  return static_cast<std::size_t>(
      std::count_if(ops.begin(), ops.end(), [](const PhysicalOp& op) { return op.kind == PhysOpKind::Cnot; }));
}

Layout initial_layout(const LogicalCircuit& c, const QubitSubset& partition, const CouplingGraph& g,
                      const CalibrationSnapshot& reported) {
  if (partition.size() != c.qubit_count) {
    throw std::invalid_argument("layout: partition has " + std::to_string(partition.size()) + " qubits, circuit needs " +
                                std::to_string(c.qubit_count));
  }
  const std::size_t n = c.qubit_count;
  std::vector<std::size_t> participation(n, 0);
  std::vector<std::vector<std::size_t>> interactions(n, std::vector<std::size_t>(n, 0));
  for (const Gate& gate : c.gates) {
    if (gate.kind != GateKind::TwoQubit) continue;
    ++participation[gate.a];
    ++participation[gate.b];
    ++interactions[gate.a][gate.b];
    ++interactions[gate.b][gate.a];
  }
  std::vector<Qubit> logical(n);
  std::iota(logical.begin(), logical.end(), Qubit{0});
  std::stable_sort(logical.begin(), logical.end(),
                   [&](Qubit x, Qubit y) { return participation[x] > participation[y]; });

  const auto phys = partition.sorted();
  std::vector<double> score(g.qubit_count(), 0.0);
  for (Qubit p : phys) score[p] = cfm(g, reported, p);

  constexpr Qubit kUnplaced = std::numeric_limits<Qubit>::max();
  Layout layout(n, kUnplaced);
  std::vector<char> used(g.qubit_count(), 0);
  for (Qubit l : logical) {
    std::optional<Qubit> best;
    std::size_t best_links = 0;
    for (Qubit p : phys) {
      if (used[p]) continue;
      std::size_t links = 0;
      for (Qubit other = 0; other < n; ++other) {
        if (layout[other] != kUnplaced && interactions[l][other] > 0 && g.adjacent(p, layout[other])) {
          links += interactions[l][other];
        }
      }
      if (!best || links > best_links || (links == best_links && score[p] > score[*best])) {
        best = p;
        best_links = links;
      }
    }
    layout[l] = *best;
    used[*best] = 1;
  }
  return layout;
}

namespace {

// Shortest path from src to dst inside the partition; neighbours are explored
// in ascending order, so the path is deterministic.
std::vector<Qubit> partition_path(const CouplingGraph& g, const std::vector<char>& in_partition, Qubit src, Qubit dst) {
  std::vector<Qubit> parent(g.qubit_count(), std::numeric_limits<Qubit>::max());
  std::vector<Qubit> queue{src};
  parent[src] = src;
  for (std::size_t head = 0; head < queue.size() && parent[dst] == std::numeric_limits<Qubit>::max(); ++head) {
    const Qubit u = queue[head];
    for (Qubit w : g.neighbors(u)) {
      if (in_partition[w] && parent[w] == std::numeric_limits<Qubit>::max()) {
        parent[w] = u;
        queue.push_back(w);
      }
    }
  }
  if (parent[dst] == std::numeric_limits<Qubit>::max()) {
    throw DataError("routing: partition does not connect qubits " + std::to_string(src) + " and " + std::to_string(dst));
  }
  std::vector<Qubit> path{dst};
  while (path.back() != src) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

RoutedCircuit route(const LogicalCircuit& c, const Layout& layout, const QubitSubset& partition,
                    const CouplingGraph& g) {
  c.validate();
  if (layout.size() != c.qubit_count || partition.size() != c.qubit_count) {
    throw std::invalid_argument("route: layout, partition and circuit sizes differ");
  }
  if (!induced_connected(g, partition.members())) throw DataError("route: partition is disconnected");
  std::vector<char> in_partition(g.qubit_count(), 0);
  for (Qubit p : partition.members()) in_partition[p] = 1;
  constexpr Qubit kEmpty = std::numeric_limits<Qubit>::max();
  std::vector<Qubit> logical_at(g.qubit_count(), kEmpty);
  for (Qubit l = 0; l < layout.size(); ++l) {
    if (!in_partition[layout[l]] || logical_at[layout[l]] != kEmpty) {
      throw std::invalid_argument("route: layout is not a bijection onto the partition");
    }
    logical_at[layout[l]] = l;
  }

  RoutedCircuit r;
  r.partition.assign(partition.members().begin(), partition.members().end());
  r.initial_layout = layout;
  Layout phys = layout;

  auto swap_physical = [&](Qubit a, Qubit b) {
    r.ops.push_back({PhysOpKind::Cnot, a, b, true});
    r.ops.push_back({PhysOpKind::Cnot, b, a, true});
    r.ops.push_back({PhysOpKind::Cnot, a, b, true});
    ++r.swap_count;
    const Qubit la = logical_at[a];
    const Qubit lb = logical_at[b];
    std::swap(logical_at[a], logical_at[b]);
    if (la != kEmpty) phys[la] = b;
    if (lb != kEmpty) phys[lb] = a;
  };

  for (const Gate& gate : c.gates) {
    switch (gate.kind) {
      case GateKind::OneQubit: r.ops.push_back({PhysOpKind::OneQubit, phys[gate.a], 0, false}); break;
      case GateKind::Measure: r.ops.push_back({PhysOpKind::Measure, phys[gate.a], 0, false}); break;
      case GateKind::TwoQubit: {
        if (!g.adjacent(phys[gate.a], phys[gate.b])) {
          const auto path = partition_path(g, in_partition, phys[gate.a], phys[gate.b]);
          for (std::size_t i = 0; i + 2 < path.size(); ++i) swap_physical(path[i], path[i + 1]);
        }
        r.ops.push_back({PhysOpKind::Cnot, phys[gate.a], phys[gate.b], false});
        break;
      }
    }
  }
  r.final_layout = phys;
  return r;
}

std::size_t depth(const RoutedCircuit& r) {
  Qubit top = 0;
  for (const auto& op : r.ops) top = std::max({top, op.p0, op.kind == PhysOpKind::Cnot ? op.p1 : Qubit{0}});
  std::vector<std::size_t> level(std::size_t{top} + 1, 0);
  std::size_t d = 0;
  for (const auto& op : r.ops) {
    if (op.kind == PhysOpKind::Cnot) {
      const std::size_t l = std::max(level[op.p0], level[op.p1]) + 1;
      level[op.p0] = level[op.p1] = l;
      d = std::max(d, l);
    } else {
      d = std::max(d, ++level[op.p0]);
    }
  }
  return d;
}

double pst_estimate(const RoutedCircuit& r, const CouplingGraph& g, const CalibrationSnapshot& truth) {
  double p = 1.0;
  std::vector<Qubit> measured;
  for (const auto& op : r.ops) {
    if (op.kind == PhysOpKind::Cnot) {
      const auto idx = g.edge_index(op.p0, op.p1);
      if (!idx) throw DataError("pst: CNOT on non-edge (" + std::to_string(op.p0) + "," + std::to_string(op.p1) + ")");
      p *= 1.0 - truth.cnot_error(*idx);
    } else if (op.kind == PhysOpKind::Measure) {
      measured.push_back(op.p0);
    }
  }
  std::sort(measured.begin(), measured.end());
  measured.erase(std::unique(measured.begin(), measured.end()), measured.end());
  for (Qubit q : measured) p *= 1.0 - truth.readout_error(q);
  return p;
}

}  // namespace qalloc
