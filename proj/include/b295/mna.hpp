#pragma once

// Netlist parsing and ideal-opamp modified nodal analysis over polynomials in s.
//
// Netlist text format, one statement per line:
//
//   R<name> nodeA nodeB value      resistor (ohms)
//   C<name> nodeA nodeB value      capacitor (farads)
//   O<name> in+ in- out            ideal opamp
//   .in node                       ideal voltage source driving `node`
//   .out node                      node whose voltage is the response
//
// `#` starts a comment. Node `0` is ground. Values take an optional
// engineering suffix: p n u m k M.

#include "b295/ratfunc.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace b295::mna {

inline constexpr std::string_view kGround = "0";

class NetlistError : public Error {
 public:
  NetlistError(std::size_t line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  /// 1-based source line, 0 when the problem is not tied to a line.
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Raised when the response degree exceeds kMaxDegree.
class UnsupportedCircuitError : public Error {
 public:
  using Error::Error;
};

class TopologyMismatchError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kMaxDegree = 8;

struct Resistor {
  std::string name, a, b;
  double ohms;
};

struct Capacitor {
  std::string name, a, b;
  double farads;
};

struct IdealOpamp {
  std::string name, in_plus, in_minus, out;
};

using Element = std::variant<Resistor, Capacitor, IdealOpamp>;

struct Netlist {
  /// Non-ground nodes in order of first appearance.
  std::vector<std::string> nodes;
  std::vector<Element> elements;
  std::string input_node;
  std::string output_node;

  /// Checks every structural invariant; throws NetlistError.
  void validate() const;
};

/// Parses a value such as "47n", "15k", "2.2M" or "1e-9".
[[nodiscard]] double parse_value(std::string_view token);

[[nodiscard]] Netlist parse_netlist(std::string_view text);
[[nodiscard]] Netlist load_netlist(const std::string& path);

/// Inverse of parse_netlist up to formatting.
[[nodiscard]] std::string to_text(const Netlist& n);

/// Dense square matrix of polynomials in a scaled frequency variable.
struct PolyMatrix {
  std::size_t size = 0;
  std::vector<Polynomial> entries;  // row-major

  explicit PolyMatrix(std::size_t n = 0) : size(n), entries(n * n) {}
  [[nodiscard]] Polynomial& at(std::size_t r, std::size_t c) { return entries[r * size + c]; }
  [[nodiscard]] const Polynomial& at(std::size_t r, std::size_t c) const { return entries[r * size + c]; }
};

/// The MNA system A(p) x = b(p) for a unit input, in the frequency-scaled
/// variable p = s * time_scale.
///
/// Unknowns are every non-ground node voltage except the driven input,
/// followed by one branch current per opamp. The output voltage, when it is
/// an unknown, is ordered last.
struct MnaSystem {
  PolyMatrix matrix;
  std::vector<Polynomial> rhs;
  std::vector<std::string> unknowns;
  double time_scale = 1.0;
};

[[nodiscard]] MnaSystem assemble(const Netlist& n);

/// V(out)/V(in) by fraction-free (Bareiss) elimination over polynomials.
/// Throws SingularSystemError or UnsupportedCircuitError.
[[nodiscard]] RationalFunction transfer_function(const Netlist& n);

/// Exchanges the roles of the input node and ground on every element, turning
/// the inverting Twin-T bandpass into its noninverting peaking counterpart.
/// Applying it twice restores the original. Requires a single opamp whose
/// non-inverting input is ground or the input node.
[[nodiscard]] Netlist noninverting_variant(const Netlist& n);

}  // namespace b295::mna
