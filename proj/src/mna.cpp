#include "b295/mna.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace b295::mna {

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class F>
void for_each_node(const Element& e, F&& f) {
  std::visit(
      [&](const auto& el) {
        using T = std::decay_t<decltype(el)>;
        if constexpr (std::is_same_v<T, IdealOpamp>) {
          f(el.in_plus);
          f(el.in_minus);
          f(el.out);
        } else {
          f(el.a);
          f(el.b);
        }
      },
      e);
}

const std::string& name_of(const Element& e) {
  return std::visit([](const auto& el) -> const std::string& { return el.name; }, e);
}

std::vector<std::string> collect_nodes(const std::vector<Element>& elements) {
  std::vector<std::string> nodes;
  std::set<std::string> seen;
  for (const auto& e : elements)
    for_each_node(e, [&](const std::string& node) {
      if (node != kGround && seen.insert(node).second) nodes.push_back(node);
    });
  return nodes;
}

}  // namespace

double parse_value(std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr == first) throw Error(fmt::format("bad value '{}'", token));
  std::string_view suffix(ptr, static_cast<std::size_t>(last - ptr));
  if (!suffix.empty()) {
    if (suffix.size() != 1) throw Error(fmt::format("bad value suffix in '{}'", token));
    switch (suffix[0]) {
      case 'p': value *= 1e-12; break;
      case 'n': value *= 1e-9; break;
      case 'u': value *= 1e-6; break;
      case 'm': value *= 1e-3; break;
      case 'k': case 'K': value *= 1e3; break;
      case 'M': value *= 1e6; break;
      default: throw Error(fmt::format("bad value suffix in '{}'", token));
    }
  }
  if (!std::isfinite(value)) throw Error(fmt::format("bad value '{}'", token));
  return value;
}

void Netlist::validate() const {
  if (input_node.empty()) throw NetlistError(0, "missing .in directive");
  if (output_node.empty()) throw NetlistError(0, "missing .out directive");
  if (input_node == kGround) throw NetlistError(0, "input cannot be ground");

  const std::set<std::string> declared(nodes.begin(), nodes.end());
  if (!declared.count(input_node)) throw NetlistError(0, "undeclared node '" + input_node + "'");
  if (output_node != kGround && !declared.count(output_node))
    throw NetlistError(0, "undeclared node '" + output_node + "'");

  bool has_ground = false;
  std::set<std::string> names;
  std::set<std::string> driven;
  for (const auto& e : elements) {
    if (!names.insert(name_of(e)).second) throw NetlistError(0, "duplicate element '" + name_of(e) + "'");
    for_each_node(e, [&](const std::string& node) {
      if (node == kGround) has_ground = true;
      else if (!declared.count(node)) throw NetlistError(0, "undeclared node '" + node + "'");
    });
    if (const auto* op = std::get_if<IdealOpamp>(&e)) {
      if (op->out == kGround || op->out == input_node)
        throw NetlistError(0, "opamp '" + op->name + "' output shorted to a source");
      if (!driven.insert(op->out).second)
        throw NetlistError(0, "node '" + op->out + "' driven by more than one opamp");
    }
    if (const auto* r = std::get_if<Resistor>(&e); r && !(r->ohms > 0.0))
      throw NetlistError(0, "resistor '" + r->name + "' must be positive");
    if (const auto* c = std::get_if<Capacitor>(&e); c && !(c->farads > 0.0))
      throw NetlistError(0, "capacitor '" + c->name + "' must be positive");
  }
  if (!has_ground) throw NetlistError(0, "no element connects to ground");
}

Netlist parse_netlist(std::string_view text) {
  Netlist n;
  std::optional<std::size_t> in_line, out_line;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = tokenize(line);
    if (tok.empty()) continue;

    const std::string_view head = tok[0];
    try {
      if (head[0] == '.') {
        if (head != ".in" && head != ".out") throw Error(fmt::format("unknown directive '{}'", head));
        if (tok.size() != 2) throw Error(fmt::format("{} takes exactly one node", head));
        if (head == ".in") {
          if (in_line) throw Error("duplicate .in directive");
          n.input_node = tok[1];
          in_line = line_no;
        } else {
          if (out_line) throw Error("duplicate .out directive");
          n.output_node = tok[1];
          out_line = line_no;
        }
        continue;
      }
      const char kind = static_cast<char>(std::toupper(static_cast<unsigned char>(head[0])));
      if (tok.size() != 4) throw Error(fmt::format("element '{}' needs three fields", head));
      std::string name(head);
      if (kind == 'R') {
        double v = parse_value(tok[3]);
        if (!(v > 0.0)) throw Error("resistance must be positive");
        n.elements.emplace_back(Resistor{name, std::string(tok[1]), std::string(tok[2]), v});
      } else if (kind == 'C') {
        double v = parse_value(tok[3]);
        if (!(v > 0.0)) throw Error("capacitance must be positive");
        n.elements.emplace_back(Capacitor{name, std::string(tok[1]), std::string(tok[2]), v});
      } else if (kind == 'O') {
        n.elements.emplace_back(IdealOpamp{name, std::string(tok[1]), std::string(tok[2]), std::string(tok[3])});
      } else {
        throw Error(fmt::format("unknown element '{}'", head));
      }
    } catch (const NetlistError&) {
      throw;
    } catch (const Error& e) {
      throw NetlistError(line_no, e.what());
    }
  }

  n.nodes = collect_nodes(n.elements);
  const std::set<std::string> declared(n.nodes.begin(), n.nodes.end());
  if (in_line && !declared.count(n.input_node))
    throw NetlistError(*in_line, "undeclared node '" + n.input_node + "'");
  if (out_line && n.output_node != kGround && !declared.count(n.output_node))
    throw NetlistError(*out_line, "undeclared node '" + n.output_node + "'");
  n.validate();
  return n;
}

Netlist load_netlist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open netlist '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_netlist(buf.str());
}

std::string to_text(const Netlist& n) {
  std::string out;
  for (const auto& e : n.elements) {
    std::visit(
        [&](const auto& el) {
          using T = std::decay_t<decltype(el)>;
          if constexpr (std::is_same_v<T, Resistor>)
            out += fmt::format("{} {} {} {:.17g}\n", el.name, el.a, el.b, el.ohms);
          else if constexpr (std::is_same_v<T, Capacitor>)
            out += fmt::format("{} {} {} {:.17g}\n", el.name, el.a, el.b, el.farads);
          else
            out += fmt::format("{} {} {} {}\n", el.name, el.in_plus, el.in_minus, el.out);
        },
        e);
  }
  out += fmt::format(".in {}\n.out {}\n", n.input_node, n.output_node);
  return out;
}

namespace {

// Elimination runs in extended precision; only the final coefficients are
// rounded back to double.
using Real = long double;
using Coeffs = std::vector<Real>;

void trim(Coeffs& p) {
  while (!p.empty() && p.back() == 0.0L) p.pop_back();
}

int degree(const Coeffs& p) { return static_cast<int>(p.size()) - 1; }

Real max_abs(const Coeffs& p) {
  Real m = 0.0L;
  for (Real c : p) m = std::max(m, std::abs(c));
  return m;
}

Coeffs multiply(const Coeffs& a, const Coeffs& b, bool absolute = false) {
  if (a.empty() || b.empty()) return {};
  Coeffs c(a.size() + b.size() - 1, 0.0L);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += absolute ? std::abs(a[i] * b[j]) : a[i] * b[j];
  return c;
}

Coeffs subtract(const Coeffs& a, const Coeffs& b) {
  Coeffs c(std::max(a.size(), b.size()), 0.0L);
  for (std::size_t k = 0; k < a.size(); ++k) c[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) c[k] -= b[k];
  trim(c);
  return c;
}

void scale(Coeffs& p, Real k) {
  for (Real& v : p) v *= k;
}

// a*b - c*d with coefficients below the rounding floor of the products zeroed.
Coeffs cross(const Coeffs& a, const Coeffs& b, const Coeffs& c, const Coeffs& d) {
  Coeffs diff = subtract(multiply(a, b), multiply(c, d));
  const Coeffs ab = multiply(a, b, true), cd = multiply(c, d, true);
  constexpr Real floor = 64.0L * std::numeric_limits<Real>::epsilon();
  for (std::size_t k = 0; k < diff.size(); ++k) {
    const Real mag = (k < ab.size() ? ab[k] : 0.0L) + (k < cd.size() ? cd[k] : 0.0L);
    if (std::abs(diff[k]) <= floor * mag) diff[k] = 0.0L;
  }
  trim(diff);
  return diff;
}

// Division known to be exact in exact arithmetic. Top-down and bottom-up
// quotients are spliced at whichever index reproduces t best.
Coeffs divide_exact(const Coeffs& t, const Coeffs& d) {
  if (t.empty()) return {};
  if (d.size() == 1) {
    Coeffs q = t;
    for (Real& v : q) v /= d[0];
    return q;
  }
  const int dq = degree(t) - degree(d);
  if (dq < 0) return {};
  const auto nq = static_cast<std::size_t>(dq) + 1;
  const std::size_t dd = d.size() - 1;

  Coeffs top(nq, 0.0L);
  {
    Coeffs rem = t;
    for (std::size_t k = nq; k-- > 0;) {
      const Real q = rem[k + dd] / d.back();
      top[k] = q;
      for (std::size_t j = 0; j <= dd; ++j) rem[k + j] -= q * d[j];
    }
  }

  std::size_t low = 0;
  while (d[low] == 0.0L) ++low;
  Coeffs bottom(nq, 0.0L);
  for (std::size_t k = 0; k < nq; ++k) {
    Real acc = k + low < t.size() ? t[k + low] : 0.0L;
    for (std::size_t j = 1; j <= k && low + j <= dd; ++j) acc -= d[low + j] * bottom[k - j];
    bottom[k] = acc / d[low];
  }

  const Real scale_t = max_abs(t);
  Coeffs best;
  Real best_err = std::numeric_limits<Real>::infinity();
  for (std::size_t m = 0; m <= nq; ++m) {
    Coeffs q(nq);
    for (std::size_t k = 0; k < nq; ++k) q[k] = k < m ? bottom[k] : top[k];
    trim(q);
    const Real err = max_abs(subtract(multiply(d, q), t)) / scale_t;
    if (err < best_err) {
      best_err = err;
      best = std::move(q);
    }
  }
  return best;
}

Polynomial rescale_to_s(const Coeffs& p, Real time_scale) {
  std::vector<double> c(p.size());
  const Real largest = max_abs(p);
  Real f = 1.0L;
  for (std::size_t k = 0; k < p.size(); ++k) {
    c[k] = std::abs(p[k]) <= 1e-13L * largest ? 0.0 : static_cast<double>(p[k] * f);
    f *= time_scale;
  }
  return Polynomial(std::move(c));
}

struct WideSystem {
  std::size_t size = 0;
  std::vector<Coeffs> matrix;  // row-major
  std::vector<Coeffs> rhs;
  std::vector<std::string> unknowns;
  Real time_scale = 1.0L;
};

void add(Coeffs& into, const Coeffs& value, Real sign) {
  if (into.size() < value.size()) into.resize(value.size(), 0.0L);
  for (std::size_t k = 0; k < value.size(); ++k) into[k] += sign * value[k];
  trim(into);
}

WideSystem assemble_wide(const Netlist& n) {
  n.validate();

  Real log_r = 0.0L, log_c = 0.0L;
  int count_r = 0, count_c = 0;
  for (const auto& e : n.elements) {
    if (const auto* r = std::get_if<Resistor>(&e)) log_r += std::log(static_cast<Real>(r->ohms)), ++count_r;
    if (const auto* c = std::get_if<Capacitor>(&e)) log_c += std::log(static_cast<Real>(c->farads)), ++count_c;
  }
  const Real r0 = count_r ? std::exp(log_r / count_r) : 1.0L;
  const Real c0 = count_c ? std::exp(log_c / count_c) : 1.0L;

  WideSystem sys;
  sys.time_scale = r0 * c0;
  for (const auto& node : n.nodes)
    if (node != n.input_node && node != n.output_node) sys.unknowns.push_back(node);
  for (const auto& e : n.elements)
    if (const auto* op = std::get_if<IdealOpamp>(&e)) sys.unknowns.push_back("I(" + op->name + ")");
  if (n.output_node != kGround && n.output_node != n.input_node) sys.unknowns.push_back(n.output_node);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < sys.unknowns.size(); ++i) index[sys.unknowns[i]] = i;

  sys.size = sys.unknowns.size();
  sys.matrix.assign(sys.size * sys.size, Coeffs{});
  sys.rhs.assign(sys.size, Coeffs{});
  auto cell = [&](std::size_t r, std::size_t c) -> Coeffs& { return sys.matrix[r * sys.size + c]; };

  // Row `row` gains `value` times the voltage of `col`; a driven input (V = 1)
  // moves to the right-hand side, ground drops out.
  auto stamp = [&](std::optional<std::size_t> row, const std::string& col, const Coeffs& value, Real sign) {
    if (!row || col == kGround) return;
    if (col == n.input_node) add(sys.rhs[*row], value, -sign);
    else add(cell(*row, index.at(col)), value, sign);
  };
  auto kcl_row = [&](const std::string& node) -> std::optional<std::size_t> {
    if (node == kGround || node == n.input_node) return std::nullopt;
    return index.at(node);
  };
  auto two_terminal = [&](const std::string& a, const std::string& b, const Coeffs& y) {
    stamp(kcl_row(a), a, y, 1.0L);
    stamp(kcl_row(a), b, y, -1.0L);
    stamp(kcl_row(b), b, y, 1.0L);
    stamp(kcl_row(b), a, y, -1.0L);
  };

  for (const auto& e : n.elements) {
    if (const auto* r = std::get_if<Resistor>(&e)) {
      two_terminal(r->a, r->b, Coeffs{r0 / static_cast<Real>(r->ohms)});
    } else if (const auto* c = std::get_if<Capacitor>(&e)) {
      two_terminal(c->a, c->b, Coeffs{0.0L, static_cast<Real>(c->farads) / c0});
    } else if (const auto* op = std::get_if<IdealOpamp>(&e)) {
      // Nullor: the output branch current enters KCL at `out`, and the
      // constraint row forces V(in+) = V(in-).
      const std::size_t branch = index.at("I(" + op->name + ")");
      add(cell(*kcl_row(op->out), branch), Coeffs{1.0L}, -1.0L);
      stamp(branch, op->in_plus, Coeffs{1.0L}, 1.0L);
      stamp(branch, op->in_minus, Coeffs{1.0L}, -1.0L);
    }
  }
  return sys;
}

Polynomial narrow(const Coeffs& p) { return Polynomial(std::vector<double>(p.begin(), p.end())); }

}  // namespace

MnaSystem assemble(const Netlist& n) {
  const WideSystem wide = assemble_wide(n);
  MnaSystem sys;
  sys.matrix = PolyMatrix(wide.size);
  for (std::size_t k = 0; k < wide.matrix.size(); ++k) sys.matrix.entries[k] = narrow(wide.matrix[k]);
  for (const auto& r : wide.rhs) sys.rhs.push_back(narrow(r));
  sys.unknowns = wide.unknowns;
  sys.time_scale = static_cast<double>(wide.time_scale);
  return sys;
}

RationalFunction transfer_function(const Netlist& n) {
  n.validate();
  if (n.output_node == n.input_node) return normalize(Polynomial{1.0}, Polynomial{1.0});
  if (n.output_node == kGround) return normalize(Polynomial{}, Polynomial{1.0});

  const WideSystem sys = assemble_wide(n);
  const std::size_t size = sys.size;
  const std::size_t cols = size + 1;
  std::vector<Coeffs> m(size * cols);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) m[r * cols + c] = sys.matrix[r * size + c];
    m[r * cols + size] = sys.rhs[r];
  }
  auto at = [&](std::size_t r, std::size_t c) -> Coeffs& { return m[r * cols + c]; };

  Coeffs prev{1.0L};
  for (std::size_t k = 0; k < size; ++k) {
    std::size_t pivot = size;
    Real pivot_norm = 0.0L;
    for (std::size_t r = k; r < size; ++r) {
      const Real norm = max_abs(at(r, k));
      if (norm > pivot_norm) pivot_norm = norm, pivot = r;
    }
    if (pivot == size) throw SingularSystemError("circuit equations are singular");
    if (pivot != k)
      for (std::size_t c = 0; c < cols; ++c) std::swap(at(k, c), at(pivot, c));

    for (std::size_t i = k + 1; i < size; ++i) {
      for (std::size_t j = k + 1; j < cols; ++j) {
        at(i, j) = divide_exact(cross(at(k, k), at(i, j), at(i, k), at(k, j)), prev);
        if (degree(at(i, j)) > kMaxDegree)
          throw UnsupportedCircuitError(fmt::format("response degree exceeds {}", kMaxDegree));
      }
      at(i, k).clear();
      // Content removal: rescaling a row that has not pivoted yet is the
      // same as rescaling that row of the original system, so the ratio of
      // the final two entries is unaffected.
      Real norm = 0.0L;
      for (std::size_t j = k + 1; j < cols; ++j) norm = std::max(norm, max_abs(at(i, j)));
      if (norm > 0.0L)
        for (std::size_t j = k + 1; j < cols; ++j) scale(at(i, j), 1.0L / norm);
    }
    prev = at(k, k);
  }

  const Polynomial den = rescale_to_s(at(size - 1, size - 1), sys.time_scale);
  const Polynomial num = rescale_to_s(at(size - 1, size), sys.time_scale);
  if (den.is_zero()) throw SingularSystemError("circuit equations are singular");
  if (den.degree() > kMaxDegree || num.degree() > kMaxDegree)
    throw UnsupportedCircuitError(fmt::format("response degree exceeds {}", kMaxDegree));
  return normalize(num, den);
}

Netlist noninverting_variant(const Netlist& n) {
  n.validate();
  const IdealOpamp* only = nullptr;
  int opamps = 0;
  for (const auto& e : n.elements)
    if (const auto* op = std::get_if<IdealOpamp>(&e)) only = op, ++opamps;
  if (opamps != 1) throw TopologyMismatchError("expected exactly one opamp");
  if (only->in_plus != kGround && only->in_plus != n.input_node)
    throw TopologyMismatchError("opamp non-inverting input is neither ground nor the input");

  const std::string input = n.input_node;
  const std::string ground(kGround);
  auto swap = [&](std::string& node) {
    if (node == input) node = ground;
    else if (node == ground) node = input;
  };

  Netlist out = n;
  for (auto& e : out.elements) {
    std::visit(
        [&](auto& el) {
          using T = std::decay_t<decltype(el)>;
          if constexpr (std::is_same_v<T, IdealOpamp>) {
            swap(el.in_plus);
            swap(el.in_minus);
            swap(el.out);
          } else {
            swap(el.a);
            swap(el.b);
          }
        },
        e);
  }
  out.nodes = collect_nodes(out.elements);
  try {
    out.validate();
  } catch (const NetlistError& e) {
    throw TopologyMismatchError(std::string("swapped netlist is invalid: ") + e.what());
  }
  return out;
}

}  // namespace b295::mna
