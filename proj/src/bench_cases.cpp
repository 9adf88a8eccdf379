#include <algorithm>
#include <cmath>
#include <limits>

#include "dimsr/bench.hpp"
#include "dimsr/error.hpp"

namespace dimsr {

namespace {

VariableSpec var(std::string name, std::string_view dim, Role role = Role::known_arg,
                 double lo = 1.0, double hi = 2.0) {
  VariableSpec v;
  v.name = std::move(name);
  v.dimension = parse_dimension(dim);
  v.role = role;
  v.range = Interval{lo, hi};
  return v;
}

PiGroup group(std::string name, Monomial m) { return {std::move(name), std::move(m)}; }

Rational q(std::int64_t n, std::int64_t d = 1) { return Rational(n, d); }

const std::vector<Op> kBinary{Op::add, Op::sub, Op::mul, Op::div};
const std::vector<double> kLiterals{1.0, 2.0};

CaseSpec make_case(std::string name, std::vector<VariableSpec> vars, std::string output,
                   std::string_view original, std::vector<PiGroup> groups, std::string pi_output,
                   std::string_view target, std::vector<Op> unary) {
  CaseSpec c;
  c.name = std::move(name);
  c.variables = std::move(vars);
  c.output = std::move(output);
  c.original = parse_expr(original);
  c.groups = std::move(groups);
  c.pi_output = std::move(pi_output);
  c.dimensionless_target = parse_expr(target);
  c.unary_ops = std::move(unary);
  c.binary_ops = kBinary;
  c.literals = kLiterals;
  return c;
}

const PiGroup& find_group(const CaseSpec& c, const std::string& name) {
  for (const auto& g : c.groups) {
    if (g.name == name) return g;
  }
  throw Error("case " + c.name + ": no group '" + name + "'");
}

std::vector<std::string> input_groups(const CaseSpec& c) {
  std::vector<std::string> out;
  for (const auto& g : c.groups) {
    if (g.name != c.pi_output) out.push_back(g.name);
  }
  return out;
}

std::vector<std::string> input_variables(const CaseSpec& c) {
  auto free = free_variables(c.original);
  std::vector<std::string> out;
  for (const auto& v : c.variables) {
    if (std::find(free.begin(), free.end(), v.name) != free.end()) out.push_back(v.name);
  }
  return out;
}

}  // namespace

// Every case searches add/sub/mul/div over the literals 1 and 2 plus the unary
// operators its equation needs in either form; both variants share the set.
std::vector<CaseSpec> table1_cases() {
  std::vector<CaseSpec> out;
  out.push_back(make_case(
      "free_fall",
      {var("S", "L", Role::dependent), var("s", "L"), var("v", "L T^-1"), var("t", "T"),
       var("g", "L T^-2")},
      "S", "((s + (v * t)) - (((g * t) * t) / 2))",
      {group("pi1", {{"S", q(1)}, {"s", q(-1)}}),
       group("pi2", {{"v", q(-1)}, {"t", q(1)}, {"g", q(1)}}),
       group("pi3", {{"s", q(-1)}, {"v", q(1)}, {"t", q(1)}})},
      "pi1", "((1 + pi3) - ((pi2 * pi3) / 2))", {}));
  out.push_back(make_case(
      "terminal_velocity",
      {var("Vt", "L T^-1", Role::dependent), var("m", "M"), var("g", "L T^-2"),
       var("rho", "M L^-3"), var("C", ""), var("A", "L^2")},
      "Vt", "sqrt(((2 * (m * g)) / (rho * (C * A))))",
      {group("pi1", {{"Vt", q(1)}, {"g", q(-1, 2)}, {"A", q(-1, 4)}}),
       group("pi2", {{"C", q(1)}}),
       group("pi3", {{"m", q(-1)}, {"rho", q(1)}, {"A", q(3, 2)}})},
      "pi3", "(2 / (pi2 * (pi1 * pi1)))", {Op::sqrt}));
  out.push_back(make_case(
      "darcy_weisbach",
      {var("Pf", "M L^-1 T^-2", Role::dependent), var("f", ""), var("l", "L"), var("d", "L"),
       var("rho", "M L^-3"), var("v", "L T^-1")},
      "Pf", "((f * (l / d)) * ((rho * (v * v)) / 2))",
      {group("pi1", {{"Pf", q(1)}, {"rho", q(-1)}, {"v", q(-2)}}), group("pi2", {{"f", q(1)}}),
       group("pi3", {{"l", q(1)}, {"d", q(-1)}})},
      "pi1", "((pi3 * pi2) / 2)", {}));
  out.push_back(make_case(
      "exponential_decay",
      {var("n", "L^-3", Role::dependent), var("n0", "L^-3"), var("m", "M"), var("g", "L T^-2"),
       var("x", "L"), var("kB", "M L^2 T^-2 Θ^-1"), var("T", "Θ")},
      "n", "(n0 / exp((((m * g) * x) / (kB * T))))",
      {group("pi1", {{"m", q(-1)}, {"g", q(-1)}, {"x", q(-1)}, {"kB", q(1)}, {"T", q(1)}}),
       group("pi2", {{"n", q(1)}, {"x", q(3)}}), group("pi3", {{"n0", q(1)}, {"x", q(3)}})},
      "pi2", "(pi3 / exp(inv(pi1)))", {Op::exp, Op::inv}));
  out.push_back(make_case(
      "gravitational_pe",
      {var("U", "M L^2 T^-2", Role::dependent), var("G", "M^-1 L^3 T^-2"), var("m1", "M"),
       var("m2", "M"), var("r1", "L"), var("r2", "L")},
      "U", "(((G * m1) * m2) * ((1 / r2) - (1 / r1)))",
      {group("pi1", {{"U", q(1)}, {"G", q(-1)}, {"m1", q(-2)}, {"r2", q(1)}}),
       group("pi2", {{"m1", q(-1)}, {"m2", q(1)}}), group("pi3", {{"r1", q(1)}, {"r2", q(-1)}})},
      "pi1", "(pi2 - (pi2 / pi3))", {}));
  out.push_back(make_case(
      "gravitational_force",
      {var("F", "M L T^-2", Role::dependent), var("G", "M^-1 L^3 T^-2"), var("m1", "M"),
       var("m2", "M"), var("r", "L")},
      "F", "(-(((G * m1) * m2) / (r * r)))",
      {group("pi1", {{"F", q(1)}, {"G", q(-1)}, {"m1", q(-2)}, {"r", q(2)}}),
       group("pi2", {{"m1", q(-1)}, {"m2", q(1)}})},
      "pi1", "(-pi2)", {Op::neg}));
  return out;
}

const CaseSpec& table1_case(const std::string& name) {
  static const std::vector<CaseSpec> cases = table1_cases();
  for (const auto& c : cases) {
    if (c.name == name) return c;
  }
  throw Error("unknown case '" + name + "'");
}

void check_case(const CaseSpec& c, std::size_t points, double tol, std::uint64_t seed) {
  for (const auto& g : c.groups) {
    if (!verify_dimensionless(g, c.variables)) {
      throw DimensionError("case " + c.name + ": group " + g.name + " = " + g.str() +
                           " is not dimensionless");
    }
  }
  Dataset nd = case_dataset(c, true, points, seed);
  auto inputs = input_groups(c);
  for (std::size_t r = 0; r < nd.num_rows(); ++r) {
    Bindings b;
    for (std::size_t k = 0; k < inputs.size(); ++k) b[inputs[k]] = nd.at(r, k);
    double want = nd.at(r, nd.num_cols() - 1);
    double got = eval(c.dimensionless_target, b);
    if (!(std::abs(got - want) <= tol * std::max(1.0, std::abs(want)))) {
      throw Error("case " + c.name + ": dimensionless target disagrees with the original (" +
                  format_number(got) + " vs " + format_number(want) + ")");
    }
  }
}

Grammar case_grammar(const CaseSpec& c, bool dimensionless) {
  Grammar g;
  g.unary_ops = c.unary_ops;
  g.binary_ops = c.binary_ops;
  g.literals = c.literals;
  if (dimensionless) {
    for (const auto& name : input_groups(c)) g.variables.push_back({name, Dimension{}});
  } else {
    for (const auto& name : input_variables(c)) {
      auto it = std::find_if(c.variables.begin(), c.variables.end(),
                             [&](const VariableSpec& v) { return v.name == name; });
      g.variables.push_back({name, it->dimension});
    }
  }
  return g;
}

Dataset case_dataset(const CaseSpec& c, bool dimensionless, std::size_t n, std::uint64_t seed) {
  Dataset raw = sample_algebraic(c.original, c.variables, c.output, n, seed);
  raw.meta.generator = "case " + c.name + ": " + raw.meta.generator;
  if (!dimensionless) return raw;

  auto inputs = input_groups(c);
  std::vector<std::string> cols = inputs;
  cols.push_back(c.pi_output);
  Dataset out(cols);
  out.meta.seed = seed;
  out.meta.generator = raw.meta.generator + " | groups";
  for (const auto& name : cols) out.meta.units[name] = "";
  std::vector<double> row(cols.size());
  Bindings b;
  for (std::size_t r = 0; r < raw.num_rows(); ++r) {
    for (std::size_t k = 0; k < raw.num_cols(); ++k) b[raw.columns()[k]] = raw.at(r, k);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      row[k] = eval_monomial(find_group(c, cols[k]).exponents, b);
    }
    out.add_row(row);
  }
  return out;
}

Domain case_domain(const CaseSpec& c, bool dimensionless) {
  Domain dom;
  if (!dimensionless) {
    for (const auto& name : input_variables(c)) {
      auto it = std::find_if(c.variables.begin(), c.variables.end(),
                             [&](const VariableSpec& v) { return v.name == name; });
      dom[name] = *it->range;
    }
    return dom;
  }
  // Observed extent of each group over a dense sample of the variable box.
  Dataset d = case_dataset(c, true, 4000, 12345);
  auto inputs = input_groups(c);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r = 0; r < d.num_rows(); ++r) {
      lo = std::min(lo, d.at(r, k));
      hi = std::max(hi, d.at(r, k));
    }
    if (lo == hi) hi = lo + 1e-9;
    dom[inputs[k]] = Interval{lo, hi};
  }
  return dom;
}

Expr case_target(const CaseSpec& c, bool dimensionless) {
  return dimensionless ? c.dimensionless_target : c.original;
}

Dimension case_target_dimension(const CaseSpec& c, bool dimensionless) {
  if (dimensionless) return {};
  for (const auto& v : c.variables) {
    if (v.name == c.output) return v.dimension;
  }
  throw Error("case " + c.name + ": output variable missing");
}

}  // namespace dimsr
