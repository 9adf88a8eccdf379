#include "dimsr/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>

#include "dimsr/error.hpp"
#include "dimsr/rng.hpp"

namespace dimsr {

bool is_unary(Op op) { return op >= Op::neg && op <= Op::arcsin; }
bool is_binary(Op op) { return op >= Op::add; }
bool is_commutative(Op op) { return op == Op::add || op == Op::mul; }

std::string_view op_name(Op op) {
  switch (op) {
    case Op::constant: return "const";
    case Op::var: return "var";
    case Op::neg: return "neg";
    case Op::inv: return "inv";
    case Op::sqrt: return "sqrt";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::tan: return "tan";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::arcsin: return "arcsin";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::powint: return "powint";
  }
  return "?";
}

Op op_from_name(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(Op::powint); ++i) {
    auto op = static_cast<Op>(i);
    if (op_name(op) == name) return op;
  }
  throw ParseError("unknown operator '" + std::string(name) + "'");
}

namespace {

std::shared_ptr<const Node> make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

const std::shared_ptr<const Node>& zero_node() {
  static const auto z = make_node(Node{});
  return z;
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Expr Expr::literal(double v) {
  Node n;
  n.value = v;
  return Expr(make_node(std::move(n)));
}

Expr Expr::fitted(double v) {
  Node n;
  n.kind = ConstKind::fitted;
  n.value = v;
  return Expr(make_node(std::move(n)));
}

Expr Expr::var(std::string name) {
  Node n;
  n.op = Op::var;
  n.name = std::move(name);
  return Expr(make_node(std::move(n)));
}

Expr Expr::unary(Op op, Expr child) {
  if (!is_unary(op)) throw Error("not a unary operator: " + std::string(op_name(op)));
  Node n;
  n.op = op;
  n.children = {std::move(child)};
  return Expr(make_node(std::move(n)));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  if (!is_binary(op) || op == Op::powint) {
    throw Error("not a binary operator: " + std::string(op_name(op)));
  }
  Node n;
  n.op = op;
  n.children = {std::move(lhs), std::move(rhs)};
  return Expr(make_node(std::move(n)));
}

Expr Expr::powint(Expr base, int exponent) {
  if (exponent == 0) throw Error("integer power exponent must be nonzero");
  Node n;
  n.op = Op::powint;
  n.exponent = exponent;
  n.children = {std::move(base)};
  return Expr(make_node(std::move(n)));
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
ConstKind Expr::kind() const { return node_->kind; }
const std::string& Expr::name() const { return node_->name; }
int Expr::exponent() const { return node_->exponent; }
std::size_t Expr::arity() const { return node_->children.size(); }
const Expr& Expr::child(std::size_t i) const { return node_->children.at(i); }
std::string Expr::str() const { return to_string(*this); }

bool operator==(const Expr& a, const Expr& b) {
  if (a.op() != b.op() || a.arity() != b.arity()) return false;
  switch (a.op()) {
    case Op::constant: return a.kind() == b.kind() && a.value() == b.value();
    case Op::var: return a.name() == b.name();
    case Op::powint:
      if (a.exponent() != b.exponent()) return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!(a.child(i) == b.child(i))) return false;
  }
  return true;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::div, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(Op::neg, a); }

// ---------------------------------------------------------------------------
// Printing

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

namespace {

std::string_view binary_symbol(Op op) {
  switch (op) {
    case Op::add: return " + ";
    case Op::sub: return " - ";
    case Op::mul: return " * ";
    case Op::div: return " / ";
    default: return " ? ";
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::constant:
      if (e.kind() == ConstKind::fitted) {
        out += '{';
        out += format_number(e.value());
        out += '}';
      } else if (e.value() < 0 || std::signbit(e.value())) {
        out += "(-";
        out += format_number(-e.value());
        out += ')';
      } else {
        out += format_number(e.value());
      }
      return;
    case Op::var: out += e.name(); return;
    case Op::neg:
      out += "(-";
      print(e.child(0), out);
      out += ')';
      return;
    case Op::powint:
      out += '(';
      print(e.child(0), out);
      out += '^';
      out += std::to_string(e.exponent());
      out += ')';
      return;
    default: break;
  }
  if (is_unary(e.op())) {
    out += op_name(e.op());
    out += '(';
    print(e.child(0), out);
    out += ')';
    return;
  }
  out += '(';
  print(e.child(0), out);
  out += binary_symbol(e.op());
  print(e.child(1), out);
  out += ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

bool CompiledExpr::apply_unary(Op op, double x, double& out) {
  switch (op) {
    case Op::neg: out = -x; break;
    case Op::inv:
      if (x == 0.0) return false;
      out = 1.0 / x;
      break;
    case Op::sqrt:
      if (x < 0.0) return false;
      out = std::sqrt(x);
      break;
    case Op::sin: out = std::sin(x); break;
    case Op::cos: out = std::cos(x); break;
    case Op::tan: out = std::tan(x); break;
    case Op::exp: out = std::exp(x); break;
    case Op::log:
      if (!(x > 0.0)) return false;
      out = std::log(x);
      break;
    case Op::arcsin:
      if (!(std::abs(x) <= 1.0)) return false;
      out = std::asin(x);
      break;
    default: return false;
  }
  return std::isfinite(out);
}

bool CompiledExpr::apply_binary(Op op, double a, double b, int exponent, double& out) {
  switch (op) {
    case Op::add: out = a + b; break;
    case Op::sub: out = a - b; break;
    case Op::mul: out = a * b; break;
    case Op::div:
      if (b == 0.0) return false;
      out = a / b;
      break;
    case Op::powint:
      if (a == 0.0 && exponent < 0) return false;
      out = std::pow(a, exponent);
      break;
    default: return false;
  }
  return std::isfinite(out);
}

namespace {

const double& lookup(const Bindings& b, const std::string& name) {
  auto it = b.find(name);
  if (it == b.end()) throw Error("unbound variable '" + name + "'");
  return it->second;
}

[[noreturn]] void domain_violation(const Expr& e) {
  throw DomainError("domain violation at " + to_string(e));
}

}  // namespace

double eval(const Expr& e, const Bindings& bindings) {
  double out = 0.0;
  switch (e.op()) {
    case Op::constant: return e.value();
    case Op::var: return lookup(bindings, e.name());
    case Op::powint:
      if (!CompiledExpr::apply_binary(Op::powint, eval(e.child(0), bindings), 0.0, e.exponent(),
                                      out)) {
        domain_violation(e);
      }
      return out;
    default: break;
  }
  if (is_unary(e.op())) {
    if (!CompiledExpr::apply_unary(e.op(), eval(e.child(0), bindings), out)) domain_violation(e);
    return out;
  }
  double a = eval(e.child(0), bindings);
  double b = eval(e.child(1), bindings);
  if (!CompiledExpr::apply_binary(e.op(), a, b, 0, out)) domain_violation(e);
  return out;
}

Dual eval_dual(const Expr& e, const Bindings& bindings, std::string_view wrt) {
  switch (e.op()) {
    case Op::constant: return {e.value(), 0.0};
    case Op::var: return {lookup(bindings, e.name()), e.name() == wrt ? 1.0 : 0.0};
    default: break;
  }
  double v = eval(e, bindings);
  if (is_unary(e.op())) {
    Dual c = eval_dual(e.child(0), bindings, wrt);
    double d = 0.0;
    switch (e.op()) {
      case Op::neg: d = -c.deriv; break;
      case Op::inv: d = -c.deriv / (c.value * c.value); break;
      case Op::sqrt:
        if (v == 0.0) domain_violation(e);
        d = c.deriv / (2.0 * v);
        break;
      case Op::sin: d = std::cos(c.value) * c.deriv; break;
      case Op::cos: d = -std::sin(c.value) * c.deriv; break;
      case Op::tan: d = (1.0 + v * v) * c.deriv; break;
      case Op::exp: d = v * c.deriv; break;
      case Op::log: d = c.deriv / c.value; break;
      case Op::arcsin: {
        double s = 1.0 - c.value * c.value;
        if (s <= 0.0) domain_violation(e);
        d = c.deriv / std::sqrt(s);
        break;
      }
      default: break;
    }
    return {v, d};
  }
  if (e.op() == Op::powint) {
    Dual c = eval_dual(e.child(0), bindings, wrt);
    int n = e.exponent();
    return {v, n * std::pow(c.value, n - 1) * c.deriv};
  }
  Dual a = eval_dual(e.child(0), bindings, wrt);
  Dual b = eval_dual(e.child(1), bindings, wrt);
  switch (e.op()) {
    case Op::add: return {v, a.deriv + b.deriv};
    case Op::sub: return {v, a.deriv - b.deriv};
    case Op::mul: return {v, a.deriv * b.value + a.value * b.deriv};
    case Op::div: return {v, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value)};
    default: return {v, 0.0};
  }
}

// ---------------------------------------------------------------------------
// Dimensions and scoring

Dimension infer_dimension(const Expr& e, const DimensionMap& dims) {
  switch (e.op()) {
    case Op::constant: return {};
    case Op::var: {
      auto it = dims.find(e.name());
      if (it == dims.end()) throw Error("no dimension for variable '" + e.name() + "'");
      return it->second;
    }
    case Op::neg: return infer_dimension(e.child(0), dims);
    case Op::inv: return infer_dimension(e.child(0), dims).pow(-1);
    case Op::sqrt: return infer_dimension(e.child(0), dims).pow(Rational(1, 2));
    case Op::powint: return infer_dimension(e.child(0), dims).pow(e.exponent());
    case Op::mul: return infer_dimension(e.child(0), dims) * infer_dimension(e.child(1), dims);
    case Op::div: return infer_dimension(e.child(0), dims) / infer_dimension(e.child(1), dims);
    case Op::add:
    case Op::sub: {
      Dimension a = infer_dimension(e.child(0), dims);
      Dimension b = infer_dimension(e.child(1), dims);
      if (a != b) {
        throw DimensionError("dimension mismatch at " + to_string(e) + ": [" + a.str() +
                             "] vs [" + b.str() + "]");
      }
      return a;
    }
    default: {
      Dimension a = infer_dimension(e.child(0), dims);
      if (!a.dimensionless()) {
        throw DimensionError("dimensional argument [" + a.str() + "] at " + to_string(e));
      }
      return {};
    }
  }
}

double complexity(const Expr& e) {
  switch (e.op()) {
    case Op::constant: return e.kind() == ConstKind::fitted ? 3.0 : 1.0;
    case Op::var: return 1.0;
    case Op::powint: return 3.0 + complexity(e.child(0));
    default: break;
  }
  double total = 2.0;
  for (std::size_t i = 0; i < e.arity(); ++i) total += complexity(e.child(i));
  return total;
}

std::size_t node_count(const Expr& e) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < e.arity(); ++i) n += node_count(e.child(i));
  return n;
}

namespace {

void collect_vars(const Expr& e, std::vector<std::string>& out, std::set<std::string>& seen) {
  if (e.op() == Op::var) {
    if (seen.insert(e.name()).second) out.push_back(e.name());
    return;
  }
  for (std::size_t i = 0; i < e.arity(); ++i) collect_vars(e.child(i), out, seen);
}

void collect_fitted(const Expr& e, std::vector<double>& out) {
  if (e.op() == Op::constant && e.kind() == ConstKind::fitted) out.push_back(e.value());
  for (std::size_t i = 0; i < e.arity(); ++i) collect_fitted(e.child(i), out);
}

Expr rebuild(const Expr& e, std::vector<Expr> children) {
  if (e.op() == Op::powint) return Expr::powint(std::move(children[0]), e.exponent());
  if (is_unary(e.op())) return Expr::unary(e.op(), std::move(children[0]));
  return Expr::binary(e.op(), std::move(children[0]), std::move(children[1]));
}

Expr replace_fitted(const Expr& e, std::span<const double> values, std::size_t& next) {
  if (e.op() == Op::constant) {
    if (e.kind() != ConstKind::fitted) return e;
    if (next >= values.size()) throw Error("not enough fitted constant values");
    return Expr::fitted(values[next++]);
  }
  if (e.op() == Op::var) return e;
  std::vector<Expr> kids;
  for (std::size_t i = 0; i < e.arity(); ++i) kids.push_back(replace_fitted(e.child(i), values, next));
  return rebuild(e, std::move(kids));
}

}  // namespace

std::vector<std::string> free_variables(const Expr& e) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  collect_vars(e, out, seen);
  return out;
}

std::vector<double> fitted_constants(const Expr& e) {
  std::vector<double> out;
  collect_fitted(e, out);
  return out;
}

std::size_t count_fitted(const Expr& e) { return fitted_constants(e).size(); }

Expr with_fitted_constants(const Expr& e, std::span<const double> values) {
  std::size_t next = 0;
  Expr out = replace_fitted(e, values, next);
  if (next != values.size()) throw Error("too many fitted constant values");
  return out;
}

Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements) {
  if (e.op() == Op::var) {
    auto it = replacements.find(e.name());
    return it == replacements.end() ? e : it->second;
  }
  if (e.op() == Op::constant) return e;
  std::vector<Expr> kids;
  for (std::size_t i = 0; i < e.arity(); ++i) kids.push_back(substitute(e.child(i), replacements));
  return rebuild(e, std::move(kids));
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

bool is_const_value(const Expr& e, double v) { return e.is_constant() && e.value() == v; }

Expr make_const(double v, bool fitted) { return fitted ? Expr::fitted(v) : Expr::literal(v); }

bool any_fitted(const Expr& a) { return a.is_constant() && a.kind() == ConstKind::fitted; }

void flatten_product(const Expr& e, std::vector<Expr>& factors) {
  if (e.op() == Op::mul) {
    flatten_product(e.child(0), factors);
    flatten_product(e.child(1), factors);
  } else {
    factors.push_back(e);
  }
}

Expr simplify_once(const Expr& e);

Expr fold_product(const Expr& e) {
  std::vector<Expr> factors;
  flatten_product(e, factors);
  double coeff = 1.0;
  bool fitted = false;
  std::size_t n_const = 0;
  std::vector<Expr> rest;
  for (auto& f : factors) {
    if (f.is_constant()) {
      coeff *= f.value();
      fitted = fitted || f.kind() == ConstKind::fitted;
      ++n_const;
    } else {
      rest.push_back(f);
    }
  }
  if (n_const == 0 || (n_const == 1 && coeff != 1.0 && coeff != -1.0 && coeff != 0.0 &&
                       factors.front().is_constant())) {
    return e;
  }
  if (coeff == 0.0 || rest.empty()) return make_const(coeff, fitted);
  Expr prod = rest.front();
  for (std::size_t i = 1; i < rest.size(); ++i) prod = prod * rest[i];
  if (coeff == 1.0) return prod;
  if (coeff == -1.0 && !fitted) return -prod;
  return make_const(coeff, fitted) * prod;
}

Expr simplify_once(const Expr& e) {
  if (e.op() == Op::constant || e.op() == Op::var) return e;
  std::vector<Expr> kids;
  for (std::size_t i = 0; i < e.arity(); ++i) kids.push_back(simplify_once(e.child(i)));

  bool all_const =
      std::all_of(kids.begin(), kids.end(), [](const Expr& k) { return k.is_constant(); });
  if (all_const) {
    double out = 0.0;
    bool ok = e.op() == Op::powint
                  ? CompiledExpr::apply_binary(Op::powint, kids[0].value(), 0.0, e.exponent(), out)
              : is_unary(e.op())
                  ? CompiledExpr::apply_unary(e.op(), kids[0].value(), out)
                  : CompiledExpr::apply_binary(e.op(), kids[0].value(), kids[1].value(), 0, out);
    if (ok) {
      bool fitted = std::any_of(kids.begin(), kids.end(), any_fitted);
      return make_const(out, fitted);
    }
  }

  switch (e.op()) {
    case Op::neg:
      if (kids[0].op() == Op::neg) return kids[0].child(0);
      break;
    case Op::inv:
      if (kids[0].op() == Op::inv) return kids[0].child(0);
      break;
    case Op::powint:
      if (e.exponent() == 1) return kids[0];
      break;
    case Op::add:
      if (is_const_value(kids[1], 0.0)) return kids[0];
      if (is_const_value(kids[0], 0.0)) return kids[1];
      break;
    case Op::sub:
      if (is_const_value(kids[1], 0.0)) return kids[0];
      if (is_const_value(kids[0], 0.0)) return -kids[1];
      break;
    case Op::div:
      if (is_const_value(kids[1], 1.0)) return kids[0];
      break;
    case Op::mul: return fold_product(kids[0] * kids[1]);
    default: break;
  }
  return rebuild(e, std::move(kids));
}

}  // namespace

Expr simplify(const Expr& e) {
  Expr cur = e;
  for (int iter = 0; iter < 64; ++iter) {
    Expr next = simplify_once(cur);
    if (next == cur) return cur;
    cur = std::move(next);
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Numeric equivalence

namespace {

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

constexpr std::array<std::uint64_t, 16> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                   23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

bool numeric_equivalence(const Expr& a, const Expr& b, const Domain& domain,
                         const EquivalenceOptions& opt) {
  if (opt.samples == 0) throw Error("numeric_equivalence needs at least one sample");
  std::vector<std::string> names;
  for (const auto& e : {a, b}) {
    for (auto& v : free_variables(e)) {
      if (!domain.count(v)) throw Error("no sampling domain for variable '" + v + "'");
      if (std::find(names.begin(), names.end(), v) == names.end()) names.push_back(v);
    }
  }
  std::sort(names.begin(), names.end());
  if (names.size() > kPrimes.size()) throw Error("too many variables for equivalence sampling");

  // Halton points under a seeded Cranley-Patterson rotation.
  Rng rng(opt.seed);
  std::vector<double> shift(names.size());
  for (auto& s : shift) s = rng.uniform();

  std::size_t accepted = 0;
  std::size_t rejected = 0;
  Bindings bind;
  for (std::uint64_t idx = 1; accepted < opt.samples; ++idx) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      double u = radical_inverse(idx, kPrimes[k]) + shift[k];
      u -= std::floor(u);
      const Interval& iv = domain.find(names[k])->second;
      bind[names[k]] = iv.lo + u * (iv.hi - iv.lo);
    }
    double va = 0.0;
    double vb = 0.0;
    try {
      va = eval(a, bind);
      vb = eval(b, bind);
    } catch (const DomainError&) {
      if (++rejected > opt.max_retries) {
        throw DomainError("numeric_equivalence: too many domain violations");
      }
      continue;
    }
    if (!(std::abs(va - vb) <= opt.tol * (1.0 + std::abs(vb)))) return false;
    ++accepted;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Compiled evaluation

namespace {

void emit(const Expr& e, const std::vector<std::string>& vars,
          std::vector<CompiledExpr::Instr>& prog) {
  for (std::size_t i = 0; i < e.arity(); ++i) emit(e.child(i), vars, prog);
  CompiledExpr::Instr in{e.op()};
  if (e.op() == Op::constant) {
    in.value = e.value();
    in.index = e.kind() == ConstKind::fitted ? 1 : 0;
  } else if (e.op() == Op::var) {
    auto it = std::find(vars.begin(), vars.end(), e.name());
    if (it == vars.end()) throw Error("unbound variable '" + e.name() + "'");
    in.index = static_cast<int>(it - vars.begin());
  } else if (e.op() == Op::powint) {
    in.exponent = e.exponent();
  }
  prog.push_back(in);
}

}  // namespace

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& variables) {
  std::vector<Instr> prog;
  emit(e, variables, prog);
  *this = CompiledExpr(std::move(prog));
}

CompiledExpr::CompiledExpr(std::vector<Instr> program) : program_(std::move(program)) {
  std::size_t depth = 0;
  for (std::size_t i = 0; i < program_.size(); ++i) {
    const Instr& in = program_[i];
    if (in.op == Op::constant || in.op == Op::var) {
      ++depth;
      if (in.op == Op::constant && in.index == 1) fitted_slots_.push_back(i);
    } else if (is_binary(in.op) && in.op != Op::powint) {
      --depth;
    }
    max_stack_ = std::max(max_stack_, depth);
  }
}

void CompiledExpr::set_fitted(std::span<const double> values) {
  if (values.size() != fitted_slots_.size()) throw Error("fitted constant count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) program_[fitted_slots_[i]].value = values[i];
}

bool CompiledExpr::try_eval(std::span<const double> vars, double& out) const {
  constexpr std::size_t kSmall = 64;
  std::array<double, kSmall> small{};
  std::vector<double> big;
  double* stack = small.data();
  if (max_stack_ > kSmall) {
    big.resize(max_stack_);
    stack = big.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : program_) {
    switch (in.op) {
      case Op::constant: stack[sp++] = in.value; break;
      case Op::var: stack[sp++] = vars[in.index]; break;
      case Op::powint:
        if (!apply_binary(Op::powint, stack[sp - 1], 0.0, in.exponent, stack[sp - 1])) return false;
        break;
      default:
        if (is_unary(in.op)) {
          if (!apply_unary(in.op, stack[sp - 1], stack[sp - 1])) return false;
        } else {
          --sp;
          if (!apply_binary(in.op, stack[sp - 1], stack[sp], 0, stack[sp - 1])) return false;
        }
    }
  }
  out = stack[0];
  return true;
}

double CompiledExpr::eval(std::span<const double> vars) const {
  double out = 0.0;
  if (!try_eval(vars, out)) throw DomainError("domain violation during evaluation");
  return out;
}

bool CompiledExpr::try_eval_dual(std::span<const double> vars, std::size_t wrt, Dual& out) const {
  std::vector<Dual> stack(std::max<std::size_t>(max_stack_, 1));
  std::size_t sp = 0;
  for (const Instr& in : program_) {
    switch (in.op) {
      case Op::constant: stack[sp++] = {in.value, 0.0}; break;
      case Op::var:
        stack[sp++] = {vars[in.index], static_cast<std::size_t>(in.index) == wrt ? 1.0 : 0.0};
        break;
      case Op::powint: {
        Dual& c = stack[sp - 1];
        double v = 0.0;
        if (!apply_binary(Op::powint, c.value, 0.0, in.exponent, v)) return false;
        c.deriv *= in.exponent * std::pow(c.value, in.exponent - 1);
        c.value = v;
        break;
      }
      default:
        if (is_unary(in.op)) {
          Dual& c = stack[sp - 1];
          double v = 0.0;
          if (!apply_unary(in.op, c.value, v)) return false;
          double d = 0.0;
          switch (in.op) {
            case Op::neg: d = -1.0; break;
            case Op::inv: d = -v * v; break;
            case Op::sqrt:
              if (v == 0.0) return false;
              d = 0.5 / v;
              break;
            case Op::sin: d = std::cos(c.value); break;
            case Op::cos: d = -std::sin(c.value); break;
            case Op::tan: d = 1.0 + v * v; break;
            case Op::exp: d = v; break;
            case Op::log: d = 1.0 / c.value; break;
            case Op::arcsin: {
              double s = 1.0 - c.value * c.value;
              if (s <= 0.0) return false;
              d = 1.0 / std::sqrt(s);
              break;
            }
            default: break;
          }
          c = {v, d * c.deriv};
        } else {
          --sp;
          Dual& a = stack[sp - 1];
          const Dual& b = stack[sp];
          double v = 0.0;
          if (!apply_binary(in.op, a.value, b.value, 0, v)) return false;
          double d = 0.0;
          switch (in.op) {
            case Op::add: d = a.deriv + b.deriv; break;
            case Op::sub: d = a.deriv - b.deriv; break;
            case Op::mul: d = a.deriv * b.value + a.value * b.deriv; break;
            case Op::div: d = (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value); break;
            default: break;
          }
          a = {v, d};
        }
    }
  }
  out = stack[0];
  return std::isfinite(out.deriv);
}

}  // namespace dimsr
