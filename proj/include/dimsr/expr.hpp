#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dimsr/dimensions.hpp"

namespace dimsr {

enum class Op : std::uint8_t {
  constant,
  var,
  // unary
  neg,
  inv,
  sqrt,
  sin,
  cos,
  tan,
  exp,
  log,
  arcsin,
  // binary
  add,
  sub,
  mul,
  div,
  powint,  // integer power; the exponent lives on the node
};

enum class ConstKind : std::uint8_t { literal, fitted };

bool is_unary(Op op);
bool is_binary(Op op);
bool is_commutative(Op op);
std::string_view op_name(Op op);
Op op_from_name(std::string_view name);

struct Node;

// Immutable expression tree with value semantics (subtrees are shared).
class Expr {
 public:
  Expr();  // literal 0

  static Expr literal(double v);
  static Expr fitted(double v);
  static Expr var(std::string name);
  static Expr unary(Op op, Expr child);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr powint(Expr base, int exponent);

  Op op() const;
  double value() const;
  ConstKind kind() const;
  const std::string& name() const;
  int exponent() const;
  std::size_t arity() const;
  const Expr& child(std::size_t i) const;

  bool is_constant() const { return op() == Op::constant; }

  std::string str() const;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Node {
  Op op = Op::constant;
  ConstKind kind = ConstKind::literal;
  double value = 0.0;
  int exponent = 0;
  std::string name;
  std::vector<Expr> children;
};

bool operator==(const Expr& a, const Expr& b);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

using Bindings = std::map<std::string, double, std::less<>>;
using DimensionMap = std::map<std::string, Dimension, std::less<>>;
using Domain = std::map<std::string, Interval, std::less<>>;

// Canonical infix with explicit parentheses. Literals print as plain numbers,
// fitted constants in braces ("{0.5}"), integer powers as "(x^2)".
std::string to_string(const Expr& e);
std::string format_number(double v);  // shortest round-trip form
Expr parse_expr(std::string_view text);

double eval(const Expr& e, const Bindings& bindings);

struct Dual {
  double value = 0.0;
  double deriv = 0.0;
};

// Value and derivative with respect to variable `wrt` (forward mode).
Dual eval_dual(const Expr& e, const Bindings& bindings, std::string_view wrt);

Dimension infer_dimension(const Expr& e, const DimensionMap& dims);

// Node-weight score: variable/literal 1, fitted constant 3, unary 2, binary 2.
// An integer power counts as a binary node whose right operand is a literal.
double complexity(const Expr& e);

std::size_t node_count(const Expr& e);

// Variables in order of first appearance (pre-order).
std::vector<std::string> free_variables(const Expr& e);

std::vector<double> fitted_constants(const Expr& e);
std::size_t count_fitted(const Expr& e);
// Replaces fitted constants in pre-order with `values`.
Expr with_fitted_constants(const Expr& e, std::span<const double> values);

Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements);

Expr simplify(const Expr& e);

struct EquivalenceOptions {
  std::size_t samples = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0x5eed;
  std::size_t max_retries = 1000;
};

// |a - b| <= tol * (1 + |b|) at `samples` quasi-random points of `domain`.
// Points where either side leaves its domain are resampled.
bool numeric_equivalence(const Expr& a, const Expr& b, const Domain& domain,
                         const EquivalenceOptions& opt = {});

// Postfix program over a fixed variable order, for hot evaluation loops.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const std::vector<std::string>& variables);

  // Returns false on a domain violation or non-finite result.
  bool try_eval(std::span<const double> vars, double& out) const;
  double eval(std::span<const double> vars) const;
  // Value and derivative with respect to variable slot `wrt`.
  bool try_eval_dual(std::span<const double> vars, std::size_t wrt, Dual& out) const;

  // Fitted-constant slots in pre-order; set before evaluation when fitting.
  std::size_t num_fitted() const { return fitted_slots_.size(); }
  void set_fitted(std::span<const double> values);

  struct Instr {
    Op op;
    int index = 0;  // variable slot
    int exponent = 0;
    double value = 0.0;
  };

  static bool apply_unary(Op op, double x, double& out);
  static bool apply_binary(Op op, double a, double b, int exponent, double& out);

  explicit CompiledExpr(std::vector<Instr> program);

 private:
  std::vector<Instr> program_;
  std::vector<std::size_t> fitted_slots_;
  std::size_t max_stack_ = 0;
};

}  // namespace dimsr
