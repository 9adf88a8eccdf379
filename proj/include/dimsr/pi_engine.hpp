#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dimsr/dimensions.hpp"
#include "dimsr/expr.hpp"

namespace dimsr {

// Product of variables raised to rational powers, in variable input order.
// Zero exponents are never stored.
using Monomial = std::vector<std::pair<std::string, Rational>>;

// "U r2 / (G m1^2)"; the empty monomial prints as "1".
std::string format_monomial(const Monomial& m);
Dimension monomial_dimension(const Monomial& m, const std::vector<VariableSpec>& vars);
Expr monomial_expr(const Monomial& m);
// Throws DomainError on a zero base with a negative power or a negative base
// with a fractional power.
double eval_monomial(const Monomial& m, const Bindings& values);

struct PiGroup {
  std::string name;
  Monomial exponents;

  bool trivial() const { return exponents.empty(); }
  std::string str() const { return format_monomial(exponents); }
};

// n - rank groups from the integer null-space basis of the dimensional matrix.
std::vector<PiGroup> derive_pi_groups(const std::vector<VariableSpec>& vars);

bool verify_dimensionless(const PiGroup& g, const std::vector<VariableSpec>& vars);

// Exact membership of `target` in the rational span of `basis`.
bool in_rational_span(const Monomial& target, const std::vector<PiGroup>& basis,
                      const std::vector<VariableSpec>& vars);

struct EliminationStep {
  std::string scale_variable;  // variable whose current form served as the scale
  Monomial scale;              // that form over the original variables, e.g. A / B
  BaseDimension eliminated = BaseDimension::M;
  Monomial rescale_map;        // variable -> power of `scale` it was multiplied by
};

struct NondimPlan {
  std::vector<VariableSpec> variables;
  std::vector<EliminationStep> steps;
  // One entry per original variable, in input order. Scale variables map to
  // the trivial group.
  std::vector<std::pair<std::string, PiGroup>> variable_map;
  std::string dependent;
  std::string independent;
  // original = group * scale for the dependent and independent variables.
  Monomial dependent_scale;
  Monomial time_scale;
  // Factor taking the dimensionless hidden term back to the original equation;
  // dependent_scale / time_scale for a first-order equation.
  Monomial term_scale;
  std::vector<std::string> hidden_args;  // group names

  const PiGroup& group_for(const std::string& variable) const;
  std::optional<std::string> variable_for_group(const std::string& group_name) const;
  std::vector<std::string> group_names() const;  // non-trivial groups, input order

  void rename(const std::map<std::string, std::string>& old_to_new);
};

// Greedy hidden-first Ipsen elimination; when the hidden term has at most six
// dimensional arguments every hidden-first ordering is tried and the plan with
// the fewest hidden arguments wins (ties keep the greedy preference order).
NondimPlan ipsen_plan(const std::vector<VariableSpec>& vars);

NondimPlan identity_plan(const std::vector<VariableSpec>& vars);

// Plan from hand-chosen groups keyed by the variable they replace; variables
// without an entry are scales. Every group must be dimensionless.
NondimPlan plan_from_groups(const std::vector<VariableSpec>& vars,
                            const std::vector<std::pair<std::string, PiGroup>>& groups,
                            const std::string& dependent, const std::string& independent,
                            std::optional<Monomial> term_scale = std::nullopt);

// Evaluates every non-trivial group whose variables are all bound.
std::map<std::string, double> nondim_transform(const NondimPlan& plan, const Bindings& row);

// Inverse of nondim_transform: recovers each non-scale variable from its
// group value and the scale-variable values in `scales`.
Bindings redim_transform(const NondimPlan& plan, const std::map<std::string, double>& groups,
                         const Bindings& scales);

// Substitutes each group by its monomial and multiplies by the term scale.
Expr redimensionalize(const Expr& e, const NondimPlan& plan);

std::string plan_to_json(const NondimPlan& plan);
NondimPlan plan_from_json(const std::string& text);

}  // namespace dimsr
