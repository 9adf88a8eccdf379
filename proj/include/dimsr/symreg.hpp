#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dimsr/data.hpp"
#include "dimsr/dimensions.hpp"
#include "dimsr/expr.hpp"

namespace dimsr {

struct GrammarVariable {
  std::string name;
  Dimension dimension;
};

struct Grammar {
  std::vector<Op> unary_ops;
  std::vector<Op> binary_ops;  // add, sub, mul, div
  std::vector<double> literals;
  std::size_t max_fitted = 0;
  std::vector<GrammarVariable> variables;

  void validate() const;
  bool dimensionless() const;
};

std::string grammar_to_json(const Grammar& g);
Grammar grammar_from_json(const std::string& text);

struct SearchBudget {
  int max_complexity = 15;
  std::size_t max_candidates = 1'000'000;
  double target_error = 1e-10;
  std::size_t max_stored = 4'000'000;  // subtrees kept for reuse
  // Drop dimensionally inconsistent subtrees instead of carrying them to the
  // root check. Much faster on dimensional problems, but then the
  // discarded trees are never enumerated or counted.
  bool prune_subtrees = false;

  void validate() const;
};

// Skeletons in nondecreasing complexity with a fixed order inside each level.
// Duplicates under argument swaps of add/mul are suppressed, every operator
// subtree contains a variable, and neg(neg x), inv(inv x), x - x, x / x are
// not formed.
// The visitor returns false to stop; enumerate returns false if it stopped.
bool enumerate(const Grammar& g, int max_complexity,
               const std::function<bool(const Expr&)>& visit);
std::vector<Expr> enumerate(const Grammar& g, const SearchBudget& budget);

struct PruneResult {
  bool keep = true;
  std::string reason;
};

PruneResult dimensional_prune(const Expr& e, const Grammar& g, const Dimension& target);

struct FitResult {
  bool ok = false;
  Expr expr;
  double mae = 0.0;
  std::string reason;
};

// Inputs are looked up by variable name; the last column is the target.
// Fitted constants are chosen by multi-start Nelder-Mead on the squared
// error; the reported error is the mean absolute error over all rows.
FitResult fit_constants(const Expr& skeleton, const Dataset& d, std::uint64_t seed = 0);

double mean_abs_error(const Expr& e, const Dataset& d);

struct ParetoEntry {
  int complexity = 0;
  double mae = 0.0;
  Expr expr;
  std::string text;

  bool operator==(const ParetoEntry& o) const {
    return complexity == o.complexity && mae == o.mae && text == o.text;
  }
};
using ParetoFront = std::vector<ParetoEntry>;

// Strictly increasing complexity and strictly decreasing error. Among equal
// complexity and error the lexicographically smaller text wins.
ParetoFront pareto_front(std::vector<ParetoEntry> candidates);
ParetoFront merge_fronts(const ParetoFront& a, const ParetoFront& b);
bool is_strictly_monotone(const ParetoFront& f);

// Highest -dlog(mae)/dcomplexity among entries within `slack` times the
// lowest error; the best entry when the front reached exact zero.
const ParetoEntry* select_entry(const ParetoFront& f, double slack = 1.5);

struct RegressStats {
  std::size_t candidates_examined = 0;  // distinct root trees considered
  std::size_t admissible = 0;           // of those, dimensionally consistent with the target
  std::size_t dimension_discarded = 0;
  std::size_t domain_rejected = 0;
  std::size_t fit_calls = 0;
  std::size_t stored_subtrees = 0;
  int complexity_reached = 0;
  bool reached_target = false;
  bool exhausted_budget = false;
  double wall_seconds = 0.0;
};

struct RegressResult {
  ParetoFront front;
  RegressStats stats;
  bool complete() const { return !front.empty(); }
};

RegressResult regress(const Dataset& d, const Grammar& g, const SearchBudget& budget,
                      const Dimension& target = {}, std::uint64_t seed = 0);

void write_front_csv(const ParetoFront& f, const std::string& path);
std::string front_to_csv(const ParetoFront& f);
std::string stats_to_json(const RegressStats& s, bool include_time = true);

}  // namespace dimsr
