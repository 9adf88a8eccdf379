#pragma once

// Bottom-up skeleton generator shared by enumerate() and regress().
// x - x and x / x are never formed.

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "dimsr/expr.hpp"
#include "dimsr/symreg.hpp"

namespace dimsr::detail {

constexpr int kLeafCost = 1;
constexpr int kFittedCost = 3;
constexpr int kUnaryCost = 2;
constexpr int kBinaryCost = 2;

struct ANode {
  Op op = Op::constant;
  bool fitted = false;
  bool has_var = false;
  std::uint8_t nfit = 0;
  std::int16_t cplx = 0;
  std::int32_t a = -1;
  std::int32_t b = -1;
  std::int32_t leaf = 0;  // variable or literal index
  std::int32_t dim = 0;   // index into the dimension table; 0 = dimensionless
};

// Dimension of a subtree that already mixes incompatible dimensions.
constexpr std::int32_t kInconsistentDim = -2;

class Enumerator {
 public:
  // With prune_subtrees, dimensionally inconsistent subtrees are dropped as
  // soon as they form; otherwise they are kept (marked kInconsistentDim) and
  // only the root decides.
  Enumerator(const Grammar& g, bool track_dims, std::size_t max_nodes = SIZE_MAX,
             bool prune_subtrees = false);

  const ANode& node(int id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  bool truncated() const { return truncated_; }
  int dim_id(const Dimension& d);

  // Generates every node of complexity c from the stored lower levels. Each
  // node is appended, offered to admit(id) (false drops it) and then to
  // visit(id) (false stops the whole search). Admitted nodes are kept for
  // reuse when `store` is set and capacity remains.
  template <class Admit, class Visit>
  bool build_level(int c, bool store, Admit&& admit, Visit&& visit);

  Expr to_expr(int id) const;
  void to_program(int id, std::vector<CompiledExpr::Instr>& prog) const;

 private:
  int unary_dim(Op op, int d);
  int binary_dim(Op op, int da, int db);
  template <class Admit, class Visit>
  int offer(const ANode& n, bool store, Admit& admit, Visit& visit);

  const Grammar& g_;
  bool track_;
  std::size_t max_nodes_;
  bool prune_;
  bool truncated_ = false;
  std::vector<ANode> nodes_;
  std::vector<std::vector<int>> levels_;
  std::vector<Dimension> dims_;
  std::map<Dimension, int> dim_index_;
  std::unordered_map<std::uint64_t, int> cache_;
};

// Returns 1 keep going, 0 stop.
template <class Admit, class Visit>
int Enumerator::offer(const ANode& n, bool store, Admit& admit, Visit& visit) {
  nodes_.push_back(n);
  int id = static_cast<int>(nodes_.size()) - 1;
  if (!admit(id)) {
    nodes_.pop_back();
    return 1;
  }
  bool go = visit(id);
  bool keep = store && nodes_.size() <= max_nodes_;
  if (store && !keep) truncated_ = true;
  if (keep) {
    levels_[n.cplx].push_back(id);
  } else {
    nodes_.pop_back();
  }
  return go ? 1 : 0;
}

template <class Admit, class Visit>
bool Enumerator::build_level(int c, bool store, Admit&& admit, Visit&& visit) {
  if (static_cast<int>(levels_.size()) <= c) levels_.resize(c + 1);

  if (c == kLeafCost) {
    for (std::size_t i = 0; i < g_.variables.size(); ++i) {
      ANode n;
      n.op = Op::var;
      n.has_var = true;
      n.cplx = static_cast<std::int16_t>(c);
      n.leaf = static_cast<std::int32_t>(i);
      n.dim = track_ ? dim_id(g_.variables[i].dimension) : 0;
      if (!offer(n, store, admit, visit)) return false;
    }
    for (std::size_t i = 0; i < g_.literals.size(); ++i) {
      ANode n;
      n.cplx = static_cast<std::int16_t>(c);
      n.leaf = static_cast<std::int32_t>(i);
      if (!offer(n, store, admit, visit)) return false;
    }
  }
  if (c == kFittedCost && g_.max_fitted > 0) {
    ANode n;
    n.fitted = true;
    n.nfit = 1;
    n.cplx = static_cast<std::int16_t>(c);
    if (!offer(n, store, admit, visit)) return false;
  }

  const int cu = c - kUnaryCost;
  if (cu >= 1) {
    for (Op op : g_.unary_ops) {
      // Index loop: levels_[cu] is not touched while building level c.
      const auto& kids = levels_[cu];
      for (std::size_t k = 0; k < kids.size(); ++k) {
        const ANode ch = nodes_[kids[k]];
        if (!ch.has_var) continue;
        if (ch.op == op && (op == Op::neg || op == Op::inv)) continue;
        int d = unary_dim(op, ch.dim);
        if (d < 0) {
          if (prune_) continue;
          d = kInconsistentDim;
        }
        ANode n;
        n.op = op;
        n.has_var = true;
        n.nfit = ch.nfit;
        n.cplx = static_cast<std::int16_t>(c);
        n.a = kids[k];
        n.dim = d;
        if (!offer(n, store, admit, visit)) return false;
      }
    }
  }

  const int cb_total = c - kBinaryCost;
  if (cb_total >= 2) {
    for (Op op : g_.binary_ops) {
      const bool comm = is_commutative(op);
      for (int ca = 1; ca <= cb_total - 1; ++ca) {
        const int cb = cb_total - ca;
        if (comm && ca > cb) break;
        const auto& la = levels_[ca];
        const auto& lb = levels_[cb];
        for (std::size_t i = 0; i < la.size(); ++i) {
          const ANode na = nodes_[la[i]];
          std::size_t j0 = (comm && ca == cb) ? i : 0;
          for (std::size_t j = j0; j < lb.size(); ++j) {
            const ANode nb = nodes_[lb[j]];
            if (!na.has_var && !nb.has_var) continue;
            if (la[i] == lb[j] && (op == Op::sub || op == Op::div)) continue;
            if (static_cast<std::size_t>(na.nfit) + nb.nfit > g_.max_fitted) continue;
            int d = binary_dim(op, na.dim, nb.dim);
            if (d < 0) {
              if (prune_) continue;
              d = kInconsistentDim;
            }
            ANode n;
            n.op = op;
            n.has_var = true;
            n.nfit = static_cast<std::uint8_t>(na.nfit + nb.nfit);
            n.cplx = static_cast<std::int16_t>(c);
            n.a = la[i];
            n.b = lb[j];
            n.dim = d;
            if (!offer(n, store, admit, visit)) return false;
          }
        }
      }
    }
  }
  return true;
}

}  // namespace dimsr::detail
