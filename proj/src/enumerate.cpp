#include <algorithm>

#include "dimsr/error.hpp"
#include "dimsr/symreg.hpp"
#include "enumerator.hpp"

namespace dimsr {

namespace detail {

Enumerator::Enumerator(const Grammar& g, bool track_dims, std::size_t max_nodes,
                       bool prune_subtrees)
    : g_(g), track_(track_dims), max_nodes_(max_nodes), prune_(prune_subtrees) {
  dim_id(Dimension{});
}

int Enumerator::dim_id(const Dimension& d) {
  auto it = dim_index_.find(d);
  if (it != dim_index_.end()) return it->second;
  int id = static_cast<int>(dims_.size());
  dims_.push_back(d);
  dim_index_.emplace(d, id);
  return id;
}

namespace {
std::uint64_t key(Op op, int a, int b) {
  return (static_cast<std::uint64_t>(op) << 56) | (static_cast<std::uint64_t>(a) << 28) |
         static_cast<std::uint64_t>(b);
}
}  // namespace

int Enumerator::unary_dim(Op op, int d) {
  if (!track_) return 0;
  if (d == kInconsistentDim) return -1;
  switch (op) {
    case Op::neg: return d;
    case Op::inv:
    case Op::sqrt: {
      auto k = key(op, d, 0);
      auto it = cache_.find(k);
      if (it != cache_.end()) return it->second;
      Dimension r = op == Op::inv ? dims_[d].pow(-1) : dims_[d].pow(Rational(1, 2));
      int id = dim_id(r);
      cache_.emplace(k, id);
      return id;
    }
    default: return d == 0 ? 0 : -1;
  }
}

int Enumerator::binary_dim(Op op, int da, int db) {
  if (!track_) return 0;
  if (da == kInconsistentDim || db == kInconsistentDim) return -1;
  switch (op) {
    case Op::add:
    case Op::sub: return da == db ? da : -1;
    case Op::mul:
    case Op::div: {
      if (db == 0) return da;
      if (da == 0 && op == Op::mul) return db;
      auto k = key(op, da, db);
      auto it = cache_.find(k);
      if (it != cache_.end()) return it->second;
      Dimension r = op == Op::mul ? dims_[da] * dims_[db] : dims_[da] / dims_[db];
      int id = dim_id(r);
      cache_.emplace(k, id);
      return id;
    }
    default: return -1;
  }
}

Expr Enumerator::to_expr(int id) const {
  const ANode& n = nodes_[id];
  switch (n.op) {
    case Op::var: return Expr::var(g_.variables[n.leaf].name);
    case Op::constant: return n.fitted ? Expr::fitted(1.0) : Expr::literal(g_.literals[n.leaf]);
    default: break;
  }
  if (is_unary(n.op)) return Expr::unary(n.op, to_expr(n.a));
  return Expr::binary(n.op, to_expr(n.a), to_expr(n.b));
}

void Enumerator::to_program(int id, std::vector<CompiledExpr::Instr>& prog) const {
  const ANode& n = nodes_[id];
  if (n.a >= 0) to_program(n.a, prog);
  if (n.b >= 0) to_program(n.b, prog);
  CompiledExpr::Instr in{n.op};
  if (n.op == Op::var) {
    in.index = n.leaf;
  } else if (n.op == Op::constant) {
    in.index = n.fitted ? 1 : 0;
    in.value = n.fitted ? 1.0 : g_.literals[n.leaf];
  }
  prog.push_back(in);
}

}  // namespace detail

bool enumerate(const Grammar& g, int max_complexity,
               const std::function<bool(const Expr&)>& visit) {
  g.validate();
  detail::Enumerator en(g, false);
  for (int c = 1; c <= max_complexity; ++c) {
    bool go = en.build_level(
        c, c <= max_complexity - detail::kUnaryCost, [](int) { return true; },
        [&](int id) { return visit(en.to_expr(id)); });
    if (!go) return false;
  }
  return true;
}

std::vector<Expr> enumerate(const Grammar& g, const SearchBudget& budget) {
  budget.validate();
  std::vector<Expr> out;
  enumerate(g, budget.max_complexity, [&](const Expr& e) {
    if (out.size() >= budget.max_candidates) return false;
    out.push_back(e);
    return true;
  });
  return out;
}

}  // namespace dimsr
