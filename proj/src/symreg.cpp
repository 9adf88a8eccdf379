#include "dimsr/symreg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "dimsr/error.hpp"
#include "dimsr/rng.hpp"
#include "enumerator.hpp"
#include "json.hpp"

namespace dimsr {

void Grammar::validate() const {
  for (Op op : unary_ops) {
    if (!is_unary(op)) throw Error("'" + std::string(op_name(op)) + "' is not a unary operator");
  }
  for (Op op : binary_ops) {
    if (!is_binary(op) || op == Op::powint) {
      throw Error("'" + std::string(op_name(op)) + "' is not a usable binary operator");
    }
  }
  for (double v : literals) {
    if (!std::isfinite(v)) throw Error("literals must be finite");
  }
  if (variables.empty()) throw Error("grammar needs at least one variable");
  for (std::size_t i = 0; i < variables.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (variables[i].name == variables[j].name) {
        throw Error("duplicate grammar variable '" + variables[i].name + "'");
      }
    }
  }
}

bool Grammar::dimensionless() const {
  return std::all_of(variables.begin(), variables.end(),
                     [](const GrammarVariable& v) { return v.dimension.dimensionless(); });
}

std::string grammar_to_json(const Grammar& g) {
  nlohmann::ordered_json j;
  auto names = [](const std::vector<Op>& ops) {
    std::vector<std::string> out;
    for (Op op : ops) out.emplace_back(op_name(op));
    return out;
  };
  j["unary"] = names(g.unary_ops);
  j["binary"] = names(g.binary_ops);
  j["literals"] = g.literals;
  j["max_fitted"] = g.max_fitted;
  auto vars = nlohmann::ordered_json::array();
  for (const auto& v : g.variables) vars.push_back({{"name", v.name}, {"dimension", v.dimension.str()}});
  j["variables"] = vars;
  return j.dump(2);
}

Grammar grammar_from_json(const std::string& text) {
  Grammar g;
  try {
    auto j = nlohmann::json::parse(text);
    for (const auto& s : j.value("unary", std::vector<std::string>{})) g.unary_ops.push_back(op_from_name(s));
    for (const auto& s : j.value("binary", std::vector<std::string>{})) g.binary_ops.push_back(op_from_name(s));
    g.literals = j.value("literals", std::vector<double>{});
    g.max_fitted = j.value("max_fitted", std::size_t{0});
    for (const auto& v : j.at("variables")) {
      g.variables.push_back(
          {v.at("name").get<std::string>(), parse_dimension(v.value("dimension", std::string{}))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed grammar JSON: ") + e.what());
  }
  g.validate();
  return g;
}

void SearchBudget::validate() const {
  if (max_complexity <= 0 || max_candidates == 0 || !(target_error > 0.0) || max_stored == 0) {
    throw Error("search budget entries must be positive");
  }
}

PruneResult dimensional_prune(const Expr& e, const Grammar& g, const Dimension& target) {
  DimensionMap dims;
  for (const auto& v : g.variables) dims.emplace(v.name, v.dimension);
  try {
    Dimension d = infer_dimension(e, dims);
    if (d != target) {
      return {false, "dimension [" + d.str() + "] differs from target [" + target.str() + "]"};
    }
  } catch (const DimensionError& err) {
    return {false, err.what()};
  }
  return {true, {}};
}

// ---------------------------------------------------------------------------
// Constant fitting

namespace {

struct Table {
  std::vector<double> x;  // row-major, one column per variable
  std::vector<double> y;
  std::size_t nv = 0;
  std::size_t rows() const { return y.size(); }
  std::span<const double> row(std::size_t r) const { return {x.data() + r * nv, nv}; }
};

Table make_table(const Dataset& d, const std::vector<std::string>& vars) {
  if (d.num_rows() == 0) throw Error("dataset has no rows");
  if (d.num_cols() < 1) throw Error("dataset has no target column");
  std::vector<std::size_t> idx;
  for (const auto& v : vars) idx.push_back(d.column_index(v));
  Table t;
  t.nv = vars.size();
  const std::size_t target = d.num_cols() - 1;
  for (std::size_t r = 0; r < d.num_rows(); ++r) {
    for (std::size_t i : idx) t.x.push_back(d.at(r, i));
    t.y.push_back(d.at(r, target));
  }
  return t;
}

std::vector<std::size_t> strided_rows(std::size_t n, std::size_t k) {
  std::vector<std::size_t> out;
  if (n <= k) {
    out.resize(n);
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  for (std::size_t i = 0; i < k; ++i) out.push_back(i * n / k);
  return out;
}

// Mean absolute error, or +inf when the program leaves its domain.
double program_mae(const CompiledExpr& p, const Table& t) {
  double s = 0.0;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    double v = 0.0;
    if (!p.try_eval(t.row(r), v)) return std::numeric_limits<double>::infinity();
    s += std::abs(v - t.y[r]);
  }
  return s / static_cast<double>(t.rows());
}

struct NmResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
};

template <class F>
NmResult nelder_mead(F&& f, std::vector<double> x0, int max_iter) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> s(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) s[i + 1][i] += 0.25 + 0.1 * std::abs(x0[i]);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(s[i]);
  std::vector<std::size_t> ord(n + 1);
  auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = c[i] + t * (w[i] - c[i]);
    return p;
  };
  for (int it = 0; it < max_iter; ++it) {
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = ord.front(), worst = ord.back(), second = ord[n - 1];
    if (fv[best] == 0.0) break;
    double spread = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        spread = std::max(spread, std::abs(s[i][k] - s[best][k]) / (1.0 + std::abs(s[best][k])));
      }
    }
    if (spread < 1e-14 && std::isfinite(fv[worst])) break;

    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) c[k] += s[i][k] / static_cast<double>(n);
    }
    auto xr = point(c, s[worst], -1.0);
    double fr = f(xr);
    if (fr < fv[best]) {
      auto xe = point(c, s[worst], -2.0);
      double fe = f(xe);
      if (fe < fr) {
        s[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        s[worst] = std::move(xr);
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      s[worst] = std::move(xr);
      fv[worst] = fr;
      continue;
    }
    bool outside = fr < fv[worst];
    auto xc = point(c, outside ? xr : s[worst], 0.5);
    double fc = f(xc);
    if (fc < (outside ? fr : fv[worst])) {
      s[worst] = std::move(xc);
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      s[i] = point(s[best], s[i], 0.5);
      fv[i] = f(s[i]);
    }
  }
  std::size_t b = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return {s[b], fv[b]};
}

// Observational equivalence: subtrees agreeing on every probe row (to about
// 12 significant digits) and sharing a dimension are interchangeable for the
// search, so only the first one found is kept.
struct ValueKey {
  std::uint64_t h1 = 0, h2 = 0;
  bool operator==(const ValueKey&) const = default;
};
struct ValueKeyHash {
  std::size_t operator()(const ValueKey& k) const { return static_cast<std::size_t>(k.h1); }
};

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

ValueKey value_key(const double* v, std::size_t n, int dim) {
  ValueKey k{mix(static_cast<std::uint64_t>(dim)), mix(static_cast<std::uint64_t>(dim) + 77)};
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t q = 0;
    if (v[i] != 0.0) {
      int e = 0;
      double m = std::frexp(v[i], &e);
      q = static_cast<std::uint64_t>(std::llround(m * 0x1.0p40)) ^
          (static_cast<std::uint64_t>(static_cast<std::int64_t>(e)) << 48);
    }
    k.h1 = mix(k.h1 ^ q);
    k.h2 = mix(k.h2 + 0x632be59bd9b4e019ULL * (q + i));
  }
  return k;
}

constexpr std::size_t kFitRows = 64;
constexpr int kRestarts = 8;
constexpr int kMaxIter = 500;

}  // namespace

FitResult fit_constants(const Expr& skeleton, const Dataset& d, std::uint64_t seed) {
  auto vars = free_variables(skeleton);
  Table t = make_table(d, vars);
  CompiledExpr prog(skeleton, vars);
  FitResult out;
  const std::size_t k = prog.num_fitted();
  if (k == 0) {
    double mae = program_mae(prog, t);
    if (!std::isfinite(mae)) {
      out.reason = "leaves its domain on the data";
      return out;
    }
    return {true, skeleton, mae, {}};
  }

  auto rows = strided_rows(t.rows(), kFitRows);
  auto mse = [&](const std::vector<double>& c) {
    prog.set_fitted(c);
    double s = 0.0;
    for (std::size_t r : rows) {
      double v = 0.0;
      if (!prog.try_eval(t.row(r), v)) return std::numeric_limits<double>::infinity();
      double e = v - t.y[r];
      s += e * e;
    }
    return s / static_cast<double>(rows.size());
  };

  Rng rng(seed);
  NmResult best;
  std::vector<double> x0 = fitted_constants(skeleton);
  for (int start = 0; start < kRestarts; ++start) {
    if (start > 0) {
      for (double& v : x0) v = 2.0 * rng.normal();
    }
    NmResult r = nelder_mead(mse, x0, kMaxIter);
    if (r.f < best.f) best = std::move(r);
    if (best.f == 0.0) break;
  }
  if (!std::isfinite(best.f)) {
    out.reason = "every start leaves the operator domains";
    return out;
  }
  prog.set_fitted(best.x);
  double mae = program_mae(prog, t);
  if (!std::isfinite(mae)) {
    out.reason = "fitted constants leave the domain on the full data";
    return out;
  }
  return {true, with_fitted_constants(skeleton, best.x), mae, {}};
}

double mean_abs_error(const Expr& e, const Dataset& d) {
  auto vars = free_variables(e);
  Table t = make_table(d, vars);
  return program_mae(CompiledExpr(e, vars), t);
}

// ---------------------------------------------------------------------------
// Pareto fronts

ParetoFront pareto_front(std::vector<ParetoEntry> candidates) {
  std::erase_if(candidates, [](const ParetoEntry& e) { return !std::isfinite(e.mae); });
  std::sort(candidates.begin(), candidates.end(), [](const ParetoEntry& a, const ParetoEntry& b) {
    if (a.complexity != b.complexity) return a.complexity < b.complexity;
    if (a.mae != b.mae) return a.mae < b.mae;
    return a.text < b.text;
  });
  ParetoFront out;
  for (auto& c : candidates) {
    if (out.empty() || c.mae < out.back().mae) {
      if (!out.empty() && out.back().complexity == c.complexity) continue;
      out.push_back(std::move(c));
    }
  }
  return out;
}

ParetoFront merge_fronts(const ParetoFront& a, const ParetoFront& b) {
  std::vector<ParetoEntry> all(a);
  all.insert(all.end(), b.begin(), b.end());
  return pareto_front(std::move(all));
}

bool is_strictly_monotone(const ParetoFront& f) {
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (!(f[i].complexity > f[i - 1].complexity) || !(f[i].mae < f[i - 1].mae)) return false;
  }
  return true;
}

const ParetoEntry* select_entry(const ParetoFront& f, double slack) {
  if (f.empty()) return nullptr;
  const double floor = 1e-300;
  const double best = std::max(f.back().mae, floor);
  const ParetoEntry* pick = nullptr;
  double pick_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    double m = std::max(f[i].mae, floor);
    if (m > slack * best) continue;
    double score = 0.0;
    if (i > 0) {
      score = -(std::log(m) - std::log(std::max(f[i - 1].mae, floor))) /
              static_cast<double>(f[i].complexity - f[i - 1].complexity);
    }
    if (score > pick_score) {
      pick_score = score;
      pick = &f[i];
    }
  }
  return pick;
}

// ---------------------------------------------------------------------------
// Search

RegressResult regress(const Dataset& d, const Grammar& g, const SearchBudget& budget,
                      const Dimension& target, std::uint64_t seed) {
  g.validate();
  budget.validate();
  const auto t_start = std::chrono::steady_clock::now();
  std::vector<std::string> names;
  for (const auto& v : g.variables) names.push_back(v.name);
  const Table t = make_table(d, names);
  const std::size_t n = t.rows();

  // Probe rows carry cached subtree values; with few rows they are all rows.
  constexpr std::size_t kProbe = 32;
  const auto probe = strided_rows(n, kProbe);
  const std::size_t P = probe.size();
  std::vector<double> probe_y;
  for (std::size_t r : probe) probe_y.push_back(t.y[r]);

  const bool track = !g.dimensionless();
  detail::Enumerator en(g, track, budget.max_stored, budget.prune_subtrees);
  const int target_dim = track ? en.dim_id(target) : 0;
  if (!track && !target.dimensionless()) {
    throw DimensionError("dimensionless grammar cannot produce target [" + target.str() + "]");
  }

  std::vector<double> cache;
  std::vector<std::uint8_t> cached;
  std::unordered_set<ValueKey, ValueKeyHash> seen;

  auto admit = [&](int id) {
    const detail::ANode& nd = en.node(id);
    const std::size_t need = static_cast<std::size_t>(id + 1);
    if (cache.size() < need * P) {
      cache.resize(std::max(need * P, cache.size() * 2));
      cached.resize(std::max(need, cached.size() * 2));
    }
    double* out = cache.data() + static_cast<std::size_t>(id) * P;
    if (nd.op == Op::var) {
      for (std::size_t i = 0; i < P; ++i) out[i] = t.row(probe[i])[nd.leaf];
      cached[id] = 1;
      return seen.insert(value_key(out, P, nd.dim)).second;
    }
    if (nd.op == Op::constant) {
      if (nd.fitted) {
        cached[id] = 0;
      } else {
        std::fill(out, out + P, g.literals[nd.leaf]);
        cached[id] = 1;
        return seen.insert(value_key(out, P, nd.dim)).second;
      }
      return true;
    }
    if (!cached[nd.a] || (nd.b >= 0 && !cached[nd.b])) {
      cached[id] = 0;
      return true;
    }
    const double* a = cache.data() + static_cast<std::size_t>(nd.a) * P;
    if (is_unary(nd.op)) {
      for (std::size_t i = 0; i < P; ++i) {
        if (!CompiledExpr::apply_unary(nd.op, a[i], out[i])) return false;
      }
    } else {
      const double* b = cache.data() + static_cast<std::size_t>(nd.b) * P;
      for (std::size_t i = 0; i < P; ++i) {
        if (!CompiledExpr::apply_binary(nd.op, a[i], b[i], 0, out[i])) return false;
      }
    }
    cached[id] = 1;
    return seen.insert(value_key(out, P, nd.dim)).second;
  };

  struct Best {
    double mae;
    Expr expr;
    std::string text;
  };
  std::map<int, Best> best;
  RegressResult res;
  auto& st = res.stats;
  double running_best = std::numeric_limits<double>::infinity();  // over all lower levels
  std::vector<CompiledExpr::Instr> prog_buf;

  auto visit = [&](int id) {
    const detail::ANode& nd = en.node(id);
    if (st.candidates_examined >= budget.max_candidates) {
      st.exhausted_budget = true;
      return false;
    }
    ++st.candidates_examined;
    if (track && nd.dim != target_dim) {
      ++st.dimension_discarded;
      return true;
    }
    ++st.admissible;
    const int c = nd.cplx;
    auto it = best.find(c);
    const double thr = std::min(running_best, it == best.end()
                                                  ? std::numeric_limits<double>::infinity()
                                                  : it->second.mae);
    const double dn = static_cast<double>(n);
    double mae = 0.0;
    Expr expr;
    if (nd.nfit > 0) {
      ++st.fit_calls;
      FitResult fr = fit_constants(en.to_expr(id), d, seed);
      if (!fr.ok) {
        ++st.domain_rejected;
        return true;
      }
      mae = fr.mae;
      expr = fr.expr;
    } else {
      const double* v = cache.data() + static_cast<std::size_t>(id) * P;
      double s = 0.0;
      for (std::size_t i = 0; i < P; ++i) s += std::abs(v[i] - probe_y[i]);
      if (P == n) {
        mae = s / dn;
      } else {
        if (s / dn > thr) return true;
        prog_buf.clear();
        en.to_program(id, prog_buf);
        CompiledExpr prog(prog_buf);
        s = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          double val = 0.0;
          if (!prog.try_eval(t.row(r), val)) {
            ++st.domain_rejected;
            return true;
          }
          s += std::abs(val - t.y[r]);
          if ((r & 63) == 63 && s / dn > thr) return true;
        }
        mae = s / dn;
      }
      if (mae > thr || !std::isfinite(mae)) return true;
      expr = en.to_expr(id);
    }
    if (!std::isfinite(mae) || mae > thr) return true;
    std::string text = to_string(expr);
    if (it == best.end()) {
      best.emplace(c, Best{mae, expr, std::move(text)});
    } else if (mae < it->second.mae || (mae == it->second.mae && text < it->second.text)) {
      it->second = Best{mae, expr, std::move(text)};
    }
    if (mae <= budget.target_error) {
      st.reached_target = true;
      return false;
    }
    return true;
  };

  for (int c = 1; c <= budget.max_complexity; ++c) {
    st.complexity_reached = c;
    bool store = c <= budget.max_complexity - detail::kUnaryCost;
    bool go = en.build_level(c, store, admit, visit);
    auto it = best.find(c);
    if (it != best.end()) running_best = std::min(running_best, it->second.mae);
    if (!go) break;
  }

  std::vector<ParetoEntry> entries;
  for (auto& [c, b] : best) entries.push_back({c, b.mae, b.expr, b.text});
  res.front = pareto_front(std::move(entries));
  st.stored_subtrees = en.size();
  st.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

// ---------------------------------------------------------------------------
// Export

std::string front_to_csv(const ParetoFront& f) {
  std::ostringstream os;
  os << "complexity,mae,expression\n";
  for (const auto& e : f) os << e.complexity << ',' << format_number(e.mae) << ',' << e.text << '\n';
  return os.str();
}

void write_front_csv(const ParetoFront& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << front_to_csv(f);
}

std::string stats_to_json(const RegressStats& s, bool include_time) {
  nlohmann::ordered_json j;
  j["candidates_examined"] = s.candidates_examined;
  j["admissible"] = s.admissible;
  j["dimension_discarded"] = s.dimension_discarded;
  j["domain_rejected"] = s.domain_rejected;
  j["fit_calls"] = s.fit_calls;
  j["stored_subtrees"] = s.stored_subtrees;
  j["complexity_reached"] = s.complexity_reached;
  j["reached_target"] = s.reached_target;
  j["exhausted_budget"] = s.exhausted_budget;
  if (include_time) j["wall_seconds"] = s.wall_seconds;
  return j.dump(2);
}

}  // namespace dimsr
