#include "dimsr/pi_engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dimsr/error.hpp"
#include "json.hpp"

namespace dimsr {

namespace {

using ExpVec = std::vector<Rational>;

std::size_t index_of(const std::vector<VariableSpec>& vars, const std::string& name) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].name == name) return i;
  }
  throw Error("unknown variable '" + name + "'");
}

ExpVec to_vec(const Monomial& m, const std::vector<VariableSpec>& vars) {
  ExpVec v(vars.size(), Rational(0));
  for (const auto& [name, p] : m) v[index_of(vars, name)] += p;
  return v;
}

Monomial to_monomial(const ExpVec& v, const std::vector<VariableSpec>& vars) {
  Monomial m;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != Rational(0)) m.emplace_back(vars[i].name, v[i]);
  }
  return m;
}

Dimension vec_dimension(const ExpVec& v, const std::vector<VariableSpec>& vars) {
  Dimension d;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != Rational(0)) d = dimension_combine(d, vars[i].dimension, v[i]);
  }
  return d;
}

std::string factor_text(const std::string& name, const Rational& p) {
  if (p == Rational(1)) return name;
  return name + "^" + to_string(p);
}

}  // namespace

std::string format_monomial(const Monomial& m) {
  std::vector<std::string> num;
  std::vector<std::string> den;
  bool den_has_power = false;
  for (const auto& [name, p] : m) {
    if (p > 0) {
      num.push_back(factor_text(name, p));
    } else {
      den.push_back(factor_text(name, -p));
      den_has_power = den_has_power || p != Rational(-1);
    }
  }
  auto join = [](const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& s : parts) {
      if (!out.empty()) out += ' ';
      out += s;
    }
    return out;
  };
  std::string out = num.empty() ? "1" : join(num);
  if (den.empty()) return out;
  if (den.size() == 1 && !den_has_power) return out + " / " + den.front();
  return out + " / (" + join(den) + ")";
}

Dimension monomial_dimension(const Monomial& m, const std::vector<VariableSpec>& vars) {
  return vec_dimension(to_vec(m, vars), vars);
}

namespace {

Expr power_expr(const std::string& name, const Rational& p) {
  Expr base = Expr::var(name);
  std::int64_t num = p.numerator();
  if (p.denominator() == 2) {
    base = Expr::unary(Op::sqrt, base);
  } else if (p.denominator() != 1) {
    throw Error("cannot express power " + to_string(p) + " of '" + name + "' as an expression");
  }
  return num == 1 ? base : Expr::powint(base, static_cast<int>(num));
}

}  // namespace

Expr monomial_expr(const Monomial& m) {
  std::optional<Expr> num;
  std::optional<Expr> den;
  for (const auto& [name, p] : m) {
    auto& side = p > 0 ? num : den;
    Expr f = power_expr(name, p > 0 ? p : -p);
    side = side ? *side * f : f;
  }
  if (!num && !den) return Expr::literal(1.0);
  if (!den) return *num;
  return (num ? *num : Expr::literal(1.0)) / *den;
}

double eval_monomial(const Monomial& m, const Bindings& values) {
  double out = 1.0;
  for (const auto& [name, p] : m) {
    auto it = values.find(name);
    if (it == values.end()) throw Error("unbound variable '" + name + "'");
    double x = it->second;
    if (p.denominator() == 1) {
      if (x == 0.0 && p < 0) throw DomainError("zero scale '" + name + "' raised to a negative power");
      out *= std::pow(x, static_cast<double>(p.numerator()));
    } else {
      if (x < 0.0) throw DomainError("negative scale '" + name + "' raised to a fractional power");
      if (x == 0.0 && p < 0) throw DomainError("zero scale '" + name + "' raised to a negative power");
      out *= std::pow(x, static_cast<double>(p.numerator()) / static_cast<double>(p.denominator()));
    }
  }
  return out;
}

std::vector<PiGroup> derive_pi_groups(const std::vector<VariableSpec>& vars) {
  if (vars.empty()) throw Error("derive_pi_groups needs at least one variable");
  DimensionalMatrix m = build_matrix(vars);
  auto basis = null_space(m);
  std::vector<PiGroup> groups;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    PiGroup g{"pi" + std::to_string(i + 1), to_monomial(basis[i], vars)};
    if (!verify_dimensionless(g, vars)) throw Error("internal: null-space vector is dimensional");
    groups.push_back(std::move(g));
  }
  return groups;
}

bool verify_dimensionless(const PiGroup& g, const std::vector<VariableSpec>& vars) {
  return monomial_dimension(g.exponents, vars).dimensionless();
}

bool in_rational_span(const Monomial& target, const std::vector<PiGroup>& basis,
                      const std::vector<VariableSpec>& vars) {
  RationalMatrix rows;
  for (const auto& g : basis) rows.push_back(to_vec(g.exponents, vars));
  std::size_t r = rank(rows);
  rows.push_back(to_vec(target, vars));
  return rank(rows) == r;
}

// ---------------------------------------------------------------------------
// NondimPlan

const PiGroup& NondimPlan::group_for(const std::string& variable) const {
  for (const auto& [v, g] : variable_map) {
    if (v == variable) return g;
  }
  throw Error("plan has no variable '" + variable + "'");
}

std::optional<std::string> NondimPlan::variable_for_group(const std::string& group_name) const {
  for (const auto& [v, g] : variable_map) {
    if (!g.trivial() && g.name == group_name) return v;
  }
  return std::nullopt;
}

std::vector<std::string> NondimPlan::group_names() const {
  std::vector<std::string> out;
  for (const auto& [v, g] : variable_map) {
    if (!g.trivial()) out.push_back(g.name);
  }
  return out;
}

void NondimPlan::rename(const std::map<std::string, std::string>& old_to_new) {
  for (auto& [v, g] : variable_map) {
    auto it = old_to_new.find(g.name);
    if (it != old_to_new.end()) g.name = it->second;
  }
  for (auto& h : hidden_args) {
    auto it = old_to_new.find(h);
    if (it != old_to_new.end()) h = it->second;
  }
}

namespace {

bool is_hidden_side(Role r) {
  return r == Role::hidden_arg || r == Role::shared || r == Role::dependent;
}

struct Elimination {
  std::vector<ExpVec> mono;  // current form of every variable
  std::vector<EliminationStep> steps;
};

struct Choice {
  std::size_t var;
  BaseDimension dim;
};

std::size_t nonzero_dims(const Dimension& d) {
  std::size_t n = 0;
  for (auto b : kAllBaseDimensions) n += d[b] != Rational(0) ? 1 : 0;
  return n;
}

// Ordered by (number of base dimensions, input order, dimension order).
std::vector<Choice> scale_choices(const Elimination& st, const std::vector<VariableSpec>& vars,
                                  bool hidden_phase) {
  struct Ranked {
    int tier;
    std::size_t nnz;
    std::size_t var;
    BaseDimension dim;
  };
  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    Role r = vars[i].role;
    if (r == Role::dependent) continue;
    int tier = 0;
    if (hidden_phase) {
      if (!is_hidden_side(r)) continue;
    } else {
      tier = r == Role::known_arg ? 0 : r == Role::independent ? 1 : 2;
    }
    Dimension d = vec_dimension(st.mono[i], vars);
    std::size_t nnz = nonzero_dims(d);
    if (nnz == 0) continue;
    for (auto b : kAllBaseDimensions) {
      if (d[b] != Rational(0)) ranked.push_back({tier, nnz, i, b});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.tier != b.tier) return a.tier < b.tier;
    if (a.nnz != b.nnz) return a.nnz < b.nnz;
    return a.var < b.var;
  });
  std::vector<Choice> out;
  for (const auto& r : ranked) out.push_back({r.var, r.dim});
  return out;
}

void apply_step(Elimination& st, const std::vector<VariableSpec>& vars, const Choice& c) {
  ExpVec scale = st.mono[c.var];
  Rational es = vec_dimension(scale, vars)[c.dim];
  EliminationStep step;
  step.scale_variable = vars[c.var].name;
  step.scale = to_monomial(scale, vars);
  step.eliminated = c.dim;
  ExpVec rescale(vars.size(), Rational(0));
  for (std::size_t w = 0; w < vars.size(); ++w) {
    Rational ew = vec_dimension(st.mono[w], vars)[c.dim];
    if (ew == Rational(0)) continue;
    Rational p = -ew / es;
    rescale[w] = p;
    for (std::size_t k = 0; k < vars.size(); ++k) st.mono[w][k] += p * scale[k];
  }
  step.rescale_map = to_monomial(rescale, vars);
  st.steps.push_back(std::move(step));
}

bool hidden_side_dimensional(const Elimination& st, const std::vector<VariableSpec>& vars) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (is_hidden_side(vars[i].role) && !vec_dimension(st.mono[i], vars).dimensionless()) {
      return true;
    }
  }
  return false;
}

bool any_dimensional(const Elimination& st, const std::vector<VariableSpec>& vars) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (!vec_dimension(st.mono[i], vars).dimensionless()) return true;
  }
  return false;
}

// Finishes with known-side scales, greedily.
void finish_known(Elimination& st, const std::vector<VariableSpec>& vars) {
  while (any_dimensional(st, vars)) {
    auto choices = scale_choices(st, vars, false);
    if (choices.empty()) {
      for (std::size_t i = 0; i < vars.size(); ++i) {
        Dimension d = vec_dimension(st.mono[i], vars);
        if (!d.dimensionless()) {
          throw DimensionError("cannot nondimensionalize '" + vars[i].name + "': [" + d.str() +
                               "] is not spanned by any scale variable");
        }
      }
    }
    apply_step(st, vars, choices.front());
  }
}

std::vector<std::size_t> hidden_arg_indices(const Elimination& st,
                                            const std::vector<VariableSpec>& vars) {
  std::vector<std::size_t> out;
  std::vector<ExpVec> seen;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (!is_hidden_side(vars[i].role) || vars[i].dimension.dimensionless()) continue;
    const ExpVec& m = st.mono[i];
    bool constant = std::all_of(m.begin(), m.end(), [](const Rational& q) { return q == Rational(0); });
    if (constant || std::find(seen.begin(), seen.end(), m) != seen.end()) continue;
    seen.push_back(m);
    out.push_back(i);
  }
  return out;
}

void search_hidden(Elimination st, const std::vector<VariableSpec>& vars, bool exhaustive,
                   std::optional<Elimination>& best, std::size_t& best_count) {
  if (hidden_side_dimensional(st, vars)) {
    auto choices = scale_choices(st, vars, true);
    if (!choices.empty()) {
      std::size_t n = exhaustive ? choices.size() : 1;
      for (std::size_t k = 0; k < n; ++k) {
        Elimination next = st;
        apply_step(next, vars, choices[k]);
        search_hidden(std::move(next), vars, exhaustive, best, best_count);
      }
      return;
    }
  }
  finish_known(st, vars);
  std::size_t count = hidden_arg_indices(st, vars).size();
  if (!best || count < best_count) {
    best_count = count;
    best = std::move(st);
  }
}

NondimPlan assemble(const std::vector<VariableSpec>& vars, Elimination st) {
  NondimPlan plan;
  plan.variables = vars;
  plan.steps = std::move(st.steps);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    PiGroup g{"pi_" + vars[i].name, to_monomial(st.mono[i], vars)};
    plan.variable_map.emplace_back(vars[i].name, std::move(g));
    if (vars[i].role == Role::dependent) plan.dependent = vars[i].name;
    if (vars[i].role == Role::independent) plan.independent = vars[i].name;
  }
  auto scale_of = [&](const std::string& name) {
    std::size_t i = index_of(vars, name);
    ExpVec s(vars.size(), Rational(0));
    s[i] = 1;
    for (std::size_t k = 0; k < vars.size(); ++k) s[k] -= st.mono[i][k];
    return s;
  };
  ExpVec dep(vars.size(), Rational(0));
  ExpVec tim(vars.size(), Rational(0));
  if (!plan.dependent.empty()) dep = scale_of(plan.dependent);
  if (!plan.independent.empty()) tim = scale_of(plan.independent);
  plan.dependent_scale = to_monomial(dep, vars);
  plan.time_scale = to_monomial(tim, vars);
  ExpVec term(vars.size(), Rational(0));
  for (std::size_t k = 0; k < vars.size(); ++k) term[k] = dep[k] - tim[k];
  plan.term_scale = to_monomial(term, vars);
  for (auto i : hidden_arg_indices(st, vars)) {
    plan.hidden_args.push_back(plan.variable_map[i].second.name);
  }
  return plan;
}

}  // namespace

NondimPlan ipsen_plan(const std::vector<VariableSpec>& vars) {
  validate_variables(vars);
  if (std::count_if(vars.begin(), vars.end(),
                    [](const VariableSpec& v) { return v.role == Role::dependent; }) > 1) {
    throw Error("at most one dependent variable is allowed");
  }
  Elimination start;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    ExpVec v(vars.size(), Rational(0));
    v[i] = 1;
    start.mono.push_back(std::move(v));
  }
  std::size_t hidden_dimensional = std::count_if(vars.begin(), vars.end(), [](const VariableSpec& v) {
    return is_hidden_side(v.role) && !v.dimension.dimensionless();
  });
  std::optional<Elimination> best;
  std::size_t best_count = 0;
  search_hidden(start, vars, hidden_dimensional <= 6, best, best_count);
  return assemble(vars, std::move(*best));
}

NondimPlan identity_plan(const std::vector<VariableSpec>& vars) {
  std::vector<std::pair<std::string, PiGroup>> groups;
  for (const auto& v : vars) groups.emplace_back(v.name, PiGroup{v.name, {{v.name, Rational(1)}}});
  std::string dep;
  std::string ind;
  for (const auto& v : vars) {
    if (v.role == Role::dependent) dep = v.name;
    if (v.role == Role::independent) ind = v.name;
  }
  return plan_from_groups(vars, groups, dep, ind);
}

NondimPlan plan_from_groups(const std::vector<VariableSpec>& vars,
                            const std::vector<std::pair<std::string, PiGroup>>& groups,
                            const std::string& dependent, const std::string& independent,
                            std::optional<Monomial> term_scale) {
  validate_variables(vars);
  NondimPlan plan;
  plan.variables = vars;
  plan.dependent = dependent;
  plan.independent = independent;
  for (const auto& v : vars) {
    PiGroup g{"", {}};
    for (const auto& [key, grp] : groups) {
      if (key == v.name) g = grp;
    }
    if (!g.trivial() && !verify_dimensionless(g, vars)) {
      throw DimensionError("group '" + g.name + "' = " + g.str() + " is not dimensionless");
    }
    plan.variable_map.emplace_back(v.name, std::move(g));
  }
  for (const auto& [key, grp] : groups) index_of(vars, key);
  auto scale_of = [&](const std::string& name) {
    if (name.empty()) return ExpVec(vars.size(), Rational(0));
    ExpVec s(vars.size(), Rational(0));
    s[index_of(vars, name)] = 1;
    ExpVec g = to_vec(plan.group_for(name).exponents, vars);
    for (std::size_t k = 0; k < vars.size(); ++k) s[k] -= g[k];
    return s;
  };
  ExpVec dep = scale_of(dependent);
  ExpVec tim = scale_of(independent);
  plan.dependent_scale = to_monomial(dep, vars);
  plan.time_scale = to_monomial(tim, vars);
  if (term_scale) {
    plan.term_scale = *term_scale;
  } else {
    ExpVec term(vars.size(), Rational(0));
    for (std::size_t k = 0; k < vars.size(); ++k) term[k] = dep[k] - tim[k];
    plan.term_scale = to_monomial(term, vars);
  }
  for (const auto& v : vars) {
    const PiGroup& g = plan.group_for(v.name);
    if (is_hidden_side(v.role) && !v.dimension.dimensionless() && !g.trivial()) {
      if (std::find(plan.hidden_args.begin(), plan.hidden_args.end(), g.name) ==
          plan.hidden_args.end()) {
        plan.hidden_args.push_back(g.name);
      }
    }
  }
  return plan;
}

std::map<std::string, double> nondim_transform(const NondimPlan& plan, const Bindings& row) {
  std::map<std::string, double> out;
  for (const auto& [v, g] : plan.variable_map) {
    if (g.trivial()) continue;
    bool bound = std::all_of(g.exponents.begin(), g.exponents.end(),
                             [&](const auto& f) { return row.count(f.first) > 0; });
    if (!bound) continue;
    out[g.name] = eval_monomial(g.exponents, row);
  }
  return out;
}

Bindings redim_transform(const NondimPlan& plan, const std::map<std::string, double>& groups,
                         const Bindings& scales) {
  Bindings out = scales;
  for (const auto& [v, g] : plan.variable_map) {
    if (g.trivial()) continue;
    auto it = groups.find(g.name);
    if (it == groups.end()) continue;
    // g = v^p * rest  =>  v = (g / rest)^(1/p)
    Rational p = 0;
    Monomial rest;
    for (const auto& [name, e] : g.exponents) {
      if (name == v) {
        p = e;
      } else {
        rest.emplace_back(name, e);
      }
    }
    if (p == Rational(0)) throw Error("group '" + g.name + "' does not contain '" + v + "'");
    for (const auto& [name, e] : rest) {
      if (!scales.count(name)) {
        throw Error("non-invertible plan: '" + v + "' needs scale '" + name + "'");
      }
    }
    double ratio = it->second / eval_monomial(rest, scales);
    double inv_p = static_cast<double>(p.denominator()) / static_cast<double>(p.numerator());
    out[v] = inv_p == 1.0 ? ratio : std::pow(ratio, inv_p);
  }
  return out;
}

Expr redimensionalize(const Expr& e, const NondimPlan& plan) {
  std::map<std::string, Expr, std::less<>> repl;
  for (const auto& [v, g] : plan.variable_map) {
    if (!g.trivial()) repl.emplace(g.name, monomial_expr(g.exponents));
  }
  for (const auto& name : free_variables(e)) {
    if (!repl.count(name)) throw Error("'" + name + "' is not a group of this plan");
  }
  Expr body = substitute(e, repl);
  if (!plan.term_scale.empty()) body = monomial_expr(plan.term_scale) * body;
  return simplify(body);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using ojson = nlohmann::ordered_json;

ojson monomial_json(const Monomial& m) {
  ojson out = ojson::object();
  for (const auto& [name, p] : m) out[name] = to_string(p);
  return out;
}

Monomial monomial_from_json(const ojson& j) {
  Monomial m;
  for (auto it = j.begin(); it != j.end(); ++it) {
    Rational p = it.value().is_string() ? parse_rational(it.value().get<std::string>())
                                        : Rational(it.value().get<std::int64_t>());
    if (p != Rational(0)) m.emplace_back(it.key(), p);
  }
  return m;
}

}  // namespace

std::string plan_to_json(const NondimPlan& plan) {
  ojson doc;
  doc["variables"] = ojson::parse(variables_to_json_text(plan.variables));
  doc["steps"] = ojson::array();
  for (const auto& s : plan.steps) {
    doc["steps"].push_back({{"scale_variable", s.scale_variable},
                            {"scale", format_monomial(s.scale)},
                            {"scale_exponents", monomial_json(s.scale)},
                            {"eliminates", std::string(label(s.eliminated))},
                            {"rescale", monomial_json(s.rescale_map)}});
  }
  ojson vm = ojson::object();
  for (const auto& [v, g] : plan.variable_map) {
    vm[v] = {{"name", g.name}, {"group", g.str()}, {"exponents", monomial_json(g.exponents)}};
  }
  doc["variable_map"] = vm;
  doc["dependent"] = plan.dependent;
  doc["independent"] = plan.independent;
  doc["dependent_scale"] = monomial_json(plan.dependent_scale);
  doc["time_scale"] = monomial_json(plan.time_scale);
  doc["term_scale"] = monomial_json(plan.term_scale);
  doc["hidden_args"] = plan.hidden_args;
  return doc.dump(2);
}

NondimPlan plan_from_json(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("plan is not valid JSON: ") + e.what());
  }
  try {
    NondimPlan plan;
    plan.variables = variables_from_json_text(doc.at("variables").dump());
    for (const auto& s : doc.at("steps")) {
      EliminationStep step;
      step.scale_variable = s.at("scale_variable").get<std::string>();
      step.scale = monomial_from_json(s.at("scale_exponents"));
      auto d = base_dimension_from_label(s.at("eliminates").get<std::string>());
      if (!d) throw ParseError("bad eliminated dimension in plan");
      step.eliminated = *d;
      step.rescale_map = monomial_from_json(s.at("rescale"));
      plan.steps.push_back(std::move(step));
    }
    const auto& vm = doc.at("variable_map");
    for (const auto& v : plan.variables) {
      const auto& g = vm.at(v.name);
      plan.variable_map.emplace_back(
          v.name, PiGroup{g.at("name").get<std::string>(), monomial_from_json(g.at("exponents"))});
    }
    plan.dependent = doc.value("dependent", std::string{});
    plan.independent = doc.value("independent", std::string{});
    plan.dependent_scale = monomial_from_json(doc.at("dependent_scale"));
    plan.time_scale = monomial_from_json(doc.at("time_scale"));
    plan.term_scale = monomial_from_json(doc.at("term_scale"));
    plan.hidden_args = doc.at("hidden_args").get<std::vector<std::string>>();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed plan: ") + e.what());
  }
}

}  // namespace dimsr
