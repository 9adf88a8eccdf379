#include <doctest.h>

#include <chrono>
#include <random>

#include "dimsr/bench.hpp"
#include "dimsr/error.hpp"
#include "dimsr/pi_engine.hpp"

using namespace dimsr;

namespace {

std::vector<VariableSpec> gravpe() {
  return variables_from_json_text(R"([
    {"name": "U", "dimension": "M L^2 T^-2", "role": "dependent"},
    {"name": "G", "dimension": "M^-1 L^3 T^-2"}, {"name": "m1", "dimension": "M"},
    {"name": "m2", "dimension": "M"}, {"name": "r1", "dimension": "L"},
    {"name": "r2", "dimension": "L"}])");
}

Monomial mono(std::initializer_list<std::pair<const char*, int>> f) {
  Monomial m;
  for (auto& [n, p] : f) m.emplace_back(n, Rational(p));
  return m;
}

// True when a == b^p for p = +-1.
bool same_group_up_to_inverse(const Monomial& a, const Monomial& b) {
  for (int s : {1, -1}) {
    if (a.size() != b.size()) return false;
    bool ok = true;
    for (const auto& [n, p] : b) {
      auto it = std::find_if(a.begin(), a.end(), [&](const auto& f) { return f.first == n; });
      if (it == a.end() || it->second != p * Rational(s)) ok = false;
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("gravitational potential energy reduces from six variables to three groups") {
  auto vars = gravpe();
  auto t0 = std::chrono::steady_clock::now();
  auto groups = derive_pi_groups(vars);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 1.0);
  REQUIRE(groups.size() == 3);
  for (const auto& g : groups) CHECK(verify_dimensionless(g, vars));
  CHECK(in_rational_span(mono({{"U", 1}, {"r2", 1}, {"G", -1}, {"m1", -2}}), groups, vars));
  CHECK(in_rational_span(mono({{"m2", 1}, {"m1", -1}}), groups, vars));
  CHECK(in_rational_span(mono({{"r1", 1}, {"r2", -1}}), groups, vars));
  CHECK_FALSE(in_rational_span(mono({{"U", 1}}), groups, vars));
  CHECK_FALSE(in_rational_span(mono({{"r1", 1}, {"m1", -1}}), groups, vars));
}

TEST_CASE("monomials evaluate and carry dimensions") {
  auto vars = gravpe();
  Monomial m = mono({{"U", 1}, {"r2", 1}, {"G", -1}, {"m1", -2}});
  CHECK(monomial_dimension(m, vars).dimensionless());
  CHECK(eval_monomial(m, {{"U", 6.0}, {"r2", 2.0}, {"G", 3.0}, {"m1", 2.0}}) ==
        doctest::Approx(1.0));
  CHECK(format_monomial(mono({{"m2", 1}, {"m1", -1}})) == "m2 / m1");
  CHECK_FALSE(verify_dimensionless({"bad", mono({{"U", 1}})}, vars));
}

TEST_CASE("property: derived groups are dimensionless and number n - rank") {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> count(2, 7), expo(-2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<VariableSpec> vars;
    int n = count(gen);
    for (int i = 0; i < n; ++i) {
      VariableSpec v;
      v.name = "v" + std::to_string(i);
      v.dimension[BaseDimension::M] = Rational(expo(gen));
      v.dimension[BaseDimension::L] = Rational(expo(gen));
      v.dimension[BaseDimension::T] = Rational(expo(gen));
      vars.push_back(v);
    }
    auto groups = derive_pi_groups(vars);
    CAPTURE(trial);
    CHECK(groups.size() == vars.size() - rank(build_matrix(vars)));
    for (const auto& g : groups) CHECK(verify_dimensionless(g, vars));
  }
}

TEST_CASE("Ipsen plan leaves one hidden argument for logistic growth") {
  auto plan = ipsen_plan(logistic_variables());
  REQUIRE(plan.hidden_args.size() == 1);
  const PiGroup* hidden = nullptr;
  for (const auto& [v, g] : plan.variable_map) {
    if (g.name == plan.hidden_args[0]) hidden = &g;
  }
  REQUIRE(hidden != nullptr);
  CHECK(same_group_up_to_inverse(hidden->exponents, mono({{"N", 1}, {"B", -1}})));
  // The independent variable becomes A t / B and the term scale is A.
  CHECK(same_group_up_to_inverse(plan.group_for("t").exponents,
                                 mono({{"t", 1}, {"A", 1}, {"B", -1}})));
  CHECK(plan.term_scale == mono({{"A", 1}}));
  for (const auto& [v, g] : plan.variable_map) CHECK(verify_dimensionless(g, plan.variables));
}

TEST_CASE("Ipsen plan leaves one hidden argument for the rotating bead") {
  auto plan = ipsen_plan(bead_variables());
  REQUIRE(plan.hidden_args.size() == 1);
  const PiGroup* hidden = nullptr;
  for (const auto& [v, g] : plan.variable_map) {
    if (g.name == plan.hidden_args[0]) hidden = &g;
  }
  REQUIRE(hidden != nullptr);
  CHECK(same_group_up_to_inverse(hidden->exponents,
                                 mono({{"g", 1}, {"omega", -2}, {"r", -1}})));
  for (const auto& [v, g] : plan.variable_map) CHECK(verify_dimensionless(g, plan.variables));
}

TEST_CASE("bead plan groups") {
  auto plan = bead_plan();
  CHECK(plan.group_for("t").str() == "t m g / b");
  CHECK(plan.group_for("omega").name == "gamma");
  CHECK(plan.term_scale == mono({{"m", 1}, {"g", 1}}));
  for (const auto& [v, g] : plan.variable_map) CHECK(verify_dimensionless(g, plan.variables));
  CHECK_THROWS_AS(plan_from_groups(bead_variables(), {{"t", {"bad", mono({{"t", 1}})}}}, "theta", "t"),
                  DimensionError);
}

TEST_CASE("plan JSON round trip and redimensionalization") {
  auto plan = ipsen_plan(logistic_variables());
  auto back = plan_from_json(plan_to_json(plan));
  CHECK(plan_to_json(back) == plan_to_json(plan));
  plan.rename({{plan.group_for("N").name, "alpha"}});
  Expr g = parse_expr("((alpha * alpha) / ((alpha * alpha) + 1))");
  Expr dim = redimensionalize(g, plan);
  Domain dom{{"N", {0.1, 4.0}}, {"A", {1.0, 10.0}}, {"B", {0.5, 4.0}}};
  CHECK(numeric_equivalence(dim, parse_expr("((A * (N * N)) / ((B * B) + (N * N)))"), dom));
}

TEST_CASE("nondim and redim transforms are inverse") {
  auto plan = ipsen_plan(logistic_variables());
  Bindings row{{"N", 0.7}, {"r", 1.0}, {"k", 1.5}, {"A", 5.0}, {"B", 2.0}, {"t", 3.0}};
  auto groups = nondim_transform(plan, row);
  Bindings scales{{"A", 5.0}, {"B", 2.0}};
  auto back = redim_transform(plan, groups, scales);
  for (const auto& name : {"N", "r", "k", "t"}) {
    CAPTURE(name);
    CHECK(back.at(name) == doctest::Approx(row.at(name)).epsilon(1e-12));
  }
}
