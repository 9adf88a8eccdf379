#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dimsr/data.hpp"
#include "dimsr/error.hpp"

using namespace dimsr;

namespace {

std::vector<VariableSpec> fall_vars() {
  return variables_from_json_text(R"([
    {"name": "S", "dimension": "L", "role": "dependent"},
    {"name": "s", "dimension": "L", "range": [1, 2]},
    {"name": "v", "dimension": "L T^-1", "range": [1, 2]},
    {"name": "t", "dimension": "T", "range": [1, 2]},
    {"name": "g", "dimension": "L T^-2", "range": [1, 2]}])");
}

double rk4_error(std::size_t steps) {
  ODESystem sys;
  sys.state_names = {"y"};
  sys.rhs = {parse_expr("(y * cos(t))")};
  sys.initial_state = {1.0};
  sys.t1 = 2.0;
  Dataset d = rk4_integrate(sys, {}, steps);
  return std::abs(d.at(d.num_rows() - 1, 1) - std::exp(std::sin(2.0)));
}

}  // namespace

TEST_CASE("algebraic sampling is seeded and within range") {
  Expr e = parse_expr("((s + (v * t)) - (((g * t) * t) / 2))");
  Dataset a = sample_algebraic(e, fall_vars(), "S", 50, 9);
  Dataset b = sample_algebraic(e, fall_vars(), "S", 50, 9);
  Dataset c = sample_algebraic(e, fall_vars(), "S", 50, 10);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  REQUIRE(a.columns() == std::vector<std::string>{"s", "v", "t", "g", "S"});
  for (std::size_t r = 0; r < a.num_rows(); ++r) {
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(a.at(r, k) >= 1.0);
      CHECK(a.at(r, k) <= 2.0);
    }
    double s = a.at(r, 0), v = a.at(r, 1), t = a.at(r, 2), g = a.at(r, 3);
    CHECK(a.at(r, 4) == doctest::Approx(s + v * t - g * t * t / 2));
  }
  CHECK(a.meta.units.at("S") == "L");
  Dataset noisy = sample_algebraic(e, fall_vars(), "S", 50, 9, 0.1);
  CHECK_FALSE(noisy == a);
  CHECK_THROWS_AS(sample_algebraic(parse_expr("(q * s)"), fall_vars(), "S", 5, 1), Error);
}

TEST_CASE("RK4 observed order of accuracy is at least 3.9") {
  double e1 = rk4_error(20), e2 = rk4_error(40), e3 = rk4_error(80);
  double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
  CAPTURE(p1);
  CAPTURE(p2);
  CHECK(p1 >= 3.9);
  CHECK(p2 >= 3.9);
}

TEST_CASE("RK4 with a hidden term and parameters") {
  ODESystem sys;
  sys.state_names = {"N"};
  sys.rhs = {parse_expr("((r * N) + H)")};
  sys.hidden_name = "H";
  sys.hidden_args = {"N", "c"};
  sys.parameters = {{"r", 0.5}, {"c", -0.25}};
  sys.initial_state = {1.0};
  sys.t1 = 1.0;
  auto h = [](std::span<const double> x) { return x[1] * x[0]; };
  Dataset d = rk4_integrate(sys, h, 100);
  CHECK(d.num_rows() == 101);
  CHECK(d.at(100, 1) == doctest::Approx(std::exp(0.25)).epsilon(1e-9));
  CHECK(d.meta.parameters.at("r") == 0.5);
  CHECK_THROWS_AS(rk4_integrate(sys, {}, 100), Error);
}

TEST_CASE("nondimensionalizing a trajectory") {
  auto vars = variables_from_json_text(R"([
    {"name": "N", "dimension": "M", "role": "dependent"},
    {"name": "r", "dimension": "T^-1"}, {"name": "k", "dimension": "M"},
    {"name": "A", "dimension": "M T^-1", "role": "hidden_arg"},
    {"name": "B", "dimension": "M", "role": "hidden_arg"},
    {"name": "t", "dimension": "T", "role": "independent"}])");
  auto plan = ipsen_plan(vars);
  ODESystem sys;
  sys.state_names = {"N"};
  sys.rhs = {parse_expr("(r * N)")};
  sys.parameters = {{"r", 1.0}, {"k", 1.5}, {"A", 5.0}, {"B", 2.0}};
  sys.initial_state = {0.1};
  sys.t1 = 1.0;
  Dataset nd = nondim_dataset(rk4_integrate(sys, {}, 10), plan);
  REQUIRE(nd.num_cols() == 2);
  std::size_t tc = nd.column_index(plan.group_for("t").name);
  std::size_t nc = nd.column_index(plan.group_for("N").name);
  CHECK(nd.at(10, tc) == doctest::Approx(5.0 / 2.0));
  CHECK(nd.at(0, nc) == doctest::Approx(0.05));
  CHECK(nd.meta.parameters.at(plan.group_for("k").name) == doctest::Approx(0.75));
  CHECK(nd.meta.parameters.at(plan.group_for("r").name) == doctest::Approx(0.4));
}

TEST_CASE("CSV round trip keeps values and metadata") {
  Dataset d = sample_algebraic(parse_expr("(s * g)"), fall_vars(), "S", 20, 4);
  d.meta.notes["origin"] = "test";
  auto path = (std::filesystem::temp_directory_path() / "dimsr_csv_roundtrip.csv").string();
  csv_write(d, path);
  Dataset back = csv_read(path);
  CHECK(back == d);
  CHECK_THROWS_AS(csv_read(path + ".missing"), IoError);
}

TEST_CASE("dataset accessors") {
  Dataset d({"x", "y"});
  double r0[2] = {1.0, 2.0}, r1[2] = {3.0, 4.0};
  d.add_row(r0);
  d.add_row(r1);
  CHECK(d.num_rows() == 2);
  CHECK(d.column("y") == std::vector<double>{2.0, 4.0});
  CHECK(d.select_rows(1, 1).at(0, 0) == 3.0);
  CHECK_THROWS_AS(d.column_index("z"), Error);
  double bad[1] = {1.0};
  CHECK_THROWS_AS(d.add_row(bad), Error);
  Dataset n = add_noise(d, "y", 0.5, 1);
  CHECK(n.at(0, 0) == 1.0);
  CHECK(n.at(0, 1) != 2.0);
  CHECK(add_noise(d, "y", 0.5, 1) == n);
}
