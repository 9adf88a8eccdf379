#include <doctest.h>

#include <random>

#include "dimsr/dimensions.hpp"
#include "dimsr/error.hpp"

using namespace dimsr;

namespace {

const Rational kZero(0);

// Reference rank: plain fraction-based forward elimination, pivoting on the
// first nonzero entry of each column.
std::size_t oracle_rank(RationalMatrix m) {
  std::size_t rows = m.size();
  if (rows == 0) return 0;
  std::size_t cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == kZero) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (m[i][c] == kZero) continue;
      Rational f = m[i][c] / m[r][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    ++r;
  }
  return r;
}

}  // namespace

TEST_CASE("dimension parsing and printing") {
  Dimension e = parse_dimension("M L^2 T^-2");
  CHECK(e[BaseDimension::M] == Rational(1));
  CHECK(e[BaseDimension::L] == Rational(2));
  CHECK(e[BaseDimension::T] == Rational(-2));
  CHECK(e.str() == "M L^2 T^-2");
  CHECK(parse_dimension("").dimensionless());
  CHECK(parse_dimension("L^1/2")[BaseDimension::L] == Rational(1, 2));
  CHECK(parse_dimension("Theta") == parse_dimension("Θ"));
  CHECK_THROWS_AS(parse_dimension("Q^2"), Error);
  CHECK_THROWS_AS(parse_dimension("M^x"), Error);
}

TEST_CASE("dimension algebra") {
  Dimension force = parse_dimension("M L T^-2");
  Dimension length = parse_dimension("L");
  CHECK(force * length == parse_dimension("M L^2 T^-2"));
  CHECK(force / force == Dimension{});
  CHECK(length.pow(Rational(1, 2)).pow(Rational(2)) == length);
  CHECK(dimension_combine(force, length, Rational(-1)) == parse_dimension("M T^-2"));
}

TEST_CASE("variable validation") {
  std::vector<VariableSpec> vars{{"x", {}, Role::known_arg, {}}, {"x", {}, Role::known_arg, {}}};
  CHECK_THROWS_AS(validate_variables(vars), Error);
  CHECK_THROWS_AS(variables_from_json_text("{"), ParseError);
  CHECK_THROWS_AS(variables_from_json_text(R"([{"name": "x", "range": [2, 1]}])"), Error);
  auto v = variables_from_json_text(R"([{"name": "g", "dimension": "L T^-2", "range": [1, 2]}])");
  REQUIRE(v.size() == 1);
  CHECK(v[0].dimension == parse_dimension("L T^-2"));
  CHECK(v[0].range->hi == 2.0);
  CHECK(variables_from_json_text(variables_to_json_text(v))[0].dimension == v[0].dimension);
}

TEST_CASE("dimensional matrix of the gravitational potential energy set") {
  auto vars = variables_from_json_text(R"([
    {"name": "U", "dimension": "M L^2 T^-2"}, {"name": "G", "dimension": "M^-1 L^3 T^-2"},
    {"name": "m1", "dimension": "M"}, {"name": "m2", "dimension": "M"},
    {"name": "r1", "dimension": "L"}, {"name": "r2", "dimension": "L"}])");
  auto m = build_matrix(vars);
  CHECK(m.num_cols() == 6);
  CHECK(rank(m) == 3);
  CHECK(null_space(m).size() == 3);
}

TEST_CASE("null space of small exact matrices") {
  RationalMatrix zero{{kZero, kZero}};
  CHECK(null_space(zero, 2).size() == 2);
  RationalMatrix id{{Rational(1), kZero}, {kZero, Rational(1)}};
  CHECK(null_space(id, 2).empty());
  CHECK(null_space(RationalMatrix{}, 3).size() == 3);
}

TEST_CASE("property: null space agrees with an independent elimination on fuzzed matrices") {
  std::mt19937_64 gen(20240611);
  std::uniform_int_distribution<int> dim(1, 7), num(-3, 3), den(1, 3), sparse(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t rows = static_cast<std::size_t>(dim(gen) % 5 + 1);
    std::size_t cols = static_cast<std::size_t>(dim(gen));
    RationalMatrix m(rows, std::vector<Rational>(cols));
    for (auto& row : m) {
      for (auto& x : row) x = sparse(gen) == 0 ? kZero : Rational(num(gen), den(gen));
    }
    // Duplicate a row now and then to force rank deficiency.
    if (trial % 7 == 0 && rows > 1) m[rows - 1] = m[0];

    auto basis = null_space(m, cols);
    std::size_t r = oracle_rank(m);
    CAPTURE(trial);
    CHECK(rank(m) == r);
    REQUIRE(basis.size() == cols - r);
    for (const auto& v : basis) {
      REQUIRE(v.size() == cols);
      for (const auto& row : m) {
        Rational s = kZero;
        for (std::size_t j = 0; j < cols; ++j) s += row[j] * v[j];
        CHECK(s == kZero);
      }
    }
    if (!basis.empty()) CHECK(oracle_rank(basis) == basis.size());
  }
}
