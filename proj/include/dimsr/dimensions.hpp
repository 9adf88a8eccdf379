#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

namespace dimsr {

using Rational = boost::rational<std::int64_t>;

std::string to_string(const Rational& q);
Rational parse_rational(std::string_view text);

// Fixed order; row order of every dimensional matrix follows it.
enum class BaseDimension : int { M = 0, L, T, Theta, I, N, J };

inline constexpr int kNumBaseDimensions = 7;
inline constexpr std::array<BaseDimension, kNumBaseDimensions> kAllBaseDimensions = {
    BaseDimension::M,     BaseDimension::L, BaseDimension::T, BaseDimension::Theta,
    BaseDimension::I,     BaseDimension::N, BaseDimension::J};

std::string_view label(BaseDimension d);
std::optional<BaseDimension> base_dimension_from_label(std::string_view text);

// Exponent vector over the base dimensions. Exponents are exact rationals so
// square roots (half-integer exponents) stay exact.
class Dimension {
 public:
  Dimension() = default;

  static Dimension base(BaseDimension d, Rational power = 1);

  const Rational& operator[](BaseDimension d) const { return exps_[static_cast<int>(d)]; }
  Rational& operator[](BaseDimension d) { return exps_[static_cast<int>(d)]; }

  bool dimensionless() const;

  Dimension operator*(const Dimension& o) const;
  Dimension operator/(const Dimension& o) const;
  Dimension pow(const Rational& p) const;

  bool operator==(const Dimension& o) const = default;
  // Lexicographic over exponents; only used for ordered containers.
  bool operator<(const Dimension& o) const;

  // Canonical text, e.g. "M L^2 T^-2"; the dimensionless value prints as "".
  std::string str() const;

 private:
  std::array<Rational, kNumBaseDimensions> exps_{};
};

// Returns a * b^p.
Dimension dimension_combine(const Dimension& a, const Dimension& b, const Rational& p);

Dimension parse_dimension(std::string_view text);

enum class Role { dependent, independent, known_arg, hidden_arg, shared };

std::string_view role_name(Role r);
Role parse_role(std::string_view text);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct VariableSpec {
  std::string name;
  Dimension dimension;
  Role role = Role::known_arg;
  std::optional<Interval> range;
};

// Throws on duplicate names or an empty/inverted range.
void validate_variables(const std::vector<VariableSpec>& vars);

// Loads `[{"name", "dimension", "role", "range": [lo, hi]?}, ...]`.
std::vector<VariableSpec> variables_from_json_text(std::string_view text);
std::vector<VariableSpec> load_variables(const std::string& path);
std::string variables_to_json_text(const std::vector<VariableSpec>& vars);

struct DimensionalMatrix {
  std::vector<BaseDimension> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<Rational>> entries;  // entries[row][col]

  const Rational& at(std::size_t r, std::size_t c) const { return entries[r][c]; }
  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_cols() const { return columns.size(); }
  std::string str() const;
};

DimensionalMatrix build_matrix(const std::vector<VariableSpec>& vars);

// Generic exact linear algebra on row-major rational matrices.
using RationalMatrix = std::vector<std::vector<Rational>>;

std::size_t rank(const RationalMatrix& m);
std::size_t rank(const DimensionalMatrix& m);

// Right null-space basis: exactly cols - rank vectors, each scaled to coprime
// integers with a positive leading nonzero entry. The rightmost
// (cols - rank) independent columns are the free ones.
std::vector<std::vector<Rational>> null_space(const RationalMatrix& m, std::size_t cols);
std::vector<std::vector<Rational>> null_space(const DimensionalMatrix& m);

}  // namespace dimsr
