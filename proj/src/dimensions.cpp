#include "dimsr/dimensions.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "dimsr/error.hpp"
#include "json.hpp"

namespace dimsr {

std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

namespace {

std::int64_t parse_int(std::string_view text) {
  std::int64_t v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ParseError("malformed integer '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  std::int64_t num = parse_int(text.substr(0, slash));
  std::int64_t den = parse_int(text.substr(slash + 1));
  if (den == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  return Rational(num, den);
}

std::string_view label(BaseDimension d) {
  switch (d) {
    case BaseDimension::M: return "M";
    case BaseDimension::L: return "L";
    case BaseDimension::T: return "T";
    case BaseDimension::Theta: return "Θ";
    case BaseDimension::I: return "I";
    case BaseDimension::N: return "N";
    case BaseDimension::J: return "J";
  }
  return "?";
}

std::optional<BaseDimension> base_dimension_from_label(std::string_view text) {
  for (auto d : kAllBaseDimensions) {
    if (label(d) == text) return d;
  }
  if (text == "Theta") return BaseDimension::Theta;
  return std::nullopt;
}

Dimension Dimension::base(BaseDimension d, Rational power) {
  Dimension out;
  out[d] = power;
  return out;
}

bool Dimension::dimensionless() const {
  return std::all_of(exps_.begin(), exps_.end(), [](const Rational& q) { return q == Rational(0); });
}

Dimension Dimension::operator*(const Dimension& o) const { return dimension_combine(*this, o, 1); }

Dimension Dimension::operator/(const Dimension& o) const { return dimension_combine(*this, o, -1); }

Dimension Dimension::pow(const Rational& p) const {
  Dimension out;
  for (int i = 0; i < kNumBaseDimensions; ++i) out.exps_[i] = exps_[i] * p;
  return out;
}

bool Dimension::operator<(const Dimension& o) const {
  return std::lexicographical_compare(exps_.begin(), exps_.end(), o.exps_.begin(), o.exps_.end());
}

std::string Dimension::str() const {
  std::string out;
  for (auto d : kAllBaseDimensions) {
    const Rational& e = (*this)[d];
    if (e == Rational(0)) continue;
    if (!out.empty()) out += ' ';
    out += label(d);
    if (e != Rational(1)) out += "^" + to_string(e);
  }
  return out;
}

Dimension dimension_combine(const Dimension& a, const Dimension& b, const Rational& p) {
  Dimension out = a;
  for (auto d : kAllBaseDimensions) out[d] += b[d] * p;
  return out;
}

Dimension parse_dimension(std::string_view text) {
  Dimension out;
  std::set<BaseDimension> seen;
  std::istringstream in{std::string(text)};
  std::string factor;
  while (in >> factor) {
    auto caret = factor.find('^');
    std::string_view name = std::string_view(factor).substr(0, caret);
    auto d = base_dimension_from_label(name);
    if (!d) throw ParseError("unknown base dimension '" + std::string(name) + "'");
    if (!seen.insert(*d).second) {
      throw ParseError("repeated base dimension '" + std::string(name) + "'");
    }
    Rational power = 1;
    if (caret != std::string::npos) {
      try {
        power = parse_rational(std::string_view(factor).substr(caret + 1));
      } catch (const ParseError&) {
        throw ParseError("malformed exponent in '" + factor + "'");
      }
    }
    out[*d] = power;
  }
  return out;
}

std::string_view role_name(Role r) {
  switch (r) {
    case Role::dependent: return "dependent";
    case Role::independent: return "independent";
    case Role::known_arg: return "known_arg";
    case Role::hidden_arg: return "hidden_arg";
    case Role::shared: return "shared";
  }
  return "?";
}

Role parse_role(std::string_view text) {
  for (Role r : {Role::dependent, Role::independent, Role::known_arg, Role::hidden_arg,
                 Role::shared}) {
    if (role_name(r) == text) return r;
  }
  throw ParseError("unknown role '" + std::string(text) + "'");
}

void validate_variables(const std::vector<VariableSpec>& vars) {
  std::set<std::string> names;
  for (const auto& v : vars) {
    if (v.name.empty()) throw Error("variable with empty name");
    if (!names.insert(v.name).second) throw Error("duplicate variable name '" + v.name + "'");
    if (v.range && !(v.range->lo < v.range->hi)) {
      throw Error("variable '" + v.name + "' has an empty sample range");
    }
  }
}

std::vector<VariableSpec> variables_from_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("variable set is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("variable set must be a JSON array");
  std::vector<VariableSpec> vars;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) {
      throw ParseError("variable entry needs a string \"name\"");
    }
    VariableSpec v;
    v.name = item["name"].get<std::string>();
    v.dimension = parse_dimension(item.value("dimension", std::string{}));
    v.role = parse_role(item.value("role", std::string("known_arg")));
    if (item.contains("range")) {
      const auto& r = item["range"];
      if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
        throw ParseError("range of '" + v.name + "' must be [lo, hi]");
      }
      v.range = Interval{r[0].get<double>(), r[1].get<double>()};
    }
    vars.push_back(std::move(v));
  }
  validate_variables(vars);
  return vars;
}

std::vector<VariableSpec> load_variables(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open variable file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return variables_from_json_text(buf.str());
}

std::string variables_to_json_text(const std::vector<VariableSpec>& vars) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& v : vars) {
    nlohmann::json item{{"name", v.name},
                        {"dimension", v.dimension.str()},
                        {"role", std::string(role_name(v.role))}};
    if (v.range) item["range"] = {v.range->lo, v.range->hi};
    doc.push_back(std::move(item));
  }
  return doc.dump(2);
}

std::string DimensionalMatrix::str() const {
  std::ostringstream out;
  out << "    ";
  for (const auto& c : columns) out << ' ' << c;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << label(rows[r]);
    for (std::size_t c = 0; c < columns.size(); ++c) out << ' ' << to_string(entries[r][c]);
    out << '\n';
  }
  return out.str();
}

DimensionalMatrix build_matrix(const std::vector<VariableSpec>& vars) {
  validate_variables(vars);
  DimensionalMatrix m;
  for (const auto& v : vars) m.columns.push_back(v.name);
  for (auto d : kAllBaseDimensions) {
    bool used = std::any_of(vars.begin(), vars.end(),
                            [d](const VariableSpec& v) { return v.dimension[d] != Rational(0); });
    if (!used) continue;
    m.rows.push_back(d);
    std::vector<Rational> row;
    for (const auto& v : vars) row.push_back(v.dimension[d]);
    m.entries.push_back(std::move(row));
  }
  return m;
}

namespace {

struct Echelon {
  RationalMatrix reduced;
  std::vector<std::size_t> pivots;  // pivot column per nonzero row
};

// Reduced row-echelon form by exact Gauss-Jordan elimination.
Echelon rref(RationalMatrix a, std::size_t cols) {
  Echelon out;
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < a.size(); ++col) {
    std::size_t pivot = row;
    while (pivot < a.size() && a[pivot][col] == Rational(0)) ++pivot;
    if (pivot == a.size()) continue;
    std::swap(a[row], a[pivot]);
    Rational lead = a[row][col];
    for (auto& x : a[row]) x /= lead;
    for (std::size_t r = 0; r < a.size(); ++r) {
      if (r == row || a[r][col] == Rational(0)) continue;
      Rational f = a[r][col];
      for (std::size_t c = 0; c < cols; ++c) a[r][c] -= f * a[row][c];
    }
    out.pivots.push_back(col);
    ++row;
  }
  out.reduced = std::move(a);
  return out;
}

std::vector<Rational> integer_normalize(std::vector<Rational> v) {
  std::int64_t lcm = 1;
  for (const auto& x : v) lcm = std::lcm(lcm, x.denominator());
  std::int64_t g = 0;
  for (auto& x : v) {
    x *= lcm;
    g = std::gcd(g, x.numerator());
  }
  if (g == 0) return v;
  for (auto& x : v) x /= g;
  auto lead = std::find_if(v.begin(), v.end(), [](const Rational& q) { return q != Rational(0); });
  if (lead != v.end() && *lead < 0) {
    for (auto& x : v) x = -x;
  }
  return v;
}

}  // namespace

std::size_t rank(const RationalMatrix& m) {
  if (m.empty()) return 0;
  return rref(m, m.front().size()).pivots.size();
}

std::size_t rank(const DimensionalMatrix& m) { return rank(m.entries); }

std::vector<std::vector<Rational>> null_space(const RationalMatrix& m, std::size_t cols) {
  Echelon e = rref(m, cols);
  std::vector<bool> is_pivot(cols, false);
  for (auto p : e.pivots) is_pivot[p] = true;
  std::vector<std::vector<Rational>> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(cols, Rational(0));
    v[free] = 1;
    for (std::size_t r = 0; r < e.pivots.size(); ++r) v[e.pivots[r]] = -e.reduced[r][free];
    basis.push_back(integer_normalize(std::move(v)));
  }
  return basis;
}

std::vector<std::vector<Rational>> null_space(const DimensionalMatrix& m) {
  return null_space(m.entries, m.num_cols());
}

}  // namespace dimsr
