#include "dimsr/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dimsr/error.hpp"
#include "dimsr/rng.hpp"
#include "json.hpp"

namespace dimsr {

Dataset::Dataset(std::vector<std::string> columns) : columns_(std::move(columns)) {}

std::size_t Dataset::column_index(const std::string& name) const {
  auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw Error("dataset has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns_.begin());
}

bool Dataset::has_column(const std::string& name) const {
  return std::find(columns_.begin(), columns_.end(), name) != columns_.end();
}

std::vector<double> Dataset::column(const std::string& name) const {
  std::size_t c = column_index(name);
  std::vector<double> out(num_rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = at(r, c);
  return out;
}

void Dataset::add_row(std::span<const double> values) {
  if (values.size() != num_cols()) {
    throw Error("row has " + std::to_string(values.size()) + " values, expected " +
                std::to_string(num_cols()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("non-finite value in dataset row");
  }
  values_.insert(values_.end(), values.begin(), values.end());
}

void Dataset::set(std::size_t r, std::size_t c, double v) {
  if (!std::isfinite(v)) throw Error("non-finite value in dataset");
  values_.at(r * num_cols() + c) = v;
}

Dataset Dataset::select_rows(std::size_t begin, std::size_t count) const {
  Dataset out(columns_);
  out.meta = meta;
  std::size_t end = std::min(num_rows(), begin + count);
  for (std::size_t r = begin; r < end; ++r) out.add_row(row(r));
  return out;
}

// ---------------------------------------------------------------------------

Dataset sample_algebraic(const Expr& target, const std::vector<VariableSpec>& vars,
                         const std::string& output, std::size_t n, std::uint64_t seed,
                         double noise_sigma) {
  validate_variables(vars);
  auto free = free_variables(target);
  std::vector<const VariableSpec*> inputs;
  for (const auto& v : vars) {
    if (std::find(free.begin(), free.end(), v.name) == free.end()) continue;
    if (!v.range) throw Error("variable '" + v.name + "' has no sample range");
    inputs.push_back(&v);
  }
  if (inputs.size() != free.size()) {
    for (const auto& f : free) {
      bool known = std::any_of(vars.begin(), vars.end(),
                               [&](const VariableSpec& v) { return v.name == f; });
      if (!known) throw Error("target uses undeclared variable '" + f + "'");
    }
  }
  std::vector<std::string> cols;
  for (auto* v : inputs) cols.push_back(v->name);
  CompiledExpr program(target, cols);
  cols.push_back(output);

  Dataset d(cols);
  d.meta.seed = seed;
  d.meta.generator = "sample_algebraic: " + output + " = " + to_string(target);
  for (auto* v : inputs) d.meta.units[v->name] = v->dimension.str();
  for (const auto& v : vars) {
    if (v.name == output) d.meta.units[output] = v.dimension.str();
  }
  if (noise_sigma > 0.0) d.meta.parameters["noise_sigma"] = noise_sigma;

  Rng rng(seed);
  constexpr std::size_t kMaxRetries = 1000;
  std::vector<double> row(cols.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t attempts = 0;
    for (;;) {
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        row[k] = rng.uniform(inputs[k]->range->lo, inputs[k]->range->hi);
      }
      double y = 0.0;
      if (program.try_eval(std::span<const double>(row.data(), inputs.size()), y)) {
        row.back() = y;
        break;
      }
      if (++attempts > kMaxRetries) {
        throw DomainError("sample_algebraic: target leaves its domain on the sample ranges");
      }
    }
    if (noise_sigma > 0.0) row.back() += noise_sigma * rng.normal();
    d.add_row(row);
  }
  return d;
}

Dataset rk4_integrate(const ODESystem& sys, const HiddenTerm& hidden, std::size_t steps) {
  if (steps == 0) throw Error("rk4_integrate needs at least one step");
  const std::size_t ns = sys.state_names.size();
  if (sys.rhs.size() != ns || sys.initial_state.size() != ns) {
    throw Error("ODE system: state, rhs and initial-state sizes differ");
  }
  if (!sys.hidden_name.empty() && !hidden) {
    throw Error("ODE system declares hidden term '" + sys.hidden_name + "' but none was supplied");
  }
  // Slot layout: time, states, parameters, hidden value.
  std::vector<std::string> slots{sys.time_name};
  slots.insert(slots.end(), sys.state_names.begin(), sys.state_names.end());
  for (const auto& [name, value] : sys.parameters) slots.push_back(name);
  const std::size_t hidden_slot = slots.size();
  slots.push_back(sys.hidden_name.empty() ? std::string("__no_hidden__") : sys.hidden_name);

  std::vector<CompiledExpr> rhs;
  for (const auto& e : sys.rhs) rhs.emplace_back(e, slots);
  std::vector<std::size_t> hidden_idx;
  for (const auto& a : sys.hidden_args) {
    auto it = std::find(slots.begin(), slots.end(), a);
    if (it == slots.end()) throw Error("unknown hidden-term argument '" + a + "'");
    hidden_idx.push_back(static_cast<std::size_t>(it - slots.begin()));
  }

  std::vector<double> env(slots.size(), 0.0);
  {
    std::size_t k = 1 + ns;
    for (const auto& [name, value] : sys.parameters) env[k++] = value;
  }
  std::vector<double> hargs(hidden_idx.size());
  auto deriv = [&](double t, const std::vector<double>& y, std::vector<double>& dy,
                   std::size_t step) {
    env[0] = t;
    std::copy(y.begin(), y.end(), env.begin() + 1);
    if (!sys.hidden_name.empty()) {
      for (std::size_t k = 0; k < hidden_idx.size(); ++k) hargs[k] = env[hidden_idx[k]];
      env[hidden_slot] = hidden(hargs);
    }
    for (std::size_t k = 0; k < ns; ++k) {
      if (!rhs[k].try_eval(env, dy[k])) {
        throw DomainError("rk4_integrate: right-hand side undefined at step " +
                          std::to_string(step));
      }
    }
  };

  std::vector<std::string> cols{sys.time_name};
  cols.insert(cols.end(), sys.state_names.begin(), sys.state_names.end());
  Dataset d(cols);
  d.meta.generator = "rk4_integrate: steps=" + std::to_string(steps);
  d.meta.parameters = sys.parameters;

  const double h = (sys.t1 - sys.t0) / static_cast<double>(steps);
  std::vector<double> y = sys.initial_state;
  std::vector<double> k1(ns), k2(ns), k3(ns), k4(ns), tmp(ns), row(ns + 1);
  auto record = [&](double t) {
    row[0] = t;
    std::copy(y.begin(), y.end(), row.begin() + 1);
    d.add_row(row);
  };
  record(sys.t0);
  for (std::size_t s = 0; s < steps; ++s) {
    double t = sys.t0 + h * static_cast<double>(s);
    deriv(t, y, k1, s);
    for (std::size_t i = 0; i < ns; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    deriv(t + 0.5 * h, tmp, k2, s);
    for (std::size_t i = 0; i < ns; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    deriv(t + 0.5 * h, tmp, k3, s);
    for (std::size_t i = 0; i < ns; ++i) tmp[i] = y[i] + h * k3[i];
    deriv(t + h, tmp, k4, s);
    for (std::size_t i = 0; i < ns; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(y[i])) {
        throw Error("rk4_integrate: non-finite state at step " + std::to_string(s + 1));
      }
    }
    record(sys.t0 + h * static_cast<double>(s + 1));
  }
  return d;
}

Dataset nondim_dataset(const Dataset& d, const NondimPlan& plan) {
  std::vector<std::string> out_cols;
  std::vector<const PiGroup*> col_groups;
  for (const auto& c : d.columns()) {
    bool in_plan = std::any_of(plan.variable_map.begin(), plan.variable_map.end(),
                               [&](const auto& e) { return e.first == c; });
    if (!in_plan) continue;
    const PiGroup& g = plan.group_for(c);
    if (g.trivial()) continue;
    out_cols.push_back(g.name);
    col_groups.push_back(&g);
  }
  Bindings base;
  for (const auto& [name, value] : d.meta.parameters) base[name] = value;

  auto require_bound = [&](const PiGroup& g) {
    for (const auto& [name, p] : g.exponents) {
      if (!d.has_column(name) && !base.count(name)) {
        throw Error("nondim_dataset: no column or parameter for '" + name + "' (group " + g.name +
                    ")");
      }
    }
  };
  for (auto* g : col_groups) require_bound(*g);

  Dataset out(out_cols);
  out.meta = d.meta;
  out.meta.units.clear();
  for (const auto& c : out_cols) out.meta.units[c] = "";
  out.meta.notes["plan"] = plan_to_json(plan);
  out.meta.generator = d.meta.generator + " | nondim";
  // Per-dataset groups made only of parameters.
  for (const auto& [v, g] : plan.variable_map) {
    if (g.trivial()) continue;
    bool from_params = std::all_of(g.exponents.begin(), g.exponents.end(), [&](const auto& f) {
      return !d.has_column(f.first) && base.count(f.first);
    });
    if (from_params) out.meta.parameters[g.name] = eval_monomial(g.exponents, base);
  }

  Bindings row = base;
  std::vector<double> values(out_cols.size());
  for (std::size_t r = 0; r < d.num_rows(); ++r) {
    for (std::size_t c = 0; c < d.num_cols(); ++c) row[d.columns()[c]] = d.at(r, c);
    for (std::size_t k = 0; k < col_groups.size(); ++k) {
      values[k] = eval_monomial(col_groups[k]->exponents, row);
    }
    out.add_row(values);
  }
  return out;
}

Dataset add_noise(const Dataset& d, const std::string& column, double sigma, std::uint64_t seed) {
  Dataset out = d;
  std::size_t c = d.column_index(column);
  Rng rng(seed);
  for (std::size_t r = 0; r < d.num_rows(); ++r) out.set(r, c, d.at(r, c) + sigma * rng.normal());
  out.meta.parameters["noise_sigma"] = sigma;
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string sidecar_path(const std::string& path) {
  return std::filesystem::path(path).replace_extension(".json").string();
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

}  // namespace

std::string meta_to_json(const DatasetMeta& meta) {
  nlohmann::ordered_json j;
  j["seed"] = meta.seed;
  j["generator"] = meta.generator;
  j["units"] = meta.units;
  j["parameters"] = meta.parameters;
  j["notes"] = meta.notes;
  return j.dump(2);
}

DatasetMeta meta_from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    DatasetMeta m;
    m.seed = j.value("seed", std::uint64_t{0});
    m.generator = j.value("generator", std::string{});
    m.units = j.value("units", std::map<std::string, std::string>{});
    m.parameters = j.value("parameters", std::map<std::string, double>{});
    m.notes = j.value("notes", std::map<std::string, std::string>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed dataset metadata: ") + e.what());
  }
}

void csv_write(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (std::size_t c = 0; c < d.num_cols(); ++c) {
    if (c) out << ',';
    out << d.columns()[c];
  }
  out << '\n';
  std::array<char, 64> buf{};
  for (std::size_t r = 0; r < d.num_rows(); ++r) {
    for (std::size_t c = 0; c < d.num_cols(); ++c) {
      if (c) out << ',';
      auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), d.at(r, c));
      (void)ec;
      out.write(buf.data(), ptr - buf.data());
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
  std::ofstream side(sidecar_path(path), std::ios::binary);
  if (!side) throw IoError("cannot write '" + sidecar_path(path) + "'");
  side << meta_to_json(d.meta) << '\n';
}

Dataset csv_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  std::vector<std::string> header;
  for (auto& h : split_commas(line)) header.push_back(trim(h));
  Dataset d(header);
  std::vector<double> row(header.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::string cell = trim(cells[c]);
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (first != last && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, row[c]);
      if (ec != std::errc() || ptr != last || cell.empty() || !std::isfinite(row[c])) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": non-numeric cell '" + cell +
                         "'");
      }
    }
    d.add_row(row);
  }
  std::ifstream side(sidecar_path(path), std::ios::binary);
  if (side) {
    std::stringstream buf;
    buf << side.rdbuf();
    d.meta = meta_from_json(buf.str());
  }
  return d;
}

}  // namespace dimsr
