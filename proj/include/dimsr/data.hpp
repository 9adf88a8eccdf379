#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dimsr/dimensions.hpp"
#include "dimsr/expr.hpp"
#include "dimsr/pi_engine.hpp"

namespace dimsr {

struct DatasetMeta {
  std::uint64_t seed = 0;
  std::string generator;
  std::map<std::string, std::string> units;    // column -> dimension text ("" = dimensionless)
  std::map<std::string, double> parameters;    // per-dataset constants
  std::map<std::string, std::string> notes;    // free-form provenance (e.g. the plan JSON)

  bool operator==(const DatasetMeta&) const = default;
};

// Rectangular table of finite reals, stored row-major.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t num_cols() const { return columns_.size(); }
  std::size_t num_rows() const { return num_cols() == 0 ? 0 : values_.size() / num_cols(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * num_cols(), num_cols()};
  }
  double at(std::size_t r, std::size_t c) const { return values_[r * num_cols() + c]; }
  std::size_t column_index(const std::string& name) const;  // throws when absent
  bool has_column(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;

  // Rejects wrong widths and non-finite values.
  void add_row(std::span<const double> values);
  void add_row(std::initializer_list<double> values) { add_row(std::span<const double>(values.begin(), values.size())); }
  void set(std::size_t r, std::size_t c, double v);

  Dataset select_rows(std::size_t begin, std::size_t count) const;

  const std::vector<double>& values() const { return values_; }

  DatasetMeta meta;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<std::string> columns_;
  std::vector<double> values_;
};

// Inputs are the target's free variables (in `vars` order), drawn uniformly on
// their ranges; the last column `output` holds eval(target). Points where the
// target leaves its domain are redrawn (bounded retries). Optional Gaussian
// noise of standard deviation `noise_sigma` is added to the output column.
Dataset sample_algebraic(const Expr& target, const std::vector<VariableSpec>& vars,
                         const std::string& output, std::size_t n, std::uint64_t seed,
                         double noise_sigma = 0.0);

using HiddenTerm = std::function<double(std::span<const double>)>;

struct ODESystem {
  std::vector<std::string> state_names;
  std::vector<Expr> rhs;  // one per state; may reference `hidden_name`
  std::string time_name = "t";
  std::string hidden_name;              // empty: no placeholder
  std::vector<std::string> hidden_args;  // names bound from time/state/parameters
  std::vector<double> initial_state;
  double t0 = 0.0;
  double t1 = 1.0;
  std::map<std::string, double> parameters;
};

// Classical fixed-step RK4; steps + 1 rows of (time, states...).
Dataset rk4_integrate(const ODESystem& sys, const HiddenTerm& hidden, std::size_t steps);

// Renames covered columns to their group names and maps each row through the
// plan; variables that are not columns come from meta.parameters. Groups
// built only from parameters are stored in meta.parameters; columns the plan
// does not know are dropped.
Dataset nondim_dataset(const Dataset& d, const NondimPlan& plan);

Dataset add_noise(const Dataset& d, const std::string& column, double sigma, std::uint64_t seed);

// Comma separated, header row, shortest round-trip number formatting. Metadata
// goes to a sidecar JSON with the same basename.
void csv_write(const Dataset& d, const std::string& path);
Dataset csv_read(const std::string& path);

std::string meta_to_json(const DatasetMeta& meta);
DatasetMeta meta_from_json(const std::string& text);

}  // namespace dimsr
