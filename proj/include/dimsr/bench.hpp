#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dimsr/data.hpp"
#include "dimsr/pi_engine.hpp"
#include "dimsr/symreg.hpp"
#include "dimsr/upinn.hpp"

namespace dimsr {

// ---------------------------------------------------------------------------
// Algebraic suite

struct CaseSpec {
  std::string name;
  std::vector<VariableSpec> variables;  // the dependent variable is `output`
  std::string output;
  Expr original;                        // output = original(inputs)
  std::vector<PiGroup> groups;          // every group over `variables`
  std::string pi_output;                // group regressed on the others
  Expr dimensionless_target;            // pi_output = target(other groups)
  std::vector<Op> unary_ops;            // shared by both variants
  std::vector<Op> binary_ops;
  std::vector<double> literals;
  std::vector<std::size_t> schedule{10000, 1000, 100, 10};
};

std::vector<CaseSpec> table1_cases();
const CaseSpec& table1_case(const std::string& name);

// Throws unless the groups are dimensionless and the dimensionless target
// reproduces the original equation at `points` samples (relative tol).
void check_case(const CaseSpec& c, std::size_t points = 100, double tol = 1e-10,
                std::uint64_t seed = 99);

Grammar case_grammar(const CaseSpec& c, bool dimensionless);
// Raw samples on the variable ranges; the dimensionless variant maps each row
// through the groups (inputs first, pi_output last).
Dataset case_dataset(const CaseSpec& c, bool dimensionless, std::size_t n, std::uint64_t seed);
// Box covering the inputs of the chosen variant, for equivalence checks.
Domain case_domain(const CaseSpec& c, bool dimensionless);
Expr case_target(const CaseSpec& c, bool dimensionless);
Dimension case_target_dimension(const CaseSpec& c, bool dimensionless);

struct Attempt {
  std::size_t points = 0;
  bool recovered = false;
  double mae = 0.0;
  std::string expression;
  std::size_t candidates_examined = 0;
  double wall_seconds = 0.0;
};

struct VariantReport {
  bool recovered = false;            // at some schedule point
  std::string expression;            // at the smallest recovering count
  double mae = 0.0;
  std::size_t min_points = 0;        // 0 when never recovered
  std::size_t candidates_examined = 0;  // at the first (largest) schedule count
  double wall_seconds = 0.0;         // summed over attempts
  std::vector<Attempt> attempts;
};

struct CaseReport {
  std::string name;
  VariantReport dimensional;
  VariantReport dimensionless;
};

struct Table1Options {
  std::uint64_t seed = 1;
  SearchBudget budget{21, 20'000'000, 1e-9, 8'000'000};
  double recover_mae = 1e-6;
  std::vector<std::string> cases;  // empty: all six
  bool verbose = false;
};

Attempt run_attempt(const CaseSpec& c, bool dimensionless, std::size_t n, const Table1Options& opt);
// Walks the schedule downward and stops at the first failure.
VariantReport run_variant(const CaseSpec& c, bool dimensionless, const Table1Options& opt);
std::vector<CaseReport> table1_suite(const Table1Options& opt);

// table1.csv, fig1_points.csv, fig1_runtime.csv (the only file with times)
// and one JSON per case.
void write_table1_reports(const std::vector<CaseReport>& reports, const std::string& dir);

// ---------------------------------------------------------------------------
// Logistic growth with a hidden term

std::vector<VariableSpec> logistic_variables();

struct LogisticOptions {
  double r = 1.0, A = 5.0, B = 2.0, k = 1.5;
  double N0 = 0.1;
  double t_end = 8.0;
  std::size_t steps = 800;
  std::size_t data_points = 101;
  std::size_t hidden_samples = 200;
  double noise = 0.0;
  std::uint64_t seed = 1;
  UpinnConfig upinn;
  SearchBudget budget{15, 5'000'000, 1e-12, 4'000'000};
  bool verbose = false;
};

struct LogisticReport {
  NondimPlan plan;
  double beta = 0.0, epsilon = 0.0;
  double alpha_lo = 0.0, alpha_hi = 0.0;
  TrainedUpinn model;
  Dataset hidden_samples;  // alpha, true, upinn
  double upinn_rmse = 0.0;
  ParetoFront front;
  RegressStats stats;
  Expr recovered;           // selected front entry
  bool recovered_ok = false;
  Expr redimensionalized;
  bool redim_ok = false;
  double train_seconds = 0.0;
};

LogisticReport logistic_case(const LogisticOptions& opt);
// fig2_logistic.csv plus logistic.json and the loss history.
void write_logistic_reports(const LogisticReport& rep, const std::string& dir);

// ---------------------------------------------------------------------------
// Bead on a rotating hoop

std::vector<VariableSpec> bead_variables();
// Plan with tau = m g t / b, gamma = r w^2 / g, eps = m^2 g r / b^2, theta kept.
NondimPlan bead_plan();

// Second-order residuals train better with a larger, decaying step.
inline UpinnConfig default_bead_upinn() {
  UpinnConfig c;
  c.epochs = 10000;
  c.learning_rate = 1e-2;
  c.final_learning_rate = 1e-4;
  c.order = 2;
  return c;
}

struct BeadOptions {
  double m = 1.0, r = 1.0, g = 9.8;
  double b = 0.0;  // 0: sqrt(m^2 g r), i.e. eps = 1
  double theta0 = 0.5, dtheta0 = 0.0;
  double t_end = 4.0;
  std::size_t steps = 800;
  std::size_t data_points = 101;
  std::size_t samples_per_model = 50;
  double edge_trim = 0.05;  // fraction of the time window skipped before sampling
  std::vector<double> omegas;  // empty: gamma evenly spaced over [0.5, 5]
  bool analytic = false;       // exact hidden samples instead of trained networks
  double noise = 0.0;
  std::uint64_t seed = 1;
  UpinnConfig upinn = default_bead_upinn();
  SearchBudget budget{16, 20'000'000, 1e-12, 8'000'000};
  bool verbose = false;
};

std::vector<double> default_omegas(const BeadOptions& opt, std::size_t count = 10);

struct BeadModelReport {
  double omega = 0.0, gamma = 0.0;
  double theta_lo = 0.0, theta_hi = 0.0;
  double final_loss = 0.0;
  double rmse = 0.0;  // hidden estimate vs exact term on the samples
  std::string error;  // non-empty when training failed
};

struct BeadReport {
  double epsilon = 0.0;
  std::vector<BeadModelReport> models;
  Dataset combined;  // theta, gamma, G
  ParetoFront front;
  RegressStats stats;
  int found_index = -1;  // front entry equivalent to +-(gamma cos theta - 1) sin theta
  int found_sign = 0;
  double found_mae = 0.0;
  double train_seconds = 0.0;
  bool analytic = false;
};

BeadReport bead_case(const BeadOptions& opt);
// table2_front.csv, fig3_surface.csv and bead.json; the analytic variant
// writes analytic_table2_front.csv, analytic_fig3_surface.csv, bead_analytic.json.
void write_bead_reports(const BeadReport& rep, const std::string& dir);

// The hidden term at one fixed gamma as a function of theta alone; regressed
// from exact samples with gamma0 available as a literal.
struct SingleGammaResult {
  ParetoFront front;
  bool recovered = false;
};
SingleGammaResult bead_single_gamma(double gamma0, const SearchBudget& budget);

}  // namespace dimsr
