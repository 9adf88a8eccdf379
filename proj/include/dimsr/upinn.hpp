#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dimsr/data.hpp"
#include "dimsr/expr.hpp"
#include "dimsr/mlp.hpp"

namespace dimsr {

struct UpinnConfig {
  std::vector<int> surrogate_widths{32, 32};
  std::vector<int> hidden_widths{32, 32};
  Activation activation = Activation::tanh;
  double learning_rate = 1e-3;
  double final_learning_rate = 0.0;  // > 0: exponential decay to this rate
  std::size_t epochs = 20000;
  std::size_t collocation = 200;
  double lambda_mse = 1.0;
  double lambda_ode = 1.0;
  std::uint64_t seed = 0;
  int order = 1;

  void validate() const;  // throws Error
  bool operator==(const UpinnConfig&) const = default;
};

std::string config_to_json(const UpinnConfig& cfg);
UpinnConfig config_from_json(const std::string& text);

// What feeds the hidden-term network at a collocation point.
struct HiddenInput {
  enum class Kind { state, time, constant };
  Kind kind = Kind::state;
  std::string name;     // column name used when sampling
  double value = 0.0;   // for constants
};

// Residual of the governing form
//   c2 * U'' + c1 * U' - F(U, t) - hidden_sign * G_NN(inputs)
// where F is the known part of the right-hand side.
struct OdeForm {
  std::string time_name = "t";
  std::string state_name = "u";
  Expr known_rhs;  // over state_name / time_name; literal 0 when absent
  double c1 = 1.0;
  double c2 = 0.0;
  double hidden_sign = 1.0;
  std::vector<HiddenInput> hidden_inputs;

  int order() const { return c2 != 0.0 ? 2 : 1; }
};

struct LossTerms {
  double mse = 0.0;
  double ode = 0.0;
};

double loss_mse(const Mlp& surrogate, const Dataset& data, const OdeForm& form);
double loss_ode(const Mlp& surrogate, const Mlp& hidden, const OdeForm& form,
                std::span<const double> colloc);

// Both losses and, when the gradient buffers are given, the gradient of
// lambda_mse * mse + lambda_ode * ode with respect to each network's flat
// parameters (buffers are overwritten).
LossTerms upinn_objective(const Mlp& surrogate, const Mlp& hidden, const OdeForm& form,
                          const Dataset& data, std::span<const double> colloc,
                          double lambda_mse, double lambda_ode, std::vector<double>* grad_surrogate,
                          std::vector<double>* grad_hidden);

std::vector<double> uniform_collocation(double t0, double t1, std::size_t k);

struct TrainedUpinn {
  Mlp surrogate;
  Mlp hidden;
  std::vector<LossTerms> loss_history;  // pre-update losses, one per epoch
  LossTerms final_loss;                 // losses of the returned parameters
  UpinnConfig config;
  OdeForm form;
};

// Freshly initialized networks with input normalization set from the
// training data and collocation span.
TrainedUpinn init_upinn(const UpinnConfig& cfg, const Dataset& data, const OdeForm& form,
                        std::span<const double> colloc);

// Full-batch Adam on the weighted loss. Returns the best parameters seen.
TrainedUpinn train(const UpinnConfig& cfg, const Dataset& data, const OdeForm& form,
                   std::span<const double> colloc);

// Appends `output` = hidden-net value at each row. Columns must line up with
// the hidden inputs (by count).
Dataset sample_hidden(const TrainedUpinn& model, const Dataset& inputs,
                      const std::string& output = "G");

std::string upinn_to_json(const TrainedUpinn& model);
void write_loss_history_csv(const TrainedUpinn& model, const std::string& path);

}  // namespace dimsr
