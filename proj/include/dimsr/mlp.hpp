#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dimsr/rng.hpp"

namespace dimsr {

enum class Activation { tanh, sigmoid };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

// Fully connected network: affine + activation on hidden layers, linear output.
// Inputs are normalized as (x - input_shift) * input_scale before the first
// layer. Parameters live in one flat vector: per layer W (column-major,
// out x in) then b.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, Activation act);

  // Uniform weights in +-sqrt(3 / fan_in), zero biases.
  static Mlp random(std::vector<int> sizes, Activation act, Rng& rng);

  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  Activation activation() const { return act_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer);
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const;

  std::vector<double> input_shift;
  std::vector<double> input_scale;

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<int> sizes_;
  Activation act_ = Activation::tanh;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
};

// Activation and its first three derivatives.
struct ActivationDerivs {
  double s0, s1, s2, s3;
};
ActivationDerivs activation_derivs(Activation a, double z);

// Batched forward pass with optional first/second derivatives along input 0.
// Columns of `inputs` are samples.
struct ForwardTrace {
  int order = 0;
  std::vector<Eigen::MatrixXd> a, da, dda;  // layer inputs (a[0] = normalized input)
  std::vector<Eigen::MatrixXd> z, dz, ddz;  // pre-activations
  const Eigen::MatrixXd& output() const { return z.back(); }
  const Eigen::MatrixXd& d_output() const { return dz.back(); }
  const Eigen::MatrixXd& dd_output() const { return ddz.back(); }
};

ForwardTrace forward_batch(const Mlp& net, const Eigen::MatrixXd& inputs, int order);

// Reverse accumulation through a trace. Adjoints of the output value and (when
// the trace carries them) its derivatives; parameter gradients are added into
// `grad` (size num params). Returns the adjoint of the raw inputs.
Eigen::MatrixXd backward_batch(const Mlp& net, const ForwardTrace& trace,
                               const Eigen::MatrixXd& adj_out, const Eigen::MatrixXd* adj_d1,
                               const Eigen::MatrixXd* adj_d2, std::span<double> grad);

Eigen::VectorXd forward(const Mlp& net, std::span<const double> input);

struct TaylorValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Exact value, d/dt and (order 2) d2/dt2 of a scalar-input, scalar-output net.
TaylorValue forward_derivatives(const Mlp& net, double t, int order);

std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const std::string& text);

}  // namespace dimsr
