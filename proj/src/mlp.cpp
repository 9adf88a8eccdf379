#include "dimsr/mlp.hpp"

#include <cmath>

#include "dimsr/error.hpp"
#include "json.hpp"

namespace dimsr {

std::string activation_name(Activation a) { return a == Activation::tanh ? "tanh" : "sigmoid"; }

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  throw ParseError("unknown activation '" + name + "'");
}

Mlp::Mlp(std::vector<int> sizes, Activation act) : sizes_(std::move(sizes)), act_(act) {
  if (sizes_.size() < 2) throw Error("network needs at least an input and an output layer");
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) throw Error("layer sizes must be positive");
    offsets_.push_back(n);
    n += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
  }
  params_.assign(n, 0.0);
  input_shift.assign(sizes_.front(), 0.0);
  input_scale.assign(sizes_.front(), 1.0);
}

Mlp Mlp::random(std::vector<int> sizes, Activation act, Rng& rng) {
  Mlp net(std::move(sizes), act);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    double bound = std::sqrt(3.0 / net.sizes_[l]);
    auto w = net.weight(l);
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-bound, bound);
    }
  }
  return net;
}

std::size_t Mlp::bias_offset(std::size_t layer) const {
  return offsets_[layer] + static_cast<std::size_t>(sizes_[layer]) * sizes_[layer + 1];
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(std::size_t l) const {
  return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t l) const {
  return {params_.data() + bias_offset(l), sizes_[l + 1]};
}
Eigen::Map<Eigen::MatrixXd> Mlp::weight(std::size_t l) {
  return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<Eigen::VectorXd> Mlp::bias(std::size_t l) {
  return {params_.data() + bias_offset(l), sizes_[l + 1]};
}

ActivationDerivs activation_derivs(Activation a, double z) {
  if (a == Activation::tanh) {
    double s0 = std::tanh(z);
    double s1 = 1.0 - s0 * s0;
    double s2 = -2.0 * s0 * s1;
    double s3 = -2.0 * (s1 * s1 + s0 * s2);
    return {s0, s1, s2, s3};
  }
  double s0 = 1.0 / (1.0 + std::exp(-z));
  double s1 = s0 * (1.0 - s0);
  double s2 = s1 * (1.0 - 2.0 * s0);
  double s3 = s2 * (1.0 - 2.0 * s0) - 2.0 * s1 * s1;
  return {s0, s1, s2, s3};
}

ForwardTrace forward_batch(const Mlp& net, const Eigen::MatrixXd& inputs, int order) {
  if (inputs.rows() != net.input_size()) {
    throw Error("network input size " + std::to_string(net.input_size()) + ", got " +
                std::to_string(inputs.rows()));
  }
  if (order < 0 || order > 2) throw Error("derivative order must be 0, 1 or 2");
  const Eigen::Index batch = inputs.cols();
  ForwardTrace tr;
  tr.order = order;
  const std::size_t L = net.num_layers();

  Eigen::MatrixXd a0(inputs.rows(), batch);
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    a0.row(r) = (inputs.row(r).array() - net.input_shift[r]) * net.input_scale[r];
  }
  tr.a.push_back(std::move(a0));
  if (order >= 1) {
    Eigen::MatrixXd d0 = Eigen::MatrixXd::Zero(inputs.rows(), batch);
    d0.row(0).setConstant(net.input_scale[0]);
    tr.da.push_back(std::move(d0));
  }
  if (order >= 2) tr.dda.push_back(Eigen::MatrixXd::Zero(inputs.rows(), batch));

  for (std::size_t l = 0; l < L; ++l) {
    auto w = net.weight(l);
    Eigen::MatrixXd z = w * tr.a[l];
    z.colwise() += net.bias(l);
    Eigen::MatrixXd dz;
    Eigen::MatrixXd ddz;
    if (order >= 1) dz = w * tr.da[l];
    if (order >= 2) ddz = w * tr.dda[l];
    if (l + 1 < L) {
      Eigen::MatrixXd a(z.rows(), batch), da, dda;
      if (order >= 1) da.resize(z.rows(), batch);
      if (order >= 2) dda.resize(z.rows(), batch);
      for (Eigen::Index c = 0; c < batch; ++c) {
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
          auto s = activation_derivs(net.activation(), z(r, c));
          a(r, c) = s.s0;
          if (order >= 1) da(r, c) = s.s1 * dz(r, c);
          if (order >= 2) dda(r, c) = s.s2 * dz(r, c) * dz(r, c) + s.s1 * ddz(r, c);
        }
      }
      tr.a.push_back(std::move(a));
      if (order >= 1) tr.da.push_back(std::move(da));
      if (order >= 2) tr.dda.push_back(std::move(dda));
    }
    tr.z.push_back(std::move(z));
    if (order >= 1) tr.dz.push_back(std::move(dz));
    if (order >= 2) tr.ddz.push_back(std::move(ddz));
  }
  return tr;
}

Eigen::MatrixXd backward_batch(const Mlp& net, const ForwardTrace& tr,
                               const Eigen::MatrixXd& adj_out, const Eigen::MatrixXd* adj_d1,
                               const Eigen::MatrixXd* adj_d2, std::span<double> grad) {
  if (grad.size() != net.params().size()) throw Error("gradient buffer size mismatch");
  const std::size_t L = net.num_layers();
  const int order = tr.order;
  const bool use1 = order >= 1 && adj_d1 != nullptr;
  const bool use2 = order >= 2 && adj_d2 != nullptr;

  Eigen::MatrixXd zbar = adj_out;
  Eigen::MatrixXd dzbar;
  Eigen::MatrixXd ddzbar;
  if (use1 || use2) dzbar = use1 ? *adj_d1 : Eigen::MatrixXd::Zero(adj_out.rows(), adj_out.cols());
  if (use2) ddzbar = *adj_d2;
  const bool chan1 = use1 || use2;

  Eigen::MatrixXd abar;
  for (std::size_t li = L; li-- > 0;) {
    auto w = net.weight(li);
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + net.weight_offset(li), w.rows(), w.cols());
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + net.bias_offset(li), w.rows());
    gw.noalias() += zbar * tr.a[li].transpose();
    if (chan1) gw.noalias() += dzbar * tr.da[li].transpose();
    if (use2) gw.noalias() += ddzbar * tr.dda[li].transpose();
    gb += zbar.rowwise().sum();

    abar = w.transpose() * zbar;
    if (li == 0) break;
    Eigen::MatrixXd dabar;
    Eigen::MatrixXd ddabar;
    if (chan1) dabar = w.transpose() * dzbar;
    if (use2) ddabar = w.transpose() * ddzbar;

    // Through a = s(z), da = s'(z) dz, dda = s''(z) dz^2 + s'(z) ddz.
    const auto& z = tr.z[li - 1];
    Eigen::MatrixXd nz(z.rows(), z.cols()), ndz, nddz;
    if (chan1) ndz.resize(z.rows(), z.cols());
    if (use2) nddz.resize(z.rows(), z.cols());
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        auto s = activation_derivs(net.activation(), z(r, c));
        double v = abar(r, c) * s.s1;
        if (chan1) {
          double dzv = tr.dz[li - 1](r, c);
          v += dabar(r, c) * s.s2 * dzv;
          ndz(r, c) = dabar(r, c) * s.s1;
          if (use2) {
            double ddzv = tr.ddz[li - 1](r, c);
            v += ddabar(r, c) * (s.s3 * dzv * dzv + s.s2 * ddzv);
            ndz(r, c) += ddabar(r, c) * 2.0 * s.s2 * dzv;
            nddz(r, c) = ddabar(r, c) * s.s1;
          }
        }
        nz(r, c) = v;
      }
    }
    zbar = std::move(nz);
    if (chan1) dzbar = std::move(ndz);
    if (use2) ddzbar = std::move(nddz);
  }
  for (Eigen::Index r = 0; r < abar.rows(); ++r) abar.row(r) *= net.input_scale[r];
  return abar;
}

Eigen::VectorXd forward(const Mlp& net, std::span<const double> input) {
  if (static_cast<int>(input.size()) != net.input_size()) {
    throw Error("network input size " + std::to_string(net.input_size()) + ", got " +
                std::to_string(input.size()));
  }
  Eigen::MatrixXd x(input.size(), 1);
  for (std::size_t i = 0; i < input.size(); ++i) x(i, 0) = input[i];
  return forward_batch(net, x, 0).output().col(0);
}

TaylorValue forward_derivatives(const Mlp& net, double t, int order) {
  if (net.input_size() != 1 || net.output_size() != 1) {
    throw Error("forward_derivatives needs a scalar-input, scalar-output network");
  }
  Eigen::MatrixXd x(1, 1);
  x(0, 0) = t;
  auto tr = forward_batch(net, x, order);
  TaylorValue out;
  out.value = tr.output()(0, 0);
  if (order >= 1) out.d1 = tr.d_output()(0, 0);
  if (order >= 2) out.d2 = tr.dd_output()(0, 0);
  return out;
}

std::string mlp_to_json(const Mlp& net) {
  nlohmann::ordered_json j;
  j["sizes"] = net.sizes();
  j["activation"] = activation_name(net.activation());
  j["input_shift"] = net.input_shift;
  j["input_scale"] = net.input_scale;
  j["params"] = net.params();
  return j.dump();
}

Mlp mlp_from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    Mlp net(j.at("sizes").get<std::vector<int>>(),
            parse_activation(j.at("activation").get<std::string>()));
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.params().size()) throw ParseError("parameter count mismatch");
    net.params() = std::move(params);
    net.input_shift = j.at("input_shift").get<std::vector<double>>();
    net.input_scale = j.at("input_scale").get<std::vector<double>>();
    if (static_cast<int>(net.input_shift.size()) != net.input_size() ||
        static_cast<int>(net.input_scale.size()) != net.input_size()) {
      throw ParseError("input normalization size mismatch");
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed network JSON: ") + e.what());
  }
}

}  // namespace dimsr
