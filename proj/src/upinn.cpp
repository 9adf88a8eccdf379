#include "dimsr/upinn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "dimsr/error.hpp"
#include "json.hpp"

namespace dimsr {

void UpinnConfig::validate() const {
  if (collocation < 1) throw Error("collocation count must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error("learning rate must be positive");
  }
  if (!(final_learning_rate >= 0.0) || !std::isfinite(final_learning_rate)) {
    throw Error("final learning rate must be >= 0");
  }
  if (!(lambda_mse >= 0.0) || !(lambda_ode >= 0.0)) throw Error("loss weights must be >= 0");
  if (lambda_mse == 0.0 && lambda_ode == 0.0) throw Error("loss weights cannot both be zero");
  if (order != 1 && order != 2) throw Error("derivative order must be 1 or 2");
  for (int w : surrogate_widths) {
    if (w <= 0) throw Error("layer widths must be positive");
  }
  for (int w : hidden_widths) {
    if (w <= 0) throw Error("layer widths must be positive");
  }
}

std::string config_to_json(const UpinnConfig& cfg) {
  nlohmann::ordered_json j;
  j["surrogate_widths"] = cfg.surrogate_widths;
  j["hidden_widths"] = cfg.hidden_widths;
  j["activation"] = activation_name(cfg.activation);
  j["learning_rate"] = cfg.learning_rate;
  j["final_learning_rate"] = cfg.final_learning_rate;
  j["epochs"] = cfg.epochs;
  j["collocation"] = cfg.collocation;
  j["lambda_mse"] = cfg.lambda_mse;
  j["lambda_ode"] = cfg.lambda_ode;
  j["seed"] = cfg.seed;
  j["order"] = cfg.order;
  return j.dump(2);
}

UpinnConfig config_from_json(const std::string& text) {
  UpinnConfig cfg;
  try {
    auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    if (j.contains("surrogate_widths")) cfg.surrogate_widths = j["surrogate_widths"].get<std::vector<int>>();
    if (j.contains("hidden_widths")) cfg.hidden_widths = j["hidden_widths"].get<std::vector<int>>();
    if (j.contains("activation")) cfg.activation = parse_activation(j["activation"].get<std::string>());
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("final_learning_rate")) cfg.final_learning_rate = j["final_learning_rate"].get<double>();
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("collocation")) cfg.collocation = j["collocation"].get<std::size_t>();
    if (j.contains("lambda_mse")) cfg.lambda_mse = j["lambda_mse"].get<double>();
    if (j.contains("lambda_ode")) cfg.lambda_ode = j["lambda_ode"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("order")) cfg.order = j["order"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed UPINN config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

namespace {

struct Columns {
  std::vector<double> t, u;
};

Columns data_columns(const Dataset& data, const OdeForm& form) {
  if (data.num_rows() == 0) throw Error("empty training dataset");
  return {data.column(form.time_name), data.column(form.state_name)};
}

Eigen::MatrixXd row_matrix(std::span<const double> v) {
  Eigen::MatrixXd m(1, v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m(0, i) = v[i];
  return m;
}

}  // namespace

LossTerms upinn_objective(const Mlp& surrogate, const Mlp& hidden, const OdeForm& form,
                          const Dataset& data, std::span<const double> colloc,
                          double lambda_mse, double lambda_ode, std::vector<double>* grad_surrogate,
                          std::vector<double>* grad_hidden) {
  if (colloc.empty()) throw Error("empty collocation set");
  if (surrogate.input_size() != 1 || surrogate.output_size() != 1) {
    throw Error("surrogate must map a scalar to a scalar");
  }
  if (hidden.input_size() != static_cast<int>(form.hidden_inputs.size()) ||
      hidden.output_size() != 1) {
    throw Error("hidden network arity does not match the hidden inputs");
  }
  const bool want_grad = grad_surrogate != nullptr || grad_hidden != nullptr;
  std::vector<double> gs_local, gh_local;
  std::vector<double>& gs = grad_surrogate ? *grad_surrogate : gs_local;
  std::vector<double>& gh = grad_hidden ? *grad_hidden : gh_local;
  if (want_grad) {
    gs.assign(surrogate.params().size(), 0.0);
    gh.assign(hidden.params().size(), 0.0);
  }

  LossTerms out;

  // Data fit.
  Columns cols = data_columns(data, form);
  const std::size_t n = cols.t.size();
  {
    auto tr = forward_batch(surrogate, row_matrix(cols.t), 0);
    Eigen::MatrixXd adj(1, n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = tr.output()(0, i) - cols.u[i];
      sum += r * r;
      adj(0, i) = lambda_mse * 2.0 * r / static_cast<double>(n);
    }
    out.mse = sum / static_cast<double>(n);
    if (want_grad && lambda_mse != 0.0) backward_batch(surrogate, tr, adj, nullptr, nullptr, gs);
  }

  // Residual at collocation points.
  const std::size_t k = colloc.size();
  const int order = form.order();
  auto tr = forward_batch(surrogate, row_matrix(colloc), order);
  const Eigen::MatrixXd& u = tr.output();
  const Eigen::MatrixXd& du = tr.d_output();

  CompiledExpr rhs(form.known_rhs, {form.state_name, form.time_name});
  std::vector<double> f(k), dfdu(k);
  for (std::size_t i = 0; i < k; ++i) {
    double args[2] = {u(0, i), colloc[i]};
    Dual d;
    if (!rhs.try_eval_dual(args, 0, d)) {
      throw DomainError("known right-hand side undefined at t = " + std::to_string(colloc[i]));
    }
    f[i] = d.value;
    dfdu[i] = d.deriv;
  }

  const std::size_t nh = form.hidden_inputs.size();
  Eigen::MatrixXd hin(nh, k);
  for (std::size_t j = 0; j < nh; ++j) {
    const auto& hi = form.hidden_inputs[j];
    for (std::size_t i = 0; i < k; ++i) {
      switch (hi.kind) {
        case HiddenInput::Kind::state: hin(j, i) = u(0, i); break;
        case HiddenInput::Kind::time: hin(j, i) = colloc[i]; break;
        case HiddenInput::Kind::constant: hin(j, i) = hi.value; break;
      }
    }
  }
  auto htr = forward_batch(hidden, hin, 0);
  const Eigen::MatrixXd& g = htr.output();

  Eigen::MatrixXd gres(1, k);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double rho = form.c1 * du(0, i) - f[i] - form.hidden_sign * g(0, i);
    if (order == 2) rho += form.c2 * tr.dd_output()(0, i);
    sum += rho * rho;
    gres(0, i) = lambda_ode * 2.0 * rho / static_cast<double>(k);
  }
  out.ode = sum / static_cast<double>(k);

  if (want_grad && lambda_ode != 0.0) {
    Eigen::MatrixXd hadj = -form.hidden_sign * gres;
    Eigen::MatrixXd xbar = backward_batch(hidden, htr, hadj, nullptr, nullptr, gh);
    Eigen::MatrixXd adj_u(1, k), adj_d1(1, k), adj_d2(1, k);
    for (std::size_t i = 0; i < k; ++i) {
      double a = -gres(0, i) * dfdu[i];
      for (std::size_t j = 0; j < nh; ++j) {
        if (form.hidden_inputs[j].kind == HiddenInput::Kind::state) a += xbar(j, i);
      }
      adj_u(0, i) = a;
      adj_d1(0, i) = form.c1 * gres(0, i);
      adj_d2(0, i) = form.c2 * gres(0, i);
    }
    backward_batch(surrogate, tr, adj_u, &adj_d1, order == 2 ? &adj_d2 : nullptr, gs);
  }
  return out;
}

double loss_mse(const Mlp& surrogate, const Dataset& data, const OdeForm& form) {
  Columns cols = data_columns(data, form);
  auto tr = forward_batch(surrogate, row_matrix(cols.t), 0);
  double sum = 0.0;
  for (std::size_t i = 0; i < cols.t.size(); ++i) {
    double r = tr.output()(0, i) - cols.u[i];
    sum += r * r;
  }
  return sum / static_cast<double>(cols.t.size());
}

double loss_ode(const Mlp& surrogate, const Mlp& hidden, const OdeForm& form,
                std::span<const double> colloc) {
  if (colloc.empty()) throw Error("empty collocation set");
  // A one-row placeholder keeps the shared objective happy; only the residual is used.
  Dataset dummy({form.time_name, form.state_name});
  double row[2] = {colloc[0], 0.0};
  dummy.add_row(row);
  return upinn_objective(surrogate, hidden, form, dummy, colloc, 0.0, 1.0, nullptr, nullptr).ode;
}

std::vector<double> uniform_collocation(double t0, double t1, std::size_t k) {
  if (k == 0) throw Error("collocation count must be at least 1");
  if (k == 1) return {0.5 * (t0 + t1)};
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(k - 1);
  }
  return out;
}

namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& widths) {
  std::vector<int> s{in};
  s.insert(s.end(), widths.begin(), widths.end());
  s.push_back(1);
  return s;
}

void set_normalization(Mlp& net, std::size_t i, double lo, double hi) {
  net.input_shift[i] = 0.5 * (lo + hi);
  net.input_scale[i] = hi > lo ? 2.0 / (hi - lo) : 1.0;
}

}  // namespace

TrainedUpinn init_upinn(const UpinnConfig& cfg, const Dataset& data, const OdeForm& form,
                        std::span<const double> colloc) {
  cfg.validate();
  if (form.order() > cfg.order) {
    throw Error("the ODE form is second order but the config asks for order 1");
  }
  Columns cols = data_columns(data, form);
  Rng rng(cfg.seed);
  TrainedUpinn m;
  m.config = cfg;
  m.form = form;
  m.surrogate = Mlp::random(layer_sizes(1, cfg.surrogate_widths), cfg.activation, rng);
  m.hidden = Mlp::random(layer_sizes(static_cast<int>(form.hidden_inputs.size()), cfg.hidden_widths),
                         cfg.activation, rng);

  auto [tlo_it, thi_it] = std::minmax_element(cols.t.begin(), cols.t.end());
  double tlo = *tlo_it, thi = *thi_it;
  for (double c : colloc) {
    tlo = std::min(tlo, c);
    thi = std::max(thi, c);
  }
  auto [ulo_it, uhi_it] = std::minmax_element(cols.u.begin(), cols.u.end());
  set_normalization(m.surrogate, 0, tlo, thi);
  double mean = 0.0;
  for (double v : cols.u) mean += v;
  m.surrogate.bias(m.surrogate.num_layers() - 1)(0) = mean / static_cast<double>(cols.u.size());

  for (std::size_t j = 0; j < form.hidden_inputs.size(); ++j) {
    const auto& hi = form.hidden_inputs[j];
    switch (hi.kind) {
      case HiddenInput::Kind::state: set_normalization(m.hidden, j, *ulo_it, *uhi_it); break;
      case HiddenInput::Kind::time: set_normalization(m.hidden, j, tlo, thi); break;
      case HiddenInput::Kind::constant:
        m.hidden.input_shift[j] = hi.value;
        m.hidden.input_scale[j] = 1.0;
        break;
    }
  }
  return m;
}

TrainedUpinn train(const UpinnConfig& cfg, const Dataset& data, const OdeForm& form,
                   std::span<const double> colloc) {
  TrainedUpinn m = init_upinn(cfg, data, form, colloc);
  auto& ps = m.surrogate.params();
  auto& ph = m.hidden.params();
  const std::size_t ns = ps.size();
  const std::size_t total = ns + ph.size();

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<double> mom(total, 0.0), vel(total, 0.0);
  std::vector<double> gs, gh;
  std::vector<double> best_s = ps, best_h = ph;
  double best = std::numeric_limits<double>::infinity();
  LossTerms best_terms;
  double b1t = 1.0, b2t = 1.0;
  auto weighted = [&](const LossTerms& l) { return cfg.lambda_mse * l.mse + cfg.lambda_ode * l.ode; };

  m.loss_history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    LossTerms l = upinn_objective(m.surrogate, m.hidden, form, data, colloc, cfg.lambda_mse,
                                  cfg.lambda_ode, &gs, &gh);
    double w = weighted(l);
    if (!std::isfinite(w)) throw Error("training diverged at epoch " + std::to_string(epoch));
    m.loss_history.push_back(l);
    if (w < best) {
      best = w;
      best_terms = l;
      best_s = ps;
      best_h = ph;
    }
    b1t *= beta1;
    b2t *= beta2;
    double lr = cfg.learning_rate;
    if (cfg.final_learning_rate > 0.0 && cfg.epochs > 1) {
      double frac = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
      lr *= std::pow(cfg.final_learning_rate / cfg.learning_rate, frac);
    }
    const double step = lr * std::sqrt(1.0 - b2t) / (1.0 - b1t);
    for (std::size_t i = 0; i < total; ++i) {
      double g = i < ns ? gs[i] : gh[i - ns];
      mom[i] = beta1 * mom[i] + (1.0 - beta1) * g;
      vel[i] = beta2 * vel[i] + (1.0 - beta2) * g * g;
      double& p = i < ns ? ps[i] : ph[i - ns];
      p -= step * mom[i] / (std::sqrt(vel[i]) + eps);
    }
  }
  LossTerms last =
      upinn_objective(m.surrogate, m.hidden, form, data, colloc, cfg.lambda_mse, cfg.lambda_ode,
                      nullptr, nullptr);
  if (std::isfinite(weighted(last)) && weighted(last) < best) {
    best_terms = last;
  } else if (cfg.epochs > 0) {
    ps = best_s;
    ph = best_h;
  } else {
    best_terms = last;
  }
  m.final_loss = best_terms;
  return m;
}

Dataset sample_hidden(const TrainedUpinn& model, const Dataset& inputs, const std::string& output) {
  if (inputs.num_cols() != static_cast<std::size_t>(model.hidden.input_size())) {
    throw Error("hidden network takes " + std::to_string(model.hidden.input_size()) +
                " inputs, dataset has " + std::to_string(inputs.num_cols()) + " columns");
  }
  std::vector<std::string> cols = inputs.columns();
  cols.push_back(output);
  Dataset out(cols);
  out.meta = inputs.meta;
  const std::size_t n = inputs.num_rows();
  if (n == 0) return out;
  Eigen::MatrixXd x(inputs.num_cols(), n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < inputs.num_cols(); ++c) x(c, r) = inputs.at(r, c);
  }
  auto tr = forward_batch(model.hidden, x, 0);
  std::vector<double> row(cols.size());
  for (std::size_t r = 0; r < n; ++r) {
    auto in = inputs.row(r);
    std::copy(in.begin(), in.end(), row.begin());
    row.back() = tr.output()(0, r);
    out.add_row(row);
  }
  return out;
}

std::string upinn_to_json(const TrainedUpinn& model) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(config_to_json(model.config));
  nlohmann::ordered_json form;
  form["time"] = model.form.time_name;
  form["state"] = model.form.state_name;
  form["known_rhs"] = to_string(model.form.known_rhs);
  form["c1"] = model.form.c1;
  form["c2"] = model.form.c2;
  form["hidden_sign"] = model.form.hidden_sign;
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& hi : model.form.hidden_inputs) {
    nlohmann::ordered_json h;
    h["kind"] = hi.kind == HiddenInput::Kind::state  ? "state"
                : hi.kind == HiddenInput::Kind::time ? "time"
                                                     : "constant";
    h["name"] = hi.name;
    if (hi.kind == HiddenInput::Kind::constant) h["value"] = hi.value;
    inputs.push_back(h);
  }
  form["hidden_inputs"] = inputs;
  j["form"] = form;
  j["surrogate"] = nlohmann::ordered_json::parse(mlp_to_json(model.surrogate));
  j["hidden"] = nlohmann::ordered_json::parse(mlp_to_json(model.hidden));
  j["final_loss"] = {{"mse", model.final_loss.mse}, {"ode", model.final_loss.ode}};
  return j.dump(2);
}

void write_loss_history_csv(const TrainedUpinn& model, const std::string& path) {
  Dataset d({"epoch", "mse", "ode"});
  for (std::size_t i = 0; i < model.loss_history.size(); ++i) {
    double row[3] = {static_cast<double>(i), model.loss_history[i].mse, model.loss_history[i].ode};
    d.add_row(row);
  }
  csv_write(d, path);
}

}  // namespace dimsr
