#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dimsr/error.hpp"
#include "dimsr/upinn.hpp"

using namespace dimsr;

namespace {

Mlp fuzzed_net(std::vector<int> sizes, Activation act, std::uint64_t seed) {
  Rng rng(seed);
  Mlp net = Mlp::random(std::move(sizes), act, rng);
  for (auto& p : net.params()) p += rng.uniform(-0.3, 0.3);  // nonzero biases too
  for (std::size_t i = 0; i < net.input_shift.size(); ++i) {
    net.input_shift[i] = rng.uniform(-0.5, 0.5);
    net.input_scale[i] = rng.uniform(0.5, 2.0);
  }
  return net;
}

double scalar(const Mlp& net, double t) { return forward(net, std::vector<double>{t})(0); }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-3, std::abs(b)); }

// Five-point stencils: truncation O(h^4) keeps the oracle well below 1e-5.
template <class F>
double fd_first(F f, double h = 1e-3) {
  return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
}
template <class F>
double fd_second(F f, double h = 1e-2) {
  return (-f(2 * h) + 16 * f(h) - 30 * f(0.0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
}

// Pendulum-like second-order form with a state input and a constant input to G.
OdeForm order2_form() {
  OdeForm f;
  f.time_name = "t";
  f.state_name = "u";
  f.known_rhs = parse_expr("(0.3 * u)");
  f.c1 = 0.7;
  f.c2 = 1.3;
  f.hidden_sign = -1.0;
  f.hidden_inputs = {{HiddenInput::Kind::state, "u", 0.0}, {HiddenInput::Kind::constant, "k", 2.0}};
  return f;
}

OdeForm order1_form() {
  OdeForm f;
  f.time_name = "t";
  f.state_name = "u";
  f.known_rhs = parse_expr("(u * (1 - u))");
  f.hidden_inputs = {{HiddenInput::Kind::state, "u", 0.0}};
  return f;
}

Dataset decay_data(std::size_t n) {
  Dataset d({"t", "u"});
  for (std::size_t i = 0; i < n; ++i) {
    double t = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    d.add_row({t, 0.2 + 0.5 * std::exp(-t)});
  }
  return d;
}

UpinnConfig small_config(int order) {
  UpinnConfig c;
  c.surrogate_widths = {6, 5};
  c.hidden_widths = {5};
  c.epochs = 50;
  c.collocation = 12;
  c.seed = 11;
  c.order = order;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("activation derivatives match finite differences") {
  for (Activation a : {Activation::tanh, Activation::sigmoid}) {
    for (double z : {-2.0, -0.4, 0.0, 0.9, 2.5}) {
      const double h = 1e-5;
      auto d = activation_derivs(a, z);
      auto p = activation_derivs(a, z + h), m = activation_derivs(a, z - h);
      CHECK(d.s1 == doctest::Approx((p.s0 - m.s0) / (2 * h)).epsilon(1e-7));
      CHECK(d.s2 == doctest::Approx((p.s1 - m.s1) / (2 * h)).epsilon(1e-6));
      CHECK(d.s3 == doctest::Approx((p.s2 - m.s2) / (2 * h)).epsilon(1e-6));
    }
  }
  CHECK(parse_activation(activation_name(Activation::sigmoid)) == Activation::sigmoid);
  CHECK_THROWS_AS(parse_activation("relu"), Error);
}

TEST_CASE("surrogate input derivatives of order 1 and 2 match finite differences") {
  Rng pick(5);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Activation act = seed % 2 ? Activation::tanh : Activation::sigmoid;
    Mlp net = fuzzed_net({1, 7, 6, 1}, act, seed);
    double t = pick.uniform(-1.5, 1.5);
    auto d = forward_derivatives(net, t, 2);
    CHECK(d.value == doctest::Approx(scalar(net, t)).epsilon(1e-14));

    auto f = [&](double dt) { return scalar(net, t + dt); };
    double fd1 = fd_first(f), fd2 = fd_second(f);
    CAPTURE(seed);
    CHECK(rel_err(d.d1, fd1) < 1e-5);
    CHECK(rel_err(d.d2, fd2) < 1e-5);
    CHECK(forward_derivatives(net, t, 1).d1 == d.d1);
  }
}

TEST_CASE("batched derivatives agree with the scalar path along input 0") {
  Mlp net = fuzzed_net({2, 5, 4, 1}, Activation::tanh, 3);
  Eigen::MatrixXd x(2, 3);
  x << 0.1, -0.7, 1.2, 0.5, 0.5, -0.2;
  auto tr = forward_batch(net, x, 2);
  for (int c = 0; c < 3; ++c) {
    auto f = [&](double dt) {
      return forward(net, std::vector<double>{x(0, c) + dt, x(1, c)})(0);
    };
    CHECK(tr.output()(0, c) == doctest::Approx(f(0)).epsilon(1e-14));
    CHECK(rel_err(tr.d_output()(0, c), fd_first(f)) < 1e-5);
    CHECK(rel_err(tr.dd_output()(0, c), fd_second(f)) < 1e-5);
  }
}

TEST_CASE("parameter gradients of the total loss match central differences") {
  for (int order : {1, 2}) {
    OdeForm form = order == 2 ? order2_form() : order1_form();
    Dataset data = decay_data(9);
    auto colloc = uniform_collocation(0.0, 2.0, 7);
    UpinnConfig cfg = small_config(order);
    cfg.activation = order == 2 ? Activation::tanh : Activation::sigmoid;
    TrainedUpinn m = init_upinn(cfg, data, form, colloc);
    Rng rng(77);
    for (auto& p : m.surrogate.params()) p += rng.uniform(-0.2, 0.2);
    for (auto& p : m.hidden.params()) p += rng.uniform(-0.2, 0.2);

    const double lm = 0.8, lo = 1.7;
    std::vector<double> gs, gh;
    upinn_objective(m.surrogate, m.hidden, form, data, colloc, lm, lo, &gs, &gh);
    REQUIRE(gs.size() == m.surrogate.params().size());
    REQUIRE(gh.size() == m.hidden.params().size());

    auto total = [&](const Mlp& s, const Mlp& h) {
      auto l = upinn_objective(s, h, form, data, colloc, lm, lo, nullptr, nullptr);
      return lm * l.mse + lo * l.ode;
    };
    for (int dir = 0; dir < 10; ++dir) {
      Mlp sp = m.surrogate, sm = m.surrogate, hp = m.hidden, hm = m.hidden;
      double analytic = 0.0;
      const double eps = 1e-6;
      for (std::size_t i = 0; i < gs.size(); ++i) {
        double v = rng.uniform(-1.0, 1.0);
        sp.params()[i] += eps * v;
        sm.params()[i] -= eps * v;
        analytic += gs[i] * v;
      }
      for (std::size_t i = 0; i < gh.size(); ++i) {
        double v = rng.uniform(-1.0, 1.0);
        hp.params()[i] += eps * v;
        hm.params()[i] -= eps * v;
        analytic += gh[i] * v;
      }
      double fd = (total(sp, hp) - total(sm, hm)) / (2 * eps);
      CAPTURE(order);
      CAPTURE(dir);
      CHECK(std::abs(analytic - fd) / std::max(1e-8, std::abs(fd)) < 1e-4);
    }
  }
}

TEST_CASE("losses are nonnegative and the residual is linear in the hidden output") {
  OdeForm form = order2_form();
  Dataset data = decay_data(9);
  auto colloc = uniform_collocation(0.0, 2.0, 7);
  TrainedUpinn m = init_upinn(small_config(2), data, form, colloc);
  CHECK(loss_mse(m.surrogate, data, form) >= 0.0);
  CHECK(loss_ode(m.surrogate, m.hidden, form, colloc) >= 0.0);

  // Residual r(c) = base - sign * c * G; the mean square is quadratic in c, so
  // three samples determine it and a fourth must fit exactly.
  auto ode_at = [&](double c) {
    Mlp h = m.hidden;
    std::size_t last = h.num_layers() - 1;
    h.weight(last) *= c;
    h.bias(last) *= c;
    return loss_ode(m.surrogate, h, form, colloc);
  };
  double l0 = ode_at(0.0), l1 = ode_at(1.0), l2 = ode_at(2.0);
  double a = (l2 - 2 * l1 + l0) / 2, b = l1 - l0 - a;
  CHECK(ode_at(3.0) == doctest::Approx(l0 + 3 * b + 9 * a).epsilon(1e-9));
  CHECK(a >= 0.0);
}

TEST_CASE("uniform collocation") {
  auto c = uniform_collocation(1.0, 3.0, 5);
  CHECK(c == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});
  CHECK(uniform_collocation(0.0, 1.0, 1) == std::vector<double>{0.5});
  CHECK_THROWS_AS(uniform_collocation(0.0, 1.0, 0), Error);
}

TEST_CASE("config JSON round trip and validation") {
  UpinnConfig c = small_config(2);
  c.learning_rate = 3e-3;
  c.final_learning_rate = 1e-5;
  c.activation = Activation::sigmoid;
  CHECK(config_from_json(config_to_json(c)) == c);
  CHECK(config_from_json("{}") == UpinnConfig{});

  auto bad = [](auto mutate) {
    UpinnConfig x;
    mutate(x);
    return x;
  };
  CHECK_THROWS_AS(bad([](UpinnConfig& x) { x.learning_rate = 0.0; }).validate(), Error);
  CHECK_THROWS_AS(bad([](UpinnConfig& x) { x.final_learning_rate = -1.0; }).validate(), Error);
  CHECK_THROWS_AS(bad([](UpinnConfig& x) { x.surrogate_widths = {8, 0}; }).validate(), Error);
  CHECK_THROWS_AS(bad([](UpinnConfig& x) { x.order = 3; }).validate(), Error);
  CHECK_THROWS_AS(bad([](UpinnConfig& x) { x.lambda_ode = -1.0; }).validate(), Error);
  CHECK_THROWS(config_from_json("{\"epochs\": \"many\"}"));
}

TEST_CASE("a second-order form needs an order-2 config") {
  Dataset data = decay_data(5);
  auto colloc = uniform_collocation(0.0, 2.0, 4);
  CHECK_THROWS_AS(init_upinn(small_config(1), data, order2_form(), colloc), Error);
}

TEST_CASE("training is deterministic and does not increase the loss") {
  Dataset data = decay_data(21);
  auto colloc = uniform_collocation(0.0, 2.0, 15);
  UpinnConfig cfg = small_config(1);
  cfg.epochs = 300;
  cfg.learning_rate = 5e-3;
  cfg.final_learning_rate = 5e-4;
  OdeForm form = order1_form();
  TrainedUpinn a = train(cfg, data, form, colloc);
  TrainedUpinn b = train(cfg, data, form, colloc);
  REQUIRE(a.loss_history.size() == 300);
  CHECK(a.surrogate == b.surrogate);
  CHECK(a.hidden == b.hidden);
  CHECK(upinn_to_json(a) == upinn_to_json(b));
  auto dir = std::filesystem::temp_directory_path() / "dimsr_test_upinn";
  std::filesystem::create_directories(dir);
  write_loss_history_csv(a, (dir / "a.csv").string());
  write_loss_history_csv(b, (dir / "b.csv").string());
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

  auto w = [&](const LossTerms& l) { return cfg.lambda_mse * l.mse + cfg.lambda_ode * l.ode; };
  CHECK(w(a.final_loss) <= w(a.loss_history.front()));
  CHECK(w(a.final_loss) < 0.5 * w(a.loss_history.front()));
  for (const auto& l : a.loss_history) {
    CHECK(l.mse >= 0.0);
    CHECK(l.ode >= 0.0);
  }

  cfg.seed = 12;
  CHECK_FALSE(train(cfg, data, form, colloc).surrogate == a.surrogate);
}

TEST_CASE("sampling the hidden network") {
  // Identity-like net: one linear layer with slope 1.
  UpinnConfig cfg = small_config(1);
  cfg.hidden_widths = {};
  Dataset data = decay_data(5);
  auto colloc = uniform_collocation(0.0, 2.0, 4);
  TrainedUpinn m = init_upinn(cfg, data, order1_form(), colloc);
  REQUIRE(m.hidden.num_layers() == 1);
  m.hidden.params() = {1.0, 0.0};
  m.hidden.input_shift = {0.0};
  m.hidden.input_scale = {1.0};
  Dataset grid({"u"});
  for (double u : {0.1, 0.5, 2.0}) grid.add_row({u});
  Dataset s = sample_hidden(m, grid);
  REQUIRE(s.columns() == std::vector<std::string>{"u", "G"});
  for (std::size_t r = 0; r < s.num_rows(); ++r) CHECK(s.at(r, 1) == doctest::Approx(s.at(r, 0)));
  CHECK_THROWS_AS(sample_hidden(m, data), Error);
}

TEST_CASE("network JSON round trip") {
  Mlp net = fuzzed_net({2, 4, 1}, Activation::sigmoid, 8);
  Mlp back = mlp_from_json(mlp_to_json(net));
  CHECK(back == net);
}
