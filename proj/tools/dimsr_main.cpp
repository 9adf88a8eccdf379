// dimsr: dimensional analysis, UPINN training and symbolic regression from the
// command line. Exit codes: 0 ok, 1 domain error, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dimsr/bench.hpp"
#include "dimsr/error.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace dimsr;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ojson read_json(const std::string& path) {
  try {
    return ojson::parse(read_file(path));
  } catch (const ojson::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

fs::path out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  return p;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::vector<VariableSpec> load_nonempty(const std::string& path) {
  auto vars = load_variables(path);
  if (vars.empty()) throw UsageError(path + ": variable set is empty");
  return vars;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + item + "' in list '" + text + "'");
    }
  }
  return out;
}

OdeForm form_from_json(const ojson& j) {
  OdeForm f;
  f.time_name = j.value("time", std::string("t"));
  f.state_name = j.value("state", std::string("u"));
  f.known_rhs = parse_expr(j.value("known_rhs", std::string("0")));
  f.c1 = j.value("c1", 1.0);
  f.c2 = j.value("c2", 0.0);
  f.hidden_sign = j.value("hidden_sign", 1.0);
  for (const auto& h : j.value("hidden_inputs", ojson::array())) {
    HiddenInput in;
    std::string kind = h.value("kind", std::string("state"));
    if (kind == "state") in.kind = HiddenInput::Kind::state;
    else if (kind == "time") in.kind = HiddenInput::Kind::time;
    else if (kind == "constant") in.kind = HiddenInput::Kind::constant;
    else throw ParseError("unknown hidden input kind '" + kind + "'");
    in.name = h.value("name", kind == "state" ? f.state_name : f.time_name);
    in.value = h.value("value", 0.0);
    f.hidden_inputs.push_back(in);
  }
  if (f.hidden_inputs.empty()) f.hidden_inputs.push_back({HiddenInput::Kind::state, f.state_name, 0.0});
  return f;
}

ODESystem ode_from_json(const ojson& j, std::size_t& steps) {
  ODESystem s;
  s.state_names = j.at("states").get<std::vector<std::string>>();
  for (const auto& r : j.at("rhs")) s.rhs.push_back(parse_expr(r.get<std::string>()));
  s.initial_state = j.at("initial").get<std::vector<double>>();
  s.time_name = j.value("time", std::string("t"));
  s.t0 = j.value("t0", 0.0);
  s.t1 = j.at("t1").get<double>();
  if (j.contains("parameters")) s.parameters = j["parameters"].get<std::map<std::string, double>>();
  steps = j.value("steps", std::size_t{1000});
  return s;
}

struct Common {
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string config;
  std::size_t points = 0;
  std::string omegas;
  double noise = 0.0;
  std::size_t budget = 0;
  int complexity = 0;
  std::size_t seeds = 1;
  std::size_t epochs = 0;
  bool verbose = false;
  bool analytic = false;
  std::vector<std::string> cases;
};

UpinnConfig load_upinn(const Common& c, UpinnConfig cfg = {}) {
  if (!c.config.empty()) cfg = config_from_json(read_file(c.config));
  if (c.epochs > 0) cfg.epochs = c.epochs;
  cfg.validate();
  return cfg;
}

void apply_budget(const Common& c, SearchBudget& b) {
  if (c.budget > 0) b.max_candidates = c.budget;
  if (c.complexity > 0) b.max_complexity = c.complexity;
  b.validate();
}

ojson budget_json(const SearchBudget& b) {
  return {{"max_complexity", b.max_complexity},
          {"max_candidates", b.max_candidates},
          {"target_error", b.target_error},
          {"max_stored", b.max_stored}};
}

// Runs body once per seed; a sweep writes into seed_<s> subdirectories.
template <class F>
void sweep(const Common& c, F body) {
  for (std::size_t i = 0; i < std::max<std::size_t>(c.seeds, 1); ++i) {
    std::uint64_t seed = c.seed + i;
    std::string dir = c.seeds > 1 ? (fs::path(c.out) / ("seed_" + std::to_string(seed))).string()
                                  : c.out;
    body(seed, dir);
  }
}

int run_bench_table1(const Common& c) {
  sweep(c, [&](std::uint64_t seed, const std::string& dir) {
    Table1Options opt;
    opt.seed = seed;
    opt.verbose = c.verbose;
    opt.cases = c.cases;
    apply_budget(c, opt.budget);
    std::vector<CaseReport> reports;
    if (c.points > 0) {
      // single schedule point
      for (auto cs : table1_cases()) {
        if (!opt.cases.empty() &&
            std::find(opt.cases.begin(), opt.cases.end(), cs.name) == opt.cases.end())
          continue;
        cs.schedule = {c.points};
        check_case(cs);
        CaseReport r{cs.name, run_variant(cs, false, opt), run_variant(cs, true, opt)};
        reports.push_back(std::move(r));
      }
    } else {
      reports = table1_suite(opt);
    }
    write_table1_reports(reports, dir);
    ojson cfg{{"bench", "table1"}, {"seed", seed}, {"budget", budget_json(opt.budget)},
              {"recover_mae", opt.recover_mae}, {"points", c.points}, {"cases", c.cases}};
    write_file(fs::path(dir) / "run_config.json", cfg.dump(2) + "\n");
    for (const auto& r : reports) {
      std::cout << r.name << ": dimensional " << r.dimensional.min_points << " pts / "
                << r.dimensional.candidates_examined << " cand, dimensionless "
                << r.dimensionless.min_points << " pts / " << r.dimensionless.candidates_examined
                << " cand\n";
    }
  });
  return 0;
}

int run_bench_logistic(const Common& c) {
  sweep(c, [&](std::uint64_t seed, const std::string& dir) {
    LogisticOptions opt;
    opt.seed = seed;
    opt.upinn = load_upinn(c, opt.upinn);
    if (c.config.empty()) opt.upinn.seed = seed;
    opt.noise = c.noise;
    opt.verbose = c.verbose;
    if (c.points > 0) opt.data_points = c.points;
    apply_budget(c, opt.budget);
    auto rep = logistic_case(opt);
    write_logistic_reports(rep, out_dir(dir).string());
    ojson cfg{{"bench", "logistic"}, {"seed", seed}, {"r", opt.r}, {"A", opt.A}, {"B", opt.B},
              {"k", opt.k}, {"N0", opt.N0}, {"t_end", opt.t_end}, {"steps", opt.steps},
              {"data_points", opt.data_points}, {"noise", opt.noise},
              {"upinn", ojson::parse(config_to_json(opt.upinn))}, {"budget", budget_json(opt.budget)}};
    write_file(fs::path(dir) / "run_config.json", cfg.dump(2) + "\n");
    std::cout << "hidden term: " << (rep.front.empty() ? "none" : rep.recovered.str())
              << (rep.recovered_ok ? " (matches)" : " (no match)") << "\n"
              << "redimensionalized: "
              << (rep.front.empty() ? "none" : rep.redimensionalized.str()) << "\n"
              << "upinn rmse: " << format_number(rep.upinn_rmse) << "\n";
  });
  return 0;
}

int run_bench_bead(const Common& c) {
  sweep(c, [&](std::uint64_t seed, const std::string& dir) {
    BeadOptions opt;
    opt.seed = seed;
    opt.analytic = c.analytic;
    opt.upinn = load_upinn(c, opt.upinn);
    if (c.config.empty()) opt.upinn.seed = seed;
    opt.noise = c.noise;
    opt.verbose = c.verbose;
    if (c.points > 0) opt.samples_per_model = c.points;
    if (!c.omegas.empty()) opt.omegas = parse_list(c.omegas);
    apply_budget(c, opt.budget);
    auto rep = bead_case(opt);
    write_bead_reports(rep, out_dir(dir).string());
    std::vector<double> omegas = opt.omegas.empty() ? default_omegas(opt) : opt.omegas;
    ojson cfg{{"bench", "bead"}, {"seed", seed}, {"analytic", opt.analytic}, {"m", opt.m},
              {"r", opt.r}, {"g", opt.g}, {"b", opt.b}, {"theta0", opt.theta0},
              {"t_end", opt.t_end}, {"steps", opt.steps}, {"omegas", omegas},
              {"samples_per_model", opt.samples_per_model}, {"edge_trim", opt.edge_trim},
              {"noise", opt.noise},
              {"upinn", ojson::parse(config_to_json(opt.upinn))}, {"budget", budget_json(opt.budget)}};
    write_file(fs::path(dir) / (opt.analytic ? "run_config_analytic.json" : "run_config.json"),
               cfg.dump(2) + "\n");
    if (rep.found_index >= 0) {
      std::cout << "found " << (rep.found_sign > 0 ? "+" : "-") << " target: "
                << rep.front[rep.found_index].text << " mae " << format_number(rep.found_mae)
                << "\n";
    } else {
      std::cout << "target not on the front\n";
    }
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dimsr: dimensional analysis, UPINNs and symbolic regression"};
  app.require_subcommand(1);
  Common c;
  auto common = [&](CLI::App* s) {
    s->add_option("--seed", c.seed, "random seed")->capture_default_str();
    s->add_option("--out", c.out, "output directory")->capture_default_str();
    s->add_flag("--verbose", c.verbose, "progress on stderr");
  };

  std::string vars_path, data_path, plan_path, expr_text, output_name, grammar_path, form_path;

  auto* dims = app.add_subcommand("dims", "dimension inspection")->require_subcommand(1);
  auto* dims_matrix = dims->add_subcommand("matrix", "print the dimensional matrix and rank");
  dims_matrix->add_option("vars", vars_path, "variable set JSON")->required();

  auto* pi = app.add_subcommand("pi", "pi groups")->require_subcommand(1);
  auto* pi_derive = pi->add_subcommand("derive", "print a basis of dimensionless groups");
  pi_derive->add_option("vars", vars_path, "variable set JSON")->required();

  auto* ipsen = app.add_subcommand("ipsen", "Ipsen nondimensionalization")->require_subcommand(1);
  auto* ipsen_p = ipsen->add_subcommand("plan", "write a nondimensionalization plan");
  ipsen_p->add_option("vars", vars_path, "variable set JSON")->required();
  std::string plan_out;
  ipsen_p->add_option("--out", plan_out, "directory for plan.json (default: stdout)");

  auto* data = app.add_subcommand("data", "dataset generation")->require_subcommand(1);
  auto* data_gen = data->add_subcommand("gen", "sample an algebraic equation");
  common(data_gen);
  data_gen->add_option("--expr", expr_text, "right-hand side")->required();
  data_gen->add_option("--vars", vars_path, "variable set JSON with ranges")->required();
  data_gen->add_option("--output", output_name, "output column name")->required();
  data_gen->add_option("--points", c.points, "number of rows")->required();
  data_gen->add_option("--noise", c.noise, "Gaussian noise sigma on the output");
  auto* data_ode = data->add_subcommand("ode", "integrate an ODE system with RK4");
  common(data_ode);
  data_ode->add_option("--config", c.config, "ODE system JSON")->required();
  data_ode->add_option("--noise", c.noise, "Gaussian noise sigma on the first state");
  auto* data_nd = data->add_subcommand("nondim", "apply a plan to a dataset");
  common(data_nd);
  data_nd->add_option("data", data_path, "dataset CSV")->required();
  data_nd->add_option("--plan", plan_path, "plan JSON")->required();

  auto* upinn = app.add_subcommand("upinn", "universal PINN")->require_subcommand(1);
  auto* upinn_train = upinn->add_subcommand("train", "train surrogate and hidden networks");
  common(upinn_train);
  upinn_train->add_option("data", data_path, "dataset CSV (time, state)")->required();
  upinn_train->add_option("--form", form_path, "residual form JSON")->required();
  upinn_train->add_option("--config", c.config, "UPINN config JSON");
  upinn_train->add_option("--epochs", c.epochs, "override epochs");
  upinn_train->add_option("--points", c.points, "collocation points (override)");

  auto* symreg = app.add_subcommand("symreg", "symbolic regression")->require_subcommand(1);
  auto* symreg_run = symreg->add_subcommand("run", "regress the last column on the others");
  common(symreg_run);
  symreg_run->add_option("data", data_path, "dataset CSV")->required();
  symreg_run->add_option("--grammar", grammar_path, "grammar JSON")->required();
  symreg_run->add_option("--budget", c.budget, "maximum candidates");
  symreg_run->add_option("--complexity", c.complexity, "maximum complexity");
  std::string target_dim;
  symreg_run->add_option("--target", target_dim, "dimension of the target column (default: none)");

  auto* bench = app.add_subcommand("bench", "reproduce the experiments")->require_subcommand(1);
  auto* b_t1 = bench->add_subcommand("table1", "algebraic suite");
  auto* b_lg = bench->add_subcommand("logistic", "logistic growth hidden term");
  auto* b_bd = bench->add_subcommand("bead", "bead on a rotating hoop");
  for (auto* s : {b_t1, b_lg, b_bd}) {
    common(s);
    s->add_option("--budget", c.budget, "maximum candidates per regression");
    s->add_option("--complexity", c.complexity, "maximum complexity");
    s->add_option("--seeds", c.seeds, "sweep this many consecutive seeds");
  }
  b_t1->add_option("--points", c.points, "single data-point count instead of the schedule");
  b_t1->add_option("--case", c.cases, "restrict to these cases");
  for (auto* s : {b_lg, b_bd}) {
    s->add_option("--config", c.config, "UPINN config JSON");
    s->add_option("--epochs", c.epochs, "override epochs");
    s->add_option("--noise", c.noise, "observation noise sigma");
  }
  b_lg->add_option("--points", c.points, "training observations");
  b_bd->add_option("--points", c.points, "hidden samples per model");
  b_bd->add_option("--omegas", c.omegas, "comma-separated omega values");
  b_bd->add_flag("--analytic", c.analytic, "exact hidden samples, no training");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*dims_matrix) {
      auto m = build_matrix(load_nonempty(vars_path));
      std::cout << m.str() << "rank: " << rank(m) << "\n";
    } else if (*pi_derive) {
      auto vars = load_nonempty(vars_path);
      for (const auto& g : derive_pi_groups(vars)) std::cout << g.name << " = " << g.str() << "\n";
    } else if (*ipsen_p) {
      auto text = plan_to_json(ipsen_plan(load_nonempty(vars_path)));
      if (plan_out.empty()) std::cout << text << "\n";
      else write_file(out_dir(plan_out) / "plan.json", text + "\n");
    } else if (*data_gen) {
      auto d = sample_algebraic(parse_expr(expr_text), load_nonempty(vars_path), output_name,
                                c.points, c.seed, c.noise);
      csv_write(d, (out_dir(c.out) / "data.csv").string());
    } else if (*data_ode) {
      std::size_t steps = 0;
      auto sys = ode_from_json(read_json(c.config), steps);
      auto d = rk4_integrate(sys, {}, steps);
      if (c.noise > 0.0) d = add_noise(d, sys.state_names.front(), c.noise, c.seed);
      d.meta.seed = c.seed;
      csv_write(d, (out_dir(c.out) / "trajectory.csv").string());
    } else if (*data_nd) {
      auto plan = plan_from_json(read_file(plan_path));
      csv_write(nondim_dataset(csv_read(data_path), plan), (out_dir(c.out) / "nondim.csv").string());
    } else if (*upinn_train) {
      UpinnConfig cfg = load_upinn(c);
      if (c.config.empty()) cfg.seed = c.seed;
      if (c.points > 0) cfg.collocation = c.points;
      OdeForm form = form_from_json(read_json(form_path));
      cfg.order = form.order();
      Dataset d = csv_read(data_path);
      auto t = d.column(form.time_name);
      auto colloc = uniform_collocation(*std::min_element(t.begin(), t.end()),
                                        *std::max_element(t.begin(), t.end()), cfg.collocation);
      auto model = train(cfg, d, form, colloc);
      auto dir = out_dir(c.out);
      write_file(dir / "model.json", upinn_to_json(model) + "\n");
      write_loss_history_csv(model, (dir / "loss.csv").string());
      std::cout << "final loss: mse " << format_number(model.final_loss.mse) << " ode "
                << format_number(model.final_loss.ode) << "\n";
    } else if (*symreg_run) {
      Grammar g = grammar_from_json(read_file(grammar_path));
      SearchBudget b;
      apply_budget(c, b);
      Dimension target;
      try {
        target = parse_dimension(target_dim);
      } catch (const Error& e) {
        throw UsageError(std::string("--target: ") + e.what());
      }
      auto res = regress(csv_read(data_path), g, b, target, c.seed);
      auto dir = out_dir(c.out);
      write_front_csv(res.front, (dir / "front.csv").string());
      write_file(dir / "stats.json", stats_to_json(res.stats, false) + "\n");
      std::cout << front_to_csv(res.front);
    } else if (*b_t1) {
      return run_bench_table1(c);
    } else if (*b_lg) {
      return run_bench_logistic(c);
    } else if (*b_bd) {
      return run_bench_bead(c);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
