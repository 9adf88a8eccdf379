#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dimsr/bench.hpp"
#include "dimsr/error.hpp"

using namespace dimsr;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("dimsr_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("every case's dimensionless target reproduces its original equation") {
  auto cases = table1_cases();
  REQUIRE(cases.size() == 6);
  for (const auto& c : cases) {
    CAPTURE(c.name);
    CHECK_NOTHROW(check_case(c));
    for (const auto& grp : c.groups) CHECK(verify_dimensionless(grp, c.variables));
    CHECK(case_grammar(c, true).dimensionless());
    CHECK(infer_dimension(c.original, [&] {
            DimensionMap m;
            for (const auto& v : c.variables) m.emplace(v.name, v.dimension);
            return m;
          }()) == case_target_dimension(c, false));
  }
  CHECK_THROWS_AS(table1_case("nope"), Error);
}

TEST_CASE("a transcription error in a case is caught") {
  CaseSpec c = table1_case("darcy_weisbach");
  c.dimensionless_target = parse_expr("(pi3 * pi2)");
  CHECK_THROWS_AS(check_case(c), Error);
  c = table1_case("darcy_weisbach");
  c.groups[0].exponents[2].second = Rational(-1);  // v^-1 instead of v^-2
  CHECK_THROWS_AS(check_case(c), DimensionError);
}

TEST_CASE("dimensionless variants are recovered from 10 points") {
  Table1Options opt;
  for (const auto& c : table1_cases()) {
    Attempt a = run_attempt(c, true, 10, opt);
    CAPTURE(c.name);
    CHECK(a.recovered);
    CHECK(a.mae < 1e-6);
    REQUIRE_FALSE(a.expression.empty());
    CHECK(numeric_equivalence(parse_expr(a.expression), c.dimensionless_target,
                              case_domain(c, true), {100, 1e-6}));
  }
}

TEST_CASE("a failed attempt records no expression") {
  Table1Options opt;
  opt.budget.max_candidates = 3;
  Attempt a = run_attempt(table1_case("free_fall"), true, 10, opt);
  CHECK_FALSE(a.recovered);
  CHECK(a.expression.empty());
  CHECK(a.candidates_examined == 3);
}

TEST_CASE("table reports are deterministic") {
  Table1Options opt;
  opt.budget.max_candidates = 20000;
  auto run = [&](const fs::path& dir) {
    std::vector<CaseReport> reps;
    for (const char* name : {"gravitational_force", "darcy_weisbach"}) {
      CaseSpec c = table1_case(name);
      c.schedule = {100, 10};
      reps.push_back({c.name, run_variant(c, false, opt), run_variant(c, true, opt)});
    }
    write_table1_reports(reps, dir.string());
    return reps;
  };
  fs::path a = scratch("table_a"), b = scratch("table_b");
  auto reps = run(a);
  run(b);
  for (const char* f : {"table1.csv", "fig1_points.csv", "gravitational_force.json",
                        "darcy_weisbach.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(fs::exists(a / "fig1_runtime.csv"));
  CHECK(slurp(a / "table1.csv").find("wall") == std::string::npos);
  for (const auto& r : reps) {
    CHECK(r.dimensionless.recovered);
    CHECK(r.dimensionless.min_points == 10);
    if (r.dimensional.recovered) {
      CHECK(r.dimensionless.min_points <= r.dimensional.min_points);
      CHECK(r.dimensionless.candidates_examined <= r.dimensional.candidates_examined);
    }
  }
}

TEST_CASE("single-gamma hidden term is recovered from theta alone") {
  auto r = bead_single_gamma(2.0, SearchBudget{13, 2'000'000, 1e-12});
  CHECK(r.recovered);
  CHECK(is_strictly_monotone(r.front));
}

TEST_CASE("analytic bead recovers the joint hidden term") {
  BeadOptions opt;
  opt.analytic = true;
  BeadReport rep = bead_case(opt);
  CHECK(rep.models.size() == 10);
  CHECK(rep.combined.num_rows() == 10 * opt.samples_per_model);
  REQUIRE(rep.found_index >= 0);
  CHECK(rep.found_mae < 1e-8);
  CHECK(std::abs(rep.found_sign) == 1);
  CHECK(is_strictly_monotone(rep.front));
  CHECK(rep.epsilon == doctest::Approx(1.0));

  fs::path a = scratch("bead_a"), b = scratch("bead_b");
  write_bead_reports(rep, a.string());
  write_bead_reports(bead_case(opt), b.string());
  for (const char* f : {"analytic_table2_front.csv", "analytic_fig3_surface.csv", "bead_analytic.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("bead options are validated") {
  BeadOptions opt;
  opt.analytic = true;
  opt.omegas = {3.0};
  CHECK_THROWS_AS(bead_case(opt), Error);
  opt.omegas = {};
  opt.edge_trim = 0.7;
  CHECK_THROWS_AS(bead_case(opt), Error);
}

TEST_CASE("default omegas span gamma from 0.5 to 5") {
  BeadOptions opt;
  auto w = default_omegas(opt);
  REQUIRE(w.size() == 10);
  CHECK(w.front() * w.front() * opt.r / opt.g == doctest::Approx(0.5));
  CHECK(w.back() * w.back() * opt.r / opt.g == doctest::Approx(5.0));
}

TEST_CASE("logistic pipeline is deterministic for a short training run") {
  LogisticOptions opt;
  opt.upinn.epochs = 150;
  opt.budget.max_complexity = 9;
  LogisticReport a = logistic_case(opt);
  LogisticReport b = logistic_case(opt);
  CHECK(a.beta == doctest::Approx(0.4));
  CHECK(a.epsilon == doctest::Approx(0.75));
  CHECK(a.model.surrogate == b.model.surrogate);
  CHECK(a.front == b.front);
  CHECK(is_strictly_monotone(a.front));
  fs::path da = scratch("log_a"), db = scratch("log_b");
  write_logistic_reports(a, da.string());
  write_logistic_reports(b, db.string());
  for (const char* f : {"fig2_logistic.csv", "logistic_front.csv", "logistic_loss.csv"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(da / f));
    CHECK(slurp(da / f) == slurp(db / f));
  }
}
