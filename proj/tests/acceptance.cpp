// End-to-end acceptance run: one PASS/FAIL line per criterion.
// usage: acceptance <unit_tests binary> [out dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "dimsr/bench.hpp"

using namespace dimsr;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << detail << std::endl;
}

VariableSpec var(const char* name, const char* dim) {
  VariableSpec v;
  v.name = name;
  v.dimension = parse_dimension(dim);
  return v;
}

Monomial mono(std::initializer_list<std::pair<const char*, int>> terms) {
  Monomial m;
  for (auto [n, p] : terms) m.emplace_back(n, Rational(p));
  return m;
}

// Same group, or its reciprocal.
bool same_up_to_inverse(const Monomial& a, const Monomial& b) {
  auto sorted = [](Monomial m, int sign) {
    for (auto& [n, p] : m) p *= Rational(sign);
    std::sort(m.begin(), m.end());
    return m;
  };
  return sorted(a, 1) == sorted(b, 1) || sorted(a, 1) == sorted(b, -1);
}

void criterion1() {
  std::vector<VariableSpec> vars{var("U", "M L^2 T^-2"), var("G", "M^-1 L^3 T^-2"), var("m1", "M"),
                                 var("m2", "M"), var("r1", "L"), var("r2", "L")};
  auto t0 = Clock::now();
  auto groups = derive_pi_groups(vars);
  double secs = since(t0);
  bool ok = groups.size() == 3 && secs < 1.0;
  for (const auto& g : groups) ok = ok && verify_dimensionless(g, vars);
  for (const auto& m : {mono({{"U", 1}, {"G", -1}, {"m1", -2}, {"r2", 1}}),
                        mono({{"m1", -1}, {"m2", 1}}), mono({{"r1", 1}, {"r2", -1}})}) {
    ok = ok && in_rational_span(m, groups, vars);
  }
  std::ostringstream s;
  s << groups.size() << " groups (";
  for (std::size_t i = 0; i < groups.size(); ++i) s << (i ? ", " : "") << groups[i].str();
  s << ") in " << secs << " s";
  report(1, ok, s.str());
}

void criterion2() {
  Table1Options opt;
  auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream s;
  for (const auto& c : table1_cases()) {
    Attempt a = run_attempt(c, true, 10, opt);
    bool eq = a.recovered &&
              numeric_equivalence(parse_expr(a.expression), c.dimensionless_target,
                                  case_domain(c, true), {100, 1e-6});
    ok = ok && eq && a.mae < 1e-6;
    s << c.name << (eq ? " ok" : " MISSED") << "; ";
  }
  double secs = since(t0);
  ok = ok && secs < 300.0;
  s << secs << " s";
  report(2, ok, s.str());
}

void criterion3(const fs::path& out) {
  Table1Options opt;
  auto reports = table1_suite(opt);
  write_table1_reports(reports, (out / "table1").string());
  bool ok = true;
  int both = 0;
  std::ostringstream s;
  for (const auto& r : reports) {
    const auto& dl = r.dimensionless;
    const auto& dm = r.dimensional;
    s << r.name << " ";
    if (!(dl.recovered && dm.recovered)) {
      s << "[" << (dl.recovered ? "dimensionless only" : dm.recovered ? "dimensional only" : "neither")
        << "]; ";
      continue;
    }
    ++both;
    bool pair_ok = dl.min_points <= dm.min_points && dl.candidates_examined <= dm.candidates_examined;
    ok = ok && pair_ok;
    s << "[pts " << dl.min_points << "<=" << dm.min_points << ", cand " << dl.candidates_examined
      << "<=" << dm.candidates_examined << (pair_ok ? "" : " VIOLATED") << "]; ";
  }
  s << both << " cases with both variants converged";
  report(3, ok, s.str());
}

void criterion4() {
  std::vector<VariableSpec> logistic = logistic_variables();
  NondimPlan lp = ipsen_plan(logistic);
  bool lok = lp.hidden_args.size() == 1;
  std::string lg;
  if (lok) {
    const PiGroup* g = nullptr;
    for (const auto& [v, grp] : lp.variable_map) {
      if (grp.name == lp.hidden_args[0]) g = &grp;
    }
    Monomial nb = mono({{"N", 1}, {"B", -1}});
    lok = g && verify_dimensionless(*g, logistic) && same_up_to_inverse(g->exponents, nb);
    if (g) lg = g->str();
  }
  std::vector<VariableSpec> bead = bead_variables();
  NondimPlan bp = ipsen_plan(bead);
  bool bok = bp.hidden_args.size() == 1;
  std::string bg;
  if (bok) {
    const PiGroup* g = nullptr;
    for (const auto& [v, grp] : bp.variable_map) {
      if (grp.name == bp.hidden_args[0]) g = &grp;
    }
    Monomial target = mono({{"g", 1}, {"omega", -2}, {"r", -1}});
    bok = g && verify_dimensionless(*g, bead) && same_up_to_inverse(g->exponents, target);
    if (g) bg = g->str();
  }
  report(4, lok && bok,
         "logistic hidden args " + std::to_string(lp.hidden_args.size()) + " (" + lg +
             "), bead hidden args " + std::to_string(bp.hidden_args.size()) + " (" + bg + ")");
}

void criterion5(const fs::path& out) {
  LogisticOptions opt;
  auto t0 = Clock::now();
  LogisticReport rep = logistic_case(opt);
  double secs = since(t0);
  write_logistic_reports(rep, (out / "logistic").string());
  bool ok = rep.recovered_ok && rep.redim_ok && rep.upinn_rmse < 5e-2 && secs < 600.0;
  std::ostringstream s;
  s << "G(alpha) = " << (rep.front.empty() ? "none" : rep.recovered.str())
    << (rep.recovered_ok ? " (equivalent)" : " (not equivalent)") << ", redim "
    << rep.redimensionalized.str() << (rep.redim_ok ? " (equivalent)" : " (not equivalent)")
    << ", UPINN rmse " << rep.upinn_rmse << ", " << secs << " s";
  report(5, ok, s.str());
}

void criterion6(const fs::path& out) {
  BeadOptions aopt;
  aopt.analytic = true;
  auto t0 = Clock::now();
  BeadReport an = bead_case(aopt);
  double asecs = since(t0);
  write_bead_reports(an, (out / "bead").string());
  bool aok = an.found_index >= 0 && an.found_mae < 1e-8 && asecs < 120.0;

  BeadOptions opt;
  t0 = Clock::now();
  BeadReport rep = bead_case(opt);
  double secs = since(t0);
  write_bead_reports(rep, (out / "bead").string());
  bool ok = rep.models.size() == 10 && rep.found_index >= 0 && secs < 1800.0;

  std::ostringstream s;
  s << "UPINN: " << rep.models.size() << " models, ";
  if (rep.found_index >= 0) {
    s << "front entry " << rep.front[rep.found_index].text << " (sign " << rep.found_sign
      << ", mae " << rep.found_mae << ")";
  } else {
    s << "target not on the front";
  }
  s << ", " << secs << " s; analytic: "
    << (an.found_index >= 0 ? an.front[an.found_index].text : std::string("not found")) << " mae "
    << an.found_mae << ", " << asecs << " s";
  report(6, ok && aok, s.str());
}

void criterion7(const std::string& unit_tests) {
  const char* filter =
      "*null space agrees*,*derived groups are dimensionless*,*RK4 observed order*,"
      "*parameter gradients*,*surrogate input derivatives*,*Pareto fronts*,*deterministic*,"
      "*seeded*,*order independent*";
  std::string cmd = "\"" + unit_tests + "\" --test-case=\"" + filter + "\" > property_suite.log 2>&1";
  int rc = std::system(cmd.c_str());
  report(7, rc == 0, std::string("property and determinism suites ") +
                         (rc == 0 ? "passed" : "failed (see property_suite.log)"));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <unit_tests> [out dir]\n";
    return 2;
  }
  fs::path out = argc > 2 ? fs::path(argv[2]) : fs::path("acceptance_out");
  fs::create_directories(out);
  try {
    criterion1();
    criterion2();
    criterion3(out);
    criterion4();
    criterion5(out);
    criterion6(out);
    criterion7(argv[1]);
  } catch (const std::exception& e) {
    std::cout << "FAIL: aborted: " << e.what() << std::endl;
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
