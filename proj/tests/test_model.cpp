#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "qjm/error.hpp"
#include "qjm/io.hpp"
#include "qjm/model.hpp"
#include "qjm/rng.hpp"
#include "qjm/simulate.hpp"

using namespace qjm;

namespace {

JointDataset small_cohort() {
  JointDataset d;
  d.covariate_names = {"PA", "age"};
  const std::vector<std::tuple<std::string, double, double, double, double>> rows = {
      {"a", 0.0, 90.0, 1.0, 10.0}, {"a", 1.0, 88.0, 1.0, 11.0}, {"b", 0.5, 70.0, 0.0, 20.0},
      {"b", 1.5, 66.0, 0.0, 21.0}, {"b", 2.5, 60.0, 0.0, 22.0}, {"c", 0.2, 80.0, 1.0, 15.0}};
  for (const auto& [id, t, y, pa, age] : rows) d.longitudinal.push_back({id, t, y, {pa, age}});
  d.survival = {{"a", 0.0, 3.0, true, {}}, {"b", 0.5, 4.0, false, {}}, {"c", 0.0, 2.0, true, {}}};
  return d;
}

ModelSpec slope_spec() {
  ModelSpec s;  // eta_l = b0 + b1 t, eta_ls = g0 + g1 t, eta_s = 0
  s.mode = FitMode::QuantileJoint;
  s.tau_levels = {0.5};
  s.grid_k = 1;
  return s;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("design of the intercept and slope model") {
    const DesignBundle d = build_designs(small_cohort(), slope_spec());
    CHECK(d.x_l.cols() == 2);
    CHECK(d.z.cols() == 2);
    CHECK(d.x_s.cols() == 0);
    CHECK(d.n() == 3);
    CHECK(d.records() == 6);
    CHECK(d.beta_l_names == std::vector<std::string>{"intercept", "time"});
    // rows of subject b: z = [1, t]
    const SubjectDesign& b = d.subjects[1];
    CHECK(b.id == "b");
    CHECK(b.size() == 3);
    CHECK(d.z(static_cast<Eigen::Index>(b.begin), 0) == 1.0);
    CHECK(d.z(static_cast<Eigen::Index>(b.begin), 1) == 0.5);
  }

  TEST_CASE("one subject, one record, intercept only") {
    JointDataset data;
    data.longitudinal.push_back({"only", 2.0, 5.0, {}});
    ModelSpec s;
    s.mode = FitMode::LongitudinalOnly;
    s.l_time = false;
    const DesignBundle d = build_designs(data, s);
    REQUIRE(d.x_l.rows() == 1);
    REQUIRE(d.x_l.cols() == 1);
    CHECK(d.x_l(0, 0) == 1.0);
  }

  TEST_CASE("unknown covariates are rejected") {
    JointDataset data = small_cohort();
    data.covariate_names = {"FEV", "age"};
    ModelSpec s = slope_spec();
    s.l_covariates = {"PA"};
    CHECK_THROWS_AS(build_designs(data, s), DataError);
    s.l_covariates.clear();
    s.s_covariates = {"PA"};
    CHECK_THROWS_AS(build_designs(data, s), DataError);
  }

  TEST_CASE("survival covariates come from the first longitudinal record") {
    ModelSpec s = slope_spec();
    s.s_covariates = {"age"};
    const DesignBundle d = build_designs(small_cohort(), s);
    CHECK(d.x_s(0, 0) == 10.0);
    CHECK(d.x_s(1, 0) == 20.0);
    CHECK(d.x_s(2, 0) == 15.0);
  }

  TEST_CASE("validation catches mismatched subjects and bad rows") {
    JointDataset data = small_cohort();
    data.survival.pop_back();
    CHECK_THROWS_AS(data.validate(), DataError);

    data = small_cohort();
    data.survival[0].exit = data.survival[0].entry;
    CHECK_THROWS_AS(data.validate(), DataError);

    data = small_cohort();
    data.longitudinal[2].response = std::nan("");
    CHECK_THROWS_AS(data.validate(), DataError);

    data = small_cohort();
    data.longitudinal[0].covariates.pop_back();
    CHECK_THROWS_AS(data.validate(), DataError);
  }

  TEST_CASE("joint modes need a shared effect") {
    ModelSpec s = slope_spec();
    s.shared = {false, false};
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }

  TEST_CASE("designs do not depend on input row order") {
    RngStream rng(3);
    SimScenario sc = default_scenario();
    sc.n = 40;
    const JointDataset data = simulate(sc, rng).data;
    ModelSpec s = slope_spec();
    s.grid_k = 4;
    const DesignBundle a = build_designs(data, s);
    for (int trial = 0; trial < 5; ++trial) {
      JointDataset shuffled = data;
      for (std::size_t k = shuffled.longitudinal.size() - 1; k > 0; --k) {
        std::swap(shuffled.longitudinal[k], shuffled.longitudinal[rng.next() % (k + 1)]);
      }
      std::reverse(shuffled.survival.begin(), shuffled.survival.end());
      const DesignBundle b = build_designs(shuffled, s);
      CHECK(a.y == b.y);
      CHECK(a.x_l == b.x_l);
      CHECK(a.z == b.z);
      CHECK(a.subject_of == b.subject_of);
      CHECK(a.initial_grid.cuts == b.initial_grid.cuts);
    }
  }

  TEST_CASE("records after exit are counted, not dropped") {
    JointDataset data = small_cohort();
    data.longitudinal.push_back({"c", 5.0, 70.0, {1.0, 15.0}});
    const DesignBundle d = build_designs(data, slope_spec());
    CHECK(d.records_after_exit == 1);
    CHECK(d.records() == 7);
  }
}

TEST_SUITE("hazard grid") {
  TEST_CASE("quantile cuts balance event counts") {
    JointDataset data;
    RngStream rng(8);
    for (int i = 0; i < 100; ++i) {
      const std::string id = "s" + std::to_string(i);
      data.survival.push_back({id, 0.0, 10.0 * rng.uniform(), true, {}});
    }
    const HazardGrid g = default_grid(data, 5);
    REQUIRE(g.size() == 5);
    std::vector<int> counts(5, 0);
    for (const auto& s : data.survival) ++counts[g.interval_of(s.exit)];
    for (int c : counts) CHECK(c == 20);
  }

  TEST_CASE("single piece spans entry to exit") {
    JointDataset data = small_cohort();
    const HazardGrid g = default_grid(data, 1);
    CHECK(g.cuts == std::vector<double>{0.0, 4.0});
    // occurrence / exposure: 2 events over 3 + 3.5 + 2
    CHECK(g.values[0] == doctest::Approx(2.0 / 8.5));
  }

  TEST_CASE("all censored is an error") {
    JointDataset data = small_cohort();
    for (auto& s : data.survival) s.event = false;
    CHECK_THROWS_AS(default_grid(data, 2), DataError);
  }

  TEST_CASE("more pieces than distinct event times is an error") {
    CHECK_THROWS_AS(default_grid(small_cohort(), 3), DataError);
  }

  TEST_CASE("every piece holds an event, with ties") {
    JointDataset data;
    const double exits[] = {1, 1, 1, 1, 1, 1, 2, 3, 3, 7, 8, 9};
    for (int i = 0; i < 12; ++i) data.survival.push_back({"s" + std::to_string(i), 0.0, exits[i], true, {}});
    for (int k = 1; k <= 6; ++k) {
      const HazardGrid g = default_grid(data, k);
      std::vector<int> counts(g.size(), 0);
      for (const auto& s : data.survival) ++counts[g.interval_of(s.exit)];
      for (int c : counts) CHECK(c > 0);
    }
  }

  TEST_CASE("pieces are right closed") {
    const HazardGrid g{{0.0, 1.0, 2.0}, {1.0, 2.0}};
    CHECK(g.interval_of(0.0) == 0);
    CHECK(g.interval_of(1.0) == 0);
    CHECK(g.interval_of(1.0000001) == 1);
    CHECK(g.interval_of(2.0) == 1);
    CHECK_THROWS_AS(g.interval_of(2.1), std::out_of_range);
  }
}

TEST_SUITE("io") {
  TEST_CASE("csv round trip reproduces the data record for record") {
    RngStream rng(4);
    SimScenario sc = default_scenario();
    sc.n = 25;
    sc.beta_s = {0.3, -0.2};
    JointDataset data = simulate(sc, rng).data;
    data.covariate_names = {"z"};
    for (auto& r : data.longitudinal) r.covariates = {rng.uniform() - 0.5};
    data.canonicalize();

    std::stringstream ls, ss;
    write_longitudinal_csv(ls, data);
    write_survival_csv(ss, data);
    JointDataset back;
    read_longitudinal_csv(ls, back);
    read_survival_csv(ss, back);
    back.canonicalize();

    CHECK(back.covariate_names == data.covariate_names);
    CHECK(back.survival_covariate_names == data.survival_covariate_names);
    REQUIRE(back.longitudinal.size() == data.longitudinal.size());
    for (std::size_t k = 0; k < data.longitudinal.size(); ++k) {
      CHECK(back.longitudinal[k].subject_id == data.longitudinal[k].subject_id);
      CHECK(back.longitudinal[k].time == data.longitudinal[k].time);
      CHECK(back.longitudinal[k].response == data.longitudinal[k].response);
      CHECK(back.longitudinal[k].covariates == data.longitudinal[k].covariates);
    }
    REQUIRE(back.survival.size() == data.survival.size());
    for (std::size_t k = 0; k < data.survival.size(); ++k) {
      CHECK(back.survival[k].entry == data.survival[k].entry);
      CHECK(back.survival[k].exit == data.survival[k].exit);
      CHECK(back.survival[k].event == data.survival[k].event);
      CHECK(back.survival[k].covariates == data.survival[k].covariates);
    }
    std::stringstream again;
    write_longitudinal_csv(again, back);
    std::stringstream first;
    write_longitudinal_csv(first, data);
    CHECK(again.str() == first.str());
  }

  TEST_CASE("parse errors name the line") {
    std::stringstream bad("id,time,y\na,0,1\nb,zero,2\n");
    JointDataset d;
    try {
      read_longitudinal_csv(bad, d);
      FAIL("expected a parse error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::stringstream header("subject,time,y\n");
    CHECK_THROWS_AS(read_longitudinal_csv(header, d), DataError);
    std::stringstream event("id,entry,exit,event\na,0,1,2\n");
    CHECK_THROWS_AS(read_survival_csv(event, d), DataError);
  }

  TEST_CASE("posterior csv round trip") {
    PosteriorSample s({"alpha", "sigma2"});
    const double r1[] = {-0.5, 1.25}, r2[] = {0.1 + 0.2, 3e-300};
    s.append(10, r1);
    s.append(19, r2);
    std::stringstream out;
    write_posterior_csv(out, s);
    CHECK(out.str().rfind("iteration,alpha,sigma2\n", 0) == 0);
    const PosteriorSample back = read_posterior_csv(out);
    CHECK(back.names() == s.names());
    CHECK(back.iterations() == s.iterations());
    CHECK(back.column("alpha") == s.column("alpha"));
    CHECK(back.column("sigma2") == s.column("sigma2"));
  }

  TEST_CASE("shortest round-trip formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.0) == "-2");
    CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
  }
}
