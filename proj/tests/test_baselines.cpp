#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "biasaudit/baselines.hpp"
#include "biasaudit/datamodel.hpp"
#include "biasaudit/learners.hpp"
#include "biasaudit/types.hpp"
#include "helpers.hpp"

using namespace biasaudit;

namespace {

// 1-D grid with a widened gap before `cut`, so the positive class
// {i >= cut} is separable with a comfortable margin.
std::vector<double> margin_grid(int cut, int n) {
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    grid[static_cast<std::size_t>(i)] = 0.01 * i + (i >= cut ? 0.05 : 0.0);
  }
  return grid;
}

std::vector<Instance> grid_instances(const std::string& dataset, const std::vector<double>& grid,
                                     int label_cut, int select_a, int select_b) {
  std::vector<Instance> instances;
  std::size_t row = 0;
  for (Group g : {Group::a, Group::not_a}) {
    int select = g == Group::a ? select_a : select_b;
    for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
      instances.push_back(testutil::make_instance(dataset, row++,
                                                  {grid[static_cast<std::size_t>(i)]}, g,
                                                  i >= label_cut ? 1 : 0, i >= select ? 1 : 0));
    }
  }
  return instances;
}

LearnerSpec fast_logistic() {
  LearnerSpec spec;
  spec.family = LearnerSpec::Family::logistic;
  spec.logistic.learning_rate = 1.0;
  spec.logistic.max_iters = 2000;
  spec.logistic.l2 = 1e-8;
  spec.logistic.tol = 1e-12;
  return spec;
}

}  // namespace

TEST_CASE("selection-rate gap") {
  std::vector<Instance> instances;
  instances.push_back(testutil::make_instance("d", 0, {0.1}, Group::a, std::nullopt, 1));
  instances.push_back(testutil::make_instance("d", 1, {0.2}, Group::a, std::nullopt, 1));
  instances.push_back(testutil::make_instance("d", 2, {0.3}, Group::a, std::nullopt, 0));
  instances.push_back(testutil::make_instance("d", 3, {0.4}, Group::not_a, std::nullopt, 1));
  instances.push_back(testutil::make_instance("d", 4, {0.5}, Group::not_a, std::nullopt, 0));
  DecisionSet ds = DecisionSet::create("h1", instances);

  SUBCASE("proportions") {
    auto estimates = sr_estimate({ds});
    REQUIRE(estimates.size() == 1);
    CHECK(estimates[0].method == "SR");
    CHECK(!estimates[0].failed());
    CHECK(estimates[0].gap == doctest::Approx(2.0 / 3.0 - 0.5).epsilon(1e-15));
    CHECK(std::isnan(estimates[0].c));
    CHECK(std::isnan(estimates[0].attained_rpr_a));
    CHECK(estimates[0].thresholds_a.empty());
    CHECK(estimates[0].uncertainty == 0.0);
  }
  SUBCASE("raw counts") {
    auto estimates = sr_estimate({ds}, SrNormalization::raw_count);
    CHECK(estimates[0].gap == 1.0);
  }
  SUBCASE("no decision sets") {
    CHECK_THROWS_AS(sr_estimate({}), ValidationError);
  }
}

TEST_CASE("gold-model scoring reproduces the gap against true labels") {
  // The outcome model trained on the separable gold set classifies
  // the shared grid exactly like the gold labels, so the estimate
  // equals the human's true-label TPR gap: 15/20 - 18/20.
  auto grid = margin_grid(20, 40);
  GoldStandardSet gold = GoldStandardSet::create(grid_instances("gold", grid, 20, 25, 22));
  DecisionSet ds = DecisionSet::create("h1", grid_instances("ds", grid, 20, 25, 22));

  auto estimates = gs_estimate({ds}, gold, fast_logistic());
  REQUIRE(estimates.size() == 1);
  INFO("error: ", estimates[0].error);
  REQUIRE(!estimates[0].failed());
  CHECK(estimates[0].method == "GS");
  CHECK(estimates[0].gap == doctest::Approx(-3.0 / 20.0).epsilon(1e-12));
  CHECK(std::isnan(estimates[0].c));
}

TEST_CASE("gold-model scoring enforces a minimum class count") {
  std::vector<Instance> instances;
  std::size_t row = 0;
  auto add = [&](Group g, int label, int count) {
    for (int i = 0; i < count; ++i) {
      instances.push_back(
          testutil::make_instance("gold", row, {0.01 * static_cast<double>(row)}, g, label));
      ++row;
    }
  };
  add(Group::a, 1, 10);
  add(Group::a, 0, 11);
  add(Group::not_a, 1, 9);
  add(Group::not_a, 0, 10);
  GoldStandardSet gold = GoldStandardSet::create(instances);  // 19 positives

  auto grid = margin_grid(20, 40);
  DecisionSet ds = DecisionSet::create("h1", grid_instances("ds", grid, 20, 25, 22));
  try {
    gs_estimate({ds}, gold, fast_logistic());
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    std::string what = e.what();
    CHECK(what.find("20") != std::string::npos);
    CHECK(what.find("19") != std::string::npos);
  }
  // A smaller floor admits the same gold set.
  CHECK_NOTHROW(gs_estimate({ds}, gold, fast_logistic(), 5));
  CHECK_THROWS_AS(gs_estimate({}, gold, fast_logistic(), 5), ValidationError);
}

TEST_CASE("gold-model scoring records per-human failures") {
  auto grid = margin_grid(20, 40);
  GoldStandardSet gold = GoldStandardSet::create(grid_instances("gold", grid, 20, 25, 22));

  // h_bad sits entirely below the decision boundary, so the model
  // flags nothing and a TPR gap over its instances is undefined.
  std::vector<Instance> low;
  std::size_t row = 0;
  for (Group g : {Group::a, Group::not_a}) {
    for (int i = 0; i < 6; ++i) {
      low.push_back(testutil::make_instance("low", row++, {0.01 * i}, g, std::nullopt, i % 2));
    }
  }
  DecisionSet bad = DecisionSet::create("h_bad", low);
  DecisionSet ok = DecisionSet::create("h_ok", grid_instances("ds", grid, 20, 25, 22));

  auto estimates = gs_estimate({bad, ok}, gold, fast_logistic());
  REQUIRE(estimates.size() == 2);
  CHECK(estimates[0].failed());
  CHECK(estimates[0].error.find("no actual positives") != std::string::npos);
  CHECK(!estimates[1].failed());
}

TEST_CASE("confident joint, worked by hand") {
  // t1 = (0.9 + 0.8 + 0.3)/3 and t0 = (0.8 + 0.3 + 0.9)/3, both 2/3.
  std::vector<double> probs = {0.9, 0.8, 0.3, 0.2, 0.7, 0.1};
  std::vector<int> given = {1, 1, 1, 0, 0, 0};
  ConfidentJoint joint = confident_joint(probs, given);
  CHECK(joint.class_thresholds[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(joint.class_thresholds[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(joint.counts[1][1] == 2);
  CHECK(joint.counts[1][0] == 1);  // the 0.3 example reads as class 0
  CHECK(joint.counts[0][0] == 2);
  CHECK(joint.counts[0][1] == 1);  // the 0.7 example reads as class 1
  CHECK(joint.off_diagonal() == 2);
  CHECK(joint.estimated == std::vector<int>{1, 1, 0, 0, 1, 0});
}

TEST_CASE("confident joint tie and argmax rules") {
  SUBCASE("equal class probabilities keep the given label") {
    ConfidentJoint joint = confident_joint({0.5, 0.5}, {0, 1});
    CHECK(joint.estimated == std::vector<int>{0, 1});
    CHECK(joint.off_diagonal() == 0);
  }
  SUBCASE("when both classes qualify the larger probability wins") {
    // Thresholds: t1 = (0.2 + 0.4)/2 = 0.3, t0 = (0.55 + 0.2)/2 =
    // 0.375. Example 1 (given 1, p = {0.6, 0.4}) qualifies for both
    // and lands in class 0.
    std::vector<double> probs = {0.2, 0.4, 0.45, 0.8};
    std::vector<int> given = {1, 1, 0, 0};
    ConfidentJoint joint = confident_joint(probs, given);
    CHECK(joint.estimated[1] == 0);
    CHECK(joint.counts[1][0] == 2);
    CHECK(joint.counts[0][0] == 1);
    CHECK(joint.counts[0][1] == 1);
  }
  SUBCASE("examples qualifying for no class are left out") {
    // t1 = (0.9 + 0.5)/2 = 0.7 and t0 = (0.9 + 0.5)/2 = 0.7; the two
    // 0.5 examples reach neither threshold.
    ConfidentJoint joint = confident_joint({0.9, 0.1, 0.5, 0.5}, {1, 0, 1, 0});
    CHECK(joint.estimated == std::vector<int>{1, 0, -1, -1});
    CHECK(joint.counts[1][1] == 1);
    CHECK(joint.counts[0][0] == 1);
    CHECK(joint.off_diagonal() == 0);
  }
}

TEST_CASE("confident joint recovers planted label flips exactly") {
  // Uniform confidences: 6 examples given 1 at p1 = 0.875, 8 given 0
  // at p1 = 0.125, plus 2 whose given label was flipped to 0 but
  // whose p1 stayed 0.875. The flipped pair is the entire
  // off-diagonal mass.
  std::vector<double> probs;
  std::vector<int> given;
  for (int i = 0; i < 6; ++i) {
    probs.push_back(0.875);
    given.push_back(1);
  }
  for (int i = 0; i < 8; ++i) {
    probs.push_back(0.125);
    given.push_back(0);
  }
  for (int i = 0; i < 2; ++i) {
    probs.push_back(0.875);
    given.push_back(0);
  }
  ConfidentJoint joint = confident_joint(probs, given);
  CHECK(joint.class_thresholds[1] == 0.875);
  CHECK(joint.counts[0][1] == 2);
  CHECK(joint.counts[1][0] == 0);
  CHECK(joint.off_diagonal() == 2);
  CHECK(joint.counts[1][1] == 6);
  CHECK(joint.counts[0][0] == 8);

  // Clean version: no flips, no off-diagonal mass.
  std::vector<double> clean_probs(probs.begin(), probs.begin() + 14);
  std::vector<int> clean_given(given.begin(), given.begin() + 14);
  ConfidentJoint clean = confident_joint(clean_probs, clean_given);
  CHECK(clean.off_diagonal() == 0);
  CHECK(clean.counts[1][1] == 6);
  CHECK(clean.counts[0][0] == 8);
  CHECK(clean.estimated == clean_given);
}

TEST_CASE("confident joint input validation") {
  CHECK_THROWS_AS(confident_joint({}, {}), ValidationError);
  CHECK_THROWS_AS(confident_joint({0.5}, {0, 1}), ValidationError);
  CHECK_THROWS_AS(confident_joint({0.5, 0.5}, {0, 2}), ValidationError);
  CHECK_THROWS_AS(confident_joint({0.5, 1.5}, {0, 1}), ValidationError);
  CHECK_THROWS_AS(confident_joint({0.5, 0.5}, {1, 1}), ValidationError);
}

TEST_CASE("label-cleaning estimate is exact on a consistent pool") {
  // The human's decisions match the gold labels, the pool is
  // separable with a wide margin, and nothing inconsistent exists to
  // prune, so the cleaned model reproduces the labels and the gap is
  // exactly zero.
  auto grid = margin_grid(20, 40);
  GoldStandardSet gold = GoldStandardSet::create(grid_instances("gold", grid, 20, 20, 20));
  DecisionSet h1 = DecisionSet::create("h1", grid_instances("ds", grid, 20, 20, 20));

  // h2 sits entirely below the boundary: its pooled labels are
  // consistent, but scoring it leaves the TPR gap undefined.
  std::vector<Instance> low;
  std::size_t row = 0;
  for (Group g : {Group::a, Group::not_a}) {
    for (int i = 0; i < 5; ++i) {
      low.push_back(testutil::make_instance("low", row++, {0.01 * i}, g, std::nullopt, 0));
    }
  }
  DecisionSet h2 = DecisionSet::create("h2", low);

  auto estimates = cl_estimate({h1, h2}, gold, fast_logistic(), 42);
  REQUIRE(estimates.size() == 2);
  INFO("error: ", estimates[0].error);
  REQUIRE(!estimates[0].failed());
  CHECK(estimates[0].method == "CL");
  CHECK(estimates[0].gap == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::isnan(estimates[0].c));
  CHECK(estimates[1].failed());
  CHECK(estimates[1].error.find("no actual positives") != std::string::npos);

  // Deterministic for a fixed cross-validation seed.
  auto again = cl_estimate({h1, h2}, gold, fast_logistic(), 42);
  CHECK(again[0].gap == estimates[0].gap);
}

TEST_CASE("label-cleaning input validation") {
  auto grid = margin_grid(20, 40);
  GoldStandardSet gold = GoldStandardSet::create(grid_instances("gold", grid, 20, 20, 20));
  DecisionSet h1 = DecisionSet::create("h1", grid_instances("ds", grid, 20, 20, 20));
  CHECK_THROWS_AS(cl_estimate({}, gold, fast_logistic(), 1), ValidationError);
  CHECK_THROWS_AS(cl_estimate({h1}, gold, fast_logistic(), 1, 1), ValidationError);
}
