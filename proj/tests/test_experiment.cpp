#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "leotrack/csv.hpp"
#include "leotrack/errors.hpp"
#include "leotrack/experiment.hpp"

using namespace leotrack;

namespace {

Scenario quick_scenario() {
  Scenario s;
  s.grid_elev = 30;
  s.grid_azim = 30;
  s.blocks = 4;
  return s;
}

std::string sweep_csv(const Scenario& scn, const SweepSpec& spec) {
  std::ostringstream out;
  emit_csv(to_rows(run_sweep(scn, spec)), out);
  return out.str();
}

}  // namespace

TEST(Names, RoundTrip) {
  for (Method m : {Method::Jpct, Method::JpctGenie, Method::Rough, Method::EspritLs})
    EXPECT_EQ(parse_method(to_string(m)), m);
  for (CombinerKind c : {CombinerKind::Proposed, CombinerKind::Dft, CombinerKind::Random})
    EXPECT_EQ(parse_combiner(to_string(c)), c);
  for (SweepAxis a : {SweepAxis::Snr, SweepAxis::Pilots, SweepAxis::SigmaU, SweepAxis::SigmaV,
                      SweepAxis::Blocks})
    EXPECT_EQ(parse_axis(to_string(a)), a);
  EXPECT_EQ(to_string(Method::EspritLs), "esprit+ls");
  EXPECT_THROW(parse_method("kalman"), ConfigError);
  EXPECT_THROW(parse_combiner("optimal"), ConfigError);
  EXPECT_THROW(parse_axis("power"), ConfigError);
}

TEST(ApplyAxis, SetsTheField) {
  Scenario s;
  apply_axis(s, SweepAxis::Snr, 5.0);
  EXPECT_EQ(s.snr_db, 5.0);
  apply_axis(s, SweepAxis::Pilots, 16.0);
  EXPECT_EQ(s.pilots, 16);
  apply_axis(s, SweepAxis::SigmaU, 20.0);
  EXPECT_EQ(s.sigma_u, 20.0);
  apply_axis(s, SweepAxis::SigmaV, 3.0);
  EXPECT_EQ(s.sigma_v, 3.0);
  apply_axis(s, SweepAxis::Blocks, 6.0);
  EXPECT_EQ(s.blocks, 6);
}

TEST(SimulateTruth, ProducesEveryBlockAndIsSeeded) {
  const Experiment ex(Scenario{});
  const TrialSeeds seeds = TrialSeeds::from(3, 1);
  const auto a = simulate_truth(ex, seeds);
  const auto b = simulate_truth(ex, seeds);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t n = 0; n < a.size(); ++n) {
    EXPECT_EQ(a[n].gu.position, b[n].gu.position);
    EXPECT_EQ(a[n].h, b[n].h);
  }
  const auto c = simulate_truth(ex, TrialSeeds::from(3, 2));
  EXPECT_NE(a[5].gu.position, c[5].gu.position);
  // The satellite path does not depend on the seed.
  EXPECT_EQ(a[5].sat.position, c[5].sat.position);
}

TEST(RunTrial, SameSeedIsBitIdentical) {
  const Experiment ex(quick_scenario());
  const TrialSeeds seeds = TrialSeeds::from(9, 0);
  const std::vector<Method> methods{Method::Jpct, Method::JpctGenie, Method::Rough, Method::EspritLs};
  const auto truth = simulate_truth(ex, seeds);
  const auto a = run_trial(ex, truth, seeds, methods, CombinerKind::Random);
  const auto b = run_trial(ex, truth, seeds, methods, CombinerKind::Random);
  ASSERT_EQ(a.size(), methods.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].method, methods[k]);
    ASSERT_EQ(a[k].blocks.size(), 4u);
    for (std::size_t n = 0; n < 4; ++n) {
      EXPECT_EQ(a[k].blocks[n].estimate.vector(), b[k].blocks[n].estimate.vector());
      EXPECT_EQ(a[k].blocks[n].h_hat, b[k].blocks[n].h_hat);
    }
  }
}

TEST(RunTrial, ZeroNoiseParametersMatchTruth) {
  Scenario scn = quick_scenario();
  scn.blocks = 10;
  scn.sigma_u = 0.0;
  scn.sigma_v = 0.0;
  scn.noise_var = 0.0;
  const Experiment ex(scn);
  const TrialSeeds seeds = TrialSeeds::from(2, 0);
  const auto truth = simulate_truth(ex, seeds);
  const auto traces = run_trial(ex, truth, seeds, {Method::Jpct}, CombinerKind::Dft);
  for (std::size_t n = 0; n < truth.size(); ++n) {
    const Vec3 err = traces[0].blocks[n].estimate.vector() - truth[n].z.vector();
    for (int i = 0; i < 3; ++i)
      EXPECT_LE(std::abs(err(i)), 1e-6 * std::abs(truth[n].z.vector()(i))) << n << " " << i;
  }
}

TEST(Sweep, SingleValueSingleTrial) {
  SweepSpec spec;
  spec.values = {-10.0};
  spec.trials = 1;
  const auto rows = to_rows(run_sweep(quick_scenario(), spec));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].method, "jpct");
  EXPECT_EQ(rows[1].method, "rough");
  EXPECT_EQ(rows[0].combiner, "proposed");
  EXPECT_EQ(rows[0].trials, 1);
  EXPECT_TRUE(std::isfinite(rows[0].rmse_doppler_hz));
  EXPECT_TRUE(std::isfinite(rows[0].nmse));
}

TEST(Sweep, WorkerCountDoesNotChangeOutput) {
  SweepSpec spec;
  spec.axis = SweepAxis::Pilots;
  spec.values = {4.0, 8.0};
  spec.trials = 3;
  spec.methods = {Method::Jpct, Method::EspritLs};
  spec.combiners = {CombinerKind::Proposed, CombinerKind::Random};
  const Scenario scn = quick_scenario();
  const std::string serial = sweep_csv(scn, spec);
  spec.workers = 3;
  EXPECT_EQ(sweep_csv(scn, spec), serial);
  EXPECT_EQ(sweep_csv(scn, spec), serial);
}

TEST(Sweep, NestingOrder) {
  SweepSpec spec;
  spec.values = {0.0, 5.0};
  spec.trials = 1;
  spec.methods = {Method::Rough, Method::Jpct};
  spec.combiners = {CombinerKind::Dft, CombinerKind::Proposed};
  const auto points = run_sweep(quick_scenario(), spec);
  ASSERT_EQ(points.size(), 8u);
  EXPECT_EQ(points[0].axis_value, 0.0);
  EXPECT_EQ(points[0].combiner, CombinerKind::Dft);
  EXPECT_EQ(points[0].method, Method::Rough);
  EXPECT_EQ(points[1].method, Method::Jpct);
  EXPECT_EQ(points[2].combiner, CombinerKind::Proposed);
  EXPECT_EQ(points[4].axis_value, 5.0);
}
