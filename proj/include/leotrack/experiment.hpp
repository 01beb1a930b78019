#pragma once

// Seeded Monte Carlo runner: truth simulation, per-method tracking runs and
// aggregation into metric rows.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "leotrack/metrics.hpp"
#include "leotrack/scenario.hpp"
#include "leotrack/tracker.hpp"

namespace leotrack {

enum class Method { Jpct, JpctGenie, Rough, EspritLs };
enum class SweepAxis { Snr, Pilots, SigmaU, SigmaV, Blocks };

std::string to_string(Method m);
std::string to_string(CombinerKind c);
std::string to_string(SweepAxis a);
Method parse_method(const std::string& s);
CombinerKind parse_combiner(const std::string& s);
SweepAxis parse_axis(const std::string& s);

/// Applies a sweep value to the scenario.
void apply_axis(Scenario& scn, SweepAxis axis, double value);

/// Everything derived once from a scenario and shared read-only by trials.
struct Experiment {
  explicit Experiment(const Scenario& scenario);

  Scenario scn;
  LinkBudget link;
  PilotConfig pilots;
  ArrayGeometry geom;
  AngleDictionary dict;
  StateVector sat0;  // epoch -1; block 0 follows one evolution step
  StateVector gu0;
  EvolutionMatrix f_sat;
  EvolutionMatrix f_gu;

  TrackerConfig tracker_config(CombinerKind combiner, CovarianceMode mode) const;
};

struct BlockTruth {
  StateVector sat;
  StateVector gu;
  MeasurementVector z;
  cd c_tilde{0.0, 0.0};
  Eigen::VectorXcd h;
};

/// Stream seeds of one trial. All methods of a trial see the same truth,
/// paths and receiver noise.
struct TrialSeeds {
  std::uint64_t truth, paths, noise, combiner, init;
  static TrialSeeds from(std::uint64_t master, std::uint64_t trial);
};

std::vector<BlockTruth> simulate_truth(const Experiment& ex, const TrialSeeds& seeds);

/// Per-block output of one method.
struct BlockRecord {
  bool estimate_ok = false;
  MeasurementVector estimate;
  Eigen::VectorXcd h_hat;  // zero when recovery failed
  std::optional<CrlbPrediction> crlb;
};

struct MethodTrace {
  Method method;
  std::vector<BlockRecord> blocks;
  std::vector<BlockResult> tracker;  // filled for the tracking methods only
};

/// Runs the requested methods against one truth realization. jpct and rough
/// come from the same filter run.
std::vector<MethodTrace> run_trial(const Experiment& ex, const std::vector<BlockTruth>& truth,
                                   const TrialSeeds& seeds, const std::vector<Method>& methods,
                                   CombinerKind combiner, bool keep_tracker = false);

/// Aggregated statistics for one (axis value, method, combiner).
struct PointResult {
  double axis_value = 0.0;
  Method method = Method::Jpct;
  CombinerKind combiner = CombinerKind::Proposed;
  int trials = 0;
  BlockMeanSquare err_doppler, err_elev, err_azim;
  BlockMeanSquare crlb_doppler, crlb_elev, crlb_azim;  // sums of variances
  double nmse_sum = 0.0;
  long nmse_count = 0;
  // Per-trial root of the block-mean squared error.
  std::vector<double> trial_rms_doppler, trial_rms_elev, trial_rms_azim;
  long estimate_failures = 0;

  PointResult() = default;
  PointResult(double value, Method m, CombinerKind c, int blocks);

  void add(const std::vector<BlockTruth>& truth, const MethodTrace& trace);
  void merge(const PointResult& other);
  double nmse() const;
};

struct MetricRow {
  double axis_value = 0.0;
  std::string method;
  std::string combiner;
  double rmse_doppler_hz = 0.0;
  double rmse_elev_rad = 0.0;
  double rmse_azim_rad = 0.0;
  double nmse = 0.0;
  double crlb_doppler = 0.0;
  double crlb_elev = 0.0;
  double crlb_azim = 0.0;
  long trials = 0;
};

MetricRow to_row(const PointResult& p);

struct SweepSpec {
  SweepAxis axis = SweepAxis::Snr;
  std::vector<double> values;
  int trials = 1;
  std::vector<Method> methods{Method::Jpct, Method::Rough};
  std::vector<CombinerKind> combiners{CombinerKind::Proposed};
  int workers = 1;
};

/// One PointResult per (value, combiner, method), in that nesting order.
/// Trial t uses the same seeds at every sweep value.
std::vector<PointResult> run_sweep(const Scenario& scn, const SweepSpec& spec);

std::vector<MetricRow> to_rows(const std::vector<PointResult>& points);

}  // namespace leotrack
