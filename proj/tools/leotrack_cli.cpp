// Command-line front end: simulate, sweep, crlb, scenario-check.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "leotrack/crlb.hpp"
#include "leotrack/csv.hpp"
#include "leotrack/errors.hpp"
#include "leotrack/experiment.hpp"
#include "leotrack/scenario.hpp"

using namespace leotrack;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out;
  std::vector<std::string> methods;
  std::vector<std::string> combiners;
  bool genie = false;
  std::string axis = "snr";
  std::vector<double> values;
  int workers = 1;
};

Scenario load(const Options& o) {
  Scenario scn = o.config.empty() ? Scenario{} : load_scenario(o.config);
  if (o.seed) scn.seed = *o.seed;
  if (o.trials) scn.trials = *o.trials;
  scn.validate();
  return scn;
}

std::vector<Method> methods_of(const Options& o, std::vector<Method> fallback) {
  std::vector<Method> out;
  for (const auto& s : o.methods) out.push_back(parse_method(s));
  if (out.empty()) out = std::move(fallback);
  if (o.genie) {
    bool have = false;
    for (Method m : out) have |= m == Method::JpctGenie;
    if (!have) out.push_back(Method::JpctGenie);
  }
  return out;
}

std::vector<CombinerKind> combiners_of(const Options& o, CombinerKind fallback) {
  std::vector<CombinerKind> out;
  for (const auto& s : o.combiners) out.push_back(parse_combiner(s));
  if (out.empty()) out.push_back(fallback);
  return out;
}

// Runs `body` with the output stream chosen by --out.
template <typename F>
void with_output(const std::string& path, F body) {
  if (path.empty()) {
    body(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  body(f);
  f.flush();
  if (!f) throw std::runtime_error(path + ": write failed");
}

std::string g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void cmd_simulate(const Options& o) {
  const Scenario scn = load(o);
  const Experiment ex(scn);
  const TrialSeeds seeds = TrialSeeds::from(scn.seed, 0);
  const auto truth = simulate_truth(ex, seeds);
  const CombinerKind comb = combiners_of(o, CombinerKind::Proposed).front();
  const Method filter = o.genie ? Method::JpctGenie : Method::Jpct;
  const auto traces = run_trial(ex, truth, seeds, {filter, Method::Rough}, comb);
  const auto& tj = traces[0].blocks;
  const auto& tr = traces[1].blocks;
  with_output(o.out, [&](std::ostream& os) {
    os << "block,true_doppler_hz,true_elev_rad,true_azim_rad,rough_ok,rough_doppler_hz,"
          "rough_elev_rad,rough_azim_rad,track_doppler_hz,track_elev_rad,track_azim_rad,"
          "q_doppler,q_elev,q_azim,nmse_track,nmse_rough\n";
    for (std::size_t n = 0; n < truth.size(); ++n) {
      const auto& t = truth[n].z;
      const auto& q = *tj[n].crlb;
      os << n << ',' << g9(t.doppler) << ',' << g9(t.elevation) << ',' << g9(t.azimuth) << ','
         << (tr[n].estimate_ok ? 1 : 0) << ',' << g9(tr[n].estimate.doppler) << ','
         << g9(tr[n].estimate.elevation) << ',' << g9(tr[n].estimate.azimuth) << ','
         << g9(tj[n].estimate.doppler) << ',' << g9(tj[n].estimate.elevation) << ','
         << g9(tj[n].estimate.azimuth) << ',' << g9(q.var_doppler) << ',' << g9(q.var_elev) << ','
         << g9(q.var_azim) << ',' << g9(normalized_error(truth[n].h, tj[n].h_hat)) << ','
         << g9(normalized_error(truth[n].h, tr[n].h_hat)) << '\n';
    }
  });
}

void cmd_sweep(const Options& o) {
  const Scenario scn = load(o);
  SweepSpec spec;
  spec.axis = parse_axis(o.axis);
  spec.values = o.values;
  if (spec.values.empty()) {
    switch (spec.axis) {
      case SweepAxis::Snr: spec.values = {-20, -15, -10, -5, 0, 5, 10, 15}; break;
      case SweepAxis::Pilots: spec.values = {4, 8, 16, 32}; break;
      case SweepAxis::SigmaU: spec.values = {5, 10, 15, 20}; break;
      case SweepAxis::SigmaV: spec.values = {1, 2, 3, 4}; break;
      case SweepAxis::Blocks: spec.values = {1, 2, 5, 10}; break;
    }
  }
  spec.trials = scn.trials;
  spec.methods = methods_of(o, {Method::Jpct, Method::Rough});
  spec.combiners = combiners_of(o, CombinerKind::Proposed);
  spec.workers = o.workers;
  const auto rows = to_rows(run_sweep(scn, spec));
  with_output(o.out, [&](std::ostream& os) { emit_csv(rows, os); });
}

void cmd_crlb(const Options& o) {
  const Scenario scn = load(o);
  const Experiment ex(scn);
  // Noise-free geometry of block 0 and the mean summation-term power.
  const StateVector sat = evolve_state(ex.sat0, ex.f_sat);
  const StateVector gu = evolve_state(ex.gu0, ex.f_gu);
  const MeasurementVector z = measurement_map(sat, gu, array_frame(sat), ex.link.wavelength());
  const double beta = large_scale_beta((sat.position - gu.position).norm(), ex.link);
  const CombinerKind comb = combiners_of(o, CombinerKind::Dft).front();
  Rng rng(derive_seed(scn.seed, 3));
  std::optional<std::pair<double, double>> steer;
  if (comb == CombinerKind::Proposed) steer = std::make_pair(z.elevation, z.azimuth);
  const Combiner w = comb == CombinerKind::Random ? random_combiner(ex.geom, scn.m_rf, rng)
                     : comb == CombinerKind::Dft  ? dft_combiner(ex.geom, scn.m_rf)
                                                  : design_combiner(steer, ex.geom, scn.m_rf);
  FisherInputs in{z.elevation, z.azimuth, cd(ex.link.sat_gain * std::sqrt(beta), 0.0),
                  ex.link.tx_power_w, ex.link.noise_var, scn.pilots, scn.t_sym};
  const CrlbPrediction p = crlb_at(in, w, ex.geom);
  with_output(o.out, [&](std::ostream& os) {
    os << "combiner = " << to_string(comb) << '\n'
       << "snr_db = " << g9(scn.snr_db) << '\n'
       << "noise_var = " << g9(ex.link.noise_var) << '\n'
       << "doppler_hz = " << g9(z.doppler) << '\n'
       << "elevation_rad = " << g9(z.elevation) << '\n'
       << "azimuth_rad = " << g9(z.azimuth) << '\n'
       << "crlb_doppler_hz2 = " << g9(p.var_doppler) << '\n'
       << "crlb_elev_rad2 = " << g9(p.var_elev) << '\n'
       << "crlb_azim_rad2 = " << g9(p.var_azim) << '\n'
       << "root_crlb_doppler_hz = " << g9(std::sqrt(p.var_doppler)) << '\n'
       << "root_crlb_elev_rad = " << g9(std::sqrt(p.var_elev)) << '\n'
       << "root_crlb_azim_rad = " << g9(std::sqrt(p.var_azim)) << '\n';
  });
}

void cmd_check(const Options& o) {
  const Scenario scn = load(o);
  const Experiment ex(scn);
  const StateVector sat = evolve_state(ex.sat0, ex.f_sat);
  const StateVector gu = evolve_state(ex.gu0, ex.f_gu);
  const MeasurementVector z = measurement_map(sat, gu, array_frame(sat), ex.link.wavelength());
  with_output(o.out, [&](std::ostream& os) {
    os << describe_scenario(scn);
    os << "# derived\n"
       << "# subcarrier_spacing_hz = " << g9(ex.link.subcarrier_spacing_hz) << '\n'
       << "# noise_var = " << g9(ex.link.noise_var) << '\n'
       << "# slant_range_m = " << g9((sat.position - gu.position).norm()) << '\n'
       << "# block0_doppler_hz = " << g9(z.doppler) << '\n'
       << "# block0_elevation_rad = " << g9(z.elevation) << '\n'
       << "# block0_azimuth_rad = " << g9(z.azimuth) << '\n';
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LEO uplink joint parameter and channel tracking simulator"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario file (key = value)");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--trials", o.trials, "Monte Carlo trials per point")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "output path (default stdout)");
    sub->add_option("--method", o.methods, "jpct, jpct-genie, rough, esprit+ls")->delimiter(',');
    sub->add_option("--combiner", o.combiners, "proposed, dft, random")->delimiter(',');
    sub->add_flag("--genie", o.genie, "also run the genie-covariance tracker");
  };

  auto* sim = app.add_subcommand("simulate", "one trial, per-block dump");
  add_common(sim);
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep to CSV");
  add_common(sweep);
  sweep->add_option("--axis", o.axis, "snr, pilots, sigma_u, sigma_v, blocks");
  sweep->add_option("--values", o.values, "comma-separated axis values")->delimiter(',');
  sweep->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  auto* crlb = app.add_subcommand("crlb", "bounds at the block-0 geometry");
  add_common(crlb);
  auto* check = app.add_subcommand("scenario-check", "validate and print a scenario");
  add_common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*sim) cmd_simulate(o);
    if (*sweep) cmd_sweep(o);
    if (*crlb) cmd_crlb(o);
    if (*check) cmd_check(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
