#include "leotrack/experiment.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "leotrack/errors.hpp"

namespace leotrack {

std::string to_string(Method m) {
  switch (m) {
    case Method::Jpct: return "jpct";
    case Method::JpctGenie: return "jpct-genie";
    case Method::Rough: return "rough";
    case Method::EspritLs: return "esprit+ls";
  }
  return "?";
}

std::string to_string(CombinerKind c) {
  switch (c) {
    case CombinerKind::Proposed: return "proposed";
    case CombinerKind::Dft: return "dft";
    case CombinerKind::Random: return "random";
  }
  return "?";
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Snr: return "snr";
    case SweepAxis::Pilots: return "pilots";
    case SweepAxis::SigmaU: return "sigma_u";
    case SweepAxis::SigmaV: return "sigma_v";
    case SweepAxis::Blocks: return "blocks";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::Jpct, Method::JpctGenie, Method::Rough, Method::EspritLs}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("method", "unknown method '" + s + "'");
}

CombinerKind parse_combiner(const std::string& s) {
  for (CombinerKind c : {CombinerKind::Proposed, CombinerKind::Dft, CombinerKind::Random}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("combiner", "unknown combiner '" + s + "'");
}

SweepAxis parse_axis(const std::string& s) {
  for (SweepAxis a : {SweepAxis::Snr, SweepAxis::Pilots, SweepAxis::SigmaU, SweepAxis::SigmaV,
                      SweepAxis::Blocks}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("axis", "unknown axis '" + s + "'");
}

namespace {

int integral_value(const char* key, double v) {
  if (v != std::round(v)) throw ConfigError(key, "sweep value must be an integer");
  return static_cast<int>(v);
}

}  // namespace

void apply_axis(Scenario& scn, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::Snr:
      scn.snr_db = value;
      scn.noise_var.reset();
      break;
    case SweepAxis::Pilots:
      scn.pilots = integral_value("frame.pilots", value);
      break;
    case SweepAxis::SigmaU:
      scn.sigma_u = value;
      break;
    case SweepAxis::SigmaV:
      scn.sigma_v = value;
      break;
    case SweepAxis::Blocks:
      scn.blocks = integral_value("frame.blocks", value);
      break;
  }
  scn.validate();
}

Experiment::Experiment(const Scenario& scenario)
    : scn(scenario),
      link(scenario.link_budget()),
      pilots(scenario.pilot_config()),
      geom(scenario.array()),
      dict(scenario.grid(), scenario.array()),
      sat0(scenario.initial_satellite()),
      gu0(scenario.initial_ground_user()) {
  scn.validate();
  f_sat = build_evolution(OrbitSpec::from_state(sat0), scn.t_block);
  f_gu = build_evolution(OrbitSpec::from_state(gu0), scn.t_block);
}

TrackerConfig Experiment::tracker_config(CombinerKind combiner, CovarianceMode mode) const {
  TrackerConfig cfg;
  cfg.geom = geom;
  cfg.grid = scn.grid();
  cfg.m_rf = scn.m_rf;
  cfg.pilots = pilots;
  cfg.link = link;
  cfg.f_sat = f_sat;
  cfg.f_gu = f_gu;
  cfg.process_noise = scn.process_noise();
  cfg.combiner = combiner;
  cfg.cov_mode = mode;
  cfg.crlb_from_rough = scn.crlb_from_rough;
  const double fa = scn.floor_angle_rad * scn.floor_angle_rad;
  cfg.floor = {scn.floor_doppler_hz * scn.floor_doppler_hz, fa, fa};
  return cfg;
}

TrialSeeds TrialSeeds::from(std::uint64_t master, std::uint64_t trial) {
  const std::uint64_t t = derive_seed(master, trial);
  return {derive_seed(t, 0), derive_seed(t, 1), derive_seed(t, 2), derive_seed(t, 3),
          derive_seed(t, 4)};
}

std::vector<BlockTruth> simulate_truth(const Experiment& ex, const TrialSeeds& seeds) {
  Rng truth_rng(seeds.truth);
  Rng path_rng(seeds.paths);
  const double lambda = ex.link.wavelength();
  std::vector<BlockTruth> out(ex.scn.blocks);
  StateVector sat = ex.sat0;
  StateVector gu = ex.gu0;
  for (int n = 0; n < ex.scn.blocks; ++n) {
    sat = evolve_state(sat, ex.f_sat);
    gu = evolve_state(gu, ex.f_gu, ex.scn.process_noise(), truth_rng);
    BlockTruth& b = out[n];
    b.sat = sat;
    b.gu = gu;
    b.z = measurement_map(sat, gu, array_frame(sat), lambda);
    const double beta = large_scale_beta((sat.position - gu.position).norm(), ex.link);
    const PathSet paths = draw_paths(ex.scn.paths, beta, ex.link, path_rng);
    b.c_tilde = summation_term(paths, ex.link, ex.pilots.subcarrier);
    b.h = b.c_tilde * array_response(b.z.elevation, b.z.azimuth, ex.geom);
  }
  return out;
}

namespace {

ObservationSource make_source(const Experiment& ex, const BlockTruth& truth,
                              std::uint64_t noise_seed) {
  return [&ex, &truth, noise_seed](const Combiner& w) {
    Rng rng(noise_seed);
    Observation obs;
    obs.block = synth_received_block(truth.h, truth.z.doppler, w, ex.pilots, ex.link, rng);
    obs.genie = {truth.z.elevation, truth.z.azimuth, truth.c_tilde};
    return obs;
  };
}

EkfState initial_filter_state(const Experiment& ex, const TrialSeeds& seeds) {
  EkfState s;
  s.q_sat = ex.sat0;
  s.q_gu = ex.gu0;
  Rng rng(seeds.init);
  for (int i = 0; i < 3; ++i) s.q_gu.position(i) += ex.scn.init_sigma_pos * standard_normal(rng);
  for (int i = 0; i < 3; ++i) s.q_gu.velocity(i) += ex.scn.init_sigma_vel * standard_normal(rng);
  s.cov = ex.scn.process_noise().covariance();
  return s;
}

bool wants(const std::vector<Method>& methods, Method m) {
  for (Method x : methods) {
    if (x == m) return true;
  }
  return false;
}

BlockRecord from_csi(bool ok, const Eigen::VectorXcd& csi, Eigen::Index m) {
  BlockRecord r;
  r.h_hat = ok ? csi : Eigen::VectorXcd::Zero(m);
  return r;
}

}  // namespace

std::vector<MethodTrace> run_trial(const Experiment& ex, const std::vector<BlockTruth>& truth,
                                   const TrialSeeds& seeds, const std::vector<Method>& methods,
                                   CombinerKind combiner, bool keep_tracker) {
  const Eigen::Index m = ex.geom.size();
  std::vector<MethodTrace> out;

  auto run_filter = [&](CovarianceMode mode, bool jpct, bool rough, bool genie) {
    JointTracker tracker(ex.tracker_config(combiner, mode), ex.dict, initial_filter_state(ex, seeds));
    Rng comb_rng(seeds.combiner);
    MethodTrace tj{genie ? Method::JpctGenie : Method::Jpct, {}, {}};
    MethodTrace tr{Method::Rough, {}, {}};
    for (std::size_t n = 0; n < truth.size(); ++n) {
      BlockResult res = tracker.run_block(make_source(ex, truth[n], derive_seed(seeds.noise, n)),
                                          comb_rng);
      BlockRecord rj = from_csi(res.csi_ok, res.csi, m);
      rj.estimate_ok = true;
      rj.estimate = res.updated_params;
      rj.crlb = res.used_cov;
      tj.blocks.push_back(std::move(rj));
      BlockRecord rr = from_csi(res.csi_rough_ok, res.csi_rough, m);
      rr.estimate_ok = res.rough_ok;
      rr.estimate = res.rough.z;
      rr.crlb = res.crlb_rough;
      tr.blocks.push_back(std::move(rr));
      if (keep_tracker) {
        tj.tracker.push_back(res);
      }
    }
    if (jpct) out.push_back(std::move(tj));
    if (rough) out.push_back(std::move(tr));
  };

  const bool jpct = wants(methods, Method::Jpct);
  const bool rough = wants(methods, Method::Rough);
  if (jpct || rough) run_filter(CovarianceMode::Predicted, jpct, rough, false);
  if (wants(methods, Method::JpctGenie)) run_filter(CovarianceMode::Genie, true, false, true);

  if (wants(methods, Method::EspritLs)) {
    const TrackerConfig cfg = ex.tracker_config(combiner, CovarianceMode::Predicted);
    BenchmarkTracker bench(cfg, ex.dict);
    Rng comb_rng(seeds.combiner);
    MethodTrace tb{Method::EspritLs, {}, {}};
    for (std::size_t n = 0; n < truth.size(); ++n) {
      const ObservationSource src = make_source(ex, truth[n], derive_seed(seeds.noise, n));
      BenchmarkResult res = bench.run_block(src, comb_rng);
      BlockRecord r = from_csi(res.csi_ok, res.csi, m);
      r.estimate_ok = res.rough_ok;
      r.estimate = res.rough.z;
      if (res.rough_ok) {
        try {
          r.crlb = predict_measurement_cov(0, res.rough, std::nullopt, src(res.combiner).block,
                                           res.combiner, cfg.link.tx_power_w, cfg.link.noise_var,
                                           cfg.pilots, cfg.geom);
        } catch (const CrlbError&) {
        }
      }
      tb.blocks.push_back(std::move(r));
    }
    out.push_back(std::move(tb));
  }

  // Report in the order requested.
  std::vector<MethodTrace> ordered;
  for (Method want : methods) {
    for (auto& t : out) {
      if (t.method == want) {
        ordered.push_back(t);
        break;
      }
    }
  }
  return ordered;
}

PointResult::PointResult(double value, Method m, CombinerKind c, int blocks)
    : axis_value(value),
      method(m),
      combiner(c),
      err_doppler(blocks),
      err_elev(blocks),
      err_azim(blocks),
      crlb_doppler(blocks),
      crlb_elev(blocks),
      crlb_azim(blocks) {}

void PointResult::add(const std::vector<BlockTruth>& truth, const MethodTrace& trace) {
  if (truth.size() != trace.blocks.size() || int(truth.size()) != err_doppler.blocks()) {
    throw ContractViolation("PointResult::add: block count mismatch");
  }
  double su = 0.0, se = 0.0, sa = 0.0;
  int used = 0;
  for (std::size_t n = 0; n < truth.size(); ++n) {
    const BlockRecord& r = trace.blocks[n];
    const int b = static_cast<int>(n);
    if (r.estimate_ok) {
      const double eu = r.estimate.doppler - truth[n].z.doppler;
      const double ee = r.estimate.elevation - truth[n].z.elevation;
      const double ea = r.estimate.azimuth - truth[n].z.azimuth;
      err_doppler.add_error(b, eu);
      err_elev.add_error(b, ee);
      err_azim.add_error(b, ea);
      su += eu * eu;
      se += ee * ee;
      sa += ea * ea;
      ++used;
    } else {
      ++estimate_failures;
    }
    if (r.crlb) {
      crlb_doppler.add_square(b, r.crlb->var_doppler);
      crlb_elev.add_square(b, r.crlb->var_elev);
      crlb_azim.add_square(b, r.crlb->var_azim);
    }
    const double e = normalized_error(truth[n].h, r.h_hat);
    if (!std::isnan(e)) {
      nmse_sum += e;
      ++nmse_count;
    }
  }
  if (used > 0) {
    trial_rms_doppler.push_back(std::sqrt(su / used));
    trial_rms_elev.push_back(std::sqrt(se / used));
    trial_rms_azim.push_back(std::sqrt(sa / used));
  }
  ++trials;
}

void PointResult::merge(const PointResult& o) {
  trials += o.trials;
  err_doppler.merge(o.err_doppler);
  err_elev.merge(o.err_elev);
  err_azim.merge(o.err_azim);
  crlb_doppler.merge(o.crlb_doppler);
  crlb_elev.merge(o.crlb_elev);
  crlb_azim.merge(o.crlb_azim);
  nmse_sum += o.nmse_sum;
  nmse_count += o.nmse_count;
  trial_rms_doppler.insert(trial_rms_doppler.end(), o.trial_rms_doppler.begin(), o.trial_rms_doppler.end());
  trial_rms_elev.insert(trial_rms_elev.end(), o.trial_rms_elev.begin(), o.trial_rms_elev.end());
  trial_rms_azim.insert(trial_rms_azim.end(), o.trial_rms_azim.begin(), o.trial_rms_azim.end());
  estimate_failures += o.estimate_failures;
}

double PointResult::nmse() const {
  return nmse_count ? nmse_sum / double(nmse_count) : std::numeric_limits<double>::quiet_NaN();
}

MetricRow to_row(const PointResult& p) {
  MetricRow r;
  r.axis_value = p.axis_value;
  r.method = to_string(p.method);
  r.combiner = to_string(p.combiner);
  r.rmse_doppler_hz = p.err_doppler.block_averaged_root();
  r.rmse_elev_rad = p.err_elev.block_averaged_root();
  r.rmse_azim_rad = p.err_azim.block_averaged_root();
  r.nmse = p.nmse();
  r.crlb_doppler = p.crlb_doppler.block_averaged_root();
  r.crlb_elev = p.crlb_elev.block_averaged_root();
  r.crlb_azim = p.crlb_azim.block_averaged_root();
  r.trials = p.trials;
  return r;
}

std::vector<MetricRow> to_rows(const std::vector<PointResult>& points) {
  std::vector<MetricRow> rows;
  rows.reserve(points.size());
  for (const auto& p : points) rows.push_back(to_row(p));
  return rows;
}

std::vector<PointResult> run_sweep(const Scenario& base, const SweepSpec& spec) {
  if (spec.trials < 1) throw ConfigError("trials", "must be >= 1");
  if (spec.values.empty()) throw ConfigError("values", "at least one sweep value is required");
  if (spec.methods.empty()) throw ConfigError("method", "at least one method is required");
  if (spec.combiners.empty()) throw ConfigError("combiner", "at least one combiner is required");

  std::vector<PointResult> all;
  for (double value : spec.values) {
    Scenario scn = base;
    apply_axis(scn, spec.axis, value);
    const Experiment ex(scn);

    // Template of the output points for this value.
    std::vector<PointResult> proto;
    for (CombinerKind c : spec.combiners) {
      for (Method m : spec.methods) proto.emplace_back(value, m, c, scn.blocks);
    }

    std::vector<std::vector<PointResult>> per_trial(spec.trials);
    auto work = [&](int t) {
      const TrialSeeds seeds = TrialSeeds::from(scn.seed, std::uint64_t(t));
      const auto truth = simulate_truth(ex, seeds);
      std::vector<PointResult> local = proto;
      std::size_t k = 0;
      for (CombinerKind c : spec.combiners) {
        const auto traces = run_trial(ex, truth, seeds, spec.methods, c);
        for (const auto& trace : traces) local[k++].add(truth, trace);
      }
      per_trial[t] = std::move(local);
    };

    const int workers = std::max(1, std::min(spec.workers, spec.trials));
    if (workers == 1) {
      for (int t = 0; t < spec.trials; ++t) work(t);
    } else {
      std::atomic<int> next{0};
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(workers);
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (int t = next++; t < spec.trials; t = next++) work(t);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    // Merge in trial order so the result does not depend on scheduling.
    for (const auto& local : per_trial) {
      for (std::size_t k = 0; k < proto.size(); ++k) proto[k].merge(local[k]);
    }
    all.insert(all.end(), proto.begin(), proto.end());
  }
  return all;
}

}  // namespace leotrack
