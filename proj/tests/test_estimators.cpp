#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "leotrack/errors.hpp"
#include "leotrack/estimators.hpp"
#include "leotrack/metrics.hpp"

using namespace leotrack;
using std::numbers::pi;

namespace {

const ArrayGeometry kUpa{8, 8};

PilotConfig pilots(int n, double t_sym = 8e-6) {
  PilotConfig p;
  p.n_pilots = n;
  p.t_sym = t_sym;
  p.symbols = zc_pilots(n, 1);
  return p;
}

LinkBudget quiet_link() {
  LinkBudget lb;
  lb.noise_var = 0.0;
  return lb;
}

ReceivedBlock noise_free_block(const Eigen::VectorXcd& h, double u, const Combiner& w, int n) {
  Rng rng(0);
  return synth_received_block(h, u, w, pilots(n), quiet_link(), rng);
}

}  // namespace

TEST(AngleGrid, Points) {
  const AngleGrid g{4, 5};
  EXPECT_EQ(g.size(), 20);
  EXPECT_DOUBLE_EQ(g.elevation(0), 0.0);
  EXPECT_DOUBLE_EQ(g.elevation(1), pi / 8);
  EXPECT_DOUBLE_EQ(g.azimuth(0), -pi / 2);
  EXPECT_DOUBLE_EQ(g.azimuth(1), -pi / 2 + pi / 5);
  EXPECT_EQ(g.elevations().size(), 4u);
  EXPECT_EQ(g.azimuths().size(), 5u);
  EXPECT_THROW(AngleDictionary(AngleGrid{1, 5}, kUpa), ContractViolation);
}

TEST(AngleDictionary, AtomsMatchArrayResponse) {
  const AngleDictionary dict(AngleGrid{6, 7}, kUpa);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 7; ++j) {
      const Eigen::VectorXcd a =
          array_response(dict.grid().elevation(i), dict.grid().azimuth(j), kUpa);
      EXPECT_LT((dict.atom(i, j) - a).norm(), 1e-14);
    }
  }
}

TEST(Esprit, NoiseFreeExamples) {
  const Combiner w = dft_combiner(kUpa, 32);
  const Eigen::VectorXcd h = cd(0.8, -1.1) * array_response(0.5, 0.2, kUpa);
  EXPECT_NEAR(esprit_doppler(noise_free_block(h, 0.0, w, 10), 8e-6), 0.0, 1e-9);
  for (double u : {1e4, -1e4, 48385.0, -48385.0}) {
    const double est = esprit_doppler(noise_free_block(h, u, w, 10), 8e-6);
    EXPECT_NEAR(est, u, 1e-6 * std::abs(u)) << u;
  }
}

TEST(Esprit, NoiseFreeAcrossUnambiguousRange) {
  const Combiner w = dft_combiner(kUpa, 32);
  const Eigen::VectorXcd h = cd(1.3, 0.4) * array_response(0.9, -0.6, kUpa);
  const double limit = 0.95 / (2.0 * 8e-6);
  for (int k = -20; k <= 20; ++k) {
    const double u = limit * k / 20.0;
    const double est = esprit_doppler(noise_free_block(h, u, w, 10), 8e-6);
    EXPECT_NEAR(est, u, 1e-6 * std::max(1.0, std::abs(u))) << u;
  }
}

TEST(Esprit, InvariantToGlobalScaling) {
  const Combiner w = dft_combiner(kUpa, 32);
  const Eigen::VectorXcd h = array_response(0.5, 0.2, kUpa);
  LinkBudget lb;
  lb.noise_var = 0.05;
  Rng rng(1);
  ReceivedBlock blk = synth_received_block(h, 2000.0, w, pilots(10), lb, rng);
  const double u0 = esprit_doppler(blk, 8e-6);
  blk.samples *= cd(0.0, 3.7);
  EXPECT_NEAR(esprit_doppler(blk, 8e-6), u0, 1e-6);
}

TEST(Esprit, Preconditions) {
  ReceivedBlock blk;
  blk.samples = Eigen::MatrixXcd::Ones(4, 2);
  EXPECT_THROW(esprit_doppler(blk, 8e-6), ContractViolation);
  blk.samples = Eigen::MatrixXcd::Zero(4, 6);
  EXPECT_THROW(esprit_doppler(blk, 8e-6), EstimationError);
}

namespace {

void expect_exhaustive_recovery(const AngleDictionary& dict, const Combiner& w) {
  for (int i = 0; i < dict.grid().n_elev; ++i) {
    for (int j = 0; j < dict.grid().n_azim; ++j) {
      const Eigen::VectorXcd h = cd(0.7, 0.2) * dict.atom(i, j);
      const RoughEstimate est = somp_angles(noise_free_block(h, 3000.0, w, 10), w, dict);
      if (i == 0) {
        // At zero elevation every azimuth yields the same atom.
        EXPECT_LT((dict.atom(est.elev_index, est.azim_index) - dict.atom(i, j)).norm(), 1e-12);
      } else {
        EXPECT_EQ(est.elev_index, i) << w.rf_chains() << " " << i << " " << j;
        EXPECT_EQ(est.azim_index, j) << w.rf_chains() << " " << i << " " << j;
      }
      EXPECT_DOUBLE_EQ(est.z.elevation, dict.grid().elevation(est.elev_index));
      EXPECT_DOUBLE_EQ(est.z.azimuth, dict.grid().azimuth(est.azim_index));
    }
  }
}

}  // namespace

TEST(Somp, ExhaustiveOnGridRecoveryDft) {
  const AngleDictionary dict(AngleGrid{10, 10}, kUpa);
  for (int m_rf : {32, 64}) expect_exhaustive_recovery(dict, dft_combiner(kUpa, m_rf));
}

TEST(Somp, ExhaustiveOnGridRecoveryRandom) {
  const AngleDictionary dict(AngleGrid{10, 10}, kUpa);
  Rng rng(9);
  for (int m_rf : {8, 16}) expect_exhaustive_recovery(dict, random_combiner(kUpa, m_rf, rng));
}

TEST(Somp, NarrowDftCombinerMissesOnBinDirections) {
  // sin(-3pi/10) sin(pi/10) = -1/4 puts this atom on the x-beam kx = -1, which
  // a two-beam-wide x selection {0, 1} does not observe.
  const AngleDictionary dict(AngleGrid{10, 10}, kUpa);
  const Combiner w = dft_combiner(kUpa, 16);
  EXPECT_LT((w.W * dict.atom(2, 2)).norm(), 1e-12);
  EXPECT_GT((dft_combiner(kUpa, 32).W * dict.atom(2, 2)).norm(), 0.1);
}

TEST(Somp, SmallestGridQuadrant) {
  const AngleDictionary dict(AngleGrid{2, 2}, kUpa);
  const Combiner w = dft_combiner(kUpa, 32);
  for (int j = 0; j < 2; ++j) {
    const RoughEstimate est = somp_angles(noise_free_block(dict.atom(1, j), 0.0, w, 4), w, dict);
    EXPECT_EQ(est.elev_index, 1);
    EXPECT_EQ(est.azim_index, j);
  }
}

TEST(Somp, ScalingInvariance) {
  const AngleDictionary dict(AngleGrid{30, 30}, kUpa);
  const Combiner w = dft_combiner(kUpa, 32);
  LinkBudget lb;
  lb.noise_var = 0.5;
  Rng rng(2);
  ReceivedBlock blk = synth_received_block(array_response(0.6, 0.3, kUpa), 100.0, w, pilots(10), lb, rng);
  const RoughEstimate a = somp_angles(blk, w, dict);
  blk.samples *= 17.0;
  const RoughEstimate b = somp_angles(blk, w, dict);
  EXPECT_EQ(a.elev_index, b.elev_index);
  EXPECT_EQ(a.azim_index, b.azim_index);
}

TEST(Somp, ScoresMatchBruteForce) {
  const AngleDictionary dict(AngleGrid{7, 9}, kUpa);
  Rng rng(3);
  const Combiner w = random_combiner(kUpa, 12, rng);
  LinkBudget lb;
  lb.noise_var = 0.3;
  const ReceivedBlock blk = synth_received_block(array_response(0.4, -0.3, kUpa), 500.0, w, pilots(6), lb, rng);
  const Eigen::VectorXd s = somp_scores(blk, w, dict);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 9; ++j) {
      const Eigen::VectorXcd v = w.W * dict.atom(i, j);
      double corr = 0.0;
      for (int b = 0; b < 6; ++b) corr += std::abs(v.dot(blk.samples.col(b)));
      EXPECT_NEAR(s(i * 9 + j), corr / v.norm(), 1e-10 * (1.0 + corr / v.norm()));
    }
  }
}

TEST(Somp, OffGridWithinOneSpacing) {
  const AngleGrid grid{100, 100};
  const AngleDictionary dict(grid, kUpa);
  const Combiner w = dft_combiner(kUpa, 64);
  const double de = pi / 200.0;
  const double da = pi / 100.0;
  Rng rng(4);
  int conditioned = 0;
  for (int k = 0; k < 100; ++k) {
    const double el = uniform(rng, 0.0, pi / 2);
    const double az = uniform(rng, -pi / 2, pi / 2);
    const RoughEstimate est =
        somp_angles(noise_free_block(array_response(el, az, kUpa), 0.0, w, 10), w, dict);
    EXPECT_LE(std::abs(est.z.elevation - el), de + 1e-12) << el << " " << az;
    const double fx = std::sin(az) * std::sin(el);
    const double fx_hat = std::sin(est.z.azimuth) * std::sin(est.z.elevation);
    EXPECT_LE(std::abs(fx - fx_hat), 2.0 * da) << el << " " << az;
    // Azimuth only moves the x spatial frequency at rate cos(az) sin(el); it is
    // resolvable to one spacing only where that rate is not small.
    if (std::abs(std::cos(az)) * std::sin(el) >= 0.3) {
      ++conditioned;
      EXPECT_LE(std::abs(est.z.azimuth - az), da + 1e-12) << el << " " << az;
    }
  }
  EXPECT_GT(conditioned, 30);
}

TEST(Combiner, DftNormalization) {
  for (int m_rf : {1, 8, 32, 64}) {
    const Combiner w = dft_combiner(kUpa, m_rf);
    EXPECT_NEAR(w.W.norm(), 1.0, 1e-12);
    EXPECT_EQ(w.rf_chains(), m_rf);
  }
  const Eigen::MatrixXcd f = dft_rows(kUpa);
  EXPECT_LT((f * f.adjoint() - Eigen::MatrixXcd::Identity(64, 64)).norm(), 1e-12);
  EXPECT_THROW(dft_combiner(kUpa, 65), ContractViolation);
  EXPECT_THROW(dft_combiner(kUpa, 0), ContractViolation);
}

TEST(Combiner, DesignedRowZeroIsMatched) {
  const double el = 0.46, az = -0.14;
  const Combiner w = design_combiner(std::make_pair(el, az), kUpa, 32);
  EXPECT_NEAR(w.W.norm(), 1.0, 1e-12);
  const Eigen::VectorXcd a = array_response(el, az, kUpa);
  const Eigen::RowVectorXcd row0 = w.W.row(0);
  EXPECT_NEAR(std::abs((row0 * a).value()), row0.norm() * a.norm(), 1e-12);
  const double matched = std::abs((row0 * a).value());
  const AngleDictionary test_grid(AngleGrid{40, 40}, kUpa);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j)
      EXPECT_LE(std::abs((row0 * test_grid.atom(i, j)).value()), matched + 1e-12);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(w.W).singularValues();
  EXPECT_LT(sv(0) / sv(sv.size() - 1), 1e4);
  // Without a steering direction this falls back to the DFT combiner.
  EXPECT_LT((design_combiner(std::nullopt, kUpa, 32).W - dft_combiner(kUpa, 32).W).norm(), 1e-15);
}

TEST(Combiner, RandomIsConstantModulusAndNormalized) {
  Rng rng(5);
  const Combiner w = random_combiner(kUpa, 32, rng);
  EXPECT_NEAR(w.W.norm(), 1.0, 1e-12);
  const double mod = 1.0 / std::sqrt(32.0 * 64.0);
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 32; ++i) EXPECT_NEAR(std::abs(w.W(i, j)), mod, 1e-15);
}

TEST(LsSummationTerm, NoiseFreeExact) {
  const cd c(0.37, -1.2);
  const double el = 0.5, az = 0.3, u = 4321.0;
  for (int m_rf : {4, 32}) {
    const Combiner w = dft_combiner(kUpa, m_rf);
    const ReceivedBlock blk = noise_free_block(c * array_response(el, az, kUpa), u, w, 10);
    const cd est = ls_summation_term(blk, w, el, az, u, 1.0, 8e-6, kUpa);
    EXPECT_LT(std::abs(est - c), 1e-9 * std::abs(c));
  }
}

TEST(LsSummationTerm, ZeroChannelAndPilotIndependence) {
  const Combiner w = dft_combiner(kUpa, 32);
  LinkBudget lb;
  lb.noise_var = 1e-6;
  Rng r1(6), r2(6);
  PilotConfig p1 = pilots(10);
  PilotConfig p2 = p1;
  p2.symbols = zc_pilots(10, 3);
  const Eigen::VectorXcd h = cd(0.5, 0.5) * array_response(0.8, 0.1, kUpa);
  const ReceivedBlock zero = synth_received_block(Eigen::VectorXcd::Zero(64), 0.0, w, p1, lb, r1);
  EXPECT_LT(std::abs(ls_summation_term(zero, w, 0.8, 0.1, 0.0, 1.0, 8e-6, kUpa)), 1e-2);
  Rng r3(7), r4(7);
  LinkBudget still = lb;
  still.noise_var = 0.0;
  const ReceivedBlock b1 = synth_received_block(h, 900.0, w, p1, still, r3);
  const ReceivedBlock b2 = synth_received_block(h, 900.0, w, p2, still, r4);
  EXPECT_NEAR(std::abs(ls_summation_term(b1, w, 0.8, 0.1, 900.0, 1.0, 8e-6, kUpa) -
                       ls_summation_term(b2, w, 0.8, 0.1, 900.0, 1.0, 8e-6, kUpa)),
              0.0, 1e-12);
}

TEST(LsSummationTerm, ZeroEffectiveSteering) {
  Combiner w{Eigen::MatrixXcd::Zero(2, 64)};
  ReceivedBlock blk;
  blk.samples = Eigen::MatrixXcd::Zero(2, 4);
  EXPECT_THROW(ls_summation_term(blk, w, 0.5, 0.1, 0.0, 1.0, 8e-6, kUpa), EstimationError);
}

TEST(LsCsi, ProposedCombinerRecoversChannel) {
  const double el = 0.46, az = -0.14, u = 42000.0;
  const Combiner w = design_combiner(std::make_pair(el, az), kUpa, 32);
  const Eigen::VectorXcd h = cd(1.1, -0.3) * array_response(el, az, kUpa);
  const Eigen::VectorXcd est = ls_csi(noise_free_block(h, u, w, 10), w, u, 1.0, 8e-6);
  EXPECT_LE(normalized_error(h, est), 1e-18);
}

TEST(LsCsi, RandomFatCombinerGivesProjection) {
  Rng rng(8);
  const Combiner w = random_combiner(kUpa, 16, rng);
  const Eigen::VectorXcd h = cd(0.6, 0.9) * array_response(0.7, 0.4, kUpa);
  const Eigen::VectorXcd est = ls_csi(noise_free_block(h, 1000.0, w, 10), w, 1000.0, 1.0, 8e-6);
  const Eigen::MatrixXcd proj = w.W.completeOrthogonalDecomposition().pseudoInverse() * w.W;
  const Eigen::VectorXcd expect = proj * h;
  EXPECT_LT((est - expect).norm(), 1e-10 * h.norm());
  const double loss = 1.0 - expect.squaredNorm() / h.squaredNorm();
  EXPECT_GT(loss, 0.0);
  EXPECT_NEAR(normalized_error(h, est), loss, 1e-10);
}

TEST(LsCsi, DopplerOffsetLosesCoherence) {
  const Combiner w = dft_combiner(kUpa, 32);
  const Eigen::VectorXcd h = array_response(0.7, 0.4, kUpa);
  const ReceivedBlock blk = noise_free_block(h, 5000.0, w, 10);
  const double best = ls_csi(blk, w, 5000.0, 1.0, 8e-6).norm();
  for (double off : {-2000.0, -500.0, 100.0, 3000.0}) {
    EXPECT_LT(ls_csi(blk, w, 5000.0 + off, 1.0, 8e-6).norm(), best);
  }
}

TEST(LsCsi, SharedInverseMatchesDirect) {
  Rng rng(12);
  const Combiner w = random_combiner(kUpa, 16, rng);
  const ReceivedBlock blk = noise_free_block(array_response(0.5, 1.2, kUpa), 700.0, w, 10);
  const Eigen::MatrixXcd pinv = ls_csi_inverse(w, 2.0);
  for (double u : {0.0, 700.0, -3000.0}) {
    EXPECT_EQ(ls_csi(blk, pinv, u, 8e-6), ls_csi(blk, w, u, 2.0, 8e-6));
  }
  EXPECT_THROW(ls_csi(blk, Eigen::MatrixXcd(64, 3), 0.0, 8e-6), ContractViolation);
}

TEST(LsCsi, RankDeficientCombiner) {
  Combiner w{Eigen::MatrixXcd::Zero(3, 64)};
  w.W.row(0) = dft_rows(kUpa).row(1);
  w.W.row(1) = 2.0 * w.W.row(0);
  w.W.row(2) = dft_rows(kUpa).row(2);
  ReceivedBlock blk;
  blk.samples = Eigen::MatrixXcd::Ones(3, 4);
  EXPECT_THROW(ls_csi(blk, w, 0.0, 1.0, 8e-6), EstimationError);
  EXPECT_THROW(ls_csi_inverse(w, 1.0), EstimationError);
}

TEST(LsCsi, NmseNonIncreasingInPilots) {
  const Combiner w = dft_combiner(kUpa, 32);
  LinkBudget lb;
  lb.noise_var = 0.8;
  std::vector<double> means;
  for (int np : {4, 8, 16, 32}) {
    const PilotConfig pc = pilots(np);
    double acc = 0.0;
    for (int t = 0; t < 500; ++t) {
      Rng rng(derive_seed(11, t));
      const Eigen::VectorXcd h = complex_normal(rng) * array_response(0.6, 0.2, kUpa);
      const ReceivedBlock blk = synth_received_block(h, 7000.0, w, pc, lb, rng);
      acc += normalized_error(h, ls_csi(blk, w, 7000.0, 1.0, 8e-6));
    }
    means.push_back(acc / 500.0);
  }
  int inversions = 0;
  for (std::size_t k = 1; k < means.size(); ++k) inversions += means[k] > means[k - 1];
  EXPECT_LE(inversions, 1);
}
