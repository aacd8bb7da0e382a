#include <gtest/gtest.h>

#include <cmath>

#include "glauber/spectra.hpp"

using namespace glauber;

namespace {

DerivedField homogeneous(double omega, Site lo, Site hi) {
  return derive(CouplingField(lo, std::vector<double>(static_cast<std::size_t>(hi - lo + 1), omega)));
}

std::vector<double> lambda_grid() {
  std::vector<double> out;
  for (int i = 0; i < 20; ++i) out.push_back(-0.5 * std::pow(0.7, i));
  return out;
}

}  // namespace

TEST(RegularBonds, Examples) {
  const std::vector<double> c1 = {0.01, 0.995};
  EXPECT_EQ(regular_bond_count(c1, -0.02), 1u);
  EXPECT_EQ(regular_bond_count(c1, -0.01), 0u);
  const std::vector<double> flat(10, 0.3);
  EXPECT_EQ(regular_bond_count(flat, -0.999), 0u);
  // three consecutive regular bonds {0,1},{1,2},{2,3}
  const std::vector<double> chain = {0.0, 0.2, 0.4, 0.6};
  std::vector<double> excess;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) excess.push_back(1 + chain[i] - chain[i + 1]);
  for (double e : excess) ASSERT_LT(e, 0.9);
  EXPECT_EQ(greedy_regular_bonds(excess, -0.9), 2u);
  EXPECT_EQ(greedy_regular_bonds(std::vector<double>{0.1, 0.9, 0.1}, -0.5), 2u);
}

TEST(RegularBonds, HomogeneousFieldHasNone) {
  EXPECT_EQ(regular_bond_count(homogeneous(2.0, -20, 20), -0.9, -19, 19), 0u);
}

TEST(RegularBonds, GreedyIsMaximum) {
  // exhaustive maximum matching on short random excess sequences
  Stream s(8, 8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> e(10);
    for (auto& x : e) x = s.uniform();
    const double lam = -0.5;
    std::size_t best = 0;
    for (unsigned mask = 0; mask < (1u << e.size()); ++mask) {
      bool ok = true;
      std::size_t n = 0;
      for (std::size_t i = 0; i < e.size() && ok; ++i) {
        if (!(mask >> i & 1u)) continue;
        ok = e[i] < 0.5 && !(i > 0 && (mask >> (i - 1) & 1u));
        ++n;
      }
      if (ok) best = std::max(best, n);
    }
    EXPECT_EQ(greedy_regular_bonds(e, lam), best);
  }
}

TEST(Counting, TrivialProbes) {
  for (std::uint64_t m = 0; m < 20; ++m) {
    const auto J = build_l1(derive(sample_realization(TailModel::exponential(2), 30, 4, m)), -30, 30);
    EXPECT_EQ(count_above(J, -3.0), J.size());
    EXPECT_EQ(count_above(J, 0.0), 0u);
    EXPECT_EQ(phase_count(J, -3.0), J.size());
    EXPECT_EQ(phase_count(J, -2.5), count_above(J, -2.5));
  }
}

TEST(Counting, PhaseCountSplitsAtZeroBonds) {
  CouplingField f(0, {0.9, 1.4, 0.0, 2.2, 0.0, 0.0, 1.1, 0.6, 1.9, 0.3});
  const auto J = build_l1(derive(f), 1, 8);
  for (double lam = -1.95; lam < -0.01; lam += 0.01) EXPECT_EQ(phase_count(J, lam), count_above(J, lam)) << lam;
  JacobiMatrix one{0, 0, {-0.7}, {}};
  EXPECT_EQ(phase_count(one, -0.8), 1u);
  EXPECT_EQ(phase_count(one, -0.6), 0u);
}

TEST(Counting, ZeroFieldIsMinusIdentity) {
  const auto J = build_l1(homogeneous(0.0, 0, 6), 1, 5);
  for (double e : eigensolve(J, false).eigenvalues) EXPECT_EQ(e, -1.0);
}

TEST(RegularBondBound, CountDominatesRegularBonds) {
  const auto grid = lambda_grid();
  for (std::uint64_t m = 0; m < 200; ++m) {
    const Site r = 100;
    const auto d = derive(sample_realization(TailModel::exponential(1.5), r, 42, m));
    const auto J = build_l1(d, -r, r);
    for (double lam : grid) EXPECT_GE(count_above(J, lam), regular_bond_count(d, lam, -r, r));
  }
}

TEST(RegularBondFrequency, RegularBondFrequencyScalesWithTailSquared) {
  const auto model = TailModel::exponential(2);
  const double c = 0.5;
  const int n = 200000;
  Stream s(17, 0);
  const auto d = derive(sample_couplings(model, 0, n, s));
  double p0 = 1.0;
  for (double mag : {0.3, 0.2, 0.1, 0.05}) {
    int hits = 0, total = 0;
    for (Site x = 1; x + 1 <= n; x += 2, ++total) hits += d.C(x) + d.one_minus_C(x + 1) < mag;
    const double freq = static_cast<double>(hits) / total;
    const double tail = tail_probability(model, 0.5 * std::log(1 / (c * mag)));
    p0 = std::min(p0, freq / (tail * tail));
    RecordProperty("ratio_" + std::to_string(mag), std::to_string(freq / (tail * tail)));
  }
  EXPECT_GT(p0, 0.0);
  EXPECT_LE(p0, 1.0);
}

TEST(Ids, TrivialAndBandEdge) {
  const std::vector<double> lams = {-3.0, -0.2, -0.1};
  const auto model = TailModel::uniform_bounded(0.5);
  ASSERT_LT(-1 + std::tanh(1.0), -0.2);
  const auto curve = ids_estimate(model, lams, 50, 20, 3);
  EXPECT_EQ(curve.n_hat[0], 1.0);
  EXPECT_EQ(curve.std_error[0], 0.0);
  EXPECT_EQ(curve.n_hat[1], 0.0);
  EXPECT_EQ(curve.n_hat[2], 0.0);
  EXPECT_EQ(curve.total_counts[0], 20u * 101u);
}

TEST(Ids, MonotoneAndBounded) {
  std::vector<double> lams;
  for (double l = -0.9; l < -0.01; l *= 0.8) lams.push_back(l);
  const auto curve = ids_estimate(TailModel::exponential(3), lams, 200, 50, 9);
  for (std::size_t g = 0; g < lams.size(); ++g) {
    EXPECT_GE(curve.n_hat[g], 0.0);
    EXPECT_LE(curve.n_hat[g], 1.0);
    if (g > 0) {
      EXPECT_LE(curve.n_hat[g], curve.n_hat[g - 1]);
    }
  }
}

TEST(Ids, DeterministicAcrossThreads) {
  const std::vector<double> lams = {-0.3, -0.1};
  const auto a = ids_estimate(TailModel::exponential(3), lams, 100, 30, 5, 1);
  const auto b = ids_estimate(TailModel::exponential(3), lams, 100, 30, 5, 4);
  EXPECT_EQ(a.n_hat, b.n_hat);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.total_counts, b.total_counts);
}

TEST(Ids, Preconditions) {
  const std::vector<double> lams = {-0.3};
  EXPECT_THROW(ids_estimate(TailModel::exponential(3), lams, 100, 1, 5), std::invalid_argument);
  EXPECT_THROW(ids_estimate(TailModel::exponential(3), lams, 9, 10, 5), std::invalid_argument);
}

TEST(MeanSe, Examples) {
  const std::vector<double> xs = {1, 2, 3, 4};
  const auto ms = mean_and_se(xs);
  EXPECT_DOUBLE_EQ(ms.mean, 2.5);
  EXPECT_NEAR(ms.se, std::sqrt(5.0 / 3 / 4), 1e-15);
  EXPECT_TRUE(std::isnan(mean_and_se(std::vector<double>{1.0}).se));
}

TEST(Classification, Examples) {
  EXPECT_NEAR(gamma_level(-0.01), 1.151293, 1e-6);
  EXPECT_THROW(gamma_level(-1.0), std::domain_error);
  EXPECT_THROW(gamma_level(0.1), std::domain_error);

  CouplingField calm(-3, std::vector<double>(7, 0.5));
  auto cls = classify_sites(calm, -0.01);
  EXPECT_TRUE(cls.strong.empty());
  EXPECT_EQ(cls.quiet, (std::vector<Site>{-2, -1, 0, 1, 2}));

  CouplingField spike(-3, {0.5, 0.5, 0.5, 3.0, 0.5, 0.5, 0.5});
  cls = classify_sites(spike, -0.01);
  EXPECT_EQ(cls.strong, (std::vector<Site>{0}));
  EXPECT_EQ(cls.quiet, (std::vector<Site>{-2, 2}));
}

TEST(Classification, QuietSitesAvoidStrongNeighborhood) {
  for (std::uint64_t m = 0; m < 50; ++m) {
    const auto f = sample_realization(TailModel::exponential(2), 50, 6, m);
    const auto cls = classify_sites(f, -0.05);
    for (Site x : cls.quiet)
      for (Site a : cls.strong) EXPECT_GT(std::abs(x - a), 1);
    EXPECT_LE(cls.strong.size() + cls.quiet.size(), f.size());
  }
}

TEST(QuietEdge, EdgeBoundExamples) {
  EXPECT_NEAR(quiet_edge_bound(-0.01), -0.0198020, 1e-7);
  EXPECT_DOUBLE_EQ(quiet_edge_bound(-1.0 / 3), -0.5);
  for (double mag : {0.01, 0.1, 0.5}) EXPECT_NEAR(quiet_edge_bound(-mag), -1 + std::tanh(2 * gamma_level(-mag)), 1e-14);
}

TEST(QuietEdge, ZeroFieldSubmatrix) {
  const auto f = CouplingField(0, std::vector<double>(10, 0.0));
  const auto J = build_l1(derive(f), 1, 8);
  const auto cls = classify_sites(f, -0.1);
  const auto top = b0_submatrix_top(J, cls);
  ASSERT_TRUE(top.has_value());
  EXPECT_DOUBLE_EQ(*top, -1.0);
}

TEST(QuietEdge, EmptyQuietSetIsNoOp) {
  const auto f = CouplingField(0, std::vector<double>(6, 5.0));
  const auto J = build_l1(derive(f), 1, 4);
  EXPECT_FALSE(b0_submatrix_top(J, classify_sites(f, -0.1)).has_value());
}

TEST(QuietEdge, QuietBlockBelowEdgeAndCountBound) {
  for (std::uint64_t m = 0; m < 50; ++m) {
    const Site r = 100;
    const auto f = sample_realization(TailModel::exponential(3), r, 12, m);
    const auto J = build_l1(derive(f), -r, r);
    for (double lam : {-0.01, -0.05, -0.2}) {
      const auto cls = classify_sites(f, lam);
      const auto top = b0_submatrix_top(J, cls);
      std::size_t quiet_in_window = 0;
      for (Site x : cls.quiet) quiet_in_window += x >= -r && x <= r;
      if (top) {
        EXPECT_LE(*top, quiet_edge_bound(lam) + 1e-10);
      }
      EXPECT_LE(count_above(J, lam), J.size() - quiet_in_window);
    }
  }
}
