#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fblper/enumerate.hpp"
#include "fblper/path_dist.hpp"

using namespace fblper;

namespace {

BlocklengthDistribution random_dist(std::mt19937_64& gen, int grid) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(grid));
  double total = 0.0;
  for (auto& x : w) total += (x = u(gen) < 0.2 ? 0.0 : u(gen));
  const double tail = 0.3 * u(gen);
  if (total == 0.0) return BlocklengthDistribution::all_tail(grid);
  for (auto& x : w) x *= (1.0 - tail) / total;
  return {grid, w, tail};
}

double max_diff(const BlocklengthDistribution& d, const enumerate::Histogram& h) {
  double worst = std::abs(d.tail_mass() - h.tail);
  for (int m = 1; m <= d.grid_max(); ++m) worst = std::max(worst, std::abs(d.pmf(m) - h.pmf[m - 1]));
  return worst;
}

double max_diff(const BlocklengthDistribution& a, const BlocklengthDistribution& b) {
  double worst = std::abs(a.tail_mass() - b.tail_mass());
  for (int m = 1; m <= a.grid_max(); ++m) worst = std::max(worst, std::abs(a.pmf(m) - b.pmf(m)));
  return worst;
}

}  // namespace

TEST(TwoHop, PointMassesAndSymmetry) {
  const auto r = two_hop_relay_dist(BlocklengthDistribution::point_mass(400, 100),
                                    BlocklengthDistribution::point_mass(400, 150));
  EXPECT_EQ(r.pmf(250), 1.0);
  std::mt19937_64 gen(1);
  const auto a = random_dist(gen, 8), b = random_dist(gen, 8);
  EXPECT_LE(max_diff(two_hop_relay_dist(a, b), two_hop_relay_dist(b, a)), 1e-15);
  EXPECT_LE(max_diff(two_hop_relay_dist(a, b), enumerate::sum_of(a, b)), 1e-12);
}

TEST(BestRelay, Reductions) {
  std::mt19937_64 gen(2);
  const auto c = random_dist(gen, 8);
  const BlocklengthDistribution one[] = {c};
  EXPECT_LE(max_diff(best_relay_dist(one), c), 0.0);
  const BlocklengthDistribution three[] = {c, c, c};
  EXPECT_LE(max_diff(best_relay_dist(three), best_of_iid(c, 3)), 1e-15);
  EXPECT_THROW(best_relay_dist(std::span<const BlocklengthDistribution>{}), DomainError);
}

TEST(BestRelay, MatchesEnumeration) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int g = 1 + trial % 8;
    std::vector<BlocklengthDistribution> hops;
    for (int k = 0; k < 4; ++k) hops.push_back(random_dist(gen, g));
    const BlocklengthDistribution cands[] = {two_hop_relay_dist(hops[0], hops[1]),
                                             two_hop_relay_dist(hops[2], hops[3])};
    EXPECT_LE(max_diff(best_relay_dist(cands), enumerate::best_relay(hops)), 1e-12);
  }
}

TEST(BestAntenna, ReducesToTwoHopAtJ1) {
  std::mt19937_64 gen(4);
  const auto up = random_dist(gen, 8), down = random_dist(gen, 8);
  EXPECT_LE(max_diff(best_antenna_dist(up, down, 1), two_hop_relay_dist(up, down)), 0.0);
}

TEST(BestAntenna, MatchesEnumeration) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int g = 1 + trial % 8;
    const auto up = random_dist(gen, g), down = random_dist(gen, g);
    for (int j : {2, 3}) EXPECT_LE(max_diff(best_antenna_dist(up, down, j), enumerate::best_antenna(up, down, j)), 1e-12);
  }
}

TEST(BestAntenna, MoreAntennasStochasticallySmaller) {
  const auto hop = single_hop_dist_ibl(31.6, 168.0, 400);
  const auto one = best_antenna_dist(hop, hop, 1);
  const auto many = best_antenna_dist(hop, hop, 6);
  for (int m = 0; m <= 400; ++m) EXPECT_GE(many.cdf(m) + 1e-15, one.cdf(m));
}

TEST(ChosenCost, Reductions) {
  std::mt19937_64 gen(6);
  const auto d = random_dist(gen, 8);
  const auto tail = BlocklengthDistribution::all_tail(8);
  EXPECT_LE(max_diff(chosen_cost_dist(d, tail), d), 1e-16);
  EXPECT_LE(max_diff(chosen_cost_dist(tail, d), d), 1e-16);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_dist(gen, 1 + trial % 8), b = random_dist(gen, 1 + trial % 8);
    EXPECT_LE(max_diff(chosen_cost_dist(a, b), enumerate::min_of(a, b)), 1e-12);
  }
}

TEST(ChoiceProbs, RelayAllTail) {
  std::mt19937_64 gen(7);
  const auto d = random_dist(gen, 8);
  const auto c = relay_choice_probs(d, BlocklengthDistribution::all_tail(8));
  EXPECT_NEAR(c.p_direct, 1.0 - d.tail_mass(), 1e-15);
  EXPECT_EQ(c.p_relay, 0.0);
}

TEST(ChoiceProbs, MatchesEnumerationWithTiesToDirect) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int g = 1 + trial % 8;
    const auto d = random_dist(gen, g), r = random_dist(gen, g);
    double pd = 0.0, pr = 0.0, both = 0.0;
    enumerate::joint({d, r}, [&](const std::vector<int>& v, double p) {
      if (v[0] > g && v[1] > g) {
        both += p;
      } else if (v[1] < v[0]) {
        pr += p;
      } else {
        pd += p;
      }
    });
    const auto c = relay_choice_probs(d, r);
    EXPECT_NEAR(c.p_direct, pd, 1e-12);
    EXPECT_NEAR(c.p_relay, pr, 1e-12);
    EXPECT_NEAR(c.p_both_tail, both, 1e-12);
  }
}

TEST(ChoiceProbs, SymmetricOnFineGrid) {
  const auto a = single_hop_dist_ibl(10.0, 2000.0, 20000);
  const auto c = relay_choice_probs(a, a);
  // ties go to the direct path, so the split is only nearly even
  EXPECT_NEAR(c.p_direct, c.p_relay, 2e-3);
  EXPECT_GE(c.p_direct, c.p_relay);
}

TEST(Topology, HomogeneousAndMatrix) {
  const auto h = TopologySnr::homogeneous(3, 20.0);
  EXPECT_TRUE(h.is_homogeneous());
  EXPECT_EQ(h.link(1, 2), 20.0);
  EXPECT_EQ(h.ap_terminal(3), 20.0);
  EXPECT_THROW(h.link(1, 1), DomainError);
  EXPECT_THROW(h.link(0, 4), DomainError);

  std::vector<double> m(9, 5.0);
  m[1] = m[3] = 7.0;
  const auto t = TopologySnr::from_matrix(2, m);
  EXPECT_FALSE(t.is_homogeneous());
  EXPECT_EQ(t.link(0, 1), 7.0);
  m[1] = 8.0;
  EXPECT_THROW(TopologySnr::from_matrix(2, m), DomainError);
  EXPECT_THROW(TopologySnr::from_matrix(2, std::vector<double>(8, 1.0)), DomainError);
}
