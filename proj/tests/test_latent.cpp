#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "pcgen/errors.hpp"
#include "pcgen/latent.hpp"
#include "pcgen/training.hpp"

using namespace pcgen;

namespace {

// Independent mean-average-precision reference: brute-force pair sort per
// query, precision accumulated rank by rank.
double map_ref(const std::vector<std::vector<double>>& queries,
               const std::vector<int>& qlab,
               const std::vector<std::vector<double>>& gallery,
               const std::vector<int>& glab) {
  double total = 0.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    std::vector<std::pair<double, int>> by_dist;
    int self = -1;
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      if (self < 0 && gallery[g] == queries[q]) {
        self = static_cast<int>(g);
        continue;
      }
      double d2 = 0.0;
      for (std::size_t i = 0; i < queries[q].size(); ++i) {
        d2 += (queries[q][i] - gallery[g][i]) * (queries[q][i] - gallery[g][i]);
      }
      by_dist.emplace_back(d2, static_cast<int>(g));
    }
    std::stable_sort(by_dist.begin(), by_dist.end(),
                     [](const auto& a, const auto& b) {
                       return a.first < b.first ||
                              (a.first == b.first && a.second < b.second);
                     });
    int rel = 0;
    for (const auto& [d, g] : by_dist) {
      rel += glab[static_cast<std::size_t>(g)] == qlab[q];
    }
    if (rel == 0) {
      continue;
    }
    double ap = 0.0;
    int hits = 0;
    for (std::size_t r = 0; r < by_dist.size(); ++r) {
      if (glab[static_cast<std::size_t>(by_dist[r].second)] == qlab[q]) {
        ++hits;
        ap += static_cast<double>(hits) / static_cast<double>(r + 1);
      }
    }
    total += ap / rel;
  }
  return total / static_cast<double>(queries.size());
}

std::vector<PointCloud> random_clouds(int count, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PointCloud> out;
  for (int c = 0; c < count; ++c) {
    PointCloud cloud;
    for (int i = 0; i < n; ++i) {
      cloud.points.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                              rng.uniform(-1.0, 1.0)});
    }
    out.push_back(std::move(cloud));
  }
  return out;
}

}  // namespace

TEST_CASE("interpolate hits endpoints exactly and is affine") {
  std::vector<double> z1 = {1.0, -2.0, 0.25};
  std::vector<double> z2 = {-0.5, 4.0, 1.0 / 3.0};
  auto path = interpolate(z1, z2, 7);
  REQUIRE(path.size() == 7);
  CHECK(path.front() == z1);
  CHECK(path.back() == z2);
  for (std::size_t k = 1; k + 1 < path.size(); ++k) {
    for (std::size_t i = 0; i < z1.size(); ++i) {
      const double second_diff =
          path[k + 1][i] - 2.0 * path[k][i] + path[k - 1][i];
      CHECK(std::abs(second_diff) < 1e-12);
    }
  }
  auto mid = interpolate(z1, z2, 3);
  for (std::size_t i = 0; i < z1.size(); ++i) {
    CHECK(mid[1][i] == doctest::Approx((z1[i] + z2[i]) / 2.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(interpolate(z1, {1.0}, 3), shape_error);
  CHECK_THROWS_AS(interpolate(z1, z2, 1), config_error);
}

TEST_CASE("interpolated codes decode to finite normalized clouds") {
  TrainConfig cfg;
  cfg.mode = TrainMode::aae;
  cfg.recon = ReconKind::chamfer;
  cfg.prior = gaussian_prior(4);
  cfg.d_steps_per_g = 1;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  cfg.seed = 99;
  cfg.encoder.conv_widths = {6, 8};
  cfg.encoder.feature_dim = 8;
  cfg.encoder.latent_dim = 4;
  cfg.encoder.variational = true;
  cfg.generator.hidden = {8, 8, 8, 8};
  cfg.generator.input_dim = 4;
  cfg.generator.n_points = 16;
  cfg.discriminator.hidden = {8, 6, 6, 4};
  cfg.discriminator.input_dim = 4;
  ModelBundle b = make_bundle(cfg);
  std::vector<PointCloud> clouds = random_clouds(4, 16, 5);
  train(b, clouds);

  LatentCode c1 = b.encoder->encode(clouds[0]);
  LatentCode c2 = b.encoder->encode(clouds[1]);
  for (const auto& z : interpolate(c1.mu, c2.mu, 5)) {
    PointCloud decoded = normalize(b.generator->decode(z));
    for (const Point3& p : decoded.points) {
      for (double v : p) {
        CHECK(std::isfinite(v));
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
      }
    }
  }
  // arithmetic result decodes finite as well
  PointCloud combo = b.generator->decode(arithmetic(c1.mu, c2.mu, c1.mu));
  for (const Point3& p : combo.points) {
    for (double v : p) {
      CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("arithmetic is elementwise add-subtract") {
  std::vector<double> base = {1.0, 2.0, 3.0};
  std::vector<double> plus = {0.5, -1.0, 4.0};
  CHECK(arithmetic(base, plus, plus) == base);
  std::vector<double> zeros = {0.0, 0.0, 0.0};
  std::vector<double> minus = {1.0, 1.0, 1.0};
  std::vector<double> expect = {-0.5, -2.0, 3.0};
  CHECK(arithmetic(zeros, plus, minus) == expect);
  CHECK_THROWS_AS(arithmetic(base, plus, {1.0}), shape_error);
}

TEST_CASE("binarize thresholds with the >= convention") {
  BinaryCode c = binarize({0.9, 0.1});
  CHECK(c.bits == std::vector<int>{1, 0});
  CHECK(binarize({0.5}).bits == std::vector<int>{1});  // exactly-at-threshold
  // AE variant: threshold 0 on signed codes gives sign bits.
  CHECK(binarize({-0.3, 0.0, 0.2}, 0.0).bits == std::vector<int>{0, 1, 1});
  // Idempotence at the default threshold.
  std::vector<double> as_floats(c.bits.begin(), c.bits.end());
  CHECK(binarize(as_floats) == c);
  CHECK_THROWS_AS(binarize({std::numeric_limits<double>::quiet_NaN()}),
                  numeric_error);
}

TEST_CASE("retrieve ranks by distance with index tie-breaks") {
  std::vector<std::vector<double>> gallery = {{3.0}, {1.0}, {2.0}, {1.0}};
  CHECK(retrieve({0.0}, gallery, 4) == std::vector<int>{1, 3, 2, 0});
  CHECK(retrieve({0.0}, gallery, 2) == std::vector<int>{1, 3});
  CHECK(retrieve({0.0}, gallery, 99) == std::vector<int>{1, 3, 2, 0});
  CHECK_THROWS_AS(retrieve({0.0}, gallery, 0), config_error);
  CHECK_THROWS_AS(retrieve({0.0}, {}, 1), config_error);
  CHECK_THROWS_AS(retrieve({0.0, 1.0}, gallery, 1), shape_error);

  std::vector<BinaryCode> bg = {BinaryCode{{1, 1, 0}}, BinaryCode{{1, 0, 0}},
                                BinaryCode{{0, 1, 0}}, BinaryCode{{0, 0, 0}}};
  BinaryCode q{{0, 0, 0}};
  CHECK(retrieve(q, bg, 4) == std::vector<int>{3, 1, 2, 0});
}

TEST_CASE("retrieval_map handles self-exclusion and degenerate labels") {
  // Two-copy setup: one copy is excluded as the query itself, the other is
  // the rank-1 relevant item -> AP 1.
  std::vector<std::vector<double>> q = {{0.7, 0.1}};
  std::vector<std::vector<double>> two_copies = {{0.7, 0.1}, {0.7, 0.1}};
  CHECK(retrieval_map(q, {4}, two_copies, {4, 4}) == 1.0);
  // All gallery labels wrong -> 0.
  CHECK(retrieval_map(q, {4}, two_copies, {5, 5}) == 0.0);
}

TEST_CASE("retrieval_map matches the reference oracle on a 6-item gallery") {
  // 1-D codes: distances from each query are easy to read off by hand.
  std::vector<std::vector<double>> gallery = {{0.0}, {1.0}, {2.0},
                                              {3.0}, {4.0}, {5.0}};
  std::vector<int> glab = {0, 1, 0, 1, 0, 1};
  std::vector<std::vector<double>> queries = {{0.2}, {4.9}};
  std::vector<int> qlab = {0, 1};
  // Query 0 (label 0): ranking 0,1,2,3,4,5 -> relevant at ranks 1,3,5
  //   AP = (1/1 + 2/3 + 3/5)/3. Query 1 (label 1): ranking 5,4,3,2,1,0 ->
  //   relevant at ranks 1,3,5 -> same AP.
  const double expect_ap = (1.0 + 2.0 / 3.0 + 3.0 / 5.0) / 3.0;
  const double got = retrieval_map(queries, qlab, gallery, glab);
  CHECK(got == doctest::Approx(expect_ap).epsilon(1e-12));
  CHECK(got == doctest::Approx(map_ref(queries, qlab, gallery, glab))
                   .epsilon(1e-12));

  // Richer 2-D case against the oracle only.
  std::vector<std::vector<double>> g2 = {{0.0, 0.0}, {1.0, 0.5}, {0.2, 0.9},
                                         {2.0, 2.0}, {1.5, 0.1}, {0.4, 0.4}};
  std::vector<int> g2lab = {0, 1, 2, 0, 1, 0};
  std::vector<std::vector<double>> q2 = {{0.1, 0.1}, {1.4, 0.2}, {0.3, 0.8}};
  std::vector<int> q2lab = {0, 1, 2};
  CHECK(retrieval_map(q2, q2lab, g2, g2lab) ==
        doctest::Approx(map_ref(q2, q2lab, g2, g2lab)).epsilon(1e-12));
}

TEST_CASE("retrieval ranking is invariant under monotone transforms") {
  Rng rng(17);
  std::vector<std::vector<double>> gallery, queries;
  std::vector<int> glab, qlab;
  for (int i = 0; i < 12; ++i) {
    std::vector<double> code(4);
    for (double& v : code) {
      v = rng.uniform(-1.0, 1.0);
    }
    gallery.push_back(code);
    glab.push_back(i % 3);
  }
  for (int i = 0; i < 5; ++i) {
    std::vector<double> code(4);
    for (double& v : code) {
      v = rng.uniform(-1.0, 1.0);
    }
    queries.push_back(code);
    qlab.push_back(i % 3);
  }
  // Scaling all codes scales every pairwise distance monotonically.
  auto scaled = [](const std::vector<std::vector<double>>& codes) {
    std::vector<std::vector<double>> out = codes;
    for (auto& c : out) {
      for (double& v : c) {
        v *= 3.0;
      }
    }
    return out;
  };
  CHECK(retrieval_map(queries, qlab, gallery, glab) ==
        retrieval_map(scaled(queries), qlab, scaled(gallery), glab));
  CHECK(retrieve(queries[0], gallery, 12) ==
        retrieve(scaled(queries)[0], scaled(gallery), 12));

  // Hamming: triplicating bits triples every distance.
  std::vector<BinaryCode> bgal, bq;
  std::vector<BinaryCode> bgal3, bq3;
  for (const auto& c : gallery) {
    BinaryCode b = binarize(c, 0.0);
    BinaryCode b3;
    for (int bit : b.bits) {
      b3.bits.insert(b3.bits.end(), {bit, bit, bit});
    }
    bgal.push_back(b);
    bgal3.push_back(b3);
  }
  for (const auto& c : queries) {
    BinaryCode b = binarize(c, 0.0);
    BinaryCode b3;
    for (int bit : b.bits) {
      b3.bits.insert(b3.bits.end(), {bit, bit, bit});
    }
    bq.push_back(b);
    bq3.push_back(b3);
  }
  CHECK(retrieval_map(bq, qlab, bgal, glab) ==
        retrieval_map(bq3, qlab, bgal3, glab));
}

TEST_CASE("linear_probe separates a separable toy and matches chance on noise") {
  Rng rng(23);
  std::vector<std::vector<double>> train, test;
  std::vector<int> train_lab, test_lab;
  for (int i = 0; i < 40; ++i) {
    const int lab = i % 2;
    const double cx = lab == 0 ? -1.0 : 1.0;
    train.push_back({cx + rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)});
    train_lab.push_back(lab);
  }
  for (int i = 0; i < 20; ++i) {
    const int lab = i % 2;
    const double cx = lab == 0 ? -1.0 : 1.0;
    test.push_back({cx + rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)});
    test_lab.push_back(lab);
  }
  CHECK(linear_probe(train, train_lab, test, test_lab) == 1.0);

  // Duplicating the training set leaves the (full-batch, mean-normalized)
  // model unchanged.
  std::vector<std::vector<double>> train2 = train;
  train2.insert(train2.end(), train.begin(), train.end());
  std::vector<int> train2_lab = train_lab;
  train2_lab.insert(train2_lab.end(), train_lab.begin(), train_lab.end());
  CHECK(linear_probe(train2, train2_lab, test, test_lab) ==
        linear_probe(train, train_lab, test, test_lab));

  // Shuffled labels: accuracy within 3 binomial sigmas of chance.
  const int C = 3;
  std::vector<std::vector<double>> ntrain, ntest;
  std::vector<int> ntrain_lab, ntest_lab;
  Rng nrng(31);
  for (int i = 0; i < 150; ++i) {
    ntrain.push_back({nrng.uniform(-1.0, 1.0), nrng.uniform(-1.0, 1.0),
                      nrng.uniform(-1.0, 1.0)});
    ntrain_lab.push_back(nrng.uniform_int(C));
  }
  for (int i = 0; i < 300; ++i) {
    ntest.push_back({nrng.uniform(-1.0, 1.0), nrng.uniform(-1.0, 1.0),
                     nrng.uniform(-1.0, 1.0)});
    ntest_lab.push_back(nrng.uniform_int(C));
  }
  const double acc = linear_probe(ntrain, ntrain_lab, ntest, ntest_lab);
  const double p = 1.0 / C;
  const double sigma = std::sqrt(p * (1.0 - p) / 300.0);
  CHECK(std::abs(acc - p) <= 3.0 * sigma);

  CHECK_THROWS_AS(linear_probe(train, std::vector<int>(40, 7), test, test_lab),
                  config_error);
  CHECK_THROWS_AS(linear_probe(train, {1}, test, test_lab), shape_error);
}

TEST_CASE("cluster_assign takes the argmax with lowest-index ties") {
  LatentCode code;
  code.mu = {0.0};
  code.y = std::vector<double>{0.0, 0.0, 0.0, 1.0};
  CHECK(cluster_assign(code) == 3);
  code.y = std::vector<double>{0.25, 0.25, 0.25, 0.25};
  CHECK(cluster_assign(code) == 0);
  code.y = std::vector<double>{0.1, 0.4, 0.4, 0.1};
  CHECK(cluster_assign(code) == 1);
  code.y.reset();
  CHECK_THROWS_AS(cluster_assign(code), config_error);
}

TEST_CASE("cluster_purity is the majority-vote fraction") {
  CHECK(cluster_purity({0, 0, 1, 1, 2}, {5, 5, 6, 6, 6}) == 1.0);
  CHECK(cluster_purity({0, 0, 0, 0}, {1, 1, 2, 3}) == 0.5);
  CHECK(cluster_purity({0, 1}, {9, 9}) == 1.0);
  CHECK_THROWS_AS(cluster_purity({0}, {1, 2}), shape_error);
  CHECK_THROWS_AS(cluster_purity({}, {}), config_error);
}

TEST_CASE("codes_to_text exports floats and bit strings") {
  std::string txt = codes_to_text(std::vector<std::vector<double>>{
      {0.5, -1.25}, {3.0, 0.0}});
  CHECK(txt == "0.5 -1.25\n3 0\n");
  std::string bits =
      codes_to_text(std::vector<BinaryCode>{BinaryCode{{1, 0, 1}},
                                            BinaryCode{{0, 0, 1}}});
  CHECK(bits == "101\n001\n");
}
