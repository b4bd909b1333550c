/*
 * Copyright 2026 The zsnas Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "zsnas/error.hpp"
#include "zsnas/proxies.hpp"

namespace zsnas {
namespace {

MacroConfig desk() {
  MacroConfig m;
  m.cells_per_stage = 1;
  m.input = {3, 8, 8};
  return m;
}

ProxyConfig small_cfg() {
  ProxyConfig c;
  c.batch_size = 6;
  c.ntk_repeats = 2;
  c.lr_samples = 64;
  c.seed = 17;
  return c;
}

Network two_layer_conv_relu(std::uint64_t seed) {
  NetworkBuilder b({2, 4, 4});
  int x = b.conv2d(b.input(), 3, 3, 1, 1, "c1");
  x = b.relu(x, "r1");
  x = b.conv2d(x, 2, 3, 1, 1, "c2");
  x = b.global_avg_pool(x, "gap");
  b.linear(x, 3, "fc");
  return init_params(std::move(b).build(), seed);
}

TEST(Ntk, ScalarLinearKernel) {
  NetworkBuilder b({1, 1, 1});
  b.linear(b.input(), 1, "w", /*bias=*/false);
  Network net = std::move(b).build();
  net.mutable_params()[0] = -1.7;
  const SquareMatrix theta = ntk_matrix(net, Tensor({2, 1}, std::vector<double>{2, 3}));
  EXPECT_EQ(theta(0, 0), 4.0);
  EXPECT_EQ(theta(0, 1), 6.0);
  EXPECT_EQ(theta(1, 0), 6.0);
  EXPECT_EQ(theta(1, 1), 9.0);
  EXPECT_EQ(condition_number(theta), kKappaSentinel);
}

TEST(Ntk, RejectsSingleSample) {
  const Network net = two_layer_conv_relu(1);
  EXPECT_THROW(ntk_matrix(net, oracle::gaussian({1, 2, 4, 4}, 1)), Error);
}

TEST(Ntk, DuplicatedSampleDuplicatesRowAndGivesSentinel) {
  const Network net = two_layer_conv_relu(2);
  Tensor x = oracle::gaussian({4, 2, 4, 4}, 3);
  const std::size_t per = 32;
  for (std::size_t i = 0; i < per; ++i) x[3 * per + i] = x[1 * per + i];
  const auto rows = ntk_jacobian(net, x);
  EXPECT_EQ(rows[1], rows[3]);
  const SquareMatrix theta = ntk_matrix(net, x);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(theta(1, j), theta(3, j));
  EXPECT_EQ(condition_number(theta), kKappaSentinel);
}

TEST(Ntk, DegenerateLinearNetRepeatedSample) {
  NetworkBuilder b({3, 1, 1});
  b.linear(b.input(), 1, "fc");
  const Network net = init_params(std::move(b).build(), 4);
  Tensor x({3, 3});
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t i = 0; i < 3; ++i) x[n * 3 + i] = 0.5 + i;
  EXPECT_EQ(condition_number(ntk_matrix(net, x)), kKappaSentinel);
}

TEST(Ntk, MatchesFiniteDifferenceJacobian) {
  const Network net = two_layer_conv_relu(5);
  const Tensor x = oracle::gaussian({4, 2, 4, 4}, 6);
  ASSERT_GT(oracle::min_kink_distance(net, forward(net, x).tape), 1e-4);
  std::vector<std::vector<double>> fd(4);
  for (std::size_t i = 0; i < 4; ++i) {
    Tensor seed({4, 3}, 0.0);
    for (int o = 0; o < 3; ++o) seed[i * 3 + o] = 1.0;
    fd[i] = oracle::fd_param_grad(net, x, seed);
  }
  const SquareMatrix theta = ntk_matrix(net, x);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double ref = 0.0;
      for (std::size_t k = 0; k < fd[i].size(); ++k) ref += fd[i][k] * fd[j][k];
      EXPECT_LT(std::abs(theta(i, j) - ref) / std::abs(ref), 1e-3) << i << "," << j;
    }
}

TEST(Ntk, SymmetricAndPsdOnSupernets) {
  const MacroConfig m = desk();
  SupernetState st = SupernetState::full();
  Rng rng(7);
  for (int step = 0; step < 6; ++step) {
    const Network net = supernet_network(st, m, 100 + step);
    const SquareMatrix theta = ntk_matrix(net, gaussian_batch(8, m.input, 200 + step));
    EXPECT_LT(theta.max_asymmetry(), 1e-8);
    const auto eig = jacobi_eigenvalues(theta);
    EXPECT_GE(eig.values.front(), -1e-8 * eig.values.back());
    for (int k = 0; k < 4 && !st.resolved(); ++k) {
      const auto c = candidate_prunes(st);
      st = apply_prune(st, c[std::uniform_int_distribution<std::size_t>(0, c.size() - 1)(rng)]);
    }
  }
}

TEST(Ntk, KappaDeterministicAndMeanOfRepeats) {
  const CellArch a = parse_arch(
      "|nor_conv_3x3~0|+|skip_connect~0|nor_conv_1x1~1|+|none~0|avg_pool_3x3~1|nor_conv_3x3~2|");
  ProxyConfig c = small_cfg();
  c.ntk_repeats = 1;
  EXPECT_EQ(ntk_kappa(a, desk(), c).mean, ntk_kappa(a, desk(), c).mean);
  c.ntk_repeats = 3;
  const KappaResult k = ntk_kappa(a, desk(), c);
  ASSERT_EQ(k.per_repeat.size(), 3u);
  EXPECT_DOUBLE_EQ(k.mean, (k.per_repeat[0] + k.per_repeat[1] + k.per_repeat[2]) / 3.0);
  for (double v : k.per_repeat) EXPECT_GE(v, 1.0);
  c.threads = 3;
  EXPECT_EQ(ntk_kappa(a, desk(), c).per_repeat, k.per_repeat);
}

TEST(Ntk, ImageSourceDrawsDistinctPoolSamples) {
  ProxyConfig c = small_cfg();
  c.batch_size = 5;
  c.input_source = InputSource::kImageFile;
  EXPECT_THROW(c.validate(), Error);
  Tensor pool = gaussian_batch(9, {3, 8, 8}, 1);
  c.images = std::make_shared<const Tensor>(pool);
  const Tensor b = draw_ntk_batch(c, {3, 8, 8}, 2);
  ASSERT_EQ(b.dim(0), 5u);
  std::set<double> firsts;
  for (std::size_t i = 0; i < 5; ++i) {
    const double v = b[i * 192];
    bool in_pool = false;
    for (std::size_t j = 0; j < 9; ++j)
      if (pool[j * 192] == v &&
          std::equal(pool.data().begin() + j * 192, pool.data().begin() + (j + 1) * 192,
                     b.data().begin() + i * 192))
        in_pool = true;
    EXPECT_TRUE(in_pool);
    firsts.insert(v);
  }
  EXPECT_EQ(firsts.size(), 5u);
  EXPECT_THROW(draw_ntk_batch(c, {3, 4, 4}, 2), Error);
  c.batch_size = 10;
  EXPECT_THROW(draw_ntk_batch(c, {3, 8, 8}, 2), Error);
}

TEST(ImageBatch, RoundTripAndErrors) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "zsnas_batch.bin";
  Tensor t = gaussian_batch(3, {2, 4, 4}, 5);
  for (auto& v : t.data()) v = static_cast<float>(v);
  save_image_batch(path, t);
  EXPECT_EQ(std::filesystem::file_size(path), 16u + 4u * 96u);
  EXPECT_EQ(load_image_batch(path), t);
  std::filesystem::resize_file(path, 100);
  try {
    load_image_batch(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
  }
  try {
    load_image_batch(dir / "zsnas_no_such_batch.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

// Small MLP evaluated by hand: pattern codes straight from the weights.
TEST(LinearRegions, ExhaustiveSignPatternOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    NetworkBuilder b({3, 1, 1});
    int x = b.linear(b.input(), 4, "fc1");
    x = b.relu(x, "r1");
    x = b.linear(x, 3, "fc2");
    b.relu(x, "r2");
    Network net = init_params(std::move(b).build(), seed);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 0.5);
    for (auto& p : net.mutable_params()) p += normal(rng);
    ASSERT_EQ(net.relu_units(), 7u);
    const auto p = net.params();
    const Tensor in = oracle::gaussian({200, 3}, seed + 50);

    std::vector<bool> realised(1u << 7, false);
    for (std::size_t n = 0; n < 200; ++n) {
      double h[4];
      unsigned code = 0;
      for (int o = 0; o < 4; ++o) {
        double acc = p[12 + o];
        for (int i = 0; i < 3; ++i) acc += p[o * 3 + i] * in[n * 3 + i];
        if (acc > 0) code |= 1u << o;
        h[o] = acc > 0 ? acc : 0.0;
      }
      for (int o = 0; o < 3; ++o) {
        double acc = p[16 + 12 + o];
        for (int i = 0; i < 4; ++i) acc += p[16 + o * 4 + i] * h[i];
        if (acc > 0) code |= 1u << (4 + o);
      }
      realised[code] = true;
    }
    std::size_t expected = 0;
    for (unsigned code = 0; code < (1u << 7); ++code) expected += realised[code];
    EXPECT_EQ(count_distinct_patterns(net, in), expected) << seed;
    EXPECT_EQ(count_distinct_patterns(net, in, 7), expected) << seed;
  }
}

TEST(LinearRegions, ConvNetAgainstDirectSigns) {
  NetworkBuilder b({1, 2, 2});
  int x = b.conv2d(b.input(), 2, 2, 1, 0, "c1");
  b.relu(x, "r1");
  Network net = init_params(std::move(b).build(), 3);
  auto p = net.mutable_params();
  p[8] = 0.2;
  p[9] = -0.1;
  const Tensor in = oracle::gaussian({10, 1, 2, 2}, 9);
  std::set<std::pair<bool, bool>> oracle_set;
  for (std::size_t n = 0; n < 10; ++n) {
    double a = p[8], c = p[9];
    for (int i = 0; i < 4; ++i) {
      a += p[i] * in[n * 4 + i];
      c += p[4 + i] * in[n * 4 + i];
    }
    oracle_set.insert({a > 0, c > 0});
  }
  EXPECT_EQ(count_distinct_patterns(net, in), oracle_set.size());
}

TEST(LinearRegions, AllSkipIsOneRegion) {
  EXPECT_EQ(count_linear_regions(CellArch::uniform(OpKind::kSkipConnect), desk(), small_cfg()),
            1u);
  EXPECT_EQ(count_linear_regions(CellArch::uniform(OpKind::kAvgPool3x3), desk(), small_cfg()),
            1u);
}

TEST(LinearRegions, SingleSampleIsOneRegion) {
  ProxyConfig c = small_cfg();
  c.lr_samples = 1;
  EXPECT_EQ(count_linear_regions(CellArch::uniform(OpKind::kNorConv3x3), desk(), c), 1u);
}

TEST(LinearRegions, MonotoneInNestedSamples) {
  const Network net =
      build_lr_network(parse_arch("|nor_conv_1x1~0|+|skip_connect~0|none~1|+|none~0|"
                                  "nor_conv_1x1~1|skip_connect~2|"),
                       MacroConfig{16, 1, 10, {3, 4, 4}}, 3);
  const Tensor all = gaussian_batch(120, {3, 4, 4}, 8);
  std::size_t last = 0;
  for (std::size_t n : {1, 5, 20, 60, 120}) {
    std::vector<double> part(all.data().begin(), all.data().begin() + n * 48);
    const std::size_t r = count_distinct_patterns(net, Tensor({n, 3, 4, 4}, std::move(part)));
    EXPECT_GE(r, last);
    EXPECT_LE(r, n);
    last = r;
  }
}

TEST(LinearRegions, DeterministicAndBounded) {
  const CellArch a = CellArch::uniform(OpKind::kNorConv1x1);
  const ProxyConfig c = small_cfg();
  const std::size_t r = count_linear_regions(a, desk(), c);
  EXPECT_EQ(r, count_linear_regions(a, desk(), c));
  EXPECT_GE(r, 1u);
  EXPECT_LE(r, static_cast<std::size_t>(c.lr_samples));
}

TEST(Scores, FieldsAndLatencyOnlyWithTable) {
  const CellArch a = CellArch::uniform(OpKind::kNone);
  const ProxyScores s = score_arch(a, desk(), small_cfg(), nullptr);
  EXPECT_FALSE(s.latency_us.has_value());
  EXPECT_EQ(s.flops, count_flops(a, desk()).flops);
  const LatencyTable t = oracle::synthetic_table(desk(), 10, [](const LatencyKey&) { return 1.0; });
  const ProxyScores s2 = score_arch(a, desk(), small_cfg(), &t);
  ASSERT_TRUE(s2.latency_us.has_value());
  EXPECT_EQ(*s2.latency_us, estimate_latency(a, desk(), t).latency_us);
}

TEST(Scores, ConfigValidation) {
  ProxyConfig c;
  c.batch_size = 1;
  EXPECT_THROW(c.validate(), Error);
  c = ProxyConfig{};
  c.ntk_repeats = 0;
  EXPECT_THROW(c.validate(), Error);
  c = ProxyConfig{};
  c.lr_samples = 0;
  EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace zsnas
