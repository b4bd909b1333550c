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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Criterion 9 needs a benchmark accuracy file named by ZSNAS_BENCH_FILE
// (JSON lines with "arch" and "accuracy") and is skipped without it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "zsnas/bench.hpp"
#include "zsnas/error.hpp"
#include "zsnas/parallel.hpp"
#include "zsnas/proxies.hpp"
#include "zsnas/search.hpp"
#include "zsnas/serialize.hpp"

namespace zsnas {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed sub-checks; the criterion passes when none failed.
struct Check {
  std::vector<std::string> failures;
  std::ostringstream info;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  int failed = 0;
};

MacroConfig desk() {
  MacroConfig m;
  m.cells_per_stage = 1;
  m.input = {3, 8, 8};
  return m;
}

MacroConfig tiny_macro() {
  MacroConfig m;
  m.stem_channels = 4;
  m.cells_per_stage = 1;
  m.input = {3, 4, 4};
  return m;
}

SearchConfig tiny_search() {
  SearchConfig c;
  c.macro = tiny_macro();
  c.proxy.batch_size = 4;
  c.proxy.ntk_repeats = 1;
  c.proxy.lr_samples = 24;
  c.proxy.lr_input = {3, 4, 4};
  c.proxy.seed = 5;
  return c;
}

CellArch random_arch(Rng& rng) {
  return CellArch::from_index(std::uniform_int_distribution<std::size_t>(0, kSpaceSize - 1)(rng));
}

Tensor input_for(const Network& net, std::size_t batch, std::uint64_t seed) {
  const FeatureShape s = net.input_shape();
  return oracle::gaussian({batch, static_cast<std::size_t>(s.channels),
                           static_cast<std::size_t>(s.height), static_cast<std::size_t>(s.width)},
                          seed);
}

// ---- 1: gradients -------------------------------------------------------

Network with_input(FeatureShape in, const std::function<void(NetworkBuilder&)>& body) {
  NetworkBuilder b(in);
  body(b);
  return std::move(b).build();
}

std::vector<std::pair<std::string, Network>> primitives() {
  std::vector<std::pair<std::string, Network>> out;
  out.emplace_back("conv", with_input({2, 5, 5}, [](NetworkBuilder& b) {
                     b.conv2d(b.input(), 3, 3, 1, 1, "conv");
                   }));
  out.emplace_back("conv_s2", with_input({2, 6, 5}, [](NetworkBuilder& b) {
                     b.conv2d(b.input(), 3, 3, 2, 1, "conv");
                   }));
  out.emplace_back("conv1x1", with_input({3, 4, 4}, [](NetworkBuilder& b) {
                     b.conv2d(b.input(), 2, 1, 1, 0, "conv");
                   }));
  out.emplace_back("relu", with_input({2, 4, 4}, [](NetworkBuilder& b) {
                     int x = b.relu(b.conv2d(b.input(), 3, 3, 1, 1, "conv"), "relu");
                     b.conv2d(x, 2, 1, 1, 0, "mix");
                   }));
  out.emplace_back("avg_pool", with_input({2, 5, 5}, [](NetworkBuilder& b) {
                     b.avg_pool(b.conv2d(b.input(), 2, 3, 1, 1, "conv"), 3, 1, 1, "pool");
                   }));
  out.emplace_back("avg_pool_s2", with_input({2, 6, 6}, [](NetworkBuilder& b) {
                     b.avg_pool(b.conv2d(b.input(), 2, 1, 1, 0, "conv"), 2, 2, 0, "pool");
                   }));
  out.emplace_back("global_avg_pool", with_input({2, 4, 3}, [](NetworkBuilder& b) {
                     b.global_avg_pool(b.conv2d(b.input(), 3, 3, 1, 1, "conv"), "gap");
                   }));
  out.emplace_back("linear", with_input({5, 1, 1}, [](NetworkBuilder& b) {
                     b.linear(b.input(), 3, "fc");
                   }));
  out.emplace_back("sum", with_input({2, 4, 4}, [](NetworkBuilder& b) {
                     int a = b.conv2d(b.input(), 2, 3, 1, 1, "a");
                     int c = b.conv2d(b.input(), 2, 1, 1, 0, "c");
                     b.sum({a, c, b.input()}, {0.5, -1.5, 1.0}, {2, 4, 4}, "sum");
                   }));
  return out;
}

void criterion_gradients(Check& c) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int cases = 0;
  for (auto& [name, proto] : primitives()) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Network net = init_params(proto, seed);
      Rng rng(seed + 1000);
      std::normal_distribution<double> normal(0.0, 0.1);
      for (auto& p : net.mutable_params()) p += normal(rng);
      const Tensor x = input_for(net, 2, seed + 1);
      const ForwardResult fr = forward(net, x);
      c.expect(oracle::min_kink_distance(net, fr.tape) > 1e-4,
               name + " seed " + std::to_string(seed) + " too close to a ReLU kink");
      const Tensor g_out = oracle::gaussian(fr.output.shape(), seed + 2);
      const Gradients g = backward(net, fr.tape, g_out);
      const double ep = oracle::max_rel_err(g.params, oracle::fd_param_grad(net, x, g_out));
      const double ex = oracle::max_rel_err(g.input.data(), oracle::fd_input_grad(net, x, g_out));
      worst = std::max({worst, ep, ex});
      c.expect(ep < 1e-4 && ex < 1e-4, name + " seed " + std::to_string(seed));
      ++cases;
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "gradient suite took " + std::to_string(secs) + " s");
  c.info << cases << " cases, max rel err " << worst << ", " << secs << " s";
}

// ---- 2: NTK -------------------------------------------------------------

Network two_layer(std::uint64_t seed) {
  return init_params(with_input({2, 4, 4},
                                [](NetworkBuilder& b) {
                                  int x = b.relu(b.conv2d(b.input(), 3, 3, 1, 1, "c1"), "r1");
                                  x = b.global_avg_pool(b.conv2d(x, 2, 3, 1, 1, "c2"), "gap");
                                  b.linear(x, 3, "fc");
                                }),
                     seed);
}

void criterion_ntk(Check& c) {
  const MacroConfig m = desk();
  Rng rng(7);
  double worst_asym = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    SupernetState st = SupernetState::full();
    const int prunes = trial * 3;
    for (int k = 0; k < prunes && !st.resolved(); ++k) {
      const auto cands = candidate_prunes(st);
      st = apply_prune(st, cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)]);
    }
    const SquareMatrix theta =
        ntk_matrix(supernet_network(st, m, 100 + trial), gaussian_batch(8, m.input, 200 + trial));
    worst_asym = std::max(worst_asym, theta.max_asymmetry());
    c.expect(theta.max_asymmetry() < 1e-8, "asymmetric kernel");
    const auto eig = jacobi_eigenvalues(theta);
    c.expect(eig.values.front() >= -1e-8 * eig.values.back(), "kernel not PSD");
  }

  const Network net = two_layer(2);
  Tensor dup = oracle::gaussian({4, 2, 4, 4}, 3);
  for (std::size_t i = 0; i < 32; ++i) dup[3 * 32 + i] = dup[32 + i];
  c.expect(condition_number(ntk_matrix(net, dup)) == kKappaSentinel,
           "duplicate sample did not give the sentinel");

  const Network fd_net = two_layer(5);
  const Tensor x = oracle::gaussian({4, 2, 4, 4}, 6);
  c.expect(oracle::min_kink_distance(fd_net, forward(fd_net, x).tape) > 1e-4, "kink too close");
  std::vector<std::vector<double>> rows(4);
  for (std::size_t i = 0; i < 4; ++i) {
    Tensor seed({4, 3}, 0.0);
    for (int o = 0; o < 3; ++o) seed[i * 3 + o] = 1.0;
    rows[i] = oracle::fd_param_grad(fd_net, x, seed);
  }
  const SquareMatrix theta = ntk_matrix(fd_net, x);
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double ref = 0.0;
      for (std::size_t k = 0; k < rows[i].size(); ++k) ref += rows[i][k] * rows[j][k];
      worst = std::max(worst, std::abs(theta(i, j) - ref) / std::abs(ref));
    }
  c.expect(worst < 1e-3, "NTK vs finite-difference Jacobian rel err " + std::to_string(worst));
  c.info << "max asymmetry " << worst_asym << ", FD rel err " << worst;
}

// ---- 3: eigensolver -----------------------------------------------------

void criterion_eigen(Check& c) {
  c.expect(condition_number(SquareMatrix::identity(5)) == 1.0, "kappa(I) != 1");
  const double k9 = condition_number(SquareMatrix::diagonal({9.0, 1.0}));
  c.expect(std::abs(k9 - 9.0) < 1e-10, "kappa(diag(9,1)) = " + std::to_string(k9));
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Tensor g = oracle::gaussian({32, 32}, seed + 40);
    SquareMatrix a(32);
    for (std::size_t i = 0; i < 32; ++i)
      for (std::size_t j = 0; j < 32; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 32; ++k) s += g[i * 32 + k] * g[j * 32 + k];
        a(i, j) = s / 32.0 + (i == j ? 0.1 : 0.0);
      }
    const auto eig = jacobi_eigenvalues(a);
    const double hi = oracle::power_lambda_max(a);
    const double lo = oracle::power_lambda_min(a, hi);
    const double e = std::max(std::abs(eig.values.back() - hi) / hi,
                              std::abs(eig.values.front() - lo) / lo);
    worst = std::max(worst, e);
    c.expect(e < 1e-6, "seed " + std::to_string(seed) + " rel err " + std::to_string(e));
  }
  c.info << "8 random 32x32 matrices, max rel err " << worst;
}

// ---- 4: linear regions --------------------------------------------------

void criterion_linear_regions(Check& c) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Network net = init_params(with_input({3, 1, 1},
                                         [](NetworkBuilder& b) {
                                           int x = b.relu(b.linear(b.input(), 4, "fc1"), "r1");
                                           b.relu(b.linear(x, 3, "fc2"), "r2");
                                         }),
                              seed);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 0.5);
    for (auto& p : net.mutable_params()) p += normal(rng);
    const auto p = net.params();
    const Tensor in = oracle::gaussian({200, 3}, seed + 50);
    std::set<unsigned> codes;
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
        double acc = p[28 + o];
        for (int i = 0; i < 4; ++i) acc += p[16 + o * 4 + i] * h[i];
        if (acc > 0) code |= 1u << (4 + o);
      }
      codes.insert(code);
    }
    c.expect(net.relu_units() <= 10, "oracle net too large");
    c.expect(count_distinct_patterns(net, in) == codes.size(),
             "MLP seed " + std::to_string(seed) + " disagrees with sign oracle");
  }
  ProxyConfig pc;
  pc.lr_samples = 64;
  pc.seed = 17;
  const std::size_t skip = count_linear_regions(CellArch::uniform(OpKind::kSkipConnect), desk(), pc);
  c.expect(skip == 1, "all-skip R = " + std::to_string(skip));
  c.info << "20 exhaustive oracle nets, all-skip R = " << skip;
}

// ---- 5: FLOPs -----------------------------------------------------------

void criterion_flops(Check& c) {
  auto ops = CellArch{}.ops();
  ops[0] = OpKind::kNorConv3x3;
  double single = -1.0;
  for (const auto& r : count_flops(CellArch(ops), MacroConfig{}).records)
    if (r.layer_id == "s0.c0.e01.nor_conv_3x3") single = r.flops;
  c.expect(single == 4718592.0, "single conv FLOPs " + std::to_string(single));

  Rng rng(3);
  for (const MacroConfig& m : {desk(), MacroConfig{}}) {
    const double lo = count_flops(CellArch::uniform(OpKind::kNone), m).flops;
    const double hi = count_flops(CellArch::uniform(OpKind::kNorConv3x3), m).flops;
    for (int i = 0; i < 100; ++i) {
      const double f = count_flops(random_arch(rng), m).flops;
      c.expect(lo <= f && f <= hi, "arch outside the all-none/all-conv3x3 bounds");
    }
  }
  const MacroConfig full;
  const double lo = count_flops(CellArch::uniform(OpKind::kNone), full).flops;
  const double hi = count_flops(CellArch::uniform(OpKind::kNorConv3x3), full).flops;
  for (double ref : {51.04e6, 188.66e6})
    c.expect(lo <= ref && ref <= hi, "envelope misses " + std::to_string(ref));
  c.info << "single conv " << single << ", envelope [" << lo / 1e6 << "M, " << hi / 1e6 << "M]";
}

// ---- 6: latency ---------------------------------------------------------

void criterion_latency(Check& c) {
  Rng rng(4);
  std::uniform_int_distribution<int> price(0, 5000);
  for (const MacroConfig& m : {desk(), MacroConfig{}}) {
    const LatencyTable t =
        oracle::synthetic_table(m, 250.0, [&](const LatencyKey&) { return price(rng) / 4.0; });
    for (int i = 0; i < 100; ++i) {
      const CellArch a = random_arch(rng);
      double hand = t.lookup({"stem", 3, m.stem_channels, m.input.height, m.input.width, 1});
      for (int s = 0; s < MacroConfig::kStages; ++s) {
        const int ch = m.stage_channels(s), h = m.stage_height(s), w = m.stage_width(s);
        if (s > 0) hand += t.lookup({"reduction", ch / 2, ch, 2 * h, 2 * w, 2});
        for (int cell = 0; cell < m.cells_per_stage; ++cell)
          for (int e = 0; e < kNumEdges; ++e) hand += t.lookup({op_name(a.op(e)), ch, ch, h, w, 1});
      }
      hand += t.lookup({"classifier", 4 * m.stem_channels, m.num_classes, m.stage_height(2),
                        m.stage_width(2), 1});
      hand += t.overhead_us();
      c.expect(estimate_latency(a, m, t).latency_us - hand == 0.0, "additive reconstruction");
    }
  }

  const MacroConfig m = desk();
  std::uniform_real_distribution<double> uprice(0.0, 100.0);
  for (int trial = 0; trial < 60; ++trial) {
    const LatencyTable t = oracle::synthetic_table(m, 7.5, [&](const LatencyKey&) { return uprice(rng); });
    std::array<std::vector<OpKind>, kNumEdges> sets;
    const CellArch base = random_arch(rng);
    for (int e = 0; e < kNumEdges; ++e) sets[e] = {base.op(e)};
    std::vector<int> edges = {0, 1, 2, 3, 4, 5};
    std::shuffle(edges.begin(), edges.end(), rng);
    for (int k = 0; k < 1 + trial % 3; ++k)
      for (OpKind op : kAllOps)
        if (op != base.op(edges[k]) && std::bernoulli_distribution(0.6)(rng))
          sets[edges[k]].push_back(op);
    const SupernetState st = SupernetState::from_sets(sets);
    c.expect(min_completion_latency(st, m, t) == oracle::brute_min_latency(st, m, t),
             "min completion differs from brute force");
  }
  for (int trial = 0; trial < 20; ++trial) {
    const LatencyTable t = oracle::synthetic_table(m, 1.0, [&](const LatencyKey&) { return uprice(rng); });
    SupernetState st = SupernetState::full();
    double last = min_completion_latency(st, m, t);
    while (!st.resolved()) {
      const auto cands = candidate_prunes(st);
      st = apply_prune(st, cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)]);
      const double now = min_completion_latency(st, m, t);
      c.expect(now >= last, "min completion decreased under pruning");
      last = now;
    }
  }
  c.info << "200 reconstructions exact, 60 toy states, 20 pruning paths";
}

// ---- 7: search ----------------------------------------------------------

void criterion_search(Check& c) {
  SearchConfig desk_cfg;
  desk_cfg.macro = desk();
  desk_cfg.proxy.batch_size = 8;
  desk_cfg.proxy.ntk_repeats = 3;
  desk_cfg.proxy.lr_input = {3, 8, 8};
  desk_cfg.threads = default_thread_count();
  desk_cfg.proxy.threads = desk_cfg.threads;
  const auto t0 = Clock::now();
  const SearchReport full = run_search(desk_cfg, nullptr);
  const double secs = seconds_since(t0);
  const double ratio = static_cast<double>(kSpaceSize) / static_cast<double>(full.evaluations);
  c.expect(full.evaluations <= 120, "evaluations " + std::to_string(full.evaluations));
  c.expect(ratio >= 130.0, "ratio " + std::to_string(ratio));
  c.expect(secs < 600.0, "desk search took " + std::to_string(secs) + " s");
  c.expect(full.log.size() == 24, "prune log length");

  // Budgets on the small macro, from the tightest feasible one upwards.
  SearchConfig cfg = tiny_search();
  Rng rng(9);
  std::uniform_real_distribution<double> price(1.0, 50.0);
  const LatencyTable t = oracle::synthetic_table(cfg.macro, 20.0, [&](const LatencyKey& k) {
    return k.op == "none" ? 0.0 : price(rng);
  });
  const double lo = min_completion_latency(SupernetState::full(), cfg.macro, t);
  double hi = lo;
  for (std::size_t i = 0; i < kSpaceSize; i += 97)
    hi = std::max(hi, estimate_latency(CellArch::from_index(i), cfg.macro, t).latency_us);
  int budget_runs = 0;
  for (double frac : {0.0, 0.1, 0.3, 0.6, 1.0}) {
    SearchConfig b = cfg;
    b.w_latency = 1.0;
    b.latency_budget_us = lo + frac * (hi - lo);
    const SearchReport r = run_search(b, &t);
    c.expect(estimate_latency(r.chosen, b.macro, t).latency_us <= *b.latency_budget_us,
             "latency budget violated");
    ++budget_runs;
  }
  const double flo = min_completion_flops(SupernetState::full(), cfg.macro);
  for (double mult : {1.0, 1.5, 3.0}) {
    SearchConfig b = cfg;
    b.flops_budget = flo * mult;
    const SearchReport r = run_search(b, nullptr);
    c.expect(count_flops(r.chosen, b.macro).flops <= *b.flops_budget, "FLOPs budget violated");
    ++budget_runs;
  }
  auto infeasible = [&](SearchConfig b, const LatencyTable* table) {
    try {
      run_search(b, table);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::kInfeasible;
    }
    return false;
  };
  SearchConfig tight = cfg;
  tight.latency_budget_us = lo - 1.0;
  c.expect(infeasible(tight, &t), "latency budget below the bound did not error");
  tight = cfg;
  tight.flops_budget = flo * 0.5;
  c.expect(infeasible(tight, nullptr), "FLOPs budget below the bound did not error");

  SearchConfig one = cfg, many = cfg;
  many.threads = 4;
  many.proxy.threads = 4;
  const SearchReport a = run_search(one, nullptr), b = run_search(many, nullptr);
  c.expect(search_report_jsonl(a, one.proxy.seed) == search_report_jsonl(b, many.proxy.seed),
           "results differ across thread counts");

  c.info << full.evaluations << " evaluations vs " << kSpaceSize << " (" << ratio << "x), desk search "
         << secs << " s, " << budget_runs << " budgeted runs";
}

// ---- 8: Kendall tau ------------------------------------------------------

void criterion_kendall(Check& c) {
  Rng rng(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  int checked = 0;
  while (checked < 1000) {
    const int n = std::uniform_int_distribution<int>(2, 80)(rng);
    const bool ties = checked % 2 == 0;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = ties ? std::uniform_int_distribution<int>(0, 5)(rng) : normal(rng);
      b[i] = ties ? std::uniform_int_distribution<int>(0, 5)(rng) : a[i] + normal(rng);
    }
    const auto minmax_a = std::minmax_element(a.begin(), a.end());
    const auto minmax_b = std::minmax_element(b.begin(), b.end());
    if (*minmax_a.first == *minmax_a.second || *minmax_b.first == *minmax_b.second) continue;
    ++checked;
    const auto fast = kendall_counts(a, b);
    const auto slow = oracle::brute_pairs(a, b);
    c.expect(static_cast<double>(fast.concordant) == slow.concordant &&
                 static_cast<double>(fast.discordant) == slow.discordant &&
                 static_cast<double>(fast.ties_a_only) == slow.ties_a &&
                 static_cast<double>(fast.ties_b_only) == slow.ties_b,
             "pair counts differ from brute force");
    c.expect(std::abs(kendall_tau(a, b) - oracle::brute_tau(a, b)) < 1e-12, "tau differs");
  }
  std::vector<double> up(50), sq(50), down(50);
  for (int i = 0; i < 50; ++i) {
    up[i] = i;
    sq[i] = std::exp(0.1 * i);
    down[i] = -i * i;
  }
  c.expect(kendall_tau(up, sq) == 1.0, "monotone tau != 1");
  c.expect(kendall_tau(up, down) == -1.0, "anti-monotone tau != -1");
  const double tied = kendall_tau(std::vector<double>{1, 1, 2, 3}, std::vector<double>{1, 2, 3, 3});
  c.expect(std::abs(tied - 0.8) < 1e-15, "tie example gave " + std::to_string(tied));
  c.info << checked << " random vectors match brute force, tie example " << tied;
}

// ---- 9: benchmark correlation -------------------------------------------

bool criterion_bench(Check& c) {
  const char* path = std::getenv("ZSNAS_BENCH_FILE");
  if (!path || !*path) return false;
  const auto records = load_bench(path);
  TauSweepConfig cfg;
  cfg.search.macro = desk();
  cfg.search.proxy.ntk_repeats = 3;
  cfg.search.threads = default_thread_count();
  cfg.search.proxy.threads = cfg.search.threads;
  cfg.axis_values = {8};
  cfg.sample = 500;
  cfg.proxy = ProxyKind::kKappa;
  const TauReport kappa = tau_sweep(records, cfg, nullptr);
  cfg.proxy = ProxyKind::kLr;
  const TauReport lr = tau_sweep(records, cfg, nullptr);
  c.expect(kappa.tau[0] > 0.0, "tau(-kappa, acc) = " + std::to_string(kappa.tau[0]));
  c.expect(lr.tau[0] > 0.0, "tau(R, acc) = " + std::to_string(lr.tau[0]));
  c.info << kappa.sample_size << " archs, tau(-kappa) " << kappa.tau[0] << ", tau(R) " << lr.tau[0];
  return true;
}

}  // namespace
}  // namespace zsnas

int main() {
  using zsnas::Check;
  struct Criterion {
    int id;
    const char* name;
    std::function<bool(Check&)> run;  // false means skipped
  };
  auto always = [](void (*f)(Check&)) {
    return [f](Check& c) {
      f(c);
      return true;
    };
  };
  const std::vector<Criterion> criteria = {
      {1, "layer gradients vs finite differences", always(zsnas::criterion_gradients)},
      {2, "NTK symmetry, PSD, sentinel, Jacobian oracle", always(zsnas::criterion_ntk)},
      {3, "eigensolver and condition number", always(zsnas::criterion_eigen)},
      {4, "linear regions vs sign-pattern oracle", always(zsnas::criterion_linear_regions)},
      {5, "FLOPs and parameter counting", always(zsnas::criterion_flops)},
      {6, "latency lookup model", always(zsnas::criterion_latency)},
      {7, "pruning search efficiency and budgets", always(zsnas::criterion_search)},
      {8, "Kendall tau", always(zsnas::criterion_kendall)},
      {9, "benchmark correlation (ZSNAS_BENCH_FILE)", zsnas::criterion_bench},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check c;
    bool ran = true;
    std::string error;
    try {
      ran = cr.run(c);
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::string detail = c.info.str();
    if (!error.empty()) {
      c.expect(false, "exception: " + error);
    }
    if (!ran && error.empty()) {
      std::printf("SKIP %d %s: no benchmark file given\n", cr.id, cr.name);
      continue;
    }
    const bool pass = c.failed == 0;
    if (!pass) {
      ++failed;
      detail += detail.empty() ? "" : "; ";
      detail += std::to_string(c.failed) + " failed checks, e.g. ";
      for (std::size_t i = 0; i < c.failures.size(); ++i)
        detail += (i ? " | " : "") + c.failures[i];
    }
    std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", cr.id, cr.name, detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
