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

#include "zsnas/search_space.hpp"

#include <bit>

#include "zsnas/error.hpp"
#include "zsnas/rng.hpp"

namespace zsnas {

namespace {

constexpr std::array<const char*, kNumOps> kOpNames = {
    "none", "skip_connect", "nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3"};

constexpr std::uint8_t kFullMask = (1U << kNumOps) - 1;

std::uint8_t bit_of(OpKind op) { return static_cast<std::uint8_t>(1U << op_code(op)); }

class ArchParser {
 public:
  explicit ArchParser(std::string_view text) : text_(text) {}

  CellArch parse() {
    std::array<OpKind, kNumEdges> ops{};
    int edge = 0;
    for (int node = 1; node < kNumNodes; ++node) {
      if (node > 1) expect('+');
      expect('|');
      for (int from = 0; from < node; ++from) {
        ops[edge++] = read_op();
        expect('~');
        std::size_t at = pos_;
        if (pos_ >= text_.size() || text_[pos_] != static_cast<char>('0' + from))
          error(at, "expected input node index " + std::to_string(from));
        ++pos_;
        expect('|');
      }
    }
    if (pos_ != text_.size()) error(pos_, "unexpected trailing characters");
    return CellArch(ops);
  }

 private:
  [[noreturn]] void error(std::size_t at, const std::string& what) const {
    fail(ErrorKind::kParse, "architecture string, position " + std::to_string(at) + ": " + what);
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c)
      error(pos_, std::string("expected '") + c + "'");
    ++pos_;
  }

  OpKind read_op() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '~' && text_[pos_] != '|' &&
           text_[pos_] != '+')
      ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);
    if (name.empty()) error(start, "expected operator name");
    auto op = op_from_name(name);
    if (!op) error(start, "unknown operator '" + std::string(name) + "'");
    return *op;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

const char* op_name(OpKind op) { return kOpNames.at(op_code(op)); }

std::optional<OpKind> op_from_name(std::string_view name) {
  for (int i = 0; i < kNumOps; ++i)
    if (name == kOpNames[i]) return static_cast<OpKind>(i);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// CellArch

CellArch CellArch::from_index(std::size_t index) {
  if (index >= kSpaceSize)
    fail(ErrorKind::kInvalidArgument, "architecture index out of range: " + std::to_string(index));
  std::array<OpKind, kNumEdges> ops{};
  for (int e = kNumEdges - 1; e >= 0; --e) {
    ops[e] = static_cast<OpKind>(index % kNumOps);
    index /= kNumOps;
  }
  return CellArch(ops);
}

CellArch CellArch::uniform(OpKind op) {
  std::array<OpKind, kNumEdges> ops{};
  ops.fill(op);
  return CellArch(ops);
}

std::size_t CellArch::index() const {
  std::size_t idx = 0;
  for (OpKind op : ops_) idx = idx * kNumOps + op_code(op);
  return idx;
}

std::string CellArch::str() const { return format_arch(*this); }

CellArch parse_arch(std::string_view text) { return ArchParser(text).parse(); }

std::string format_arch(const CellArch& arch) {
  std::string s;
  int edge = 0;
  for (int node = 1; node < kNumNodes; ++node) {
    if (node > 1) s += '+';
    s += '|';
    for (int from = 0; from < node; ++from) {
      s += op_name(arch.op(edge++));
      s += '~';
      s += static_cast<char>('0' + from);
      s += '|';
    }
  }
  return s;
}

std::vector<CellArch> enumerate_space() {
  std::vector<CellArch> all;
  all.reserve(kSpaceSize);
  for (std::size_t i = 0; i < kSpaceSize; ++i) all.push_back(CellArch::from_index(i));
  return all;
}

// ---------------------------------------------------------------------------
// SupernetState

SupernetState SupernetState::full() {
  SupernetState s;
  s.masks_.fill(kFullMask);
  return s;
}

SupernetState SupernetState::from_arch(const CellArch& arch) {
  SupernetState s;
  for (int e = 0; e < kNumEdges; ++e) s.masks_[e] = bit_of(arch.op(e));
  return s;
}

SupernetState SupernetState::from_sets(const std::array<std::vector<OpKind>, kNumEdges>& sets) {
  SupernetState s;
  for (int e = 0; e < kNumEdges; ++e) {
    for (OpKind op : sets[e]) s.masks_[e] |= bit_of(op);
    if (s.masks_[e] == 0)
      fail(ErrorKind::kInvalidArgument, "edge " + std::to_string(e) + " has no operators");
  }
  return s;
}

bool SupernetState::contains(int edge, OpKind op) const {
  return (masks_.at(edge) & bit_of(op)) != 0;
}

int SupernetState::edge_size(int edge) const { return std::popcount(masks_.at(edge)); }

std::vector<OpKind> SupernetState::ops(int edge) const {
  std::vector<OpKind> out;
  for (OpKind op : kAllOps)
    if (contains(edge, op)) out.push_back(op);
  return out;
}

int SupernetState::total_ops() const {
  int n = 0;
  for (auto m : masks_) n += std::popcount(m);
  return n;
}

bool SupernetState::resolved() const {
  for (auto m : masks_)
    if (std::popcount(m) != 1) return false;
  return true;
}

CellArch SupernetState::arch() const {
  if (!resolved()) fail(ErrorKind::kInvalidArgument, "supernet state is not resolved: " + str());
  std::array<OpKind, kNumEdges> ops{};
  for (int e = 0; e < kNumEdges; ++e)
    ops[e] = static_cast<OpKind>(std::countr_zero(masks_[e]));
  return CellArch(ops);
}

std::uint64_t SupernetState::hash() const {
  std::uint64_t h = 0;
  for (auto m : masks_) h = (h << 8) | m;
  return splitmix64(h);
}

std::string SupernetState::str() const {
  std::string s;
  int edge = 0;
  for (int node = 1; node < kNumNodes; ++node) {
    if (node > 1) s += '+';
    s += '|';
    for (int from = 0; from < node; ++from) {
      auto ops = this->ops(edge++);
      if (ops.size() == 1) {
        s += op_name(ops[0]);
      } else {
        s += '{';
        for (std::size_t i = 0; i < ops.size(); ++i) {
          if (i) s += ',';
          s += op_name(ops[i]);
        }
        s += '}';
      }
      s += '~';
      s += static_cast<char>('0' + from);
      s += '|';
    }
  }
  return s;
}

std::vector<Prune> candidate_prunes(const SupernetState& state) {
  if (state.resolved())
    fail(ErrorKind::kInvalidArgument, "no prune candidates: supernet state is resolved");
  std::vector<Prune> out;
  for (int e = 0; e < kNumEdges; ++e) {
    if (state.edge_size(e) < 2) continue;
    for (OpKind op : state.ops(e)) out.push_back({e, op});
  }
  return out;
}

SupernetState apply_prune(const SupernetState& state, Prune prune) {
  if (prune.edge < 0 || prune.edge >= kNumEdges)
    fail(ErrorKind::kInvalidArgument, "edge index out of range: " + std::to_string(prune.edge));
  if (!state.contains(prune.edge, prune.op))
    fail(ErrorKind::kInvalidArgument, std::string("operator ") + op_name(prune.op) +
                                          " is not on edge " + std::to_string(prune.edge));
  if (state.edge_size(prune.edge) < 2)
    fail(ErrorKind::kInvalidArgument, std::string("removing ") + op_name(prune.op) +
                                          " would leave edge " + std::to_string(prune.edge) +
                                          " empty");
  SupernetState next = state;
  next.masks_[prune.edge] &= static_cast<std::uint8_t>(~bit_of(prune.op));
  return next;
}

// ---------------------------------------------------------------------------
// Networks

void MacroConfig::validate() const {
  if (stem_channels <= 0 || cells_per_stage <= 0 || num_classes <= 0 ||
      input.channels <= 0 || input.height <= 0 || input.width <= 0)
    fail(ErrorKind::kInvalidArgument, "macro configuration fields must be positive");
  if (input.height < 4 || input.width < 4 || input.height % 4 != 0 || input.width % 4 != 0)
    fail(ErrorKind::kInvalidArgument,
         "input resolution " + input.str() +
             " is too small for the reduction pyramid (height and width must be "
             "positive multiples of 4)");
}

namespace {

class SkeletonBuilder {
 public:
  SkeletonBuilder(const SupernetState& state, const MacroConfig& macro, NetworkFlavor flavor)
      : state_(state), macro_(macro), flavor_(flavor), b_(macro.input) {}

  Network build() && {
    const bool full = flavor_ == NetworkFlavor::kFull;
    int x = b_.conv2d(NetworkBuilder::input(), macro_.stem_channels, 3, 1, 1, "stem.conv");
    for (int s = 0; s < MacroConfig::kStages; ++s) {
      if (s > 0) x = reduction(x, s);
      for (int c = 0; c < macro_.cells_per_stage; ++c) x = cell(x, s, c);
    }
    if (full) {
      x = b_.relu(x, "head.relu");
      x = b_.global_avg_pool(x, "head.pool");
      b_.linear(x, macro_.num_classes, "head.classifier");
    }
    return std::move(b_).build();
  }

 private:
  std::string prefix(int stage, int cell) const {
    return "s" + std::to_string(stage) + ".c" + std::to_string(cell) + ".";
  }

  int reduction(int x, int stage) {
    const int c_out = macro_.stage_channels(stage);
    const std::string p = "reduce" + std::to_string(stage) + ".";
    const bool full = flavor_ == NetworkFlavor::kFull;
    int a = full ? b_.relu(x, p + "a.relu") : x;
    a = b_.conv2d(a, c_out, 3, 2, 1, p + "a.conv");
    if (full) a = b_.relu(a, p + "b.relu");
    a = b_.conv2d(a, c_out, 3, 1, 1, p + "b.conv");
    int shortcut = b_.avg_pool(x, 2, 2, 0, p + "shortcut.pool");
    shortcut = b_.conv2d(shortcut, c_out, 1, 1, 0, p + "shortcut.conv");
    return b_.sum({a, shortcut}, {1.0, 1.0}, b_.shape_of(a), p + "add");
  }

  int cell(int input, int stage, int cell) {
    const std::string p = prefix(stage, cell);
    const FeatureShape shape = b_.shape_of(input);
    const bool full = flavor_ == NetworkFlavor::kFull;
    std::array<int, kNumNodes> nodes{};
    std::array<int, kNumNodes> relu_of{};
    relu_of.fill(-1);
    nodes[0] = input;
    for (int node = 1; node < kNumNodes; ++node) {
      std::vector<int> terms;
      std::vector<double> coeffs;
      for (int e = 0; e < kNumEdges; ++e) {
        const CellEdge edge = kCellEdges[e];
        if (edge.to != node) continue;
        const double weight = 1.0 / state_.edge_size(e);
        const std::string ep = p + "e" + std::to_string(edge.from) + std::to_string(edge.to) + ".";
        for (OpKind op : state_.ops(e)) {
          const int src = nodes[edge.from];
          int out = -1;
          switch (op) {
            case OpKind::kNone:
              break;
            case OpKind::kSkipConnect:
              out = src;
              break;
            case OpKind::kAvgPool3x3:
              out = b_.avg_pool(src, 3, 1, 1, ep + op_name(op));
              break;
            case OpKind::kNorConv1x1:
            case OpKind::kNorConv3x3: {
              const int k = op == OpKind::kNorConv1x1 ? 1 : 3;
              const std::string name = ep + op_name(op);
              if (full) {
                if (relu_of[edge.from] < 0)
                  relu_of[edge.from] = b_.relu(src, p + "n" + std::to_string(edge.from) + ".relu");
                out = b_.conv2d(relu_of[edge.from], shape.channels, k, 1, k / 2, name + ".conv");
              } else {
                out = b_.conv2d(src, shape.channels, k, 1, k / 2, name + ".conv");
                out = b_.relu(out, name + ".relu");
              }
              break;
            }
          }
          if (out >= 0) {
            terms.push_back(out);
            coeffs.push_back(weight);
          }
        }
      }
      nodes[node] = b_.sum(std::move(terms), std::move(coeffs), shape,
                           p + "n" + std::to_string(node));
    }
    return nodes[kNumNodes - 1];
  }

  const SupernetState& state_;
  const MacroConfig& macro_;
  NetworkFlavor flavor_;
  NetworkBuilder b_;
};

}  // namespace

Network build_network(const SupernetState& state, const MacroConfig& macro,
                      NetworkFlavor flavor, std::uint64_t seed) {
  macro.validate();
  return init_params(SkeletonBuilder(state, macro, flavor).build(), seed);
}

Network build_full_network(const CellArch& arch, const MacroConfig& macro, std::uint64_t seed) {
  return build_network(SupernetState::from_arch(arch), macro, NetworkFlavor::kFull, seed);
}

Network build_lr_network(const CellArch& arch, const MacroConfig& macro, std::uint64_t seed) {
  return build_network(SupernetState::from_arch(arch), macro, NetworkFlavor::kLinearRegions,
                       seed);
}

Network supernet_network(const SupernetState& state, const MacroConfig& macro,
                         std::uint64_t seed) {
  return build_network(state, macro, NetworkFlavor::kFull, seed);
}

}  // namespace zsnas
