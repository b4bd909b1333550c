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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zsnas/network.hpp"

namespace zsnas {

/// Candidate edge operators. The integer codes are stable.
enum class OpKind : std::uint8_t {
  kNone = 0,
  kSkipConnect = 1,
  kNorConv1x1 = 2,
  kNorConv3x3 = 3,
  kAvgPool3x3 = 4,
};

inline constexpr int kNumOps = 5;
inline constexpr int kNumNodes = 4;
inline constexpr int kNumEdges = 6;
inline constexpr std::size_t kSpaceSize = 15625;  // kNumOps ^ kNumEdges

inline constexpr std::array<OpKind, kNumOps> kAllOps = {
    OpKind::kNone, OpKind::kSkipConnect, OpKind::kNorConv1x1, OpKind::kNorConv3x3,
    OpKind::kAvgPool3x3};

const char* op_name(OpKind op);
std::optional<OpKind> op_from_name(std::string_view name);
inline int op_code(OpKind op) { return static_cast<int>(op); }

/// Edge j -> i of the complete 4-node DAG. Edge indices follow the string
/// form: (0->1), (0->2), (1->2), (0->3), (1->3), (2->3).
struct CellEdge {
  int from;
  int to;
};
inline constexpr std::array<CellEdge, kNumEdges> kCellEdges = {
    {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}}};

class CellArch {
 public:
  CellArch() { ops_.fill(OpKind::kNone); }
  explicit CellArch(const std::array<OpKind, kNumEdges>& ops) : ops_(ops) {}

  /// Architecture at a position of the lexicographic enumeration, edge 0
  /// being the most significant digit.
  static CellArch from_index(std::size_t index);
  static CellArch uniform(OpKind op);

  OpKind op(int edge) const { return ops_.at(edge); }
  const std::array<OpKind, kNumEdges>& ops() const { return ops_; }
  std::size_t index() const;
  std::string str() const;

  friend bool operator==(const CellArch&, const CellArch&) = default;

 private:
  std::array<OpKind, kNumEdges> ops_;
};

/// Parses "|op~0|+|op~0|op~1|+|op~0|op~1|op~2|". Throws ErrorKind::kParse with
/// the character offset of the problem.
CellArch parse_arch(std::string_view text);
std::string format_arch(const CellArch& arch);

/// All 15625 cells in lexicographic edge-code order.
std::vector<CellArch> enumerate_space();

struct Prune {
  int edge;
  OpKind op;
  friend bool operator==(const Prune&, const Prune&) = default;
};

/// Surviving candidate operators per edge during pruning. Persistent: every
/// mutation returns a new state.
class SupernetState {
 public:
  static SupernetState full();
  static SupernetState from_arch(const CellArch& arch);
  static SupernetState from_sets(const std::array<std::vector<OpKind>, kNumEdges>& sets);

  bool contains(int edge, OpKind op) const;
  int edge_size(int edge) const;
  std::vector<OpKind> ops(int edge) const;
  int total_ops() const;
  bool resolved() const;
  /// Derived architecture; throws unless resolved.
  CellArch arch() const;
  std::uint64_t hash() const;
  std::string str() const;

  friend bool operator==(const SupernetState&, const SupernetState&) = default;

 private:
  friend SupernetState apply_prune(const SupernetState&, Prune);
  std::array<std::uint8_t, kNumEdges> masks_{};
};

/// Every (edge, op) removable from `state`, ordered by edge then op code.
std::vector<Prune> candidate_prunes(const SupernetState& state);
SupernetState apply_prune(const SupernetState& state, Prune prune);

/// Stacked-cell skeleton: stem conv, three stages of `cells_per_stage` cells
/// with channels stem, 2*stem, 4*stem, stride-2 residual reduction blocks
/// between stages, then global pooling and a linear classifier.
struct MacroConfig {
  int stem_channels = 16;
  int cells_per_stage = 5;
  int num_classes = 10;
  FeatureShape input{3, 32, 32};

  static constexpr int kStages = 3;

  int stage_channels(int stage) const { return stem_channels << stage; }
  int stage_height(int stage) const { return input.height >> stage; }
  int stage_width(int stage) const { return input.width >> stage; }
  /// Throws ErrorKind::kInvalidArgument for non-positive fields or a
  /// resolution the stride-2 pyramid cannot halve twice.
  void validate() const;
};

enum class NetworkFlavor {
  kFull,           // ReLU-conv edges, classifier head
  kLinearRegions,  // conv-ReLU edges, linear skeleton, no head
};

/// Instantiates a network in which every edge outputs the mean of its
/// surviving operators and every node sums its incoming edges.
Network build_network(const SupernetState& state, const MacroConfig& macro,
                      NetworkFlavor flavor, std::uint64_t seed);

Network build_full_network(const CellArch& arch, const MacroConfig& macro,
                           std::uint64_t seed);
Network build_lr_network(const CellArch& arch, const MacroConfig& macro,
                         std::uint64_t seed);
Network supernet_network(const SupernetState& state, const MacroConfig& macro,
                         std::uint64_t seed);

}  // namespace zsnas
