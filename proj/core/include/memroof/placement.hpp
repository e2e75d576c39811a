#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "memroof/hardware.hpp"
#include "memroof/workload.hpp"

namespace memroof {

// Maps every tensor class to the level it resides at. Traffic for a tensor
// never touches levels outside its residency path.
struct PlacementPolicy {
  std::string name;
  std::map<TensorClass, std::string> residency;

  void validate() const;  // totality over TensorClass
};

// all-in-hbs, qkv-in-ddr, chiplet-qkv, baseline-ddr
PlacementPolicy builtin_policy(std::string_view name);
std::vector<std::string> policy_names();

std::string residency(const PlacementPolicy& policy, TensorClass tclass);

// Ordered levels an operand's traffic crosses: residency level first,
// scratchpad last. Chiplet-resident data bypasses L2 and DDR, so its path
// is [chiplet, scratchpad]. Entries are hierarchy level indices with
// kChipletLevel standing in for the chiplet.
struct OperandRoute {
  std::vector<int> levels;
  bool via_chiplet() const { return !levels.empty() && levels.front() == kChipletLevel; }
};

OperandRoute route_class(const PlacementPolicy& policy, TensorClass tclass,
                         const Hierarchy& hierarchy);

// One route per kernel operand, in operand order.
std::vector<OperandRoute> route(const PlacementPolicy& policy, const KernelDesc& kernel,
                                const Hierarchy& hierarchy);

struct LevelOccupancy {
  std::string level_id;
  std::uint64_t required_bytes = 0;
  std::uint64_t capacity_bytes = 0;  // 0 for unbounded
  bool unbounded = false;
  bool ok = true;
};

struct CapacityReport {
  bool ok = true;
  std::vector<LevelOccupancy> levels;
  std::string describe() const;
};

// Verifies that weights, the max-context KV cache and peak live activations
// fit the levels the policy assigns them to.
CapacityReport capacity_check(const PlacementPolicy& policy, const ModelSpec& model,
                              const PhaseSpec& phase, const Hierarchy& hierarchy);

}  // namespace memroof
