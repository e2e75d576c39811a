#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "memroof/placement.hpp"
#include "memroof/roofline.hpp"
#include "memroof/workload.hpp"

namespace memroof::oracle {

struct Transfer {
  int level = 0;
  std::string level_id;
  TensorClass tclass{};
  std::uint64_t bytes = 0;
};

struct LevelTotal {
  std::uint64_t bytes = 0;
  std::uint64_t transfers = 0;
};

struct TransferTrace {
  std::vector<Transfer> moves;
  std::map<int, LevelTotal> totals;  // keyed by hierarchy level index

  void dump(std::ostream& os, const Hierarchy& hierarchy) const;
};

// Walks the plan's loop nest transfer by transfer, counting bytes and
// transactions per level independently of the analytical formulas. Small
// kernels only.
TransferTrace simulate_plan(const KernelDesc& kernel, const TilingPlan& plan,
                            const std::vector<OperandRoute>& routes,
                            const Hierarchy& hierarchy);

// Triple-loop flop count for GEMM kernels: 2 * batch * m * n * k.
std::uint64_t flop_count(const KernelDesc& kernel);

}  // namespace memroof::oracle
