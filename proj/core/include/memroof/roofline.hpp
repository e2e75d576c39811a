#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memroof/hardware.hpp"
#include "memroof/placement.hpp"
#include "memroof/workload.hpp"

namespace memroof {

struct InfeasibleKernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// How an output block leaves the scratchpad: one burst for the whole
// operand, one per inner tile, or (attention) one per head / per strip.
enum class OutputFlush { Single, PerInnerTile, PerHead, PerStrip };

// Staging tiles for one kernel. Off-chip links (DDR, HBS) transact at the
// outer tile, which lands in L2; the scratchpad streams inner tiles.
// Attention kernels instead move per-head strips of context_chunk tokens,
// at the same granularity on every level they cross.
struct TilingPlan {
  std::uint64_t tm_outer = 1, tn_outer = 1;
  std::uint64_t tm_inner = 1, tn_inner = 1;
  std::uint64_t tk = 1;              // shared k tile
  std::uint64_t context_chunk = 0;   // attention strip length (tokens)
  std::uint64_t m_chunk = 0;         // attention m chunk
  OutputFlush flush = OutputFlush::Single;
  const char* loop_order = "mn";
  bool single_stage = false;  // hierarchies without an L2 tier: outer == inner

  std::uint64_t inner_volume() const { return tm_inner * tn_inner * tk; }
};

struct TrafficStats {
  int level = 0;  // hierarchy index, kChipletLevel for the chiplet
  std::string level_id;
  std::uint64_t bytes = 0;
  std::uint64_t transfers = 0;
};

struct LevelUse {
  int level = 0;
  std::string level_id;
  std::uint64_t bytes = 0;
  std::uint64_t transfers = 0;
  double seconds = 0;
  double ai = 0;  // flops per byte at this level
};

struct BoundTag {
  bool compute = false;
  std::string id;  // "compute" or a level id
};

struct KernelTiming {
  KernelClass klass = KernelClass::Elementwise;
  std::uint64_t m = 0, n = 0, k = 0, batch = 1;
  TilingPlan plan;
  double compute_seconds = 0;
  std::vector<LevelUse> levels;  // outermost first
  double total_seconds = 0;
  BoundTag bound;
  std::uint64_t total_transfers = 0;
};

// Candidate plans (power-of-two tiles clamped to full extents) that satisfy
// the double-buffered capacity constraints. Throws InfeasibleKernelError
// when even the minimal tile cannot fit the scratchpad.
std::vector<TilingPlan> enumerate_tilings(const KernelDesc& kernel,
                                          const Hierarchy& hierarchy,
                                          const std::vector<OperandRoute>& routes);

// Bytes and discrete tile movements crossing the given level.
TrafficStats traffic(const KernelDesc& kernel, const TilingPlan& plan,
                     const std::vector<OperandRoute>& routes,
                     const Hierarchy& hierarchy, int level);

double arithmetic_intensity(const KernelDesc& kernel, const TilingPlan& plan,
                            const std::vector<OperandRoute>& routes,
                            const Hierarchy& hierarchy, int level);

// time = transfers * latency + bytes / bandwidth. Latency is per discrete
// transfer and does not overlap with streaming.
double level_time(const TrafficStats& stats, const MemoryLevel& level);

// Picks the plan minimizing max(compute, per-level times); ties broken by
// fewer transfers, then larger innermost tile, then lexicographic dims.
KernelTiming kernel_time(const KernelDesc& kernel, const Hierarchy& hierarchy,
                         const PlacementPolicy& policy);

enum class TpsMode { DecodeOnly, EndToEnd };

struct PerfReport {
  double total_seconds = 0;
  double prefill_seconds = 0;
  double decode_seconds = 0;
  std::vector<double> decode_step_seconds;

  // Aggregated over decode steps and layers.
  std::map<KernelClass, double> class_seconds;
  std::map<std::string, double> bound_seconds;
  std::string bottleneck;  // level id or "compute"

  // One representative mid-context decode step (per layer).
  std::uint64_t rep_context = 0;
  std::vector<KernelTiming> rep_kernels;

  std::uint64_t kv_bytes = 0;      // at final context
  std::uint64_t weight_bytes = 0;
};

struct GraphTimeOptions {
  std::ostream* dump = nullptr;  // per-kernel record stream (tabular text)
};

PerfReport graph_time(const KernelGraph& graph, const Hierarchy& hierarchy,
                      const PlacementPolicy& policy, const GraphTimeOptions& opts = {});

double tps(const PerfReport& report, const PhaseSpec& phase,
           TpsMode mode = TpsMode::DecodeOnly);

// GEMM-class time fractions of the representative step (elementwise excluded).
std::map<KernelClass, double> gemm_breakdown(const PerfReport& report);

void dump_kernel_header(std::ostream& os);
void dump_kernel_row(std::ostream& os, std::uint64_t step, const KernelTiming& t);

}  // namespace memroof
