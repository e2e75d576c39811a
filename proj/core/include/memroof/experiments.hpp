#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "memroof/hardware.hpp"
#include "memroof/placement.hpp"
#include "memroof/roofline.hpp"
#include "memroof/workload.hpp"

namespace memroof {

// One cross-product group of sweep points. Empty hbs_bw means no storage
// level; empty chiplet_bw means no chiplet. Scratchpad and L2 use defaults.
struct SweepBlock {
  std::vector<PhaseSpec> phases;
  std::string policy;
  std::vector<double> ddr_bw;      // bytes/s
  std::vector<double> ddr_lat;     // seconds
  std::vector<double> hbs_bw;
  std::vector<double> hbs_lat;
  std::vector<double> chiplet_bw;
  std::vector<double> chiplet_lat;
};

struct ExperimentSpec {
  std::string name;
  std::string model;  // model preset name
  TpsMode tps_mode = TpsMode::DecodeOnly;
  std::vector<SweepBlock> blocks;
};

struct ResultRow {
  std::string experiment;
  std::string model;
  std::uint64_t prefill = 0, decode = 0;
  std::string policy;
  double ddr_bw = 0, ddr_lat = 0;
  std::optional<double> hbs_bw, hbs_lat, chiplet_bw;
  bool feasible = true;
  double tps = 0;
  std::string bottleneck;
  double frac_qkvgen = 0, frac_qkt = 0, frac_softmaxv = 0, frac_proj = 0, frac_mlp = 0;
  std::uint64_t kv_bytes = 0, weight_bytes = 0;
  std::string violation;  // capacity report text when infeasible
};

// Number of rows the spec expands to, reported before running.
std::uint64_t sweep_cardinality(const ExperimentSpec& spec);

// One row per sweep point, deterministic lexicographic ordering over
// (block, phase, ddr_bw, ddr_lat, hbs_bw, hbs_lat, chiplet_bw, chiplet_lat).
// Capacity violations become rows flagged infeasible, not aborts.
std::vector<ResultRow> run_sweep(const ExperimentSpec& spec, const ModelSpec& model);

Hierarchy point_hierarchy(double ddr_bw, double ddr_lat, std::optional<double> hbs_bw,
                          std::optional<double> hbs_lat,
                          std::optional<double> chiplet_bw,
                          std::optional<double> chiplet_lat);

// TPS ratios against the row at baseline_index. Throws when the baseline
// row is missing or infeasible.
std::vector<double> speedup_table(const std::vector<ResultRow>& rows,
                                  std::size_t baseline_index);

// Level bounding the plurality of decode time for one configuration.
std::string find_bottleneck(const ModelSpec& model, const PhaseSpec& phase,
                            const Hierarchy& hierarchy, const PlacementPolicy& policy);

// exp1, exp2, exp3, table1, context, chiplet
ExperimentSpec builtin_experiment(std::string_view name);
std::vector<std::string> experiment_names();

// CSV with the exact column set; the JSON mirror carries identical values.
void write_csv(const std::vector<ResultRow>& rows, std::ostream& os);
void write_json(const std::vector<ResultRow>& rows, std::ostream& os);
extern const char* const kCsvHeader;

}  // namespace memroof
