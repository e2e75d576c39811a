// memroof command line: single-point estimates, experiment sweeps, preset
// catalogue. Exit codes: 0 success, 2 configuration error, 3 capacity
// violation without --allow-infeasible.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "memroof/config.hpp"
#include "memroof/experiments.hpp"
#include "memroof/oracle.hpp"
#include "memroof/units.hpp"

namespace {

using namespace memroof;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct CliError {
  int code;
  std::string message;
};

ModelSpec resolve_model(const std::string& name_or_file) {
  namespace fs = std::filesystem;
  if (fs::exists(name_or_file) && fs::path(name_or_file).extension() == ".json")
    return model_from_json(load_json_file(name_or_file));
  try {
    return model_preset(name_or_file);
  } catch (const std::invalid_argument&) {
  }
  if (auto j = load_custom_preset("model", name_or_file)) return model_from_json(*j);
  std::string known;
  for (const auto& n : model_preset_names()) known += (known.empty() ? "" : ", ") + n;
  for (const auto& p : discover_custom_presets())
    if (p.kind == "model") known += ", " + p.name;
  throw CliError{kExitConfig,
                 "unknown model '" + name_or_file + "'; available: " + known};
}

PlacementPolicy resolve_policy(const std::string& name_or_file) {
  namespace fs = std::filesystem;
  if (fs::exists(name_or_file) && fs::path(name_or_file).extension() == ".json")
    return policy_from_json(load_json_file(name_or_file));
  try {
    return builtin_policy(name_or_file);
  } catch (const std::invalid_argument&) {
  }
  if (auto j = load_custom_preset("policy", name_or_file)) return policy_from_json(*j);
  std::string known;
  for (const auto& n : policy_names()) known += (known.empty() ? "" : ", ") + n;
  throw CliError{kExitConfig,
                 "unknown policy '" + name_or_file + "'; available: " + known};
}

Hierarchy resolve_hierarchy(const std::string& spec) {
  namespace fs = std::filesystem;
  if (fs::exists(spec) && fs::path(spec).extension() == ".json")
    return hierarchy_from_json(load_json_file(spec));
  if (auto j = load_custom_preset("hierarchy", spec)) return hierarchy_from_json(*j);
  return parse_hierarchy_shorthand(spec);  // throws ConfigError on bad text
}

// Single atomic publish: write to a sibling temp file, then rename.
void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError{kExitConfig, "cannot write '" + path + "'"};
    out << contents;
  }
  fs::rename(tmp, target);
}

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    return;
  }
  write_file_atomic(path, contents);
}

std::string human_report(const ResultRow& row, const PerfReport& report,
                         const PhaseSpec& phase) {
  std::ostringstream os;
  os << "model:       " << row.model << "  (" << row.prefill << "/" << row.decode
     << " prefill/decode)\n";
  os << "policy:      " << row.policy << "\n";
  os << "tps:         " << format_double(row.tps) << "\n";
  os << "bottleneck:  " << row.bottleneck << "\n";
  os << "prefill:     " << format_double(report.prefill_seconds) << " s\n";
  os << "decode:      " << format_double(report.decode_seconds) << " s ("
     << format_double(report.decode_seconds / static_cast<double>(phase.decode_len))
     << " s/token)\n";
  os << "kv cache:    " << format_capacity(row.kv_bytes) << " at context "
     << phase.final_context() << "\n";
  os << "weights:     " << format_capacity(row.weight_bytes) << "\n";
  os << "gemm time shares (per layer, mid-context decode step):\n";
  os << "  qkv-gen:    " << format_double(row.frac_qkvgen) << "\n";
  os << "  qkt:        " << format_double(row.frac_qkt) << "\n";
  os << "  softmax-v:  " << format_double(row.frac_softmaxv) << "\n";
  os << "  projection: " << format_double(row.frac_proj) << "\n";
  os << "  mlp:        " << format_double(row.frac_mlp) << "\n";
  return os.str();
}

int cmd_estimate(const std::string& model_arg, std::uint64_t prefill,
                 std::uint64_t decode, const std::string& hier_arg,
                 const std::string& policy_arg, const std::string& tps_mode_arg,
                 bool allow_infeasible, const std::string& format,
                 const std::string& out_path, const std::string& dump_path) {
  const ModelSpec model = resolve_model(model_arg);
  const Hierarchy hierarchy = resolve_hierarchy(hier_arg);
  const PlacementPolicy policy = resolve_policy(policy_arg);
  const PhaseSpec phase{prefill, decode};
  phase.validate();
  const TpsMode mode = tps_mode_from_string(tps_mode_arg);

  const CapacityReport cap = capacity_check(policy, model, phase, hierarchy);
  if (!cap.ok && !allow_infeasible) {
    std::cerr << "capacity violation (use --allow-infeasible to model anyway):\n"
              << cap.describe();
    return kExitInfeasible;
  }

  const KernelGraph graph = build_inference_graph(model, phase);
  GraphTimeOptions opts;
  std::ostringstream dump;
  if (!dump_path.empty()) opts.dump = &dump;
  const PerfReport report = graph_time(graph, hierarchy, policy, opts);
  if (!dump_path.empty()) write_file_atomic(dump_path, dump.str());

  ResultRow row;
  row.experiment = "estimate";
  row.model = model.name;
  row.prefill = phase.prefill_len;
  row.decode = phase.decode_len;
  row.policy = policy.name;
  {
    const auto& ddr = hierarchy.level(hierarchy.level_index("ddr"));
    row.ddr_bw = ddr.bandwidth;
    row.ddr_lat = ddr.latency;
  }
  if (hierarchy.has_level("hbs") && !(hierarchy.chiplet && hierarchy.chiplet->id == "hbs")) {
    const auto& hbs = hierarchy.level(hierarchy.level_index("hbs"));
    row.hbs_bw = hbs.bandwidth;
    row.hbs_lat = hbs.latency;
  }
  if (hierarchy.chiplet) row.chiplet_bw = hierarchy.chiplet->bandwidth;
  row.feasible = cap.ok;
  row.tps = tps(report, phase, mode);
  row.bottleneck = report.bottleneck;
  const auto fractions = gemm_breakdown(report);
  auto frac = [&](KernelClass c) {
    auto it = fractions.find(c);
    return it == fractions.end() ? 0.0 : it->second;
  };
  row.frac_qkvgen = frac(KernelClass::QKVGen);
  row.frac_qkt = frac(KernelClass::QKt);
  row.frac_softmaxv = frac(KernelClass::SoftmaxV);
  row.frac_proj = frac(KernelClass::Projection);
  row.frac_mlp = frac(KernelClass::MLP1) + frac(KernelClass::MLP2);
  row.kv_bytes = kv_cache_bytes(model, phase.final_context());
  row.weight_bytes = weight_bytes(model);
  if (!cap.ok) row.violation = cap.describe();

  std::ostringstream os;
  if (format == "human") {
    os << human_report(row, report, phase);
    if (!cap.ok) os << "capacity violations:\n" << cap.describe();
  } else if (format == "csv") {
    write_csv({row}, os);
  } else {
    write_json({row}, os);
  }
  emit(out_path, os.str());
  return kExitOk;
}

int cmd_sweep(const std::string& builtin, const std::string& spec_path,
              const std::string& out_path, const std::string& json_path,
              const std::string& dump_spec_path) {
  ExperimentSpec spec;
  if (!builtin.empty()) {
    try {
      spec = builtin_experiment(builtin);
    } catch (const std::invalid_argument&) {
      if (auto j = load_custom_preset("experiment", builtin))
        spec = experiment_from_json(*j);
      else {
        std::string known;
        for (const auto& n : experiment_names())
          known += (known.empty() ? "" : ", ") + n;
        throw CliError{kExitConfig,
                       "unknown experiment '" + builtin + "'; available: " + known};
      }
    }
  } else {
    spec = experiment_from_json(load_json_file(spec_path));
  }

  if (!dump_spec_path.empty())
    write_file_atomic(dump_spec_path, experiment_to_json(spec).dump(2) + "\n");

  const ModelSpec model = resolve_model(spec.model);
  std::cerr << "sweep '" << spec.name << "': " << sweep_cardinality(spec)
            << " points\n";
  const auto rows = run_sweep(spec, model);

  if (!out_path.empty()) {
    std::ostringstream csv;
    write_csv(rows, csv);
    emit(out_path, csv.str());
  }
  if (!json_path.empty()) {
    std::ostringstream js;
    write_json(rows, js);
    emit(json_path, js.str());
  }
  if (out_path.empty() && json_path.empty()) {
    std::ostringstream csv;
    write_csv(rows, csv);
    std::cout << csv.str();
  }

  double best = 0, worst = 0;
  bool any = false;
  for (const auto& r : rows) {
    if (!r.feasible) continue;
    if (!any) best = worst = r.tps;
    best = std::max(best, r.tps);
    worst = std::min(worst, r.tps);
    any = true;
  }
  std::size_t infeasible = 0;
  for (const auto& r : rows) infeasible += r.feasible ? 0 : 1;
  std::cerr << "rows: " << rows.size();
  if (infeasible) std::cerr << " (" << infeasible << " infeasible)";
  if (any)
    std::cerr << ", tps best " << format_double(best) << " worst "
              << format_double(worst);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i - 1].feasible && rows[i].feasible && rows[i - 1].bottleneck == "hbs" &&
        rows[i].bottleneck == "ddr" && rows[i].hbs_bw) {
      std::cerr << ", bottleneck shifts to ddr at hbs "
                << format_double(*rows[i].hbs_bw / 1e9) << " gbps";
      break;
    }
  }
  std::cerr << "\n";
  return kExitOk;
}

int cmd_presets() {
  std::cout << "models:\n";
  for (const auto& n : model_preset_names()) {
    const ModelSpec m = model_preset(n);
    std::cout << "  " << n << ": layers=" << m.n_layers << " d_model=" << m.d_model
              << " heads=" << m.n_heads << " d_ff=" << m.d_ff
              << " ffn_mats=" << m.n_ffn_mats << " bytes/el=" << m.bytes_per_el
              << " vocab=" << m.vocab_size << "\n";
  }
  std::cout << "memory levels:\n";
  for (const auto& n : level_preset_names()) {
    const MemoryLevel lv = level_preset(n);
    std::cout << "  " << n << ": " << format_bandwidth(lv.bandwidth) << ", "
              << format_duration(lv.latency) << ", " << format_capacity(lv.capacity)
              << "\n";
  }
  std::cout << "policies:\n";
  for (const auto& n : policy_names()) std::cout << "  " << n << "\n";
  std::cout << "experiments:\n";
  for (const auto& n : experiment_names()) std::cout << "  " << n << "\n";
  const auto custom = discover_custom_presets();
  if (!custom.empty()) {
    std::cout << "custom presets (MEMROOF_PRESET_DIR):\n";
    for (const auto& p : custom)
      std::cout << "  [" << p.kind << "] " << p.name << " (" << p.path << ")\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analytical memory-hierarchy performance model for transformer inference"};
  app.require_subcommand(1);

  // estimate
  auto* est = app.add_subcommand("estimate", "time a single configuration");
  std::string model_arg, hier_arg = "lpddr6", policy_arg = "baseline-ddr";
  std::string tps_mode_arg = "decode-only", format = "human", out_path, dump_path;
  std::uint64_t prefill = 0, decode = 1;
  bool allow_infeasible = false;
  est->add_option("--model", model_arg, "model preset name or .json file")->required();
  est->add_option("--prefill", prefill, "prefill length (tokens)");
  est->add_option("--decode", decode, "decode length (tokens)")->required();
  est->add_option("--hier", hier_arg,
                  "hierarchy shorthand (e.g. lpddr6-3x+hbs:512gbps,10us), preset "
                  "name or .json file");
  est->add_option("--policy", policy_arg, "placement policy name or .json file");
  est->add_option("--tps-mode", tps_mode_arg, "decode-only | end-to-end");
  est->add_flag("--allow-infeasible", allow_infeasible,
                "model the configuration even when capacity checks fail");
  est->add_option("--format", format, "human | csv | json")
      ->check(CLI::IsMember({"human", "csv", "json"}));
  est->add_option("-o,--output", out_path, "output file (default stdout)");
  est->add_option("--dump-kernels", dump_path, "write the per-kernel timing table");

  // sweep
  auto* sw = app.add_subcommand("sweep", "run an experiment sweep");
  std::string builtin, spec_path, csv_path, json_path, dump_spec_path;
  sw->add_option("--builtin", builtin, "builtin or custom experiment name");
  sw->add_option("--spec", spec_path, "experiment spec .json file");
  sw->add_option("-o,--output", csv_path, "CSV output file (default stdout)");
  sw->add_option("--json", json_path, "JSON mirror output file");
  sw->add_option("--dump-spec", dump_spec_path, "write the resolved spec as JSON");

  // presets
  auto* pr = app.add_subcommand("presets", "list model/hardware/experiment presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed())
      return cmd_estimate(model_arg, prefill, decode, hier_arg, policy_arg,
                          tps_mode_arg, allow_infeasible, format, out_path, dump_path);
    if (sw->parsed()) {
      if (builtin.empty() == spec_path.empty()) {
        std::cerr << "sweep: exactly one of --builtin or --spec is required\n";
        return kExitConfig;
      }
      return cmd_sweep(builtin, spec_path, csv_path, json_path, dump_spec_path);
    }
    if (pr->parsed()) return cmd_presets();
  } catch (const CliError& e) {
    std::cerr << e.message << "\n";
    return e.code;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnitError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InfeasibleKernelError& e) {
    std::cerr << "infeasible kernel: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
