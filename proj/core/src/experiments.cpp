#include "memroof/experiments.hpp"

#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "memroof/units.hpp"

namespace memroof {

namespace {

constexpr double GB = 1e9;
constexpr double US = 1e-6;
constexpr double NS = 1e-9;

std::vector<double> scale(std::initializer_list<double> vals, double unit) {
  std::vector<double> out;
  for (double v : vals) out.push_back(v * unit);
  return out;
}

const std::vector<double> kHbsBwGrid =
    scale({16, 32, 64, 128, 173, 256, 384, 512}, GB);
const std::vector<double> kHbsLatGrid = scale({2, 10, 50, 100}, US);

}  // namespace

Hierarchy point_hierarchy(double ddr_bw, double ddr_lat, std::optional<double> hbs_bw,
                          std::optional<double> hbs_lat,
                          std::optional<double> chiplet_bw,
                          std::optional<double> chiplet_lat) {
  Hierarchy h = base_hierarchy({"ddr", std::nullopt, ddr_bw, ddr_lat});
  if (hbs_bw) h = with_storage(std::move(h), hbs_level(*hbs_bw, hbs_lat.value_or(10e-6)));
  if (chiplet_bw)
    h = with_chiplet(std::move(h), chiplet_level(*chiplet_bw, chiplet_lat.value_or(50e-9)));
  return h;
}

std::uint64_t sweep_cardinality(const ExperimentSpec& spec) {
  std::uint64_t total = 0;
  for (const auto& b : spec.blocks) {
    std::uint64_t n = b.phases.size() * b.ddr_bw.size() * b.ddr_lat.size();
    n *= std::max<std::size_t>(1, b.hbs_bw.size());
    n *= std::max<std::size_t>(1, b.hbs_lat.size());
    n *= std::max<std::size_t>(1, b.chiplet_bw.size());
    n *= std::max<std::size_t>(1, b.chiplet_lat.size());
    total += n;
  }
  return total;
}

namespace {

template <typename T>
std::vector<std::optional<T>> optional_axis(const std::vector<T>& vals) {
  if (vals.empty()) return {std::nullopt};
  std::vector<std::optional<T>> out;
  for (const auto& v : vals) out.push_back(v);
  return out;
}

ResultRow evaluate_point(const ExperimentSpec& spec, const ModelSpec& model,
                         const PhaseSpec& phase, const SweepBlock& block,
                         double ddr_bw, double ddr_lat, std::optional<double> hbs_bw,
                         std::optional<double> hbs_lat,
                         std::optional<double> chiplet_bw,
                         std::optional<double> chiplet_lat) {
  ResultRow row;
  row.experiment = spec.name;
  row.model = model.name;
  row.prefill = phase.prefill_len;
  row.decode = phase.decode_len;
  row.policy = block.policy;
  row.ddr_bw = ddr_bw;
  row.ddr_lat = ddr_lat;
  row.hbs_bw = hbs_bw;
  row.hbs_lat = hbs_bw ? std::optional<double>(hbs_lat.value_or(10e-6)) : std::nullopt;
  row.chiplet_bw = chiplet_bw;
  row.kv_bytes = kv_cache_bytes(model, phase.final_context());
  row.weight_bytes = weight_bytes(model);

  const Hierarchy h =
      point_hierarchy(ddr_bw, ddr_lat, hbs_bw, hbs_lat, chiplet_bw, chiplet_lat);
  const PlacementPolicy policy = builtin_policy(block.policy);

  const CapacityReport cap = capacity_check(policy, model, phase, h);
  if (!cap.ok) {
    row.feasible = false;
    row.violation = cap.describe();
    return row;
  }

  const KernelGraph graph = build_inference_graph(model, phase);
  const PerfReport report = graph_time(graph, h, policy);
  row.tps = tps(report, phase, spec.tps_mode);
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
  return row;
}

}  // namespace

std::vector<ResultRow> run_sweep(const ExperimentSpec& spec, const ModelSpec& model) {
  model.validate();
  std::vector<ResultRow> rows;
  rows.reserve(sweep_cardinality(spec));
  for (const auto& block : spec.blocks) {
    for (const auto& phase : block.phases)
      for (double dbw : block.ddr_bw)
        for (double dlat : block.ddr_lat)
          for (auto hbw : optional_axis(block.hbs_bw))
            for (auto hlat : optional_axis(block.hbs_lat))
              for (auto cbw : optional_axis(block.chiplet_bw))
                for (auto clat : optional_axis(block.chiplet_lat))
                  rows.push_back(evaluate_point(spec, model, phase, block, dbw, dlat,
                                                hbw, hlat, cbw, clat));
  }
  return rows;
}

std::vector<double> speedup_table(const std::vector<ResultRow>& rows,
                                  std::size_t baseline_index) {
  if (baseline_index >= rows.size())
    throw std::invalid_argument("speedup_table: baseline row missing");
  const ResultRow& base = rows[baseline_index];
  if (!base.feasible || base.tps <= 0)
    throw std::invalid_argument("speedup_table: baseline row infeasible");
  std::vector<double> gains;
  gains.reserve(rows.size());
  for (const auto& r : rows) gains.push_back(r.feasible ? r.tps / base.tps : 0.0);
  return gains;
}

std::string find_bottleneck(const ModelSpec& model, const PhaseSpec& phase,
                            const Hierarchy& hierarchy, const PlacementPolicy& policy) {
  const KernelGraph graph = build_inference_graph(model, phase);
  return graph_time(graph, hierarchy, policy).bottleneck;
}

ExperimentSpec builtin_experiment(std::string_view name) {
  ExperimentSpec spec;
  spec.name = std::string(name);
  const PhaseSpec p200{200, 200};

  if (name == "exp1" || name == "exp2" || name == "exp3") {
    spec.model = "llava15-13b";
    SweepBlock b;
    b.phases = {p200};
    b.policy = name == "exp3" ? "qkv-in-ddr" : "all-in-hbs";
    b.ddr_bw = {name == "exp1" ? 173 * GB : 520 * GB};
    b.ddr_lat = {100 * NS};
    b.hbs_bw = kHbsBwGrid;
    b.hbs_lat = kHbsLatGrid;
    spec.blocks = {b};
    return spec;
  }
  if (name == "table1") {
    spec.model = "llava15-13b";
    auto row = [&](const char* policy, double dbw, double hbw) {
      SweepBlock b;
      b.phases = {p200};
      b.policy = policy;
      b.ddr_bw = {dbw};
      b.ddr_lat = {100 * NS};
      b.hbs_bw = {hbw};
      b.hbs_lat = {10 * US};
      return b;
    };
    spec.blocks = {row("all-in-hbs", 173 * GB, 173 * GB),
                   row("all-in-hbs", 173 * GB, 512 * GB),
                   row("all-in-hbs", 520 * GB, 512 * GB),
                   row("qkv-in-ddr", 520 * GB, 512 * GB)};
    return spec;
  }
  if (name == "context") {
    spec.model = "llava15-13b";
    auto config = [&](const char* policy, double dbw) {
      SweepBlock b;
      b.phases = {p200, {4096, 12288}, {8192, 24576}};
      b.policy = policy;
      b.ddr_bw = {dbw};
      b.ddr_lat = {100 * NS};
      b.hbs_bw = {512 * GB};
      b.hbs_lat = {10 * US};
      return b;
    };
    spec.blocks = {config("all-in-hbs", 173 * GB), config("all-in-hbs", 520 * GB),
                   config("qkv-in-ddr", 520 * GB)};
    return spec;
  }
  if (name == "chiplet") {
    spec.model = "llama32-1b";
    SweepBlock base;
    base.phases = {{128, 384}};
    base.policy = "baseline-ddr";
    base.ddr_bw = {173 * GB};
    base.ddr_lat = scale({100, 250, 500, 1000}, NS);
    SweepBlock with_chip = base;
    with_chip.policy = "chiplet-qkv";
    with_chip.chiplet_bw = scale({173, 256, 384, 512, 768, 1000}, GB);
    with_chip.chiplet_lat = {50 * NS};
    spec.blocks = {base, with_chip};
    return spec;
  }
  std::string known;
  for (const auto& n : experiment_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown experiment '" + std::string(name) +
                              "'; valid experiments: " + known);
}

std::vector<std::string> experiment_names() {
  return {"exp1", "exp2", "exp3", "table1", "context", "chiplet"};
}

const char* const kCsvHeader =
    "experiment,model,prefill,decode,policy,ddr_bw_gbps,ddr_lat_ns,hbs_bw_gbps,"
    "hbs_lat_us,chiplet_bw_gbps,tps,bottleneck,frac_qkvgen,frac_qkt,frac_softmaxv,"
    "frac_proj,frac_mlp,kv_bytes,weight_bytes,feasible";

namespace {

std::string opt_field(const std::optional<double>& v, double unit) {
  return v ? format_double(*v / unit) : std::string();
}

}  // namespace

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << kCsvHeader << "\n";
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.model << ',' << r.prefill << ',' << r.decode << ','
       << r.policy << ',' << format_double(r.ddr_bw / GB) << ','
       << format_double(r.ddr_lat / NS) << ',' << opt_field(r.hbs_bw, GB) << ','
       << opt_field(r.hbs_lat, US) << ',' << opt_field(r.chiplet_bw, GB) << ',';
    if (r.feasible) {
      os << format_double(r.tps) << ',' << r.bottleneck << ','
         << format_double(r.frac_qkvgen) << ',' << format_double(r.frac_qkt) << ','
         << format_double(r.frac_softmaxv) << ',' << format_double(r.frac_proj) << ','
         << format_double(r.frac_mlp) << ',';
    } else {
      os << ",,,,,,,";
    }
    os << r.kv_bytes << ',' << r.weight_bytes << ','
       << (r.feasible ? "true" : "false") << "\n";
  }
}

void write_json(const std::vector<ResultRow>& rows, std::ostream& os) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["experiment"] = r.experiment;
    o["model"] = r.model;
    o["prefill"] = r.prefill;
    o["decode"] = r.decode;
    o["policy"] = r.policy;
    o["ddr_bw_gbps"] = r.ddr_bw / GB;
    o["ddr_lat_ns"] = r.ddr_lat / NS;
    o["hbs_bw_gbps"] = r.hbs_bw ? nlohmann::ordered_json(*r.hbs_bw / GB) : nullptr;
    o["hbs_lat_us"] = r.hbs_lat ? nlohmann::ordered_json(*r.hbs_lat / US) : nullptr;
    o["chiplet_bw_gbps"] =
        r.chiplet_bw ? nlohmann::ordered_json(*r.chiplet_bw / GB) : nullptr;
    if (r.feasible) {
      o["tps"] = r.tps;
      o["bottleneck"] = r.bottleneck;
      o["frac_qkvgen"] = r.frac_qkvgen;
      o["frac_qkt"] = r.frac_qkt;
      o["frac_softmaxv"] = r.frac_softmaxv;
      o["frac_proj"] = r.frac_proj;
      o["frac_mlp"] = r.frac_mlp;
    } else {
      o["tps"] = nullptr;
      o["bottleneck"] = nullptr;
      o["frac_qkvgen"] = nullptr;
      o["frac_qkt"] = nullptr;
      o["frac_softmaxv"] = nullptr;
      o["frac_proj"] = nullptr;
      o["frac_mlp"] = nullptr;
      o["violation"] = r.violation;
    }
    o["kv_bytes"] = r.kv_bytes;
    o["weight_bytes"] = r.weight_bytes;
    o["feasible"] = r.feasible;
    arr.push_back(std::move(o));
  }
  os << arr.dump(2) << "\n";
}

}  // namespace memroof
