#include "memroof/placement.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "memroof/units.hpp"

namespace memroof {

namespace {

constexpr std::array<TensorClass, 7> kAllClasses = {
    TensorClass::Weights,         TensorClass::Q,
    TensorClass::K,               TensorClass::V,
    TensorClass::KVCache,         TensorClass::AttnActivations,
    TensorClass::OtherActivations};

PlacementPolicy uniform(std::string name, const std::string& level) {
  PlacementPolicy p;
  p.name = std::move(name);
  for (auto c : kAllClasses) p.residency[c] = level;
  return p;
}

}  // namespace

void PlacementPolicy::validate() const {
  for (auto c : kAllClasses)
    if (!residency.count(c))
      throw std::invalid_argument("policy '" + name + "' misses tensor class '" +
                                  std::string(to_string(c)) + "'");
}

PlacementPolicy builtin_policy(std::string_view name) {
  if (name == "all-in-hbs") return uniform("all-in-hbs", "hbs");
  if (name == "baseline-ddr") return uniform("baseline-ddr", "ddr");
  if (name == "qkv-in-ddr") {
    PlacementPolicy p = uniform("qkv-in-ddr", "hbs");
    p.residency[TensorClass::Q] = "ddr";
    p.residency[TensorClass::K] = "ddr";
    p.residency[TensorClass::V] = "ddr";
    p.residency[TensorClass::KVCache] = "ddr";
    p.residency[TensorClass::AttnActivations] = "ddr";
    return p;
  }
  if (name == "chiplet-qkv") {
    PlacementPolicy p = uniform("chiplet-qkv", "ddr");
    p.residency[TensorClass::Q] = "chiplet";
    p.residency[TensorClass::K] = "chiplet";
    p.residency[TensorClass::V] = "chiplet";
    p.residency[TensorClass::KVCache] = "chiplet";
    p.residency[TensorClass::AttnActivations] = "chiplet";
    return p;
  }
  std::string known;
  for (const auto& n : policy_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown policy '" + std::string(name) +
                              "'; valid policies: " + known);
}

std::vector<std::string> policy_names() {
  return {"all-in-hbs", "qkv-in-ddr", "chiplet-qkv", "baseline-ddr"};
}

std::string residency(const PlacementPolicy& policy, TensorClass tclass) {
  auto it = policy.residency.find(tclass);
  if (it == policy.residency.end())
    throw std::invalid_argument("policy '" + policy.name +
                                "' has no residency for tensor class '" +
                                std::string(to_string(tclass)) + "'");
  return it->second;
}

OperandRoute route_class(const PlacementPolicy& policy, TensorClass tclass,
                         const Hierarchy& hierarchy) {
  const std::string level = residency(policy, tclass);
  OperandRoute r;
  if (level == "chiplet") {
    if (!hierarchy.chiplet)
      throw std::invalid_argument("policy '" + policy.name +
                                  "' routes '" + std::string(to_string(tclass)) +
                                  "' to a chiplet but the hierarchy has none");
    r.levels = {kChipletLevel, 0};
    return r;
  }
  const std::size_t idx = [&] {
    if (!hierarchy.has_level(level))
      throw std::invalid_argument("policy '" + policy.name + "' references level '" +
                                  level + "' absent from the hierarchy");
    return hierarchy.level_index(level);
  }();
  for (std::size_t i = idx + 1; i-- > 0;) r.levels.push_back(static_cast<int>(i));
  return r;
}

std::vector<OperandRoute> route(const PlacementPolicy& policy, const KernelDesc& kernel,
                                const Hierarchy& hierarchy) {
  std::vector<OperandRoute> routes;
  routes.reserve(kernel.operands.size());
  for (const auto& op : kernel.operands)
    routes.push_back(route_class(policy, op.tclass, hierarchy));
  return routes;
}

CapacityReport capacity_check(const PlacementPolicy& policy, const ModelSpec& model,
                              const PhaseSpec& phase, const Hierarchy& hierarchy) {
  model.validate();
  phase.validate();
  policy.validate();

  const std::uint64_t b = model.bytes_per_el;
  const std::uint64_t c_max = phase.final_context();
  const std::uint64_t m_max = std::max<std::uint64_t>(phase.prefill_len, 1);

  // Peak live bytes per class. Activations are per-step live sets, not
  // accumulated history; the KV cache is the accumulated one.
  std::map<std::string, std::uint64_t> required;
  auto add = [&](TensorClass c, std::uint64_t bytes) {
    required[residency(policy, c)] += bytes;
  };
  add(TensorClass::Weights, weight_bytes(model));
  add(TensorClass::KVCache, kv_cache_bytes(model, c_max));
  add(TensorClass::Q, m_max * model.d_model * b);
  add(TensorClass::K, m_max * model.d_model * b);
  add(TensorClass::V, m_max * model.d_model * b);
  // R for the widest step plus Z.
  const std::uint64_t r_peak =
      std::max(model.n_heads * m_max * phase.prefill_len, model.n_heads * c_max) * b;
  add(TensorClass::AttnActivations, r_peak + m_max * model.d_model * b);
  // X, O and the widest MLP intermediates (two live when gated).
  add(TensorClass::OtherActivations,
      2 * m_max * model.d_model * b + 2 * m_max * model.d_ff * b);

  CapacityReport report;
  for (const auto& [level_id, bytes] : required) {
    const MemoryLevel* lv = nullptr;
    if (hierarchy.chiplet && hierarchy.chiplet->id == level_id) lv = &*hierarchy.chiplet;
    else lv = &hierarchy.level(hierarchy.level_index(level_id));
    LevelOccupancy occ;
    occ.level_id = level_id;
    occ.required_bytes = bytes;
    occ.unbounded = !lv->bounded();
    occ.capacity_bytes = lv->bounded() ? *lv->capacity : 0;
    occ.ok = occ.unbounded || bytes <= occ.capacity_bytes;
    report.ok = report.ok && occ.ok;
    report.levels.push_back(occ);
  }
  return report;
}

std::string CapacityReport::describe() const {
  std::string out;
  for (const auto& occ : levels) {
    out += occ.level_id + ": " + format_capacity(occ.required_bytes) + " of " +
           (occ.unbounded ? "unbounded" : format_capacity(occ.capacity_bytes)) +
           (occ.ok ? " (ok)" : " (violation)") + "\n";
  }
  return out;
}

}  // namespace memroof
