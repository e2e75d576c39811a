#include "memroof/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "memroof/units.hpp"

namespace memroof {

namespace {

const nlohmann::json& need(const nlohmann::json& j, const char* key,
                           const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + key, "missing field");
  return j.at(key);
}

std::uint64_t need_count(const nlohmann::json& j, const char* key,
                         const std::string& path) {
  const auto& v = need(j, key, path);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0)
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw ConfigError(path + key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string need_string(const nlohmann::json& j, const char* key,
                        const std::string& path) {
  const auto& v = need(j, key, path);
  if (!v.is_string()) throw ConfigError(path + key, "expected a string");
  return v.get<std::string>();
}

double parse_with(const nlohmann::json& v, const std::string& path,
                  double (*parser)(std::string_view)) {
  if (!v.is_string())
    throw ConfigError(path, "expected a unit-suffixed string (bare numbers rejected)");
  try {
    return parser(v.get<std::string>());
  } catch (const UnitError& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace

ModelSpec model_from_json(const nlohmann::json& j) {
  ModelSpec m;
  m.name = need_string(j, "name", "");
  m.n_layers = need_count(j, "n_layers", "");
  m.d_model = need_count(j, "d_model", "");
  m.n_heads = need_count(j, "n_heads", "");
  m.d_ff = need_count(j, "d_ff", "");
  m.n_ffn_mats = need_count(j, "n_ffn_mats", "");
  m.bytes_per_el = need_count(j, "bytes_per_el", "");
  m.vocab_size = need_count(j, "vocab_size", "");
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return m;
}

nlohmann::ordered_json model_to_json(const ModelSpec& m) {
  nlohmann::ordered_json j;
  j["kind"] = "model";
  j["name"] = m.name;
  j["n_layers"] = m.n_layers;
  j["d_model"] = m.d_model;
  j["n_heads"] = m.n_heads;
  j["d_ff"] = m.d_ff;
  j["n_ffn_mats"] = m.n_ffn_mats;
  j["bytes_per_el"] = m.bytes_per_el;
  j["vocab_size"] = m.vocab_size;
  return j;
}

namespace {

MemoryLevel level_from_json(const nlohmann::json& j, const std::string& path) {
  MemoryLevel lv;
  lv.id = need_string(j, "id", path);
  const auto& cap = need(j, "capacity", path);
  if (!cap.is_string())
    throw ConfigError(path + "capacity", "expected a unit-suffixed string or 'unbounded'");
  try {
    lv.capacity = parse_capacity(cap.get<std::string>());
  } catch (const UnitError& e) {
    throw ConfigError(path + "capacity", e.what());
  }
  lv.bandwidth = parse_with(need(j, "bandwidth", path), path + "bandwidth", parse_bandwidth);
  lv.latency = parse_with(need(j, "latency", path), path + "latency", parse_duration);
  return lv;
}

nlohmann::ordered_json level_to_json(const MemoryLevel& lv) {
  nlohmann::ordered_json j;
  j["id"] = lv.id;
  j["capacity"] = format_capacity(lv.capacity);
  j["bandwidth"] = format_bandwidth(lv.bandwidth);
  j["latency"] = format_duration(lv.latency);
  return j;
}

}  // namespace

Hierarchy hierarchy_from_json(const nlohmann::json& j) {
  Hierarchy h;
  h.compute.peak_flops =
      parse_with(need(j, "compute", ""), "compute", parse_flops);
  const auto& levels = need(j, "levels", "");
  if (!levels.is_array() || levels.size() < 3)
    throw ConfigError("levels", "expected an array of at least 3 levels "
                                "(scratchpad, l2, ddr, innermost first)");
  for (std::size_t i = 0; i < levels.size(); ++i)
    h.levels.push_back(
        level_from_json(levels[i], "levels[" + std::to_string(i) + "]."));
  if (j.contains("chiplet") && !j.at("chiplet").is_null())
    h.chiplet = level_from_json(j.at("chiplet"), "chiplet.");
  try {
    h.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return h;
}

nlohmann::ordered_json hierarchy_to_json(const Hierarchy& h) {
  nlohmann::ordered_json j;
  j["kind"] = "hierarchy";
  j["compute"] = format_flops(h.compute.peak_flops);
  j["levels"] = nlohmann::ordered_json::array();
  for (const auto& lv : h.levels) j["levels"].push_back(level_to_json(lv));
  if (h.chiplet) j["chiplet"] = level_to_json(*h.chiplet);
  return j;
}

namespace {

const std::pair<TensorClass, const char*> kClassNames[] = {
    {TensorClass::Weights, "weights"},
    {TensorClass::Q, "q"},
    {TensorClass::K, "k"},
    {TensorClass::V, "v"},
    {TensorClass::KVCache, "kv-cache"},
    {TensorClass::AttnActivations, "attn-activations"},
    {TensorClass::OtherActivations, "other-activations"}};

}  // namespace

PlacementPolicy policy_from_json(const nlohmann::json& j) {
  PlacementPolicy p;
  p.name = need_string(j, "name", "");
  const auto& res = need(j, "residency", "");
  for (const auto& [tclass, key] : kClassNames) {
    if (!res.contains(key))
      throw ConfigError("residency." + std::string(key),
                        "residency map must be total over tensor classes");
    p.residency[tclass] = res.at(key).get<std::string>();
  }
  return p;
}

nlohmann::ordered_json policy_to_json(const PlacementPolicy& p) {
  nlohmann::ordered_json j;
  j["kind"] = "policy";
  j["name"] = p.name;
  nlohmann::ordered_json res;
  for (const auto& [tclass, key] : kClassNames) res[key] = p.residency.at(tclass);
  j["residency"] = std::move(res);
  return j;
}

namespace {

std::vector<double> axis_from_json(const nlohmann::json& j, const char* key,
                                   const std::string& path,
                                   double (*parser)(std::string_view)) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw ConfigError(path + key, "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(parse_with(arr[i], path + key + "[" + std::to_string(i) + "]", parser));
  return out;
}

nlohmann::ordered_json axis_to_json(const std::vector<double>& vals,
                                    std::string (*fmt)(double)) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (double v : vals) arr.push_back(fmt(v));
  return arr;
}

}  // namespace

ExperimentSpec experiment_from_json(const nlohmann::json& j) {
  ExperimentSpec s;
  s.name = need_string(j, "name", "");
  s.model = need_string(j, "model", "");
  s.tps_mode = tps_mode_from_string(
      j.value("tps_mode", std::string("decode-only")));
  const auto& blocks = need(j, "blocks", "");
  if (!blocks.is_array() || blocks.empty())
    throw ConfigError("blocks", "expected a non-empty array");
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const std::string path = "blocks[" + std::to_string(bi) + "].";
    const auto& bj = blocks[bi];
    SweepBlock b;
    const auto& phases = need(bj, "phases", path);
    if (!phases.is_array() || phases.empty())
      throw ConfigError(path + "phases", "expected a non-empty array");
    for (std::size_t pi = 0; pi < phases.size(); ++pi) {
      const std::string ppath = path + "phases[" + std::to_string(pi) + "].";
      PhaseSpec ph;
      ph.prefill_len = need_count(phases[pi], "prefill", ppath);
      ph.decode_len = need_count(phases[pi], "decode", ppath);
      try {
        ph.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(ppath + "decode", e.what());
      }
      b.phases.push_back(ph);
    }
    b.policy = need_string(bj, "policy", path);
    b.ddr_bw = axis_from_json(bj, "ddr_bw", path, parse_bandwidth);
    b.ddr_lat = axis_from_json(bj, "ddr_lat", path, parse_duration);
    b.hbs_bw = axis_from_json(bj, "hbs_bw", path, parse_bandwidth);
    b.hbs_lat = axis_from_json(bj, "hbs_lat", path, parse_duration);
    b.chiplet_bw = axis_from_json(bj, "chiplet_bw", path, parse_bandwidth);
    b.chiplet_lat = axis_from_json(bj, "chiplet_lat", path, parse_duration);
    if (b.ddr_bw.empty()) throw ConfigError(path + "ddr_bw", "at least one value required");
    if (b.ddr_lat.empty()) throw ConfigError(path + "ddr_lat", "at least one value required");
    s.blocks.push_back(std::move(b));
  }
  return s;
}

nlohmann::ordered_json experiment_to_json(const ExperimentSpec& s) {
  nlohmann::ordered_json j;
  j["kind"] = "experiment";
  j["name"] = s.name;
  j["model"] = s.model;
  j["tps_mode"] = to_string(s.tps_mode);
  j["blocks"] = nlohmann::ordered_json::array();
  for (const auto& b : s.blocks) {
    nlohmann::ordered_json bj;
    bj["phases"] = nlohmann::ordered_json::array();
    for (const auto& p : b.phases)
      bj["phases"].push_back({{"prefill", p.prefill_len}, {"decode", p.decode_len}});
    bj["policy"] = b.policy;
    bj["ddr_bw"] = axis_to_json(b.ddr_bw, format_bandwidth);
    bj["ddr_lat"] = axis_to_json(b.ddr_lat, format_duration);
    if (!b.hbs_bw.empty()) bj["hbs_bw"] = axis_to_json(b.hbs_bw, format_bandwidth);
    if (!b.hbs_lat.empty()) bj["hbs_lat"] = axis_to_json(b.hbs_lat, format_duration);
    if (!b.chiplet_bw.empty())
      bj["chiplet_bw"] = axis_to_json(b.chiplet_bw, format_bandwidth);
    if (!b.chiplet_lat.empty())
      bj["chiplet_lat"] = axis_to_json(b.chiplet_lat, format_duration);
    j["blocks"].push_back(std::move(bj));
  }
  return j;
}

Hierarchy parse_hierarchy_shorthand(std::string_view text) {
  std::vector<std::string> segments;
  std::string current;
  for (char c : text) {
    if (c == '+') {
      segments.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  segments.push_back(current);
  if (segments.empty() || segments[0].empty())
    throw ConfigError("hier", "empty hierarchy shorthand");

  auto split_args = [](std::string_view seg) {
    std::vector<std::string> parts;
    const auto colon = seg.find(':');
    if (colon == std::string_view::npos) return parts;
    std::string rest(seg.substr(colon + 1));
    std::string piece;
    for (char c : rest) {
      if (c == ',') {
        parts.push_back(piece);
        piece.clear();
      } else {
        piece += c;
      }
    }
    parts.push_back(piece);
    return parts;
  };

  Hierarchy h;
  const std::string& base = segments[0];
  try {
    if (base == "lpddr6" || base == "lpddr6-3x") {
      h = base_hierarchy(level_preset(base));
    } else if (base.rfind("ddr:", 0) == 0) {
      const auto args = split_args(base);
      if (args.size() != 2)
        throw ConfigError("hier", "ddr:<bandwidth>,<latency> expected");
      h = base_hierarchy({"ddr", std::nullopt, parse_bandwidth(args[0]),
                          parse_duration(args[1])});
    } else {
      throw ConfigError("hier", "unknown base '" + base +
                                    "' (lpddr6 | lpddr6-3x | ddr:<bw>,<lat>)");
    }
    for (std::size_t i = 1; i < segments.size(); ++i) {
      const std::string& seg = segments[i];
      if (seg == "ssd-pcie-gen5" || seg == "ssd-pcie-gen6") {
        h = with_storage(std::move(h), level_preset(seg));
      } else if (seg.rfind("hbs:", 0) == 0) {
        const auto args = split_args(seg);
        if (args.size() != 2)
          throw ConfigError("hier", "hbs:<bandwidth>,<latency> expected");
        h = with_storage(std::move(h),
                         hbs_level(parse_bandwidth(args[0]), parse_duration(args[1])));
      } else if (seg.rfind("chiplet:", 0) == 0) {
        const auto args = split_args(seg);
        if (args.empty() || args.size() > 3)
          throw ConfigError("hier", "chiplet:<bandwidth>[,<latency>[,<capacity>]]");
        MemoryLevel c = chiplet_level(parse_bandwidth(args[0]));
        if (args.size() >= 2) c.latency = parse_duration(args[1]);
        if (args.size() == 3) {
          auto cap = parse_capacity(args[2]);
          if (!cap) throw ConfigError("hier", "chiplet capacity must be bounded");
          c.capacity = cap;
        }
        h = with_chiplet(std::move(h), std::move(c));
      } else {
        throw ConfigError("hier", "unknown segment '" + seg + "'");
      }
    }
  } catch (const UnitError& e) {
    throw ConfigError("hier", e.what());
  }
  h.validate();
  return h;
}

std::string to_string(TpsMode mode) {
  return mode == TpsMode::DecodeOnly ? "decode-only" : "end-to-end";
}

TpsMode tps_mode_from_string(std::string_view s) {
  if (s == "decode-only") return TpsMode::DecodeOnly;
  if (s == "end-to-end") return TpsMode::EndToEnd;
  throw ConfigError("tps_mode", "expected decode-only or end-to-end");
}

std::vector<CustomPreset> discover_custom_presets() {
  std::vector<CustomPreset> out;
  const char* dir = std::getenv("MEMROOF_PRESET_DIR");
  if (!dir || !*dir) return out;
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      const auto j = load_json_file(f.string());
      if (j.contains("kind") && j.contains("name"))
        out.push_back({j.at("kind").get<std::string>(),
                       j.at("name").get<std::string>(), f.string()});
    } catch (...) {
      // unreadable files are skipped, not fatal
    }
  }
  return out;
}

std::optional<nlohmann::json> load_custom_preset(std::string_view kind,
                                                 std::string_view name) {
  for (const auto& p : discover_custom_presets())
    if (p.kind == kind && p.name == name) return load_json_file(p.path);
  return std::nullopt;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace memroof
