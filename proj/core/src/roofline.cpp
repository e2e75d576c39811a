#include "memroof/roofline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace memroof {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// Sum over outer blocks of extent of the inner-tile count per block:
// (Mo-1)*ceil(outer/inner) + ceil(last/inner). Exact for partial edges.
std::uint64_t tile_sum(std::uint64_t extent, std::uint64_t outer, std::uint64_t inner) {
  if (extent == 0) return 0;
  const std::uint64_t blocks = ceil_div(extent, outer);
  const std::uint64_t last = extent - (blocks - 1) * outer;
  return (blocks - 1) * ceil_div(outer, inner) + ceil_div(last, inner);
}

std::vector<std::uint64_t> pow2_candidates(std::uint64_t extent) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t v = 1; v < extent; v *= 2) out.push_back(v);
  out.push_back(extent);  // full-extent clamp
  return out;
}

struct OpUse {
  std::uint64_t bytes = 0;
  std::uint64_t transfers = 0;
};

bool attention_kernel(const KernelDesc& kd) { return is_attention(kd.klass); }

// Staging counts for one operand of a plain GEMM/GEMV. inner_stage selects
// the scratchpad-side granularity; off-chip links use the outer tile.
OpUse gemm_use(const KernelDesc& kd, const Operand& op, const TilingPlan& p,
               bool inner_stage) {
  const std::uint64_t b = kd.bytes_per_el;
  const std::uint64_t m = kd.m, n = kd.n, k = kd.k;
  const std::uint64_t Mo = ceil_div(m, p.tm_outer);
  const std::uint64_t No = ceil_div(n, p.tn_outer);
  const std::uint64_t Ko = ceil_div(k, p.tk);
  const std::uint64_t mi_sum = tile_sum(m, p.tm_outer, p.tm_inner);
  const std::uint64_t ni_sum = tile_sum(n, p.tn_outer, p.tn_inner);

  switch (op.slot) {
    case OperandSlot::MatA: {
      const bool fits = (inner_stage ? p.tm_inner : p.tm_outer) >= m && p.tk >= k;
      if (fits) return {op.bytes, 1};
      if (inner_stage) return {op.bytes * ni_sum, mi_sum * ni_sum * Ko};
      return {op.bytes * No, Mo * No * Ko};
    }
    case OperandSlot::MatB: {
      const bool fits = (inner_stage ? p.tn_inner : p.tn_outer) >= n && p.tk >= k;
      if (fits) return {op.bytes, 1};
      if (inner_stage) return {op.bytes * mi_sum, mi_sum * ni_sum * Ko};
      return {op.bytes * Mo, Mo * No * Ko};
    }
    case OperandSlot::MatC: {
      if (p.flush == OutputFlush::Single) return {op.bytes, 1};
      // Each output sub-matrix is flushed on its own column grid.
      const std::uint64_t cols = op.bytes / (m * b);
      return {op.bytes, tile_sum(m, p.tm_outer, p.tm_inner) *
                            tile_sum(cols, p.tn_outer, p.tn_inner)};
    }
    case OperandSlot::Pass: break;
  }
  return {op.bytes, 1};
}

// Per-head attention staging. Strips move at one granularity across every
// level they cross; head-strided reads issue one request per head strip.
OpUse attention_use(const KernelDesc& kd, const Operand& op, const TilingPlan& p) {
  const std::uint64_t heads = kd.batch;
  const std::uint64_t m = kd.m;
  const std::uint64_t context = kd.klass == KernelClass::QKt ? kd.n : kd.k;
  const std::uint64_t strips = ceil_div(context, p.context_chunk);
  const std::uint64_t m_chunks = ceil_div(m, p.m_chunk);

  switch (op.slot) {
    case OperandSlot::MatA:
      if (op.head_strided) return {op.bytes, heads * m_chunks * strips};
      return {op.bytes, m_chunks};  // contiguous token-major slab
    case OperandSlot::MatB:
      return {op.bytes * m_chunks, heads * m_chunks * strips};
    case OperandSlot::MatC:
      switch (p.flush) {
        case OutputFlush::Single: return {op.bytes, 1};
        case OutputFlush::PerHead: return {op.bytes, heads * m_chunks};
        default: return {op.bytes, heads * m_chunks * strips};
      }
    case OperandSlot::Pass: break;
  }
  return {op.bytes, 1};
}

OpUse elementwise_use(const Operand& op, std::uint64_t sp_capacity) {
  const std::uint64_t chunk = std::max<std::uint64_t>(1, sp_capacity / 4);
  return {op.bytes, std::max<std::uint64_t>(1, ceil_div(op.bytes, chunk))};
}

OpUse operand_use(const KernelDesc& kd, const Operand& op, const TilingPlan& p,
                  bool inner_stage, std::uint64_t sp_capacity) {
  if (kd.kind == KernelKind::Elementwise) return elementwise_use(op, sp_capacity);
  if (attention_kernel(kd)) return attention_use(kd, op, p);
  return gemm_use(kd, op, p, inner_stage);
}

const MemoryLevel& level_ref(const Hierarchy& h, int level) {
  if (level == kChipletLevel) {
    if (!h.chiplet) throw std::invalid_argument("hierarchy has no chiplet");
    return *h.chiplet;
  }
  return h.level(static_cast<std::size_t>(level));
}

std::uint64_t sp_capacity_of(const Hierarchy& h) {
  return h.level(0).capacity.value_or(std::numeric_limits<std::uint64_t>::max());
}

std::uint64_t landing_capacity_of(const Hierarchy& h) {
  const auto& lv = h.level(h.landing_index());
  return lv.capacity.value_or(std::numeric_limits<std::uint64_t>::max());
}

std::uint64_t output_bytes(const KernelDesc& kd) {
  std::uint64_t total = 0;
  for (const auto& op : kd.operands)
    if (op.slot == OperandSlot::MatC) total += op.bytes;
  return total;
}

std::vector<TilingPlan> enumerate_gemm(const KernelDesc& kd, const Hierarchy& h) {
  const std::uint64_t b = kd.bytes_per_el;
  const std::uint64_t sp_cap = sp_capacity_of(h);
  const std::uint64_t l2_cap = landing_capacity_of(h);
  const bool single_stage = h.levels.size() < 3;
  const std::uint64_t c_total = output_bytes(kd);

  const auto tks = pow2_candidates(kd.k);
  const auto tmos = pow2_candidates(kd.m);
  const auto tnos = pow2_candidates(kd.n);

  auto sp_ok = [&](std::uint64_t tm, std::uint64_t tn, std::uint64_t tk,
                   OutputFlush flush) {
    const std::uint64_t c_term = flush == OutputFlush::PerInnerTile ? tm * tn : 0;
    const std::uint64_t extra = flush == OutputFlush::Single ? c_total : 0;
    return 2 * (tm * tk + tk * tn + c_term) * b + extra <= sp_cap;
  };

  std::vector<TilingPlan> plans;
  for (std::uint64_t tk : tks) {
    for (std::uint64_t tmo : tmos) {
      for (std::uint64_t tno : tnos) {
        if (!single_stage &&
            2 * (tmo * tk + tk * tno + tmo * tno) * b > l2_cap)
          continue;
        for (OutputFlush flush : {OutputFlush::Single, OutputFlush::PerInnerTile}) {
          if (flush == OutputFlush::PerInnerTile && tk != kd.k)
            continue;  // partial sums stay in the scratchpad
          if (single_stage) {
            if (!sp_ok(tmo, tno, tk, flush)) continue;
            TilingPlan p;
            p.tm_outer = p.tm_inner = tmo;
            p.tn_outer = p.tn_inner = tno;
            p.tk = tk;
            p.flush = flush;
            p.single_stage = true;
            plans.push_back(p);
            continue;
          }
          // Greedy inner tile: the largest nested pair the scratchpad holds.
          std::uint64_t best_tm = 0, best_tn = 0;
          for (std::uint64_t tmi : pow2_candidates(tmo)) {
            for (std::uint64_t tni : pow2_candidates(tno)) {
              if (!sp_ok(tmi, tni, tk, flush)) continue;
              if (best_tm * best_tn < tmi * tni ||
                  (best_tm * best_tn == tmi * tni && tni > best_tn)) {
                best_tm = tmi;
                best_tn = tni;
              }
            }
          }
          if (best_tm == 0) continue;
          TilingPlan p;
          p.tm_outer = tmo;
          p.tn_outer = tno;
          p.tm_inner = best_tm;
          p.tn_inner = best_tn;
          p.tk = tk;
          p.flush = flush;
          plans.push_back(p);
        }
      }
    }
  }
  return plans;
}

std::vector<TilingPlan> enumerate_attention(const KernelDesc& kd, const Hierarchy& h) {
  const std::uint64_t b = kd.bytes_per_el;
  const std::uint64_t sp_cap = sp_capacity_of(h);
  const bool qkt = kd.klass == KernelClass::QKt;
  const std::uint64_t heads = kd.batch;
  const std::uint64_t m = kd.m;
  const std::uint64_t context = qkt ? kd.n : kd.k;
  const std::uint64_t head_dim = qkt ? kd.k : kd.n;
  const std::uint64_t c_total = output_bytes(kd);

  std::vector<TilingPlan> plans;
  for (std::uint64_t tc : pow2_candidates(context)) {
    for (std::uint64_t am : pow2_candidates(m)) {
      // Streaming working set: pinned A chunk, one strip, one output chunk.
      const std::uint64_t a_term = qkt ? heads * am * head_dim : am * tc;
      const std::uint64_t ws =
          2 * (a_term + head_dim * tc + am * (qkt ? tc : head_dim)) * b;
      if (ws > sp_cap) continue;
      const std::uint64_t per_head_out = qkt ? am * context * b : 0;
      for (OutputFlush flush :
           {OutputFlush::Single, OutputFlush::PerHead, OutputFlush::PerStrip}) {
        if (flush == OutputFlush::PerStrip && !qkt)
          continue;  // the z block accumulates across context strips
        std::uint64_t extra = 0;
        if (flush == OutputFlush::Single) extra = c_total;
        else if (flush == OutputFlush::PerHead) extra = per_head_out;
        if (ws + extra > sp_cap) continue;
        TilingPlan p;
        p.context_chunk = tc;
        p.m_chunk = am;
        p.flush = flush;
        p.single_stage = h.levels.size() < 3;
        plans.push_back(p);
      }
    }
  }
  return plans;
}

std::string kernel_label(const KernelDesc& kd) {
  std::ostringstream os;
  os << to_string(kd.klass) << " b" << kd.batch << " " << kd.m << "x" << kd.n << "x"
     << kd.k;
  return os.str();
}

// Levels crossed by any operand, outermost first, chiplet last.
std::vector<int> touched_levels(const std::vector<OperandRoute>& routes) {
  std::vector<int> levels;
  for (const auto& r : routes)
    for (int lv : r.levels)
      if (std::find(levels.begin(), levels.end(), lv) == levels.end())
        levels.push_back(lv);
  std::sort(levels.begin(), levels.end(), std::greater<int>());
  return levels;
}

}  // namespace

std::vector<TilingPlan> enumerate_tilings(const KernelDesc& kernel,
                                          const Hierarchy& hierarchy,
                                          const std::vector<OperandRoute>& routes) {
  (void)routes;
  if (kernel.kind == KernelKind::Elementwise) {
    TilingPlan p;
    p.context_chunk = 1;
    p.m_chunk = 1;
    return {p};
  }
  if (kernel.batch > 1 && !attention_kernel(kernel))
    throw std::invalid_argument("batched kernel with non-attention class: " +
                                kernel_label(kernel));
  auto plans = attention_kernel(kernel) ? enumerate_attention(kernel, hierarchy)
                                        : enumerate_gemm(kernel, hierarchy);
  if (plans.empty())
    throw InfeasibleKernelError("no feasible tiling for kernel " +
                                kernel_label(kernel) + ": minimal tile exceeds the " +
                                hierarchy.level(0).id + " capacity");
  return plans;
}

TrafficStats traffic(const KernelDesc& kernel, const TilingPlan& plan,
                     const std::vector<OperandRoute>& routes,
                     const Hierarchy& hierarchy, int level) {
  TrafficStats stats;
  stats.level = level;
  stats.level_id = level_ref(hierarchy, level).id;
  const std::uint64_t sp_cap = sp_capacity_of(hierarchy);
  const bool inner_stage =
      level == kChipletLevel ||
      static_cast<std::size_t>(level) <= hierarchy.landing_index();
  for (std::size_t i = 0; i < kernel.operands.size(); ++i) {
    const auto& r = routes.at(i);
    if (std::find(r.levels.begin(), r.levels.end(), level) == r.levels.end()) continue;
    const OpUse use = operand_use(kernel, kernel.operands[i], plan, inner_stage, sp_cap);
    stats.bytes += use.bytes;
    stats.transfers += use.transfers;
  }
  return stats;
}

double arithmetic_intensity(const KernelDesc& kernel, const TilingPlan& plan,
                            const std::vector<OperandRoute>& routes,
                            const Hierarchy& hierarchy, int level) {
  const TrafficStats stats = traffic(kernel, plan, routes, hierarchy, level);
  if (stats.bytes == 0)
    return kernel.flops == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return static_cast<double>(kernel.flops) / static_cast<double>(stats.bytes);
}

double level_time(const TrafficStats& stats, const MemoryLevel& level) {
  return static_cast<double>(stats.transfers) * level.latency +
         static_cast<double>(stats.bytes) / level.bandwidth;
}

KernelTiming kernel_time(const KernelDesc& kernel, const Hierarchy& hierarchy,
                         const PlacementPolicy& policy) {
  const auto routes = route(policy, kernel, hierarchy);
  const auto plans = enumerate_tilings(kernel, hierarchy, routes);
  const auto levels = touched_levels(routes);
  const double compute =
      static_cast<double>(kernel.flops) / hierarchy.compute.peak_flops;

  struct Scored {
    double total = std::numeric_limits<double>::infinity();
    std::uint64_t transfers = 0;
    std::vector<TrafficStats> stats;
    const TilingPlan* plan = nullptr;
  } best;

  for (const auto& plan : plans) {
    double worst = compute;
    std::uint64_t transfers = 0;
    std::vector<TrafficStats> stats;
    stats.reserve(levels.size());
    for (int lv : levels) {
      TrafficStats s = traffic(kernel, plan, routes, hierarchy, lv);
      worst = std::max(worst, level_time(s, level_ref(hierarchy, lv)));
      transfers += s.transfers;
      stats.push_back(std::move(s));
    }
    bool better = false;
    if (worst < best.total) better = true;
    else if (worst == best.total && best.plan) {
      if (transfers < best.transfers) better = true;
      else if (transfers == best.transfers &&
               plan.inner_volume() > best.plan->inner_volume()) better = true;
      else if (transfers == best.transfers &&
               plan.inner_volume() == best.plan->inner_volume()) {
        auto key = [](const TilingPlan& p) {
          return std::tuple(p.tm_inner, p.tn_inner, p.tk, p.tm_outer, p.tn_outer,
                            p.context_chunk, p.m_chunk, static_cast<int>(p.flush));
        };
        better = key(plan) < key(*best.plan);
      }
    }
    if (better) best = {worst, transfers, std::move(stats), &plan};
  }

  KernelTiming out;
  out.klass = kernel.klass;
  out.m = kernel.m;
  out.n = kernel.n;
  out.k = kernel.k;
  out.batch = kernel.batch;
  out.plan = *best.plan;
  out.compute_seconds = compute;
  out.total_seconds = best.total;
  out.total_transfers = best.transfers;

  double max_level = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& s = best.stats[i];
    const auto& lv = level_ref(hierarchy, levels[i]);
    LevelUse use;
    use.level = levels[i];
    use.level_id = lv.id;
    use.bytes = s.bytes;
    use.transfers = s.transfers;
    use.seconds = level_time(s, lv);
    use.ai = s.bytes == 0 ? 0.0
                          : static_cast<double>(kernel.flops) /
                                static_cast<double>(s.bytes);
    max_level = std::max(max_level, use.seconds);
    out.levels.push_back(use);
  }
  if (compute >= max_level) {
    out.bound = {true, "compute"};
  } else {
    for (const auto& use : out.levels)
      if (use.seconds == max_level) {
        out.bound = {false, use.level_id};
        break;
      }
  }
  return out;
}

namespace {

struct KernelKey {
  KernelClass klass;
  std::uint64_t m, n, k, batch, b;
  auto operator<=>(const KernelKey&) const = default;
};

}  // namespace

PerfReport graph_time(const KernelGraph& graph, const Hierarchy& hierarchy,
                      const PlacementPolicy& policy, const GraphTimeOptions& opts) {
  hierarchy.validate();
  policy.validate();
  PerfReport report;
  report.kv_bytes = kv_cache_bytes(graph.model, graph.phase.final_context());
  report.weight_bytes = weight_bytes(graph.model);

  const double layers = static_cast<double>(graph.model.n_layers);
  const std::uint64_t rep_t = std::max<std::uint64_t>(1, graph.phase.decode_len / 2);
  const std::uint64_t rep_context = graph.phase.context_at(rep_t);

  std::map<KernelKey, KernelTiming> memo;
  if (opts.dump) dump_kernel_header(*opts.dump);

  for (const auto& step : graph.steps) {
    double step_seconds = 0;
    std::vector<const KernelTiming*> timings;
    timings.reserve(step.layer_kernels.size());
    for (const auto& kd : step.layer_kernels) {
      const KernelKey key{kd.klass, kd.m, kd.n, kd.k, kd.batch, kd.bytes_per_el};
      auto it = memo.find(key);
      if (it == memo.end()) {
        try {
          it = memo.emplace(key, kernel_time(kd, hierarchy, policy)).first;
        } catch (const InfeasibleKernelError& e) {
          throw InfeasibleKernelError("step " + std::to_string(step.step_id) + ": " +
                                      e.what());
        }
      }
      timings.push_back(&it->second);
      step_seconds += it->second.total_seconds;
      if (opts.dump) dump_kernel_row(*opts.dump, step.step_id, it->second);
    }
    step_seconds *= layers;

    if (step.phase == Phase::Prefill) {
      report.prefill_seconds += step_seconds;
    } else {
      report.decode_seconds += step_seconds;
      report.decode_step_seconds.push_back(step_seconds);
      for (const auto* t : timings) {
        report.class_seconds[t->klass] += layers * t->total_seconds;
        report.bound_seconds[t->bound.id] += layers * t->total_seconds;
      }
      if (step.context == rep_context) {
        report.rep_context = step.context;
        report.rep_kernels.clear();
        for (const auto* t : timings) report.rep_kernels.push_back(*t);
      }
    }
  }
  report.total_seconds = report.prefill_seconds + report.decode_seconds;

  double worst = -1;
  for (const auto& [id, seconds] : report.bound_seconds)
    if (seconds > worst) {
      worst = seconds;
      report.bottleneck = id;
    }
  return report;
}

double tps(const PerfReport& report, const PhaseSpec& phase, TpsMode mode) {
  const double tokens = static_cast<double>(phase.decode_len);
  const double seconds =
      mode == TpsMode::DecodeOnly ? report.decode_seconds : report.total_seconds;
  return tokens / seconds;
}

std::map<KernelClass, double> gemm_breakdown(const PerfReport& report) {
  std::map<KernelClass, double> seconds;
  double total = 0;
  for (const auto& t : report.rep_kernels) {
    if (!is_gemm_class(t.klass)) continue;
    seconds[t.klass] += t.total_seconds;
    total += t.total_seconds;
  }
  std::map<KernelClass, double> fractions;
  for (const auto& [klass, s] : seconds) fractions[klass] = s / total;
  return fractions;
}

void dump_kernel_header(std::ostream& os) {
  os << "step\tlayer\tclass\tbatch\tm\tn\tk\ttiles\tflush\tlevel:bytes/transfers/"
        "seconds\tbound\ttotal_s\n";
}

void dump_kernel_row(std::ostream& os, std::uint64_t step, const KernelTiming& t) {
  os << step << "\t*\t" << to_string(t.klass) << "\t" << t.batch << "\t" << t.m << "\t"
     << t.n << "\t" << t.k << "\t";
  if (is_attention(t.klass))
    os << "strip=" << t.plan.context_chunk << ",mchunk=" << t.plan.m_chunk;
  else
    os << t.plan.tm_outer << "x" << t.plan.tn_outer << "x" << t.plan.tk << "/"
       << t.plan.tm_inner << "x" << t.plan.tn_inner;
  static const char* kFlush[] = {"single", "per-inner", "per-head", "per-strip"};
  os << "\t" << kFlush[static_cast<int>(t.plan.flush)] << "\t";
  for (const auto& use : t.levels)
    os << use.level_id << ":" << use.bytes << "/" << use.transfers << "/"
       << use.seconds << " ";
  os << "\t" << t.bound.id << "\t" << t.total_seconds << "\n";
}

}  // namespace memroof
