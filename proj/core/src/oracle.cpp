#include "memroof/oracle.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace memroof::oracle {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

std::uint64_t clip(std::uint64_t extent, std::uint64_t tile, std::uint64_t index) {
  const std::uint64_t start = index * tile;
  return std::min(tile, extent - start);
}

struct Emitter {
  TransferTrace& trace;
  const Hierarchy& hierarchy;
  const std::vector<int>& levels;  // levels this operand stage emits to
  TensorClass tclass;

  void move(std::uint64_t bytes) {
    for (int lv : levels) {
      const std::string& id = lv == kChipletLevel ? hierarchy.chiplet->id
                                                  : hierarchy.level(lv).id;
      trace.moves.push_back({lv, id, tclass, bytes});
      auto& tot = trace.totals[lv];
      tot.bytes += bytes;
      tot.transfers += 1;
    }
  }
};

void walk_gemm_operand(const KernelDesc& kd, const Operand& op, const TilingPlan& p,
                       bool inner_stage, Emitter em) {
  const std::uint64_t b = kd.bytes_per_el;
  const std::uint64_t m = kd.m, n = kd.n, k = kd.k;
  const std::uint64_t Mo = ceil_div(m, p.tm_outer);
  const std::uint64_t No = ceil_div(n, p.tn_outer);
  const std::uint64_t Ko = ceil_div(k, p.tk);

  if (op.slot == OperandSlot::MatC) {
    if (p.flush == OutputFlush::Single) {
      em.move(op.bytes);
      return;
    }
    // Flushed per inner tile on the operand's own column span.
    const std::uint64_t cols = op.bytes / (m * b);
    const std::uint64_t Co = ceil_div(cols, p.tn_outer);
    for (std::uint64_t oi = 0; oi < Mo; ++oi) {
      const std::uint64_t bm = clip(m, p.tm_outer, oi);
      for (std::uint64_t oj = 0; oj < Co; ++oj) {
        const std::uint64_t bc = clip(cols, p.tn_outer, oj);
        for (std::uint64_t ii = 0; ii < ceil_div(bm, p.tm_inner); ++ii)
          for (std::uint64_t ij = 0; ij < ceil_div(bc, p.tn_inner); ++ij)
            em.move(clip(bm, p.tm_inner, ii) * clip(bc, p.tn_inner, ij) * b);
      }
    }
    return;
  }

  const bool is_a = op.slot == OperandSlot::MatA;
  const std::uint64_t rows = is_a ? m : n;  // the operand's non-k extent
  const std::uint64_t t_outer = is_a ? p.tm_outer : p.tn_outer;
  const std::uint64_t t_inner = is_a ? p.tm_inner : p.tn_inner;
  const bool fits = (inner_stage ? t_inner : t_outer) >= rows && p.tk >= k;
  if (fits) {
    em.move(op.bytes);
    return;
  }

  if (!inner_stage) {
    // One block move per outer tile visit; the cross loop forces refetch.
    const std::uint64_t cross = is_a ? No : Mo;
    const std::uint64_t own = is_a ? Mo : No;
    for (std::uint64_t x = 0; x < cross; ++x)
      for (std::uint64_t o = 0; o < own; ++o)
        for (std::uint64_t ok = 0; ok < Ko; ++ok)
          em.move(clip(rows, t_outer, o) * clip(k, p.tk, ok) * b);
    return;
  }

  // Inner stage: per outer tile pair, stream inner chunks; the operand is
  // re-read once per cross-dimension inner tile.
  const std::uint64_t co = is_a ? p.tn_outer : p.tm_outer;
  const std::uint64_t ci = is_a ? p.tn_inner : p.tm_inner;
  const std::uint64_t cross_extent = is_a ? n : m;
  const std::uint64_t CrossO = ceil_div(cross_extent, co);
  for (std::uint64_t o = 0; o < ceil_div(rows, t_outer); ++o) {
    const std::uint64_t brows = clip(rows, t_outer, o);
    for (std::uint64_t x = 0; x < CrossO; ++x) {
      const std::uint64_t bcross = clip(cross_extent, co, x);
      for (std::uint64_t xi = 0; xi < ceil_div(bcross, ci); ++xi)
        for (std::uint64_t ii = 0; ii < ceil_div(brows, t_inner); ++ii)
          for (std::uint64_t ok = 0; ok < Ko; ++ok)
            em.move(clip(brows, t_inner, ii) * clip(k, p.tk, ok) * b);
    }
  }
}

void walk_attention_operand(const KernelDesc& kd, const Operand& op,
                            const TilingPlan& p, Emitter em) {
  const std::uint64_t b = kd.bytes_per_el;
  const std::uint64_t heads = kd.batch;
  const std::uint64_t m = kd.m;
  const bool qkt = kd.klass == KernelClass::QKt;
  const std::uint64_t context = qkt ? kd.n : kd.k;
  const std::uint64_t head_dim = qkt ? kd.k : kd.n;
  const std::uint64_t Sc = ceil_div(context, p.context_chunk);
  const std::uint64_t Ma = ceil_div(m, p.m_chunk);

  switch (op.slot) {
    case OperandSlot::MatA:
      for (std::uint64_t am = 0; am < Ma; ++am) {
        const std::uint64_t rows = clip(m, p.m_chunk, am);
        if (!op.head_strided) {
          em.move(heads * rows * head_dim * b);  // contiguous all-head slab
          continue;
        }
        for (std::uint64_t h = 0; h < heads; ++h)
          for (std::uint64_t s = 0; s < Sc; ++s)
            em.move(rows * clip(context, p.context_chunk, s) * b);
      }
      return;
    case OperandSlot::MatB:
      for (std::uint64_t am = 0; am < Ma; ++am)
        for (std::uint64_t h = 0; h < heads; ++h)
          for (std::uint64_t s = 0; s < Sc; ++s)
            em.move(clip(context, p.context_chunk, s) * head_dim * b);
      return;
    case OperandSlot::MatC: {
      const std::uint64_t out_cols = qkt ? context : head_dim;
      switch (p.flush) {
        case OutputFlush::Single:
          em.move(op.bytes);
          return;
        case OutputFlush::PerHead:
          for (std::uint64_t am = 0; am < Ma; ++am)
            for (std::uint64_t h = 0; h < heads; ++h)
              em.move(clip(m, p.m_chunk, am) * out_cols * b);
          return;
        default:
          for (std::uint64_t am = 0; am < Ma; ++am)
            for (std::uint64_t h = 0; h < heads; ++h)
              for (std::uint64_t s = 0; s < Sc; ++s)
                em.move(clip(m, p.m_chunk, am) *
                        clip(context, p.context_chunk, s) * b);
          return;
      }
    }
    case OperandSlot::Pass: return;
  }
}

}  // namespace

TransferTrace simulate_plan(const KernelDesc& kernel, const TilingPlan& plan,
                            const std::vector<OperandRoute>& routes,
                            const Hierarchy& hierarchy) {
  constexpr std::uint64_t kMaxElements = 1ull << 22;
  for (const auto& op : kernel.operands)
    if (op.bytes / kernel.bytes_per_el > kMaxElements)
      throw std::invalid_argument("simulate_plan: operand too large for enumeration");
  if (routes.size() != kernel.operands.size())
    throw std::invalid_argument("simulate_plan: route/operand count mismatch");

  TransferTrace trace;
  const std::uint64_t sp_cap =
      hierarchy.level(0).capacity.value_or(std::uint64_t(-1));
  const std::uint64_t chunk = std::max<std::uint64_t>(1, sp_cap / 4);

  for (std::size_t i = 0; i < kernel.operands.size(); ++i) {
    const auto& op = kernel.operands[i];
    const auto& rt = routes[i];

    if (kernel.kind == KernelKind::Elementwise) {
      Emitter em{trace, hierarchy, rt.levels, op.tclass};
      std::uint64_t left = op.bytes;
      do {
        const std::uint64_t piece = std::min(left, chunk);
        em.move(piece);
        left -= piece;
      } while (left > 0);
      continue;
    }

    if (is_attention(kernel.klass)) {
      walk_attention_operand(kernel, op, plan,
                             Emitter{trace, hierarchy, rt.levels, op.tclass});
      continue;
    }

    // Plain GEMM: off-chip levels see outer-tile moves, the landing level
    // and inward see inner-tile moves.
    std::vector<int> outer_levels, inner_levels;
    for (int lv : rt.levels) {
      const bool inner = lv == kChipletLevel ||
                         static_cast<std::size_t>(lv) <= hierarchy.landing_index();
      (inner ? inner_levels : outer_levels).push_back(lv);
    }
    if (!outer_levels.empty())
      walk_gemm_operand(kernel, op, plan, false,
                        Emitter{trace, hierarchy, outer_levels, op.tclass});
    if (!inner_levels.empty())
      walk_gemm_operand(kernel, op, plan, true,
                        Emitter{trace, hierarchy, inner_levels, op.tclass});
  }
  return trace;
}

std::uint64_t flop_count(const KernelDesc& kernel) {
  if (kernel.kind != KernelKind::GEMM) return 0;
  return 2ull * kernel.batch * kernel.m * kernel.n * kernel.k;
}

void TransferTrace::dump(std::ostream& os, const Hierarchy& hierarchy) const {
  os << "level\tclass\tbytes\n";
  for (const auto& mv : moves)
    os << mv.level_id << "\t" << to_string(mv.tclass) << "\t" << mv.bytes << "\n";
  os << "-- totals --\n";
  for (const auto& [lv, tot] : totals) {
    const std::string& id = lv == kChipletLevel ? hierarchy.chiplet->id
                                                : hierarchy.level(lv).id;
    os << id << "\tbytes=" << tot.bytes << "\ttransfers=" << tot.transfers << "\n";
  }
}

}  // namespace memroof::oracle
