#pragma once

// Shared generators for randomized tests. Everything is seeded explicitly so
// failures reproduce.

#include <random>
#include <vector>

#include "memroof/hardware.hpp"
#include "memroof/placement.hpp"
#include "memroof/workload.hpp"

namespace memroof::testutil {

using Rng = std::mt19937_64;

inline std::uint64_t pick(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

inline double pick_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// 2-4 levels, small scratchpad so plans actually tile.
inline Hierarchy random_hierarchy(Rng& rng, std::size_t n_levels = 0,
                                  bool zero_latency = false) {
  if (n_levels == 0) n_levels = pick(rng, 2, 4);
  static const char* kIds[] = {"scratchpad", "l2", "ddr", "hbs"};
  Hierarchy h;
  h.compute.peak_flops = pick_real(rng, 1e11, 1e14);
  for (std::size_t i = 0; i < n_levels; ++i) {
    MemoryLevel lv;
    lv.id = kIds[i];
    if (i == 0) lv.capacity = pick(rng, 1, 16) * 4096;
    else if (i == 1 && n_levels > 2) lv.capacity = pick(rng, 64, 256) * 4096;
    else lv.capacity = std::nullopt;
    lv.bandwidth = pick_real(rng, 1e9, 1e12);
    lv.latency = zero_latency ? 0.0 : pick_real(rng, 0, 2e-6);
    h.levels.push_back(lv);
  }
  return h;
}

// Residency map sending every class to one random level of the hierarchy.
inline PlacementPolicy random_policy(Rng& rng, const Hierarchy& h) {
  PlacementPolicy p;
  p.name = "random";
  const TensorClass classes[] = {
      TensorClass::Weights,         TensorClass::Q,
      TensorClass::K,               TensorClass::V,
      TensorClass::KVCache,         TensorClass::AttnActivations,
      TensorClass::OtherActivations};
  for (auto c : classes)
    p.residency[c] = h.levels[pick(rng, 0, h.levels.size() - 1)].id;
  return p;
}

// Small weight-style GEMM with the standard operand layout.
inline KernelDesc random_gemm(Rng& rng, std::uint64_t max_dim = 64) {
  const std::uint64_t m = pick(rng, 1, max_dim);
  const std::uint64_t n = pick(rng, 1, max_dim);
  const std::uint64_t k = pick(rng, 1, max_dim);
  const std::uint64_t b = std::uint64_t(1) << pick(rng, 0, 2);
  KernelDesc kd;
  kd.kind = KernelKind::GEMM;
  kd.klass = KernelClass::Projection;
  kd.m = m;
  kd.n = n;
  kd.k = k;
  kd.batch = 1;
  kd.bytes_per_el = b;
  kd.flops = 2 * m * n * k;
  kd.operands = {
      {TensorClass::OtherActivations, m * k * b, ReuseRole::Streamed, OperandSlot::MatA,
       false, false},
      {TensorClass::Weights, k * n * b, ReuseRole::Streamed, OperandSlot::MatB, false,
       false},
      {TensorClass::OtherActivations, m * n * b, ReuseRole::Output, OperandSlot::MatC,
       false, true}};
  return kd;
}

inline KernelDesc random_attention(Rng& rng, std::uint64_t max_dim = 64) {
  const bool qkt = pick(rng, 0, 1) == 0;
  const std::uint64_t heads = pick(rng, 1, 4);
  const std::uint64_t m = pick(rng, 1, 4);
  const std::uint64_t context = pick(rng, 1, max_dim);
  const std::uint64_t head_dim = pick(rng, 1, 16);
  const std::uint64_t b = std::uint64_t(1) << pick(rng, 0, 2);
  KernelDesc kd;
  kd.kind = KernelKind::GEMM;
  kd.bytes_per_el = b;
  kd.batch = heads;
  kd.m = m;
  if (qkt) {
    kd.klass = KernelClass::QKt;
    kd.n = context;
    kd.k = head_dim;
    kd.operands = {
        {TensorClass::Q, heads * m * head_dim * b, ReuseRole::Stationary,
         OperandSlot::MatA, false, false},
        {TensorClass::KVCache, heads * head_dim * context * b, ReuseRole::Streamed,
         OperandSlot::MatB, true, false},
        {TensorClass::AttnActivations, heads * m * context * b, ReuseRole::Output,
         OperandSlot::MatC, false, true}};
  } else {
    kd.klass = KernelClass::SoftmaxV;
    kd.n = head_dim;
    kd.k = context;
    kd.operands = {
        {TensorClass::AttnActivations, heads * m * context * b, ReuseRole::Streamed,
         OperandSlot::MatA, true, false},
        {TensorClass::KVCache, heads * context * head_dim * b, ReuseRole::Streamed,
         OperandSlot::MatB, true, false},
        {TensorClass::AttnActivations, heads * m * head_dim * b, ReuseRole::Output,
         OperandSlot::MatC, false, true}};
  }
  kd.flops = 2 * heads * kd.m * kd.n * kd.k;
  return kd;
}

inline KernelDesc random_kernel(Rng& rng, std::uint64_t max_dim = 64) {
  return pick(rng, 0, 2) == 0 ? random_attention(rng, max_dim)
                              : random_gemm(rng, max_dim);
}

}  // namespace memroof::testutil
