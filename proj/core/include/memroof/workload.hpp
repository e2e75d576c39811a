#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace memroof {

// Tensor classes drive placement: every kernel operand carries exactly one.
enum class TensorClass { Weights, Q, K, V, KVCache, AttnActivations, OtherActivations };

enum class KernelClass { QKVGen, QKt, SoftmaxV, Projection, MLP1, MLP2, Elementwise };

enum class KernelKind { GEMM, Elementwise };

enum class ReuseRole { Streamed, Stationary, Output };

// Position of an operand in the kernel's dataflow. MatA is the m-by-k
// input, MatB the k-by-n input, MatC an output block; Pass is a flat
// elementwise sweep.
enum class OperandSlot { MatA, MatB, MatC, Pass };

std::string_view to_string(TensorClass c);
std::string_view to_string(KernelClass c);
bool is_attention(KernelClass c);
bool is_gemm_class(KernelClass c);

struct Operand {
  TensorClass tclass{};
  std::uint64_t bytes = 0;
  ReuseRole role = ReuseRole::Streamed;
  OperandSlot slot = OperandSlot::Pass;
  // Laid out as one plane/row per attention head. Reads of such data
  // issue at least one transaction per head at the residency level.
  bool head_strided = false;
  bool write = false;
};

struct KernelDesc {
  KernelKind kind = KernelKind::GEMM;
  KernelClass klass = KernelClass::QKVGen;
  std::uint64_t m = 1, n = 1, k = 1;
  std::uint64_t batch = 1;  // per-head batching for attention
  std::uint64_t bytes_per_el = 2;
  std::uint64_t flops = 0;  // 2*batch*m*n*k for GEMM, 0 for elementwise
  std::vector<Operand> operands;
};

struct ModelSpec {
  std::string name;
  std::uint64_t n_layers = 1;
  std::uint64_t d_model = 1;
  std::uint64_t n_heads = 1;
  std::uint64_t d_ff = 1;
  std::uint64_t n_ffn_mats = 3;  // 2 or 3; the gate GEMM reuses MLP1's shape
  std::uint64_t bytes_per_el = 2;
  std::uint64_t vocab_size = 1;  // footprint only, never timed

  std::uint64_t head_dim() const { return d_model / n_heads; }
  void validate() const;  // throws std::invalid_argument
};

struct PhaseSpec {
  std::uint64_t prefill_len = 0;
  std::uint64_t decode_len = 1;

  // context(t) = prefill_len + t for decode step t in [1, decode_len]
  std::uint64_t context_at(std::uint64_t t) const { return prefill_len + t; }
  std::uint64_t final_context() const { return prefill_len + decode_len; }
  void validate() const;
};

enum class Phase { Prefill, Decode };

// One inference step. Kernels are listed for a single decoder layer; all
// n_layers layers execute the identical list in sequence.
struct Step {
  std::uint64_t step_id = 0;
  Phase phase = Phase::Decode;
  std::uint64_t context = 1;
  std::uint64_t tokens_in_flight = 1;
  std::vector<KernelDesc> layer_kernels;
};

struct KernelGraph {
  ModelSpec model;
  PhaseSpec phase;
  std::vector<Step> steps;  // prefill step (if any) followed by decode steps
};

// Per-layer kernel list in fixed order:
//   QKV-gen, Q.K^T, Softmax(R).V, projection, MLP1 [, gate], MLP2, elementwise.
std::vector<KernelDesc> build_decoder_layer_kernels(const ModelSpec& model,
                                                    std::uint64_t context_len,
                                                    std::uint64_t tokens_in_flight);

// Full K and V caching across heads: 2 * n_layers * d_model * context * bytes_per_el.
std::uint64_t kv_cache_bytes(const ModelSpec& model, std::uint64_t context_len);

// Decoder weights plus the vocab embedding footprint.
std::uint64_t weight_bytes(const ModelSpec& model);

KernelGraph build_inference_graph(const ModelSpec& model, const PhaseSpec& phase);

ModelSpec model_preset(std::string_view name);
std::vector<std::string> model_preset_names();

}  // namespace memroof
