#include "memroof/workload.hpp"

#include <stdexcept>

namespace memroof {

std::string_view to_string(TensorClass c) {
  switch (c) {
    case TensorClass::Weights: return "weights";
    case TensorClass::Q: return "q";
    case TensorClass::K: return "k";
    case TensorClass::V: return "v";
    case TensorClass::KVCache: return "kv-cache";
    case TensorClass::AttnActivations: return "attn-activations";
    case TensorClass::OtherActivations: return "other-activations";
  }
  return "?";
}

std::string_view to_string(KernelClass c) {
  switch (c) {
    case KernelClass::QKVGen: return "qkv-gen";
    case KernelClass::QKt: return "qkt";
    case KernelClass::SoftmaxV: return "softmax-v";
    case KernelClass::Projection: return "projection";
    case KernelClass::MLP1: return "mlp1";
    case KernelClass::MLP2: return "mlp2";
    case KernelClass::Elementwise: return "elementwise";
  }
  return "?";
}

bool is_attention(KernelClass c) {
  return c == KernelClass::QKt || c == KernelClass::SoftmaxV;
}

bool is_gemm_class(KernelClass c) { return c != KernelClass::Elementwise; }

void ModelSpec::validate() const {
  if (n_layers < 1 || d_model < 1 || n_heads < 1 || d_ff < 1 || vocab_size < 1)
    throw std::invalid_argument("model '" + name + "': all counts must be >= 1");
  if (d_model % n_heads != 0)
    throw std::invalid_argument("model '" + name +
                                "': d_model must be divisible by n_heads");
  if (bytes_per_el != 1 && bytes_per_el != 2 && bytes_per_el != 4)
    throw std::invalid_argument("model '" + name + "': bytes_per_el must be 1, 2 or 4");
  if (n_ffn_mats != 2 && n_ffn_mats != 3)
    throw std::invalid_argument("model '" + name + "': n_ffn_mats must be 2 or 3");
}

void PhaseSpec::validate() const {
  if (decode_len < 1) throw std::invalid_argument("decode_len must be >= 1");
}

namespace {

std::uint64_t gemm_flops(std::uint64_t batch, std::uint64_t m, std::uint64_t n,
                         std::uint64_t k) {
  return 2ull * batch * m * n * k;
}

KernelDesc weight_gemm(KernelClass klass, const ModelSpec& mdl, std::uint64_t m,
                       std::uint64_t n, std::uint64_t k, TensorClass in_class,
                       std::vector<Operand> outs) {
  const std::uint64_t b = mdl.bytes_per_el;
  KernelDesc kd;
  kd.kind = KernelKind::GEMM;
  kd.klass = klass;
  kd.m = m;
  kd.n = n;
  kd.k = k;
  kd.batch = 1;
  kd.bytes_per_el = b;
  kd.flops = gemm_flops(1, m, n, k);
  kd.operands.push_back({in_class, m * k * b,
                         m == 1 ? ReuseRole::Stationary : ReuseRole::Streamed,
                         OperandSlot::MatA, false, false});
  kd.operands.push_back(
      {TensorClass::Weights, k * n * b, ReuseRole::Streamed, OperandSlot::MatB, false, false});
  for (auto& o : outs) kd.operands.push_back(o);
  return kd;
}

}  // namespace

std::vector<KernelDesc> build_decoder_layer_kernels(const ModelSpec& model,
                                                    std::uint64_t context_len,
                                                    std::uint64_t tokens_in_flight) {
  model.validate();
  if (tokens_in_flight < 1 || context_len < tokens_in_flight)
    throw std::invalid_argument("need context_len >= tokens_in_flight >= 1");

  const std::uint64_t d = model.d_model;
  const std::uint64_t hd = model.head_dim();
  const std::uint64_t heads = model.n_heads;
  const std::uint64_t dff = model.d_ff;
  const std::uint64_t b = model.bytes_per_el;
  const std::uint64_t m = tokens_in_flight;
  const std::uint64_t c = context_len;

  std::vector<KernelDesc> kernels;

  // X . W_QKV -> Q, K, V. The fresh K/V columns are the cache append.
  kernels.push_back(weight_gemm(
      KernelClass::QKVGen, model, m, 3 * d, d, TensorClass::OtherActivations,
      {{TensorClass::Q, m * d * b, ReuseRole::Output, OperandSlot::MatC, false, true},
       {TensorClass::K, m * d * b, ReuseRole::Output, OperandSlot::MatC, false, true},
       {TensorClass::V, m * d * b, ReuseRole::Output, OperandSlot::MatC, false, true}}));

  // Q . K^T = R, batched per head. K planes come from the cache.
  {
    KernelDesc kd;
    kd.kind = KernelKind::GEMM;
    kd.klass = KernelClass::QKt;
    kd.batch = heads;
    kd.m = m;
    kd.n = c;
    kd.k = hd;
    kd.bytes_per_el = b;
    kd.flops = gemm_flops(heads, m, c, hd);
    kd.operands = {
        {TensorClass::Q, heads * m * hd * b, ReuseRole::Stationary, OperandSlot::MatA, false, false},
        {TensorClass::KVCache, heads * hd * c * b, ReuseRole::Streamed, OperandSlot::MatB, true, false},
        {TensorClass::AttnActivations, heads * m * c * b, ReuseRole::Output, OperandSlot::MatC, false, true}};
    kernels.push_back(kd);
  }

  // Softmax(R) . V = Z. R is read back per head after the softmax pass.
  {
    KernelDesc kd;
    kd.kind = KernelKind::GEMM;
    kd.klass = KernelClass::SoftmaxV;
    kd.batch = heads;
    kd.m = m;
    kd.n = hd;
    kd.k = c;
    kd.bytes_per_el = b;
    kd.flops = gemm_flops(heads, m, hd, c);
    kd.operands = {
        {TensorClass::AttnActivations, heads * m * c * b, ReuseRole::Streamed, OperandSlot::MatA, true, false},
        {TensorClass::KVCache, heads * c * hd * b, ReuseRole::Streamed, OperandSlot::MatB, true, false},
        {TensorClass::AttnActivations, heads * m * hd * b, ReuseRole::Output, OperandSlot::MatC, false, true}};
    kernels.push_back(kd);
  }

  // Z . W_O (projection).
  kernels.push_back(weight_gemm(
      KernelClass::Projection, model, m, d, d, TensorClass::AttnActivations,
      {{TensorClass::OtherActivations, m * d * b, ReuseRole::Output, OperandSlot::MatC, false, true}}));

  // MLP up (+ gate with the same shape when n_ffn_mats == 3), then down.
  kernels.push_back(weight_gemm(
      KernelClass::MLP1, model, m, dff, d, TensorClass::OtherActivations,
      {{TensorClass::OtherActivations, m * dff * b, ReuseRole::Output, OperandSlot::MatC, false, true}}));
  if (model.n_ffn_mats == 3) {
    kernels.push_back(weight_gemm(
        KernelClass::MLP1, model, m, dff, d, TensorClass::OtherActivations,
        {{TensorClass::OtherActivations, m * dff * b, ReuseRole::Output, OperandSlot::MatC, false, true}}));
  }
  kernels.push_back(weight_gemm(
      KernelClass::MLP2, model, m, d, dff, TensorClass::OtherActivations,
      {{TensorClass::OtherActivations, m * d * b, ReuseRole::Output, OperandSlot::MatC, false, true}}));

  // Softmax and normalization traffic: read+write over R, two read+write
  // passes over the layer activation. Pure bandwidth, zero flops.
  {
    KernelDesc ew;
    ew.kind = KernelKind::Elementwise;
    ew.klass = KernelClass::Elementwise;
    ew.m = m;
    ew.n = c;
    ew.k = 0;
    ew.batch = heads;
    ew.bytes_per_el = b;
    ew.flops = 0;
    const std::uint64_t r_bytes = heads * m * c * b;
    const std::uint64_t x_bytes = m * d * b;
    ew.operands = {
        {TensorClass::AttnActivations, r_bytes, ReuseRole::Streamed, OperandSlot::Pass, false, false},
        {TensorClass::AttnActivations, r_bytes, ReuseRole::Output, OperandSlot::Pass, false, true},
        {TensorClass::OtherActivations, x_bytes, ReuseRole::Streamed, OperandSlot::Pass, false, false},
        {TensorClass::OtherActivations, x_bytes, ReuseRole::Output, OperandSlot::Pass, false, true},
        {TensorClass::OtherActivations, x_bytes, ReuseRole::Streamed, OperandSlot::Pass, false, false},
        {TensorClass::OtherActivations, x_bytes, ReuseRole::Output, OperandSlot::Pass, false, true}};
    kernels.push_back(ew);
  }

  return kernels;
}

std::uint64_t kv_cache_bytes(const ModelSpec& model, std::uint64_t context_len) {
  return 2ull * model.n_layers * model.d_model * context_len * model.bytes_per_el;
}

std::uint64_t weight_bytes(const ModelSpec& model) {
  const std::uint64_t per_layer =
      4ull * model.d_model * model.d_model +
      model.n_ffn_mats * model.d_model * model.d_ff;
  return (model.n_layers * per_layer + model.vocab_size * model.d_model) *
         model.bytes_per_el;
}

KernelGraph build_inference_graph(const ModelSpec& model, const PhaseSpec& phase) {
  model.validate();
  phase.validate();
  KernelGraph g;
  g.model = model;
  g.phase = phase;
  g.steps.reserve(phase.decode_len + 1);
  if (phase.prefill_len > 0) {
    Step s;
    s.step_id = 0;
    s.phase = Phase::Prefill;
    s.context = phase.prefill_len;
    s.tokens_in_flight = phase.prefill_len;
    s.layer_kernels = build_decoder_layer_kernels(model, s.context, s.tokens_in_flight);
    g.steps.push_back(std::move(s));
  }
  for (std::uint64_t t = 1; t <= phase.decode_len; ++t) {
    Step s;
    s.step_id = t;
    s.phase = Phase::Decode;
    s.context = phase.context_at(t);
    s.tokens_in_flight = 1;
    s.layer_kernels = build_decoder_layer_kernels(model, s.context, 1);
    g.steps.push_back(std::move(s));
  }
  return g;
}

ModelSpec model_preset(std::string_view name) {
  if (name == "llava15-13b")
    return {"llava15-13b", 40, 5120, 40, 13824, 3, 2, 32000};
  if (name == "llama32-1b")
    return {"llama32-1b", 16, 2048, 32, 8192, 3, 2, 128256};
  std::string known;
  for (const auto& n : model_preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown model preset '" + std::string(name) +
                              "'; valid presets: " + known);
}

std::vector<std::string> model_preset_names() { return {"llava15-13b", "llama32-1b"}; }

}  // namespace memroof
