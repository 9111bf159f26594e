#pragma once

#include <vector>

#include "sgsa/skeleton.hpp"
#include "sgsa/tensor.hpp"

namespace sgsa {

// Disallowed score entries are replaced by this before the softmax; exp
// underflows to exactly zero, so masked positions contribute nothing.
inline constexpr double kMaskedScore = -1e9;

enum class AttentionMode { baseline, sgsa };

// One attention head's projections. Score dimensionality d_k is w_q's
// column count.
struct AttentionHead {
    Tensor w_q;
    Tensor w_k;
    Tensor w_v;
};

struct AttentionParams {
    std::vector<AttentionHead> heads;
    Tensor w_o;  // (h * d_head_v) x d_out

    int head_count() const { return static_cast<int>(heads.size()); }
};

// softmax(q Wq (k Wk)^T / sqrt(d_k)) (v Wv), optionally score-masked.
Tensor scaled_self_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionHead& head,
                             const TemporalMask* score_mask = nullptr);

// Skeletal variant: the value path is v * A_star * Wv, so information
// propagates only along skeletal edges. Requires square S x S projections.
Tensor sgsa_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionHead& head,
                      const Tensor& a_star, const TemporalMask* score_mask = nullptr);

// Per-head attention concatenated and projected by w_o. In sgsa mode every
// head keeps the full width S and w_o maps h*S -> S.
Tensor multi_head(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionParams& params,
                  AttentionMode mode, const Tensor* a_star = nullptr, const TemporalMask* score_mask = nullptr);

// Standard encoder-decoder attention; queries from the decoder, keys and
// values from the encoder memory, no spatial or temporal mask.
Tensor cross_attention(const Tensor& queries, const Tensor& memory, const AttentionParams& params);

}  // namespace sgsa
