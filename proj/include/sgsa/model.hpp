#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgsa/attention.hpp"
#include "sgsa/data.hpp"
#include "sgsa/rng.hpp"
#include "sgsa/skeleton.hpp"
#include "sgsa/tensor.hpp"

namespace sgsa {

struct ModelConfig {
    int enc_layers = 2;
    int enc_heads = 4;
    int enc_embed = 256;
    int dec_layers = 5;
    int dec_heads = 4;
    bool dec_sgsa = true;  // false: plain self-attention decoder (the no-graph ablation)
    std::optional<int> temporal_window;  // frames each step may look back; none = unbounded
    int cross_head_dim = 64;
    int max_frames = 64;
    double counter_stop = 0.99;
    int src_vocab = 0;
    int gloss_vocab = 0;

    std::string to_json_text() const;
    static ModelConfig from_json_text(const std::string& text);
};

struct NamedParam {
    std::string name;
    Tensor tensor;
};

// Text -> pose network: token embedding + transformer encoder with a bridge
// to width S, and an autoregressive decoder whose self-attention is masked
// by the skeleton adjacency (full-dimension heads) and a banded causal
// temporal mask. The cross-attention context of the last decoder layer is
// the sign representation consumed by the gloss head.
class SlpModel {
public:
    SlpModel(ModelConfig config, SkeletonTopology topology, std::uint64_t init_seed);

    SlpModel(SlpModel&&) = default;
    SlpModel& operator=(SlpModel&&) = default;

    const ModelConfig& config() const { return config_; }
    const SkeletonTopology& topology() const { return topology_; }
    int width() const { return topology_.width(); }
    const Tensor& a_star() const { return adjacency_.a_star; }

    Tape& tape() { return *tape_; }
    void zero_grad();
    const std::vector<NamedParam>& parameters() const { return params_; }
    long parameter_count() const;
    std::map<std::string, long> parameter_breakdown() const;  // two-segment name groups

    // Token embedding + positional encoding -> enc_layers of self-attention
    // and feed-forward -> linear bridge to width S. Trailing <pad> (id 0)
    // tokens are dropped.
    Tensor encode(const std::vector<int>& token_ids);

    struct DecodeResult {
        Tensor preds;  // U x S, row u predicts the frame after input row u
        Tensor rep;    // U x S cross-attention context (gloss head input)
    };
    // Full teacher-forced pass over the given decoder inputs.
    DecodeResult decode_teacher(const Tensor& memory, const Tensor& input_frames);

    // One autoregressive step: previous_frames holds the start frame plus
    // everything produced so far.
    std::pair<Tensor, Tensor> decode_step(const Tensor& memory, const Tensor& previous_frames);

    Tensor gloss_logits(const Tensor& rep);

    // Greedy autoregressive generation in normalized pose space. Stops when
    // the produced counter reaches counter_stop or at max_frames.
    Tensor generate(const std::vector<int>& token_ids);

    // Copies values into the named parameter; shape-checked.
    void set_parameter(const std::string& name, const std::vector<double>& values);

private:
    struct FeedForward {
        Tensor w1, b1, w2, b2;
    };
    struct LayerNormParams {
        Tensor gain, bias;
    };
    struct EncoderLayer {
        AttentionParams self_attn;
        LayerNormParams ln1;
        FeedForward ff;
        LayerNormParams ln2;
    };
    struct DecoderLayer {
        AttentionParams self_attn;
        LayerNormParams ln1;
        AttentionParams cross;
        LayerNormParams ln2;
        FeedForward ff;
        LayerNormParams ln3;
    };

    Tensor reg(const std::string& name, int rows, int cols, bool xavier);
    AttentionParams make_attention(const std::string& prefix, int d_model, int heads, int d_head, int d_out);
    FeedForward make_ff(const std::string& prefix, int width, int inner);
    LayerNormParams make_ln(const std::string& prefix, int width);

    Tensor apply_ff(const FeedForward& ff, const Tensor& x);
    Tensor apply_ln(const LayerNormParams& ln, const Tensor& x);
    Tensor positional_rows(int rows, int width, int skip_col) const;

    ModelConfig config_;
    SkeletonTopology topology_;
    AdjacencySet adjacency_;
    std::unique_ptr<Tape> tape_;
    std::unique_ptr<Rng> init_rng_;
    std::vector<NamedParam> params_;

    Tensor src_embedding_;
    std::vector<EncoderLayer> enc_layers_;
    Tensor bridge_w_, bridge_b_;
    std::vector<DecoderLayer> dec_layers_;
    Tensor out_w_, out_b_;
    Tensor gloss_w_, gloss_b_;
};

// Layer-norm epsilon used throughout the network.
inline constexpr double kLayerNormEps = 1e-6;

// Drives an autoregressive loop: step receives the frames so far (starting
// with the all-zero seed frame) and returns the next 1 x width frame. Stops
// when the counter column reaches stop_threshold, or after max_frames.
Tensor run_autoregressive(const std::function<Tensor(const Tensor&)>& step, int width,
                          std::optional<int> counter_col, int max_frames, double stop_threshold);

long count_parameters(const ModelConfig& config, const SkeletonTopology& topology);

// ---- checkpointing -----------------------------------------------------------

struct LoadedModel {
    SlpModel model;
    Vocabulary src_vocab;
    Vocabulary gloss_vocab;
    NormStats stats;
};

void save_checkpoint(const SlpModel& model, const Vocabulary& src_vocab, const Vocabulary& gloss_vocab,
                     const NormStats& stats, const std::string& path);
LoadedModel load_checkpoint(const std::string& path);

}  // namespace sgsa
