#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgsa/data.hpp"
#include "sgsa/model.hpp"
#include "sgsa/rng.hpp"
#include "sgsa/tensor.hpp"

namespace sgsa {

struct TrainingConfig {
    double learning_rate = 1e-3;
    double noise_rate = 5.0;
    double lambda_pose = 1.0;
    double lambda_gloss = 1.0;
    int batch_size = 1;
    int epochs = 100;
    std::uint64_t seed = 1;
    std::optional<double> grad_clip;  // global-norm clip, off by default
};

// Mean over frames of the summed squared coordinate error.
Tensor mse_loss(const Tensor& predicted, const Tensor& target);

Tensor combined_loss(const Tensor& pose_loss, const Tensor& gloss_loss, double lambda_pose, double lambda_gloss);

// frames + rate * 0.01 * channel_std * g with g ~ N(0, 1); the counter
// channel is left untouched. Applied to teacher-forcing inputs only.
Tensor noise_augment(const Tensor& frames, double rate, const std::vector<double>& channel_std,
                     std::optional<int> counter_col, Rng& rng);

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Tensor xavier_init(int rows, int cols, Rng& rng);

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
};

// Standard bias-corrected Adam update, in place. `name` labels the
// parameter in non-finite-gradient errors.
void adam_step(Tensor& param, const std::string& name, AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

struct EpochMetrics {
    int epoch = 0;
    std::string split;
    double mse = 0.0;
    double gloss_acc = 0.0;
    double wall_time = 0.0;
};

struct TrainOptions {
    std::string checkpoint_path;  // best checkpoint (by dev MSE) goes here
    std::string metrics_path;     // line-delimited metric records; empty = no log
};

struct TrainResult {
    std::vector<EpochMetrics> history;
    double best_dev_mse = 0.0;
    int best_epoch = -1;
};

// Teacher-forced training of the combined pose + gloss loss. Poses are
// normalized with `stats` on the way in. Divergence (non-finite loss)
// restores the last finite epoch, saves it, and raises TrainingError.
TrainResult train(SlpModel& model, const std::vector<DatasetRecord>& train_set,
                  const std::vector<DatasetRecord>& dev_set, const Vocabulary& src_vocab,
                  const Vocabulary& gloss_vocab, const NormStats& stats, const TrainingConfig& config,
                  const TrainOptions& options);

// Teacher-forced inputs for a normalized pose matrix: zero start frame plus
// all frames but the last.
Tensor teacher_inputs(const Tensor& normalized_pose);

struct EvalResult {
    double mse = 0.0;
    double gloss_acc = 0.0;
};
EvalResult evaluate(SlpModel& model, const std::vector<DatasetRecord>& records, const Vocabulary& src_vocab,
                    const Vocabulary& gloss_vocab, const NormStats& stats);

// Central finite differences of the full combined loss against the
// backward pass, over every trainable parameter coordinate. Returns the
// max of |analytic - fd| / max(1, |analytic|).
double model_loss_grad_check(SlpModel& model, const DatasetRecord& record, const Vocabulary& src_vocab,
                             const Vocabulary& gloss_vocab, const NormStats& stats,
                             const TrainingConfig& config, double step);

}  // namespace sgsa
