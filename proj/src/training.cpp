#include "sgsa/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace sgsa {

Tensor mse_loss(const Tensor& predicted, const Tensor& target) {
    if (predicted.rows() != target.rows() || predicted.cols() != target.cols())
        throw DimensionError("mse_loss: " + predicted.shape_str() + " vs " + target.shape_str());
    Tensor diff = sub(predicted, target);
    return scale(sum_all(mul(diff, diff)), 1.0 / predicted.rows());
}

Tensor combined_loss(const Tensor& pose_loss, const Tensor& gloss_loss, double lambda_pose,
                     double lambda_gloss) {
    if (!pose_loss.is_scalar() || !gloss_loss.is_scalar())
        throw ContractError("combined_loss: losses must be scalars");
    return add(scale(pose_loss, lambda_pose), scale(gloss_loss, lambda_gloss));
}

Tensor noise_augment(const Tensor& frames, double rate, const std::vector<double>& channel_std,
                     std::optional<int> counter_col, Rng& rng) {
    if (static_cast<int>(channel_std.size()) != frames.cols())
        throw DimensionError("noise_augment: " + std::to_string(channel_std.size()) + " stds for " +
                             frames.shape_str());
    if (rate == 0.0) return frames;
    constexpr double kBaseScale = 0.01;
    Tensor out = frames.detached_copy();
    for (int u = 0; u < out.rows(); ++u)
        for (int c = 0; c < out.cols(); ++c) {
            if (counter_col && c == *counter_col) continue;
            out(u, c) += rate * kBaseScale * channel_std[c] * rng.gaussian();
        }
    return out;
}

Tensor xavier_init(int rows, int cols, Rng& rng) {
    const double bound = std::sqrt(6.0 / (rows + cols));
    std::vector<double> v(static_cast<std::size_t>(rows) * cols);
    for (double& x : v) x = rng.uniform(-bound, bound);
    return Tensor(rows, cols, std::move(v));
}

void adam_step(Tensor& param, const std::string& name, AdamState& state, double lr, double beta1, double beta2,
               double eps) {
    const std::size_t n = param.size();
    if (state.m.size() != n) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
        state.t = 0;
    }
    const std::vector<double>& g = param.grad();
    for (double gv : g)
        if (!std::isfinite(gv)) throw TrainingError("non-finite gradient for parameter " + name);
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    auto& values = param.mutable_values();
    for (std::size_t i = 0; i < n; ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g[i] * g[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        values[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

Tensor teacher_inputs(const Tensor& normalized_pose) {
    const int u = normalized_pose.rows(), s = normalized_pose.cols();
    Tensor inputs(u, s);
    for (int r = 1; r < u; ++r)
        for (int c = 0; c < s; ++c) inputs(r, c) = normalized_pose(r - 1, c);
    return inputs;
}

namespace {

std::vector<int> token_ids(const Vocabulary& vocab, const std::vector<std::string>& tokens) {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(vocab.id(t));
    return ids;
}

std::vector<int> gloss_ids(const Vocabulary& vocab, const std::vector<std::string>& glosses) {
    std::vector<int> ids;
    ids.reserve(glosses.size());
    // labels outside the training inventory count against accuracy via the
    // padding label at index 0
    for (const auto& g : glosses) ids.push_back(vocab.id_or(g, 0));
    return ids;
}

// per-channel std of the normalized training frames, for the noise unit
std::vector<double> normalized_channel_std(const std::vector<DatasetRecord>& train, const NormStats& stats) {
    const int s = static_cast<int>(stats.mean.size());
    std::vector<double> sum(s, 0.0), sumsq(s, 0.0);
    long frames = 0;
    for (const auto& rec : train) {
        Tensor norm = normalize_pose(rec.pose, stats);
        for (int u = 0; u < norm.rows(); ++u)
            for (int c = 0; c < s; ++c) {
                sum[c] += norm(u, c);
                sumsq[c] += norm(u, c) * norm(u, c);
            }
        frames += norm.rows();
    }
    std::vector<double> out(s, 0.0);
    if (frames == 0) return out;
    for (int c = 0; c < s; ++c) {
        const double mean = sum[c] / frames;
        const double var = std::max(0.0, sumsq[c] / frames - mean * mean);
        out[c] = std::sqrt(var);
    }
    return out;
}

struct RecordPass {
    Tensor loss;
    double pose_mse = 0.0;
    long gloss_correct = 0;
    long gloss_total = 0;
};

RecordPass forward_record(SlpModel& model, const DatasetRecord& rec, const Vocabulary& src_vocab,
                          const Vocabulary& gloss_vocab, const NormStats& stats, const TrainingConfig& config,
                          Rng* noise_rng, const std::vector<double>* channel_std) {
    RecordPass result;
    Tensor target = normalize_pose(rec.pose, stats);
    Tensor inputs = teacher_inputs(target);
    std::optional<int> counter;
    if (stats.counter_col >= 0) counter = stats.counter_col;
    if (noise_rng != nullptr && config.noise_rate != 0.0)
        inputs = noise_augment(inputs, config.noise_rate, *channel_std, counter, *noise_rng);

    Tensor memory = model.encode(token_ids(src_vocab, rec.text));
    SlpModel::DecodeResult decoded = model.decode_teacher(memory, inputs);
    Tensor pose_loss = mse_loss(decoded.preds, target);
    result.pose_mse = pose_loss.scalar_value();

    const bool use_gloss = !rec.gloss_frames.empty() && config.lambda_gloss != 0.0;
    if (use_gloss) {
        const std::vector<int> targets = gloss_ids(gloss_vocab, rec.gloss_frames);
        Tensor logits = model.gloss_logits(decoded.rep);
        Tensor gl = cross_entropy_rows(logits, targets);
        result.loss = combined_loss(pose_loss, gl, config.lambda_pose, config.lambda_gloss);
        for (int u = 0; u < logits.rows(); ++u) {
            int best = 0;
            for (int j = 1; j < logits.cols(); ++j)
                if (logits(u, j) > logits(u, best)) best = j;
            if (best == targets[u]) ++result.gloss_correct;
            ++result.gloss_total;
        }
    } else {
        result.loss = scale(pose_loss, config.lambda_pose);
        if (!rec.gloss_frames.empty()) {
            // still report accuracy so the metric is comparable
            const std::vector<int> targets = gloss_ids(gloss_vocab, rec.gloss_frames);
            Tape::NoGrad guard(model.tape());
            Tensor logits = model.gloss_logits(decoded.rep);
            for (int u = 0; u < logits.rows(); ++u) {
                int best = 0;
                for (int j = 1; j < logits.cols(); ++j)
                    if (logits(u, j) > logits(u, best)) best = j;
                if (best == targets[u]) ++result.gloss_correct;
                ++result.gloss_total;
            }
        }
    }
    return result;
}

void append_metrics(const std::string& path, const EpochMetrics& m) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::app);
    if (!out) throw ValidationError("cannot write metrics log: " + path);
    nlohmann::json j;
    j["epoch"] = m.epoch;
    j["split"] = m.split;
    j["mse"] = m.mse;
    j["gloss_acc"] = m.gloss_acc;
    j["wall_time"] = m.wall_time;
    out << j.dump() << "\n";
}

std::vector<std::vector<double>> snapshot_params(const SlpModel& model) {
    std::vector<std::vector<double>> snap;
    snap.reserve(model.parameters().size());
    for (const auto& p : model.parameters()) snap.push_back(p.tensor.values());
    return snap;
}

void restore_params(SlpModel& model, const std::vector<std::vector<double>>& snap) {
    for (std::size_t i = 0; i < snap.size(); ++i)
        model.set_parameter(model.parameters()[i].name, snap[i]);
}

}  // namespace

EvalResult evaluate(SlpModel& model, const std::vector<DatasetRecord>& records, const Vocabulary& src_vocab,
                    const Vocabulary& gloss_vocab, const NormStats& stats) {
    EvalResult result;
    if (records.empty()) return result;
    Tape::NoGrad guard(model.tape());
    TrainingConfig plain;
    plain.noise_rate = 0.0;
    plain.lambda_gloss = 1.0;
    double mse_sum = 0.0;
    long correct = 0, total = 0;
    for (const auto& rec : records) {
        RecordPass pass = forward_record(model, rec, src_vocab, gloss_vocab, stats, plain, nullptr, nullptr);
        mse_sum += pass.pose_mse;
        correct += pass.gloss_correct;
        total += pass.gloss_total;
    }
    result.mse = mse_sum / static_cast<double>(records.size());
    result.gloss_acc = total > 0 ? static_cast<double>(correct) / total : 0.0;
    return result;
}

double model_loss_grad_check(SlpModel& model, const DatasetRecord& record, const Vocabulary& src_vocab,
                             const Vocabulary& gloss_vocab, const NormStats& stats,
                             const TrainingConfig& config, double step) {
    if (step < 1e-7 || step > 1e-3) throw ContractError("model_loss_grad_check: step outside [1e-7, 1e-3]");
    TrainingConfig quiet = config;
    quiet.noise_rate = 0.0;  // the loss must be a deterministic function of the parameters

    auto loss_value = [&] {
        Tape::NoGrad guard(model.tape());
        return forward_record(model, record, src_vocab, gloss_vocab, stats, quiet, nullptr, nullptr)
            .loss.scalar_value();
    };

    model.zero_grad();
    model.tape().reset();
    RecordPass pass = forward_record(model, record, src_vocab, gloss_vocab, stats, quiet, nullptr, nullptr);
    model.tape().backward(pass.loss);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(model.parameters().size());
    for (const auto& p : model.parameters()) analytic.push_back(p.tensor.grad());
    model.tape().reset();

    double worst = 0.0;
    for (std::size_t pi = 0; pi < model.parameters().size(); ++pi) {
        Tensor t = model.parameters()[pi].tensor;
        auto& values = t.mutable_values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double orig = values[i];
            values[i] = orig + step;
            const double fp = loss_value();
            values[i] = orig - step;
            const double fm = loss_value();
            values[i] = orig;
            const double fd = (fp - fm) / (2.0 * step);
            const double err = std::abs(analytic[pi][i] - fd) / std::max(1.0, std::abs(analytic[pi][i]));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

TrainResult train(SlpModel& model, const std::vector<DatasetRecord>& train_set,
                  const std::vector<DatasetRecord>& dev_set, const Vocabulary& src_vocab,
                  const Vocabulary& gloss_vocab, const NormStats& stats, const TrainingConfig& config,
                  const TrainOptions& options) {
    if (train_set.empty()) throw ContractError("train: empty training set");
    if (config.learning_rate < 0.0) throw ContractError("train: negative learning rate");
    if (config.batch_size < 1) throw ContractError("train: batch_size must be >= 1");

    TrainResult result;
    Rng noise_rng(config.seed);
    Rng order_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    const std::vector<double> channel_std = normalized_channel_std(train_set, stats);

    std::vector<AdamState> adam(model.parameters().size());
    std::vector<std::vector<double>> last_finite = snapshot_params(model);
    double best_dev = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&t0] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // deterministic shuffle from the seeded stream
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[order_rng.uniform_int(static_cast<int>(i))]);

        double epoch_mse = 0.0;
        long gloss_correct = 0, gloss_total = 0;

        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            model.zero_grad();
            model.tape().reset();
            Tensor batch_loss;
            for (std::size_t k = start; k < stop; ++k) {
                RecordPass pass = forward_record(model, train_set[order[k]], src_vocab, gloss_vocab, stats,
                                                 config, &noise_rng, &channel_std);
                epoch_mse += pass.pose_mse;
                gloss_correct += pass.gloss_correct;
                gloss_total += pass.gloss_total;
                Tensor contribution = scale(pass.loss, 1.0 / static_cast<double>(stop - start));
                batch_loss = (k == start) ? contribution : add(batch_loss, contribution);
            }
            if (!std::isfinite(batch_loss.scalar_value())) {
                restore_params(model, last_finite);
                if (!options.checkpoint_path.empty())
                    save_checkpoint(model, src_vocab, gloss_vocab, stats, options.checkpoint_path);
                throw TrainingError("training diverged at epoch " + std::to_string(epoch) +
                                    "; last finite parameters restored");
            }
            if (config.learning_rate == 0.0) continue;
            model.tape().backward(batch_loss);
            if (config.grad_clip) {
                double sq = 0.0;
                for (const auto& p : model.parameters())
                    for (double g : p.tensor.grad()) sq += g * g;
                const double norm = std::sqrt(sq);
                if (norm > *config.grad_clip) {
                    const double factor = *config.grad_clip / norm;
                    for (const auto& p : model.parameters()) {
                        Tensor t = p.tensor;
                        for (double& g : t.mutable_grad()) g *= factor;
                    }
                }
            }
            for (std::size_t i = 0; i < model.parameters().size(); ++i) {
                Tensor t = model.parameters()[i].tensor;
                adam_step(t, model.parameters()[i].name, adam[i], config.learning_rate);
            }
        }
        model.tape().reset();
        last_finite = snapshot_params(model);

        EpochMetrics tm;
        tm.epoch = epoch;
        tm.split = "train";
        tm.mse = epoch_mse / static_cast<double>(train_set.size());
        tm.gloss_acc = gloss_total > 0 ? static_cast<double>(gloss_correct) / gloss_total : 0.0;
        tm.wall_time = elapsed();
        result.history.push_back(tm);
        append_metrics(options.metrics_path, tm);

        if (!dev_set.empty()) {
            EvalResult dev = evaluate(model, dev_set, src_vocab, gloss_vocab, stats);
            EpochMetrics dm;
            dm.epoch = epoch;
            dm.split = "dev";
            dm.mse = dev.mse;
            dm.gloss_acc = dev.gloss_acc;
            dm.wall_time = elapsed();
            result.history.push_back(dm);
            append_metrics(options.metrics_path, dm);
            if (dev.mse < best_dev) {
                best_dev = dev.mse;
                result.best_dev_mse = dev.mse;
                result.best_epoch = epoch;
                if (!options.checkpoint_path.empty())
                    save_checkpoint(model, src_vocab, gloss_vocab, stats, options.checkpoint_path);
            }
        }
    }
    if (dev_set.empty() && !options.checkpoint_path.empty()) {
        save_checkpoint(model, src_vocab, gloss_vocab, stats, options.checkpoint_path);
        result.best_dev_mse = result.history.empty() ? 0.0 : result.history.back().mse;
        result.best_epoch = config.epochs - 1;
    }
    return result;
}

}  // namespace sgsa
