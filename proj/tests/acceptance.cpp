// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Thresholds are fixed here, not configurable.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "sgsa/attention.hpp"
#include "sgsa/data.hpp"
#include "sgsa/model.hpp"
#include "sgsa/skeleton.hpp"
#include "sgsa/training.hpp"

using namespace sgsa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
    void note(const std::string& what) {
        if (pass) detail = what;
    }
};

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "sgsa_acceptance";
    fs::create_directories(dir);
    return dir;
}

Tensor random_tensor(int rows, int cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(rows) * cols);
    for (double& x : v) x = dist(rng);
    return Tensor(rows, cols, std::move(v));
}

SkeletonTopology chain3() {
    return SkeletonTopology({{"a", 1}, {"b", 1}, {"c", 1}}, {{0, 1}, {1, 2}}, false);
}

SkeletonTopology pair2d(bool counter) {
    return SkeletonTopology({{"p", 2}, {"q", 2}}, {{0, 1}}, counter);
}

SkeletonTopology full_scale_topology() {
    // 30 joints x 3 coords + 20 grouped joints x 10 coords = 290, plus counter
    std::vector<Joint> joints;
    for (int i = 0; i < 30; ++i) joints.push_back({"body" + std::to_string(i), 3});
    for (int i = 0; i < 20; ++i) joints.push_back({"group" + std::to_string(i), 10});
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < 50; ++i) edges.emplace_back(i, i + 1);
    return SkeletonTopology(std::move(joints), std::move(edges), true);
}

SkeletonTopology gradcheck_topology() {
    return SkeletonTopology({{"root", 2}, {"mid", 2}, {"tip", 2}}, {{0, 1}, {1, 2}}, false);
}

bool matrices_equal(const Tensor& a, const Tensor& b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a.values()[i] - b.values()[i]) > tol) return false;
    return true;
}

// ---- criterion 1: adjacency oracle -------------------------------------------

void criterion_adjacency(Outcome& out) {
    AdjacencySet c3 = build_adjacency(chain3());
    out.require(matrices_equal(c3.a, Tensor{{0, 1, 0}, {1, 0, 1}, {0, 1, 0}}, 0.0), "chain3 A mismatch");
    Tensor c3_plus{{1, 1, 0}, {1, 1, 1}, {0, 1, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out.require(c3.a(i, j) + c3.i_star(i, j) == c3_plus(i, j), "chain3 A+I* mismatch");
    out.require(c3.degree == std::vector<int>{2, 3, 2}, "chain3 degree mismatch");
    out.require(matrices_equal(c3.a_star, Tensor{{0.5, 0.5, 0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0, 0.5, 0.5}},
                               1e-12),
                "chain3 A* mismatch");

    AdjacencySet p2 = build_adjacency(pair2d(false));
    out.require(p2.degree == std::vector<int>{4, 4, 4, 4}, "pair2d degree mismatch");
    out.require(matrices_equal(p2.a_star, Tensor::filled(4, 4, 0.25), 1e-12), "pair2d A* mismatch");

    AdjacencySet p2c = build_adjacency(pair2d(true));
    Tensor expect_a{{0, 0, 1, 1, 1}, {0, 0, 1, 1, 1}, {1, 1, 0, 0, 1}, {1, 1, 0, 0, 1}, {1, 1, 1, 1, 0}};
    out.require(matrices_equal(p2c.a, expect_a, 0.0), "pair2d+counter A mismatch");

    for (const SkeletonTopology& topo :
         {chain3(), pair2d(false), pair2d(true), toy_arm_topology(), full_scale_topology()}) {
        AdjacencySet adj = build_adjacency(topo);
        for (int i = 0; i < topo.width(); ++i) {
            double row = 0.0;
            for (int j = 0; j < topo.width(); ++j) row += adj.a_star(i, j);
            out.require(std::abs(row - 1.0) < 1e-12, "A* row sum off for S=" + std::to_string(topo.width()));
        }
    }
}

// ---- criterion 2: sgsa reduction ----------------------------------------------

void criterion_reduction(Outcome& out) {
    std::mt19937_64 rng(202);
    int instances = 0;
    for (int trial = 0; trial < 120; ++trial) {
        std::uniform_int_distribution<int> du(1, 8), ds(1, 12);
        const int u = du(rng), s = ds(rng);
        Tensor q = random_tensor(u, s, rng), k = random_tensor(u, s, rng), v = random_tensor(u, s, rng);
        AttentionHead head{random_tensor(s, s, rng), random_tensor(s, s, rng), random_tensor(s, s, rng)};
        TemporalMask mask = build_temporal_mask(std::nullopt, u);
        Tensor eye = Tensor::identity(s);
        Tensor a = sgsa_attention(q, k, v, head, eye, &mask);
        Tensor b = scaled_self_attention(q, k, v, head, &mask);
        for (std::size_t i = 0; i < a.size(); ++i)
            out.require(std::abs(a.values()[i] - b.values()[i]) <= 1e-12,
                        "identity-adjacency reduction differs at instance " + std::to_string(trial));
        ++instances;
    }
    out.note(std::to_string(instances) + " random instances");
}

// ---- criterion 3: masking independence ----------------------------------------

void criterion_masking(Outcome& out) {
    std::mt19937_64 rng(303);

    // spatial: with Wv = I, output column p ignores input columns q with A*(q,p) = 0
    int spatial_trials = 0;
    while (spatial_trials < 100) {
        SkeletonTopology topo = toy_arm_topology();
        AdjacencySet adj = build_adjacency(topo);
        const int s = topo.width();
        std::uniform_int_distribution<int> dcol(0, s - 1), du(1, 5);
        const int p = dcol(rng), q = dcol(rng);
        if (adj.a_star(q, p) != 0.0) continue;
        const int u = du(rng);
        Tensor queries = random_tensor(u, s, rng), keys = random_tensor(u, s, rng),
               values = random_tensor(u, s, rng);
        AttentionHead head{random_tensor(s, s, rng), random_tensor(s, s, rng), Tensor::identity(s)};
        Tensor base = sgsa_attention(queries, keys, values, head, adj.a_star);
        Tensor bumped_values = values.detached_copy();
        for (int r = 0; r < u; ++r) bumped_values(r, q) += 7.5;
        Tensor moved = sgsa_attention(queries, keys, bumped_values, head, adj.a_star);
        for (int r = 0; r < u; ++r)
            out.require(moved(r, p) == base(r, p),
                        "spatial trial " + std::to_string(spatial_trials) + ": column " + std::to_string(p) +
                            " moved");
        ++spatial_trials;
    }

    // temporal: with window N, frame u ignores perturbations outside [u-N, u]
    int temporal_trials = 0;
    while (temporal_trials < 100) {
        const int n = temporal_trials % 3;  // N in {0, 1, 2}
        std::uniform_int_distribution<int> du(n + 2, 8), ds(2, 6);
        const int frames = du(rng), s = ds(rng);
        TemporalMask mask = build_temporal_mask(n, frames);
        std::uniform_int_distribution<int> dref(n + 1, frames - 1);
        const int ref = dref(rng);
        Tensor q = random_tensor(frames, s, rng), k = random_tensor(frames, s, rng),
               v = random_tensor(frames, s, rng);
        AttentionHead head{random_tensor(s, s, rng), random_tensor(s, s, rng), random_tensor(s, s, rng)};
        Tensor eye = Tensor::identity(s);
        Tensor base = sgsa_attention(q, k, v, head, eye, &mask);
        Tensor q2 = q.detached_copy(), k2 = k.detached_copy(), v2 = v.detached_copy();
        for (int f = 0; f < frames; ++f) {
            if (f >= ref - n && f <= ref) continue;  // inside the window
            for (int c = 0; c < s; ++c) {
                q2(f, c) -= 3.0;
                k2(f, c) += 2.0;
                v2(f, c) += 4.0;
            }
        }
        Tensor moved = sgsa_attention(q2, k2, v2, head, eye, &mask);
        for (int c = 0; c < s; ++c)
            out.require(moved(ref, c) == base(ref, c),
                        "temporal trial " + std::to_string(temporal_trials) + " (N=" + std::to_string(n) +
                            "): frame " + std::to_string(ref) + " moved");
        ++temporal_trials;
    }
    out.note("100 spatial + 100 temporal trials, bitwise");
}

// ---- criterion 4: gradient fidelity -------------------------------------------

void criterion_gradients(Outcome& out) {
    SkeletonTopology topo = gradcheck_topology();  // S = 6
    std::vector<DatasetRecord> records = synth_generate(topo, 1, 4);
    Vocabulary src = Vocabulary::build({kPadToken, kUnkToken}, {records[0].text});
    Vocabulary gloss = Vocabulary::build({kNoneGloss}, {records[0].gloss_frames});
    NormStats stats = compute_norm_stats(records, topo);

    ModelConfig cfg;
    cfg.enc_layers = 1;
    cfg.enc_heads = 2;
    cfg.enc_embed = 8;
    cfg.dec_layers = 2;
    cfg.dec_heads = 2;
    cfg.cross_head_dim = 3;
    cfg.src_vocab = src.size();
    cfg.gloss_vocab = gloss.size();
    SlpModel model(cfg, topo, 404);
    const double err = model_loss_grad_check(model, records[0], src, gloss, stats, TrainingConfig{}, 1e-5);
    std::ostringstream msg;
    msg << "max relative error " << err << " over " << model.parameter_count() << " parameters";
    out.require(err < 1e-4, msg.str());
    out.note(msg.str());
}

// ---- criterion 5: autoregressive consistency -----------------------------------

void criterion_autoregressive(Outcome& out) {
    std::mt19937_64 rng(505);
    for (int trial = 0; trial < 20; ++trial) {
        SkeletonTopology topo = toy_arm_topology();
        ModelConfig cfg;
        cfg.enc_layers = 1;
        cfg.enc_heads = 2;
        cfg.enc_embed = 8;
        cfg.dec_layers = 1 + trial % 2;
        cfg.dec_heads = (trial % 3 == 0) ? 3 : 1;
        cfg.dec_sgsa = trial % 4 != 3;
        if (!cfg.dec_sgsa) cfg.dec_heads = 3;  // must divide S = 9
        if (trial % 3 == 1) cfg.temporal_window = 1 + trial % 2;
        cfg.cross_head_dim = 4;
        cfg.src_vocab = 6;
        cfg.gloss_vocab = 4;
        SlpModel model(cfg, topo, 1000 + trial);
        Tape::NoGrad guard(model.tape());
        Tensor memory = model.encode({1 + trial % 5, 2});
        const int u = 3 + trial % 5;
        Tensor inputs = random_tensor(u, topo.width(), rng);
        SlpModel::DecodeResult full = model.decode_teacher(memory, inputs);
        for (int step = 1; step <= u; ++step) {
            Tensor prefix(step, topo.width());
            for (int r = 0; r < step; ++r)
                for (int c = 0; c < topo.width(); ++c) prefix(r, c) = inputs(r, c);
            auto [frame, rep] = model.decode_step(memory, prefix);
            for (int c = 0; c < topo.width(); ++c) {
                out.require(frame(0, c) == full.preds(step - 1, c),
                            "trial " + std::to_string(trial) + ": prediction differs at step " +
                                std::to_string(step));
                out.require(rep(0, c) == full.rep(step - 1, c),
                            "trial " + std::to_string(trial) + ": representation differs at step " +
                                std::to_string(step));
            }
        }
    }
    out.note("20 random models, bitwise");
}

// ---- criterion 6: overfit experiment -------------------------------------------

void criterion_overfit(Outcome& out) {
    SkeletonTopology topo = toy_arm_topology();
    std::vector<DatasetRecord> records = synth_generate(topo, 4, 16);  // 1-2 token sentences
    Vocabulary src, gloss;
    {
        std::vector<std::vector<std::string>> texts, glosses;
        for (const auto& r : records) {
            texts.push_back(r.text);
            glosses.push_back(r.gloss_frames);
        }
        src = Vocabulary::build({kPadToken, kUnkToken}, texts);
        gloss = Vocabulary::build({kNoneGloss}, glosses);
    }
    NormStats stats = compute_norm_stats(records, topo);

    ModelConfig cfg;
    cfg.enc_layers = 2;
    cfg.enc_heads = 2;
    cfg.enc_embed = 32;
    cfg.dec_layers = 3;
    cfg.dec_heads = 4;
    cfg.cross_head_dim = 16;
    cfg.counter_stop = 0.95;
    cfg.max_frames = 24;
    cfg.src_vocab = src.size();
    cfg.gloss_vocab = gloss.size();
    SlpModel model(cfg, topo, 1);

    TrainingConfig tc;
    tc.learning_rate = 1e-3;
    tc.epochs = 500;
    tc.noise_rate = 5.0;
    tc.lambda_gloss = 0.25;
    tc.grad_clip = 3.0;
    tc.seed = 1;
    TrainOptions opts;
    opts.checkpoint_path = (work_dir() / "overfit.ckpt").string();
    // dev = train: the best checkpoint is the best-fitting epoch
    train(model, records, records, src, gloss, stats, tc, opts);

    LoadedModel best = load_checkpoint(opts.checkpoint_path);
    EvalResult eval = evaluate(best.model, records, src, gloss, stats);
    out.require(eval.mse < 1e-2, "training pose MSE " + std::to_string(eval.mse));
    out.require(eval.gloss_acc > 0.95, "frame-gloss accuracy " + std::to_string(eval.gloss_acc));

    std::string lengths;
    for (const auto& rec : records) {
        std::vector<int> ids;
        for (const auto& t : rec.text) ids.push_back(src.id(t));
        Tensor generated = best.model.generate(ids);
        lengths += std::to_string(generated.rows()) + "/" + std::to_string(rec.pose.rows()) + " ";
        out.require(std::abs(generated.rows() - rec.pose.rows()) <= 1,
                    "generated " + std::to_string(generated.rows()) + " frames for a " +
                        std::to_string(rec.pose.rows()) + "-frame target");
    }
    out.note("mse " + std::to_string(eval.mse) + ", gloss acc " + std::to_string(eval.gloss_acc) +
             ", lengths (generated/target) " + lengths);
}

// ---- criterion 7: ablation direction -------------------------------------------

double ablation_run(const std::vector<DatasetRecord>& train_set, const std::vector<DatasetRecord>& dev_set,
                    const Vocabulary& src, const Vocabulary& gloss, const NormStats& stats, bool sgsa_mode,
                    std::optional<int> window, std::uint64_t seed) {
    SkeletonTopology topo = toy_arm_topology();
    ModelConfig cfg;
    cfg.enc_layers = 2;
    cfg.enc_heads = 2;
    cfg.enc_embed = 32;
    cfg.dec_layers = 2;
    cfg.dec_heads = 3;
    cfg.dec_sgsa = sgsa_mode;
    cfg.temporal_window = window;
    cfg.cross_head_dim = 16;
    cfg.counter_stop = 0.95;
    cfg.src_vocab = src.size();
    cfg.gloss_vocab = gloss.size();
    SlpModel model(cfg, topo, seed);

    TrainingConfig tc;
    tc.learning_rate = 1e-3;
    tc.epochs = 300;
    tc.noise_rate = 5.0;
    tc.lambda_gloss = 0.25;
    tc.grad_clip = 10.0;
    tc.seed = seed;
    TrainResult result = train(model, train_set, dev_set, src, gloss, stats, tc, {});
    return result.best_dev_mse;
}

void criterion_ablation(Outcome& out) {
    SkeletonTopology topo = toy_arm_topology();
    std::vector<DatasetRecord> all = synth_generate(topo, 60, 17);
    std::vector<DatasetRecord> train_set(all.begin(), all.begin() + 50);
    std::vector<DatasetRecord> dev_set(all.begin() + 50, all.end());
    Vocabulary src, gloss;
    {
        std::vector<std::vector<std::string>> texts, glosses;
        for (const auto& r : train_set) {
            texts.push_back(r.text);
            glosses.push_back(r.gloss_frames);
        }
        src = Vocabulary::build({kPadToken, kUnkToken}, texts);
        gloss = Vocabulary::build({kNoneGloss}, glosses);
    }
    NormStats stats = compute_norm_stats(train_set, topo);

    double graph = 0.0, narrow = 0.0, plain = 0.0;
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    for (std::uint64_t s : seeds) {
        graph += ablation_run(train_set, dev_set, src, gloss, stats, true, std::nullopt, s);
        narrow += ablation_run(train_set, dev_set, src, gloss, stats, true, 1, s);
        plain += ablation_run(train_set, dev_set, src, gloss, stats, false, std::nullopt, s);
    }
    graph /= seeds.size();
    narrow /= seeds.size();
    plain /= seeds.size();

    out.require(graph <= plain, "graph-masked decoder dev MSE " + std::to_string(graph) +
                                    " vs plain attention " + std::to_string(plain));
    out.require(narrow <= 1.10 * graph, "window-1 dev MSE " + std::to_string(narrow) +
                                            " not within 10% of unbounded " + std::to_string(graph));
    std::ostringstream note;
    note << "mean best dev MSE over seeds {1,2,3}: graph " << graph << ", window-1 " << narrow << ", plain "
         << plain;
    out.note(note.str());
}

// ---- criterion 8: parameter count ----------------------------------------------

void criterion_params(Outcome& out) {
    SkeletonTopology topo = full_scale_topology();
    ModelConfig cfg;  // defaults are the full-scale configuration
    cfg.src_vocab = static_cast<int>(synth_vocabulary().size()) + 2;
    cfg.gloss_vocab = static_cast<int>(synth_vocabulary().size()) + 1;
    SlpModel model(cfg, topo, 0);
    const long total = model.parameter_count();
    const double rel = (static_cast<double>(total) - 9e6) / 9e6;
    out.require(total >= 6750000 && total <= 11250000,
                "count " + std::to_string(total) + " outside 9M +- 25%");
    std::ostringstream note;
    note << "S=" << topo.width() << ", total " << total << " (9M" << (rel >= 0 ? "+" : "") << rel * 100.0
         << "%); breakdown:";
    for (const auto& [group, count] : model.parameter_breakdown()) note << " " << group << "=" << count;
    out.note(note.str());
}

// ---- criterion 9: determinism --------------------------------------------------

std::string file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string metrics_without_walltime(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream canonical;
    std::string line;
    while (std::getline(in, line)) {
        nlohmann::json j = nlohmann::json::parse(line);
        j.erase("wall_time");
        canonical << j.dump() << "\n";
    }
    return canonical.str();
}

void criterion_determinism(Outcome& out) {
    SkeletonTopology topo = toy_arm_topology();
    const fs::path dir = work_dir();
    std::vector<DatasetRecord> all = synth_generate(topo, 8, 29);
    std::vector<DatasetRecord> train_set(all.begin(), all.begin() + 6);
    std::vector<DatasetRecord> dev_set(all.begin() + 6, all.end());
    save_dataset(train_set, topo, (dir / "det_train.jsonl").string());
    save_dataset(dev_set, topo, (dir / "det_dev.jsonl").string());

    auto run = [&](const std::string& tag) {
        std::vector<DatasetRecord> tr = load_dataset((dir / "det_train.jsonl").string(), topo);
        std::vector<DatasetRecord> dv = load_dataset((dir / "det_dev.jsonl").string(), topo);
        std::vector<std::vector<std::string>> texts, glosses;
        for (const auto& r : tr) {
            texts.push_back(r.text);
            glosses.push_back(r.gloss_frames);
        }
        Vocabulary src = Vocabulary::build({kPadToken, kUnkToken}, texts);
        Vocabulary gloss = Vocabulary::build({kNoneGloss}, glosses);
        NormStats stats = compute_norm_stats(tr, topo);
        ModelConfig cfg;
        cfg.enc_layers = 1;
        cfg.enc_heads = 2;
        cfg.enc_embed = 16;
        cfg.dec_layers = 2;
        cfg.dec_heads = 2;
        cfg.cross_head_dim = 8;
        cfg.src_vocab = src.size();
        cfg.gloss_vocab = gloss.size();
        SlpModel model(cfg, topo, 77);
        TrainingConfig tc;
        tc.epochs = 25;
        tc.noise_rate = 5.0;
        tc.seed = 13;
        TrainOptions opts;
        opts.checkpoint_path = (dir / (tag + ".ckpt")).string();
        opts.metrics_path = (dir / (tag + ".jsonl")).string();
        fs::remove(opts.metrics_path);
        train(model, tr, dv, src, gloss, stats, tc, opts);
        return opts;
    };

    TrainOptions a = run("det_a");
    TrainOptions b = run("det_b");
    out.require(file_bytes(a.checkpoint_path) == file_bytes(b.checkpoint_path),
                "checkpoints differ between identical runs");
    out.require(metrics_without_walltime(a.metrics_path) == metrics_without_walltime(b.metrics_path),
                "metric logs differ between identical runs");
    out.note("byte-identical checkpoints; metric logs identical up to wall_time");
}

struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"adjacency oracle", 1.0, criterion_adjacency},
        {"identity-adjacency reduction", 10.0, criterion_reduction},
        {"masking independence", 60.0, criterion_masking},
        {"gradient fidelity", 60.0, criterion_gradients},
        {"autoregressive consistency", 60.0, criterion_autoregressive},
        {"overfit experiment", 300.0, criterion_overfit},
        {"ablation direction", 600.0, criterion_ablation},
        {"parameter count", 60.0, criterion_params},
        {"determinism", 120.0, criterion_determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].run(outcome);
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > criteria[i].budget_seconds) {
            outcome.pass = false;
            outcome.detail = "runtime " + std::to_string(elapsed) + "s exceeds budget";
        }
        std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << (i + 1) << ". " << criteria[i].name << " ("
                  << elapsed << "s)" << (outcome.detail.empty() ? "" : ": " + outcome.detail) << "\n";
        if (!outcome.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
