// Command-line front end: adjacency inspection, synthetic data, training,
// generation, gradient checking, parameter counting and frame rendering.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgsa/data.hpp"
#include "sgsa/model.hpp"
#include "sgsa/render.hpp"
#include "sgsa/skeleton.hpp"
#include "sgsa/training.hpp"

namespace fs = std::filesystem;
using namespace sgsa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

void fail_line(const std::string& kind, const std::string& message) {
    nlohmann::json j;
    j["error"] = {{"kind", kind}, {"message", message}};
    std::cerr << j.dump() << "\n";
}

struct ModelFlags {
    int enc_layers = 2;
    int enc_heads = 4;
    int enc_embed = 256;
    int dec_layers = 5;
    int dec_heads = 4;
    std::string dec_attention = "sgsa";
    std::string temporal_window = "inf";
    int cross_head_dim = 64;
    int max_frames = 64;
    double counter_stop = 0.99;

    void attach(CLI::App* app) {
        app->add_option("--enc-layers", enc_layers, "encoder layers");
        app->add_option("--enc-heads", enc_heads, "encoder heads");
        app->add_option("--enc-embed", enc_embed, "encoder embedding size");
        app->add_option("--dec-layers", dec_layers, "decoder layers");
        app->add_option("--dec-heads", dec_heads, "decoder heads");
        app->add_option("--dec-attention", dec_attention, "decoder self-attention: sgsa | baseline")
            ->check(CLI::IsMember({"sgsa", "baseline"}));
        app->add_option("--temporal-window", temporal_window,
                        "frames each step may look back ('inf' for unbounded)");
        app->add_option("--cross-head-dim", cross_head_dim, "cross-attention head width");
        app->add_option("--max-frames", max_frames, "generation frame cap");
        app->add_option("--counter-stop", counter_stop, "counter termination threshold");
    }

    ModelConfig to_config(int src_vocab, int gloss_vocab) const {
        ModelConfig c;
        c.enc_layers = enc_layers;
        c.enc_heads = enc_heads;
        c.enc_embed = enc_embed;
        c.dec_layers = dec_layers;
        c.dec_heads = dec_heads;
        c.dec_sgsa = dec_attention == "sgsa";
        if (temporal_window != "inf" && temporal_window != "-1")
            c.temporal_window = std::stoi(temporal_window);
        c.cross_head_dim = cross_head_dim;
        c.max_frames = max_frames;
        c.counter_stop = counter_stop;
        c.src_vocab = src_vocab;
        c.gloss_vocab = gloss_vocab;
        return c;
    }
};

struct TrainFlags {
    double learning_rate = 1e-3;
    double noise_rate = 5.0;
    double lambda_pose = 1.0;
    double lambda_gloss = 1.0;
    int batch_size = 1;
    int epochs = 200;
    std::uint64_t seed = 1;
    double grad_clip = 0.0;

    void attach(CLI::App* app) {
        app->add_option("--learning-rate,--lr", learning_rate, "Adam learning rate");
        app->add_option("--noise-rate", noise_rate, "Gaussian noise rate for teacher-forcing inputs");
        app->add_option("--lambda-pose", lambda_pose, "pose loss weight");
        app->add_option("--lambda-gloss", lambda_gloss, "gloss loss weight");
        app->add_option("--batch-size", batch_size, "records per optimizer step");
        app->add_option("--epochs", epochs, "training epochs");
        app->add_option("--seed", seed, "seed for every stochastic draw");
        app->add_option("--grad-clip", grad_clip, "global gradient-norm clip (0 = off)");
    }

    TrainingConfig to_config() const {
        TrainingConfig c;
        c.learning_rate = learning_rate;
        c.noise_rate = noise_rate;
        c.lambda_pose = lambda_pose;
        c.lambda_gloss = lambda_gloss;
        c.batch_size = batch_size;
        c.epochs = epochs;
        c.seed = seed;
        if (grad_clip > 0.0) c.grad_clip = grad_clip;
        return c;
    }
};

void write_csv_file(const Tensor& m, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    write_matrix_csv(m, out);
}

std::vector<std::string> split_tokens(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

SkeletonTopology gradcheck_topology() {
    // three 2-coordinate joints in a chain: S = 6
    return SkeletonTopology({{"root", 2}, {"mid", 2}, {"tip", 2}}, {{0, 1}, {1, 2}}, false);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skeletal-graph attention text-to-pose toolkit"};
    app.set_config("--config", "", "config file mirroring the long option names");
    app.require_subcommand(1);

    // adjacency
    auto* adjacency = app.add_subcommand("adjacency", "emit A, I*, degree, A* (and a temporal mask) as CSV");
    std::string adj_topology, adj_out = ".";
    int adj_frames = 0;
    std::string adj_window = "inf";
    adjacency->add_option("--topology", adj_topology, "topology JSON file")->required();
    adjacency->add_option("--out", adj_out, "output directory");
    adjacency->add_option("--frames", adj_frames, "also write a temporal mask over this many frames");
    adjacency->add_option("--temporal-window", adj_window, "mask window ('inf' for unbounded)");

    // synth
    auto* synth = app.add_subcommand("synth", "generate the deterministic toy dataset");
    std::string synth_out = "data";
    int synth_train = 50, synth_dev = 10, synth_test = 10;
    std::uint64_t synth_seed = 1;
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--train", synth_train, "training pairs");
    synth->add_option("--dev", synth_dev, "dev pairs");
    synth->add_option("--test", synth_test, "test pairs");
    synth->add_option("--seed", synth_seed, "dataset seed");

    // train
    auto* train_cmd = app.add_subcommand("train", "teacher-forced training");
    std::string tr_topology, tr_train, tr_dev, tr_ckpt = "model.ckpt", tr_metrics;
    ModelFlags tr_model;
    TrainFlags tr_flags;
    train_cmd->add_option("--topology", tr_topology, "topology JSON file")->required();
    train_cmd->add_option("--train-set", tr_train, "training dataset file")->required();
    train_cmd->add_option("--dev-set", tr_dev, "dev dataset file");
    train_cmd->add_option("--out", tr_ckpt, "checkpoint path");
    train_cmd->add_option("--metrics", tr_metrics, "metrics log path (line-delimited records)");
    tr_model.attach(train_cmd);
    tr_flags.attach(train_cmd);

    // generate
    auto* generate = app.add_subcommand("generate", "produce a pose sequence from text");
    std::string gen_ckpt, gen_text, gen_out = "generated.jsonl";
    bool gen_raw = false;
    generate->add_option("--ckpt", gen_ckpt, "checkpoint path")->required();
    generate->add_option("--text", gen_text, "space-separated tokens")->required();
    generate->add_option("--out", gen_out, "output dataset file (single record)");
    generate->add_flag("--normalized", gen_raw, "keep normalized coordinates (skip denormalization)");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the full combined loss");
    int gc_dec_layers = 2, gc_dec_heads = 2;
    double gc_step = 1e-5, gc_tolerance = 1e-4;
    std::uint64_t gc_seed = 1;
    gradcheck->add_option("--dec-layers", gc_dec_layers, "decoder layers for the toy model");
    gradcheck->add_option("--dec-heads", gc_dec_heads, "decoder heads for the toy model");
    gradcheck->add_option("--step", gc_step, "finite-difference step");
    gradcheck->add_option("--tolerance", gc_tolerance, "max relative error accepted");
    gradcheck->add_option("--seed", gc_seed, "init seed");

    // render
    auto* render = app.add_subcommand("render", "draw a pose sequence as SVG frames");
    std::string rd_topology, rd_pose, rd_out = "frames";
    int rd_record = 0;
    RenderSpec rd_spec;
    render->add_option("--topology", rd_topology, "topology JSON file")->required();
    render->add_option("--pose", rd_pose, "dataset file holding the sequence")->required();
    render->add_option("--record", rd_record, "record index inside the file");
    render->add_option("--out", rd_out, "output directory");
    render->add_option("--size", rd_spec.frame_size, "frame size in pixels");
    render->add_option("--radius", rd_spec.joint_radius, "joint radius");
    render->add_option("--stroke", rd_spec.stroke_width, "edge stroke width");
    render->add_option("--projection", rd_spec.projection, "dropz | oblique")
        ->check(CLI::IsMember({"dropz", "oblique"}));

    // params
    auto* params = app.add_subcommand("params", "print the trainable parameter count and its breakdown");
    std::string pm_topology;
    int pm_src_vocab = 10, pm_gloss_vocab = 9;
    ModelFlags pm_model;
    params->add_option("--topology", pm_topology, "topology JSON file")->required();
    params->add_option("--src-vocab", pm_src_vocab, "source vocabulary size");
    params->add_option("--gloss-vocab", pm_gloss_vocab, "gloss vocabulary size");
    pm_model.attach(params);

    CLI11_PARSE(app, argc, argv);

    try {
        if (adjacency->parsed()) {
            SkeletonTopology topo = load_topology(adj_topology);
            AdjacencySet adj = build_adjacency(topo);
            fs::create_directories(adj_out);
            write_csv_file(adj.a, fs::path(adj_out) / "A.csv");
            write_csv_file(adj.i_star, fs::path(adj_out) / "I_star.csv");
            write_csv_file(adj.a_star, fs::path(adj_out) / "A_star.csv");
            Tensor degree(1, topo.width());
            for (int i = 0; i < topo.width(); ++i) degree(0, i) = adj.degree[i];
            write_csv_file(degree, fs::path(adj_out) / "degree.csv");
            if (adj_frames > 0) {
                std::optional<int> window;
                if (adj_window != "inf" && adj_window != "-1") window = std::stoi(adj_window);
                TemporalMask mask = build_temporal_mask(window, adj_frames);
                Tensor m(adj_frames, adj_frames);
                for (int u = 0; u < adj_frames; ++u)
                    for (int v = 0; v < adj_frames; ++v) m(u, v) = mask.at(u, v) ? 1.0 : 0.0;
                write_csv_file(m, fs::path(adj_out) / "temporal_mask.csv");
            }
            std::cout << "wrote adjacency matrices for S=" << topo.width() << " to " << adj_out << "\n";
        } else if (synth->parsed()) {
            SkeletonTopology topo = toy_arm_topology();
            fs::create_directories(synth_out);
            save_topology(topo, (fs::path(synth_out) / "topology.json").string());
            const int total = synth_train + synth_dev + synth_test;
            std::vector<DatasetRecord> all = synth_generate(topo, total, synth_seed);
            auto slice = [&](int begin, int end) {
                return std::vector<DatasetRecord>(all.begin() + begin, all.begin() + end);
            };
            save_dataset(slice(0, synth_train), topo, (fs::path(synth_out) / "train.jsonl").string());
            save_dataset(slice(synth_train, synth_train + synth_dev), topo,
                         (fs::path(synth_out) / "dev.jsonl").string());
            save_dataset(slice(synth_train + synth_dev, total), topo,
                         (fs::path(synth_out) / "test.jsonl").string());
            std::cout << "wrote " << synth_train << "/" << synth_dev << "/" << synth_test
                      << " train/dev/test pairs to " << synth_out << "\n";
        } else if (train_cmd->parsed()) {
            SkeletonTopology topo = load_topology(tr_topology);
            std::vector<DatasetRecord> train_set = load_dataset(tr_train, topo);
            std::vector<DatasetRecord> dev_set;
            if (!tr_dev.empty()) dev_set = load_dataset(tr_dev, topo);
            if (train_set.empty()) throw ValidationError("training set is empty");

            std::vector<std::vector<std::string>> texts, glosses;
            for (const auto& r : train_set) {
                texts.push_back(r.text);
                if (!r.gloss_frames.empty()) glosses.push_back(r.gloss_frames);
            }
            Vocabulary src = Vocabulary::build({kPadToken, kUnkToken}, texts);
            Vocabulary gloss = Vocabulary::build({kNoneGloss}, glosses);
            NormStats stats = compute_norm_stats(train_set, topo);

            SlpModel model(tr_model.to_config(src.size(), gloss.size()), topo, tr_flags.seed);
            TrainOptions opts;
            opts.checkpoint_path = tr_ckpt;
            opts.metrics_path = tr_metrics;
            TrainResult result =
                train(model, train_set, dev_set, src, gloss, stats, tr_flags.to_config(), opts);
            const EpochMetrics& last = result.history.back();
            std::cout << "trained " << tr_flags.epochs << " epochs; final " << last.split
                      << " mse=" << last.mse << " gloss_acc=" << last.gloss_acc;
            if (result.best_epoch >= 0)
                std::cout << "; best dev mse=" << result.best_dev_mse << " at epoch " << result.best_epoch;
            std::cout << "; checkpoint: " << tr_ckpt << "\n";
        } else if (generate->parsed()) {
            LoadedModel loaded = load_checkpoint(gen_ckpt);
            std::vector<std::string> tokens = split_tokens(gen_text);
            if (tokens.empty()) throw ValidationError("generate: empty --text");
            std::vector<int> ids;
            for (const auto& t : tokens) ids.push_back(loaded.src_vocab.id(t));
            Tensor frames = loaded.model.generate(ids);
            if (!gen_raw) frames = denormalize_pose(frames, loaded.stats);
            DatasetRecord rec;
            rec.text = tokens;
            rec.pose = frames;
            save_dataset({rec}, loaded.model.topology(), gen_out);
            std::cout << "generated " << frames.rows() << " frames to " << gen_out << "\n";
        } else if (gradcheck->parsed()) {
            SkeletonTopology topo = gradcheck_topology();
            std::vector<DatasetRecord> records = synth_generate(topo, 1, gc_seed);
            std::vector<std::vector<std::string>> texts{records[0].text}, glosses{records[0].gloss_frames};
            Vocabulary src = Vocabulary::build({kPadToken, kUnkToken}, texts);
            Vocabulary gloss = Vocabulary::build({kNoneGloss}, glosses);
            NormStats stats = compute_norm_stats(records, topo);

            ModelConfig cfg;
            cfg.enc_layers = 1;
            cfg.enc_heads = 2;
            cfg.enc_embed = 8;
            cfg.dec_layers = gc_dec_layers;
            cfg.dec_heads = gc_dec_heads;
            cfg.cross_head_dim = 3;
            cfg.src_vocab = src.size();
            cfg.gloss_vocab = gloss.size();
            SlpModel model(cfg, topo, gc_seed);
            const double err =
                model_loss_grad_check(model, records[0], src, gloss, stats, TrainingConfig{}, gc_step);
            std::cout << "max relative gradient error over " << model.parameter_count()
                      << " parameters: " << err << " (tolerance " << gc_tolerance << ")\n";
            if (!(err < gc_tolerance)) {
                fail_line("gradcheck", "max relative error " + std::to_string(err) + " exceeds tolerance");
                return kExitValidation;
            }
        } else if (render->parsed()) {
            SkeletonTopology topo = load_topology(rd_topology);
            std::vector<DatasetRecord> records = load_dataset(rd_pose, topo);
            if (rd_record < 0 || rd_record >= static_cast<int>(records.size()))
                throw ValidationError("record index " + std::to_string(rd_record) + " outside dataset of " +
                                      std::to_string(records.size()));
            rd_spec.out_dir = rd_out;
            auto files = render_sequence(records[rd_record].pose, topo, rd_spec);
            std::cout << "wrote " << files.size() - 1 << " frames and an index to " << rd_out << "\n";
        } else if (params->parsed()) {
            SkeletonTopology topo = load_topology(pm_topology);
            SlpModel model(pm_model.to_config(pm_src_vocab, pm_gloss_vocab), topo, 0);
            std::cout << "configuration: S=" << topo.width() << " enc " << pm_model.enc_layers << "x"
                      << pm_model.enc_heads << " (E=" << pm_model.enc_embed << "), dec "
                      << pm_model.dec_layers << "x" << pm_model.dec_heads << " ("
                      << pm_model.dec_attention << "), vocab " << pm_src_vocab << "/" << pm_gloss_vocab
                      << "\n";
            for (const auto& [group, count] : model.parameter_breakdown())
                std::cout << "  " << group << ": " << count << "\n";
            std::cout << "total trainable parameters: " << model.parameter_count() << "\n";
        }
    } catch (const TrainingError& e) {
        fail_line("divergence", e.what());
        return kExitDivergence;
    } catch (const ValidationError& e) {
        fail_line("validation", e.what());
        return kExitValidation;
    } catch (const DimensionError& e) {
        fail_line("dimension", e.what());
        return kExitValidation;
    } catch (const ContractError& e) {
        fail_line("contract", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        fail_line("internal", e.what());
        return kExitValidation;
    }
    return kExitOk;
}
