#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sgsa/training.hpp"

using namespace sgsa;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "sgsa_train_test";
    fs::create_directories(dir);
    return dir;
}

ModelConfig tiny_config(int src_vocab, int gloss_vocab) {
    ModelConfig c;
    c.enc_layers = 1;
    c.enc_heads = 2;
    c.enc_embed = 8;
    c.dec_layers = 1;
    c.dec_heads = 1;
    c.cross_head_dim = 4;
    c.max_frames = 16;
    c.src_vocab = src_vocab;
    c.gloss_vocab = gloss_vocab;
    return c;
}

struct ToySetup {
    SkeletonTopology topo = toy_arm_topology();
    std::vector<DatasetRecord> records;
    Vocabulary src;
    Vocabulary gloss;
    NormStats stats;

    explicit ToySetup(int pairs, std::uint64_t seed) : records(synth_generate(topo, pairs, seed)) {
        std::vector<std::vector<std::string>> texts, glosses;
        for (const auto& r : records) {
            texts.push_back(r.text);
            glosses.push_back(r.gloss_frames);
        }
        src = Vocabulary::build({kPadToken, kUnkToken}, texts);
        gloss = Vocabulary::build({kNoneGloss}, glosses);
        stats = compute_norm_stats(records, topo);
    }
};

}  // namespace

TEST_SUITE("training") {

TEST_CASE("mse loss arithmetic") {
    Tensor a{{1.0, 2.0}, {3.0, 4.0}};
    CHECK(mse_loss(a, a).scalar_value() == 0.0);

    Tensor pred{{3.0, 4.0}};
    Tensor zero{{0.0, 0.0}};
    CHECK(mse_loss(pred, zero).scalar_value() == doctest::Approx(25.0));  // (9 + 16) / 1

    Tensor twice{{6.0, 8.0}};
    CHECK(mse_loss(twice, zero).scalar_value() == doctest::Approx(100.0));  // scale x2 -> loss x4

    CHECK_THROWS_AS(mse_loss(a, pred), DimensionError);
}

TEST_CASE("combined loss weighting") {
    Tensor pose(1, 1, {4.0}), gloss(1, 1, {1.0});
    CHECK(combined_loss(pose, gloss, 1.0, 0.0).scalar_value() == 4.0);
    CHECK(combined_loss(pose, gloss, 0.0, 1.0).scalar_value() == 1.0);
    CHECK(combined_loss(pose, gloss, 0.5, 2.0).scalar_value() == doctest::Approx(4.0));
}

TEST_CASE("noise augmentation semantics") {
    Tensor frames{{0.1, 0.2, 0.5}, {0.3, 0.4, 1.0}};
    std::vector<double> unit_std{1.0, 1.0, 1.0};

    Rng rng(1);
    Tensor same = noise_augment(frames, 0.0, unit_std, 2, rng);
    CHECK(std::memcmp(same.values().data(), frames.values().data(), frames.size() * sizeof(double)) == 0);

    Rng r1(7), r2(7);
    Tensor n1 = noise_augment(frames, 5.0, unit_std, 2, r1);
    Tensor n2 = noise_augment(frames, 5.0, unit_std, 2, r2);
    CHECK(std::memcmp(n1.values().data(), n2.values().data(), n1.size() * sizeof(double)) == 0);

    // counter column exempt
    CHECK(n1(0, 2) == frames(0, 2));
    CHECK(n1(1, 2) == frames(1, 2));
}

TEST_CASE("noise magnitude matches the documented scale") {
    // rate 5 with unit std -> std of (out - in) is 5 * 0.01 = 0.05
    const int n = 100000;
    Tensor frames(n, 1);
    std::vector<double> unit_std{1.0};
    Rng rng(13);
    Tensor noisy = noise_augment(frames, 5.0, unit_std, std::nullopt, rng);
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = noisy(i, 0);
        sum += d;
        sumsq += d * d;
    }
    const double var = sumsq / n - (sum / n) * (sum / n);
    CHECK(std::sqrt(var) == doctest::Approx(0.05).epsilon(0.02));
}

TEST_CASE("xavier initialization law") {
    Rng rng(17);
    Tensor sq = xavier_init(3, 3, rng);  // bound = sqrt(6/6) = 1
    for (double v : sq.values()) {
        CHECK(v <= 1.0);
        CHECK(v >= -1.0);
    }

    const int fan_in = 40, fan_out = 60;
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    double sumsq = 0.0;
    long count = 0;
    for (int rep = 0; rep < 42; ++rep) {
        Tensor t = xavier_init(fan_in, fan_out, rng);
        for (double v : t.values()) {
            CHECK(std::abs(v) <= bound);
            sumsq += v * v;
            ++count;
        }
    }
    const double var = sumsq / count;  // mean is 0 by symmetry
    CHECK(var == doctest::Approx(2.0 / (fan_in + fan_out)).epsilon(0.05));
}

TEST_CASE("adam update behaviour") {
    Tensor p(1, 3, {1.0, -2.0, 0.5});
    p.zero_grad();
    AdamState state;
    adam_step(p, "p", state, 1e-3);
    CHECK(p.values() == std::vector<double>{1.0, -2.0, 0.5});  // zero grad, no motion

    // first step moves by about lr * sign(g)
    Tensor q(1, 2, {0.0, 0.0});
    q.zero_grad();
    q.mutable_grad()[0] = 0.3;
    q.mutable_grad()[1] = -4.0;
    AdamState qs;
    adam_step(q, "q", qs, 1e-3);
    CHECK(q.values()[0] == doctest::Approx(-1e-3).epsilon(1e-6));
    CHECK(q.values()[1] == doctest::Approx(1e-3).epsilon(1e-6));

    // constant gradient: monotone motion against it
    Tensor r(1, 1, {5.0});
    AdamState rs;
    double prev = 5.0;
    for (int step = 0; step < 25; ++step) {
        r.zero_grad();
        r.mutable_grad()[0] = 2.0;
        adam_step(r, "r", rs, 1e-2);
        CHECK(r.values()[0] < prev);
        prev = r.values()[0];
    }

    Tensor bad(1, 1, {0.0});
    bad.zero_grad();
    bad.mutable_grad()[0] = std::numeric_limits<double>::quiet_NaN();
    AdamState bs;
    CHECK_THROWS_WITH_AS(adam_step(bad, "w_q", bs, 1e-3), doctest::Contains("w_q"), TrainingError);
}

TEST_CASE("one adam step decreases a convex loss") {
    // single linear layer regression y = x w, target t
    Tape tape;
    Tensor w = Tensor::leaf(tape, 2, 1, {0.4, -0.3});
    Tensor x{{1.0, 2.0}, {-1.0, 0.5}, {0.3, 0.7}};
    Tensor target{{2.0}, {-1.0}, {0.5}};
    auto loss_of = [&] {
        Tensor d = sub(matmul(x, w), target);
        return scale(sum_all(mul(d, d)), 1.0 / 3.0);
    };
    Tensor l0 = loss_of();
    tape.backward(l0);
    AdamState state;
    adam_step(w, "w", state, 1e-3);
    tape.reset();
    w.zero_grad();
    CHECK(loss_of().scalar_value() < l0.scalar_value());
}

TEST_CASE("frozen optimizer leaves parameters unchanged") {
    ToySetup setup(2, 11);
    ModelConfig cfg = tiny_config(setup.src.size(), setup.gloss.size());
    SlpModel model(cfg, setup.topo, 3);
    std::vector<std::vector<double>> before;
    for (const auto& p : model.parameters()) before.push_back(p.tensor.values());

    TrainingConfig tc;
    tc.epochs = 1;
    tc.learning_rate = 0.0;
    TrainResult res = train(model, setup.records, {}, setup.src, setup.gloss, setup.stats, tc, {});
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(model.parameters()[i].tensor.values() == before[i]);
    CHECK(res.history.size() == 1);
    CHECK(std::isfinite(res.history[0].mse));
}

TEST_CASE("same seed gives identical loss curves and checkpoints") {
    const std::string ck1 = (temp_dir() / "run1.ckpt").string();
    const std::string ck2 = (temp_dir() / "run2.ckpt").string();
    std::vector<std::vector<EpochMetrics>> histories;
    for (const std::string& ck : {ck1, ck2}) {
        ToySetup setup(3, 21);
        ModelConfig cfg = tiny_config(setup.src.size(), setup.gloss.size());
        SlpModel model(cfg, setup.topo, 42);
        TrainingConfig tc;
        tc.epochs = 3;
        tc.seed = 9;
        TrainOptions opts;
        opts.checkpoint_path = ck;
        std::vector<DatasetRecord> dev(setup.records.begin(), setup.records.begin() + 1);
        histories.push_back(train(model, setup.records, dev, setup.src, setup.gloss, setup.stats, tc, opts).history);
    }
    REQUIRE(histories[0].size() == histories[1].size());
    for (std::size_t i = 0; i < histories[0].size(); ++i) {
        CHECK(histories[0][i].mse == histories[1][i].mse);
        CHECK(histories[0][i].gloss_acc == histories[1][i].gloss_acc);
    }

    std::ifstream f1(ck1, std::ios::binary), f2(ck2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
}

TEST_CASE("training leaves targets untouched") {
    ToySetup setup(3, 31);
    std::vector<std::vector<double>> before;
    for (const auto& r : setup.records) before.push_back(r.pose.values());
    ModelConfig cfg = tiny_config(setup.src.size(), setup.gloss.size());
    SlpModel model(cfg, setup.topo, 4);
    TrainingConfig tc;
    tc.epochs = 2;
    tc.noise_rate = 5.0;
    train(model, setup.records, {}, setup.src, setup.gloss, setup.stats, tc, {});
    for (std::size_t i = 0; i < setup.records.size(); ++i)
        CHECK(setup.records[i].pose.values() == before[i]);
}

TEST_CASE("zero gloss weight freezes the gloss head") {
    ToySetup setup(2, 41);
    ModelConfig cfg = tiny_config(setup.src.size(), setup.gloss.size());
    SlpModel model(cfg, setup.topo, 5);
    std::vector<double> gloss_w, gloss_b;
    for (const auto& p : model.parameters()) {
        if (p.name == "gloss.w") gloss_w = p.tensor.values();
        if (p.name == "gloss.b") gloss_b = p.tensor.values();
    }
    TrainingConfig tc;
    tc.epochs = 2;
    tc.lambda_gloss = 0.0;
    train(model, setup.records, {}, setup.src, setup.gloss, setup.stats, tc, {});
    for (const auto& p : model.parameters()) {
        if (p.name == "gloss.w") CHECK(p.tensor.values() == gloss_w);
        if (p.name == "gloss.b") CHECK(p.tensor.values() == gloss_b);
    }
}

TEST_CASE("divergence aborts with a checkpoint") {
    ToySetup setup(2, 51);
    ModelConfig cfg = tiny_config(setup.src.size(), setup.gloss.size());
    SlpModel model(cfg, setup.topo, 6);
    TrainingConfig tc;
    tc.epochs = 50;
    tc.learning_rate = 1e150;  // guaranteed blow-up
    TrainOptions opts;
    opts.checkpoint_path = (temp_dir() / "diverged.ckpt").string();
    CHECK_THROWS_AS(train(model, setup.records, {}, setup.src, setup.gloss, setup.stats, tc, opts),
                    TrainingError);
    CHECK(fs::exists(opts.checkpoint_path));
    // the saved parameters are finite
    LoadedModel restored = load_checkpoint(opts.checkpoint_path);
    for (const auto& p : restored.model.parameters()) CHECK(p.tensor.all_finite());
}

TEST_CASE("short overfit run drives the loss down") {
    ToySetup setup(2, 61);
    ModelConfig cfg = tiny_config(setup.src.size(), setup.gloss.size());
    cfg.dec_layers = 2;
    cfg.dec_heads = 2;
    SlpModel model(cfg, setup.topo, 7);
    TrainingConfig tc;
    tc.epochs = 120;
    tc.noise_rate = 0.0;
    tc.lambda_gloss = 0.25;
    tc.grad_clip = 10.0;
    TrainResult res = train(model, setup.records, {}, setup.src, setup.gloss, setup.stats, tc, {});
    CHECK(res.history.back().mse < res.history.front().mse * 0.1);
}

}  // TEST_SUITE
