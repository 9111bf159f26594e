#include "sgsa/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "sgsa/rng.hpp"

namespace sgsa {

namespace {

constexpr char kCheckpointMagic[8] = {'S', 'G', 'S', 'A', 'C', 'K', 'P', '1'};

nlohmann::json config_to_json(const ModelConfig& c) {
    nlohmann::json j;
    j["enc_layers"] = c.enc_layers;
    j["enc_heads"] = c.enc_heads;
    j["enc_embed"] = c.enc_embed;
    j["dec_layers"] = c.dec_layers;
    j["dec_heads"] = c.dec_heads;
    j["dec_sgsa"] = c.dec_sgsa;
    if (c.temporal_window)
        j["temporal_window"] = *c.temporal_window;
    else
        j["temporal_window"] = nullptr;
    j["cross_head_dim"] = c.cross_head_dim;
    j["max_frames"] = c.max_frames;
    j["counter_stop"] = c.counter_stop;
    j["src_vocab"] = c.src_vocab;
    j["gloss_vocab"] = c.gloss_vocab;
    return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.enc_layers = j.at("enc_layers").get<int>();
    c.enc_heads = j.at("enc_heads").get<int>();
    c.enc_embed = j.at("enc_embed").get<int>();
    c.dec_layers = j.at("dec_layers").get<int>();
    c.dec_heads = j.at("dec_heads").get<int>();
    c.dec_sgsa = j.at("dec_sgsa").get<bool>();
    if (j.contains("temporal_window") && !j["temporal_window"].is_null())
        c.temporal_window = j["temporal_window"].get<int>();
    c.cross_head_dim = j.at("cross_head_dim").get<int>();
    c.max_frames = j.at("max_frames").get<int>();
    c.counter_stop = j.at("counter_stop").get<double>();
    c.src_vocab = j.at("src_vocab").get<int>();
    c.gloss_vocab = j.at("gloss_vocab").get<int>();
    return c;
}

}  // namespace

std::string ModelConfig::to_json_text() const { return config_to_json(*this).dump(); }

ModelConfig ModelConfig::from_json_text(const std::string& text) {
    try {
        return config_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad model config: ") + e.what());
    }
}

SlpModel::SlpModel(ModelConfig config, SkeletonTopology topology, std::uint64_t init_seed)
    : config_(std::move(config)),
      topology_(std::move(topology)),
      adjacency_(build_adjacency(topology_)),
      tape_(std::make_unique<Tape>()),
      init_rng_(std::make_unique<Rng>(init_seed)) {
    const int s = topology_.width();
    const ModelConfig& c = config_;
    if (c.enc_layers < 1 || c.dec_layers < 1) throw ContractError("model needs at least one layer per stack");
    if (c.enc_heads < 1 || c.dec_heads < 1 || c.cross_head_dim < 1) throw ContractError("head sizes must be positive");
    if (c.enc_embed % c.enc_heads != 0)
        throw ContractError("encoder heads " + std::to_string(c.enc_heads) + " do not divide embedding " +
                            std::to_string(c.enc_embed));
    if (!c.dec_sgsa && s % c.dec_heads != 0)
        throw ContractError("plain-attention decoder needs head count " + std::to_string(c.dec_heads) +
                            " dividing width " + std::to_string(s));
    if (c.src_vocab < 1 || c.gloss_vocab < 1) throw ContractError("vocabulary sizes must be positive");
    if (c.max_frames < 1) throw ContractError("max_frames must be >= 1");
    if (c.counter_stop <= 0.0 || c.counter_stop > 1.0) throw ContractError("counter_stop must be in (0, 1]");

    const int e = c.enc_embed;
    src_embedding_ = reg("encoder.embedding", c.src_vocab, e, true);
    for (int i = 0; i < c.enc_layers; ++i) {
        const std::string p = "encoder.layer" + std::to_string(i);
        EncoderLayer layer;
        layer.self_attn = make_attention(p + ".self", e, c.enc_heads, e / c.enc_heads, e);
        layer.ln1 = make_ln(p + ".ln1", e);
        layer.ff = make_ff(p + ".ff", e, 2 * e);
        layer.ln2 = make_ln(p + ".ln2", e);
        enc_layers_.push_back(std::move(layer));
    }
    bridge_w_ = reg("bridge.w", e, s, true);
    bridge_b_ = reg("bridge.b", 1, s, false);

    for (int i = 0; i < c.dec_layers; ++i) {
        const std::string p = "decoder.layer" + std::to_string(i);
        DecoderLayer layer;
        layer.self_attn = c.dec_sgsa ? make_attention(p + ".self", s, c.dec_heads, s, s)
                                     : make_attention(p + ".self", s, c.dec_heads, s / c.dec_heads, s);
        layer.ln1 = make_ln(p + ".ln1", s);
        layer.cross = make_attention(p + ".cross", s, c.dec_heads, c.cross_head_dim, s);
        layer.ln2 = make_ln(p + ".ln2", s);
        layer.ff = make_ff(p + ".ff", s, 2 * s);
        layer.ln3 = make_ln(p + ".ln3", s);
        dec_layers_.push_back(std::move(layer));
    }
    out_w_ = reg("output.w", s, s, true);
    out_b_ = reg("output.b", 1, s, false);
    gloss_w_ = reg("gloss.w", s, c.gloss_vocab, true);
    gloss_b_ = reg("gloss.b", 1, c.gloss_vocab, false);
    init_rng_.reset();
}

Tensor SlpModel::reg(const std::string& name, int rows, int cols, bool xavier) {
    std::vector<double> v(static_cast<std::size_t>(rows) * cols, 0.0);
    if (xavier) {
        const double bound = std::sqrt(6.0 / (rows + cols));
        for (double& x : v) x = init_rng_->uniform(-bound, bound);
    } else if (name.find("ln") != std::string::npos && name.ends_with(".gain")) {
        std::fill(v.begin(), v.end(), 1.0);
    }
    Tensor t = Tensor::leaf(*tape_, rows, cols, std::move(v));
    params_.push_back({name, t});
    return t;
}

AttentionParams SlpModel::make_attention(const std::string& prefix, int d_model, int heads, int d_head,
                                         int d_out) {
    AttentionParams p;
    for (int h = 0; h < heads; ++h) {
        const std::string hp = prefix + ".h" + std::to_string(h);
        AttentionHead head;
        head.w_q = reg(hp + ".wq", d_model, d_head, true);
        head.w_k = reg(hp + ".wk", d_model, d_head, true);
        head.w_v = reg(hp + ".wv", d_model, d_head, true);
        p.heads.push_back(std::move(head));
    }
    p.w_o = reg(prefix + ".wo", heads * d_head, d_out, true);
    return p;
}

SlpModel::FeedForward SlpModel::make_ff(const std::string& prefix, int width, int inner) {
    FeedForward ff;
    ff.w1 = reg(prefix + ".w1", width, inner, true);
    ff.b1 = reg(prefix + ".b1", 1, inner, false);
    ff.w2 = reg(prefix + ".w2", inner, width, true);
    ff.b2 = reg(prefix + ".b2", 1, width, false);
    return ff;
}

SlpModel::LayerNormParams SlpModel::make_ln(const std::string& prefix, int width) {
    LayerNormParams ln;
    ln.gain = reg(prefix + ".gain", 1, width, false);
    ln.bias = reg(prefix + ".bias", 1, width, false);
    return ln;
}

void SlpModel::zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
}

long SlpModel::parameter_count() const {
    long total = 0;
    for (const auto& p : params_) total += static_cast<long>(p.tensor.size());
    return total;
}

std::map<std::string, long> SlpModel::parameter_breakdown() const {
    std::map<std::string, long> groups;
    for (const auto& p : params_) {
        std::vector<std::string> segs;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = p.name.find('.', start);
            segs.push_back(p.name.substr(start, dot - start));
            if (dot == std::string::npos) break;
            start = dot + 1;
        }
        std::string key = segs.front();
        for (std::size_t i = 1; i + 1 <= segs.size(); ++i) {
            const std::string& s = segs[i];
            if (s == "self" || s == "cross" || s == "ff" || s == "embedding") {
                key += "." + s;
                break;
            }
            if (s.rfind("ln", 0) == 0) {
                key += ".ln";
                break;
            }
        }
        groups[key] += static_cast<long>(p.tensor.size());
    }
    return groups;
}

Tensor SlpModel::apply_ff(const FeedForward& ff, const Tensor& x) {
    return linear(relu(linear(x, ff.w1, ff.b1)), ff.w2, ff.b2);
}

Tensor SlpModel::apply_ln(const LayerNormParams& ln, const Tensor& x) {
    return layer_norm(x, ln.gain, ln.bias, kLayerNormEps);
}

Tensor SlpModel::positional_rows(int rows, int width, int skip_col) const {
    Tensor pe(rows, width);
    for (int pos = 0; pos < rows; ++pos)
        for (int j = 0; j < width; ++j) {
            if (j == skip_col) continue;
            const int pair = j / 2;
            const double rate = std::pow(10000.0, -2.0 * pair / width);
            pe(pos, j) = (j % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
        }
    return pe;
}

Tensor SlpModel::encode(const std::vector<int>& token_ids) {
    std::vector<int> ids = token_ids;
    while (!ids.empty() && ids.back() == 0) ids.pop_back();  // trailing <pad>
    if (ids.empty()) throw ContractError("encode: empty sentence");
    for (int id : ids)
        if (id < 0 || id >= config_.src_vocab)
            throw ContractError("encode: token id " + std::to_string(id) + " outside vocabulary");

    const int e = config_.enc_embed;
    Tensor x = scale(gather_rows(src_embedding_, ids), std::sqrt(static_cast<double>(e)));
    x = add(x, positional_rows(static_cast<int>(ids.size()), e, -1));
    for (EncoderLayer& layer : enc_layers_) {
        Tensor sa = multi_head(x, x, x, layer.self_attn, AttentionMode::baseline);
        x = apply_ln(layer.ln1, add(x, sa));
        Tensor ff = apply_ff(layer.ff, x);
        x = apply_ln(layer.ln2, add(x, ff));
    }
    return linear(x, bridge_w_, bridge_b_);
}

SlpModel::DecodeResult SlpModel::decode_teacher(const Tensor& memory, const Tensor& input_frames) {
    const int s = width();
    if (input_frames.cols() != s)
        throw DimensionError("decode: frames " + input_frames.shape_str() + " do not match skeleton width " +
                             std::to_string(s));
    if (memory.cols() != s)
        throw DimensionError("decode: memory " + memory.shape_str() + " does not match skeleton width " +
                             std::to_string(s));
    const int u = input_frames.rows();
    if (u < 1) throw ContractError("decode: needs at least the start frame");

    const int skip = topology_.has_counter() ? topology_.counter_column() : -1;
    Tensor x = add(input_frames, positional_rows(u, s, skip));
    const TemporalMask tmask = build_temporal_mask(config_.temporal_window, u);

    Tensor rep;
    for (DecoderLayer& layer : dec_layers_) {
        Tensor sa = config_.dec_sgsa
                        ? multi_head(x, x, x, layer.self_attn, AttentionMode::sgsa, &adjacency_.a_star, &tmask)
                        : multi_head(x, x, x, layer.self_attn, AttentionMode::baseline, nullptr, &tmask);
        x = apply_ln(layer.ln1, add(x, sa));
        Tensor ca = cross_attention(x, memory, layer.cross);
        x = apply_ln(layer.ln2, add(x, ca));
        rep = x;
        Tensor ff = apply_ff(layer.ff, x);
        x = apply_ln(layer.ln3, add(x, ff));
    }
    DecodeResult result;
    result.preds = linear(x, out_w_, out_b_);
    result.rep = rep;
    return result;
}

std::pair<Tensor, Tensor> SlpModel::decode_step(const Tensor& memory, const Tensor& previous_frames) {
    DecodeResult full = decode_teacher(memory, previous_frames);
    const int u = previous_frames.rows();
    return {slice_rows(full.preds, u - 1, u), slice_rows(full.rep, u - 1, u)};
}

Tensor SlpModel::gloss_logits(const Tensor& rep) {
    if (rep.cols() != width())
        throw DimensionError("gloss_logits: representation " + rep.shape_str() + " does not match width " +
                             std::to_string(width()));
    return linear(rep, gloss_w_, gloss_b_);
}

Tensor SlpModel::generate(const std::vector<int>& token_ids) {
    Tape::NoGrad guard(*tape_);
    Tensor memory = encode(token_ids);
    std::optional<int> counter;
    if (topology_.has_counter()) counter = topology_.counter_column();
    return run_autoregressive(
        [&](const Tensor& frames) { return decode_step(memory, frames).first; }, width(), counter,
        config_.max_frames, config_.counter_stop);
}

void SlpModel::set_parameter(const std::string& name, const std::vector<double>& values) {
    for (auto& p : params_) {
        if (p.name != name) continue;
        if (values.size() != p.tensor.size())
            throw DimensionError("set_parameter: " + name + " expects " + std::to_string(p.tensor.size()) +
                                 " values, got " + std::to_string(values.size()));
        p.tensor.mutable_values() = values;
        return;
    }
    throw ContractError("set_parameter: no parameter named " + name);
}

Tensor run_autoregressive(const std::function<Tensor(const Tensor&)>& step, int width,
                          std::optional<int> counter_col, int max_frames, double stop_threshold) {
    if (max_frames < 1) throw ContractError("run_autoregressive: max_frames must be >= 1");
    Tensor history(1, width);  // all-zero start frame, counter 0
    std::vector<Tensor> produced;
    for (int u = 0; u < max_frames; ++u) {
        Tensor next = step(history);
        if (next.rows() != 1 || next.cols() != width)
            throw ContractError("autoregressive step returned " + next.shape_str());
        produced.push_back(next);
        if (counter_col && next(0, *counter_col) >= stop_threshold) break;
        Tensor grown(static_cast<int>(produced.size()) + 1, width);
        for (int j = 0; j < width; ++j) grown(0, j) = 0.0;
        for (std::size_t r = 0; r < produced.size(); ++r)
            for (int j = 0; j < width; ++j) grown(static_cast<int>(r) + 1, j) = produced[r](0, j);
        history = grown;
    }
    Tensor out(static_cast<int>(produced.size()), width);
    for (std::size_t r = 0; r < produced.size(); ++r)
        for (int j = 0; j < width; ++j) out(static_cast<int>(r), j) = produced[r](0, j);
    return out;
}

long count_parameters(const ModelConfig& config, const SkeletonTopology& topology) {
    SlpModel model(config, topology, 0);
    return model.parameter_count();
}

// ---- checkpointing -----------------------------------------------------------

namespace {

void write_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

}  // namespace

void save_checkpoint(const SlpModel& model, const Vocabulary& src_vocab, const Vocabulary& gloss_vocab,
                     const NormStats& stats, const std::string& path) {
    nlohmann::json header;
    header["config"] = nlohmann::json::parse(model.config().to_json_text());
    header["topology"] = model.topology().canonical_json();
    header["topology_hash"] = model.topology().hash();
    header["src_vocab"] = src_vocab.tokens();
    header["gloss_vocab"] = gloss_vocab.tokens();
    header["stats"] = {{"mean", stats.mean},
                       {"stdev", stats.stdev},
                       {"scaled", stats.scaled},
                       {"counter_col", stats.counter_col}};
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write checkpoint: " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_u32(out, static_cast<std::uint32_t>(header_text.size()));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    write_u32(out, static_cast<std::uint32_t>(model.parameters().size()));
    for (const NamedParam& p : model.parameters()) {
        write_u32(out, static_cast<std::uint32_t>(p.name.size()));
        out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        write_u32(out, static_cast<std::uint32_t>(p.tensor.rows()));
        write_u32(out, static_cast<std::uint32_t>(p.tensor.cols()));
        out.write(reinterpret_cast<const char*>(p.tensor.values().data()),
                  static_cast<std::streamsize>(p.tensor.size() * sizeof(double)));
    }
}

LoadedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw ValidationError(path + ": not a checkpoint file");
    const std::uint32_t header_len = read_u32(in);
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), header_len);
    if (!in) throw ValidationError(path + ": truncated checkpoint header");

    ModelConfig config;
    std::string topology_text;
    std::uint64_t stored_hash = 0;
    Vocabulary src, gloss;
    NormStats stats;
    try {
        const nlohmann::json header = nlohmann::json::parse(header_text);
        config = config_from_json(header.at("config"));
        topology_text = header.at("topology").get<std::string>();
        stored_hash = header.at("topology_hash").get<std::uint64_t>();
        src = Vocabulary::from_tokens(header.at("src_vocab").get<std::vector<std::string>>());
        gloss = Vocabulary::from_tokens(header.at("gloss_vocab").get<std::vector<std::string>>());
        stats.mean = header.at("stats").at("mean").get<std::vector<double>>();
        stats.stdev = header.at("stats").at("stdev").get<std::vector<double>>();
        stats.scaled = header.at("stats").at("scaled").get<std::vector<std::uint8_t>>();
        stats.counter_col = header.at("stats").at("counter_col").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": bad checkpoint header: " + e.what());
    }
    SkeletonTopology topology = topology_from_json_text(topology_text, path);
    if (topology.hash() != stored_hash)
        throw ValidationError(path + ": topology hash mismatch (file corrupt or edited)");

    SlpModel model(config, topology, 0);
    const std::uint32_t n_params = read_u32(in);
    if (n_params != model.parameters().size())
        throw ValidationError(path + ": parameter count mismatch with config");
    for (std::uint32_t i = 0; i < n_params; ++i) {
        const std::uint32_t name_len = read_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const std::uint32_t rows = read_u32(in);
        const std::uint32_t cols = read_u32(in);
        std::vector<double> values(static_cast<std::size_t>(rows) * cols);
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (!in) throw ValidationError(path + ": truncated parameter data at " + name);
        model.set_parameter(name, values);
    }
    return LoadedModel{std::move(model), std::move(src), std::move(gloss), std::move(stats)};
}

}  // namespace sgsa
