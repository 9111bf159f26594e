#include "sgsa/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sgsa/rng.hpp"

namespace sgsa {

Vocabulary Vocabulary::build(const std::vector<std::string>& reserved,
                             const std::vector<std::vector<std::string>>& sequences) {
    std::set<std::string> unique;
    for (const auto& seq : sequences)
        for (const auto& tok : seq) unique.insert(tok);
    for (const auto& r : reserved) unique.erase(r);
    std::vector<std::string> tokens = reserved;
    tokens.insert(tokens.end(), unique.begin(), unique.end());
    return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    Vocabulary v;
    v.tokens_ = std::move(tokens);
    for (int i = 0; i < static_cast<int>(v.tokens_.size()); ++i) v.index_[v.tokens_[i]] = i;
    return v;
}

int Vocabulary::id(const std::string& token) const {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    auto unk = index_.find(kUnkToken);
    if (unk != index_.end()) return unk->second;
    throw ValidationError("token '" + token + "' not in vocabulary");
}

int Vocabulary::id_or(const std::string& token, int fallback) const {
    auto it = index_.find(token);
    return it != index_.end() ? it->second : fallback;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) throw ContractError("vocabulary id " + std::to_string(id) + " out of range");
    return tokens_[id];
}

NormStats compute_norm_stats(const std::vector<DatasetRecord>& train, const SkeletonTopology& topology) {
    const int s = topology.width();
    NormStats stats;
    stats.mean.assign(s, 0.0);
    stats.stdev.assign(s, 1.0);
    stats.scaled.assign(s, 0);
    stats.counter_col = topology.has_counter() ? topology.counter_column() : -1;

    long frames = 0;
    for (const auto& r : train) frames += r.pose.rows();
    if (frames == 0) return stats;

    for (int c = 0; c < s; ++c) {
        if (c == stats.counter_col) continue;
        double sum = 0.0;
        for (const auto& r : train)
            for (int u = 0; u < r.pose.rows(); ++u) sum += r.pose(u, c);
        const double mean = sum / frames;
        double var = 0.0;
        for (const auto& r : train)
            for (int u = 0; u < r.pose.rows(); ++u) {
                const double d = r.pose(u, c) - mean;
                var += d * d;
            }
        var /= frames;
        stats.mean[c] = mean;
        if (var > 1e-24) {
            stats.stdev[c] = std::sqrt(var);
            stats.scaled[c] = 1;
        } else {
            std::cerr << "warning: channel " << c << " is constant; normalization centers it only\n";
        }
    }
    return stats;
}

Tensor normalize_pose(const Tensor& raw, const NormStats& stats) {
    if (raw.cols() != static_cast<int>(stats.mean.size()))
        throw DimensionError("normalize_pose: " + raw.shape_str() + " vs stats width " +
                             std::to_string(stats.mean.size()));
    Tensor out = raw.detached_copy();
    for (int u = 0; u < out.rows(); ++u)
        for (int c = 0; c < out.cols(); ++c) {
            if (c == stats.counter_col) continue;
            double v = out(u, c) - stats.mean[c];
            if (stats.scaled[c]) v /= stats.stdev[c];
            out(u, c) = v;
        }
    return out;
}

Tensor denormalize_pose(const Tensor& normalized, const NormStats& stats) {
    if (normalized.cols() != static_cast<int>(stats.mean.size()))
        throw DimensionError("denormalize_pose: " + normalized.shape_str() + " vs stats width " +
                             std::to_string(stats.mean.size()));
    Tensor out = normalized.detached_copy();
    for (int u = 0; u < out.rows(); ++u)
        for (int c = 0; c < out.cols(); ++c) {
            if (c == stats.counter_col) continue;
            double v = out(u, c);
            if (stats.scaled[c]) v *= stats.stdev[c];
            out(u, c) = v + stats.mean[c];
        }
    return out;
}

// ---- synthetic corpus --------------------------------------------------------

namespace {

constexpr int kPrimitiveFrames = 3;

// Each token displaces one focus joint; the motion falls off with graph
// distance along the limb edges, so nearby joints co-move and distant ones
// barely move. This is the local structure the adjacency prior encodes.
struct Motion {
    const char* token;
    double focus;  // fraction along the joint list picking the focus joint
    double dx, dy;
};

constexpr Motion kMotions[] = {
    {"raise", 1.0, 0.3, 1.0}, {"lower", 1.0, -0.3, -1.0}, {"reach", 0.67, 1.0, 0.1},
    {"pull", 0.67, -1.0, 0.3}, {"wave", 0.33, 0.8, 0.8},  {"bend", 0.33, -0.5, 0.7},
    {"twist", 0.0, 0.6, -0.8}, {"hold", 0.0, 0.0, 0.0},
};

double base_coord(int joint, int coord) {
    return coord == 1 ? 0.4 * joint : (coord == 0 ? 0.1 * joint : 0.0);
}

// breadth-first hop counts over the limb edges
std::vector<int> graph_distances(const SkeletonTopology& topology, int from) {
    const int n = topology.joint_count();
    std::vector<int> dist(n, n + 1);
    std::vector<int> frontier{from};
    dist[from] = 0;
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int j : frontier)
            for (const auto& [a, b] : topology.edges()) {
                const int other = a == j ? b : (b == j ? a : -1);
                if (other >= 0 && dist[other] > dist[j] + 1) {
                    dist[other] = dist[j] + 1;
                    next.push_back(other);
                }
            }
        frontier = std::move(next);
    }
    return dist;
}

}  // namespace

const std::vector<std::string>& synth_vocabulary() {
    static const std::vector<std::string> vocab = [] {
        std::vector<std::string> v;
        for (const Motion& m : kMotions) v.emplace_back(m.token);
        return v;
    }();
    return vocab;
}

SkeletonTopology toy_arm_topology() {
    return SkeletonTopology({{"root", 2}, {"mid", 2}, {"tip", 2}, {"hand", 2}},
                            {{0, 1}, {1, 2}, {2, 3}}, true);
}

Tensor synth_primitive(const SkeletonTopology& topology, const std::string& token) {
    const Motion* motion = nullptr;
    for (const Motion& m : kMotions)
        if (token == m.token) motion = &m;
    if (motion == nullptr) throw ValidationError("unknown synthetic token '" + token + "'");

    const int s = topology.width();
    const int joints = topology.joint_count();
    const int focus = std::min(joints - 1, static_cast<int>(motion->focus * (joints - 1) + 0.5));
    const std::vector<int> dist = graph_distances(topology, focus);

    Tensor frames(kPrimitiveFrames, s);
    for (int f = 0; f < kPrimitiveFrames; ++f) {
        const double t = static_cast<double>(f + 1) / kPrimitiveFrames;
        for (int j = 0; j < joints; ++j) {
            const int off = topology.coord_offset(j);
            const int dims = topology.joints()[j].dims;
            const double shape = std::pow(0.5, dist[j]);  // halves per hop from the focus joint
            const double amp = 0.8;
            for (int c = 0; c < dims; ++c) {
                const double dir = c == 0 ? motion->dx : (c == 1 ? motion->dy : 0.0);
                frames(f, off + c) = base_coord(j, c) + t * amp * shape * dir;
            }
        }
    }
    return frames;
}

std::vector<DatasetRecord> synth_generate(const SkeletonTopology& topology, int n_pairs, std::uint64_t seed) {
    if (n_pairs < 1) throw ContractError("synth_generate: n_pairs must be >= 1");
    const auto& vocab = synth_vocabulary();
    Rng rng(seed);
    std::vector<DatasetRecord> out;
    out.reserve(n_pairs);
    for (int i = 0; i < n_pairs; ++i) {
        const int len = 1 + rng.uniform_int(3);
        DatasetRecord rec;
        std::vector<Tensor> blocks;
        for (int w = 0; w < len; ++w) {
            const std::string& tok = vocab[rng.uniform_int(static_cast<int>(vocab.size()))];
            rec.text.push_back(tok);
            blocks.push_back(synth_primitive(topology, tok));
            for (int f = 0; f < kPrimitiveFrames; ++f) rec.gloss_frames.push_back(tok);
        }
        const int u_total = len * kPrimitiveFrames;
        rec.pose = Tensor(u_total, topology.width());
        int row = 0;
        for (const Tensor& b : blocks)
            for (int f = 0; f < b.rows(); ++f, ++row)
                for (int c = 0; c < b.cols(); ++c) rec.pose(row, c) = b(f, c);
        if (topology.has_counter()) {
            const int cc = topology.counter_column();
            for (int u = 0; u < u_total; ++u) rec.pose(u, cc) = static_cast<double>(u + 1) / u_total;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

// ---- dataset files -----------------------------------------------------------

namespace {

constexpr const char* kDatasetFormat = "sgsa-dataset";
constexpr int kDatasetVersion = 1;

void validate_record(const DatasetRecord& rec, const SkeletonTopology& topology, std::size_t index) {
    const std::string where = "record " + std::to_string(index);
    if (rec.pose.rows() < 1) throw ValidationError(where + ": empty pose sequence");
    if (rec.pose.cols() != topology.width())
        throw ValidationError(where + ": pose width " + std::to_string(rec.pose.cols()) +
                              " does not match topology width " + std::to_string(topology.width()));
    if (!rec.pose.all_finite()) throw ValidationError(where + ": non-finite pose value");
    if (!rec.gloss_frames.empty() && static_cast<int>(rec.gloss_frames.size()) != rec.pose.rows())
        throw ValidationError(where + ": gloss length " + std::to_string(rec.gloss_frames.size()) +
                              " misaligned with " + std::to_string(rec.pose.rows()) + " frames");
    // Counter range/monotonicity is a ground-truth property; generated
    // sequences may wobble, so files are not rejected for it.
}

}  // namespace

std::vector<DatasetRecord> load_dataset(const std::string& path, const SkeletonTopology& topology) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open dataset file: " + path);
    std::vector<DatasetRecord> records;
    std::string line;
    bool saw_header = false;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path + ": line is not valid JSON: " + e.what());
        }
        if (!saw_header) {
            if (j.value("format", std::string{}) != kDatasetFormat)
                throw ValidationError(path + ": missing dataset header line");
            if (j.value("version", 0) != kDatasetVersion)
                throw ValidationError(path + ": unsupported dataset version");
            if (j.value("width", -1) != topology.width())
                throw ValidationError(path + ": dataset width " + std::to_string(j.value("width", -1)) +
                                      " does not match topology width " + std::to_string(topology.width()));
            saw_header = true;
            continue;
        }
        DatasetRecord rec;
        for (const auto& t : j.value("text", nlohmann::json::array())) rec.text.push_back(t.get<std::string>());
        if (j.contains("gloss"))
            for (const auto& g : j["gloss"]) rec.gloss_frames.push_back(g.get<std::string>());
        const auto& pose = j.at("pose");
        const int rows = static_cast<int>(pose.size());
        const int cols = rows > 0 ? static_cast<int>(pose[0].size()) : 0;
        rec.pose = Tensor(rows, cols);
        for (int u = 0; u < rows; ++u) {
            if (static_cast<int>(pose[u].size()) != cols)
                throw ValidationError("record " + std::to_string(index) + ": ragged pose rows");
            for (int c = 0; c < cols; ++c) rec.pose(u, c) = pose[u][c].get<double>();
        }
        validate_record(rec, topology, index);
        records.push_back(std::move(rec));
        ++index;
    }
    return records;
}

void save_dataset(const std::vector<DatasetRecord>& records, const SkeletonTopology& topology,
                  const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write dataset file: " + path);
    nlohmann::json header;
    header["format"] = kDatasetFormat;
    header["version"] = kDatasetVersion;
    header["width"] = topology.width();
    out << header.dump() << "\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        validate_record(records[i], topology, i);
        const DatasetRecord& rec = records[i];
        nlohmann::json j;
        j["text"] = rec.text;
        if (!rec.gloss_frames.empty()) j["gloss"] = rec.gloss_frames;
        nlohmann::json pose = nlohmann::json::array();
        for (int u = 0; u < rec.pose.rows(); ++u) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < rec.pose.cols(); ++c) row.push_back(rec.pose(u, c));
            pose.push_back(std::move(row));
        }
        j["pose"] = std::move(pose);
        out << j.dump() << "\n";
    }
}

}  // namespace sgsa
