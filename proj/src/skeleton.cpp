#include "sgsa/skeleton.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sgsa {

SkeletonTopology::SkeletonTopology(std::vector<Joint> joints, std::vector<std::pair<int, int>> edges,
                                   bool has_counter)
    : joints_(std::move(joints)), edges_(std::move(edges)), has_counter_(has_counter) {
    if (joints_.empty()) throw ValidationError("topology has no joints");
    offsets_.reserve(joints_.size());
    int off = 0;
    for (std::size_t j = 0; j < joints_.size(); ++j) {
        if (joints_[j].dims < 1)
            throw ValidationError("joint '" + joints_[j].name + "' has dims " + std::to_string(joints_[j].dims) +
                                  " (must be >= 1)");
        offsets_.push_back(off);
        off += joints_[j].dims;
    }
    width_ = off + (has_counter_ ? 1 : 0);

    std::set<std::pair<int, int>> seen;
    const int n = joint_count();
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        auto [a, b] = edges_[e];
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw ValidationError("edge " + std::to_string(e) + " = (" + std::to_string(a) + ", " +
                                  std::to_string(b) + ") references a joint outside [0, " + std::to_string(n) + ")");
        if (a == b)
            throw ValidationError("edge " + std::to_string(e) + " = (" + std::to_string(a) + ", " +
                                  std::to_string(b) + ") is a self-edge");
        auto key = std::minmax(a, b);
        if (!seen.insert(key).second)
            throw ValidationError("duplicate edge (" + std::to_string(key.first) + ", " +
                                  std::to_string(key.second) + ") at position " + std::to_string(e));
    }
}

int SkeletonTopology::counter_column() const {
    if (!has_counter_) throw ContractError("topology has no counter channel");
    return width_ - 1;
}

int SkeletonTopology::joint_of_column(int col) const {
    if (has_counter_ && col == width_ - 1) return -1;
    for (int j = joint_count() - 1; j >= 0; --j)
        if (col >= offsets_[j]) return j;
    throw ContractError("column " + std::to_string(col) + " outside topology width");
}

bool SkeletonTopology::connected(int joint_a, int joint_b) const {
    for (const auto& [a, b] : edges_)
        if ((a == joint_a && b == joint_b) || (a == joint_b && b == joint_a)) return true;
    return false;
}

std::string SkeletonTopology::canonical_json() const {
    nlohmann::json j;
    j["counter"] = has_counter_;
    j["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : edges_) j["edges"].push_back({a, b});
    j["joints"] = nlohmann::json::array();
    for (const Joint& joint : joints_) j["joints"].push_back({{"dims", joint.dims}, {"name", joint.name}});
    return j.dump();
}

std::uint64_t SkeletonTopology::hash() const {
    // FNV-1a 64
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical_json()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

SkeletonTopology topology_from_json_text(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(origin + ": not valid JSON: " + e.what());
    }
    if (!j.contains("joints") || !j["joints"].is_array())
        throw ValidationError(origin + ": missing 'joints' array");
    std::vector<Joint> joints;
    for (const auto& jj : j["joints"]) {
        Joint joint;
        joint.name = jj.value("name", std::string{});
        if (!jj.contains("dims") || !jj["dims"].is_number_integer())
            throw ValidationError(origin + ": joint '" + joint.name + "' missing integer 'dims'");
        joint.dims = jj["dims"].get<int>();
        joints.push_back(std::move(joint));
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.value("edges", nlohmann::json::array())) {
        if (!e.is_array() || e.size() != 2)
            throw ValidationError(origin + ": edge entries must be [i, j] pairs");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    const bool counter = j.value("counter", false);
    return SkeletonTopology(std::move(joints), std::move(edges), counter);
}

SkeletonTopology load_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open topology file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return topology_from_json_text(buf.str(), path);
}

void save_topology(const SkeletonTopology& topology, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write topology file: " + path);
    out << topology.canonical_json() << "\n";
}

AdjacencySet build_spatial_adjacency(const SkeletonTopology& topology) {
    const int s = topology.width();
    AdjacencySet adj;
    adj.a = Tensor(s, s);
    const bool counter = topology.has_counter();
    const int cc = counter ? topology.counter_column() : -1;
    for (int p = 0; p < s; ++p) {
        for (int q = 0; q < s; ++q) {
            if (p == q) continue;
            if (counter && (p == cc || q == cc)) {
                adj.a(p, q) = 1.0;  // counter is globally adjacent
                continue;
            }
            const int jp = topology.joint_of_column(p);
            const int jq = topology.joint_of_column(q);
            if (jp != jq && topology.connected(jp, jq)) adj.a(p, q) = 1.0;
        }
    }
    return adj;
}

AdjacencySet normalize_adjacency(AdjacencySet adj, const SkeletonTopology& topology) {
    const int s = topology.width();
    if (adj.a.rows() != s || adj.a.cols() != s)
        throw DimensionError("normalize_adjacency: A is " + adj.a.shape_str() + ", topology width " +
                             std::to_string(s));
    adj.i_star = Tensor(s, s);
    for (int j = 0; j < topology.joint_count(); ++j) {
        const int off = topology.coord_offset(j);
        const int d = topology.joints()[j].dims;
        for (int p = 0; p < d; ++p)
            for (int q = 0; q < d; ++q) adj.i_star(off + p, off + q) = 1.0;
    }
    if (topology.has_counter()) {
        const int cc = topology.counter_column();
        adj.i_star(cc, cc) = 1.0;
    }
    adj.degree.assign(s, 0);
    adj.a_star = Tensor(s, s);
    for (int p = 0; p < s; ++p) {
        int deg = 0;
        for (int q = 0; q < s; ++q) deg += static_cast<int>(adj.a(p, q) + adj.i_star(p, q));
        adj.degree[p] = deg;
        for (int q = 0; q < s; ++q) adj.a_star(p, q) = (adj.a(p, q) + adj.i_star(p, q)) / deg;
    }
    return adj;
}

AdjacencySet build_adjacency(const SkeletonTopology& topology) {
    return normalize_adjacency(build_spatial_adjacency(topology), topology);
}

TemporalMask build_temporal_mask(std::optional<int> window, int frames) {
    if (frames < 1) throw ContractError("temporal mask needs at least one frame");
    if (window && *window < 0) throw ContractError("temporal window must be >= 0");
    TemporalMask mask;
    mask.window = window;
    mask.frames = frames;
    mask.allowed.rows = frames;
    mask.allowed.cols = frames;
    mask.allowed.allowed.assign(static_cast<std::size_t>(frames) * frames, 0);
    for (int u = 0; u < frames; ++u)
        for (int v = 0; v <= u; ++v)
            if (!window || u - v <= *window) mask.allowed.allowed[static_cast<std::size_t>(u) * frames + v] = 1;
    return mask;
}

void write_matrix_csv(const Tensor& m, std::ostream& out) {
    out.precision(std::numeric_limits<double>::max_digits10);
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out << ",";
            out << m(i, j);
        }
        out << "\n";
    }
}

}  // namespace sgsa
