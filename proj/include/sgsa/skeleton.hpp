#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sgsa/tensor.hpp"

namespace sgsa {

struct Joint {
    std::string name;
    int dims = 0;  // coordinates per joint, e.g. 3 for x/y/z
};

// Skeletal graph: joints as nodes, undirected limb edges, optional counter
// channel appended as the last coordinate column.
class SkeletonTopology {
public:
    SkeletonTopology(std::vector<Joint> joints, std::vector<std::pair<int, int>> edges, bool has_counter);

    int joint_count() const { return static_cast<int>(joints_.size()); }
    const std::vector<Joint>& joints() const { return joints_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    bool has_counter() const { return has_counter_; }

    // Total spatial width S = sum of joint dims + counter channel.
    int width() const { return width_; }
    int counter_column() const;            // valid only when has_counter()
    int coord_offset(int joint) const { return offsets_[joint]; }
    int joint_of_column(int col) const;    // -1 for the counter column

    bool connected(int joint_a, int joint_b) const;

    std::string canonical_json() const;
    std::uint64_t hash() const;  // FNV-1a over canonical_json()

private:
    std::vector<Joint> joints_;
    std::vector<std::pair<int, int>> edges_;
    bool has_counter_ = false;
    std::vector<int> offsets_;
    int width_ = 0;
};

SkeletonTopology load_topology(const std::string& path);
SkeletonTopology topology_from_json_text(const std::string& text, const std::string& origin);
void save_topology(const SkeletonTopology& topology, const std::string& path);

// Coordinate-level adjacency of one frame. A carries cross-joint limb
// connections plus the counter's global row/column; I* carries the
// within-joint all-ones blocks. A* = D^-1 (A + I*).
struct AdjacencySet {
    Tensor a;
    Tensor i_star;
    std::vector<int> degree;
    Tensor a_star;
};

// Fills A only.
AdjacencySet build_spatial_adjacency(const SkeletonTopology& topology);
// Fills i_star, degree and a_star from an existing A.
AdjacencySet normalize_adjacency(AdjacencySet adj, const SkeletonTopology& topology);
// Both steps.
AdjacencySet build_adjacency(const SkeletonTopology& topology);

// Banded causal attention mask over frames: allowed(u, u') iff
// 0 <= u - u' <= window. No window means the plain causal mask.
struct TemporalMask {
    std::optional<int> window;
    int frames = 0;
    Mask allowed;

    bool at(int u, int u_prime) const { return allowed.at(u, u_prime); }
};

TemporalMask build_temporal_mask(std::optional<int> window, int frames);

void write_matrix_csv(const Tensor& m, std::ostream& out);

}  // namespace sgsa
