#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgsa/skeleton.hpp"
#include "sgsa/tensor.hpp"

namespace sgsa {

// One parallel example: spoken tokens, optional frame-aligned gloss labels,
// and a U x S pose matrix.
struct DatasetRecord {
    std::vector<std::string> text;
    std::vector<std::string> gloss_frames;  // empty when absent; else one label per frame
    Tensor pose;

    int frame_count() const { return pose.rows(); }
};

// String <-> id mapping with deterministic (sorted) assignment.
class Vocabulary {
public:
    static Vocabulary build(const std::vector<std::string>& reserved,
                            const std::vector<std::vector<std::string>>& sequences);
    static Vocabulary from_tokens(std::vector<std::string> tokens);

    int size() const { return static_cast<int>(tokens_.size()); }
    int id(const std::string& token) const;       // unknown -> id("<unk>") if reserved, else throws
    int id_or(const std::string& token, int fallback) const;
    const std::string& token(int id) const;
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::vector<std::string> tokens_;
    std::map<std::string, int> index_;
};

inline const char* kPadToken = "<pad>";
inline const char* kUnkToken = "<unk>";
inline const char* kNoneGloss = "<none>";

// Per-channel z-normalization statistics from the training split. The
// counter channel and degenerate (constant) channels skip the division.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> stdev;
    std::vector<std::uint8_t> scaled;  // 1 if the channel is divided by stdev
    int counter_col = -1;
};

NormStats compute_norm_stats(const std::vector<DatasetRecord>& train, const SkeletonTopology& topology);
Tensor normalize_pose(const Tensor& raw, const NormStats& stats);
Tensor denormalize_pose(const Tensor& normalized, const NormStats& stats);

// Deterministic toy corpus: every token names a short motion primitive of
// the skeleton (3 frames, linear interpolation between canonical poses);
// sentences concatenate primitives and the counter column ramps to 1.
const std::vector<std::string>& synth_vocabulary();
SkeletonTopology toy_arm_topology();  // 4 two-coordinate joints in a chain + counter
std::vector<DatasetRecord> synth_generate(const SkeletonTopology& topology, int n_pairs, std::uint64_t seed);
// The primitive frames for one token (used by compositionality checks).
Tensor synth_primitive(const SkeletonTopology& topology, const std::string& token);

std::vector<DatasetRecord> load_dataset(const std::string& path, const SkeletonTopology& topology);
void save_dataset(const std::vector<DatasetRecord>& records, const SkeletonTopology& topology,
                  const std::string& path);

}  // namespace sgsa
