#pragma once

#include <string>
#include <vector>

#include "sgsa/skeleton.hpp"
#include "sgsa/tensor.hpp"

namespace sgsa {

struct RenderSpec {
    std::string out_dir;
    int frame_size = 512;        // square canvas, pixels
    double joint_radius = 6.0;
    double stroke_width = 3.0;
    std::string projection = "dropz";  // "dropz" or "oblique"
};

// Draws every frame as joints (circles) connected by limb edges (lines),
// one SVG per frame named frame_%04d.svg, plus an index.html. The counter
// channel is not drawn. Returns the written paths, index last.
std::vector<std::string> render_sequence(const Tensor& pose, const SkeletonTopology& topology,
                                         const RenderSpec& spec);

}  // namespace sgsa
