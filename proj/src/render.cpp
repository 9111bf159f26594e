#include "sgsa/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace sgsa {

namespace {

struct Point {
    double x = 0.0, y = 0.0;
};

Point project_joint(const Tensor& pose, const SkeletonTopology& topology, int frame, int joint,
                    const std::string& projection) {
    const int off = topology.coord_offset(joint);
    const int dims = topology.joints()[joint].dims;
    if (dims == 1) return {static_cast<double>(joint), pose(frame, off)};
    Point p{pose(frame, off), pose(frame, off + 1)};
    if (dims >= 3 && projection == "oblique") {
        const double z = pose(frame, off + 2);
        p.x -= 0.35 * z;
        p.y -= 0.35 * z;
    }
    return p;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

std::vector<std::string> render_sequence(const Tensor& pose, const SkeletonTopology& topology,
                                         const RenderSpec& spec) {
    if (pose.cols() != topology.width())
        throw ValidationError("render: pose width " + std::to_string(pose.cols()) +
                              " does not match topology width " + std::to_string(topology.width()));
    if (pose.rows() < 1) throw ValidationError("render: no frames to draw");
    if (spec.frame_size < 1 || spec.joint_radius <= 0.0 || spec.stroke_width <= 0.0)
        throw ValidationError("render: frame size, joint radius and stroke width must be positive");
    if (spec.projection != "dropz" && spec.projection != "oblique")
        throw ValidationError("render: unknown projection '" + spec.projection + "'");

    namespace fs = std::filesystem;
    fs::create_directories(spec.out_dir);

    const int frames = pose.rows();
    const int joints = topology.joint_count();

    // shared bounding box across frames so the animation does not jitter
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (int f = 0; f < frames; ++f)
        for (int j = 0; j < joints; ++j) {
            const Point p = project_joint(pose, topology, f, j, spec.projection);
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
    const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
    const double margin = 0.1 * span;
    const double scale = spec.frame_size / (span + 2 * margin);

    auto to_px = [&](const Point& p) {
        // y flipped into screen coordinates
        return Point{(p.x - min_x + margin) * scale, spec.frame_size - (p.y - min_y + margin) * scale};
    };

    std::vector<std::string> written;
    for (int f = 0; f < frames; ++f) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04d.svg", f);
        const fs::path path = fs::path(spec.out_dir) / name;
        std::ofstream out(path);
        if (!out) throw ValidationError("render: cannot write " + path.string());
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.frame_size << "\" height=\""
            << spec.frame_size << "\" viewBox=\"0 0 " << spec.frame_size << " " << spec.frame_size << "\">\n";
        out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        for (const auto& [a, b] : topology.edges()) {
            const Point pa = to_px(project_joint(pose, topology, f, a, spec.projection));
            const Point pb = to_px(project_joint(pose, topology, f, b, spec.projection));
            out << "  <line x1=\"" << fmt(pa.x) << "\" y1=\"" << fmt(pa.y) << "\" x2=\"" << fmt(pb.x)
                << "\" y2=\"" << fmt(pb.y) << "\" stroke=\"#335577\" stroke-width=\"" << fmt(spec.stroke_width)
                << "\"/>\n";
        }
        for (int j = 0; j < joints; ++j) {
            const Point p = to_px(project_joint(pose, topology, f, j, spec.projection));
            out << "  <circle cx=\"" << fmt(p.x) << "\" cy=\"" << fmt(p.y) << "\" r=\""
                << fmt(spec.joint_radius) << "\" fill=\"#cc4444\"/>\n";
        }
        out << "</svg>\n";
        written.push_back(path.string());
    }

    const fs::path index = fs::path(spec.out_dir) / "index.html";
    std::ofstream out(index);
    if (!out) throw ValidationError("render: cannot write " + index.string());
    out << "<!DOCTYPE html>\n<html><head><title>pose sequence</title></head><body>\n";
    for (int f = 0; f < frames; ++f) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04d.svg", f);
        out << "  <img src=\"" << name << "\" alt=\"frame " << f << "\" width=\"" << spec.frame_size / 2
            << "\"/>\n";
    }
    out << "</body></html>\n";
    written.push_back(index.string());
    return written;
}

}  // namespace sgsa
