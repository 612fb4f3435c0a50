#pragma once

// Static SVG overlays: detected 2D boxes, projected 3D box hulls, detected
// and projected skeletons, color coded. Output bytes are deterministic for
// fixed inputs (fixed element order, fixed number formatting).

#include "scenemc/geometry.hpp"
#include "scenemc/scene.hpp"

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace scenemc {

namespace detail {

inline std::string fmt_px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline const std::vector<std::pair<int, int>>& skeleton_bones() {
    static const std::vector<std::pair<int, int>> bones = {
        {kHip, kSpine},         {kSpine, kNeck},          {kNeck, kHead},
        {kHead, kNose},         {kNeck, kLeftShoulder},   {kNeck, kRightShoulder},
        {kLeftShoulder, kLeftElbow},   {kLeftElbow, kLeftWrist},
        {kRightShoulder, kRightElbow}, {kRightElbow, kRightWrist},
        {kHip, kLeftHip},       {kHip, kRightHip},
        {kLeftHip, kLeftKnee},  {kLeftKnee, kLeftAnkle},
        {kRightHip, kRightKnee}, {kRightKnee, kRightAnkle},
    };
    return bones;
}

}  // namespace detail

/// Renders the parse graph against its observations. Blue: detected boxes;
/// red: projected object outlines (dashed when synthesized); green: detected
/// skeletons; orange: projected skeletons.
inline std::string render_svg(const ParseGraph& pg, const Observations& obs) {
    using detail::fmt_px;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << obs.width << "\" height=\""
        << obs.height << "\" viewBox=\"0 0 " << obs.width << " " << obs.height << "\">\n";
    svg << "<rect width=\"" << obs.width << "\" height=\"" << obs.height
        << "\" fill=\"white\"/>\n";

    for (const auto& d : obs.det_boxes) {
        svg << "<rect x=\"" << fmt_px(d.box.lo.x()) << "\" y=\"" << fmt_px(d.box.lo.y())
            << "\" width=\"" << fmt_px(d.box.width()) << "\" height=\"" << fmt_px(d.box.height())
            << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";
        svg << "<text x=\"" << fmt_px(d.box.lo.x() + 2) << "\" y=\"" << fmt_px(d.box.lo.y() + 12)
            << "\" font-size=\"11\" fill=\"#1f77b4\">" << d.class_label << "</text>\n";
    }

    for (const auto& o : pg.objects) {
        std::vector<Vec2> projected;
        for (const auto& c : cuboid_corners(o.box))
            if (auto px = try_project(pg.camera, c)) projected.push_back(*px);
        if (projected.size() < 3) continue;
        const Polygon2D hull = hull_or_bbox(projected);
        svg << "<polygon points=\"";
        for (size_t i = 0; i < hull.vertices.size(); ++i) {
            if (i > 0) svg << " ";
            svg << fmt_px(hull.vertices[i].x()) << "," << fmt_px(hull.vertices[i].y());
        }
        svg << "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\"";
        if (o.synthesized) svg << " stroke-dasharray=\"4 3\"";
        svg << "/>\n";
    }

    for (const auto& det : obs.det_poses) {
        for (const auto& [a, b] : detail::skeleton_bones()) {
            if (!det.visible[static_cast<size_t>(a)] || !det.visible[static_cast<size_t>(b)]) continue;
            svg << "<line x1=\"" << fmt_px(det.joints[static_cast<size_t>(a)].x()) << "\" y1=\""
                << fmt_px(det.joints[static_cast<size_t>(a)].y()) << "\" x2=\""
                << fmt_px(det.joints[static_cast<size_t>(b)].x()) << "\" y2=\""
                << fmt_px(det.joints[static_cast<size_t>(b)].y())
                << "\" stroke=\"#2ca02c\" stroke-width=\"1.5\"/>\n";
        }
        for (int i = 0; i < kNumJoints; ++i) {
            if (!det.visible[static_cast<size_t>(i)]) continue;
            svg << "<circle cx=\"" << fmt_px(det.joints[static_cast<size_t>(i)].x()) << "\" cy=\""
                << fmt_px(det.joints[static_cast<size_t>(i)].y())
                << "\" r=\"2.5\" fill=\"#2ca02c\"/>\n";
        }
    }

    for (const auto& h : pg.humans) {
        std::array<std::optional<Vec2>, kNumJoints> px;
        for (int i = 0; i < kNumJoints; ++i)
            px[static_cast<size_t>(i)] = try_project(pg.camera, h.pose.joints[static_cast<size_t>(i)]);
        for (const auto& [a, b] : detail::skeleton_bones()) {
            if (!px[static_cast<size_t>(a)] || !px[static_cast<size_t>(b)]) continue;
            svg << "<line x1=\"" << fmt_px(px[static_cast<size_t>(a)]->x()) << "\" y1=\""
                << fmt_px(px[static_cast<size_t>(a)]->y()) << "\" x2=\""
                << fmt_px(px[static_cast<size_t>(b)]->x()) << "\" y2=\""
                << fmt_px(px[static_cast<size_t>(b)]->y())
                << "\" stroke=\"#ff7f0e\" stroke-width=\"1.2\"/>\n";
        }
        for (int i = 0; i < kNumJoints; ++i) {
            if (!px[static_cast<size_t>(i)]) continue;
            svg << "<circle cx=\"" << fmt_px(px[static_cast<size_t>(i)]->x()) << "\" cy=\""
                << fmt_px(px[static_cast<size_t>(i)]->y()) << "\" r=\"2\" fill=\"#ff7f0e\"/>\n";
        }
    }

    svg << "</svg>\n";
    return svg.str();
}

}  // namespace scenemc
