#pragma once

// Geometric primitives behind every energy term: pinhole projection, convex
// hulls, convex polygon clipping, footprint overlap and cuboid intersection
// volume. Pure functions over immutable inputs.

#include "scenemc/scene.hpp"

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

namespace scenemc {

// ---------------------------------------------------------------------------
// Polygon2D

/// Simple convex polygon, counterclockwise. The library only ever constructs
/// hulls, footprints and their clips, so convexity holds by construction.
struct Polygon2D {
    std::vector<Vec2> vertices;

    /// Shoelace area; >= 0 for CCW polygons.
    double area() const {
        const size_t n = vertices.size();
        if (n < 3) return 0.0;
        double a = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const Vec2& p = vertices[i];
            const Vec2& q = vertices[(i + 1) % n];
            a += p.x() * q.y() - q.x() * p.y();
        }
        return 0.5 * a;
    }
};

inline Polygon2D rect_to_polygon(const Rect2D& r) {
    return {{{r.lo.x(), r.lo.y()}, {r.hi.x(), r.lo.y()}, {r.hi.x(), r.hi.y()}, {r.lo.x(), r.hi.y()}}};
}

inline Rect2D bounding_rect(std::span<const Vec2> pts) {
    Rect2D r;
    r.lo = Vec2(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
    r.hi = Vec2(std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest());
    for (const Vec2& p : pts) {
        r.lo = r.lo.cwiseMin(p);
        r.hi = r.hi.cwiseMax(p);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Projection

inline double camera_depth(const Camera& cam, const Vec3& p) {
    return (cam.rotation * (p - cam.position)).z();
}

/// Pinhole projection without the positivity check; only valid for points in
/// front of the camera.
inline Vec2 project_unsafe(const Camera& cam, const Vec3& p) {
    const Vec3 c = cam.intrinsics * (cam.rotation * (p - cam.position));
    return {c.x() / c.z(), c.y() / c.z()};
}

inline std::optional<Vec2> try_project(const Camera& cam, const Vec3& p) {
    if (camera_depth(cam, p) <= 0.0) return std::nullopt;
    return project_unsafe(cam, p);
}

/// Projects a world point; the caller must cull points behind the camera.
inline Vec2 project_point(const Camera& cam, const Vec3& p) {
    if (camera_depth(cam, p) <= 0.0)
        throw BehindCameraError("point has nonpositive depth");
    return project_unsafe(cam, p);
}

// ---------------------------------------------------------------------------
// Convex hull (Andrew's monotone chain, CCW output)

inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

inline Polygon2D convex_hull(std::span<const Vec2> points) {
    std::vector<Vec2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& a, const Vec2& b) { return a == b; }),
              pts.end());
    const size_t n = pts.size();
    if (n < 3) throw DegenerateHullError("fewer than 3 distinct points");

    std::vector<Vec2> h(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {  // lower
        while (k >= 2 && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
        h[k++] = pts[i];
    }
    for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
        while (k >= t && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    if (h.size() < 3) throw DegenerateHullError("all points collinear");
    return {std::move(h)};
}

/// Hull with a rectangle fallback for degenerate (near line) point sets, so
/// projected profile-view boxes still yield a usable shape.
inline Polygon2D hull_or_bbox(std::span<const Vec2> points) {
    try {
        return convex_hull(points);
    } catch (const DegenerateHullError&) {
        return rect_to_polygon(bounding_rect(points));
    }
}

// ---------------------------------------------------------------------------
// Convex clipping (Sutherland-Hodgman)

/// Intersection of two convex CCW polygons. Exact up to floating point.
inline Polygon2D clip_convex(const Polygon2D& subject, const Polygon2D& clip) {
    std::vector<Vec2> poly = subject.vertices;
    const size_t m = clip.vertices.size();
    if (poly.size() < 3 || m < 3) return {};
    for (size_t e = 0; e < m && !poly.empty(); ++e) {
        const Vec2& a = clip.vertices[e];
        const Vec2& b = clip.vertices[(e + 1) % m];
        std::vector<Vec2> next;
        next.reserve(poly.size() + 2);
        const size_t n = poly.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2& p = poly[i];
            const Vec2& q = poly[(i + 1) % n];
            const double dp = cross2(a, b, p);
            const double dq = cross2(a, b, q);
            if (dp >= 0.0) next.push_back(p);
            if ((dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0)) {
                const double t = dp / (dp - dq);
                next.push_back(p + t * (q - p));
            }
        }
        poly = std::move(next);
    }
    return {std::move(poly)};
}

inline double polygon_intersection_area(const Polygon2D& a, const Polygon2D& b) {
    return clip_convex(a, b).area();
}

// ---------------------------------------------------------------------------
// IoU

inline double iou_2d(const Polygon2D& a, const Rect2D& b) {
    const double inter = polygon_intersection_area(a, rect_to_polygon(b));
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

inline double iou_2d(const Rect2D& a, const Rect2D& b) {
    return iou_2d(rect_to_polygon(a), b);
}

// ---------------------------------------------------------------------------
// Footprints and volumes

/// Bottom-face xy outline, CCW.
inline Polygon2D footprint(const Cuboid& c) {
    const auto corners = cuboid_corners(c);
    Polygon2D p;
    p.vertices.reserve(4);
    for (int i = 0; i < 4; ++i)
        p.vertices.push_back(corners[static_cast<size_t>(i)].head<2>());
    return p;
}

/// Fraction of vi's footprint covered by vj's. NOT symmetric.
inline double footprint_overlap(const Cuboid& vi, const Cuboid& vj) {
    const Polygon2D fi = footprint(vi);
    const double ai = fi.area();
    if (ai <= 0.0) return 0.0;
    return std::clamp(polygon_intersection_area(fi, footprint(vj)) / ai, 0.0, 1.0);
}

/// Exact for yaw-only boxes: both are right prisms over convex footprints,
/// so the intersection is (footprint clip area) x (z overlap).
inline double intersection_volume(const Cuboid& a, const Cuboid& b) {
    const double zlo = std::max(a.bottom_z(), b.bottom_z());
    const double zhi = std::min(a.top_z(), b.top_z());
    if (zhi <= zlo) return 0.0;
    const double area = polygon_intersection_area(footprint(a), footprint(b));
    return area * (zhi - zlo);
}

/// Collision stand-in for a human: the tight yaw-aligned bounding cuboid of
/// the 17 joints, inflated laterally by a body-radius margin: a deliberately
/// coarse stand-in for human volumetry.
inline Cuboid human_hull_volume_proxy(const HumanPose& h, double margin = 0.10) {
    Vec3 lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max());
    Vec3 hi = -lo;
    const double c = std::cos(-h.yaw), s = std::sin(-h.yaw);
    for (const Vec3& j : h.joints) {
        const Vec3 local(c * j.x() - s * j.y(), s * j.x() + c * j.y(), j.z());
        lo = lo.cwiseMin(local);
        hi = hi.cwiseMax(local);
    }
    Cuboid box;
    const Vec3 mid = 0.5 * (lo + hi);
    box.center = Vec3(std::cos(h.yaw) * mid.x() - std::sin(h.yaw) * mid.y(),
                      std::sin(h.yaw) * mid.x() + std::cos(h.yaw) * mid.y(), mid.z());
    box.size = (hi - lo) + Vec3(2.0 * margin, 2.0 * margin, 0.0);
    box.size = box.size.cwiseMax(Vec3(1e-6, 1e-6, 1e-6));
    box.yaw = h.yaw;
    box.class_label = "human";
    return box;
}

}  // namespace scenemc
