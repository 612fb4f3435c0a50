#pragma once

// Test-only oracles, kept independent of the library code paths they check:
// point membership tests are direct coordinate-frame arithmetic, volumes come
// from voxel counting, areas from Monte Carlo sampling.

#include "scenemc/common.hpp"
#include "scenemc/scene.hpp"
#include "scenemc/geometry.hpp"

#include <algorithm>
#include <vector>

namespace oracle {

using scenemc::Cuboid;
using scenemc::Polygon2D;
using scenemc::Rng;
using scenemc::Vec2;
using scenemc::Vec3;

inline bool point_in_cuboid(const Cuboid& c, const Vec3& p) {
    const Vec3 d = p - c.center;
    const double co = std::cos(-c.yaw), si = std::sin(-c.yaw);
    const double lx = co * d.x() - si * d.y();
    const double ly = si * d.x() + co * d.y();
    return std::abs(lx) <= 0.5 * c.size.x() && std::abs(ly) <= 0.5 * c.size.y() &&
           std::abs(d.z()) <= 0.5 * c.size.z();
}

inline void cuboid_aabb(const Cuboid& c, Vec3& lo, Vec3& hi) {
    const auto corners = scenemc::cuboid_corners(c);
    lo = Vec3(1e300, 1e300, 1e300);
    hi = -lo;
    for (const auto& p : corners) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
}

/// Brute-force intersection volume on an n^3 grid of cell centers spanning
/// the overlap of the two axis-aligned bounding boxes.
inline double voxel_intersection_volume(const Cuboid& a, const Cuboid& b, int n = 100) {
    Vec3 alo, ahi, blo, bhi;
    cuboid_aabb(a, alo, ahi);
    cuboid_aabb(b, blo, bhi);
    const Vec3 lo = alo.cwiseMax(blo);
    const Vec3 hi = ahi.cwiseMin(bhi);
    if ((hi - lo).minCoeff() <= 0.0) return 0.0;
    const Vec3 step = (hi - lo) / n;
    long count = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const Vec3 p = lo + Vec3((i + 0.5) * step.x(), (j + 0.5) * step.y(),
                                         (k + 0.5) * step.z());
                if (point_in_cuboid(a, p) && point_in_cuboid(b, p)) ++count;
            }
    return static_cast<double>(count) * step.x() * step.y() * step.z();
}

inline bool point_in_convex_ccw(const Polygon2D& poly, const Vec2& p) {
    const size_t n = poly.vertices.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly.vertices[i];
        const Vec2& b = poly.vertices[(i + 1) % n];
        if ((b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x()) < 0.0)
            return false;
    }
    return true;
}

/// Monte Carlo estimate of area(a ∩ b) by uniform sampling over the joint
/// bounding box.
inline double mc_intersection_area(const Polygon2D& a, const Polygon2D& b, int samples,
                                   Rng& rng) {
    Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
    for (const auto& v : a.vertices) { lo = lo.cwiseMin(v); hi = hi.cwiseMax(v); }
    for (const auto& v : b.vertices) { lo = lo.cwiseMin(v); hi = hi.cwiseMax(v); }
    if ((hi - lo).minCoeff() <= 0.0) return 0.0;
    long hits = 0;
    for (int s = 0; s < samples; ++s) {
        const Vec2 p(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
        if (point_in_convex_ccw(a, p) && point_in_convex_ccw(b, p)) ++hits;
    }
    const double box_area = (hi.x() - lo.x()) * (hi.y() - lo.y());
    return box_area * static_cast<double>(hits) / samples;
}

inline Cuboid random_cuboid(Rng& rng, double pos_range = 1.0) {
    Cuboid c;
    c.center = Vec3(rng.uniform(-pos_range, pos_range), rng.uniform(-pos_range, pos_range),
                    rng.uniform(-pos_range, pos_range));
    c.size = Vec3(rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5));
    c.yaw = rng.uniform(-scenemc::kPi, scenemc::kPi);
    return c;
}

inline Polygon2D random_convex_polygon(Rng& rng, double scale = 1.0) {
    std::vector<Vec2> pts;
    const int n = 4 + rng.pick(7);
    for (int i = 0; i < n; ++i)
        pts.push_back(Vec2(rng.uniform(0.0, scale), rng.uniform(0.0, scale)));
    for (;;) {
        try {
            return scenemc::convex_hull(pts);
        } catch (const scenemc::DegenerateHullError&) {
            pts.push_back(Vec2(rng.uniform(0.0, scale), rng.uniform(0.0, scale)));
        }
    }
}

/// Pinhole reference: assemble the 3x4 homogeneous projection matrix
/// [K*R | -K*R*t] and dehomogenize. Independent of the library's staged
/// rotate-then-intrinsics path.
inline Vec2 homogeneous_project(const scenemc::Camera& cam, const Vec3& p) {
    Eigen::Matrix<double, 3, 4> P;
    P.leftCols<3>() = cam.intrinsics * cam.rotation;
    P.col(3) = -cam.intrinsics * cam.rotation * cam.position;
    const Eigen::Vector4d hp(p.x(), p.y(), p.z(), 1.0);
    const Vec3 h = P * hp;
    return Vec2(h.x() / h.z(), h.y() / h.z());
}

}  // namespace oracle
