#pragma once

// Parse graph model: cuboids, human poses, camera, observations, and the
// structural validation of a scene hypothesis. All types are immutable value
// data; mutation happens by constructing modified copies.

#include "scenemc/common.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace scenemc {

// ---------------------------------------------------------------------------
// Cuboid

/// Oriented 3D box: gravity-aligned, yaw about world z only. Used for the
/// room layout and every object.
struct Cuboid {
    Vec3 center = Vec3::Zero();          // meters, world
    Vec3 size = Vec3::Ones();            // full extents along local axes
    double yaw = 0.0;                    // radians, about world z
    std::string class_label;
    bool is_container = false;

    double volume() const { return size.x() * size.y() * size.z(); }
    double bottom_z() const { return center.z() - 0.5 * size.z(); }
    double top_z() const { return center.z() + 0.5 * size.z(); }
};

/// Corner order convention: bottom face counterclockwise seen from above
/// starting at local (+x, +y), then the top face in the same xy order.
/// Index i and i+4 share the same xy column.
inline std::array<Vec3, 8> cuboid_corners(const Cuboid& c) {
    const double hx = 0.5 * c.size.x(), hy = 0.5 * c.size.y(), hz = 0.5 * c.size.z();
    const double co = std::cos(c.yaw), si = std::sin(c.yaw);
    const std::array<std::pair<double, double>, 4> xy = {{{+hx, +hy}, {-hx, +hy}, {-hx, -hy}, {+hx, -hy}}};
    std::array<Vec3, 8> out;
    for (int i = 0; i < 4; ++i) {
        const double lx = xy[static_cast<size_t>(i)].first;
        const double ly = xy[static_cast<size_t>(i)].second;
        const Vec3 w(co * lx - si * ly, si * lx + co * ly, 0.0);
        out[static_cast<size_t>(i)] = c.center + w + Vec3(0, 0, -hz);
        out[static_cast<size_t>(i + 4)] = c.center + w + Vec3(0, 0, +hz);
    }
    return out;
}

// ---------------------------------------------------------------------------
// HumanPose

using JointArray = std::array<Vec3, kNumJoints>;

/// 17-joint skeleton in world coordinates plus the (center, scale, template,
/// yaw) parametrization that generates it. `rel_joints` is the unitless
/// template with the hip pinned at the origin.
struct HumanPose {
    JointArray joints{};                 // world, meters
    Vec3 center = Vec3::Zero();          // hip position
    double scale = 1.0;
    JointArray rel_joints{};             // template, hip at origin
    double yaw = 0.0;
    std::vector<std::string> actions;    // multi-hot: set of active labels

    bool has_action(const std::string& a) const {
        return std::find(actions.begin(), actions.end(), a) != actions.end();
    }
};

/// joints = Rot(yaw) * (scale * rel) + center.
inline HumanPose pose_from_params(const Vec3& center, double scale, const JointArray& rel,
                                  double yaw, std::vector<std::string> actions = {}) {
    if (!(scale > 0.0)) throw InvalidParameterError("pose scale must be positive");
    HumanPose p;
    p.center = center;
    p.scale = scale;
    p.rel_joints = rel;
    p.yaw = normalize_angle(yaw);
    p.actions = std::move(actions);
    const Mat3 r = rot_z(p.yaw);
    for (int i = 0; i < kNumJoints; ++i)
        p.joints[static_cast<size_t>(i)] = r * (scale * rel[static_cast<size_t>(i)]) + center;
    return p;
}

struct PoseParams {
    Vec3 center;
    double scale;
    double yaw;
};

/// Recovers (center, scale, yaw) of a skeleton against a known template.
/// Center is the hip joint (the template pins the hip at the origin), yaw is
/// the 2D Procrustes rotation of the xy coordinates, scale the RMS radius
/// ratio. Exact for skeletons generated by pose_from_params.
inline PoseParams params_from_pose(const JointArray& joints, const JointArray& rel) {
    PoseParams out;
    out.center = joints[kHip];
    double num = 0.0, den = 0.0;     // Procrustes: sum cross / sum dot
    double jr2 = 0.0, rr2 = 0.0;
    for (int i = 0; i < kNumJoints; ++i) {
        const Vec3 j = joints[static_cast<size_t>(i)] - out.center;
        const Vec3& t = rel[static_cast<size_t>(i)];
        num += t.x() * j.y() - t.y() * j.x();
        den += t.x() * j.x() + t.y() * j.y();
        jr2 += j.squaredNorm();
        rr2 += t.squaredNorm();
    }
    out.yaw = (num == 0.0 && den == 0.0) ? 0.0 : std::atan2(num, den);
    out.scale = rr2 > 0.0 ? std::sqrt(jr2 / rr2) : 1.0;
    return out;
}

/// Rebuilds the world joints from the stored parametrization.
inline JointArray reconstruct_joints(const HumanPose& p) {
    const Mat3 r = rot_z(p.yaw);
    JointArray out;
    for (int i = 0; i < kNumJoints; ++i)
        out[static_cast<size_t>(i)] = r * (p.scale * p.rel_joints[static_cast<size_t>(i)]) + p.center;
    return out;
}

/// Lowest ankle: the pose's resting surface height.
inline double pose_bottom_z(const HumanPose& p) {
    return std::min(p.joints[kLeftAnkle].z(), p.joints[kRightAnkle].z());
}

// ---------------------------------------------------------------------------
// Camera

/// Pinhole camera. `rotation` maps world directions into the camera frame;
/// `position` is the camera center in world coordinates, so a world point p
/// lands at K * R * (p - position).
struct Camera {
    Mat3 intrinsics = Mat3::Identity();
    Mat3 rotation = Mat3::Identity();
    Vec3 position = Vec3::Zero();
};

inline Camera make_camera(double fx, double fy, double cx, double cy,
                          const Mat3& rotation, const Vec3& position) {
    Camera cam;
    cam.intrinsics << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    cam.rotation = rotation;
    cam.position = position;
    return cam;
}

/// Camera at `position` looking at `target`, world z up. Camera frame is the
/// usual computer-vision one: +z forward, +x right, +y down.
inline Camera look_at_camera(double f, double cx, double cy,
                             const Vec3& position, const Vec3& target) {
    Vec3 fwd = target - position;
    if (fwd.norm() < 1e-12) throw InvalidParameterError("camera target equals position");
    fwd.normalize();
    Vec3 right = fwd.cross(Vec3(0, 0, 1));
    if (right.norm() < 1e-9) right = Vec3(1, 0, 0);  // looking straight up/down
    right.normalize();
    const Vec3 down = fwd.cross(right).normalized();
    Mat3 r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = fwd.transpose();
    return make_camera(f, f, cx, cy, r, position);
}

// ---------------------------------------------------------------------------
// Parse graph

/// Node ids: objects and humans carry unique non-negative ids. The layout
/// contributes pseudo-nodes usable as supporters: the floor and four walls.
/// Wall i is the layout's side face along local +x, -x, +y, -y.
inline constexpr int kFloorId = -1;
inline constexpr int wall_id(int i) { return -2 - i; }
inline constexpr bool is_floor(int id) { return id == kFloorId; }
inline constexpr bool is_wall(int id) { return id <= -2 && id >= -5; }
inline constexpr int wall_index(int id) { return -2 - id; }
inline constexpr bool is_layout_id(int id) { return is_floor(id) || is_wall(id); }

struct ObjectNode {
    int id = 0;
    Cuboid box;
    int detection = -1;       // index into Observations::det_boxes, -1 if none
    bool synthesized = false; // created by top-down sampling, no 2D evidence
};

struct HumanNode {
    int id = 0;
    HumanPose pose;
    int detection = -1;       // index into Observations::det_poses
};

struct SupportEdge {
    int supported = 0;  // object or human id
    int supporter = 0;  // object id, kFloorId, or wall_id(i)
};

struct HoiEdge {
    int human = 0;
    int object = 0;
    std::string action;
};

struct ParseGraph {
    Cuboid layout;
    std::vector<ObjectNode> objects;
    std::vector<HumanNode> humans;
    std::vector<SupportEdge> support_edges;
    std::vector<HoiEdge> hoi_edges;
    Camera camera;

    const ObjectNode* find_object(int id) const {
        for (const auto& o : objects)
            if (o.id == id) return &o;
        return nullptr;
    }
    const HumanNode* find_human(int id) const {
        for (const auto& h : humans)
            if (h.id == id) return &h;
        return nullptr;
    }
    ObjectNode* find_object(int id) {
        return const_cast<ObjectNode*>(std::as_const(*this).find_object(id));
    }
    HumanNode* find_human(int id) {
        return const_cast<HumanNode*>(std::as_const(*this).find_human(id));
    }
    int max_node_id() const {
        int m = -1;
        for (const auto& o : objects) m = std::max(m, o.id);
        for (const auto& h : humans) m = std::max(m, h.id);
        return m;
    }
};

// ---------------------------------------------------------------------------
// Observations

struct Rect2D {
    Vec2 lo = Vec2::Zero();
    Vec2 hi = Vec2::Zero();

    double width() const { return hi.x() - lo.x(); }
    double height() const { return hi.y() - lo.y(); }
    double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
};

struct DetectedBox {
    std::string class_label;
    Rect2D box;            // pixels, clamped to the image at ingestion
    double confidence = 1.0;
};

struct ActionScore {
    std::string label;
    double confidence = 1.0;
};

struct DetectedPose {
    std::array<Vec2, kNumJoints> joints{};  // pixels
    std::array<bool, kNumJoints> visible{};
    std::vector<ActionScore> actions;

    double action_confidence(const std::string& label) const {
        for (const auto& a : actions)
            if (a.label == label) return a.confidence;
        return 0.0;
    }
};

struct Observations {
    Camera camera;
    std::vector<DetectedBox> det_boxes;
    std::vector<DetectedPose> det_poses;
    int width = 640;
    int height = 480;
    std::optional<Cuboid> layout_hint;  // coarse room box, when available

    double image_diagonal() const {
        return std::sqrt(static_cast<double>(width) * width +
                         static_cast<double>(height) * height);
    }
};

/// Clamps detections to the image rectangle and marks out-of-frame joints
/// invisible. Call once at ingestion.
inline void clamp_observations(Observations& obs) {
    const double w = obs.width, h = obs.height;
    for (auto& d : obs.det_boxes) {
        d.box.lo.x() = std::clamp(d.box.lo.x(), 0.0, w);
        d.box.lo.y() = std::clamp(d.box.lo.y(), 0.0, h);
        d.box.hi.x() = std::clamp(d.box.hi.x(), 0.0, w);
        d.box.hi.y() = std::clamp(d.box.hi.y(), 0.0, h);
        if (d.box.hi.x() < d.box.lo.x()) std::swap(d.box.lo.x(), d.box.hi.x());
        if (d.box.hi.y() < d.box.lo.y()) std::swap(d.box.lo.y(), d.box.hi.y());
        d.confidence = std::clamp(d.confidence, 0.0, 1.0);
    }
    for (auto& p : obs.det_poses) {
        for (int i = 0; i < kNumJoints; ++i) {
            const Vec2& j = p.joints[static_cast<size_t>(i)];
            if (j.x() < 0.0 || j.x() > w || j.y() < 0.0 || j.y() > h)
                p.visible[static_cast<size_t>(i)] = false;
        }
        for (auto& a : p.actions) a.confidence = std::clamp(a.confidence, 0.0, 1.0);
    }
}

// ---------------------------------------------------------------------------
// Structural validation

struct Violation {
    int node_id = 0;  // offending node, or kFloorId for graph-level issues
    std::string what;
};

inline bool cuboid_ok(const Cuboid& c) {
    return c.size.x() > 0.0 && c.size.y() > 0.0 && c.size.z() > 0.0 &&
           std::isfinite(c.center.x()) && std::isfinite(c.center.y()) &&
           std::isfinite(c.center.z()) && std::isfinite(c.yaw);
}

/// Diagnostics, not exceptions: returns one descriptor per violated invariant,
/// empty iff the graph is structurally sound.
inline std::vector<Violation> validate(const ParseGraph& pg) {
    std::vector<Violation> out;
    std::set<int> ids;

    auto check_id = [&](int id) {
        if (id < 0) out.push_back({id, "negative node id"});
        if (!ids.insert(id).second) out.push_back({id, "duplicate node id"});
    };

    if (!cuboid_ok(pg.layout)) out.push_back({kFloorId, "layout: nonpositive extent"});
    const Mat3& r = pg.camera.rotation;
    if (((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        out.push_back({kFloorId, "camera rotation not orthonormal"});
    const Mat3& k = pg.camera.intrinsics;
    if (k(2, 2) != 1.0 || k(1, 0) != 0.0 || k(2, 0) != 0.0 || k(2, 1) != 0.0)
        out.push_back({kFloorId, "camera intrinsics not upper-triangular with unit scale"});
    for (const auto& o : pg.objects) {
        check_id(o.id);
        if (!cuboid_ok(o.box)) out.push_back({o.id, "nonpositive extent"});
        if (o.box.yaw < -kPi || o.box.yaw >= kPi)
            out.push_back({o.id, "yaw not normalized"});
    }
    for (const auto& h : pg.humans) {
        check_id(h.id);
        if (!(h.pose.scale > 0.0)) out.push_back({h.id, "nonpositive pose scale"});
        const JointArray rec = reconstruct_joints(h.pose);
        for (int i = 0; i < kNumJoints; ++i) {
            if ((rec[static_cast<size_t>(i)] - h.pose.joints[static_cast<size_t>(i)]).norm() > 1e-9) {
                out.push_back({h.id, "joints inconsistent with parametrization"});
                break;
            }
        }
        if (h.pose.actions.empty() && h.detection >= 0)
            out.push_back({h.id, "empty action set"});
    }

    std::map<int, int> support_count;
    for (const auto& e : pg.support_edges) {
        if (pg.find_object(e.supported) == nullptr && pg.find_human(e.supported) == nullptr)
            out.push_back({e.supported, "dangling support edge (supported)"});
        if (!is_layout_id(e.supporter) && pg.find_object(e.supporter) == nullptr)
            out.push_back({e.supporter, "dangling support edge (supporter)"});
        support_count[e.supported]++;
    }
    if (!pg.support_edges.empty()) {
        for (const auto& o : pg.objects)
            if (support_count[o.id] != 1)
                out.push_back({o.id, "node not in exactly one support edge"});
        for (const auto& h : pg.humans)
            if (support_count[h.id] != 1)
                out.push_back({h.id, "node not in exactly one support edge"});
    }

    for (const auto& e : pg.hoi_edges) {
        const HumanNode* h = pg.find_human(e.human);
        if (h == nullptr) {
            out.push_back({e.human, "dangling hoi edge (human)"});
            continue;
        }
        if (pg.find_object(e.object) == nullptr)
            out.push_back({e.object, "dangling hoi edge (object)"});
        if (!h->pose.has_action(e.action))
            out.push_back({e.human, "hoi action not in human's action set"});
    }
    return out;
}

}  // namespace scenemc
