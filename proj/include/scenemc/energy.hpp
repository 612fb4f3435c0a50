#pragma once

// Energy terms of the scene posterior: support and collision (physical
// prior), human-object interaction prior, and the 2D reprojection likelihood.
// Lower is better everywhere; all terms are >= 0. total_energy evaluates a
// graph from scratch; delta_energy re-evaluates only the terms touching one
// changed node, which is what the sampler uses in its inner loop.

#include "scenemc/geometry.hpp"
#include "scenemc/hoi.hpp"

#include <map>
#include <set>
#include <utility>
#include <vector>

namespace scenemc {

struct EnergyWeights {
    double support = 1.0;
    double collision = 1.0;
    double hoi = 1.0;
    double likelihood_obj = 1.0;
    double likelihood_pose = 1.0;
};

struct EnergyParams {
    double offscreen_penalty = 1.0;   // charged when a node has no usable projection
    double proxy_margin = 0.10;       // lateral inflation of the human volume proxy
    double human_footprint_half = 0.15;  // half-extent of the hip footprint square
};

struct EnergyBreakdown {
    double e_support = 0.0;
    double e_collision = 0.0;
    double e_hoi = 0.0;
    double e_likelihood_obj = 0.0;   // raw D_o sum
    double e_likelihood_pose = 0.0;  // raw D_h sum
    double e_likelihood = 0.0;       // weighted combination of the two above
    double total = 0.0;
    std::map<int, double> per_node;  // weighted contributions; filled by total_energy only
};

// ---------------------------------------------------------------------------
// Support

namespace detail {

inline Polygon2D supported_footprint(const ParseGraph& pg, int id, const EnergyParams& params) {
    if (const ObjectNode* o = pg.find_object(id)) return footprint(o->box);
    if (const HumanNode* h = pg.find_human(id)) {
        const Vec2 hip = h->pose.joints[kHip].head<2>();
        const double r = params.human_footprint_half;
        return {{{hip.x() - r, hip.y() - r}, {hip.x() + r, hip.y() - r},
                 {hip.x() + r, hip.y() + r}, {hip.x() - r, hip.y() + r}}};
    }
    throw DanglingEdgeError("support edge references missing node " + std::to_string(id));
}

inline double supported_bottom_z(const ParseGraph& pg, int id) {
    if (const ObjectNode* o = pg.find_object(id)) return o->box.bottom_z();
    if (const HumanNode* h = pg.find_human(id)) return pose_bottom_z(h->pose);
    throw DanglingEdgeError("support edge references missing node " + std::to_string(id));
}

inline Polygon2D supporter_footprint(const ParseGraph& pg, int id) {
    if (is_floor(id)) return footprint(pg.layout);
    if (is_wall(id)) return {};  // degenerate: walls have no horizontal footprint
    if (const ObjectNode* o = pg.find_object(id)) return footprint(o->box);
    throw DanglingEdgeError("support edge references missing supporter " + std::to_string(id));
}

inline double supporter_top_z(const ParseGraph& pg, int id) {
    if (is_floor(id)) return pg.layout.bottom_z();
    if (is_wall(id)) return pg.layout.top_z();
    if (const ObjectNode* o = pg.find_object(id)) return o->box.top_z();
    throw DanglingEdgeError("support edge references missing supporter " + std::to_string(id));
}

}  // namespace detail

/// E_o + E_height for one support edge. E_o vanishes when the supporter is
/// the floor; E_height vanishes when the supporter is a wall.
inline double support_edge_energy(const ParseGraph& pg, const SupportEdge& e,
                                  const EnergyParams& params = {}) {
    double e_o = 0.0;
    if (!is_floor(e.supporter)) {
        const Polygon2D fi = detail::supported_footprint(pg, e.supported, params);
        const Polygon2D fj = detail::supporter_footprint(pg, e.supporter);
        const double ai = fi.area();
        const double overlap =
            ai > 0.0 ? std::clamp(polygon_intersection_area(fi, fj) / ai, 0.0, 1.0) : 0.0;
        e_o = 1.0 - overlap;
    }
    double e_h = 0.0;
    if (!is_wall(e.supporter)) {
        e_h = std::abs(detail::supported_bottom_z(pg, e.supported) -
                       detail::supporter_top_z(pg, e.supporter));
    }
    return e_o + e_h;
}

inline double support_energy(const ParseGraph& pg, const EnergyParams& params = {}) {
    double e = 0.0;
    for (const auto& edge : pg.support_edges) e += support_edge_energy(pg, edge, params);
    return e;
}

// ---------------------------------------------------------------------------
// Collision

namespace detail {

inline std::set<std::pair<int, int>> hoi_pairs(const ParseGraph& pg) {
    std::set<std::pair<int, int>> pairs;
    for (const auto& e : pg.hoi_edges) pairs.insert({e.human, e.object});
    return pairs;
}

inline Cuboid node_volume_box(const ParseGraph& pg, int id, const EnergyParams& params) {
    if (const ObjectNode* o = pg.find_object(id)) return o->box;
    const HumanNode* h = pg.find_human(id);
    return human_hull_volume_proxy(h->pose, params.proxy_margin);
}

/// Volume of the node sticking out of the room box.
inline double out_of_room_volume(const ParseGraph& pg, const Cuboid& box) {
    return std::max(0.0, box.volume() - intersection_volume(box, pg.layout));
}

}  // namespace detail

/// Collision energy: out-of-room volume for every object and
/// human, human-object intersections for pairs without an HOI edge, and
/// object-object intersections for pairs where neither box is a container.
inline double collision_energy(const ParseGraph& pg, const EnergyParams& params = {}) {
    const auto exempt = detail::hoi_pairs(pg);
    double e = 0.0;
    for (const auto& o : pg.objects) e += detail::out_of_room_volume(pg, o.box);
    std::vector<Cuboid> proxies;
    proxies.reserve(pg.humans.size());
    for (const auto& h : pg.humans) {
        proxies.push_back(human_hull_volume_proxy(h.pose, params.proxy_margin));
        e += detail::out_of_room_volume(pg, proxies.back());
    }
    for (size_t hi = 0; hi < pg.humans.size(); ++hi) {
        const HumanNode& h = pg.humans[hi];
        for (const auto& o : pg.objects) {
            if (exempt.count({h.id, o.id})) continue;
            e += intersection_volume(proxies[hi], o.box);
        }
    }
    for (size_t i = 0; i < pg.objects.size(); ++i) {
        if (pg.objects[i].box.is_container) continue;
        for (size_t j = i + 1; j < pg.objects.size(); ++j) {
            if (pg.objects[j].box.is_container) continue;
            e += intersection_volume(pg.objects[i].box, pg.objects[j].box);
        }
    }
    return e;
}

// ---------------------------------------------------------------------------
// HOI

inline double hoi_energy(const ParseGraph& pg, const HoiPriorSet& priors) {
    double e = 0.0;
    for (const auto& edge : pg.hoi_edges) {
        const HumanNode* h = pg.find_human(edge.human);
        const ObjectNode* o = pg.find_object(edge.object);
        if (h == nullptr || o == nullptr)
            throw DanglingEdgeError("hoi edge references missing node");
        e += hoi_nll(priors.at(edge.action), h->pose, o->box);
    }
    return e;
}

// ---------------------------------------------------------------------------
// Reprojection likelihood

/// D_o for one object: 1 - IoU between the detected box and the projected 2D
/// box of the cuboid, i.e. the bounding rectangle of the projected-corner
/// convex hull clamped to the image. Corners behind the camera are culled;
/// fewer than 3 in front charges the fixed penalty. Synthesized objects have
/// no 2D evidence and contribute 0.
inline double likelihood_object_term(const ObjectNode& node, const Camera& cam,
                                     const Observations& obs, const EnergyParams& params) {
    if (node.synthesized || node.detection < 0 ||
        node.detection >= static_cast<int>(obs.det_boxes.size()))
        return 0.0;
    const auto corners = cuboid_corners(node.box);
    std::vector<Vec2> projected;
    projected.reserve(8);
    for (const Vec3& c : corners)
        if (auto px = try_project(cam, c)) projected.push_back(*px);
    if (projected.size() < 3) return params.offscreen_penalty;

    const Polygon2D hull = hull_or_bbox(projected);
    const Rect2D image{{0.0, 0.0}, {static_cast<double>(obs.width), static_cast<double>(obs.height)}};
    const Polygon2D clamped = clip_convex(hull, rect_to_polygon(image));
    if (clamped.vertices.empty()) return params.offscreen_penalty;
    const Rect2D projected_box = bounding_rect(clamped.vertices);
    const Rect2D& det = obs.det_boxes[static_cast<size_t>(node.detection)].box;
    return 1.0 - iou_2d(projected_box, det);
}

/// D_h for one human: mean pixel distance between projected 3D joints and the
/// detected visible joints, normalized by the image diagonal so it shares
/// scale with D_o. No usable joint charges the fixed penalty.
inline double likelihood_human_term(const HumanNode& node, const Camera& cam,
                                    const Observations& obs, const EnergyParams& params) {
    if (node.detection < 0 || node.detection >= static_cast<int>(obs.det_poses.size()))
        return 0.0;
    const DetectedPose& det = obs.det_poses[static_cast<size_t>(node.detection)];
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < kNumJoints; ++i) {
        if (!det.visible[static_cast<size_t>(i)]) continue;
        const auto px = try_project(cam, node.pose.joints[static_cast<size_t>(i)]);
        if (!px) continue;
        sum += (*px - det.joints[static_cast<size_t>(i)]).norm();
        ++count;
    }
    if (count == 0) return params.offscreen_penalty;
    return (sum / count) / obs.image_diagonal();
}

struct LikelihoodSums {
    double objects = 0.0;
    double humans = 0.0;
};

inline LikelihoodSums likelihood_energy(const ParseGraph& pg, const Observations& obs,
                                        const EnergyParams& params = {}) {
    LikelihoodSums s;
    for (const auto& o : pg.objects)
        s.objects += likelihood_object_term(o, pg.camera, obs, params);
    for (const auto& h : pg.humans)
        s.humans += likelihood_human_term(h, pg.camera, obs, params);
    return s;
}

// ---------------------------------------------------------------------------
// Total

namespace detail {

inline void assemble(EnergyBreakdown& bd, const EnergyWeights& w) {
    bd.e_likelihood =
        w.likelihood_obj * bd.e_likelihood_obj + w.likelihood_pose * bd.e_likelihood_pose;
    bd.total = w.support * bd.e_support + w.collision * bd.e_collision + w.hoi * bd.e_hoi +
               bd.e_likelihood;
}

}  // namespace detail

/// Full evaluation. per_node holds each node's weighted share (pair terms are
/// split evenly), summing to total.
inline EnergyBreakdown total_energy(const ParseGraph& pg, const Observations& obs,
                                    const HoiPriorSet& priors, const EnergyWeights& w = {},
                                    const EnergyParams& params = {}) {
    EnergyBreakdown bd;
    auto add_node = [&](int id, double v) { bd.per_node[id] += v; };

    for (const auto& edge : pg.support_edges) {
        const double e = support_edge_energy(pg, edge, params);
        bd.e_support += e;
        add_node(edge.supported, w.support * e);
    }

    const auto exempt = detail::hoi_pairs(pg);
    std::vector<Cuboid> proxies;
    proxies.reserve(pg.humans.size());
    for (const auto& h : pg.humans)
        proxies.push_back(human_hull_volume_proxy(h.pose, params.proxy_margin));
    for (const auto& o : pg.objects) {
        const double v = detail::out_of_room_volume(pg, o.box);
        bd.e_collision += v;
        add_node(o.id, w.collision * v);
    }
    for (size_t hi = 0; hi < pg.humans.size(); ++hi) {
        const double v = detail::out_of_room_volume(pg, proxies[hi]);
        bd.e_collision += v;
        add_node(pg.humans[hi].id, w.collision * v);
    }
    for (size_t hi = 0; hi < pg.humans.size(); ++hi) {
        const HumanNode& h = pg.humans[hi];
        for (const auto& o : pg.objects) {
            if (exempt.count({h.id, o.id})) continue;
            const double v = intersection_volume(proxies[hi], o.box);
            bd.e_collision += v;
            add_node(h.id, 0.5 * w.collision * v);
            add_node(o.id, 0.5 * w.collision * v);
        }
    }
    for (size_t i = 0; i < pg.objects.size(); ++i) {
        if (pg.objects[i].box.is_container) continue;
        for (size_t j = i + 1; j < pg.objects.size(); ++j) {
            if (pg.objects[j].box.is_container) continue;
            const double v = intersection_volume(pg.objects[i].box, pg.objects[j].box);
            bd.e_collision += v;
            add_node(pg.objects[i].id, 0.5 * w.collision * v);
            add_node(pg.objects[j].id, 0.5 * w.collision * v);
        }
    }

    for (const auto& edge : pg.hoi_edges) {
        const HumanNode* h = pg.find_human(edge.human);
        const ObjectNode* o = pg.find_object(edge.object);
        if (h == nullptr || o == nullptr)
            throw DanglingEdgeError("hoi edge references missing node");
        const double e = hoi_nll(priors.at(edge.action), h->pose, o->box);
        bd.e_hoi += e;
        add_node(h->id, 0.5 * w.hoi * e);
        add_node(o->id, 0.5 * w.hoi * e);
    }

    for (const auto& o : pg.objects) {
        const double e = likelihood_object_term(o, pg.camera, obs, params);
        bd.e_likelihood_obj += e;
        add_node(o.id, w.likelihood_obj * e);
    }
    for (const auto& h : pg.humans) {
        const double e = likelihood_human_term(h, pg.camera, obs, params);
        bd.e_likelihood_pose += e;
        add_node(h.id, w.likelihood_pose * e);
    }

    detail::assemble(bd, w);
    return bd;
}

// ---------------------------------------------------------------------------
// Delta evaluation

namespace detail {

/// Sum of all energy terms touching one node, split by part. Pair terms are
/// counted in full (they appear once in the totals and only one endpoint
/// changes at a time).
struct NodeTerms {
    double support = 0.0;
    double collision = 0.0;
    double hoi = 0.0;
    double lik_obj = 0.0;
    double lik_pose = 0.0;
};

inline NodeTerms node_terms(const ParseGraph& pg, const Observations& obs,
                            const HoiPriorSet& priors, int id, const EnergyParams& params) {
    NodeTerms t;
    for (const auto& edge : pg.support_edges)
        if (edge.supported == id || edge.supporter == id)
            t.support += support_edge_energy(pg, edge, params);

    const auto exempt = hoi_pairs(pg);
    if (const ObjectNode* o = pg.find_object(id)) {
        t.collision += out_of_room_volume(pg, o->box);
        for (const auto& h : pg.humans) {
            if (exempt.count({h.id, id})) continue;
            t.collision += intersection_volume(
                human_hull_volume_proxy(h.pose, params.proxy_margin), o->box);
        }
        if (!o->box.is_container) {
            for (const auto& other : pg.objects) {
                if (other.id == id || other.box.is_container) continue;
                t.collision += intersection_volume(o->box, other.box);
            }
        }
        t.lik_obj = likelihood_object_term(*o, pg.camera, obs, params);
    } else if (const HumanNode* h = pg.find_human(id)) {
        const Cuboid proxy = human_hull_volume_proxy(h->pose, params.proxy_margin);
        t.collision += out_of_room_volume(pg, proxy);
        for (const auto& o2 : pg.objects) {
            if (exempt.count({id, o2.id})) continue;
            t.collision += intersection_volume(proxy, o2.box);
        }
        t.lik_pose = likelihood_human_term(*h, pg.camera, obs, params);
    }

    for (const auto& edge : pg.hoi_edges) {
        if (edge.human != id && edge.object != id) continue;
        const HumanNode* h = pg.find_human(edge.human);
        const ObjectNode* o = pg.find_object(edge.object);
        if (h == nullptr || o == nullptr)
            throw DanglingEdgeError("hoi edge references missing node");
        t.hoi += hoi_nll(priors.at(edge.action), h->pose, o->box);
    }
    return t;
}

}  // namespace detail

/// Incremental re-evaluation after a single-node change. `changed_id` names
/// an object or human id; pass kFloorId for layout moves (those re-evaluate
/// support and collision wholesale, the only parts the layout touches).
/// Matches total_energy on the new graph within floating-point reordering
/// noise. per_node is not maintained on this path.
inline EnergyBreakdown delta_energy(const ParseGraph& pg_old, const EnergyBreakdown& bd_old,
                                    const ParseGraph& pg_new, int changed_id,
                                    const Observations& obs, const HoiPriorSet& priors,
                                    const EnergyWeights& w = {}, const EnergyParams& params = {}) {
    EnergyBreakdown bd;
    if (is_layout_id(changed_id)) {
        bd.e_support = support_energy(pg_new, params);
        bd.e_collision = collision_energy(pg_new, params);
        bd.e_hoi = bd_old.e_hoi;
        bd.e_likelihood_obj = bd_old.e_likelihood_obj;
        bd.e_likelihood_pose = bd_old.e_likelihood_pose;
    } else {
        const detail::NodeTerms before = detail::node_terms(pg_old, obs, priors, changed_id, params);
        const detail::NodeTerms after = detail::node_terms(pg_new, obs, priors, changed_id, params);
        bd.e_support = bd_old.e_support - before.support + after.support;
        bd.e_collision = bd_old.e_collision - before.collision + after.collision;
        bd.e_hoi = bd_old.e_hoi - before.hoi + after.hoi;
        bd.e_likelihood_obj = bd_old.e_likelihood_obj - before.lik_obj + after.lik_obj;
        bd.e_likelihood_pose = bd_old.e_likelihood_pose - before.lik_pose + after.lik_pose;
    }
    detail::assemble(bd, w);
    return bd;
}

}  // namespace scenemc
