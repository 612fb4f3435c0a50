#pragma once

// Synthetic ground-truth generator and evaluation metrics. Scenes are built
// so that support and collision energy are exactly zero at ground truth:
// boxes rest flush on their supporters, humans stand or sit with ankles
// pinned to the floor, and human placement minimizes physics + HOI energy
// via grid search with coordinate-descent refinement. Observations are
// rendered through the sampled camera with a controllable noise model.

#include "scenemc/energy.hpp"
#include "scenemc/inference.hpp"
#include "scenemc/pose_templates.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace scenemc {

// ---------------------------------------------------------------------------
// Augmented human (the 6-tuple of the pose-augmentation procedure)

struct AugmentedHuman {
    std::string action;
    JointArray pose_template{};  // template joints, hip at origin
    Vec3 translation = Vec3::Zero();
    double yaw = 0.0;
    double scale = 1.0;
    JointArray skeleton{};       // composed world joints
};

/// skeleton = Rot(yaw) * (scale * template) + translation, per joint.
inline AugmentedHuman make_augmented_human(const std::string& action, const JointArray& tmpl,
                                           const Vec3& translation, double yaw, double scale) {
    AugmentedHuman a;
    a.action = action;
    a.pose_template = tmpl;
    a.translation = translation;
    a.yaw = normalize_angle(yaw);
    a.scale = scale;
    const Mat3 r = rot_z(a.yaw);
    for (int i = 0; i < kNumJoints; ++i)
        a.skeleton[static_cast<size_t>(i)] = r * (scale * tmpl[static_cast<size_t>(i)]) + translation;
    return a;
}

inline HumanPose pose_from_augmented(const AugmentedHuman& a) {
    return pose_from_params(a.translation, a.scale, a.pose_template, a.yaw, {a.action});
}

// ---------------------------------------------------------------------------
// Scene specification

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    double sample(Rng& rng) const { return rng.uniform(lo, hi); }
};

struct InventoryItem {
    std::string class_label;
    int count = 1;
    Vec3 size_lo = Vec3(0.4, 0.4, 0.4);
    Vec3 size_hi = Vec3(0.6, 0.6, 0.6);
    std::string place_on = "floor";  // "floor" or a supporter class, e.g. "table"
};

struct NoiseModel {
    double box_jitter_px = 0.0;
    double joint_jitter_px = 0.0;
    double miss_prob = 0.0;
};

struct SceneSpec {
    Range room_x{4.0, 6.0};
    Range room_y{4.0, 6.0};
    Range room_z{2.6, 3.0};
    std::vector<InventoryItem> inventory;
    std::vector<std::string> actions;  // one human per entry
    NoiseModel noise;
    Range camera_height{1.3, 1.8};
    double focal = 600.0;
    int width = 640;
    int height = 480;
    uint64_t seed = 0;
    int max_retries = 200;
};

/// A furnished room with one seated person, the fixture most tests start from.
inline SceneSpec default_scene_spec() {
    SceneSpec s;
    s.inventory = {
        {"table", 1, {1.1, 0.7, 0.74}, {1.3, 0.9, 0.76}, "floor"},
        {"chair", 1, {0.5, 0.5, 0.9}, {0.5, 0.5, 0.9}, "floor"},
    };
    s.actions = {"sit"};
    return s;
}

// ---------------------------------------------------------------------------
// Default priors
//
// Offsets are (object center - key joint) in the human frame, consistent with
// the template bank and the class-default sizes, so harness scenes carry low
// HOI energy at ground truth. Fitted from synthetic draws; stands in for
// priors learned from a real HOI corpus.

inline HoiPriorSet default_hoi_priors() {
    struct Gen {
        const char* action;
        Vec3 mean;
        Vec3 sigma;
    };
    // Means calibrated to the template bank and class-default sizes: sitting
    // hips land on chair centers, reach wrists hang above floor-standing
    // bottles, laptop users sit at the table that carries the laptop.
    static const Gen gens[] = {
        {"sit", {0.02, 0.00, 0.01}, {0.10, 0.10, 0.08}},
        {"sit-at", {0.45, 0.00, -0.07}, {0.12, 0.12, 0.08}},
        {"hold", {0.05, 0.00, -0.76}, {0.08, 0.08, 0.10}},
        {"read", {0.06, 0.00, -0.81}, {0.08, 0.08, 0.10}},
        {"make-phone-call", {0.02, 0.02, -0.64}, {0.06, 0.06, 0.10}},
        {"use-laptop", {0.27, 0.00, 0.39}, {0.10, 0.10, 0.08}},
    };
    HoiPriorSet set;
    uint64_t seed = 0xC0FFEE;
    for (const Gen& g : gens) {
        Rng rng(seed++);
        std::vector<Vec3> samples;
        samples.reserve(128);
        for (int i = 0; i < 128; ++i)
            samples.push_back(g.mean + Vec3(rng.normal() * g.sigma.x(), rng.normal() * g.sigma.y(),
                                            rng.normal() * g.sigma.z()));
        set.priors[g.action] = fit_prior(g.action, samples);
    }
    return set;
}

// ---------------------------------------------------------------------------
// Generation helpers

namespace detail {

inline Cuboid inflate(const Cuboid& c, double d) {
    Cuboid out = c;
    out.size += Vec3(2 * d, 2 * d, 2 * d);
    return out;
}

inline bool inside_room(const ParseGraph& pg, const Cuboid& box) {
    return out_of_room_volume(pg, box) < 1e-12;
}

inline bool collides_with_objects(const ParseGraph& pg, const Cuboid& box, int skip_id,
                                  double clearance) {
    for (const auto& o : pg.objects) {
        if (o.id == skip_id) continue;
        if (intersection_volume(inflate(box, clearance), o.box) > 1e-12) return true;
    }
    return false;
}

/// All eight corners in front of the camera and inside the frame: keeps the
/// rendered detection box unclamped, so the 2D evidence constrains every
/// degree of freedom.
inline bool box_visible(const Camera& cam, const Cuboid& box, int width, int height,
                        double margin = 5.0) {
    for (const auto& c : cuboid_corners(box)) {
        if (camera_depth(cam, c) <= 0.1) return false;
        const Vec2 px = project_unsafe(cam, c);
        if (px.x() < margin || px.x() > width - margin || px.y() < margin ||
            px.y() > height - margin)
            return false;
    }
    return true;
}

inline int visible_joint_count(const Camera& cam, const JointArray& joints, int width, int height) {
    int n = 0;
    for (const auto& j : joints) {
        if (camera_depth(cam, j) <= 0.1) continue;
        const Vec2 px = project_unsafe(cam, j);
        if (px.x() >= 0 && px.x() <= width && px.y() >= 0 && px.y() <= height) ++n;
    }
    return n;
}

struct HoiTarget {
    const HoiPrior* prior = nullptr;
    int object_id = -1;
};

/// Physics + HOI objective for one human placement; the rest of the scene is
/// fixed. Target pairs are HOI-exempt; other collisions are weighted hard so
/// feasible minima are collision-free.
inline double human_placement_energy(const ParseGraph& pg, const HumanPose& pose,
                                     const std::vector<HoiTarget>& targets,
                                     const EnergyParams& params) {
    double e = 0.0;
    const Cuboid proxy = human_hull_volume_proxy(pose, params.proxy_margin);
    e += 100.0 * out_of_room_volume(pg, proxy);
    for (const auto& o : pg.objects) {
        bool exempt = false;
        for (const auto& t : targets) exempt = exempt || t.object_id == o.id;
        if (exempt) continue;
        e += 100.0 * intersection_volume(proxy, o.box);
    }
    e += std::abs(pose_bottom_z(pose) - pg.layout.bottom_z());  // feet-to-floor
    for (const auto& t : targets)
        e += hoi_nll(*t.prior, pose, pg.find_object(t.object_id)->box);
    return e;
}

/// Splits a composite action entry like "use-laptop+sit-at" into sub-actions.
inline std::vector<std::string> split_actions(const std::string& entry) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= entry.size()) {
        const size_t plus = entry.find('+', start);
        if (plus == std::string::npos) {
            out.push_back(entry.substr(start));
            break;
        }
        out.push_back(entry.substr(start, plus - start));
        start = plus + 1;
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scene generation

struct GeneratedScene {
    ParseGraph gt;
    Observations obs;
    std::vector<AugmentedHuman> augmented;  // the 6-tuples behind gt.humans
};

/// Renders observations from a ground-truth graph: detection boxes are the
/// bounding rectangles of the projected corner hulls, skeletons the projected
/// joints, both under the noise model. Detection indices are recorded on the
/// graph nodes (a missed object keeps detection = -1).
inline Observations render_observations(ParseGraph& pg, int width, int height,
                                        const NoiseModel& noise, Rng& rng) {
    Observations obs;
    obs.camera = pg.camera;
    obs.width = width;
    obs.height = height;
    obs.layout_hint = pg.layout;

    for (auto& o : pg.objects) {
        o.detection = -1;
        if (noise.miss_prob > 0.0 && rng.coin(noise.miss_prob)) continue;
        std::vector<Vec2> projected;
        for (const auto& c : cuboid_corners(o.box))
            if (auto px = try_project(pg.camera, c)) projected.push_back(*px);
        if (projected.size() < 3) continue;
        Rect2D box = bounding_rect(projected);
        if (noise.box_jitter_px > 0.0) {
            box.lo += Vec2(rng.normal() * noise.box_jitter_px, rng.normal() * noise.box_jitter_px);
            box.hi += Vec2(rng.normal() * noise.box_jitter_px, rng.normal() * noise.box_jitter_px);
        }
        o.detection = static_cast<int>(obs.det_boxes.size());
        obs.det_boxes.push_back({o.box.class_label, box, 1.0});
    }

    for (auto& h : pg.humans) {
        DetectedPose det;
        for (int i = 0; i < kNumJoints; ++i) {
            const Vec3& j = h.pose.joints[static_cast<size_t>(i)];
            if (camera_depth(pg.camera, j) <= 0.0) {
                det.visible[static_cast<size_t>(i)] = false;
                det.joints[static_cast<size_t>(i)] = Vec2::Zero();
                continue;
            }
            Vec2 px = project_unsafe(pg.camera, j);
            if (noise.joint_jitter_px > 0.0)
                px += Vec2(rng.normal() * noise.joint_jitter_px,
                           rng.normal() * noise.joint_jitter_px);
            det.joints[static_cast<size_t>(i)] = px;
            det.visible[static_cast<size_t>(i)] =
                px.x() >= 0 && px.x() <= width && px.y() >= 0 && px.y() <= height;
        }
        for (const auto& a : h.pose.actions) det.actions.push_back({a, 1.0});
        h.detection = static_cast<int>(obs.det_poses.size());
        obs.det_poses.push_back(std::move(det));
    }

    clamp_observations(obs);
    return obs;
}

/// Generates a ground-truth scene and its observations. Objects are placed
/// collision-free on their preferred supporters; each requested action poses
/// a template human by minimizing physics + HOI energy over (t, r, s) with a
/// coarse grid then coordinate descent. Throws GenerationError when the spec
/// cannot be realized within the retry budget.
inline GeneratedScene generate_scene(const SceneSpec& spec, const HoiPriorSet& priors, Rng& rng) {
    const EnergyParams params;
    GeneratedScene out;
    ParseGraph& pg = out.gt;

    pg.layout.center = Vec3(0, 0, 0);
    pg.layout.size = Vec3(spec.room_x.sample(rng), spec.room_y.sample(rng), spec.room_z.sample(rng));
    pg.layout.center.z() = 0.5 * pg.layout.size.z();  // floor at z = 0
    pg.layout.yaw = 0.0;
    pg.layout.class_label = "room";

    const double rx = pg.layout.size.x(), ry = pg.layout.size.y();
    pg.camera = look_at_camera(
        spec.focal, spec.width / 2.0, spec.height / 2.0,
        Vec3(-rx / 2 + 0.05, rng.uniform(-ry / 6, ry / 6), spec.camera_height.sample(rng)),
        Vec3(rx / 4, 0.0, 1.0));

    int next_id = 0;
    for (const auto& item : spec.inventory) {
        for (int k = 0; k < item.count; ++k) {
            Vec3 size(rng.uniform(item.size_lo.x(), item.size_hi.x()),
                      rng.uniform(item.size_lo.y(), item.size_hi.y()),
                      rng.uniform(item.size_lo.z(), item.size_hi.z()));
            bool placed = false;
            for (int attempt = 0; attempt < spec.max_retries && !placed; ++attempt) {
                Cuboid box;
                box.size = size;
                box.class_label = item.class_label;
                box.is_container = false;
                int supporter = kFloorId;

                if (item.place_on != "floor") {
                    std::vector<const ObjectNode*> hosts;
                    for (const auto& o : pg.objects)
                        if (o.box.class_label == item.place_on) hosts.push_back(&o);
                    if (!hosts.empty()) {
                        const ObjectNode* host =
                            hosts[static_cast<size_t>(rng.pick(static_cast<int>(hosts.size())))];
                        const double half_diag = 0.5 * std::hypot(size.x(), size.y());
                        const double mx = 0.5 * host->box.size.x() - half_diag;
                        const double my = 0.5 * host->box.size.y() - half_diag;
                        if (mx <= 0 || my <= 0) continue;  // does not fit on host
                        const Vec3 local(rng.uniform(-mx, mx), rng.uniform(-my, my), 0.0);
                        box.center = host->box.center + rot_z(host->box.yaw) * local;
                        box.center.z() = host->box.top_z() + 0.5 * size.z();
                        box.yaw = rng.uniform(-kPi, kPi);
                        supporter = host->id;
                    }
                }
                if (supporter == kFloorId) {
                    const double half_diag = 0.5 * std::hypot(size.x(), size.y());
                    const double mx = 0.5 * rx - half_diag - 0.05;
                    const double my = 0.5 * ry - half_diag - 0.05;
                    if (mx <= 0 || my <= 0) break;  // object cannot fit in the room
                    box.center = Vec3(rng.uniform(-mx, mx), rng.uniform(-my, my),
                                      pg.layout.bottom_z() + 0.5 * size.z());
                    box.yaw = rng.uniform(-kPi, kPi);
                }

                if (!detail::inside_room(pg, box)) continue;
                if (detail::collides_with_objects(pg, box, supporter, 0.03)) continue;
                if (!detail::box_visible(pg.camera, box, spec.width, spec.height)) continue;

                ObjectNode node;
                node.id = next_id++;
                node.box = box;
                pg.objects.push_back(node);
                pg.support_edges.push_back({node.id, supporter});
                placed = true;
            }
            if (!placed)
                throw GenerationError("could not place object of class " + item.class_label);
        }
    }

    for (const auto& action_entry : spec.actions) {
        const std::vector<std::string> actions = detail::split_actions(action_entry);
        const std::string& primary = actions.front();
        const JointArray& tmpl = template_for_action(primary);
        const double min_rel_z = [&] {
            double m = 1e300;
            for (const auto& j : tmpl) m = std::min(m, j.z());
            return m;
        }();

        // One HOI target per sub-action that has a prior and an admissible
        // object in the scene (first by id).
        std::vector<detail::HoiTarget> targets;
        for (const auto& a : actions) {
            if (!priors.has(a)) continue;
            const HoiPrior& prior = priors.at(a);
            for (const auto& o : pg.objects)
                if (prior.object_classes.count(o.box.class_label) > 0) {
                    targets.push_back({&prior, o.id});
                    break;
                }
        }

        // Placement energy over (tx, ty, yaw, scale); height pins the ankles
        // to the floor.
        auto posed = [&](double tx, double ty, double yaw, double s) {
            const double tz = pg.layout.bottom_z() - s * min_rel_z;
            return pose_from_params(Vec3(tx, ty, tz), s, tmpl, yaw, actions);
        };
        auto energy_at = [&](double tx, double ty, double yaw, double s) {
            return detail::human_placement_energy(pg, posed(tx, ty, yaw, s), targets, params);
        };

        double best_e = std::numeric_limits<double>::infinity();
        double bx = 0, by = 0, byaw = 0, bs = 1.0;
        bool found = false;
        const detail::HoiTarget* seed_target = targets.empty() ? nullptr : &targets.front();
        const Vec3 anchor =
            seed_target != nullptr ? pg.find_object(seed_target->object_id)->box.center : Vec3::Zero();
        const double grid_span = seed_target != nullptr ? 0.5 : std::max(rx, ry) / 2;
        const double grid_step = seed_target != nullptr ? 0.1 : 0.3;
        for (double yaw = -kPi; yaw < kPi; yaw += kPi / 12) {           // 15 degree grid
            for (double s : {0.9, 1.0, 1.1}) {
                // Seed the grid at the translation that puts the key joint at
                // the prior mode for this yaw, if there is a target; scan the
                // whole floor otherwise.
                double cx = 0.0, cy = 0.0;
                if (seed_target != nullptr) {
                    const HumanPose probe = posed(0, 0, yaw, s);
                    const Vec3 key = key_joint_position(probe, seed_target->prior->key_joint);
                    const Vec3 want = anchor - rot_z(yaw) * seed_target->prior->mean;
                    cx = want.x() - key.x();
                    cy = want.y() - key.y();
                }
                for (double dx = -grid_span; dx <= grid_span; dx += grid_step) {
                    for (double dy = -grid_span; dy <= grid_span; dy += grid_step) {
                        const double tx = cx + dx, ty = cy + dy;
                        if (std::abs(tx) > rx / 2 - 0.3 || std::abs(ty) > ry / 2 - 0.3) continue;
                        if (seed_target == nullptr &&
                            detail::visible_joint_count(pg.camera, posed(tx, ty, yaw, s).joints,
                                                        spec.width, spec.height) < 12)
                            continue;
                        const double e = energy_at(tx, ty, yaw, s);
                        if (e < best_e) {
                            best_e = e;
                            bx = tx;
                            by = ty;
                            byaw = yaw;
                            bs = s;
                            found = true;
                        }
                    }
                }
            }
        }
        if (!found) throw GenerationError("no feasible human placement for action " + action_entry);

        // Coordinate descent refinement.
        double step_t = 0.05, step_r = kPi / 45, step_s = 0.05;
        for (int round = 0; round < 4; ++round) {
            bool improved = true;
            while (improved) {
                improved = false;
                const double candidates[][4] = {
                    {bx + step_t, by, byaw, bs}, {bx - step_t, by, byaw, bs},
                    {bx, by + step_t, byaw, bs}, {bx, by - step_t, byaw, bs},
                    {bx, by, byaw + step_r, bs}, {bx, by, byaw - step_r, bs},
                    {bx, by, byaw, bs + step_s}, {bx, by, byaw, bs - step_s},
                };
                for (const auto& c : candidates) {
                    if (c[3] < 0.7 || c[3] > 1.3) continue;
                    const double e = energy_at(c[0], c[1], c[2], c[3]);
                    if (e < best_e - 1e-12) {
                        best_e = e;
                        bx = c[0];
                        by = c[1];
                        byaw = c[2];
                        bs = c[3];
                        improved = true;
                    }
                }
            }
            step_t *= 0.5;
            step_r *= 0.5;
            step_s *= 0.5;
        }

        const double tz = pg.layout.bottom_z() - bs * min_rel_z;
        AugmentedHuman aug = make_augmented_human(primary, tmpl, Vec3(bx, by, tz), byaw, bs);
        HumanPose pose = pose_from_augmented(aug);
        pose.actions = actions;

        const Cuboid proxy = human_hull_volume_proxy(pose, params.proxy_margin);
        bool collides = detail::out_of_room_volume(pg, proxy) > 1e-9;
        for (const auto& o : pg.objects) {
            bool exempt = false;
            for (const auto& t : targets) exempt = exempt || t.object_id == o.id;
            if (exempt) continue;
            if (intersection_volume(proxy, o.box) > 1e-9) collides = true;
        }
        if (collides)
            throw GenerationError("human placement for action " + action_entry + " collides");
        if (detail::visible_joint_count(pg.camera, pose.joints, spec.width, spec.height) < 12)
            throw GenerationError("human for action " + action_entry + " mostly out of frame");

        HumanNode node;
        node.id = next_id++;
        node.pose = std::move(pose);
        pg.humans.push_back(node);
        pg.support_edges.push_back({node.id, kFloorId});
        for (const auto& t : targets)
            pg.hoi_edges.push_back({node.id, t.object_id, t.prior->action});
        out.augmented.push_back(std::move(aug));
    }

    out.obs = render_observations(pg, spec.width, spec.height, spec.noise, rng);
    return out;
}

/// generate_scene with whole-scene retries for the occasional infeasible
/// draw; reseeds deterministically from the base seed.
inline GeneratedScene generate_scene_retrying(const SceneSpec& spec, const HoiPriorSet& priors,
                                              uint64_t seed, int retries = 16) {
    for (int i = 0; i < retries; ++i) {
        Rng rng(seed + 7919u * static_cast<uint64_t>(i));
        try {
            return generate_scene(spec, priors, rng);
        } catch (const GenerationError&) {
            if (i + 1 == retries) throw;
        }
    }
    throw GenerationError("unreachable");
}

// ---------------------------------------------------------------------------
// Perturbation

struct PerturbNoise {
    double sigma_trans = 0.0;        // object centers, isotropic
    double sigma_depth = 0.0;        // extra component along the camera ray
    double sigma_yaw = 0.0;          // radians
    double sigma_size = 0.0;         // log-normal factor on extents
    double sigma_human_trans = 0.0;
    double sigma_human_yaw = 0.0;
    double sigma_human_scale = 0.0;  // log-normal factor
    bool perturb_layout = false;
    double sigma_layout = 0.0;
};

/// Degrades a graph into a realistic initialization. Camera is never touched;
/// the layout only when asked.
inline ParseGraph perturb(const ParseGraph& pg, const PerturbNoise& noise, Rng& rng) {
    ParseGraph out = pg;
    for (auto& o : out.objects) {
        o.box.center += rng.normal3(noise.sigma_trans);
        if (noise.sigma_depth > 0.0) {
            const Vec3 d = (o.box.center - out.camera.position).normalized();
            o.box.center += d * rng.normal(0.0, noise.sigma_depth);
        }
        o.box.yaw = normalize_angle(o.box.yaw + rng.normal(0.0, noise.sigma_yaw));
        if (noise.sigma_size > 0.0)
            for (int a = 0; a < 3; ++a) o.box.size[a] *= std::exp(rng.normal(0.0, noise.sigma_size));
    }
    for (auto& h : out.humans) {
        const Vec3 shift = rng.normal3(noise.sigma_human_trans);
        const double dyaw = rng.normal(0.0, noise.sigma_human_yaw);
        double scale = h.pose.scale;
        if (noise.sigma_human_scale > 0.0) scale *= std::exp(rng.normal(0.0, noise.sigma_human_scale));
        h.pose = pose_from_params(h.pose.center + shift, scale, h.pose.rel_joints,
                                  normalize_angle(h.pose.yaw + dyaw), h.pose.actions);
    }
    if (noise.perturb_layout) {
        out.layout.center += rng.normal3(noise.sigma_layout);
        for (int a = 0; a < 3; ++a) out.layout.size[a] *= std::exp(rng.normal(0.0, 0.5 * noise.sigma_layout));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
    double iou3d_pct = 0.0;        // mean over GT objects, unmatched scoring 0
    double iou2d_pct = 0.0;        // mean over matched pairs
    double depth_err_m = 0.0;      // camera-to-center distance error, matched pairs
    double pose_err3d_m = 0.0;     // mean per-joint Euclidean, humans matched by id
    double pose_err2d_px = 0.0;
    double phys_violation_m = 0.0; // mean supported-bottom-to-supporter-top gap
    double miss_recovery_pct = 0.0;
    int n_gt_objects = 0;
    int n_matched = 0;
    int n_missed_interacting = 0;
    int n_recovered = 0;
};

inline double iou_3d(const Cuboid& a, const Cuboid& b) {
    const double inter = intersection_volume(a, b);
    const double uni = a.volume() + b.volume() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

namespace detail {

inline std::optional<Rect2D> projected_bbox(const Camera& cam, const Cuboid& box) {
    std::vector<Vec2> pts;
    for (const auto& c : cuboid_corners(box))
        if (auto px = try_project(cam, c)) pts.push_back(*px);
    if (pts.size() < 3) return std::nullopt;
    return bounding_rect(pts);
}

}  // namespace detail

/// Greedy class-aware matching by 3D IoU, then the full metric set.
/// Physical violation is measured on the estimated graph's support edges.
inline Metrics evaluate(const ParseGraph& pg_est, const ParseGraph& pg_gt,
                        const Observations& obs) {
    if (pg_gt.objects.empty() && pg_gt.humans.empty())
        throw UndefinedMetricsError("ground truth has no nodes to evaluate");

    Metrics m;
    m.n_gt_objects = static_cast<int>(pg_gt.objects.size());

    // Greedy matching on descending IoU among same-class pairs.
    struct Pair {
        double iou;
        size_t gi, ei;
    };
    std::vector<Pair> pairs;
    for (size_t gi = 0; gi < pg_gt.objects.size(); ++gi)
        for (size_t ei = 0; ei < pg_est.objects.size(); ++ei) {
            if (pg_gt.objects[gi].box.class_label != pg_est.objects[ei].box.class_label) continue;
            const double v = iou_3d(pg_gt.objects[gi].box, pg_est.objects[ei].box);
            if (v > 0.0) pairs.push_back({v, gi, ei});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.gi != b.gi) return a.gi < b.gi;
        return a.ei < b.ei;
    });
    std::vector<int> gt_match(pg_gt.objects.size(), -1);
    std::vector<bool> est_used(pg_est.objects.size(), false);
    for (const auto& p : pairs) {
        if (gt_match[p.gi] >= 0 || est_used[p.ei]) continue;
        gt_match[p.gi] = static_cast<int>(p.ei);
        est_used[p.ei] = true;
    }

    double iou3d_sum = 0.0, iou2d_sum = 0.0, depth_sum = 0.0;
    int matched = 0, matched2d = 0;
    for (size_t gi = 0; gi < pg_gt.objects.size(); ++gi) {
        if (gt_match[gi] < 0) continue;
        const Cuboid& g = pg_gt.objects[gi].box;
        const Cuboid& e = pg_est.objects[static_cast<size_t>(gt_match[gi])].box;
        iou3d_sum += iou_3d(g, e);
        ++matched;
        const auto bg = detail::projected_bbox(obs.camera, g);
        const auto be = detail::projected_bbox(obs.camera, e);
        if (bg && be) {
            iou2d_sum += iou_2d(*be, *bg);
            ++matched2d;
        }
        depth_sum += std::abs((e.center - obs.camera.position).norm() -
                              (g.center - obs.camera.position).norm());
    }
    m.n_matched = matched;
    m.iou3d_pct = pg_gt.objects.empty()
                      ? 0.0
                      : 100.0 * iou3d_sum / static_cast<double>(pg_gt.objects.size());
    m.iou2d_pct = matched2d > 0 ? 100.0 * iou2d_sum / matched2d : 0.0;
    m.depth_err_m = matched > 0 ? depth_sum / matched : 0.0;

    double pe3 = 0.0, pe2 = 0.0;
    int joints3 = 0, joints2 = 0;
    for (size_t gi = 0; gi < pg_gt.humans.size(); ++gi) {
        const HumanNode& gh = pg_gt.humans[gi];
        // Match by id when the estimate kept ground-truth ids, by list
        // position otherwise (pipeline inits renumber nodes).
        const HumanNode* eh = pg_est.find_human(gh.id);
        if (eh == nullptr && gi < pg_est.humans.size()) eh = &pg_est.humans[gi];
        if (eh == nullptr) continue;
        for (int j = 0; j < kNumJoints; ++j) {
            const Vec3& a = gh.pose.joints[static_cast<size_t>(j)];
            const Vec3& b = eh->pose.joints[static_cast<size_t>(j)];
            pe3 += (a - b).norm();
            ++joints3;
            const auto pa = try_project(obs.camera, a);
            const auto pb = try_project(obs.camera, b);
            if (pa && pb) {
                pe2 += (*pa - *pb).norm();
                ++joints2;
            }
        }
    }
    m.pose_err3d_m = joints3 > 0 ? pe3 / joints3 : 0.0;
    m.pose_err2d_px = joints2 > 0 ? pe2 / joints2 : 0.0;

    double viol = 0.0;
    int edges = 0;
    for (const auto& e : pg_est.support_edges) {
        try {
            viol += std::abs(detail::supported_bottom_z(pg_est, e.supported) -
                             detail::supporter_top_z(pg_est, e.supporter));
            ++edges;
        } catch (const DanglingEdgeError&) {
        }
    }
    m.phys_violation_m = edges > 0 ? viol / edges : 0.0;

    // Miss-detection recovery: GT interacting objects with no detection,
    // recovered when a synthesized estimate of the same class overlaps.
    std::set<int> interacting;
    for (const auto& e : pg_gt.hoi_edges) interacting.insert(e.object);
    for (int gid : interacting) {
        const ObjectNode* g = pg_gt.find_object(gid);
        if (g == nullptr || g->detection >= 0) continue;
        ++m.n_missed_interacting;
        for (const auto& eo : pg_est.objects) {
            if (!eo.synthesized || eo.box.class_label != g->box.class_label) continue;
            if (iou_3d(eo.box, g->box) > 0.1) {
                ++m.n_recovered;
                break;
            }
        }
    }
    m.miss_recovery_pct = m.n_missed_interacting > 0
                              ? 100.0 * m.n_recovered / m.n_missed_interacting
                              : 100.0;
    return m;
}

}  // namespace scenemc
