#pragma once

// JSON file formats: scene/v1 (parse graphs), obs/v1 (observations),
// hoi-prior/v1, metrics/v1, scene-spec/v1 and hoi-samples/v1, plus the
// line-delimited inference trace. Numbers are rounded to 9 significant
// digits before serialization so repeated runs produce identical bytes.

#include "scenemc/hoi.hpp"
#include "scenemc/inference.hpp"
#include "scenemc/scene.hpp"
#include "scenemc/synthetic.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace scenemc {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Number formatting

/// Rounds to 9 significant decimal digits (the serialization contract).
inline double round_sig(double v) {
    if (!std::isfinite(v)) return v;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::strtod(buf, nullptr);
}

inline Json jnum(double v) { return Json(round_sig(v)); }

inline Json jvec3(const Vec3& v) { return Json::array({jnum(v.x()), jnum(v.y()), jnum(v.z())}); }

inline Json jvec2(const Vec2& v) { return Json::array({jnum(v.x()), jnum(v.y())}); }

inline Json jmat3(const Mat3& m) {
    Json rows = Json::array();
    for (int r = 0; r < 3; ++r)
        rows.push_back(Json::array({jnum(m(r, 0)), jnum(m(r, 1)), jnum(m(r, 2))}));
    return rows;
}

inline Vec3 parse_vec3(const Json& j) {
    if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Vec2 parse_vec2(const Json& j) {
    if (!j.is_array() || j.size() != 2) throw SchemaError("expected a 2-vector");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Mat3 parse_mat3(const Json& j) {
    if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3x3 matrix");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        if (!j[static_cast<size_t>(r)].is_array() || j[static_cast<size_t>(r)].size() != 3)
            throw SchemaError("expected a 3x3 matrix");
        for (int c = 0; c < 3; ++c)
            m(r, c) = j[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
    }
    return m;
}

namespace detail {

inline void require_schema(const Json& j, const std::string& tag) {
    if (!j.is_object() || !j.contains("$schema") || j["$schema"] != tag)
        throw SchemaError("missing or wrong $schema tag, expected " + tag);
}

template <typename T>
T field(const Json& j, const char* key) {
    if (!j.contains(key)) throw SchemaError(std::string("missing field: ") + key);
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw SchemaError(std::string("wrong type for field: ") + key);
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cuboid / camera / pose

inline Json to_json(const Cuboid& c) {
    return Json{{"center", jvec3(c.center)},
                {"size", jvec3(c.size)},
                {"yaw", jnum(c.yaw)},
                {"class", c.class_label},
                {"is_container", c.is_container}};
}

inline Cuboid cuboid_from_json(const Json& j) {
    Cuboid c;
    c.center = parse_vec3(j.at("center"));
    c.size = parse_vec3(j.at("size"));
    c.yaw = detail::field<double>(j, "yaw");
    c.class_label = detail::field<std::string>(j, "class");
    c.is_container = j.value("is_container", false);
    return c;
}

inline Json to_json(const Camera& cam) {
    return Json{{"intrinsics", jmat3(cam.intrinsics)},
                {"rotation", jmat3(cam.rotation)},
                {"position", jvec3(cam.position)}};
}

inline Camera camera_from_json(const Json& j) {
    Camera cam;
    cam.intrinsics = parse_mat3(j.at("intrinsics"));
    cam.rotation = parse_mat3(j.at("rotation"));
    cam.position = parse_vec3(j.at("position"));
    return cam;
}

inline Json joints_to_json(const JointArray& joints) {
    Json arr = Json::array();
    for (const auto& v : joints) arr.push_back(jvec3(v));
    return arr;
}

inline JointArray joints_from_json(const Json& j) {
    if (!j.is_array() || j.size() != kNumJoints)
        throw SchemaError("expected 17 joints");
    JointArray a;
    for (int i = 0; i < kNumJoints; ++i) a[static_cast<size_t>(i)] = parse_vec3(j[static_cast<size_t>(i)]);
    return a;
}

// ---------------------------------------------------------------------------
// scene/v1

inline Json scene_to_json(const ParseGraph& pg) {
    Json j;
    j["$schema"] = "scene/v1";
    j["layout"] = to_json(pg.layout);
    j["camera"] = to_json(pg.camera);
    Json objects = Json::array();
    for (const auto& o : pg.objects) {
        Json node = to_json(o.box);
        node["id"] = o.id;
        node["detection"] = o.detection;
        node["synthesized"] = o.synthesized;
        objects.push_back(std::move(node));
    }
    j["objects"] = std::move(objects);
    Json humans = Json::array();
    for (const auto& h : pg.humans) {
        Json node;
        node["id"] = h.id;
        node["detection"] = h.detection;
        node["center"] = jvec3(h.pose.center);
        node["scale"] = jnum(h.pose.scale);
        node["yaw"] = jnum(h.pose.yaw);
        node["rel_joints"] = joints_to_json(h.pose.rel_joints);
        node["actions"] = h.pose.actions;
        humans.push_back(std::move(node));
    }
    j["humans"] = std::move(humans);
    Json support = Json::array();
    for (const auto& e : pg.support_edges) support.push_back(Json::array({e.supported, e.supporter}));
    j["support_edges"] = std::move(support);
    Json hoi = Json::array();
    for (const auto& e : pg.hoi_edges)
        hoi.push_back(Json{{"human", e.human}, {"object", e.object}, {"action", e.action}});
    j["hoi_edges"] = std::move(hoi);
    return j;
}

inline ParseGraph scene_from_json(const Json& j) {
    detail::require_schema(j, "scene/v1");
    ParseGraph pg;
    pg.layout = cuboid_from_json(j.at("layout"));
    pg.camera = camera_from_json(j.at("camera"));
    for (const auto& node : j.at("objects")) {
        ObjectNode o;
        o.box = cuboid_from_json(node);
        o.id = detail::field<int>(node, "id");
        o.detection = node.value("detection", -1);
        o.synthesized = node.value("synthesized", false);
        pg.objects.push_back(std::move(o));
    }
    for (const auto& node : j.at("humans")) {
        HumanNode h;
        h.id = detail::field<int>(node, "id");
        h.detection = node.value("detection", -1);
        const Vec3 center = parse_vec3(node.at("center"));
        const double scale = detail::field<double>(node, "scale");
        const double yaw = detail::field<double>(node, "yaw");
        const JointArray rel = joints_from_json(node.at("rel_joints"));
        std::vector<std::string> actions = detail::field<std::vector<std::string>>(node, "actions");
        if (!(scale > 0.0)) throw SchemaError("human scale must be positive");
        h.pose = pose_from_params(center, scale, rel, yaw, std::move(actions));
        pg.humans.push_back(std::move(h));
    }
    for (const auto& e : j.at("support_edges")) {
        if (!e.is_array() || e.size() != 2) throw SchemaError("support edge must be [supported, supporter]");
        pg.support_edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    for (const auto& e : j.at("hoi_edges"))
        pg.hoi_edges.push_back({detail::field<int>(e, "human"), detail::field<int>(e, "object"),
                                detail::field<std::string>(e, "action")});
    return pg;
}

// ---------------------------------------------------------------------------
// obs/v1

inline Json obs_to_json(const Observations& obs) {
    Json j;
    j["$schema"] = "obs/v1";
    j["camera"] = to_json(obs.camera);
    j["image_size"] = Json::array({obs.width, obs.height});
    if (obs.layout_hint.has_value()) j["layout_hint"] = to_json(*obs.layout_hint);
    Json boxes = Json::array();
    for (const auto& d : obs.det_boxes) {
        boxes.push_back(Json{{"class", d.class_label},
                             {"box", Json::array({jnum(d.box.lo.x()), jnum(d.box.lo.y()),
                                                  jnum(d.box.hi.x()), jnum(d.box.hi.y())})},
                             {"confidence", jnum(d.confidence)}});
    }
    j["det_boxes"] = std::move(boxes);
    Json poses = Json::array();
    for (const auto& p : obs.det_poses) {
        Json joints = Json::array();
        Json visible = Json::array();
        for (int i = 0; i < kNumJoints; ++i) {
            joints.push_back(jvec2(p.joints[static_cast<size_t>(i)]));
            visible.push_back(p.visible[static_cast<size_t>(i)]);
        }
        Json actions = Json::array();
        for (const auto& a : p.actions)
            actions.push_back(Json{{"label", a.label}, {"confidence", jnum(a.confidence)}});
        poses.push_back(Json{{"joints", std::move(joints)},
                             {"visible", std::move(visible)},
                             {"actions", std::move(actions)}});
    }
    j["det_poses"] = std::move(poses);
    return j;
}

inline Observations obs_from_json(const Json& j) {
    detail::require_schema(j, "obs/v1");
    Observations obs;
    obs.camera = camera_from_json(j.at("camera"));
    const Json& size = j.at("image_size");
    if (!size.is_array() || size.size() != 2) throw SchemaError("image_size must be [w, h]");
    obs.width = size[0].get<int>();
    obs.height = size[1].get<int>();
    if (obs.width <= 0 || obs.height <= 0) throw SchemaError("image_size must be positive");
    if (j.contains("layout_hint")) obs.layout_hint = cuboid_from_json(j.at("layout_hint"));
    for (const auto& d : j.at("det_boxes")) {
        DetectedBox box;
        box.class_label = detail::field<std::string>(d, "class");
        const Json& b = d.at("box");
        if (!b.is_array() || b.size() != 4) throw SchemaError("det box must be [x0,y0,x1,y1]");
        box.box.lo = Vec2(b[0].get<double>(), b[1].get<double>());
        box.box.hi = Vec2(b[2].get<double>(), b[3].get<double>());
        box.confidence = d.value("confidence", 1.0);
        obs.det_boxes.push_back(std::move(box));
    }
    for (const auto& p : j.at("det_poses")) {
        DetectedPose pose;
        const Json& joints = p.at("joints");
        const Json& visible = p.at("visible");
        if (joints.size() != kNumJoints || visible.size() != kNumJoints)
            throw SchemaError("det pose must carry 17 joints and 17 visibility flags");
        for (int i = 0; i < kNumJoints; ++i) {
            pose.joints[static_cast<size_t>(i)] = parse_vec2(joints[static_cast<size_t>(i)]);
            pose.visible[static_cast<size_t>(i)] = visible[static_cast<size_t>(i)].get<bool>();
        }
        for (const auto& a : p.at("actions"))
            pose.actions.push_back({detail::field<std::string>(a, "label"), a.value("confidence", 1.0)});
        obs.det_poses.push_back(std::move(pose));
    }
    clamp_observations(obs);
    return obs;
}

// ---------------------------------------------------------------------------
// hoi-prior/v1 and hoi-samples/v1

inline Json priors_to_json(const HoiPriorSet& set) {
    Json j;
    j["$schema"] = "hoi-prior/v1";
    Json priors = Json::array();
    for (const auto& [action, p] : set.priors) {
        priors.push_back(Json{{"action", action},
                              {"object_classes", std::vector<std::string>(p.object_classes.begin(),
                                                                          p.object_classes.end())},
                              {"key_joint", p.key_joint},
                              {"mean", jvec3(p.mean)},
                              {"covariance", jmat3(p.covariance)}});
    }
    j["priors"] = std::move(priors);
    return j;
}

inline HoiPriorSet priors_from_json(const Json& j) {
    detail::require_schema(j, "hoi-prior/v1");
    HoiPriorSet set;
    for (const auto& pj : j.at("priors")) {
        HoiPrior p;
        p.action = detail::field<std::string>(pj, "action");
        const auto classes = detail::field<std::vector<std::string>>(pj, "object_classes");
        p.object_classes.insert(classes.begin(), classes.end());
        p.key_joint = detail::field<std::string>(pj, "key_joint");
        if (p.key_joint != "wrists_mid") joint_index(p.key_joint);  // validates the name
        p.mean = parse_vec3(pj.at("mean"));
        p.covariance = parse_mat3(pj.at("covariance"));
        validate_prior(p);
        if (set.priors.count(p.action)) throw SchemaError("duplicate prior for action " + p.action);
        set.priors[p.action] = std::move(p);
    }
    return set;
}

struct HoiSample {
    std::string action;
    Vec3 offset;
};

inline Json samples_to_json(const std::vector<HoiSample>& samples) {
    Json j;
    j["$schema"] = "hoi-samples/v1";
    Json arr = Json::array();
    for (const auto& s : samples)
        arr.push_back(Json{{"action", s.action}, {"offset", jvec3(s.offset)}});
    j["samples"] = std::move(arr);
    return j;
}

inline std::vector<HoiSample> samples_from_json(const Json& j) {
    detail::require_schema(j, "hoi-samples/v1");
    std::vector<HoiSample> out;
    for (const auto& s : j.at("samples"))
        out.push_back({detail::field<std::string>(s, "action"), parse_vec3(s.at("offset"))});
    return out;
}

// ---------------------------------------------------------------------------
// metrics/v1

inline Json metrics_to_json(const Metrics& m) {
    return Json{{"$schema", "metrics/v1"},
                {"iou3d_pct", jnum(m.iou3d_pct)},
                {"iou2d_pct", jnum(m.iou2d_pct)},
                {"depth_err_m", jnum(m.depth_err_m)},
                {"pose_err3d_m", jnum(m.pose_err3d_m)},
                {"pose_err2d_px", jnum(m.pose_err2d_px)},
                {"phys_violation_m", jnum(m.phys_violation_m)},
                {"miss_recovery_pct", jnum(m.miss_recovery_pct)},
                {"n_gt_objects", m.n_gt_objects},
                {"n_matched", m.n_matched},
                {"n_missed_interacting", m.n_missed_interacting},
                {"n_recovered", m.n_recovered}};
}

inline std::string metrics_csv_header() {
    return "scene,iou3d_pct,iou2d_pct,depth_err_m,pose_err3d_m,pose_err2d_px,"
           "phys_violation_m,miss_recovery_pct";
}

inline std::string metrics_csv_row(const std::string& scene, const Metrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", scene.c_str(),
                  round_sig(m.iou3d_pct), round_sig(m.iou2d_pct), round_sig(m.depth_err_m),
                  round_sig(m.pose_err3d_m), round_sig(m.pose_err2d_px),
                  round_sig(m.phys_violation_m), round_sig(m.miss_recovery_pct));
    return buf;
}

// ---------------------------------------------------------------------------
// scene-spec/v1

inline Json spec_to_json(const SceneSpec& s) {
    Json inv = Json::array();
    for (const auto& item : s.inventory)
        inv.push_back(Json{{"class", item.class_label},
                           {"count", item.count},
                           {"size_lo", jvec3(item.size_lo)},
                           {"size_hi", jvec3(item.size_hi)},
                           {"place_on", item.place_on}});
    return Json{{"$schema", "scene-spec/v1"},
                {"room_x", Json::array({jnum(s.room_x.lo), jnum(s.room_x.hi)})},
                {"room_y", Json::array({jnum(s.room_y.lo), jnum(s.room_y.hi)})},
                {"room_z", Json::array({jnum(s.room_z.lo), jnum(s.room_z.hi)})},
                {"inventory", std::move(inv)},
                {"actions", s.actions},
                {"noise", Json{{"box_jitter_px", jnum(s.noise.box_jitter_px)},
                               {"joint_jitter_px", jnum(s.noise.joint_jitter_px)},
                               {"miss_prob", jnum(s.noise.miss_prob)}}},
                {"camera_height", Json::array({jnum(s.camera_height.lo), jnum(s.camera_height.hi)})},
                {"focal", jnum(s.focal)},
                {"image_size", Json::array({s.width, s.height})},
                {"seed", s.seed},
                {"max_retries", s.max_retries}};
}

inline Range range_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2) throw SchemaError("range must be [lo, hi]");
    Range r{j[0].get<double>(), j[1].get<double>()};
    if (r.hi < r.lo) throw SchemaError("range must satisfy lo <= hi");
    return r;
}

inline SceneSpec spec_from_json(const Json& j) {
    detail::require_schema(j, "scene-spec/v1");
    SceneSpec s;
    s.room_x = range_from_json(j.at("room_x"));
    s.room_y = range_from_json(j.at("room_y"));
    s.room_z = range_from_json(j.at("room_z"));
    s.inventory.clear();
    for (const auto& item : j.at("inventory")) {
        InventoryItem it;
        it.class_label = detail::field<std::string>(item, "class");
        it.count = item.value("count", 1);
        it.size_lo = parse_vec3(item.at("size_lo"));
        it.size_hi = parse_vec3(item.at("size_hi"));
        it.place_on = item.value("place_on", std::string("floor"));
        if (it.count < 0) throw SchemaError("inventory count must be >= 0");
        s.inventory.push_back(std::move(it));
    }
    s.actions = detail::field<std::vector<std::string>>(j, "actions");
    if (j.contains("noise")) {
        const Json& n = j.at("noise");
        s.noise.box_jitter_px = n.value("box_jitter_px", 0.0);
        s.noise.joint_jitter_px = n.value("joint_jitter_px", 0.0);
        s.noise.miss_prob = n.value("miss_prob", 0.0);
        if (s.noise.miss_prob < 0.0 || s.noise.miss_prob > 1.0)
            throw SchemaError("miss_prob must be in [0,1]");
    }
    if (j.contains("camera_height")) s.camera_height = range_from_json(j.at("camera_height"));
    s.focal = j.value("focal", 600.0);
    if (j.contains("image_size")) {
        const Json& sz = j.at("image_size");
        s.width = sz[0].get<int>();
        s.height = sz[1].get<int>();
    }
    s.seed = j.value("seed", static_cast<uint64_t>(0));
    s.max_retries = j.value("max_retries", 200);
    return s;
}

// ---------------------------------------------------------------------------
// Trace

inline std::string trace_to_jsonl(const std::vector<TraceRecord>& trace) {
    std::ostringstream out;
    for (const auto& r : trace) {
        Json j{{"iter", r.iteration},     {"phase", r.phase},
               {"accepted", r.accepted},  {"T", jnum(r.temperature)},
               {"e_support", jnum(r.e_support)},
               {"e_collision", jnum(r.e_collision)},
               {"e_hoi", jnum(r.e_hoi)},
               {"e_lik_obj", jnum(r.e_lik_obj)},
               {"e_lik_pose", jnum(r.e_lik_pose)},
               {"total", jnum(r.total)},
               {"best", jnum(r.best)}};
        out << j.dump() << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// File helpers

inline Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw SchemaError("JSON parse error in " + path + ": " + e.what());
    }
    return j;
}

inline void save_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << text;
}

inline void save_json(const std::string& path, const Json& j) {
    save_text(path, j.dump(2) + "\n");
}

}  // namespace scenemc
