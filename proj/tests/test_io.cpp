#include "scenemc/io.hpp"

#include "scenemc/config.hpp"
#include "scenemc/render.hpp"
#include "oracles.hpp"

#include <catch2/catch.hpp>

using namespace scenemc;

namespace {

GeneratedScene sample_scene(uint64_t seed) {
    static const HoiPriorSet priors = default_hoi_priors();
    SceneSpec spec = default_scene_spec();
    spec.inventory.push_back({"bottle", 1, {0.08, 0.08, 0.25}, {0.08, 0.08, 0.25}, "floor"});
    return generate_scene_retrying(spec, priors, seed);
}

bool same_graph(const ParseGraph& a, const ParseGraph& b) {
    if (a.objects.size() != b.objects.size() || a.humans.size() != b.humans.size()) return false;
    if ((a.layout.center - b.layout.center).norm() > 1e-8) return false;
    for (size_t i = 0; i < a.objects.size(); ++i) {
        if (a.objects[i].id != b.objects[i].id) return false;
        if (a.objects[i].detection != b.objects[i].detection) return false;
        if (a.objects[i].synthesized != b.objects[i].synthesized) return false;
        if ((a.objects[i].box.center - b.objects[i].box.center).norm() > 1e-7) return false;
        if ((a.objects[i].box.size - b.objects[i].box.size).norm() > 1e-7) return false;
        if (a.objects[i].box.class_label != b.objects[i].box.class_label) return false;
    }
    for (size_t i = 0; i < a.humans.size(); ++i) {
        for (int j = 0; j < kNumJoints; ++j)
            if ((a.humans[i].pose.joints[static_cast<size_t>(j)] -
                 b.humans[i].pose.joints[static_cast<size_t>(j)]).norm() > 1e-6)
                return false;
        if (a.humans[i].pose.actions != b.humans[i].pose.actions) return false;
    }
    return a.support_edges.size() == b.support_edges.size() &&
           a.hoi_edges.size() == b.hoi_edges.size();
}

}  // namespace

TEST_CASE("round_sig keeps nine significant digits and is idempotent") {
    REQUIRE(round_sig(1.0 / 3.0) == Approx(0.333333333).margin(1e-12));
    REQUIRE(round_sig(0.123456789123) == Approx(0.123456789).margin(1e-12));
    REQUIRE(round_sig(round_sig(0.123456789123)) == round_sig(0.123456789123));
    REQUIRE(round_sig(-123456789.123) == -123456789.0);
    REQUIRE(round_sig(0.0) == 0.0);
}

TEST_CASE("scene json round trip over random scenes") {
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        GeneratedScene g = sample_scene(seed);
        const Json j1 = scene_to_json(g.gt);
        const ParseGraph back = scene_from_json(j1);
        REQUIRE(same_graph(g.gt, back));
        // Second serialization is byte-stable (rounding is idempotent).
        const Json j2 = scene_to_json(back);
        REQUIRE(j1.dump() == j2.dump());
    }
}

TEST_CASE("observation json round trip") {
    for (uint64_t seed = 1; seed <= 50; ++seed) {
        GeneratedScene g = sample_scene(seed);
        const Json j1 = obs_to_json(g.obs);
        const Observations back = obs_from_json(j1);
        REQUIRE(back.det_boxes.size() == g.obs.det_boxes.size());
        REQUIRE(back.det_poses.size() == g.obs.det_poses.size());
        REQUIRE(back.width == g.obs.width);
        for (size_t i = 0; i < back.det_boxes.size(); ++i) {
            REQUIRE((back.det_boxes[i].box.lo - g.obs.det_boxes[i].box.lo).norm() < 1e-6);
            REQUIRE(back.det_boxes[i].class_label == g.obs.det_boxes[i].class_label);
        }
        const Json j2 = obs_to_json(back);
        REQUIRE(j1.dump() == j2.dump());
    }
}

TEST_CASE("observation ingestion clamps boxes and visibility") {
    Observations obs;
    obs.width = 640;
    obs.height = 480;
    obs.det_boxes.push_back({"chair", {{-20.0, 30.0}, {700.0, 500.0}}, 1.4});
    DetectedPose pose;
    pose.visible.fill(true);
    pose.joints.fill(Vec2(100, 100));
    pose.joints[kHead] = Vec2(-5.0, 200.0);   // out of frame on the left
    pose.joints[kNose] = Vec2(300.0, 485.0);  // below the frame
    pose.actions.push_back({"sit", 2.0});
    obs.det_poses.push_back(pose);
    clamp_observations(obs);

    REQUIRE(obs.det_boxes[0].box.lo.x() == 0.0);
    REQUIRE(obs.det_boxes[0].box.hi.x() == 640.0);
    REQUIRE(obs.det_boxes[0].box.hi.y() == 480.0);
    REQUIRE(obs.det_boxes[0].confidence == 1.0);
    REQUIRE_FALSE(obs.det_poses[0].visible[kHead]);
    REQUIRE_FALSE(obs.det_poses[0].visible[kNose]);
    REQUIRE(obs.det_poses[0].visible[kHip]);
    REQUIRE(obs.det_poses[0].actions[0].confidence == 1.0);
}

TEST_CASE("prior set json round trip with validation") {
    const HoiPriorSet set = default_hoi_priors();
    const Json j = priors_to_json(set);
    const HoiPriorSet back = priors_from_json(j);
    REQUIRE(back.priors.size() == set.priors.size());
    for (const auto& [action, p] : set.priors) {
        REQUIRE(back.has(action));
        REQUIRE((back.at(action).mean - p.mean).norm() < 1e-7);
        REQUIRE((back.at(action).covariance - p.covariance).norm() < 1e-7);
        REQUIRE(back.at(action).key_joint == p.key_joint);
    }
}

TEST_CASE("schema tags are enforced") {
    GeneratedScene g = sample_scene(3);
    Json j = scene_to_json(g.gt);
    j["$schema"] = "obs/v1";
    REQUIRE_THROWS_AS(scene_from_json(j), SchemaError);
    j.erase("$schema");
    REQUIRE_THROWS_AS(scene_from_json(j), SchemaError);

    Json o = obs_to_json(g.obs);
    o["$schema"] = "scene/v1";
    REQUIRE_THROWS_AS(obs_from_json(o), SchemaError);
}

TEST_CASE("missing and malformed fields raise schema errors") {
    GeneratedScene g = sample_scene(4);
    Json j = scene_to_json(g.gt);
    j.erase("layout");
    REQUIRE_THROWS(scene_from_json(j));

    Json o = obs_to_json(g.obs);
    o["image_size"] = Json::array({640});
    REQUIRE_THROWS_AS(obs_from_json(o), SchemaError);

    Json p = priors_to_json(default_hoi_priors());
    p["priors"][0]["covariance"][0][0] = -1.0;  // not positive definite
    REQUIRE_THROWS_AS(priors_from_json(p), InvalidInputError);
}

TEST_CASE("scene spec round trip") {
    SceneSpec s = default_scene_spec();
    s.actions = {"sit", "use-laptop+sit-at"};
    s.noise.box_jitter_px = 1.5;
    s.seed = 42;
    const Json j = spec_to_json(s);
    const SceneSpec back = spec_from_json(j);
    REQUIRE(back.actions == s.actions);
    REQUIRE(back.inventory.size() == s.inventory.size());
    REQUIRE(back.noise.box_jitter_px == Approx(1.5));
    REQUIRE(back.seed == 42);
    REQUIRE(back.room_x.lo == Approx(s.room_x.lo));
}

TEST_CASE("hoi samples round trip") {
    std::vector<HoiSample> samples = {{"sit", {0.1, 0.2, 0.3}}, {"hold", {-0.1, 0.0, 0.5}}};
    const Json j = samples_to_json(samples);
    const auto back = samples_from_json(j);
    REQUIRE(back.size() == 2);
    REQUIRE(back[0].action == "sit");
    REQUIRE((back[1].offset - Vec3(-0.1, 0.0, 0.5)).norm() < 1e-9);
}

TEST_CASE("trace serialization is line-delimited with fixed fields") {
    std::vector<TraceRecord> trace(3);
    trace[1].iteration = 1;
    trace[1].phase = 3;
    trace[1].accepted = true;
    trace[1].total = 1.0 / 3.0;
    const std::string text = trace_to_jsonl(trace);
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 3);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    const Json j = Json::parse(line);
    REQUIRE(j["phase"] == 3);
    REQUIRE(j["accepted"] == true);
    REQUIRE(j["total"].get<double>() == Approx(0.333333333));
}

TEST_CASE("config: defaults dump parses back to defaults") {
    const std::string dump = dump_default_config();
    const RunConfig cfg = parse_config(dump);
    const RunConfig defaults;
    REQUIRE(cfg.weights.support == defaults.weights.support);
    REQUIRE(cfg.options.schedule.phase1.iters == defaults.options.schedule.phase1.iters);
    REQUIRE(cfg.options.schedule.phase1.t0 == Approx(defaults.options.schedule.phase1.t0));
    REQUIRE(cfg.options.schedule.phase3.gamma == Approx(defaults.options.schedule.phase3.gamma));
    REQUIRE(cfg.options.hoi_conf_threshold == Approx(defaults.options.hoi_conf_threshold));
    REQUIRE(cfg.options.sample_layout == defaults.options.sample_layout);
    REQUIRE(cfg.options.class_defaults.get("chair").size.x() ==
            Approx(defaults.options.class_defaults.get("chair").size.x()));
}

TEST_CASE("config: overrides, comments, and errors") {
    const RunConfig cfg = parse_config(
        "# comment line\n"
        "weights.hoi = 0.5\n"
        "schedule.phase1.iters = 100  # trailing comment\n"
        "schedule.sample_layout = true\n"
        "class.widget.size = 0.1 0.2 0.3\n"
        "support_prior.laptop.table = 0.9\n"
        "init.default_room = 0 0 1.25 6 6 2.5\n"
        "\n"
        "seed = 99\n");
    REQUIRE(cfg.weights.hoi == Approx(0.5));
    REQUIRE(cfg.options.schedule.phase1.iters == 100);
    REQUIRE(cfg.options.sample_layout);
    REQUIRE(cfg.options.class_defaults.get("widget").size.y() == Approx(0.2));
    REQUIRE(cfg.options.support_priors.prob("laptop", "table") == Approx(0.9));
    REQUIRE(cfg.options.support_priors.prob("laptop", "shelf") == Approx(1.0));
    REQUIRE(cfg.options.default_layout.has_value());
    REQUIRE(cfg.seed == 99);

    REQUIRE_THROWS_AS(parse_config("unknown.key = 1\n"), InvalidInputError);
    REQUIRE_THROWS_AS(parse_config("weights.hoi\n"), InvalidInputError);
    REQUIRE_THROWS_AS(parse_config("weights.hoi = abc\n"), InvalidInputError);
    REQUIRE_THROWS_AS(parse_config("weights.hoi = -1\n"), InvalidInputError);
}

TEST_CASE("metrics serialization and csv") {
    Metrics m;
    m.iou3d_pct = 50.123456789;
    m.pose_err3d_m = 0.05;
    const Json j = metrics_to_json(m);
    REQUIRE(j["$schema"] == "metrics/v1");
    REQUIRE(j["iou3d_pct"].get<double>() == Approx(50.1234568).margin(1e-6));
    const std::string row = metrics_csv_row("scene_000", m);
    REQUIRE(row.substr(0, 10) == "scene_000,");
    REQUIRE(metrics_csv_header().find("iou3d_pct") != std::string::npos);
}

TEST_CASE("render: deterministic svg with expected element counts") {
    GeneratedScene g = sample_scene(9);
    const std::string svg1 = render_svg(g.gt, g.obs);
    const std::string svg2 = render_svg(g.gt, g.obs);
    REQUIRE(svg1 == svg2);

    size_t polygons = 0, pos = 0;
    while ((pos = svg1.find("<polygon", pos)) != std::string::npos) {
        ++polygons;
        pos += 8;
    }
    REQUIRE(polygons == g.gt.objects.size());

    size_t orange_joints = 0;
    pos = 0;
    while ((pos = svg1.find("fill=\"#ff7f0e\"", pos)) != std::string::npos) {
        ++orange_joints;
        pos += 10;
    }
    REQUIRE(orange_joints == g.gt.humans.size() * kNumJoints);
    REQUIRE(svg1.find("</svg>") != std::string::npos);
}
