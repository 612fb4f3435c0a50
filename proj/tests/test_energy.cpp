#include "scenemc/energy.hpp"

#include "scenemc/inference.hpp"
#include "scenemc/synthetic.hpp"
#include "oracles.hpp"

#include <catch2/catch.hpp>

using namespace scenemc;

namespace {

Cuboid box_at(const Vec3& center, const Vec3& size, const std::string& cls, double yaw = 0.0) {
    Cuboid c;
    c.center = center;
    c.size = size;
    c.yaw = yaw;
    c.class_label = cls;
    return c;
}

ParseGraph empty_room() {
    ParseGraph pg;
    pg.layout = box_at({0, 0, 1.25}, {6, 6, 2.5}, "room");
    pg.camera = look_at_camera(600, 320, 240, {-2.9, 0, 1.5}, {1, 0, 1});
    return pg;
}

HoiPrior unit_prior(const std::string& action, const Vec3& mean) {
    HoiPrior p;
    p.action = action;
    p.object_classes = hoi_admissible_classes(action);
    p.key_joint = hoi_key_joint(action);
    p.mean = mean;
    p.covariance = Mat3::Identity();
    return p;
}

}  // namespace

TEST_CASE("support_energy: flush stack, floating box, floor clause") {
    ParseGraph pg = empty_room();
    pg.objects.push_back({0, box_at({0, 0, 0.375}, {1.2, 0.8, 0.75}, "table")});
    pg.objects.push_back({1, box_at({0, 0, 0.85}, {0.3, 0.3, 0.2}, "book")});
    pg.support_edges = {{0, kFloorId}, {1, 0}};
    REQUIRE(support_energy(pg) == Approx(0.0).margin(1e-12));

    // Float the book 0.2 m above the table, footprint still inside.
    pg.objects[1].box.center.z() = 1.05;
    REQUIRE(support_energy(pg) == Approx(0.2).margin(1e-12));

    // Box hovering 0.05 m over the floor: the overlap term is suppressed.
    ParseGraph pg2 = empty_room();
    pg2.objects.push_back({0, box_at({2.0, 2.0, 0.25}, {0.4, 0.4, 0.4}, "stool")});
    pg2.support_edges = {{0, kFloorId}};
    REQUIRE(support_energy(pg2) == Approx(0.05).margin(1e-12));
}

TEST_CASE("support_energy: wall clause keeps only the overlap term") {
    ParseGraph pg = empty_room();
    pg.objects.push_back({0, box_at({2.9, 0, 1.5}, {0.05, 0.8, 0.6}, "picture")});
    pg.support_edges = {{0, wall_id(0)}};
    // Height term zeroed; degenerate wall footprint leaves E_o = 1.
    REQUIRE(support_energy(pg) == Approx(1.0).margin(1e-12));
}

TEST_CASE("support_energy: dangling edge throws") {
    ParseGraph pg = empty_room();
    pg.support_edges = {{7, kFloorId}};
    REQUIRE_THROWS_AS(support_energy(pg), DanglingEdgeError);
}

TEST_CASE("support_energy: human feet on floor, hip footprint for overlap") {
    ParseGraph pg = empty_room();
    HumanNode h;
    h.id = 0;
    // Pin ankles exactly to the floor plane.
    const double tz = -[&] {
        double m = 1e300;
        for (const auto& j : template_stand()) m = std::min(m, j.z());
        return m;
    }();
    h.pose = pose_from_params(Vec3(0.5, 0.5, tz), 1.0, template_stand(), 0.0, {"stand"});
    pg.humans.push_back(h);
    pg.support_edges = {{0, kFloorId}};
    REQUIRE(support_energy(pg) == Approx(0.0).margin(1e-12));

    // Lift the human 0.1 m: height gap appears.
    pg.humans[0].pose = pose_from_params(Vec3(0.5, 0.5, tz + 0.1), 1.0, template_stand(), 0.0,
                                         {"stand"});
    REQUIRE(support_energy(pg) == Approx(0.1).margin(1e-12));
}

TEST_CASE("collision_energy: disjoint scene is zero") {
    ParseGraph pg = empty_room();
    pg.objects.push_back({0, box_at({1, 1, 0.45}, {0.5, 0.5, 0.9}, "chair")});
    pg.objects.push_back({1, box_at({-1, -1, 0.375}, {1.2, 0.8, 0.75}, "table")});
    REQUIRE(collision_energy(pg) == Approx(0.0).margin(1e-12));
}

TEST_CASE("collision_energy: overlapping unit cubes and container exemption") {
    ParseGraph pg = empty_room();
    pg.objects.push_back({0, box_at({0, 0, 0.5}, {1, 1, 1}, "crate")});
    pg.objects.push_back({1, box_at({0.5, 0, 0.5}, {1, 1, 1}, "crate")});
    const double brute =
        oracle::voxel_intersection_volume(pg.objects[0].box, pg.objects[1].box, 100);
    REQUIRE(collision_energy(pg) == Approx(0.5).margin(1e-12));
    REQUIRE(collision_energy(pg) == Approx(brute).margin(1e-2));

    pg.objects[1].box.is_container = true;
    REQUIRE(collision_energy(pg) == Approx(0.0).margin(1e-12));
}

TEST_CASE("collision_energy: out-of-room volume counts") {
    ParseGraph pg = empty_room();
    // Half the box pokes through the +x wall.
    pg.objects.push_back({0, box_at({3.0, 0, 0.5}, {1, 1, 1}, "crate")});
    REQUIRE(collision_energy(pg) == Approx(0.5).margin(1e-9));
}

TEST_CASE("collision_energy: hoi pairs are exempt") {
    ParseGraph pg = empty_room();
    pg.objects.push_back({0, box_at({0.3, 0, 0.45}, {0.5, 0.5, 0.9}, "chair")});
    HumanNode h;
    h.id = 1;
    h.pose = pose_from_params(Vec3(0.3, 0, 0.45), 1.0, template_sit(), 0.0, {"sit"});
    pg.humans.push_back(h);
    const double with_pair = collision_energy(pg);
    REQUIRE(with_pair > 0.0);
    pg.hoi_edges.push_back({1, 0, "sit"});
    REQUIRE(collision_energy(pg) == Approx(0.0).margin(1e-12));
}

TEST_CASE("hoi_energy: values at and off the mean, empty edge set") {
    ParseGraph pg = empty_room();
    JointArray rel{};
    rel[kRightWrist] = Vec3::Zero();
    HumanNode h;
    h.id = 0;
    h.pose = pose_from_params(Vec3(1, 1, 1), 1.0, rel, 0.0, {"hold"});
    pg.humans.push_back(h);
    pg.objects.push_back({1, box_at({1.0, 1.3, 1.0}, {0.1, 0.1, 0.25}, "bottle")});

    HoiPriorSet priors;
    priors.priors["hold"] = unit_prior("hold", Vec3(0, 0.3, 0));

    REQUIRE(hoi_energy(pg, priors) == Approx(0.0).margin(1e-12));  // no edges yet
    pg.hoi_edges.push_back({0, 1, "hold"});
    const double base = 1.5 * std::log(2.0 * kPi);
    REQUIRE(hoi_energy(pg, priors) == Approx(base).margin(1e-9));

    pg.objects[0].box.center.x() += 1.0;  // one sigma along x
    REQUIRE(hoi_energy(pg, priors) == Approx(base + 0.5).margin(1e-9));

    pg.hoi_edges[0].action = "read";
    pg.humans[0].pose.actions = {"read"};
    REQUIRE_THROWS_AS(hoi_energy(pg, priors), MissingPriorError);
}

namespace {

// Camera at box height looking straight down +x: the projected hull of an
// axis-aligned box is exactly the near-face rectangle, so D_o values are
// analytic.
ParseGraph head_on_room() {
    ParseGraph pg;
    pg.layout = box_at({0, 0, 1.25}, {6, 6, 2.5}, "room");
    pg.camera = look_at_camera(600, 320, 240, {-2.9, 0, 0.5}, {1, 0, 0.5});
    return pg;
}

}  // namespace

TEST_CASE("likelihood_energy: head-on projection scores zero") {
    ParseGraph pg = head_on_room();
    pg.objects.push_back({0, box_at({1, 0, 0.5}, {0.8, 0.6, 1.0}, "cabinet")});
    HumanNode h;
    h.id = 1;
    h.pose = pose_from_params(Vec3(1, -1.5, 0.86), 1.0, template_stand(), 0.0, {"stand"});
    pg.humans.push_back(h);
    pg.support_edges = {{0, kFloorId}, {1, kFloorId}};

    Rng rng(0);
    Observations obs = render_observations(pg, 640, 480, {}, rng);
    REQUIRE(pg.objects[0].detection == 0);
    REQUIRE(pg.humans[0].detection == 0);

    const LikelihoodSums s = likelihood_energy(pg, obs);
    REQUIRE(s.objects == Approx(0.0).margin(1e-9));
    REQUIRE(s.humans == Approx(0.0).margin(1e-9));
}

TEST_CASE("likelihood_energy: known IoU and joint distances") {
    ParseGraph pg = head_on_room();
    pg.objects.push_back({0, box_at({1, 0, 0.5}, {0.8, 0.6, 1.0}, "cabinet")});
    Rng rng(0);
    Observations obs = render_observations(pg, 640, 480, {}, rng);

    // Shift the detection by half its width: IoU 1/3, term 2/3.
    Rect2D& det = obs.det_boxes[0].box;
    const double w = det.width();
    det.lo.x() += 0.5 * w;
    det.hi.x() += 0.5 * w;
    const LikelihoodSums s = likelihood_energy(pg, obs);
    REQUIRE(s.objects == Approx(2.0 / 3.0).margin(1e-9));

    // Human whose 17 joints each land 10 px off, 640x480 image: 10/800.
    ParseGraph pg2 = empty_room();
    HumanNode h;
    h.id = 0;
    h.pose = pose_from_params(Vec3(1, 0, 0.9), 1.0, template_stand(), 0.0, {"stand"});
    pg2.humans.push_back(h);
    Observations obs2 = render_observations(pg2, 640, 480, {}, rng);
    for (auto& j : obs2.det_poses[0].joints) j.y() += 10.0;
    const LikelihoodSums s2 = likelihood_energy(pg2, obs2);
    REQUIRE(obs2.image_diagonal() == Approx(800.0));
    REQUIRE(s2.humans == Approx(10.0 / 800.0).margin(1e-9));
}

TEST_CASE("likelihood_energy: zero visible joints charges the penalty") {
    ParseGraph pg = empty_room();
    HumanNode h;
    h.id = 0;
    h.pose = pose_from_params(Vec3(1, 0, 0.9), 1.0, template_stand(), 0.0, {"stand"});
    pg.humans.push_back(h);
    Rng rng(0);
    Observations obs = render_observations(pg, 640, 480, {}, rng);
    for (size_t i = 0; i < kNumJoints; ++i) obs.det_poses[0].visible[i] = false;
    REQUIRE(likelihood_energy(pg, obs).humans == Approx(1.0));
}

TEST_CASE("likelihood_energy: synthesized objects contribute nothing") {
    ParseGraph pg = empty_room();
    pg.objects.push_back({0, box_at({1, 0, 0.5}, {0.8, 0.6, 1.0}, "cabinet")});
    Rng rng(0);
    Observations obs = render_observations(pg, 640, 480, {}, rng);
    pg.objects[0].synthesized = true;
    pg.objects[0].detection = -1;
    pg.objects[0].box.center.x() += 5.0;
    REQUIRE(likelihood_energy(pg, obs).objects == 0.0);
}

namespace {

struct RandomScene {
    ParseGraph pg;
    Observations obs;
    HoiPriorSet priors;
};

RandomScene make_random_scene(uint64_t seed) {
    RandomScene rs;
    rs.priors = default_hoi_priors();
    SceneSpec spec = default_scene_spec();
    spec.inventory.push_back({"bottle", 1, {0.08, 0.08, 0.25}, {0.08, 0.08, 0.25}, "table"});
    GeneratedScene g = generate_scene_retrying(spec, rs.priors, seed);
    rs.pg = std::move(g.gt);
    rs.obs = std::move(g.obs);
    return rs;
}

}  // namespace

TEST_CASE("total_energy: breakdown recomposition and per-node sum") {
    const RandomScene rs = make_random_scene(3);
    EnergyWeights w;
    w.support = 0.7;
    w.collision = 1.3;
    w.hoi = 0.9;
    w.likelihood_obj = 1.1;
    w.likelihood_pose = 0.8;
    const EnergyBreakdown bd = total_energy(rs.pg, rs.obs, rs.priors, w);

    const double recomposed = w.support * bd.e_support + w.collision * bd.e_collision +
                              w.hoi * bd.e_hoi + w.likelihood_obj * bd.e_likelihood_obj +
                              w.likelihood_pose * bd.e_likelihood_pose;
    REQUIRE(bd.total == Approx(recomposed).margin(1e-9));

    double per_node_sum = 0.0;
    for (const auto& [id, v] : bd.per_node) per_node_sum += v;
    REQUIRE(per_node_sum == Approx(bd.total).margin(1e-9));

    // Independent re-summation through the individual term functions.
    REQUIRE(bd.e_support == Approx(support_energy(rs.pg)).margin(1e-9));
    REQUIRE(bd.e_collision == Approx(collision_energy(rs.pg)).margin(1e-9));
    REQUIRE(bd.e_hoi == Approx(hoi_energy(rs.pg, rs.priors)).margin(1e-9));
    const LikelihoodSums s = likelihood_energy(rs.pg, rs.obs);
    REQUIRE(bd.e_likelihood_obj == Approx(s.objects).margin(1e-9));
    REQUIRE(bd.e_likelihood_pose == Approx(s.humans).margin(1e-9));
}

TEST_CASE("total_energy: ground-truth scene carries only HOI energy") {
    const RandomScene rs = make_random_scene(11);
    const EnergyBreakdown bd = total_energy(rs.pg, rs.obs, rs.priors);
    REQUIRE(bd.e_support == Approx(0.0).margin(1e-9));
    REQUIRE(bd.e_collision == Approx(0.0).margin(1e-9));
    REQUIRE(bd.e_likelihood_obj == Approx(0.0).margin(1e-9));
    REQUIRE(bd.e_likelihood_pose == Approx(0.0).margin(1e-9));
    REQUIRE(bd.total == Approx(bd.e_hoi).margin(1e-9));
}

TEST_CASE("total_energy: doubling a weight doubles only its contribution") {
    const RandomScene rs = make_random_scene(5);
    ParseGraph pg = rs.pg;
    pg.objects[0].box.center += Vec3(0.2, 0.1, 0.15);  // create some collision/support energy

    EnergyWeights w;
    const EnergyBreakdown a = total_energy(pg, rs.obs, rs.priors, w);
    w.collision = 2.0;
    const EnergyBreakdown b = total_energy(pg, rs.obs, rs.priors, w);
    REQUIRE(b.e_collision == Approx(a.e_collision).margin(1e-12));
    REQUIRE(b.total - a.total == Approx(a.e_collision).margin(1e-9));
}

TEST_CASE("total_energy: translation invariance of scene plus camera") {
    const RandomScene rs = make_random_scene(17);
    const EnergyBreakdown before = total_energy(rs.pg, rs.obs, rs.priors);

    const Vec3 t(3.7, -2.1, 0.6);
    ParseGraph moved = rs.pg;
    moved.layout.center += t;
    for (auto& o : moved.objects) o.box.center += t;
    for (auto& h : moved.humans)
        h.pose = pose_from_params(h.pose.center + t, h.pose.scale, h.pose.rel_joints, h.pose.yaw,
                                  h.pose.actions);
    moved.camera.position += t;
    Observations obs2 = rs.obs;
    obs2.camera.position += t;

    const EnergyBreakdown after = total_energy(moved, obs2, rs.priors);
    REQUIRE(after.e_support == Approx(before.e_support).margin(1e-6));
    REQUIRE(after.e_collision == Approx(before.e_collision).margin(1e-6));
    REQUIRE(after.e_hoi == Approx(before.e_hoi).margin(1e-6));
    REQUIRE(after.e_likelihood_obj == Approx(before.e_likelihood_obj).margin(1e-6));
    REQUIRE(after.e_likelihood_pose == Approx(before.e_likelihood_pose).margin(1e-6));
    REQUIRE(after.total == Approx(before.total).margin(1e-6));
}

TEST_CASE("collision pair contribution is order independent") {
    const RandomScene rs = make_random_scene(23);
    ParseGraph pg = rs.pg;
    pg.objects[0].box.center += Vec3(0.3, 0.2, 0.0);
    const double a = collision_energy(pg);
    std::reverse(pg.objects.begin(), pg.objects.end());
    const double b = collision_energy(pg);
    REQUIRE(a == Approx(b).margin(1e-12));
}

TEST_CASE("energy offset invariance: constant HOI shift preserves ordering") {
    const RandomScene rs = make_random_scene(29);
    ParseGraph alt = rs.pg;
    alt.objects[0].box.center += Vec3(0.15, -0.1, 0.05);

    HoiPriorSet shifted = rs.priors;
    for (auto& [a, p] : shifted.priors) p.covariance *= 4.0;  // adds 1.5*ln4 per edge

    const double d_before = total_energy(alt, rs.obs, rs.priors).total -
                            total_energy(rs.pg, rs.obs, rs.priors).total;
    const double d_after = total_energy(alt, rs.obs, shifted).total -
                           total_energy(rs.pg, rs.obs, shifted).total;
    REQUIRE((d_before < 0) == (d_after < 0));
}

TEST_CASE("delta_energy matches full recomputation after single-node proposals") {
    const RandomScene rs = make_random_scene(31);
    const EnergyWeights w;
    const EnergyBreakdown bd = total_energy(rs.pg, rs.obs, rs.priors, w);

    Rng rng(100);
    PhaseParams pp;
    const EnergyContext ctx{rs.obs, rs.priors, w, {}};
    for (int trial = 0; trial < 200; ++trial) {
        const ProposalOutcome out = propose(rs.pg, bd, ctx, pp, rng);
        const EnergyBreakdown full = total_energy(out.candidate, rs.obs, rs.priors, w);
        REQUIRE(out.cand_bd.total == Approx(full.total).margin(1e-9));
        REQUIRE(out.cand_bd.e_support == Approx(full.e_support).margin(1e-9));
        REQUIRE(out.cand_bd.e_collision == Approx(full.e_collision).margin(1e-9));
        REQUIRE(out.cand_bd.e_hoi == Approx(full.e_hoi).margin(1e-9));
        REQUIRE(out.cand_bd.e_likelihood_obj == Approx(full.e_likelihood_obj).margin(1e-9));
        REQUIRE(out.cand_bd.e_likelihood_pose == Approx(full.e_likelihood_pose).margin(1e-9));
    }
}
