#pragma once

// Canonical 17-joint pose templates, hip at the origin, person facing local
// +x, z up, meters at scale 1. These stand in for a learned template bank:
// initialization picks one per detected action and the synthetic harness
// poses them in scenes.

#include "scenemc/hoi.hpp"
#include "scenemc/scene.hpp"

#include <map>
#include <string>
#include <vector>

namespace scenemc {

namespace detail {

inline JointArray joints_from_list(std::initializer_list<Vec3> list) {
    JointArray a{};
    int i = 0;
    for (const Vec3& v : list) a[static_cast<size_t>(i++)] = v;
    return a;
}

}  // namespace detail

/// Upright neutral stance.
inline const JointArray& template_stand() {
    static const JointArray t = detail::joints_from_list({
        {0.00, 0.00, 0.00},    // hip
        {0.00, 0.00, 0.25},    // spine
        {0.00, 0.00, 0.50},    // neck
        {0.00, 0.00, 0.66},    // head
        {0.00, 0.20, 0.48},    // left_shoulder
        {0.00, -0.20, 0.48},   // right_shoulder
        {0.02, 0.24, 0.22},    // left_elbow
        {0.02, -0.24, 0.22},   // right_elbow
        {0.05, 0.26, -0.02},   // left_wrist
        {0.05, -0.26, -0.02},  // right_wrist
        {0.00, 0.11, -0.02},   // left_hip
        {0.00, -0.11, -0.02},  // right_hip
        {0.02, 0.12, -0.45},   // left_knee
        {0.02, -0.12, -0.45},  // right_knee
        {0.00, 0.13, -0.86},   // left_ankle
        {0.00, -0.13, -0.86},  // right_ankle
        {0.08, 0.00, 0.62},    // nose
    });
    return t;
}

/// Seated, thighs forward.
inline const JointArray& template_sit() {
    static const JointArray t = detail::joints_from_list({
        {0.00, 0.00, 0.00},
        {-0.03, 0.00, 0.26},
        {-0.05, 0.00, 0.50},
        {-0.05, 0.00, 0.66},
        {-0.05, 0.20, 0.48},
        {-0.05, -0.20, 0.48},
        {0.06, 0.23, 0.24},
        {0.06, -0.23, 0.24},
        {0.18, 0.24, 0.05},
        {0.18, -0.24, 0.05},
        {0.00, 0.11, -0.01},
        {0.00, -0.11, -0.01},
        {0.42, 0.12, -0.02},
        {0.42, -0.12, -0.02},
        {0.46, 0.13, -0.44},
        {0.46, -0.13, -0.44},
        {0.03, 0.00, 0.62},
    });
    return t;
}

/// Standing with the right arm extended forward.
inline const JointArray& template_reach() {
    static const JointArray t = detail::joints_from_list({
        {0.00, 0.00, 0.00},
        {0.00, 0.00, 0.25},
        {0.00, 0.00, 0.50},
        {0.00, 0.00, 0.66},
        {0.00, 0.20, 0.48},
        {0.00, -0.20, 0.48},
        {0.02, 0.24, 0.22},
        {0.25, -0.22, 0.15},
        {0.05, 0.26, -0.02},
        {0.45, -0.20, 0.02},
        {0.00, 0.11, -0.02},
        {0.00, -0.11, -0.02},
        {0.02, 0.12, -0.45},
        {0.02, -0.12, -0.45},
        {0.00, 0.13, -0.86},
        {0.00, -0.13, -0.86},
        {0.08, 0.00, 0.62},
    });
    return t;
}

/// Bent forward at the waist.
inline const JointArray& template_bend() {
    static const JointArray t = detail::joints_from_list({
        {0.00, 0.00, 0.00},
        {0.18, 0.00, 0.18},
        {0.34, 0.00, 0.30},
        {0.42, 0.00, 0.36},
        {0.32, 0.20, 0.28},
        {0.32, -0.20, 0.28},
        {0.40, 0.22, 0.05},
        {0.40, -0.22, 0.05},
        {0.44, 0.23, -0.18},
        {0.44, -0.23, -0.18},
        {0.00, 0.11, -0.02},
        {0.00, -0.11, -0.02},
        {0.03, 0.12, -0.44},
        {0.03, -0.12, -0.44},
        {0.02, 0.13, -0.84},
        {0.02, -0.13, -0.84},
        {0.48, 0.00, 0.33},
    });
    return t;
}

/// Standing with the right hand raised to the ear.
inline const JointArray& template_phone() {
    static const JointArray t = detail::joints_from_list({
        {0.00, 0.00, 0.00},
        {0.00, 0.00, 0.25},
        {0.00, 0.00, 0.50},
        {0.00, 0.00, 0.66},
        {0.00, 0.20, 0.48},
        {0.00, -0.20, 0.48},
        {0.02, 0.24, 0.22},
        {0.10, -0.22, 0.28},
        {0.05, 0.26, -0.02},
        {0.10, -0.08, 0.55},
        {0.00, 0.11, -0.02},
        {0.00, -0.11, -0.02},
        {0.02, 0.12, -0.45},
        {0.02, -0.12, -0.45},
        {0.00, 0.13, -0.86},
        {0.00, -0.13, -0.86},
        {0.08, 0.00, 0.62},
    });
    return t;
}

inline const std::map<std::string, const JointArray*>& pose_template_bank() {
    static const std::map<std::string, const JointArray*> bank = {
        {"stand", &template_stand()}, {"sit", &template_sit()},
        {"reach", &template_reach()}, {"bend", &template_bend()},
        {"phone", &template_phone()},
    };
    return bank;
}

/// Template used to pose a person performing `action`.
inline const JointArray& template_for_action(const std::string& action) {
    if (action == "sit" || action == "sit-at" || action == "use-laptop") return template_sit();
    if (action == "hold") return template_reach();
    if (action == "make-phone-call") return template_phone();
    if (action == "bend") return template_bend();
    return template_stand();
}

/// Template for a multi-hot action set: the first action with a non-stand
/// template wins, in the fixed vocabulary order.
inline const JointArray& template_for_actions(const std::vector<std::string>& actions) {
    for (const auto& a : hoi_action_vocabulary()) {
        for (const auto& have : actions)
            if (have == a) return template_for_action(a);
    }
    return template_stand();
}

}  // namespace scenemc
