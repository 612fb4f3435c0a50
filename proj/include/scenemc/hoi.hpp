#pragma once

// Per-action spatial priors linking human key joints to object centers.
// Offsets are measured as (object center - key joint), rotated into the
// human's yaw-aligned frame so a prior learned for "sitting" turns with the
// person. Each prior is a trivariate Gaussian fitted by maximum likelihood.

#include "scenemc/scene.hpp"

#include <Eigen/Cholesky>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace scenemc {

inline constexpr double kCovarianceRidge = 1e-4;  // m^2, keeps Sigma invertible

struct HoiPrior {
    std::string action;
    std::set<std::string> object_classes;  // admissible object labels
    std::string key_joint;                 // joint name or "wrists_mid"
    Vec3 mean = Vec3::Zero();
    Mat3 covariance = Mat3::Identity();
};

struct HoiPriorSet {
    std::map<std::string, HoiPrior> priors;  // keyed by action
    std::string version = "hoi-prior/v1";

    bool has(const std::string& action) const { return priors.count(action) > 0; }
    const HoiPrior& at(const std::string& action) const {
        auto it = priors.find(action);
        if (it == priors.end()) throw MissingPriorError("no prior for action: " + action);
        return it->second;
    }
};

// ---------------------------------------------------------------------------
// Default action tables. The key-joint selector extends the canonical
// hip anchor of seated interactions to the reach- and gaze-driven ones;
// the class tables are overridable in the prior file.

inline const std::vector<std::string>& hoi_action_vocabulary() {
    static const std::vector<std::string> v = {
        "hold", "make-phone-call", "read", "sit", "sit-at", "use-laptop"};
    return v;
}

inline std::string hoi_key_joint(const std::string& action) {
    if (action == "sit" || action == "sit-at") return "hip";
    if (action == "use-laptop") return "wrists_mid";
    return "right_wrist";  // hold, read, make-phone-call
}

inline std::set<std::string> hoi_admissible_classes(const std::string& action) {
    if (action == "sit") return {"chair", "sofa", "bed", "stool"};
    if (action == "sit-at") return {"table", "desk"};
    if (action == "use-laptop") return {"laptop"};
    if (action == "hold") return {"bottle", "cup", "phone", "book"};
    if (action == "read") return {"book", "phone", "tablet", "notebook"};
    if (action == "make-phone-call") return {"phone"};
    return {};
}

inline std::string hoi_default_object_class(const std::string& action) {
    if (action == "sit") return "chair";
    if (action == "sit-at") return "table";
    if (action == "use-laptop") return "laptop";
    if (action == "hold") return "bottle";
    if (action == "read") return "book";
    if (action == "make-phone-call") return "phone";
    return "object";
}

/// Resolves a key-joint selector to a world position.
inline Vec3 key_joint_position(const HumanPose& pose, const std::string& key) {
    if (key == "wrists_mid")
        return 0.5 * (pose.joints[kLeftWrist] + pose.joints[kRightWrist]);
    return pose.joints[static_cast<size_t>(joint_index(key))];
}

/// Offset of an object center from the human's key joint, in the human's
/// yaw-aligned frame.
inline Vec3 hoi_offset(const HumanPose& human, const Vec3& object_center,
                       const std::string& key_joint) {
    const Vec3 d = object_center - key_joint_position(human, key_joint);
    return rot_z(-human.yaw) * d;
}

// ---------------------------------------------------------------------------
// Fitting and evaluation

/// Maximum-likelihood Gaussian fit (N divisor) with a ridge on the diagonal.
/// Samples are summed in sorted order so the result does not depend on the
/// input ordering.
inline HoiPrior fit_prior(const std::string& action, std::vector<Vec3> samples) {
    if (samples.size() < 4)
        throw InsufficientDataError("fit_prior needs at least 4 samples, got " +
                                    std::to_string(samples.size()));
    for (const Vec3& s : samples)
        if (!s.allFinite()) throw InvalidInputError("non-finite offset sample");

    std::sort(samples.begin(), samples.end(), [](const Vec3& a, const Vec3& b) {
        if (a.x() != b.x()) return a.x() < b.x();
        if (a.y() != b.y()) return a.y() < b.y();
        return a.z() < b.z();
    });
    const double n = static_cast<double>(samples.size());
    Vec3 mu = Vec3::Zero();
    for (const Vec3& s : samples) mu += s;
    mu /= n;
    Mat3 cov = Mat3::Zero();
    for (const Vec3& s : samples) {
        const Vec3 d = s - mu;
        cov += d * d.transpose();
    }
    cov /= n;
    cov += kCovarianceRidge * Mat3::Identity();

    HoiPrior p;
    p.action = action;
    p.object_classes = hoi_admissible_classes(action);
    p.key_joint = hoi_key_joint(action);
    p.mean = mu;
    p.covariance = cov;
    return p;
}

/// Exact negative log density of the trivariate normal, normalization
/// constant included.
inline double nll(const HoiPrior& prior, const Vec3& offset) {
    const Eigen::LLT<Mat3> llt(prior.covariance);
    const Vec3 d = offset - prior.mean;
    const Vec3 y = llt.matrixL().solve(d);
    double logdet = 0.0;
    for (int i = 0; i < 3; ++i) logdet += std::log(llt.matrixL()(i, i));
    return 1.5 * std::log(2.0 * kPi) + logdet + 0.5 * y.squaredNorm();
}

/// NLL of the interaction between a human and an object under the action's
/// prior.
inline double hoi_nll(const HoiPrior& prior, const HumanPose& human, const Cuboid& object) {
    return nll(prior, hoi_offset(human, object.center, prior.key_joint));
}

inline void validate_prior(const HoiPrior& p) {
    if ((p.covariance - p.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw InvalidInputError("prior covariance not symmetric: " + p.action);
    Eigen::SelfAdjointEigenSolver<Mat3> es(p.covariance);
    if (es.eigenvalues().minCoeff() < kCovarianceRidge - 1e-12)
        throw InvalidInputError("prior covariance below ridge floor: " + p.action);
    if (!p.mean.allFinite()) throw InvalidInputError("non-finite prior mean: " + p.action);
}

// ---------------------------------------------------------------------------
// Matching and conditional sampling

/// Phase-2 matching: for every human and every action whose detection
/// confidence clears the threshold, pick the admissible-class object with the
/// lowest interaction NLL. Objects may serve several humans. Actions with no
/// admissible object present yield no edge (top-down sampling may create one
/// later).
inline std::vector<HoiEdge> match_interactions(const ParseGraph& pg, const Observations& obs,
                                               const HoiPriorSet& priors,
                                               double conf_threshold = 0.5) {
    std::vector<HoiEdge> edges;
    for (const auto& h : pg.humans) {
        if (h.detection < 0 || h.detection >= static_cast<int>(obs.det_poses.size()))
            continue;
        const DetectedPose& det = obs.det_poses[static_cast<size_t>(h.detection)];
        for (const auto& [action, prior] : priors.priors) {
            if (!h.pose.has_action(action)) continue;
            if (det.action_confidence(action) < conf_threshold) continue;
            const ObjectNode* best = nullptr;
            double best_nll = std::numeric_limits<double>::infinity();
            for (const auto& o : pg.objects) {
                if (prior.object_classes.count(o.box.class_label) == 0) continue;
                const double e = hoi_nll(prior, h.pose, o.box);
                if (e < best_nll) {
                    best_nll = e;
                    best = &o;
                }
            }
            if (best != nullptr) edges.push_back({h.id, best->id, action});
        }
    }
    return edges;
}

/// Deterministic mode placement of an object given a pose: puts the center at
/// the NLL-minimizing offset. `jitter_sigma` adds optional Gaussian noise
/// (off by default).
inline Vec3 sample_object_center(const HoiPrior& prior, const HumanPose& human,
                                 double jitter_sigma = 0.0, Rng* rng = nullptr) {
    Vec3 offset = prior.mean;
    if (jitter_sigma > 0.0 && rng != nullptr) offset += rng->normal3(jitter_sigma);
    return key_joint_position(human, prior.key_joint) + rot_z(human.yaw) * offset;
}

}  // namespace scenemc
