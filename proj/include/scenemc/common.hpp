#pragma once

// Shared numeric aliases, error types, angle helpers and the deterministic
// RNG used by every stochastic component. All randomness in the library goes
// through Rng so runs are reproducible bit-for-bit from a seed.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace scenemc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParameterError : Error { using Error::Error; };
struct BehindCameraError : Error { using Error::Error; };
struct DegenerateHullError : Error { using Error::Error; };
struct DanglingEdgeError : Error { using Error::Error; };
struct MissingPriorError : Error { using Error::Error; };
struct InsufficientDataError : Error { using Error::Error; };
struct InvalidInputError : Error { using Error::Error; };
struct InvalidTemperatureError : Error { using Error::Error; };
struct UnliftablePoseError : Error { using Error::Error; };
struct InitializationError : Error { using Error::Error; };
struct GenerationError : Error { using Error::Error; };
struct UndefinedMetricsError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Angles and rotations

/// Wraps an angle to [-pi, pi).
inline double normalize_angle(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a < -kPi) a += 2.0 * kPi;
    if (a >= kPi) a -= 2.0 * kPi;
    return a;
}

/// Rotation about the world z-axis.
inline Mat3 rot_z(double yaw) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    Mat3 r;
    r << c, -s, 0.0,
         s,  c, 0.0,
         0.0, 0.0, 1.0;
    return r;
}

inline Vec2 rot2(double yaw, const Vec2& v) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

// ---------------------------------------------------------------------------
// Skeleton layout
//
// Fixed 17-joint order. External skeletons must be remapped to this order at
// ingestion time; everything downstream indexes into it directly.

enum Joint : int {
    kHip = 0,
    kSpine = 1,
    kNeck = 2,
    kHead = 3,
    kLeftShoulder = 4,
    kRightShoulder = 5,
    kLeftElbow = 6,
    kRightElbow = 7,
    kLeftWrist = 8,
    kRightWrist = 9,
    kLeftHip = 10,
    kRightHip = 11,
    kLeftKnee = 12,
    kRightKnee = 13,
    kLeftAnkle = 14,
    kRightAnkle = 15,
    kNose = 16,
};

inline constexpr int kNumJoints = 17;

inline const std::array<std::string, kNumJoints>& joint_names() {
    static const std::array<std::string, kNumJoints> names = {
        "hip",        "spine",      "neck",        "head",
        "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
        "left_wrist", "right_wrist", "left_hip",   "right_hip",
        "left_knee",  "right_knee", "left_ankle",  "right_ankle",
        "nose"};
    return names;
}

inline int joint_index(const std::string& name) {
    const auto& names = joint_names();
    for (int i = 0; i < kNumJoints; ++i)
        if (names[static_cast<size_t>(i)] == name) return i;
    throw InvalidInputError("unknown joint name: " + name);
}

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// mt19937_64 with hand-rolled double generation. std::uniform_real_distribution
// and friends are implementation-defined, so we avoid them: the same seed must
// reproduce the same chain on any standard library.

class Rng {
public:
    explicit Rng(uint64_t seed = 0) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    int pick(int n) {
        return static_cast<int>(engine_() % static_cast<uint64_t>(n));
    }

    /// Bernoulli(p).
    bool coin(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (no cached spare, keeps the stream
    /// position a pure function of the call count).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    Vec3 normal3(double sigma) {
        return {normal() * sigma, normal() * sigma, normal() * sigma};
    }

    uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace scenemc
