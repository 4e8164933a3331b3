#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "floorloc/errors.hpp"
#include "floorloc/geometry.hpp"

namespace floorloc {

// ---------------------------------------------------------------------------
// Detections
// ---------------------------------------------------------------------------

struct BoundingBox {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0; // px
    double confidence = 1.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }

    void validate() const {
        if (!(x_min < x_max) || !(y_min < y_max))
            throw ValidationError("bounding box must have positive extent");
        if (!(confidence >= 0 && confidence <= 1))
            throw ValidationError("bounding box confidence must be in [0,1]");
    }
};

// The 18 named keypoints a pose detector reports for one person.
enum class JointName : int {
    nose,
    neck,
    left_eye,
    right_eye,
    left_ear,
    right_ear,
    left_shoulder,
    right_shoulder,
    left_elbow,
    right_elbow,
    left_wrist,
    right_wrist,
    left_hip,
    right_hip,
    left_knee,
    right_knee,
    left_ankle,
    right_ankle,
};

inline constexpr int kJointCount = 18;

inline constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "nose",          "neck",           "left_eye",   "right_eye",  "left_ear",
    "right_ear",     "left_shoulder",  "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist",    "right_wrist",    "left_hip",   "right_hip",  "left_knee",
    "right_knee",    "left_ankle",     "right_ankle"};

inline std::string_view joint_name_string(JointName j) {
    return kJointNames[static_cast<int>(j)];
}

inline std::optional<JointName> parse_joint_name(std::string_view s) {
    for (int i = 0; i < kJointCount; ++i)
        if (kJointNames[i] == s) return static_cast<JointName>(i);
    return std::nullopt;
}

struct Joint {
    ImagePoint point{};
    double confidence = 0;
};

// Partial map JointName -> detected joint. At most one entry per name.
class Skeleton {
public:
    void set(JointName name, ImagePoint p, double confidence) {
        if (!(confidence >= 0 && confidence <= 1))
            throw ValidationError("joint confidence must be in [0,1]");
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw ValidationError("joint coordinates must be finite");
        joints_[static_cast<int>(name)] = Joint{p, confidence};
    }

    const std::optional<Joint>& get(JointName name) const {
        return joints_[static_cast<int>(name)];
    }

    bool has(JointName name, double min_confidence) const {
        const auto& j = joints_[static_cast<int>(name)];
        return j && j->confidence >= min_confidence;
    }

    int size() const {
        int n = 0;
        for (const auto& j : joints_)
            if (j) ++n;
        return n;
    }

private:
    std::array<std::optional<Joint>, kJointCount> joints_{};
};

// ---------------------------------------------------------------------------
// Body proportions
// ---------------------------------------------------------------------------

// Horizontal body lines whose height above the ground is a known fraction of
// standing height. Eyes and ears share one line.
enum class BodyLevel : int { eye, shoulder, hip, knee, ankle };

inline constexpr int kBodyLevelCount = 5;

inline constexpr std::array<std::string_view, kBodyLevelCount> kBodyLevelNames = {
    "eye", "shoulder", "hip", "knee", "ankle"};

inline std::optional<BodyLevel> parse_body_level(std::string_view s) {
    for (int i = 0; i < kBodyLevelCount; ++i)
        if (kBodyLevelNames[i] == s) return static_cast<BodyLevel>(i);
    return std::nullopt;
}

// Each line's height as a fraction of standing height, measured from the
// ground. ankle_ground is the gap between the ankle line and the sole, so a
// detector whose ankle keypoints sit on the ground reports
// ankle - ankle_ground = 0.
struct BodyProportions {
    double eye = 0.94;
    double shoulder = 0.82;
    double hip = 0.52;
    double knee = 0.28;
    double ankle = 0.04;
    double ankle_ground = 0.04;

    double fraction(BodyLevel level) const {
        switch (level) {
        case BodyLevel::eye: return eye;
        case BodyLevel::shoulder: return shoulder;
        case BodyLevel::hip: return hip;
        case BodyLevel::knee: return knee;
        case BodyLevel::ankle: return ankle;
        }
        return 0; // unreachable
    }

    void validate() const {
        const std::array<double, 5> f = {eye, shoulder, hip, knee, ankle};
        for (double v : f)
            if (!(v > 0 && v <= 1))
                throw ValidationError("body level fractions must lie in (0,1]");
        for (std::size_t i = 1; i < f.size(); ++i)
            if (!(f[i] < f[i - 1]))
                throw ValidationError(
                    "body level fractions must strictly decrease from eye to ankle");
        if (!(ankle_ground >= 0))
            throw ValidationError("ankle_ground fraction must be >= 0");
    }
};

inline constexpr double kDefaultConfThreshold = 0.3;
inline constexpr double kDefaultBboxAspect = 2.5; // target height / width

// Left/right joint pairs whose midpoints trace the body's vertical midline.
struct MidlinePair {
    JointName left;
    JointName right;
    BodyLevel level;
};

inline constexpr std::array<MidlinePair, 6> kMidlinePairs = {{
    {JointName::left_eye, JointName::right_eye, BodyLevel::eye},
    {JointName::left_ear, JointName::right_ear, BodyLevel::eye},
    {JointName::left_shoulder, JointName::right_shoulder, BodyLevel::shoulder},
    {JointName::left_hip, JointName::right_hip, BodyLevel::hip},
    {JointName::left_knee, JointName::right_knee, BodyLevel::knee},
    {JointName::left_ankle, JointName::right_ankle, BodyLevel::ankle},
}};

// ---------------------------------------------------------------------------
// Feet estimates
// ---------------------------------------------------------------------------

enum class FeetMethod : int { ankles, extended, bbox, bbox_extended };

inline constexpr std::array<std::string_view, 4> kFeetMethodNames = {
    "ankles", "extended", "bbox", "bbox_extended"};

inline std::string_view feet_method_string(FeetMethod m) {
    return kFeetMethodNames[static_cast<int>(m)];
}

// Either a found image point with the method that produced it, or a skipped
// frame with a reason.
struct FeetEstimate {
    std::optional<ImagePoint> point;
    FeetMethod method = FeetMethod::ankles;
    std::string skip_reason;

    bool found() const { return point.has_value(); }

    static FeetEstimate make_found(ImagePoint p, FeetMethod m) {
        return FeetEstimate{p, m, {}};
    }
    static FeetEstimate make_skipped(std::string reason) {
        return FeetEstimate{std::nullopt, FeetMethod::ankles, std::move(reason)};
    }
};

// Feet as the midpoint of the box's bottom edge.
inline FeetEstimate feet_from_bbox(const BoundingBox& b) {
    b.validate();
    return FeetEstimate::make_found(ImagePoint{(b.x_min + b.x_max) / 2.0, b.y_max},
                                    FeetMethod::bbox);
}

// Grows the box downward until height/width reaches the target ratio of a
// fully visible standing person. Boxes already at or past the ratio are
// returned unchanged.
inline BoundingBox extend_bbox(const BoundingBox& b, double target_height_over_width) {
    b.validate();
    if (!(target_height_over_width > 0))
        throw ValidationError("target aspect ratio must be > 0");
    const double target_height = target_height_over_width * b.width();
    if (b.height() >= target_height) return b;
    BoundingBox out = b;
    out.y_max = b.y_min + target_height;
    return out;
}

// Least-squares body midline x = slope*y + intercept. x is regressed on y
// because a standing or leaning body is near-vertical in image space.
struct MidlineFit {
    double slope = 0;
    double intercept = 0;
    int n_points = 0;

    double x_at(double y) const { return slope * y + intercept; }
};

namespace detail {

struct LevelMidpoint {
    ImagePoint point{};
    BodyLevel level{};
};

// Midpoints of every complementary pair whose both joints clear the
// confidence threshold.
inline std::vector<LevelMidpoint> pair_midpoints(const Skeleton& s, double conf_threshold,
                                                 std::span<const MidlinePair> pairs) {
    std::vector<LevelMidpoint> mids;
    for (const auto& pair : pairs) {
        if (!s.has(pair.left, conf_threshold) || !s.has(pair.right, conf_threshold)) continue;
        const ImagePoint l = s.get(pair.left)->point;
        const ImagePoint r = s.get(pair.right)->point;
        mids.push_back({ImagePoint{(l.x + r.x) / 2.0, (l.y + r.y) / 2.0}, pair.level});
    }
    return mids;
}

inline std::optional<MidlineFit> fit_midline(std::span<const LevelMidpoint> mids) {
    if (mids.size() < 2) return std::nullopt;
    double sx = 0, sy = 0;
    for (const auto& m : mids) {
        sx += m.point.x;
        sy += m.point.y;
    }
    const double mean_x = sx / static_cast<double>(mids.size());
    const double mean_y = sy / static_cast<double>(mids.size());
    double syy = 0, sxy = 0;
    for (const auto& m : mids) {
        const double dy = m.point.y - mean_y;
        syy += dy * dy;
        sxy += dy * (m.point.x - mean_x);
    }
    if (syy == 0) return std::nullopt; // all midpoints at one image height
    const double slope = sxy / syy;
    return MidlineFit{slope, mean_x - slope * mean_y, static_cast<int>(mids.size())};
}

} // namespace detail

inline std::optional<MidlineFit> body_midline(const Skeleton& s, double conf_threshold,
                                              std::span<const MidlinePair> pairs = kMidlinePairs) {
    return detail::fit_midline(detail::pair_midpoints(s, conf_threshold, pairs));
}

// Whether the extension step walks the regressed line by arc length or by
// vertical pixel drop. Both agree for a perfectly vertical body.
enum class ExtensionMode : int { arc_length, vertical_drop };

// Feet position from a possibly occluded skeleton:
//
//  1. Both ankles confident: midpoint of the ankles.
//  2. Otherwise regress the body midline from complementary-pair midpoints,
//     estimate the pixel body height from the two detected levels farthest
//     apart in proportion, and extend down the line from the lowest detected
//     level by its ground fraction of that height.
//
// Frames with fewer than two usable midpoints (or no vertical span to
// regress over) are skipped.
inline FeetEstimate feet_from_skeleton(const Skeleton& s, const BodyProportions& props,
                                       double conf_threshold,
                                       ExtensionMode mode = ExtensionMode::arc_length,
                                       std::span<const MidlinePair> pairs = kMidlinePairs) {
    props.validate();
    if (s.has(JointName::left_ankle, conf_threshold) &&
        s.has(JointName::right_ankle, conf_threshold)) {
        const ImagePoint l = s.get(JointName::left_ankle)->point;
        const ImagePoint r = s.get(JointName::right_ankle)->point;
        return FeetEstimate::make_found(ImagePoint{(l.x + r.x) / 2.0, (l.y + r.y) / 2.0},
                                        FeetMethod::ankles);
    }

    const auto mids = detail::pair_midpoints(s, conf_threshold, pairs);
    const auto line = detail::fit_midline(mids);
    if (!line) return FeetEstimate::make_skipped("insufficient joints");

    // One aggregated midpoint per detected level (eyes and ears share a line).
    std::array<ImagePoint, kBodyLevelCount> level_sum{};
    std::array<int, kBodyLevelCount> level_count{};
    for (const auto& m : mids) {
        auto& acc = level_sum[static_cast<int>(m.level)];
        acc.x += m.point.x;
        acc.y += m.point.y;
        ++level_count[static_cast<int>(m.level)];
    }
    int top = -1, bottom = -1; // indices into BodyLevel, fractions decrease with index
    for (int i = 0; i < kBodyLevelCount; ++i) {
        if (level_count[i] == 0) continue;
        if (top < 0) top = i;
        bottom = i;
    }
    if (top == bottom) return FeetEstimate::make_skipped("insufficient joints");

    const auto level_mid = [&](int i) {
        return ImagePoint{level_sum[i].x / level_count[i], level_sum[i].y / level_count[i]};
    };
    const ImagePoint top_mid = level_mid(top);
    const ImagePoint bottom_mid = level_mid(bottom);
    const double f_top = props.fraction(static_cast<BodyLevel>(top));
    const double f_bottom = props.fraction(static_cast<BodyLevel>(bottom));

    const ImagePoint start{line->x_at(bottom_mid.y), bottom_mid.y};
    ImagePoint feet{};
    if (mode == ExtensionMode::arc_length) {
        const double body_height_px =
            std::hypot(top_mid.x - bottom_mid.x, top_mid.y - bottom_mid.y) / (f_top - f_bottom);
        const double arc = f_bottom * body_height_px;
        const double norm = std::sqrt(1.0 + line->slope * line->slope);
        feet = ImagePoint{start.x + arc * line->slope / norm, start.y + arc / norm};
    } else {
        const double body_height_px = (bottom_mid.y - top_mid.y) / (f_top - f_bottom);
        const double y = start.y + f_bottom * body_height_px;
        feet = ImagePoint{line->x_at(y), y};
    }
    return FeetEstimate::make_found(feet, FeetMethod::extended);
}

} // namespace floorloc
