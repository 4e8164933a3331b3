#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "floorloc/dataset.hpp"
#include "floorloc/errors.hpp"
#include "floorloc/feet.hpp"
#include "floorloc/geometry.hpp"

namespace floorloc {

// =============================================================================
// Deterministic random streams
//
// Distribution mappings are hand-rolled on top of mt19937_64 so that corpora
// are byte-identical for a given seed on every platform.
// =============================================================================

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, second value cached.
    double gaussian(double sigma) {
        if (cached_) {
            cached_ = false;
            return cache_ * sigma;
        }
        double u1 = uniform01();
        while (u1 == 0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        cache_ = r * std::sin(two_pi * u2);
        cached_ = true;
        return r * std::cos(two_pi * u2) * sigma;
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 gen_;
    bool cached_ = false;
    double cache_ = 0;
};

// =============================================================================
// Pinhole camera
// =============================================================================

struct WorldPoint {
    double x = 0, y = 0, z = 0; // cm, z up from the floor
};

// Distortion-free pinhole camera in floor coordinates. yaw 0 looks along +Y;
// pitch 0 is horizontal, positive pitch tilts toward the floor.
struct PinholeCamera {
    WorldPoint position{};     // lens centre; position.z is the height above the floor
    double yaw_rad = 0;
    double pitch_rad = 0;
    double focal_px = 0;
    double principal_x = 0;
    double principal_y = 0;
    double image_width = 0;
    double image_height = 0;

    void validate() const {
        if (!(position.z > 0)) throw ValidationError("camera height must be > 0");
        if (!(focal_px > 0)) throw ValidationError("focal length must be > 0");
        if (!(image_width > 0) || !(image_height > 0))
            throw ValidationError("image dimensions must be > 0");
    }

    CameraConfig camera_config() const {
        return CameraConfig{position.z, FloorPoint{position.x, position.y}, image_width,
                            image_height};
    }
};

// Perspective projection; nullopt when the point is at or behind the camera
// plane (depth <= 0).
inline std::optional<ImagePoint> project_point(const PinholeCamera& cam, const WorldPoint& p) {
    const double dx = p.x - cam.position.x;
    const double dy = p.y - cam.position.y;
    const double dz = p.z - cam.position.z;
    const double sy = std::sin(cam.yaw_rad), cy = std::cos(cam.yaw_rad);
    const double sp = std::sin(cam.pitch_rad), cp = std::cos(cam.pitch_rad);
    // basis: right, image-down, forward
    const double right = dx * cy - dy * sy;
    const double ahead = dx * sy + dy * cy;
    const double depth = ahead * cp - dz * sp;
    const double down = -(ahead * sp + dz * cp);
    if (!(depth > 0)) return std::nullopt;
    return ImagePoint{cam.principal_x + cam.focal_px * right / depth,
                      cam.principal_y + cam.focal_px * down / depth};
}

// =============================================================================
// Stick person
//
// A vertical (optionally leaned) midline with level-symmetric joint pairs.
// Ankle keypoints sit at the sole, ankle - ankle_ground above the ground, so
// an unoccluded detection pins the true ground contact. Arms hang at the
// sides with the wrists on the hip line.
// =============================================================================

struct StickPerson {
    FloorPoint position{};   // ground contact of the midline
    double height_cm = 170;
    BodyProportions proportions{};
    double facing_yaw_rad = 0; // direction of the lateral (left-right) axis
    double lean = 0;           // lateral midline offset per cm of height

    // midline joints
    double nose_fraction = 0.92;
    double neck_fraction = 0.86;
    // arm joints (not part of any complementary pair)
    double elbow_fraction = 0.65;

    // lateral half-widths, cm
    double eye_halfwidth = 4;
    double ear_halfwidth = 8;
    double shoulder_halfwidth = 20;
    double elbow_halfwidth = 22;
    double wrist_halfwidth = 18;
    double hip_halfwidth = 16;
    double knee_halfwidth = 10;
    double ankle_halfwidth = 8;
};

namespace detail {

struct JointPlacement {
    double fraction;  // of standing height, from the ground
    double lateral;   // signed half-width, cm
    BodyLevel occlusion_level;
};

inline JointPlacement joint_placement(const StickPerson& p, JointName j) {
    const auto& pr = p.proportions;
    const double sole = pr.ankle - pr.ankle_ground;
    switch (j) {
    case JointName::nose: return {p.nose_fraction, 0, BodyLevel::eye};
    case JointName::neck: return {p.neck_fraction, 0, BodyLevel::shoulder};
    case JointName::left_eye: return {pr.eye, +p.eye_halfwidth, BodyLevel::eye};
    case JointName::right_eye: return {pr.eye, -p.eye_halfwidth, BodyLevel::eye};
    case JointName::left_ear: return {pr.eye, +p.ear_halfwidth, BodyLevel::eye};
    case JointName::right_ear: return {pr.eye, -p.ear_halfwidth, BodyLevel::eye};
    case JointName::left_shoulder: return {pr.shoulder, +p.shoulder_halfwidth, BodyLevel::shoulder};
    case JointName::right_shoulder: return {pr.shoulder, -p.shoulder_halfwidth, BodyLevel::shoulder};
    case JointName::left_elbow: return {p.elbow_fraction, +p.elbow_halfwidth, BodyLevel::shoulder};
    case JointName::right_elbow: return {p.elbow_fraction, -p.elbow_halfwidth, BodyLevel::shoulder};
    case JointName::left_wrist: return {pr.hip, +p.wrist_halfwidth, BodyLevel::hip};
    case JointName::right_wrist: return {pr.hip, -p.wrist_halfwidth, BodyLevel::hip};
    case JointName::left_hip: return {pr.hip, +p.hip_halfwidth, BodyLevel::hip};
    case JointName::right_hip: return {pr.hip, -p.hip_halfwidth, BodyLevel::hip};
    case JointName::left_knee: return {pr.knee, +p.knee_halfwidth, BodyLevel::knee};
    case JointName::right_knee: return {pr.knee, -p.knee_halfwidth, BodyLevel::knee};
    case JointName::left_ankle: return {sole, +p.ankle_halfwidth, BodyLevel::ankle};
    case JointName::right_ankle: return {sole, -p.ankle_halfwidth, BodyLevel::ankle};
    }
    return {0, 0, BodyLevel::ankle}; // unreachable
}

} // namespace detail

inline WorldPoint joint_world_position(const StickPerson& p, JointName j) {
    const auto placement = detail::joint_placement(p, j);
    const double z = placement.fraction * p.height_cm;
    const double offset = p.lean * z + placement.lateral;
    return WorldPoint{p.position.x + offset * std::cos(p.facing_yaw_rad),
                      p.position.y + offset * std::sin(p.facing_yaw_rad), z};
}

// =============================================================================
// Frame synthesis
// =============================================================================

struct SynthFrame {
    DetectionRecord skeleton;
    DetectionRecord bbox;
    AnnotationRecord annotation;
};

// Projects the person into the camera, deleting the joints whose level is
// occluded. The bbox is the tight box over the visible projected joints;
// occlusion sets that leave no vertical or lateral extent (for example
// ankles only) are rejected. All confidences are 1.
inline SynthFrame synth_frame(std::int64_t frame_id, const PinholeCamera& cam,
                              const StickPerson& person,
                              const std::set<BodyLevel>& occluded = {}) {
    cam.validate();
    person.proportions.validate();

    Skeleton skel;
    double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
    int n_visible = 0;
    for (int j = 0; j < kJointCount; ++j) {
        const auto name = static_cast<JointName>(j);
        if (occluded.count(detail::joint_placement(person, name).occlusion_level)) continue;
        const auto projected = project_point(cam, joint_world_position(person, name));
        if (!projected)
            throw ValidationError("joint " + std::string(joint_name_string(name)) +
                                  " is behind the camera");
        skel.set(name, *projected, 1.0);
        if (n_visible == 0) {
            x_min = x_max = projected->x;
            y_min = y_max = projected->y;
        } else {
            x_min = std::min(x_min, projected->x);
            x_max = std::max(x_max, projected->x);
            y_min = std::min(y_min, projected->y);
            y_max = std::max(y_max, projected->y);
        }
        ++n_visible;
    }
    if (n_visible == 0) throw FullyOccluded("occlusion removed every joint");
    if (!(x_min < x_max) || !(y_min < y_max))
        throw ValidationError("visible joints have no image extent for a bounding box");

    SynthFrame out;
    out.skeleton = DetectionRecord{frame_id, skel, "skeleton"};
    out.bbox = DetectionRecord{frame_id, BoundingBox{x_min, y_min, x_max, y_max, 1.0}, "bbox"};
    out.annotation = AnnotationRecord{frame_id, person.position, true};
    return out;
}

// =============================================================================
// Grid calibration
// =============================================================================

struct GridCalibration {
    std::array<ImagePoint, 4> image_points{};
    std::array<FloorPoint, 4> floor_points{};
};

// Projects the grid corners, paired with their floor coordinates in the
// canonical corner order, ready for solve_homography.
inline GridCalibration calibration_from_grid(const PinholeCamera& cam, double grid_width,
                                             double grid_height) {
    cam.validate();
    GridCalibration calib;
    calib.floor_points = grid_corner_map_points(grid_width, grid_height);
    for (int i = 0; i < 4; ++i) {
        const FloorPoint c = calib.floor_points[i];
        const auto projected = project_point(cam, WorldPoint{c.x, c.y, 0});
        if (!projected || projected->x < 0 || projected->x > cam.image_width ||
            projected->y < 0 || projected->y > cam.image_height)
            throw CornerOutsideImage("grid corner " + std::to_string(i) +
                                     " does not project inside the image");
        calib.image_points[i] = *projected;
    }
    return calib;
}

inline SceneConfig scene_config_from_camera(const PinholeCamera& cam, double grid_width,
                                            double grid_height, std::string name) {
    SceneConfig cfg;
    cfg.name = std::move(name);
    cfg.image_width = cam.image_width;
    cfg.image_height = cam.image_height;
    cfg.camera_height = cam.position.z;
    cfg.camera_ground = FloorPoint{cam.position.x, cam.position.y};
    cfg.grid_width = grid_width;
    cfg.grid_height = grid_height;
    cfg.homography_points = calibration_from_grid(cam, grid_width, grid_height).image_points;
    cfg.validate();
    return cfg;
}

// =============================================================================
// Corpus generation
// =============================================================================

// Front camera centred before the near edge. Pitch 0: restricted to any
// vertical line the projection is affine, which keeps the stick-person model
// exact for the extension algorithm.
inline PinholeCamera default_front_camera(double grid_width, double /*grid_height*/,
                                          double height_cm, double standoff_cm = 200) {
    PinholeCamera cam;
    cam.position = WorldPoint{grid_width / 2.0, -standoff_cm, height_cm};
    cam.yaw_rad = 0;
    cam.pitch_rad = 0;
    cam.focal_px = 640;
    cam.principal_x = 900;
    cam.principal_y = 1000;
    cam.image_width = 1800;
    cam.image_height = 2000;
    return cam;
}

// Second perspective from the right-hand side, perpendicular to the front
// camera, sharing the same floor origin.
inline PinholeCamera default_side_camera(double grid_width, double grid_height,
                                         double height_cm, double standoff_cm = 200) {
    PinholeCamera cam;
    cam.position = WorldPoint{grid_width + standoff_cm, grid_height / 2.0, height_cm};
    cam.yaw_rad = -1.5707963267948966; // looking along -X
    cam.pitch_rad = 0;
    cam.focal_px = 640;
    cam.principal_x = 900;
    cam.principal_y = 1000;
    cam.image_width = 1800;
    cam.image_height = 2000;
    return cam;
}

struct CorpusSpec {
    int n_frames = 100;
    std::uint64_t seed = 0;
    int n_cameras = 1; // 1 or 2 (front, then side)
    double grid_width = 540;
    double grid_height = 300;
    double camera_height = 280;      // front camera
    double side_camera_height = 180; // side camera, when present
    double person_height = 170;
    BodyProportions proportions{};
    std::set<BodyLevel> occluded{};
    double jitter_sigma_px = 0;
    std::vector<double> dropout_rates{};   // per camera; absent entries mean 0
    std::vector<FloorPoint> positions{};   // explicit path; random inside the grid when empty
    std::optional<double> facing_yaw_rad{}; // default: 0 for one camera, 0.45 for two
};

struct SyntheticCorpus {
    std::vector<PinholeCamera> cameras;
    std::vector<SceneConfig> scenes;
    std::vector<std::vector<DetectionRecord>> skeleton_detections; // per camera
    std::vector<std::vector<DetectionRecord>> bbox_detections;     // per camera
    std::vector<AnnotationRecord> annotations;
};

namespace detail {

inline void jitter_skeleton(Skeleton& s, Rng& rng, double sigma) {
    for (int j = 0; j < kJointCount; ++j) {
        const auto name = static_cast<JointName>(j);
        const auto& joint = s.get(name);
        if (!joint) continue;
        const ImagePoint p{joint->point.x + rng.gaussian(sigma),
                           joint->point.y + rng.gaussian(sigma)};
        s.set(name, p, joint->confidence);
    }
}

inline void jitter_bbox(BoundingBox& b, Rng& rng, double sigma) {
    double x0 = b.x_min + rng.gaussian(sigma);
    double y0 = b.y_min + rng.gaussian(sigma);
    double x1 = b.x_max + rng.gaussian(sigma);
    double y1 = b.y_max + rng.gaussian(sigma);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    if (x0 == x1) x1 = x0 + 0.5; // keep the box valid under extreme jitter
    if (y0 == y1) y1 = y0 + 0.5;
    b = BoundingBox{x0, y0, x1, y1, b.confidence};
}

} // namespace detail

inline SyntheticCorpus generate_corpus(const CorpusSpec& spec) {
    if (spec.n_cameras < 1 || spec.n_cameras > 2)
        throw ValidationError("corpus supports 1 or 2 cameras");
    if (spec.n_frames < 1 && spec.positions.empty())
        throw ValidationError("corpus needs at least one frame");

    SyntheticCorpus corpus;
    corpus.cameras.push_back(
        default_front_camera(spec.grid_width, spec.grid_height, spec.camera_height));
    if (spec.n_cameras == 2)
        corpus.cameras.push_back(
            default_side_camera(spec.grid_width, spec.grid_height, spec.side_camera_height));
    for (std::size_t c = 0; c < corpus.cameras.size(); ++c)
        corpus.scenes.push_back(scene_config_from_camera(
            corpus.cameras[c], spec.grid_width, spec.grid_height, "cam" + std::to_string(c)));

    std::vector<FloorPoint> positions = spec.positions;
    if (positions.empty()) {
        Rng rng(splitmix64(spec.seed));
        const double mx = 0.05 * spec.grid_width, my = 0.05 * spec.grid_height;
        positions.reserve(static_cast<std::size_t>(spec.n_frames));
        for (int f = 0; f < spec.n_frames; ++f)
            positions.push_back(FloorPoint{rng.uniform(mx, spec.grid_width - mx),
                                           rng.uniform(my, spec.grid_height - my)});
    }

    const double facing = spec.facing_yaw_rad.value_or(spec.n_cameras == 2 ? 0.45 : 0.0);

    std::vector<Rng> jitter_rngs, dropout_rngs;
    for (std::size_t c = 0; c < corpus.cameras.size(); ++c) {
        jitter_rngs.emplace_back(splitmix64(spec.seed ^ (0xA110'0000ULL + c)));
        dropout_rngs.emplace_back(splitmix64(spec.seed ^ (0xD120'0000ULL + c)));
    }
    corpus.skeleton_detections.resize(corpus.cameras.size());
    corpus.bbox_detections.resize(corpus.cameras.size());

    for (std::size_t f = 0; f < positions.size(); ++f) {
        StickPerson person;
        person.position = positions[f];
        person.height_cm = spec.person_height;
        person.proportions = spec.proportions;
        person.facing_yaw_rad = facing;
        const auto frame_id = static_cast<std::int64_t>(f);
        corpus.annotations.push_back(AnnotationRecord{frame_id, positions[f], true});
        for (std::size_t c = 0; c < corpus.cameras.size(); ++c) {
            const double rate = c < spec.dropout_rates.size() ? spec.dropout_rates[c] : 0.0;
            if (rate > 0 && dropout_rngs[c].bernoulli(rate)) continue;
            SynthFrame frame = synth_frame(frame_id, corpus.cameras[c], person, spec.occluded);
            if (spec.jitter_sigma_px > 0) {
                detail::jitter_skeleton(std::get<Skeleton>(frame.skeleton.payload),
                                        jitter_rngs[c], spec.jitter_sigma_px);
                detail::jitter_bbox(std::get<BoundingBox>(frame.bbox.payload), jitter_rngs[c],
                                    spec.jitter_sigma_px);
            }
            corpus.skeleton_detections[c].push_back(std::move(frame.skeleton));
            corpus.bbox_detections[c].push_back(std::move(frame.bbox));
        }
    }
    return corpus;
}

// Writes a corpus in the dataset module's on-disk formats:
// scene_cam<i>.cfg, detections_cam<i>_{skeleton,bbox}.txt, annotations.csv.
inline void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    for (std::size_t c = 0; c < corpus.scenes.size(); ++c) {
        const std::string tag = "cam" + std::to_string(c);
        save_scene_config(corpus.scenes[c], dir / ("scene_" + tag + ".cfg"));
        save_detections(corpus.skeleton_detections[c],
                        dir / ("detections_" + tag + "_skeleton.txt"));
        save_detections(corpus.bbox_detections[c], dir / ("detections_" + tag + "_bbox.txt"));
    }
    save_annotations(corpus.annotations, dir / "annotations.csv");
}

} // namespace floorloc
