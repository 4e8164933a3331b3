#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "floorloc/dataset.hpp"
#include "floorloc/errors.hpp"
#include "floorloc/evaluation.hpp"
#include "floorloc/feet.hpp"
#include "floorloc/fusion.hpp"
#include "floorloc/geometry.hpp"

namespace floorloc {

enum class Method : int { pose, bbox, bbox_extended };

inline std::string_view method_string(Method m) {
    switch (m) {
    case Method::pose: return "pose";
    case Method::bbox: return "bbox";
    case Method::bbox_extended: return "bbox-extended";
    }
    return {};
}

inline std::optional<Method> parse_method(std::string_view s) {
    if (s == "pose") return Method::pose;
    if (s == "bbox") return Method::bbox;
    if (s == "bbox-extended" || s == "bbox_extended") return Method::bbox_extended;
    return std::nullopt;
}

struct RunConfig {
    Method method = Method::pose;
    double conf_threshold = kDefaultConfThreshold;
    BodyProportions proportions{};
    double bbox_aspect = kDefaultBboxAspect; // target height/width for bbox-extended
    ExtensionMode extension = ExtensionMode::arc_length;
    bool fuse = false;
    int jobs = 1;
};

// =============================================================================
// Per-frame localization
// =============================================================================

struct LocalizedPoint {
    FloorPoint position{};
    FeetMethod method = FeetMethod::bbox;
};

// Feet estimation per the configured method followed by the homography
// projection. Absent when the frame is skipped (insufficient joints, payload
// kind not matching the method, confidence below threshold) or the feet
// point falls on the projective horizon.
inline std::optional<LocalizedPoint> localize_frame(const DetectionRecord& det,
                                                    const Homography& h,
                                                    const RunConfig& cfg) {
    FeetEstimate feet = FeetEstimate::make_skipped("no usable detection");
    switch (cfg.method) {
    case Method::pose: {
        const auto* skel = std::get_if<Skeleton>(&det.payload);
        if (!skel) return std::nullopt;
        feet = feet_from_skeleton(*skel, cfg.proportions, cfg.conf_threshold, cfg.extension);
        break;
    }
    case Method::bbox: {
        const auto* box = std::get_if<BoundingBox>(&det.payload);
        if (!box || box->confidence < cfg.conf_threshold) return std::nullopt;
        feet = feet_from_bbox(*box);
        break;
    }
    case Method::bbox_extended: {
        const auto* box = std::get_if<BoundingBox>(&det.payload);
        if (!box || box->confidence < cfg.conf_threshold) return std::nullopt;
        feet = feet_from_bbox(extend_bbox(*box, cfg.bbox_aspect));
        feet.method = FeetMethod::bbox_extended;
        break;
    }
    }
    if (!feet.found()) return std::nullopt;
    try {
        return LocalizedPoint{project_to_floor(h, *feet.point), feet.method};
    } catch (const ProjectiveHorizon&) {
        return std::nullopt;
    }
}

// =============================================================================
// Tracks
// =============================================================================

// method is one of ankles|extended|bbox|bbox_extended for single-camera
// entries, the shared method or "mixed" for fused entries, and "missing"
// when the position is absent.
struct TrackEntry {
    std::int64_t frame_id = 0;
    std::optional<FloorPoint> position;
    std::string method = "missing";
    std::vector<std::string> cameras;
};

struct PositionTrack {
    std::vector<TrackEntry> entries; // strictly increasing frame ids

    std::vector<FramePrediction> predictions() const {
        std::vector<FramePrediction> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(FramePrediction{e.frame_id, e.position});
        return out;
    }
};

// positions CSV: frame_id,X,Y,method,cameras (headerless; empty X,Y and
// method "missing" for absent frames; cameras ';'-joined)
inline std::string serialize_track(const PositionTrack& track) {
    std::string out;
    for (const auto& e : track.entries) {
        out += std::to_string(e.frame_id) + ",";
        if (e.position)
            out += format_number(e.position->x) + "," + format_number(e.position->y);
        else
            out += ",";
        out += "," + e.method + ",";
        for (std::size_t i = 0; i < e.cameras.size(); ++i) {
            if (i) out += ";";
            out += e.cameras[i];
        }
        out += "\n";
    }
    return out;
}

inline PositionTrack parse_track(std::string_view text, std::string_view source) {
    PositionTrack track;
    const auto lines = split(text, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split(line, ',');
        if (fields.size() != 5)
            throw ParseError(std::string(source), lineno,
                             "expected frame_id,X,Y,method,cameras");
        TrackEntry e;
        e.frame_id = detail::parse_frame_id(fields[0], source, lineno);
        const std::string_view xs = trim(fields[1]), ys = trim(fields[2]);
        if (xs.empty() != ys.empty())
            throw ParseError(std::string(source), lineno, "X and Y must both be set or both empty");
        if (!xs.empty())
            e.position = FloorPoint{detail::parse_number_or_throw(xs, source, lineno, "X"),
                                    detail::parse_number_or_throw(ys, source, lineno, "Y")};
        e.method = std::string(trim(fields[3]));
        for (const auto& cam : split(trim(fields[4]), ';'))
            if (!trim(cam).empty()) e.cameras.emplace_back(trim(cam));
        track.entries.push_back(std::move(e));
    }
    detail::check_frame_order(track.entries, source);
    return track;
}

inline PositionTrack load_track(const std::filesystem::path& path) {
    return parse_track(detail::read_text_file(path), path.string());
}

inline void save_track(const PositionTrack& track, const std::filesystem::path& path) {
    detail::write_text_file(path, serialize_track(track));
}

// =============================================================================
// Whole-run orchestration
// =============================================================================

struct CameraInput {
    SceneConfig scene;
    std::vector<DetectionRecord> detections; // unique frame ids
};

struct RunResult {
    std::vector<PositionTrack> camera_tracks;
    PositionTrack final_track; // fused track, or the single camera's
    std::optional<EvalReport> report;
};

namespace detail {

// Frames are independent; workers fill disjoint slices of the output vector,
// so results do not depend on the worker count.
template <typename Fn>
void parallel_frames(std::size_t n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers;
        const std::size_t hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline std::string fused_method(const std::vector<const TrackEntry*>& contributors) {
    std::string method;
    for (const auto* e : contributors) {
        if (method.empty()) method = e->method;
        else if (method != e->method) return "mixed";
    }
    return method;
}

} // namespace detail

// Localizes every camera's detections, fuses per frame when enabled, and
// scores the final track against the ground truth (when provided). The track
// covers the union of detection and visible ground-truth frame ids; frames
// without a usable detection get an explicit missing entry.
inline RunResult run(std::span<const CameraInput> cameras,
                     std::span<const AnnotationRecord> ground_truth, const RunConfig& cfg) {
    if (cameras.empty()) throw ValidationError("run needs at least one camera");
    if (cameras.size() > 1 && !cfg.fuse)
        throw ValidationError("multiple cameras require fusion to produce a single track");
    cfg.proportions.validate();

    std::set<std::int64_t> universe;
    for (const auto& cam : cameras) {
        cam.scene.validate();
        std::set<std::int64_t> seen;
        for (const auto& det : cam.detections)
            if (!seen.insert(det.frame_id).second)
                throw DuplicateFrame("duplicate detection for frame " +
                                     std::to_string(det.frame_id));
        universe.insert(seen.begin(), seen.end());
    }
    for (const auto& gt : ground_truth)
        if (gt.visible) universe.insert(gt.frame_id);
    const std::vector<std::int64_t> frames(universe.begin(), universe.end());

    RunResult result;
    for (const auto& cam : cameras) {
        const Homography h = cam.scene.homography();
        std::map<std::int64_t, const DetectionRecord*> by_frame;
        for (const auto& det : cam.detections) by_frame[det.frame_id] = &det;

        PositionTrack track;
        track.entries.resize(frames.size());
        detail::parallel_frames(frames.size(), cfg.jobs, [&](std::size_t i) {
            TrackEntry entry;
            entry.frame_id = frames[i];
            const auto it = by_frame.find(frames[i]);
            if (it != by_frame.end()) {
                if (const auto localized = localize_frame(*it->second, h, cfg)) {
                    entry.position = localized->position;
                    entry.method = std::string(feet_method_string(localized->method));
                    entry.cameras = {cam.scene.name};
                }
            }
            track.entries[i] = std::move(entry);
        });
        result.camera_tracks.push_back(std::move(track));
    }

    if (cameras.size() == 1 && !cfg.fuse) {
        result.final_track = result.camera_tracks.front();
    } else {
        std::vector<CameraConfig> cam_cfgs;
        for (const auto& cam : cameras) cam_cfgs.push_back(cam.scene.camera_config());
        PositionTrack fused;
        fused.entries.resize(frames.size());
        for (std::size_t i = 0; i < frames.size(); ++i) {
            std::vector<CameraEstimate> estimates;
            std::vector<const TrackEntry*> contributors;
            for (std::size_t c = 0; c < cameras.size(); ++c) {
                const TrackEntry& e = result.camera_tracks[c].entries[i];
                if (e.position) {
                    estimates.push_back(CameraEstimate::found(
                        cameras[c].scene.name, *e.position,
                        camera_floor_distance(cam_cfgs[c], *e.position)));
                    contributors.push_back(&e);
                } else {
                    estimates.push_back(CameraEstimate::missing(cameras[c].scene.name));
                }
            }
            const FusedEstimate f = fuse_many(estimates);
            TrackEntry entry;
            entry.frame_id = frames[i];
            if (f.position) {
                entry.position = f.position;
                entry.cameras = f.contributors;
                entry.method = detail::fused_method(contributors);
            }
            fused.entries[i] = std::move(entry);
        }
        result.final_track = std::move(fused);
    }

    if (!ground_truth.empty())
        result.report = evaluate_run(result.final_track.predictions(), ground_truth);
    return result;
}

// Path-based front end: loads scene configs and detection files (paired by
// order), one or two annotation files (two are merged), then runs.
inline RunResult run_files(std::span<const std::filesystem::path> scene_paths,
                           std::span<const std::filesystem::path> detection_paths,
                           std::span<const std::filesystem::path> annotation_paths,
                           const RunConfig& cfg) {
    if (scene_paths.size() != detection_paths.size())
        throw ValidationError("need one detections file per scene (got " +
                              std::to_string(scene_paths.size()) + " scenes, " +
                              std::to_string(detection_paths.size()) + " detection files)");
    std::vector<CameraInput> cameras;
    for (std::size_t i = 0; i < scene_paths.size(); ++i) {
        CameraInput input;
        input.scene = load_scene_config(scene_paths[i]);
        if (input.scene.name.empty()) input.scene.name = "cam" + std::to_string(i);
        input.detections = load_detections(detection_paths[i]);
        cameras.push_back(std::move(input));
    }
    std::vector<AnnotationRecord> ground_truth;
    if (annotation_paths.size() == 1) {
        ground_truth = load_annotations(annotation_paths[0]);
    } else if (annotation_paths.size() == 2) {
        const auto a = load_annotations(annotation_paths[0]);
        const auto b = load_annotations(annotation_paths[1]);
        ground_truth = merge_ground_truth(a, b);
    } else if (!annotation_paths.empty()) {
        throw ValidationError("at most two annotation files are supported");
    }
    return run(cameras, ground_truth, cfg);
}

} // namespace floorloc
