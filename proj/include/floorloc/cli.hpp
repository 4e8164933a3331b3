#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "floorloc/dataset.hpp"
#include "floorloc/errors.hpp"
#include "floorloc/evaluation.hpp"
#include "floorloc/pipeline.hpp"
#include "floorloc/synthetic.hpp"

namespace floorloc::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kUsage = 2;
inline constexpr int kParse = 3;      // parse and validation failures
inline constexpr int kDegenerate = 4; // degenerate geometry
inline constexpr int kIo = 5;

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const DegenerateCalibration*>(&e)) return kDegenerate;
    if (dynamic_cast<const ProjectiveHorizon*>(&e)) return kDegenerate;
    if (dynamic_cast<const CornerOutsideImage*>(&e)) return kDegenerate;
    if (dynamic_cast<const IoError*>(&e)) return kIo;
    if (dynamic_cast<const ParseError*>(&e)) return kParse;
    if (dynamic_cast<const ValidationError*>(&e)) return kParse;
    return kInternal;
}

// Runs a command body, mapping library errors to exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        fn();
        return kOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

// -----------------------------------------------------------------------------
// calibrate: solve the scene's homography and report parameters + residuals
// -----------------------------------------------------------------------------

struct CalibrateCmd {
    std::string scene_path;
    std::string out_path; // optional

    int execute(std::ostream& out, std::ostream& err) const {
        return guarded(err, [&] {
            const SceneConfig scene = load_scene_config(scene_path);
            const Homography h = scene.homography();
            std::string text;
            const auto param = [&](const char* k, double v) {
                text += std::string(k) + " = " + format_number(v) + "\n";
            };
            param("a", h.a); param("b", h.b); param("c", h.c); param("d", h.d);
            param("e", h.e); param("f", h.f); param("g", h.g); param("h", h.h);
            double worst = 0;
            const auto map_points = scene.map_points();
            for (int i = 0; i < 4; ++i) {
                const FloorPoint got = project_to_floor(h, scene.homography_points[i]);
                const double res = euclidean_error(map_points[i], got);
                worst = std::max(worst, res);
                text += "residual_" + std::to_string(i) + " = " + format_number(res) + "\n";
            }
            text += "max_residual = " + format_number(worst) + "\n";
            out << text;
            if (!out_path.empty()) detail::write_text_file(out_path, text);
        });
    }
};

// -----------------------------------------------------------------------------
// localize: detections -> positions CSV
// -----------------------------------------------------------------------------

struct LocalizeCmd {
    std::vector<std::string> scene_paths;
    std::vector<std::string> detection_paths;
    std::string method = "pose";
    double conf_threshold = kDefaultConfThreshold;
    double aspect = kDefaultBboxAspect;
    std::string proportions_path; // optional
    bool fuse = false;
    int jobs = 1;
    std::string out_path;

    int execute(std::ostream& out, std::ostream& err) const {
        return guarded(err, [&] {
            RunConfig cfg;
            const auto m = parse_method(method);
            if (!m) throw ValidationError("unknown method '" + method + "'");
            cfg.method = *m;
            cfg.conf_threshold = conf_threshold;
            cfg.bbox_aspect = aspect;
            cfg.fuse = fuse;
            cfg.jobs = jobs;
            if (jobs < 1) throw ValidationError("--jobs must be >= 1");
            if (!proportions_path.empty()) cfg.proportions = load_proportions(proportions_path);

            std::vector<std::filesystem::path> scenes(scene_paths.begin(), scene_paths.end());
            std::vector<std::filesystem::path> dets(detection_paths.begin(),
                                                    detection_paths.end());
            const RunResult result = run_files(scenes, dets, {}, cfg);
            save_track(result.final_track, out_path);
            std::int64_t predicted = 0;
            for (const auto& e : result.final_track.entries)
                if (e.position) ++predicted;
            out << "frames = " << result.final_track.entries.size() << "\n"
                << "predicted = " << predicted << "\n";
        });
    }
};

// -----------------------------------------------------------------------------
// fuse: per-camera positions CSVs -> fused positions CSV
// -----------------------------------------------------------------------------

struct FuseCmd {
    std::vector<std::string> scene_paths;
    std::vector<std::string> prediction_paths;
    std::string out_path;

    int execute(std::ostream& out, std::ostream& err) const {
        return guarded(err, [&] {
            if (scene_paths.size() != prediction_paths.size() || scene_paths.empty())
                throw ValidationError("need one positions file per scene");
            std::vector<SceneConfig> scenes;
            std::vector<PositionTrack> tracks;
            for (std::size_t i = 0; i < scene_paths.size(); ++i) {
                scenes.push_back(load_scene_config(scene_paths[i]));
                if (scenes.back().name.empty()) scenes.back().name = "cam" + std::to_string(i);
                tracks.push_back(load_track(prediction_paths[i]));
            }

            std::set<std::int64_t> universe;
            std::vector<std::map<std::int64_t, const TrackEntry*>> by_frame(tracks.size());
            for (std::size_t c = 0; c < tracks.size(); ++c)
                for (const auto& e : tracks[c].entries) {
                    universe.insert(e.frame_id);
                    by_frame[c][e.frame_id] = &e;
                }

            PositionTrack fused;
            for (const std::int64_t frame : universe) {
                std::vector<CameraEstimate> estimates;
                std::vector<const TrackEntry*> contributors;
                for (std::size_t c = 0; c < tracks.size(); ++c) {
                    const auto it = by_frame[c].find(frame);
                    const TrackEntry* found = it == by_frame[c].end() ? nullptr : it->second;
                    if (found && found->position) {
                        estimates.push_back(CameraEstimate::found(
                            scenes[c].name, *found->position,
                            camera_floor_distance(scenes[c].camera_config(),
                                                  *found->position)));
                        contributors.push_back(found);
                    } else {
                        estimates.push_back(CameraEstimate::missing(scenes[c].name));
                    }
                }
                const FusedEstimate f = fuse_many(estimates);
                TrackEntry entry;
                entry.frame_id = frame;
                if (f.position) {
                    entry.position = f.position;
                    entry.cameras = f.contributors;
                    entry.method = floorloc::detail::fused_method(contributors);
                }
                fused.entries.push_back(std::move(entry));
            }
            save_track(fused, out_path);
            out << "frames = " << fused.entries.size() << "\n";
        });
    }
};

// -----------------------------------------------------------------------------
// evaluate: positions CSV + annotations -> report (+ CDF CSV)
// -----------------------------------------------------------------------------

struct EvaluateCmd {
    std::string predictions_path;
    std::vector<std::string> annotation_paths; // 1 or 2 (merged)
    std::string scene_path;  // optional: adds error-vs-distance correlation
    std::string labels_path; // optional: adds per-scenario blocks
    std::string out_path;
    std::string cdf_out_path; // optional

    int execute(std::ostream& out, std::ostream& err) const {
        return guarded(err, [&] {
            if (annotation_paths.empty() || annotation_paths.size() > 2)
                throw ValidationError("evaluate needs one or two --annotations files");
            const PositionTrack track = load_track(predictions_path);
            std::vector<AnnotationRecord> gt = load_annotations(annotation_paths[0]);
            if (annotation_paths.size() == 2) {
                const auto b = load_annotations(annotation_paths[1]);
                gt = merge_ground_truth(gt, b);
            }
            const auto predictions = track.predictions();
            const EvalReport report = evaluate_run(predictions, gt);
            std::string text = serialize_report(report);
            if (!scene_path.empty()) {
                const SceneConfig scene = load_scene_config(scene_path);
                const DistanceErrorSeries series =
                    error_vs_distance(predictions, gt, scene.camera_config());
                text += "distance_correlation = " + format_number(series.correlation) + "\n";
                text += "distance_correlation_degenerate = " +
                        std::string(series.degenerate ? "1" : "0") + "\n";
            }
            if (!labels_path.empty()) {
                const auto labels = load_labels(labels_path);
                for (const auto& [label, sub] : group_by_scenario(predictions, gt, labels)) {
                    text += "scenario." + label + ".n_frames = " + std::to_string(sub.n_frames) + "\n";
                    text += "scenario." + label + ".missing_fraction = " +
                            format_number(sub.missing_fraction) + "\n";
                    text += "scenario." + label + ".mean_error_cm = " +
                            format_number(sub.mean) + "\n";
                }
            }
            detail::write_text_file(out_path, text);
            if (!cdf_out_path.empty()) detail::write_text_file(cdf_out_path, serialize_cdf(report.cdf));
            out << text;
        });
    }
};

// -----------------------------------------------------------------------------
// synth: deterministic synthetic corpus -> directory of dataset files
// -----------------------------------------------------------------------------

struct SynthCmd {
    std::string out_dir;
    std::uint64_t seed = 0;
    int frames = 100;
    int cameras = 1;
    double jitter_sigma_px = 0;
    std::vector<std::string> occlude; // body level names
    std::string proportions_path;     // optional
    double person_height = 170;
    double grid_width = 540;
    double grid_height = 300;
    double camera_height = 280;

    int execute(std::ostream& out, std::ostream& err) const {
        return guarded(err, [&] {
            CorpusSpec spec;
            spec.n_frames = frames;
            spec.seed = seed;
            spec.n_cameras = cameras;
            spec.jitter_sigma_px = jitter_sigma_px;
            spec.person_height = person_height;
            spec.grid_width = grid_width;
            spec.grid_height = grid_height;
            spec.camera_height = camera_height;
            if (!proportions_path.empty()) spec.proportions = load_proportions(proportions_path);
            for (const auto& name : occlude) {
                const auto level = parse_body_level(name);
                if (!level) throw ValidationError("unknown body level '" + name + "'");
                spec.occluded.insert(*level);
            }
            const SyntheticCorpus corpus = generate_corpus(spec);
            write_corpus(corpus, out_dir);
            out << "frames = " << corpus.annotations.size() << "\n"
                << "cameras = " << corpus.scenes.size() << "\n";
        });
    }
};

} // namespace floorloc::cli
