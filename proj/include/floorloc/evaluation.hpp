#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "floorloc/dataset.hpp"
#include "floorloc/errors.hpp"
#include "floorloc/geometry.hpp"
#include "floorloc/util.hpp"

namespace floorloc {

inline double euclidean_error(FloorPoint gt, FloorPoint pred) {
    return std::hypot(gt.x - pred.x, gt.y - pred.y);
}

// A run's output for one frame; absent position means a missing prediction.
struct FramePrediction {
    std::int64_t frame_id = 0;
    std::optional<FloorPoint> position;
};

struct CdfPoint {
    double error_cm = 0;
    double fraction = 0;
};

// Empirical CDF of the error sample: sorted errors against rank/n.
inline std::vector<CdfPoint> error_cdf(std::span<const double> errors) {
    if (errors.empty()) throw EmptyInput("error_cdf needs at least one error value");
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<CdfPoint> cdf(sorted.size());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        cdf[i] = CdfPoint{sorted[i], static_cast<double>(i + 1) / n};
    return cdf;
}

// Error statistics over frames with visible ground truth. Frames without a
// prediction are counted in missing_fraction and excluded from the error
// statistics. Stdev is the population form. Sums are pairwise in frame-id
// order so reports are reproducible regardless of worker count.
struct EvalReport {
    double mean = 0;  // cm
    double stdev = 0; // cm
    double min = 0;   // cm
    double max = 0;   // cm
    double missing_fraction = 0;
    std::vector<CdfPoint> cdf;
    std::int64_t n_frames = 0;    // visible ground-truth frames
    std::int64_t n_predicted = 0; // of those, frames with a prediction
};

inline EvalReport evaluate_run(std::span<const FramePrediction> predictions,
                               std::span<const AnnotationRecord> ground_truth) {
    std::unordered_map<std::int64_t, std::optional<FloorPoint>> by_frame;
    by_frame.reserve(predictions.size());
    for (const auto& p : predictions) {
        if (!by_frame.emplace(p.frame_id, p.position).second)
            throw ValidationError("duplicate prediction for frame " + std::to_string(p.frame_id));
    }

    std::vector<const AnnotationRecord*> visible;
    for (const auto& gt : ground_truth)
        if (gt.visible) visible.push_back(&gt);
    std::sort(visible.begin(), visible.end(),
              [](const AnnotationRecord* a, const AnnotationRecord* b) {
                  return a->frame_id < b->frame_id;
              });
    if (visible.empty()) throw EmptyGroundTruth("no visible ground-truth frames");

    std::vector<double> errors; // frame-id order
    errors.reserve(visible.size());
    for (const auto* gt : visible) {
        const auto it = by_frame.find(gt->frame_id);
        if (it == by_frame.end() || !it->second) continue;
        errors.push_back(euclidean_error(gt->position, *it->second));
    }

    EvalReport report;
    report.n_frames = static_cast<std::int64_t>(visible.size());
    report.n_predicted = static_cast<std::int64_t>(errors.size());
    report.missing_fraction = static_cast<double>(report.n_frames - report.n_predicted) /
                              static_cast<double>(report.n_frames);
    if (!errors.empty()) {
        const double n = static_cast<double>(errors.size());
        report.mean = pairwise_sum(errors) / n;
        std::vector<double> sq(errors.size());
        for (std::size_t i = 0; i < errors.size(); ++i) {
            const double d = errors[i] - report.mean;
            sq[i] = d * d;
        }
        report.stdev = std::sqrt(pairwise_sum(sq) / n);
        report.min = *std::min_element(errors.begin(), errors.end());
        report.max = *std::max_element(errors.begin(), errors.end());
        report.cdf = error_cdf(errors);
    }
    return report;
}

// =============================================================================
// Error vs camera distance
// =============================================================================

struct DistanceErrorSeries {
    std::vector<std::pair<double, double>> pairs; // (distance cm, error cm), frame-id order
    double correlation = 0;                       // Pearson
    bool degenerate = false; // zero variance in either series; correlation reported as 0
};

inline DistanceErrorSeries error_vs_distance(std::span<const FramePrediction> predictions,
                                             std::span<const AnnotationRecord> ground_truth,
                                             const CameraConfig& cam) {
    std::unordered_map<std::int64_t, std::optional<FloorPoint>> by_frame;
    for (const auto& p : predictions) by_frame[p.frame_id] = p.position;

    std::vector<const AnnotationRecord*> visible;
    for (const auto& gt : ground_truth)
        if (gt.visible) visible.push_back(&gt);
    std::sort(visible.begin(), visible.end(),
              [](const AnnotationRecord* a, const AnnotationRecord* b) {
                  return a->frame_id < b->frame_id;
              });

    DistanceErrorSeries series;
    for (const auto* gt : visible) {
        const auto it = by_frame.find(gt->frame_id);
        if (it == by_frame.end() || !it->second) continue;
        series.pairs.emplace_back(camera_floor_distance(cam, gt->position),
                                  euclidean_error(gt->position, *it->second));
    }
    if (series.pairs.size() < 2)
        throw InsufficientData("error_vs_distance needs at least 2 predicted frames, got " +
                               std::to_string(series.pairs.size()));

    const double n = static_cast<double>(series.pairs.size());
    std::vector<double> ds(series.pairs.size()), es(series.pairs.size());
    for (std::size_t i = 0; i < series.pairs.size(); ++i) {
        ds[i] = series.pairs[i].first;
        es[i] = series.pairs[i].second;
    }
    const double mean_d = pairwise_sum(ds) / n;
    const double mean_e = pairwise_sum(es) / n;
    std::vector<double> dd(ds.size()), ee(ds.size()), de(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        dd[i] = (ds[i] - mean_d) * (ds[i] - mean_d);
        ee[i] = (es[i] - mean_e) * (es[i] - mean_e);
        de[i] = (ds[i] - mean_d) * (es[i] - mean_e);
    }
    const double var_d = pairwise_sum(dd);
    const double var_e = pairwise_sum(ee);
    if (var_d == 0 || var_e == 0) {
        series.correlation = 0;
        series.degenerate = true;
    } else {
        series.correlation = pairwise_sum(de) / std::sqrt(var_d * var_e);
    }
    return series;
}

// =============================================================================
// Per-scenario grouping
// =============================================================================

inline constexpr std::array<std::string_view, 5> kScenarioLabels = {
    "baseline", "table", "table_chair", "table_sideways", "table_standing"};

inline bool is_scenario_label(std::string_view label) {
    for (auto l : kScenarioLabels)
        if (l == label) return true;
    return false;
}

// Scenario labels CSV: frame_id,label per line.
inline std::map<std::int64_t, std::string> parse_labels(std::string_view text,
                                                        std::string_view source) {
    std::map<std::int64_t, std::string> labels;
    const auto lines = split(text, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split(line, ',');
        if (fields.size() != 2)
            throw ParseError(std::string(source), lineno, "expected frame_id,label");
        const auto frame = detail::parse_frame_id(fields[0], source, lineno);
        if (!labels.emplace(frame, std::string(trim(fields[1]))).second)
            throw DuplicateFrame(std::string(source), lineno,
                                 "duplicate label for frame " + std::to_string(frame));
    }
    return labels;
}

inline std::map<std::int64_t, std::string> load_labels(const std::filesystem::path& path) {
    return parse_labels(detail::read_text_file(path), path.string());
}

// One report per scenario type present in the labels. Every visible
// ground-truth frame must carry one of the five labels.
inline std::map<std::string, EvalReport>
group_by_scenario(std::span<const FramePrediction> predictions,
                  std::span<const AnnotationRecord> ground_truth,
                  const std::map<std::int64_t, std::string>& labels) {
    for (const auto& [frame, label] : labels)
        if (!is_scenario_label(label))
            throw UnknownLabel("unknown scenario label '" + label + "' for frame " +
                               std::to_string(frame));

    std::map<std::string, std::vector<AnnotationRecord>> gt_groups;
    for (const auto& gt : ground_truth) {
        if (!gt.visible) continue;
        const auto it = labels.find(gt.frame_id);
        if (it == labels.end())
            throw UnknownLabel("frame " + std::to_string(gt.frame_id) +
                               " has no scenario label");
        gt_groups[it->second].push_back(gt);
    }

    std::map<std::string, EvalReport> reports;
    for (const auto& [label, gts] : gt_groups)
        reports[label] = evaluate_run(predictions, gts);
    return reports;
}

// =============================================================================
// Report serialization (flat key = value text; CDF as two-column CSV)
// =============================================================================

inline std::string serialize_report(const EvalReport& r) {
    std::string out;
    out += "n_frames = " + std::to_string(r.n_frames) + "\n";
    out += "n_predicted = " + std::to_string(r.n_predicted) + "\n";
    out += "missing_fraction = " + format_number(r.missing_fraction) + "\n";
    out += "mean_error_cm = " + format_number(r.mean) + "\n";
    out += "stdev_error_cm = " + format_number(r.stdev) + "\n";
    out += "min_error_cm = " + format_number(r.min) + "\n";
    out += "max_error_cm = " + format_number(r.max) + "\n";
    return out;
}

inline std::string serialize_cdf(std::span<const CdfPoint> cdf) {
    std::string out = "error_cm,cumulative_fraction\n";
    for (const auto& p : cdf)
        out += format_number(p.error_cm) + "," + format_number(p.fraction) + "\n";
    return out;
}

} // namespace floorloc
