#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "floorloc/errors.hpp"
#include "floorloc/feet.hpp"
#include "floorloc/geometry.hpp"
#include "floorloc/util.hpp"

namespace floorloc {

// =============================================================================
// Scene configuration
//
// Flat key = value text, '#' comments. homography_points holds the four
// calibration image points as 8 comma-separated numbers in the corner order
// near-left, near-right, far-right, far-left. All lengths are cm, image
// coordinates px.
// =============================================================================

struct SceneConfig {
    std::string name;
    double image_width = 0;  // px
    double image_height = 0; // px
    double camera_height = 0; // cm
    FloorPoint camera_ground{};
    double grid_width = 0;  // cm, along the near edge
    double grid_height = 0; // cm, away from the camera
    std::array<ImagePoint, 4> homography_points{};
    std::string units = "cm";

    CameraConfig camera_config() const {
        return CameraConfig{camera_height, camera_ground, image_width, image_height};
    }

    std::array<FloorPoint, 4> map_points() const {
        return grid_corner_map_points(grid_width, grid_height);
    }

    Homography homography() const { return solve_homography(homography_points, map_points()); }

    void validate() const {
        if (units != "cm") throw ValidationError("scene units must be cm, got '" + units + "'");
        if (!(image_width > 0) || !(image_height > 0))
            throw ValidationError("image dimensions must be > 0");
        if (!(camera_height > 0)) throw ValidationError("camera_height must be > 0");
        if (!(grid_width > 0) || !(grid_height > 0))
            throw ValidationError("grid dimensions must be > 0");
        detail::require_nondegenerate_quad(
            std::span<const ImagePoint, 4>(homography_points), "homography points");
    }
};

// =============================================================================
// Annotations
//
// Headerless CSV, one record per line: frame_id,X,Y[,visible] with visible
// in {0,1} defaulting to 1.
// =============================================================================

struct AnnotationRecord {
    std::int64_t frame_id = 0;
    FloorPoint position{};
    bool visible = true;
};

// =============================================================================
// Detections
//
// Line-delimited records frame_id|kind|payload. bbox payload is
// x_min,y_min,x_max,y_max,conf; skeleton payload is semicolon-separated
// joint:x,y,conf triples.
// =============================================================================

struct DetectionRecord {
    std::int64_t frame_id = 0;
    std::variant<BoundingBox, Skeleton> payload;
    std::string detector_id;

    bool is_bbox() const { return std::holds_alternative<BoundingBox>(payload); }
    bool is_skeleton() const { return std::holds_alternative<Skeleton>(payload); }
};

// -----------------------------------------------------------------------------
// Parsing
// -----------------------------------------------------------------------------

namespace detail {

inline double parse_number_or_throw(std::string_view token, std::string_view source,
                                    std::size_t line, std::string_view what) {
    double v = 0;
    if (!parse_number(trim(token), v))
        throw ParseError(std::string(source), line,
                         "cannot parse " + std::string(what) + " from '" + std::string(token) + "'");
    return v;
}

inline std::int64_t parse_frame_id(std::string_view token, std::string_view source,
                                   std::size_t line) {
    long long v = 0;
    if (!parse_integer(trim(token), v) || v < 0)
        throw ParseError(std::string(source), line,
                         "frame id must be a non-negative integer, got '" + std::string(token) + "'");
    return v;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error while reading " + path.string());
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("error while writing " + path.string());
}

template <typename Record>
void check_frame_order(std::vector<Record>& records, std::string_view source) {
    std::stable_sort(records.begin(), records.end(),
                     [](const Record& a, const Record& b) { return a.frame_id < b.frame_id; });
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].frame_id == records[i - 1].frame_id)
            throw DuplicateFrame(std::string(source) + ": duplicate frame id " +
                                 std::to_string(records[i].frame_id));
}

} // namespace detail

inline SceneConfig parse_scene_config(std::string_view text, std::string_view source) {
    SceneConfig cfg;
    std::array<bool, 8> seen{}; // required keys
    const auto lines = split(text, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(std::string(source), lineno, "expected key = value");
        const std::string key{trim(line.substr(0, eq))};
        const std::string_view value = trim(line.substr(eq + 1));
        const auto num = [&] {
            return detail::parse_number_or_throw(value, source, lineno, key);
        };
        if (key == "name") {
            cfg.name = std::string(value);
        } else if (key == "units") {
            cfg.units = std::string(value);
        } else if (key == "image_width") {
            cfg.image_width = num(); seen[0] = true;
        } else if (key == "image_height") {
            cfg.image_height = num(); seen[1] = true;
        } else if (key == "camera_height") {
            cfg.camera_height = num(); seen[2] = true;
        } else if (key == "camera_x") {
            cfg.camera_ground.x = num(); seen[3] = true;
        } else if (key == "camera_y") {
            cfg.camera_ground.y = num(); seen[4] = true;
        } else if (key == "grid_width") {
            cfg.grid_width = num(); seen[5] = true;
        } else if (key == "grid_height") {
            cfg.grid_height = num(); seen[6] = true;
        } else if (key == "homography_points") {
            const auto parts = split(value, ',');
            if (parts.size() != 8)
                throw ValidationError(std::string(source) + ":" + std::to_string(lineno) +
                                      ": homography_points needs exactly 8 numbers (4 points), got " +
                                      std::to_string(parts.size()));
            for (int p = 0; p < 4; ++p) {
                cfg.homography_points[p].x =
                    detail::parse_number_or_throw(parts[2 * p], source, lineno, "homography point x");
                cfg.homography_points[p].y =
                    detail::parse_number_or_throw(parts[2 * p + 1], source, lineno, "homography point y");
            }
            seen[7] = true;
        } else {
            throw ParseError(std::string(source), lineno, "unknown key '" + key + "'");
        }
    }
    static constexpr std::array<std::string_view, 8> kRequired = {
        "image_width", "image_height", "camera_height", "camera_x",
        "camera_y",    "grid_width",   "grid_height",   "homography_points"};
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw ValidationError(std::string(source) + ": missing required key '" +
                                  std::string(kRequired[i]) + "'");
    try {
        cfg.validate();
    } catch (const DegenerateCalibration& e) {
        // collinear or coincident calibration points: degenerate geometry,
        // not a syntax problem
        throw DegenerateCalibration(std::string(source) + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(source) + ": " + e.what());
    }
    return cfg;
}

inline std::string serialize_scene_config(const SceneConfig& cfg) {
    std::string out;
    if (!cfg.name.empty()) out += "name = " + cfg.name + "\n";
    out += "units = " + cfg.units + "\n";
    out += "image_width = " + format_number(cfg.image_width) + "\n";
    out += "image_height = " + format_number(cfg.image_height) + "\n";
    out += "camera_height = " + format_number(cfg.camera_height) + "\n";
    out += "camera_x = " + format_number(cfg.camera_ground.x) + "\n";
    out += "camera_y = " + format_number(cfg.camera_ground.y) + "\n";
    out += "grid_width = " + format_number(cfg.grid_width) + "\n";
    out += "grid_height = " + format_number(cfg.grid_height) + "\n";
    out += "homography_points = ";
    for (int p = 0; p < 4; ++p) {
        if (p) out += ",";
        out += format_number(cfg.homography_points[p].x) + "," +
               format_number(cfg.homography_points[p].y);
    }
    out += "\n";
    return out;
}

inline SceneConfig load_scene_config(const std::filesystem::path& path) {
    return parse_scene_config(detail::read_text_file(path), path.string());
}

inline void save_scene_config(const SceneConfig& cfg, const std::filesystem::path& path) {
    detail::write_text_file(path, serialize_scene_config(cfg));
}

inline std::vector<AnnotationRecord> parse_annotations(std::string_view text,
                                                       std::string_view source) {
    std::vector<AnnotationRecord> records;
    const auto lines = split(text, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split(line, ',');
        if (fields.size() != 3 && fields.size() != 4)
            throw ParseError(std::string(source), lineno,
                             "expected frame_id,X,Y[,visible], got " +
                                 std::to_string(fields.size()) + " fields");
        AnnotationRecord rec;
        rec.frame_id = detail::parse_frame_id(fields[0], source, lineno);
        rec.position.x = detail::parse_number_or_throw(fields[1], source, lineno, "X");
        rec.position.y = detail::parse_number_or_throw(fields[2], source, lineno, "Y");
        if (fields.size() == 4) {
            const std::string_view v = trim(fields[3]);
            if (v == "1") rec.visible = true;
            else if (v == "0") rec.visible = false;
            else
                throw ParseError(std::string(source), lineno,
                                 "visible flag must be 0 or 1, got '" + std::string(v) + "'");
        }
        records.push_back(rec);
    }
    detail::check_frame_order(records, source);
    return records;
}

inline std::string serialize_annotations(std::span<const AnnotationRecord> records) {
    std::string out;
    for (const auto& r : records) {
        out += std::to_string(r.frame_id) + "," + format_number(r.position.x) + "," +
               format_number(r.position.y) + "," + (r.visible ? "1" : "0") + "\n";
    }
    return out;
}

inline std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
    return parse_annotations(detail::read_text_file(path), path.string());
}

inline void save_annotations(std::span<const AnnotationRecord> records,
                             const std::filesystem::path& path) {
    detail::write_text_file(path, serialize_annotations(records));
}

inline std::vector<DetectionRecord> parse_detections(std::string_view text,
                                                     std::string_view source) {
    std::vector<DetectionRecord> records;
    const auto lines = split(text, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split(line, '|');
        if (fields.size() != 3)
            throw ParseError(std::string(source), lineno, "expected frame_id|kind|payload");
        DetectionRecord rec;
        rec.frame_id = detail::parse_frame_id(fields[0], source, lineno);
        const std::string_view kind = trim(fields[1]);
        const std::string_view payload = trim(fields[2]);
        if (kind == "bbox") {
            const auto parts = split(payload, ',');
            if (parts.size() != 5)
                throw ParseError(std::string(source), lineno,
                                 "bbox payload needs x_min,y_min,x_max,y_max,conf");
            BoundingBox b;
            b.x_min = detail::parse_number_or_throw(parts[0], source, lineno, "x_min");
            b.y_min = detail::parse_number_or_throw(parts[1], source, lineno, "y_min");
            b.x_max = detail::parse_number_or_throw(parts[2], source, lineno, "x_max");
            b.y_max = detail::parse_number_or_throw(parts[3], source, lineno, "y_max");
            b.confidence = detail::parse_number_or_throw(parts[4], source, lineno, "confidence");
            try {
                b.validate();
            } catch (const ValidationError& e) {
                throw ParseError(std::string(source), lineno, e.what());
            }
            rec.payload = b;
        } else if (kind == "skeleton") {
            Skeleton s;
            std::array<bool, kJointCount> present{};
            for (const auto& triple : split(payload, ';')) {
                const std::string_view t = trim(triple);
                if (t.empty()) continue;
                const auto colon = t.find(':');
                if (colon == std::string_view::npos)
                    throw ParseError(std::string(source), lineno,
                                     "skeleton joint must be name:x,y,conf");
                const auto name = parse_joint_name(trim(t.substr(0, colon)));
                if (!name)
                    throw ParseError(std::string(source), lineno,
                                     "unknown joint name '" + std::string(trim(t.substr(0, colon))) + "'");
                if (present[static_cast<int>(*name)])
                    throw ParseError(std::string(source), lineno,
                                     "duplicate joint '" + std::string(joint_name_string(*name)) + "'");
                present[static_cast<int>(*name)] = true;
                const auto nums = split(t.substr(colon + 1), ',');
                if (nums.size() != 3)
                    throw ParseError(std::string(source), lineno,
                                     "skeleton joint must be name:x,y,conf");
                ImagePoint p;
                p.x = detail::parse_number_or_throw(nums[0], source, lineno, "joint x");
                p.y = detail::parse_number_or_throw(nums[1], source, lineno, "joint y");
                const double conf =
                    detail::parse_number_or_throw(nums[2], source, lineno, "joint confidence");
                try {
                    s.set(*name, p, conf);
                } catch (const ValidationError& e) {
                    throw ParseError(std::string(source), lineno, e.what());
                }
            }
            rec.payload = s;
        } else {
            throw ParseError(std::string(source), lineno,
                             "unknown payload kind '" + std::string(kind) + "'");
        }
        rec.detector_id = std::string(kind);
        records.push_back(std::move(rec));
    }
    detail::check_frame_order(records, source);
    return records;
}

inline std::string serialize_detections(std::span<const DetectionRecord> records) {
    std::string out;
    for (const auto& r : records) {
        out += std::to_string(r.frame_id);
        if (const auto* b = std::get_if<BoundingBox>(&r.payload)) {
            out += "|bbox|" + format_number(b->x_min) + "," + format_number(b->y_min) + "," +
                   format_number(b->x_max) + "," + format_number(b->y_max) + "," +
                   format_number(b->confidence);
        } else {
            const auto& s = std::get<Skeleton>(r.payload);
            out += "|skeleton|";
            bool first = true;
            for (int j = 0; j < kJointCount; ++j) {
                const auto& joint = s.get(static_cast<JointName>(j));
                if (!joint) continue;
                if (!first) out += ";";
                first = false;
                out += std::string(joint_name_string(static_cast<JointName>(j))) + ":" +
                       format_number(joint->point.x) + "," + format_number(joint->point.y) + "," +
                       format_number(joint->confidence);
            }
        }
        out += "\n";
    }
    return out;
}

inline std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
    return parse_detections(detail::read_text_file(path), path.string());
}

inline void save_detections(std::span<const DetectionRecord> records,
                            const std::filesystem::path& path) {
    detail::write_text_file(path, serialize_detections(records));
}

// =============================================================================
// Body proportion tables
//
// Same flat key = value syntax as scene configs; keys eye, shoulder, hip,
// knee, ankle, ankle_ground. Omitted keys keep their defaults.
// =============================================================================

inline BodyProportions parse_proportions(std::string_view text, std::string_view source) {
    BodyProportions props;
    const auto lines = split(text, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(std::string(source), lineno, "expected key = value");
        const std::string key{trim(line.substr(0, eq))};
        const double v = detail::parse_number_or_throw(line.substr(eq + 1), source, lineno, key);
        if (key == "eye") props.eye = v;
        else if (key == "shoulder") props.shoulder = v;
        else if (key == "hip") props.hip = v;
        else if (key == "knee") props.knee = v;
        else if (key == "ankle") props.ankle = v;
        else if (key == "ankle_ground") props.ankle_ground = v;
        else throw ParseError(std::string(source), lineno, "unknown key '" + key + "'");
    }
    try {
        props.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(source) + ": " + e.what());
    }
    return props;
}

inline std::string serialize_proportions(const BodyProportions& p) {
    std::string out;
    out += "eye = " + format_number(p.eye) + "\n";
    out += "shoulder = " + format_number(p.shoulder) + "\n";
    out += "hip = " + format_number(p.hip) + "\n";
    out += "knee = " + format_number(p.knee) + "\n";
    out += "ankle = " + format_number(p.ankle) + "\n";
    out += "ankle_ground = " + format_number(p.ankle_ground) + "\n";
    return out;
}

inline BodyProportions load_proportions(const std::filesystem::path& path) {
    return parse_proportions(detail::read_text_file(path), path.string());
}

// =============================================================================
// Two-perspective ground truth
// =============================================================================

// Merges the annotations of two camera perspectives into a shared ground
// truth: both visible -> midpoint, one visible -> that one, neither ->
// carried position marked not visible. Frames present in only one list are
// taken from it as-is.
inline std::vector<AnnotationRecord> merge_ground_truth(std::span<const AnnotationRecord> a,
                                                        std::span<const AnnotationRecord> b) {
    std::vector<AnnotationRecord> merged;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() || ib < b.size()) {
        if (ib == b.size() || (ia < a.size() && a[ia].frame_id < b[ib].frame_id)) {
            merged.push_back(a[ia++]);
            continue;
        }
        if (ia == a.size() || b[ib].frame_id < a[ia].frame_id) {
            merged.push_back(b[ib++]);
            continue;
        }
        const AnnotationRecord& ra = a[ia++];
        const AnnotationRecord& rb = b[ib++];
        AnnotationRecord out;
        out.frame_id = ra.frame_id;
        if (ra.visible && rb.visible) {
            out.position = FloorPoint{(ra.position.x + rb.position.x) / 2.0,
                                      (ra.position.y + rb.position.y) / 2.0};
            out.visible = true;
        } else if (ra.visible) {
            out.position = ra.position;
            out.visible = true;
        } else if (rb.visible) {
            out.position = rb.position;
            out.visible = true;
        } else {
            out.position = FloorPoint{(ra.position.x + rb.position.x) / 2.0,
                                      (ra.position.y + rb.position.y) / 2.0};
            out.visible = false;
        }
        merged.push_back(out);
    }
    return merged;
}

// Per-axis absolute disagreement between two perspectives' annotations over
// frames where both are visible.
struct MismatchStats {
    std::vector<double> abs_dx; // cm, frame-id order
    std::vector<double> abs_dy;
    double mean_x = 0;
    double mean_y = 0;
    double p95_x = 0; // nearest-rank 95th percentile
    double p95_y = 0;
    std::int64_t n_frames = 0;
};

namespace detail {

inline double nearest_rank_p95(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(xs.size())));
    return xs[std::min(xs.size() - 1, std::max<std::size_t>(rank, 1) - 1)];
}

} // namespace detail

inline MismatchStats mismatch_stats(std::span<const AnnotationRecord> a,
                                    std::span<const AnnotationRecord> b) {
    MismatchStats stats;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia].frame_id < b[ib].frame_id) { ++ia; continue; }
        if (b[ib].frame_id < a[ia].frame_id) { ++ib; continue; }
        if (a[ia].visible && b[ib].visible) {
            stats.abs_dx.push_back(std::abs(a[ia].position.x - b[ib].position.x));
            stats.abs_dy.push_back(std::abs(a[ia].position.y - b[ib].position.y));
        }
        ++ia;
        ++ib;
    }
    stats.n_frames = static_cast<std::int64_t>(stats.abs_dx.size());
    if (stats.n_frames == 0)
        throw NoOverlap("no frame has both annotations visible");
    stats.mean_x = pairwise_sum(stats.abs_dx) / static_cast<double>(stats.n_frames);
    stats.mean_y = pairwise_sum(stats.abs_dy) / static_cast<double>(stats.n_frames);
    stats.p95_x = detail::nearest_rank_p95(stats.abs_dx);
    stats.p95_y = detail::nearest_rank_p95(stats.abs_dy);
    return stats;
}

} // namespace floorloc
