#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "floorloc/dataset.hpp"

using namespace floorloc;
using Catch::Approx;

namespace {

const char* kWideScene =
    "# wide open space\n"
    "name = wide_lobby_cam1\n"
    "units = cm\n"
    "image_width = 1280\n"
    "image_height = 720\n"
    "camera_height = 280\n"
    "camera_x = 270\n"
    "camera_y = -200\n"
    "grid_width = 540\n"
    "grid_height = 300\n"
    "homography_points = 340,700, 940,700, 820,260, 460,260\n";

const char* kNarrowScene =
    "units = cm\n"
    "image_width = 1280\n"
    "image_height = 720\n"
    "camera_height = 250\n"
    "camera_x = 112.5\n"
    "camera_y = -150\n"
    "grid_width = 225\n"
    "grid_height = 1000\n"
    "homography_points = 300,690, 980,690, 760,180, 520,180\n";

std::vector<AnnotationRecord> random_annotations(std::mt19937_64& gen, int n,
                                                 double p_visible = 0.85) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<AnnotationRecord> recs;
    for (int f = 0; f < n; ++f)
        recs.push_back(AnnotationRecord{f, FloorPoint{u(gen) * 540, u(gen) * 300},
                                        u(gen) < p_visible});
    return recs;
}

} // namespace

TEST_CASE("scene configs for both scene shapes parse and validate") {
    const SceneConfig wide = parse_scene_config(kWideScene, "wide.cfg");
    REQUIRE(wide.name == "wide_lobby_cam1");
    REQUIRE(wide.grid_width == 540.0);
    REQUIRE(wide.grid_height == 300.0);
    REQUIRE(wide.camera_height == 280.0);
    REQUIRE(wide.homography_points[0].x == 340.0);
    REQUIRE(wide.homography_points[3].y == 260.0);

    const SceneConfig narrow = parse_scene_config(kNarrowScene, "narrow.cfg");
    REQUIRE(narrow.grid_width == 225.0);
    REQUIRE(narrow.grid_height == 1000.0);
    REQUIRE(narrow.camera_height == 250.0);
    REQUIRE(narrow.name.empty());

    const auto map = wide.map_points();
    REQUIRE(map[1] == FloorPoint{540, 0});
    REQUIRE(map[2] == FloorPoint{540, 300});
}

TEST_CASE("scene config rejects malformed input") {
    SECTION("six numbers are not four points") {
        std::string text(kWideScene);
        const auto pos = text.find("homography_points");
        text = text.substr(0, pos) + "homography_points = 1,2, 3,4, 5,6\n";
        REQUIRE_THROWS_AS(parse_scene_config(text, "t"), ValidationError);
    }
    SECTION("unknown key") {
        REQUIRE_THROWS_AS(parse_scene_config(std::string(kWideScene) + "zoom = 2\n", "t"),
                          ParseError);
    }
    SECTION("missing required key") {
        std::string text(kWideScene);
        const auto pos = text.find("grid_width");
        text.erase(pos, text.find('\n', pos) - pos + 1);
        REQUIRE_THROWS_AS(parse_scene_config(text, "t"), ValidationError);
    }
    SECTION("collinear homography points are degenerate geometry") {
        std::string text(kWideScene);
        const auto pos = text.find("homography_points");
        text = text.substr(0, pos) + "homography_points = 0,0, 1,1, 2,2, 3,0\n";
        REQUIRE_THROWS_AS(parse_scene_config(text, "t"), DegenerateCalibration);
    }
    SECTION("unparseable number") {
        std::string text(kWideScene);
        const auto pos = text.find("camera_height = 280");
        text = text.substr(0, pos) + "camera_height = tall\n" + text.substr(text.find('\n', pos) + 1);
        REQUIRE_THROWS_AS(parse_scene_config(text, "t"), ParseError);
    }
    SECTION("non-cm units") {
        std::string text(kWideScene);
        const auto pos = text.find("units = cm");
        text = text.substr(0, pos) + "units = m\n" + text.substr(text.find('\n', pos) + 1);
        REQUIRE_THROWS_AS(parse_scene_config(text, "t"), ValidationError);
    }
}

TEST_CASE("scene config serialization is a fixpoint") {
    const SceneConfig cfg = parse_scene_config(kWideScene, "t");
    const std::string once = serialize_scene_config(cfg);
    const SceneConfig reloaded = parse_scene_config(once, "t2");
    REQUIRE(serialize_scene_config(reloaded) == once);
    REQUIRE(reloaded.camera_ground.x == cfg.camera_ground.x);
    REQUIRE(reloaded.homography_points[2].x == cfg.homography_points[2].x);
}

TEST_CASE("annotation parsing") {
    SECTION("three-field record defaults to visible") {
        const auto recs = parse_annotations("0,120.0,300.0\n", "a.csv");
        REQUIRE(recs.size() == 1);
        REQUIRE(recs[0].frame_id == 0);
        REQUIRE(recs[0].position.x == 120.0);
        REQUIRE(recs[0].position.y == 300.0);
        REQUIRE(recs[0].visible);
    }
    SECTION("empty file gives an empty list") {
        REQUIRE(parse_annotations("", "a.csv").empty());
        REQUIRE(parse_annotations("\n\n# comment\n", "a.csv").empty());
    }
    SECTION("records come back sorted by frame id") {
        const auto recs = parse_annotations("5,1,1\n2,2,2\n9,3,3\n", "a.csv");
        REQUIRE(recs.size() == 3);
        REQUIRE(recs[0].frame_id == 2);
        REQUIRE(recs[2].frame_id == 9);
    }
    SECTION("duplicate frames are rejected") {
        REQUIRE_THROWS_AS(parse_annotations("3,1,1\n3,2,2\n", "a.csv"), DuplicateFrame);
    }
    SECTION("bad visible flag") {
        REQUIRE_THROWS_AS(parse_annotations("0,1,1,maybe\n", "a.csv"), ParseError);
    }
    SECTION("negative frame id") {
        REQUIRE_THROWS_AS(parse_annotations("-1,1,1\n", "a.csv"), ParseError);
    }
    SECTION("non-finite coordinates") {
        REQUIRE_THROWS_AS(parse_annotations("0,inf,1\n", "a.csv"), ParseError);
    }
}

TEST_CASE("scene-file row counts add up across a two-scene corpus") {
    // 1929 + 267 = 2196 rows split the way the two scenes split
    std::string wide, narrow;
    for (int f = 0; f < 1929; ++f)
        wide += std::to_string(f) + "," + std::to_string(f % 540) + ",150\n";
    for (int f = 0; f < 267; ++f)
        narrow += std::to_string(f) + ",100," + std::to_string(f % 1000) + "\n";
    const auto a = parse_annotations(wide, "wide.csv");
    const auto b = parse_annotations(narrow, "narrow.csv");
    REQUIRE(a.size() == 1929);
    REQUIRE(b.size() == 267);
    REQUIRE(a.size() + b.size() == 2196);
}

TEST_CASE("annotation serialization round-trips") {
    std::mt19937_64 gen(11);
    const auto recs = random_annotations(gen, 50);
    const std::string text = serialize_annotations(recs);
    const auto reloaded = parse_annotations(text, "t");
    REQUIRE(reloaded.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        REQUIRE(reloaded[i].frame_id == recs[i].frame_id);
        REQUIRE(reloaded[i].position.x == recs[i].position.x);
        REQUIRE(reloaded[i].position.y == recs[i].position.y);
        REQUIRE(reloaded[i].visible == recs[i].visible);
    }
    REQUIRE(serialize_annotations(reloaded) == text);
}

TEST_CASE("detection parsing") {
    SECTION("bbox record") {
        const auto recs = parse_detections("17|bbox|10.5,20,35.5,90,0.98\n", "d.txt");
        REQUIRE(recs.size() == 1);
        REQUIRE(recs[0].frame_id == 17);
        REQUIRE(recs[0].is_bbox());
        const auto& b = std::get<BoundingBox>(recs[0].payload);
        REQUIRE(b.x_min == 10.5);
        REQUIRE(b.confidence == 0.98);
        REQUIRE(recs[0].detector_id == "bbox");
    }
    SECTION("skeleton record with five joints") {
        const auto recs = parse_detections(
            "3|skeleton|nose:100,50,0.9;left_shoulder:80,100,0.8;right_shoulder:120,100,0.85;"
            "left_hip:85,160,0.7;right_hip:115,160,0.75\n",
            "d.txt");
        REQUIRE(recs.size() == 1);
        REQUIRE(recs[0].is_skeleton());
        const auto& s = std::get<Skeleton>(recs[0].payload);
        REQUIRE(s.size() == 5);
        REQUIRE(s.get(JointName::left_hip)->point.y == 160.0);
        REQUIRE(s.get(JointName::right_shoulder)->confidence == 0.85);
    }
    SECTION("unknown payload kind") {
        REQUIRE_THROWS_AS(parse_detections("1|blob|1,2,3\n", "d.txt"), ParseError);
    }
    SECTION("unknown joint name") {
        REQUIRE_THROWS_AS(parse_detections("1|skeleton|toe:1,2,0.5\n", "d.txt"), ParseError);
    }
    SECTION("duplicate joint") {
        REQUIRE_THROWS_AS(
            parse_detections("1|skeleton|nose:1,2,0.5;nose:3,4,0.5\n", "d.txt"), ParseError);
    }
    SECTION("inverted bbox") {
        REQUIRE_THROWS_AS(parse_detections("1|bbox|10,10,5,20,0.9\n", "d.txt"), ParseError);
    }
    SECTION("duplicate frame") {
        REQUIRE_THROWS_AS(
            parse_detections("1|bbox|0,0,5,5,1\n1|bbox|0,0,6,6,1\n", "d.txt"), DuplicateFrame);
    }
}

TEST_CASE("detection serialization round-trips") {
    std::vector<DetectionRecord> recs;
    recs.push_back(DetectionRecord{0, BoundingBox{10.25, 20, 40.75, 90.5, 0.875}, "bbox"});
    Skeleton s;
    s.set(JointName::left_ankle, ImagePoint{101.5, 377.25}, 0.5);
    s.set(JointName::right_ankle, ImagePoint{120.125, 379}, 0.625);
    s.set(JointName::nose, ImagePoint{110, 100}, 1.0);
    recs.push_back(DetectionRecord{2, s, "skeleton"});
    const std::string text = serialize_detections(recs);
    const auto reloaded = parse_detections(text, "t");
    REQUIRE(serialize_detections(reloaded) == text);
    REQUIRE(reloaded[1].is_skeleton());
    const auto& rs = std::get<Skeleton>(reloaded[1].payload);
    REQUIRE(rs.get(JointName::right_ankle)->point.x == 120.125);
    REQUIRE(rs.get(JointName::nose)->confidence == 1.0);
}

TEST_CASE("ground-truth merging") {
    const auto rec = [](std::int64_t f, double x, double y, bool vis) {
        return AnnotationRecord{f, FloorPoint{x, y}, vis};
    };
    SECTION("both visible takes the midpoint") {
        const std::vector<AnnotationRecord> a = {rec(0, 100, 200, true)};
        const std::vector<AnnotationRecord> b = {rec(0, 110, 220, true)};
        const auto merged = merge_ground_truth(a, b);
        REQUIRE(merged.size() == 1);
        REQUIRE(merged[0].position.x == 105.0);
        REQUIRE(merged[0].position.y == 210.0);
        REQUIRE(merged[0].visible);
    }
    SECTION("one visible supplies the shared position") {
        const std::vector<AnnotationRecord> a = {rec(0, 100, 200, false)};
        const std::vector<AnnotationRecord> b = {rec(0, 110, 220, true)};
        const auto merged = merge_ground_truth(a, b);
        REQUIRE(merged[0].position.x == 110.0);
        REQUIRE(merged[0].position.y == 220.0);
        REQUIRE(merged[0].visible);
    }
    SECTION("neither visible stays not visible") {
        const std::vector<AnnotationRecord> a = {rec(0, 100, 200, false)};
        const std::vector<AnnotationRecord> b = {rec(0, 110, 220, false)};
        const auto merged = merge_ground_truth(a, b);
        REQUIRE_FALSE(merged[0].visible);
    }
    SECTION("frames in only one list are carried over") {
        const std::vector<AnnotationRecord> a = {rec(0, 1, 1, true), rec(2, 2, 2, true)};
        const std::vector<AnnotationRecord> b = {rec(1, 5, 5, true)};
        const auto merged = merge_ground_truth(a, b);
        REQUIRE(merged.size() == 3);
        REQUIRE(merged[0].frame_id == 0);
        REQUIRE(merged[1].frame_id == 1);
        REQUIRE(merged[1].position.x == 5.0);
        REQUIRE(merged[2].frame_id == 2);
    }
    SECTION("merge is symmetric") {
        std::mt19937_64 gen(3);
        const auto a = random_annotations(gen, 200);
        const auto b = random_annotations(gen, 200);
        const auto ab = merge_ground_truth(a, b);
        const auto ba = merge_ground_truth(b, a);
        REQUIRE(ab.size() == ba.size());
        for (std::size_t i = 0; i < ab.size(); ++i) {
            REQUIRE(ab[i].frame_id == ba[i].frame_id);
            REQUIRE(ab[i].position.x == ba[i].position.x);
            REQUIRE(ab[i].position.y == ba[i].position.y);
            REQUIRE(ab[i].visible == ba[i].visible);
        }
    }
}

TEST_CASE("mismatch statistics") {
    const auto rec = [](std::int64_t f, double x, double y, bool vis = true) {
        return AnnotationRecord{f, FloorPoint{x, y}, vis};
    };
    SECTION("identical lists have zero mismatch") {
        std::mt19937_64 gen(5);
        const auto a = random_annotations(gen, 100, 1.0);
        const auto stats = mismatch_stats(a, a);
        REQUIRE(stats.mean_x == 0.0);
        REQUIRE(stats.mean_y == 0.0);
        REQUIRE(stats.p95_x == 0.0);
        REQUIRE(stats.p95_y == 0.0);
    }
    SECTION("constant offset shows up exactly") {
        std::vector<AnnotationRecord> a, b;
        for (int f = 0; f < 40; ++f) {
            a.push_back(rec(f, 100 + f, 200 + f));
            b.push_back(rec(f, 110 + f, 195 + f));
        }
        const auto stats = mismatch_stats(a, b);
        REQUIRE(stats.mean_x == Approx(10.0).epsilon(1e-12));
        REQUIRE(stats.mean_y == Approx(5.0).epsilon(1e-12));
        REQUIRE(stats.p95_x == 10.0);
        REQUIRE(stats.p95_y == 5.0);
    }
    SECTION("randomized lists match a naive recomputation") {
        std::mt19937_64 gen(6);
        const auto a = random_annotations(gen, 300);
        const auto b = random_annotations(gen, 300);
        const auto stats = mismatch_stats(a, b);

        std::vector<double> dx, dy;
        for (const auto& ra : a)
            for (const auto& rb : b)
                if (ra.frame_id == rb.frame_id && ra.visible && rb.visible) {
                    dx.push_back(std::abs(ra.position.x - rb.position.x));
                    dy.push_back(std::abs(ra.position.y - rb.position.y));
                }
        REQUIRE(stats.n_frames == static_cast<std::int64_t>(dx.size()));
        double sx = 0, sy = 0;
        for (double v : dx) sx += v;
        for (double v : dy) sy += v;
        REQUIRE(stats.mean_x == Approx(sx / dx.size()).epsilon(1e-12));
        REQUIRE(stats.mean_y == Approx(sy / dy.size()).epsilon(1e-12));
        std::sort(dx.begin(), dx.end());
        std::sort(dy.begin(), dy.end());
        const auto p95 = [](const std::vector<double>& v) {
            const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * v.size()));
            return v[std::min(v.size() - 1, std::max<std::size_t>(rank, 1) - 1)];
        };
        REQUIRE(stats.p95_x == p95(dx));
        REQUIRE(stats.p95_y == p95(dy));
    }
    SECTION("no overlapping visible frames") {
        const std::vector<AnnotationRecord> a = {rec(0, 1, 1, true), rec(1, 1, 1, false)};
        const std::vector<AnnotationRecord> b = {rec(0, 1, 1, false), rec(1, 1, 1, true)};
        REQUIRE_THROWS_AS(mismatch_stats(a, b), NoOverlap);
    }
}

TEST_CASE("proportion files") {
    const auto props = parse_proportions("eye = 0.95\nhip = 0.5\n", "p.cfg");
    REQUIRE(props.eye == 0.95);
    REQUIRE(props.hip == 0.5);
    REQUIRE(props.knee == 0.28); // default retained
    REQUIRE_THROWS_AS(parse_proportions("hip = 0.99\n", "p.cfg"), ValidationError);
    REQUIRE_THROWS_AS(parse_proportions("waist = 0.6\n", "p.cfg"), ParseError);
    const std::string text = serialize_proportions(BodyProportions{});
    const auto reloaded = parse_proportions(text, "t");
    REQUIRE(reloaded.ankle_ground == 0.04);
}

TEST_CASE("file loaders surface io errors") {
    REQUIRE_THROWS_AS(load_annotations("/nonexistent/path.csv"), IoError);
    REQUIRE_THROWS_AS(load_scene_config("/nonexistent/scene.cfg"), IoError);
    REQUIRE_THROWS_AS(load_detections("/nonexistent/det.txt"), IoError);
}
