#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "floorloc/fusion.hpp"

using namespace floorloc;
using Catch::Approx;

namespace {

struct EstimateGen {
    std::mt19937_64 gen{4242};
    std::uniform_real_distribution<double> unit{0.0, 1.0};

    FloorPoint point() { return FloorPoint{unit(gen) * 600 - 100, unit(gen) * 600 - 100}; }

    CameraEstimate estimate(const std::string& id, double p_missing = 0.25) {
        if (unit(gen) < p_missing) return CameraEstimate::missing(id);
        return CameraEstimate::found(id, point(), unit(gen) * 800);
    }
};

} // namespace

TEST_CASE("fuse_pair follows the P definition") {
    SECTION("one side missing passes the other through") {
        const auto e1 = CameraEstimate::missing("cam0");
        const auto e2 = CameraEstimate::found("cam1", FloorPoint{120, 300}, 350);
        const auto fused = fuse_pair(e1, e2);
        REQUIRE(fused.position);
        REQUIRE(fused.position->x == 120.0);
        REQUIRE(fused.position->y == 300.0);
        REQUIRE(fused.contributors == std::vector<std::string>{"cam1"});
    }
    SECTION("weighted average with inverse-distance weights") {
        const auto e1 = CameraEstimate::found("cam0", FloorPoint{0, 0}, 1);
        const auto e2 = CameraEstimate::found("cam1", FloorPoint{3, 0}, 2);
        const auto fused = fuse_pair(e1, e2);
        REQUIRE(fused.position->x == Approx(1.0));
        REQUIRE(fused.position->y == Approx(0.0));
        REQUIRE(fused.contributors.size() == 2);
    }
    SECTION("both missing fuses to missing") {
        const auto fused = fuse_pair(CameraEstimate::missing("a"), CameraEstimate::missing("b"));
        REQUIRE_FALSE(fused.position);
        REQUIRE(fused.contributors.empty());
    }
    SECTION("both distances zero resolves to the midpoint") {
        const auto e1 = CameraEstimate::found("a", FloorPoint{10, 20}, 0);
        const auto e2 = CameraEstimate::found("b", FloorPoint{30, 40}, 0);
        const auto fused = fuse_pair(e1, e2);
        REQUIRE(fused.position->x == 20.0);
        REQUIRE(fused.position->y == 30.0);
    }
    SECTION("invariant violations are rejected") {
        CameraEstimate bad{"x", FloorPoint{1, 2}, std::nullopt};
        REQUIRE_THROWS_AS(fuse_pair(bad, CameraEstimate::missing("y")), ValidationError);
        CameraEstimate negative = CameraEstimate::found("x", FloorPoint{1, 2}, -1);
        REQUIRE_THROWS_AS(fuse_pair(negative, CameraEstimate::missing("y")), ValidationError);
    }
}

TEST_CASE("fuse_pair is symmetric and between") {
    EstimateGen gen;
    for (int i = 0; i < 1000; ++i) {
        const auto e1 = gen.estimate("cam0");
        const auto e2 = gen.estimate("cam1");
        const auto f12 = fuse_pair(e1, e2);
        const auto f21 = fuse_pair(e2, e1);
        REQUIRE(f12.position.has_value() == f21.position.has_value());
        if (!f12.position) continue;
        // symmetric bit for bit
        REQUIRE(f12.position->x == f21.position->x);
        REQUIRE(f12.position->y == f21.position->y);
        if (!e1.position || !e2.position) continue;
        // on the closed segment p1..p2
        const auto& p1 = *e1.position;
        const auto& p2 = *e2.position;
        const double len = std::hypot(p2.x - p1.x, p2.y - p1.y);
        const double via = std::hypot(f12.position->x - p1.x, f12.position->y - p1.y) +
                           std::hypot(p2.x - f12.position->x, p2.y - f12.position->y);
        REQUIRE(via == Approx(len).margin(1e-9 * (1 + len)));
    }
}

TEST_CASE("decreasing d1 pulls the fused point toward p1") {
    EstimateGen gen;
    for (int i = 0; i < 500; ++i) {
        const FloorPoint p1 = gen.point();
        FloorPoint p2 = gen.point();
        if (std::hypot(p2.x - p1.x, p2.y - p1.y) < 1e-6) p2.x += 10;
        const double d1 = 50 + 500 * gen.unit(gen.gen);
        const double d2 = 50 + 500 * gen.unit(gen.gen);
        const double d1_closer = d1 * gen.unit(gen.gen) * 0.9;
        const auto fused = fuse_pair(CameraEstimate::found("a", p1, d1),
                                     CameraEstimate::found("b", p2, d2));
        const auto closer = fuse_pair(CameraEstimate::found("a", p1, d1_closer),
                                      CameraEstimate::found("b", p2, d2));
        const double before = std::hypot(fused.position->x - p1.x, fused.position->y - p1.y);
        const double after = std::hypot(closer.position->x - p1.x, closer.position->y - p1.y);
        REQUIRE(after < before);
    }
}

TEST_CASE("fuse_many basics") {
    SECTION("empty list is a usage error") {
        REQUIRE_THROWS_AS(fuse_many({}), ValidationError);
    }
    SECTION("single present estimate is returned as-is") {
        const std::vector<CameraEstimate> es = {
            CameraEstimate::missing("a"),
            CameraEstimate::missing("b"),
            CameraEstimate::found("c", FloorPoint{5, 5}, 100),
        };
        const auto fused = fuse_many(es);
        REQUIRE(fused.position->x == 5.0);
        REQUIRE(fused.contributors == std::vector<std::string>{"c"});
    }
    SECTION("all missing fuses to missing") {
        const std::vector<CameraEstimate> es = {CameraEstimate::missing("a"),
                                                CameraEstimate::missing("b")};
        REQUIRE_FALSE(fuse_many(es).position);
    }
    SECTION("coincident positions are a fixed point") {
        const std::vector<CameraEstimate> es = {
            CameraEstimate::found("a", FloorPoint{7, 7}, 10),
            CameraEstimate::found("b", FloorPoint{7, 7}, 250),
            CameraEstimate::found("c", FloorPoint{7, 7}, 900),
        };
        const auto fused = fuse_many(es);
        REQUIRE(fused.position->x == Approx(7.0).margin(1e-12));
        REQUIRE(fused.position->y == Approx(7.0).margin(1e-12));
        REQUIRE(fused.contributors.size() == 3);
    }
    SECTION("zero-distance estimates take all the weight") {
        const std::vector<CameraEstimate> es = {
            CameraEstimate::found("a", FloorPoint{0, 0}, 0),
            CameraEstimate::found("b", FloorPoint{10, 0}, 0),
            CameraEstimate::found("c", FloorPoint{999, 999}, 50),
        };
        const auto fused = fuse_many(es);
        REQUIRE(fused.position->x == 5.0);
        REQUIRE(fused.position->y == 0.0);
        REQUIRE(fused.contributors == std::vector<std::string>{"a", "b"});
    }
}

TEST_CASE("fuse_many of two estimates bit-equals fuse_pair") {
    EstimateGen gen;
    for (int i = 0; i < 1000; ++i) {
        const auto e1 = gen.estimate("cam0");
        const auto e2 = gen.estimate("cam1");
        const std::vector<CameraEstimate> es = {e1, e2};
        const auto many = fuse_many(es);
        const auto pair = fuse_pair(e1, e2);
        REQUIRE(many.position.has_value() == pair.position.has_value());
        if (many.position) {
            REQUIRE(many.position->x == pair.position->x);
            REQUIRE(many.position->y == pair.position->y);
        }
        REQUIRE(many.contributors == pair.contributors);
    }
}

TEST_CASE("fuse_many inverse-distance weighting matches a direct computation") {
    EstimateGen gen;
    for (int i = 0; i < 300; ++i) {
        std::vector<CameraEstimate> es;
        const int n = 3 + static_cast<int>(gen.unit(gen.gen) * 3);
        for (int c = 0; c < n; ++c)
            es.push_back(CameraEstimate::found("cam" + std::to_string(c), gen.point(),
                                               10 + 700 * gen.unit(gen.gen)));
        const auto fused = fuse_many(es);
        double wx = 0, wy = 0, wsum = 0;
        for (const auto& e : es) {
            wx += e.position->x / *e.distance_cm;
            wy += e.position->y / *e.distance_cm;
            wsum += 1.0 / *e.distance_cm;
        }
        REQUIRE(fused.position->x == Approx(wx / wsum).epsilon(1e-12));
        REQUIRE(fused.position->y == Approx(wy / wsum).epsilon(1e-12));
    }
}
