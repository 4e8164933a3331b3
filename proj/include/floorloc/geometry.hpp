#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "floorloc/errors.hpp"

namespace floorloc {

// Point in image coordinates. Origin top-left, y grows downward. Feet
// estimates produced by body extension may lie below the image rectangle,
// so no bounds are implied.
struct ImagePoint {
    double x = 0; // px
    double y = 0; // px
};

// Point in the floor grid coordinate system, cm. Origin at the grid corner
// declared by the scene configuration.
struct FloorPoint {
    double x = 0; // cm
    double y = 0; // cm
};

inline bool operator==(ImagePoint a, ImagePoint b) { return a.x == b.x && a.y == b.y; }
inline bool operator==(FloorPoint a, FloorPoint b) { return a.x == b.x && a.y == b.y; }

/* Plane-to-plane projective map from image pixels to floor cm:
 *
 *          a*x + b*y + c              d*x + e*y + f
 *   X  =  ---------------     Y  =  ---------------
 *          g*x + h*y + 1              g*x + h*y + 1
 *
 * The eight parameters come from four point correspondences via the linear
 * system
 *
 *   | x1 y1 1  0  0  0 -x1*X1 -y1*X1 | |a|   |X1|
 *   | x2 y2 1  0  0  0 -x2*X2 -y2*X2 | |b|   |X2|
 *   | x3 y3 1  0  0  0 -x3*X3 -y3*X3 | |c|   |X3|
 *   | x4 y4 1  0  0  0 -x4*X4 -y4*X4 |.|d| = |X4|
 *   | 0  0  0  x1 y1 1 -x1*Y1 -y1*Y1 | |e|   |Y1|
 *   | 0  0  0  x2 y2 1 -x2*Y2 -y2*Y2 | |f|   |Y2|
 *   | 0  0  0  x3 y3 1 -x3*Y3 -y3*Y3 | |g|   |Y3|
 *   | 0  0  0  x4 y4 1 -x4*Y4 -y4*Y4 | |h|   |Y4|
 */
struct Homography {
    double a = 1, b = 0, c = 0;
    double d = 0, e = 1, f = 0;
    double g = 0, h = 0;

    double denominator(ImagePoint p) const { return g * p.x + h * p.y + 1.0; }
};

// Fixed camera described in floor coordinates.
struct CameraConfig {
    double height_cm = 0;      // lens height above the floor plane
    FloorPoint ground{};       // camera position projected onto the floor
    double image_width_px = 0;
    double image_height_px = 0;

    void validate() const {
        if (!(height_cm > 0)) throw ValidationError("camera height must be > 0");
        if (!(image_width_px > 0) || !(image_height_px > 0))
            throw ValidationError("image dimensions must be > 0");
    }
};

// Denominator magnitude below which a projection is rejected as being at or
// behind the floor plane's vanishing line.
inline constexpr double kHorizonEpsilon = 1e-9;

// Max/min pivot ratio beyond which the calibration system counts as
// ill-conditioned.
inline constexpr double kConditionLimit = 1e12;

// Required relative round-trip accuracy of each calibration correspondence.
inline constexpr double kCalibrationTolerance = 1e-9;

inline FloorPoint project_to_floor(const Homography& h, ImagePoint p) {
    const double den = h.denominator(p);
    if (std::abs(den) < kHorizonEpsilon)
        throw ProjectiveHorizon("image point (" + std::to_string(p.x) + ", " +
                                std::to_string(p.y) + ") is at the projective horizon");
    return FloorPoint{(h.a * p.x + h.b * p.y + h.c) / den,
                      (h.d * p.x + h.e * p.y + h.f) / den};
}

namespace detail {

// Twice the signed triangle area.
inline double cross2(double ax, double ay, double bx, double by, double cx, double cy) {
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

template <typename P>
void require_nondegenerate_quad(std::span<const P, 4> pts, const char* what) {
    double scale = 0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const double dx = pts[j].x - pts[i].x;
            const double dy = pts[j].y - pts[i].y;
            const double d2 = dx * dx + dy * dy;
            if (d2 == 0)
                throw DegenerateCalibration(std::string(what) + ": duplicate points " +
                                            std::to_string(i) + " and " + std::to_string(j));
            scale = std::max(scale, d2);
        }
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            for (std::size_t k = j + 1; k < 4; ++k) {
                const double area2 = cross2(pts[i].x, pts[i].y, pts[j].x, pts[j].y,
                                            pts[k].x, pts[k].y);
                if (std::abs(area2) <= 1e-12 * scale)
                    throw DegenerateCalibration(std::string(what) + ": points " +
                                                std::to_string(i) + "," + std::to_string(j) +
                                                "," + std::to_string(k) + " are collinear");
            }
}

// In-place Gaussian elimination with partial pivoting on an n x (n+1)
// augmented system. Throws when the pivot spread exceeds kConditionLimit.
template <std::size_t N>
void solve_linear(std::array<std::array<double, N + 1>, N>& m) {
    double max_pivot = 0, min_pivot = 0;
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < N; ++r)
            if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
        if (best != col) std::swap(m[best], m[col]);
        const double pivot = std::abs(m[col][col]);
        if (pivot == 0) throw DegenerateCalibration("calibration system is singular");
        max_pivot = (col == 0) ? pivot : std::max(max_pivot, pivot);
        min_pivot = (col == 0) ? pivot : std::min(min_pivot, pivot);
        for (std::size_t r = col + 1; r < N; ++r) {
            const double factor = m[r][col] / m[col][col];
            if (factor == 0) continue;
            m[r][col] = 0;
            for (std::size_t c = col + 1; c <= N; ++c) m[r][c] -= factor * m[col][c];
        }
    }
    if (max_pivot / min_pivot > kConditionLimit)
        throw DegenerateCalibration("calibration system is ill-conditioned (pivot ratio " +
                                    std::to_string(max_pivot / min_pivot) + ")");
    for (std::size_t col = N; col-- > 0;) {
        double acc = m[col][N];
        for (std::size_t c = col + 1; c < N; ++c) acc -= m[col][c] * m[c][N];
        m[col][N] = acc / m[col][col];
    }
}

inline double relative_point_error(FloorPoint got, FloorPoint want) {
    const double err = std::hypot(got.x - want.x, got.y - want.y);
    const double mag = std::hypot(want.x, want.y);
    return err / std::max(1.0, mag);
}

} // namespace detail

// Solves the four-correspondence system above. The camera points and the map
// points must each be pairwise distinct with no three collinear.
inline Homography solve_homography(std::span<const ImagePoint, 4> camera_points,
                                   std::span<const FloorPoint, 4> map_points) {
    detail::require_nondegenerate_quad(camera_points, "camera points");
    detail::require_nondegenerate_quad(map_points, "map points");

    std::array<std::array<double, 9>, 8> m{};
    for (std::size_t i = 0; i < 4; ++i) {
        const double x = camera_points[i].x, y = camera_points[i].y;
        const double X = map_points[i].x, Y = map_points[i].y;
        m[i] = {x, y, 1, 0, 0, 0, -x * X, -y * X, X};
        m[i + 4] = {0, 0, 0, x, y, 1, -x * Y, -y * Y, Y};
    }
    detail::solve_linear<8>(m);

    const Homography h{m[0][8], m[1][8], m[2][8], m[3][8],
                       m[4][8], m[5][8], m[6][8], m[7][8]};

    for (std::size_t i = 0; i < 4; ++i) {
        if (std::abs(h.denominator(camera_points[i])) < kHorizonEpsilon)
            throw DegenerateCalibration("calibration point " + std::to_string(i) +
                                        " lands on the projective horizon");
        const double rel = detail::relative_point_error(
            project_to_floor(h, camera_points[i]), map_points[i]);
        if (!(rel <= kCalibrationTolerance))
            throw DegenerateCalibration("calibration residual " + std::to_string(rel) +
                                        " at point " + std::to_string(i) +
                                        " exceeds tolerance");
    }
    return h;
}

inline Homography solve_homography(const std::array<ImagePoint, 4>& camera_points,
                                   const std::array<FloorPoint, 4>& map_points) {
    return solve_homography(std::span<const ImagePoint, 4>(camera_points),
                            std::span<const FloorPoint, 4>(map_points));
}

// Planar distance from the camera's ground projection to a floor point.
// Fusion weights and the error-vs-distance analysis both use this.
inline double camera_floor_distance(const CameraConfig& cam, FloorPoint p) {
    return std::hypot(p.x - cam.ground.x, p.y - cam.ground.y);
}

// Line-of-sight distance from the lens to a floor point: an alternative
// fusion weight for rigs where camera heights differ a lot.
inline double camera_floor_distance_3d(const CameraConfig& cam, FloorPoint p) {
    return std::hypot(camera_floor_distance(cam, p), cam.height_cm);
}

// Predicted ratio of floor-plane localisation errors for the same image-space
// feet error observed at distances d2 and d1 from the camera.
inline double expected_error_ratio(double d1, double d2) {
    if (!(d1 > 0) || !(d2 > 0))
        throw NonPositiveDistance("distances must be positive, got d1=" +
                                  std::to_string(d1) + " d2=" + std::to_string(d2));
    return d2 / d1;
}

// Map points for a calibration whose image points are the grid corners, in
// the canonical corner order near-left, near-right, far-right, far-left.
// X runs along the near edge, Y runs away from the camera; units cm.
inline std::array<FloorPoint, 4> grid_corner_map_points(double grid_width, double grid_height) {
    if (!(grid_width > 0) || !(grid_height > 0))
        throw ValidationError("grid dimensions must be > 0");
    return {FloorPoint{0, 0}, FloorPoint{grid_width, 0},
            FloorPoint{grid_width, grid_height}, FloorPoint{0, grid_height}};
}

} // namespace floorloc
