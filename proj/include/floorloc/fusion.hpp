#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floorloc/errors.hpp"
#include "floorloc/geometry.hpp"

namespace floorloc {

// One camera's floor estimate for a frame. The distance is from the camera's
// own ground projection to its own estimate, so it is computable before any
// cross-camera exchange.
struct CameraEstimate {
    std::string camera_id;
    std::optional<FloorPoint> position;
    std::optional<double> distance_cm;

    static CameraEstimate found(std::string id, FloorPoint p, double distance_cm) {
        return CameraEstimate{std::move(id), p, distance_cm};
    }
    static CameraEstimate missing(std::string id) {
        return CameraEstimate{std::move(id), std::nullopt, std::nullopt};
    }

    void validate() const {
        if (position.has_value() != distance_cm.has_value())
            throw ValidationError("camera estimate must carry a distance iff it carries a position");
        if (distance_cm && !(*distance_cm >= 0))
            throw ValidationError("camera estimate distance must be >= 0");
    }
};

struct FusedEstimate {
    std::optional<FloorPoint> position;
    std::vector<std::string> contributors;
};

// Distance-weighted average of two per-camera estimates. A single present
// estimate is passed through; when both are present the nearer camera gets
// the larger weight:
//
//   fused = (d2*p1 + d1*p2) / (d1 + d2)
//
// Both distances zero is outside the formula's domain; the symmetric limit,
// the unweighted midpoint, is returned.
inline FusedEstimate fuse_pair(const CameraEstimate& e1, const CameraEstimate& e2) {
    e1.validate();
    e2.validate();
    if (!e1.position && !e2.position) return FusedEstimate{};
    if (!e2.position) return FusedEstimate{e1.position, {e1.camera_id}};
    if (!e1.position) return FusedEstimate{e2.position, {e2.camera_id}};

    const FloorPoint p1 = *e1.position, p2 = *e2.position;
    const double d1 = *e1.distance_cm, d2 = *e2.distance_cm;
    FloorPoint fused{};
    if (d1 + d2 == 0) {
        fused = FloorPoint{(p1.x + p2.x) / 2.0, (p1.y + p2.y) / 2.0};
    } else {
        fused = FloorPoint{(d2 * p1.x + d1 * p2.x) / (d1 + d2),
                           (d2 * p1.y + d1 * p2.y) / (d1 + d2)};
    }
    return FusedEstimate{fused, {e1.camera_id, e2.camera_id}};
}

// N-camera generalization with inverse-distance weights. Reduces to
// fuse_pair bit-for-bit when exactly two estimates are present. Estimates at
// distance zero take all the weight (the inverse-distance limit); several of
// them average unweighted.
inline FusedEstimate fuse_many(std::span<const CameraEstimate> estimates) {
    if (estimates.empty()) throw ValidationError("fuse_many requires a nonempty estimate list");
    std::vector<const CameraEstimate*> present;
    for (const auto& e : estimates) {
        e.validate();
        if (e.position) present.push_back(&e);
    }
    if (present.empty()) return FusedEstimate{};
    if (present.size() == 1)
        return FusedEstimate{present[0]->position, {present[0]->camera_id}};
    if (present.size() == 2) return fuse_pair(*present[0], *present[1]);

    std::vector<const CameraEstimate*> at_zero;
    for (const auto* e : present)
        if (*e->distance_cm == 0) at_zero.push_back(e);

    FusedEstimate out;
    if (!at_zero.empty()) {
        double sx = 0, sy = 0;
        for (const auto* e : at_zero) {
            sx += e->position->x;
            sy += e->position->y;
            out.contributors.push_back(e->camera_id);
        }
        const double n = static_cast<double>(at_zero.size());
        out.position = FloorPoint{sx / n, sy / n};
        return out;
    }
    double wx = 0, wy = 0, wsum = 0;
    for (const auto* e : present) {
        const double w = 1.0 / *e->distance_cm;
        wx += w * e->position->x;
        wy += w * e->position->y;
        wsum += w;
        out.contributors.push_back(e->camera_id);
    }
    out.position = FloorPoint{wx / wsum, wy / wsum};
    return out;
}

} // namespace floorloc
