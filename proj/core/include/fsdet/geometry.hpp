// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fsdet {

/// Axis-aligned box in continuous pixel coordinates, origin top-left,
/// max edges exclusive. Valid boxes satisfy x_min < x_max, y_min < y_max.
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x_min + x_max); }
    double center_y() const { return 0.5 * (y_min + y_max); }

    bool valid() const {
        return x_min < x_max && y_min < y_max && x_min >= 0.0 && y_min >= 0.0;
    }

    BoundingBox clamped(double img_w, double img_h) const {
        BoundingBox b = *this;
        b.x_min = std::clamp(b.x_min, 0.0, img_w);
        b.x_max = std::clamp(b.x_max, 0.0, img_w);
        b.y_min = std::clamp(b.y_min, 0.0, img_h);
        b.y_max = std::clamp(b.y_max, 0.0, img_h);
        return b;
    }

    bool operator==(const BoundingBox&) const = default;
};

/// Lexicographic order on (x_min, y_min, x_max, y_max); used to break
/// confidence ties deterministically in the evaluator.
inline bool box_less(const BoundingBox& a, const BoundingBox& b) {
    if (a.x_min != b.x_min) return a.x_min < b.x_min;
    if (a.y_min != b.y_min) return a.y_min < b.y_min;
    if (a.x_max != b.x_max) return a.x_max < b.x_max;
    return a.y_max < b.y_max;
}

double intersection_area(const BoundingBox& a, const BoundingBox& b);

/// Intersection over union under the exclusive-coordinate convention.
double iou(const BoundingBox& a, const BoundingBox& b);

inline void require_valid(const BoundingBox& b, const std::string& what) {
    if (!b.valid())
        throw std::invalid_argument(what + ": invalid box [" +
                                    std::to_string(b.x_min) + "," + std::to_string(b.y_min) + "," +
                                    std::to_string(b.x_max) + "," + std::to_string(b.y_max) + "]");
}

}  // namespace fsdet
