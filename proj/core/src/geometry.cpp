// SPDX-License-Identifier: Apache-2.0
#include "fsdet/geometry.hpp"

namespace fsdet {

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

}  // namespace fsdet
