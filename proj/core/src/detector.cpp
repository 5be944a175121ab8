// SPDX-License-Identifier: Apache-2.0
#include "fsdet/detector.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace fsdet {

void DetectorConfig::validate() const {
    if (input_size < 8) throw std::invalid_argument("detector: input size too small");
    if (backbone_channels.empty())
        throw std::invalid_argument("detector: backbone needs at least one stage");
    for (int c : backbone_channels)
        if (c < 1) throw std::invalid_argument("detector: non-positive channel width");
    if (feature_channels < 1)
        throw std::invalid_argument("detector: feature channel count must be positive");
    if (input_size % (1 << backbone_channels.size()) != 0)
        throw std::invalid_argument("detector: input size must be divisible by 2^stages");
    if (grid() < 1) throw std::invalid_argument("detector: degenerate grid");
    if (anchors.empty()) throw std::invalid_argument("detector: anchor set is empty");
    for (const auto& a : anchors)
        if (a.w <= 0 || a.h <= 0)
            throw std::invalid_argument("detector: anchors must have positive extents");
    if (lambda_noobj < 0 || lambda_box < 0)
        throw std::invalid_argument("detector: negative loss weight");
}

std::string DetectorConfig::fingerprint_text() const {
    std::ostringstream os;
    os << "input=" << input_size << ";backbone=";
    for (int c : backbone_channels) os << c << ",";
    os << ";m=" << feature_channels << ";anchors=";
    for (const auto& a : anchors) os << a.w << "x" << a.h << ",";
    os << ";slope=" << leaky_slope;
    return os.str();
}

std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold) {
    std::sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.category != b.category) return a.category < b.category;
        return box_less(a.box, b.box);
    });
    std::vector<Detection> kept;
    for (const auto& d : detections) {
        bool suppressed = false;
        for (const auto& k : kept) {
            if (k.category == d.category && iou(k.box, d.box) >= iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

std::vector<GtBox> gt_to_input_space(const ImageRecord& record,
                                     const std::vector<std::string>& pass_categories,
                                     const DetectorConfig& cfg) {
    const double sx = static_cast<double>(cfg.input_size) / record.width;
    const double sy = static_cast<double>(cfg.input_size) / record.height;
    std::vector<GtBox> out;
    for (const auto& a : record.annotations) {
        GtBox g;
        g.box = BoundingBox{a.box.x_min * sx, a.box.y_min * sy, a.box.x_max * sx,
                            a.box.y_max * sy};
        auto it = std::find(pass_categories.begin(), pass_categories.end(), a.category);
        g.pass = it == pass_categories.end()
                     ? -1
                     : static_cast<int>(it - pass_categories.begin());
        g.ignored = a.ignored || g.pass < 0;
        out.push_back(g);
    }
    return out;
}

namespace detail {

std::vector<Assignment> assign_targets(const std::vector<GtBox>& gts, const DetectorConfig& cfg,
                                       std::vector<std::array<int, 2>>& suppressed_cells) {
    const int G = cfg.grid();
    const double cell = cfg.cell();
    std::vector<Assignment> out;
    std::set<std::array<int, 3>> taken;  // (anchor, cy, cx) across passes

    for (const auto& g : gts) {
        const double gx = g.box.center_x() / cell;
        const double gy = g.box.center_y() / cell;
        const int cx = std::clamp(static_cast<int>(gx), 0, G - 1);
        const int cy = std::clamp(static_cast<int>(gy), 0, G - 1);

        if (g.ignored) {
            suppressed_cells.push_back({cy, cx});
            continue;
        }

        const double bw = g.box.width() / cell;
        const double bh = g.box.height() / cell;
        // best anchor by IoU with both boxes centered (sizes only)
        int best_a = 0;
        double best_iou = -1.0;
        for (std::size_t a = 0; a < cfg.anchors.size(); ++a) {
            const double iw = std::min(bw, cfg.anchors[a].w);
            const double ih = std::min(bh, cfg.anchors[a].h);
            const double inter = iw * ih;
            const double uni = bw * bh + cfg.anchors[a].w * cfg.anchors[a].h - inter;
            const double v = inter / uni;
            if (v > best_iou) {
                best_iou = v;
                best_a = static_cast<int>(a);
            }
        }

        if (!taken.insert({best_a, cy, cx}).second) continue;  // first box wins

        Assignment as;
        as.pass = g.pass;
        as.anchor = best_a;
        as.cy = cy;
        as.cx = cx;
        as.tx = gx - cx;
        as.ty = gy - cy;
        as.tsw = std::sqrt(bw);
        as.tsh = std::sqrt(bh);
        out.push_back(as);
    }
    return out;
}

}  // namespace detail
}  // namespace fsdet
