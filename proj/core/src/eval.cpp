// SPDX-License-Identifier: Apache-2.0
#include "fsdet/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace fsdet {

MatchResult match_detections(const std::vector<EvalDetection>& detections,
                             const std::vector<EvalGroundTruth>& ground_truth,
                             double iou_threshold) {
    std::vector<EvalDetection> sorted = detections;
    std::sort(sorted.begin(), sorted.end(), [](const EvalDetection& a, const EvalDetection& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        return box_less(a.box, b.box);
    });

    MatchResult out;
    for (const auto& gt : ground_truth)
        if (!gt.ignored) ++out.gt_count;

    std::vector<bool> matched(ground_truth.size(), false);
    for (const auto& det : sorted) {
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t i = 0; i < ground_truth.size(); ++i) {
            const auto& gt = ground_truth[i];
            if (gt.ignored || matched[i] || gt.image_id != det.image_id) continue;
            const double v = iou(det.box, gt.box);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0 && best_iou >= iou_threshold) {
            matched[best] = true;
            out.matches.push_back(ScoredMatch{det.confidence, true, best});
            continue;
        }
        // detections covering an ignored box are neither TP nor FP
        bool discard = false;
        for (const auto& gt : ground_truth) {
            if (gt.ignored && gt.image_id == det.image_id &&
                iou(det.box, gt.box) >= iou_threshold) {
                discard = true;
                break;
            }
        }
        if (!discard) out.matches.push_back(ScoredMatch{det.confidence, false, -1});
    }
    return out;
}

std::optional<double> average_precision(const MatchResult& result, ApMode mode) {
    if (result.gt_count == 0) return std::nullopt;

    std::vector<double> precision, recall;
    std::size_t tp = 0, fp = 0;
    for (const auto& m : result.matches) {
        if (m.true_positive)
            ++tp;
        else
            ++fp;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(result.gt_count));
    }

    if (mode == ApMode::Voc07ElevenPoint) {
        double total = 0.0;
        for (int i = 0; i <= 10; ++i) {
            const double r = i / 10.0;
            double best = 0.0;
            for (std::size_t j = 0; j < recall.size(); ++j)
                if (recall[j] >= r) best = std::max(best, precision[j]);
            total += best;
        }
        return total / 11.0;
    }

    // all-point: area under the right-monotonized precision envelope
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t j = 0; j < recall.size(); ++j) {
        double envelope = 0.0;
        for (std::size_t l = j; l < precision.size(); ++l)
            envelope = std::max(envelope, precision[l]);
        ap += (recall[j] - prev_recall) * envelope;
        prev_recall = recall[j];
    }
    return ap;
}

DetectionReport evaluate(const std::vector<EvalDetection>& detections,
                         const std::vector<EvalGroundTruth>& ground_truth,
                         const std::vector<std::string>& categories, double iou_threshold,
                         ApMode mode) {
    if (categories.empty()) throw std::invalid_argument("evaluate: no categories");
    DetectionReport report;
    report.detections = detections.size();
    {
        std::vector<std::string> ids;
        for (const auto& g : ground_truth) ids.push_back(g.image_id);
        std::sort(ids.begin(), ids.end());
        report.images = std::unique(ids.begin(), ids.end()) - ids.begin();
    }

    double total = 0.0;
    std::size_t defined = 0;
    for (const auto& cat : categories) {
        std::vector<EvalDetection> dets;
        for (const auto& d : detections)
            if (d.category == cat) dets.push_back(d);
        std::vector<EvalGroundTruth> gts;
        for (const auto& g : ground_truth)
            if (g.category == cat) gts.push_back(g);

        const MatchResult mr = match_detections(dets, gts, iou_threshold);
        report.gt_boxes += mr.gt_count;
        const std::optional<double> ap = average_precision(mr, mode);
        report.per_category.emplace_back(cat, ap);
        if (ap) {
            total += *ap;
            ++defined;
        }
    }
    if (defined == 0)
        throw std::invalid_argument("evaluate: no category has a defined AP");
    report.map = total / static_cast<double>(defined);
    return report;
}

std::vector<EvalGroundTruth> ground_truth_from_dataset(const DatasetIndex& dataset) {
    std::vector<EvalGroundTruth> out;
    for (const auto& r : dataset.records)
        for (const auto& a : r.annotations)
            out.push_back(EvalGroundTruth{r.id, a.category, a.box, a.ignored});
    return out;
}

namespace {

std::string pct(double ap) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * ap);
    return buf;
}

}  // namespace

std::string DetectionReport::to_text() const {
    std::size_t width = 8;
    for (const auto& [cat, ap] : per_category) width = std::max(width, cat.size());
    std::ostringstream os;
    os << "category";
    for (std::size_t i = 8; i < width; ++i) os << ' ';
    os << "  AP(%)\n";
    for (const auto& [cat, ap] : per_category) {
        os << cat;
        for (std::size_t i = cat.size(); i < width; ++i) os << ' ';
        os << "  " << (ap ? pct(*ap) : std::string("n/a")) << "\n";
    }
    os << "mAP";
    for (std::size_t i = 3; i < width; ++i) os << ' ';
    os << "  " << pct(map) << "\n";
    os << "images=" << images << " gt_boxes=" << gt_boxes << " detections=" << detections;
    if (!fingerprint.empty()) os << " config=" << fingerprint;
    os << "\n";
    return os.str();
}

std::string DetectionReport::to_csv() const {
    std::ostringstream os;
    os << "category,ap_percent\n";
    for (const auto& [cat, ap] : per_category)
        os << cat << "," << (ap ? pct(*ap) : std::string("")) << "\n";
    os << "mAP," << pct(map) << "\n";
    return os.str();
}

std::string detections_to_text(const std::vector<EvalDetection>& detections) {
    std::ostringstream os;
    for (const auto& d : detections) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s %s %.9g %.9g %.9g %.9g %.9g\n", d.image_id.c_str(),
                      d.category.c_str(), d.confidence, d.box.x_min, d.box.y_min, d.box.x_max,
                      d.box.y_max);
        os << buf;
    }
    return os.str();
}

std::vector<EvalDetection> detections_from_text(const std::string& text) {
    std::vector<EvalDetection> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        EvalDetection d;
        ls >> d.image_id >> d.category >> d.confidence >> d.box.x_min >> d.box.y_min >>
            d.box.x_max >> d.box.y_max;
        if (ls.fail())
            throw std::invalid_argument("detections file: malformed line '" + line + "'");
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace fsdet
