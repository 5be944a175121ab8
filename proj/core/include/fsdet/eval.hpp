// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fsdet/dataset.hpp"
#include "fsdet/detector.hpp"

namespace fsdet {

/// One scored detection within a single-category evaluation.
struct ScoredMatch {
    double confidence = 0.0;
    bool true_positive = false;
    int matched_gt = -1;  // index into the flattened GT list, -1 for FP
};

/// Match results for one category over a dataset, plus the number of
/// non-ignored ground-truth boxes they are measured against.
struct MatchResult {
    std::vector<ScoredMatch> matches;  // descending confidence
    std::size_t gt_count = 0;
};

struct EvalDetection {
    std::string image_id;
    std::string category;
    double confidence = 0.0;
    BoundingBox box;
};

struct EvalGroundTruth {
    std::string image_id;
    std::string category;
    BoundingBox box;
    bool ignored = false;  // VOC "difficult": not counted, cannot create FPs
};

enum class ApMode { Voc07ElevenPoint, AllPoint };

/// Greedy VOC matching for one category: detections are sorted by
/// descending confidence (ties broken by box order), each matched to the
/// highest-IoU unmatched ground truth with IoU >= threshold. Detections
/// matching an ignored ground truth are discarded (neither TP nor FP).
MatchResult match_detections(const std::vector<EvalDetection>& detections,
                             const std::vector<EvalGroundTruth>& ground_truth,
                             double iou_threshold = 0.5);

/// Average precision from match results. Returns nullopt when the category
/// has zero ground-truth boxes (AP undefined; excluded from mAP).
std::optional<double> average_precision(const MatchResult& result,
                                        ApMode mode = ApMode::Voc07ElevenPoint);

struct DetectionReport {
    std::vector<std::pair<std::string, std::optional<double>>> per_category;  // AP in [0,1]
    double map = 0.0;          // mean over categories with defined AP
    std::size_t images = 0;
    std::size_t gt_boxes = 0;
    std::size_t detections = 0;
    std::string fingerprint;   // configuration note carried into the output

    std::string to_text() const;   // aligned table, AP in percent
    std::string to_csv() const;
};

/// Full evaluation over a dataset restricted to `categories`.
DetectionReport evaluate(const std::vector<EvalDetection>& detections,
                         const std::vector<EvalGroundTruth>& ground_truth,
                         const std::vector<std::string>& categories,
                         double iou_threshold = 0.5, ApMode mode = ApMode::Voc07ElevenPoint);

std::vector<EvalGroundTruth> ground_truth_from_dataset(const DatasetIndex& dataset);

/// Detections-file round trip; one line per detection:
/// image_id category confidence x_min y_min x_max y_max
std::string detections_to_text(const std::vector<EvalDetection>& detections);
std::vector<EvalDetection> detections_from_text(const std::string& text);

}  // namespace fsdet
