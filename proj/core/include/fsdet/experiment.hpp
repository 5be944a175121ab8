// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsdet/augment.hpp"
#include "fsdet/detector.hpp"
#include "fsdet/eval.hpp"
#include "fsdet/synth.hpp"
#include "fsdet/trainer.hpp"

namespace fsdet {

/// One end-to-end comparison: for each augmentation strategy and seed,
/// base-train, fine-tune with k shots, run inference on a held-out test
/// set and report mAP. Training imagery is clean; the test set adds
/// distractor clutter, the domain shift the augmentations target.
struct ExperimentSpec {
    SynthSpec synth;                  // training-domain generator
    int test_images = 40;
    int test_distractors = 3;         // clutter objects per test image
    int background_count = 12;        // BR/ATB background pool size
    int background_regions = 2;       // region boxes per background image
    DetectorConfig detector;
    TrainConfig base_train;
    TrainConfig finetune_train;
    std::vector<AugmentStrategy> strategies;
    std::vector<std::uint64_t> seeds = {0};
    double iou_threshold = 0.5;
    ApMode ap_mode = ApMode::Voc07ElevenPoint;
    std::string output_dir;           // empty: keep everything in memory

    void validate() const;
};

/// Aggregate result for one strategy across seeds.
struct StrategyOutcome {
    std::string strategy;
    std::vector<double> novel_maps;   // one per seed
    std::vector<double> overall_maps;
    double mean_novel_map = 0.0;
    double mean_overall_map = 0.0;
    std::vector<DetectionReport> reports;
};

struct ComparisonResult {
    std::vector<StrategyOutcome> outcomes;  // spec order
    std::string table_text;                 // consolidated strategy table
};

/// Runs the full strategy comparison. When `spec.output_dir` is set, each
/// strategy/seed run writes checkpoints, loss traces, detections and
/// reports under `<out>/<strategy>/seed<seed>/`, plus `<out>/summary.txt`.
ComparisonResult run_comparison(const ExperimentSpec& spec);

}  // namespace fsdet
