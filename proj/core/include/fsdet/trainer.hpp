// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsdet/augment.hpp"
#include "fsdet/detector.hpp"
#include "fsdet/episodic.hpp"
#include "fsdet/eval.hpp"
#include "fsdet/params_io.hpp"

namespace fsdet {

struct TrainConfig {
    int iterations = 2000;
    double learning_rate = 0.005;
    int batch = 4;                 // query images per step
    int categories_per_task = 2;   // base stage episode width
    std::uint64_t seed = 0;
    int k = 10;                    // finetune only

    void validate(bool finetune) const;
};

struct Checkpoint {
    ParamSet params;
    std::string stage;             // "base" or "finetune"
    int iteration = 0;
    std::uint64_t config_hash = 0;
    std::string rng_state;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);
};

struct LossTraceRow {
    int iteration = 0;
    double total = 0, class_ce = 0, box_reg = 0, objectness = 0;
};

std::string trace_to_csv(const std::vector<LossTraceRow>& trace);

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<LossTraceRow> trace;
};

/// Stage 1: joint episodic training of D, M, P over the base categories.
/// The augmentation strategy is applied to the dataset up front (BR needs
/// `backgrounds`, ATB needs `background_records`); ATB also rewires the
/// base split to use the target-background category. Per-iteration
/// randomness derives from (seed, iteration), so a resumed run replays the
/// interrupted one exactly. Throws on a non-finite loss, naming the batch.
TrainResult train_base(const DatasetIndex& dataset, const CategorySplit& split,
                       const AugmentStrategy& strategy, const DatasetIndex* backgrounds,
                       const std::vector<ImageRecord>* background_records,
                       const DetectorConfig& detector_cfg, const TrainConfig& cfg,
                       const Checkpoint* resume = nullptr);

/// Stage 2: fine-tunes a base checkpoint on base + novel categories with a
/// k-shot subset; support vectors are recomputed each step as the mean
/// embedding of each category's usable exemplars.
TrainResult finetune_fewshot(const Checkpoint& base, const DatasetIndex& dataset,
                             const CategorySplit& split, int k,
                             const DetectorConfig& detector_cfg, const TrainConfig& cfg,
                             const Checkpoint* resume = nullptr);

/// Per-category support exemplars used at inference time.
struct SupportExemplar {
    std::string record_id;
    std::size_t box_index = 0;
};
using SupportSet = std::vector<std::pair<std::string, std::vector<SupportExemplar>>>;

/// Support set from a k-shot subset: every usable box becomes an exemplar.
SupportSet support_from_kshot(const KShotSubset& subset, const std::vector<std::string>& categories);

/// Runs the detector over a dataset: embeds the support set once, then
/// decodes per-image predictions for every pass category.
std::vector<EvalDetection> run_inference(Detector& detector, const DatasetIndex& support_source,
                                         const SupportSet& support,
                                         const DatasetIndex& eval_data);

}  // namespace fsdet
