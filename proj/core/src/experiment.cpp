// SPDX-License-Identifier: Apache-2.0
#include "fsdet/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fsdet/episodic.hpp"
#include "fsdet/rng.hpp"

namespace fsdet {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Mean AP over the split's novel categories (defined APs only).
double novel_map(const DetectionReport& report, const std::vector<std::string>& novel) {
    std::vector<double> aps;
    for (const auto& [name, ap] : report.per_category)
        if (ap && std::find(novel.begin(), novel.end(), name) != novel.end())
            aps.push_back(*ap);
    return mean(aps);
}

}  // namespace

void ExperimentSpec::validate() const {
    if (synth.categories.size() < 2)
        throw std::invalid_argument("experiment needs at least 2 categories");
    if (test_images <= 0) throw std::invalid_argument("test_images must be positive");
    if (background_count <= 0) throw std::invalid_argument("background_count must be positive");
    if (strategies.empty()) throw std::invalid_argument("no strategies to compare");
    if (seeds.empty()) throw std::invalid_argument("no seeds to run");
    if (iou_threshold <= 0.0 || iou_threshold >= 1.0)
        throw std::invalid_argument("iou_threshold must lie in (0, 1)");
    detector.validate();
    base_train.validate(false);
    finetune_train.validate(true);
}

ComparisonResult run_comparison(const ExperimentSpec& spec) {
    spec.validate();
    const bool persist = !spec.output_dir.empty();
    if (persist) fs::create_directories(spec.output_dir);

    ComparisonResult result;
    for (const AugmentStrategy& base_strategy : spec.strategies) {
        StrategyOutcome outcome;
        outcome.strategy = AugmentStrategy::kind_to_string(base_strategy.kind);

        for (const std::uint64_t seed : spec.seeds) {
            // One synthetic world per seed, shared across strategies.
            const DatasetIndex train =
                generate_synthetic_dataset(spec.synth, derive_seed(seed, "train-data"));
            SynthSpec test_spec = spec.synth;
            test_spec.image_count = spec.test_images;
            test_spec.distractors = spec.test_distractors;
            test_spec.id_prefix = spec.synth.id_prefix + "-test";
            const DatasetIndex test =
                generate_synthetic_dataset(test_spec, derive_seed(seed, "test-data"));

            const CategorySplit split =
                make_split(train.categories, SplitMode::Seeded, seed);

            const std::vector<ImageRecord> pool = generate_background_pool(
                spec.background_count, spec.synth.width, spec.synth.height,
                spec.background_regions, kTargetBackgroundCategory, derive_seed(seed, "bg"));
            DatasetIndex pool_index;
            pool_index.categories = CategoryRegistry({kTargetBackgroundCategory});
            pool_index.records = pool;
            pool_index.provenance = "background pool";

            AugmentStrategy strategy = base_strategy;
            if (strategy.kind == AugmentKind::AddTargetBackground &&
                strategy.atb_replaced_category.empty())
                strategy.atb_replaced_category = split.base.front();

            TrainConfig base_cfg = spec.base_train;
            base_cfg.seed = seed;
            TrainConfig ft_cfg = spec.finetune_train;
            ft_cfg.seed = seed;

            const TrainResult base_run = train_base(train, split, strategy, &pool_index, &pool,
                                                    spec.detector, base_cfg);
            const TrainResult ft_run =
                finetune_fewshot(base_run.checkpoint, train, split, ft_cfg.k, spec.detector,
                                 ft_cfg);

            // Same subset the fine-tuning stage selected.
            const KShotSubset subset =
                build_kshot_subset(train, split, ft_cfg.k, derive_seed(ft_cfg.seed, "kshot"));
            const DatasetIndex support_data = subset.materialize(train);
            const SupportSet support = support_from_kshot(subset, split.all());

            Detector det(spec.detector);
            det.load_values(ft_run.checkpoint.params);
            const std::vector<EvalDetection> detections =
                run_inference(det, support_data, support, test);

            const DetectionReport report =
                evaluate(detections, ground_truth_from_dataset(test), split.all(),
                         spec.iou_threshold, spec.ap_mode);

            outcome.novel_maps.push_back(novel_map(report, split.novel));
            outcome.overall_maps.push_back(report.map);
            outcome.reports.push_back(report);

            if (persist) {
                const fs::path dir = fs::path(spec.output_dir) / outcome.strategy /
                                     ("seed" + std::to_string(seed));
                fs::create_directories(dir);
                base_run.checkpoint.save((dir / "base.ckpt").string());
                ft_run.checkpoint.save((dir / "finetune.ckpt").string());
                write_text(dir / "base_trace.csv", trace_to_csv(base_run.trace));
                write_text(dir / "finetune_trace.csv", trace_to_csv(ft_run.trace));
                write_text(dir / "kshot.txt", subset.to_manifest());
                write_text(dir / "detections.txt", detections_to_text(detections));
                write_text(dir / "report.txt", report.to_text());
                write_text(dir / "report.csv", report.to_csv());
            }
        }

        outcome.mean_novel_map = mean(outcome.novel_maps);
        outcome.mean_overall_map = mean(outcome.overall_maps);
        result.outcomes.push_back(std::move(outcome));
    }

    std::ostringstream table;
    char line[128];
    std::snprintf(line, sizeof(line), "%-10s %12s %12s\n", "strategy", "novel mAP", "overall mAP");
    table << line;
    for (const StrategyOutcome& o : result.outcomes) {
        std::snprintf(line, sizeof(line), "%-10s %12.2f %12.2f\n", o.strategy.c_str(),
                      100.0 * o.mean_novel_map, 100.0 * o.mean_overall_map);
        table << line;
    }
    result.table_text = table.str();
    if (persist) write_text(fs::path(spec.output_dir) / "summary.txt", result.table_text);
    return result;
}

}  // namespace fsdet
