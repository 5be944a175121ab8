// SPDX-License-Identifier: Apache-2.0
// fsdet: command-line front end for the few-shot detection pipeline.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fsdet/augment.hpp"
#include "fsdet/config.hpp"
#include "fsdet/episodic.hpp"
#include "fsdet/eval.hpp"
#include "fsdet/experiment.hpp"
#include "fsdet/rng.hpp"
#include "fsdet/synth.hpp"
#include "fsdet/trainer.hpp"
#include "fsdet/voc.hpp"

namespace fs = std::filesystem;
using namespace fsdet;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out;
    std::uint64_t seed = 0;
    bool deterministic = false;  // accepted for scripting; execution is always deterministic
    bool strict = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
    cmd->add_option("--config", c.config_path, "configuration file (key = value lines)");
    cmd->add_option("--set", c.overrides, "override, key=value (repeatable)");
    if (with_out) cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--seed", c.seed, "global seed");
    cmd->add_flag("--deterministic", c.deterministic,
                  "deterministic single-threaded execution (always on; flag for scripting)");
    cmd->add_flag("--strict", c.strict, "escalate recoverable dataset problems to errors");
}

Config load_config(const Common& c) {
    Config cfg = c.config_path.empty() ? Config() : Config::parse_file(c.config_path);
    for (const auto& o : c.overrides) cfg.set_override(o);
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void echo_config(const Config& cfg, const std::string& out_dir) {
    if (out_dir.empty()) return;
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "config.txt", cfg.resolved_text());
}

CategoryRegistry registry_from_file(const std::string& root) {
    std::ifstream in(fs::path(root) / "categories.txt");
    if (!in) throw std::runtime_error("missing " + root + "/categories.txt");
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) names.push_back(line);
    return CategoryRegistry(names);
}

/// Dataset per config: generated when dataset.kind=synth, loaded from
/// dataset.root when dataset.kind=disk.
DatasetIndex open_dataset(const Config& cfg, const Common& c) {
    const std::string kind = cfg.get("dataset.kind");
    if (kind == "synth") return generate_synthetic_dataset(cfg.synth_spec(), c.seed);
    if (kind == "disk") {
        LayoutConfig layout;
        layout.strict = c.strict;
        return load_dataset(cfg.get("dataset.root"), registry_from_file(cfg.get("dataset.root")),
                            layout);
    }
    throw std::invalid_argument("dataset.kind must be synth or disk, got '" + kind + "'");
}

std::vector<ImageRecord> open_background_pool(const Config& cfg, std::uint64_t seed) {
    return generate_background_pool(cfg.get_int("experiment.backgrounds"),
                                    cfg.get_int("synth.width"), cfg.get_int("synth.height"), 2,
                                    kTargetBackgroundCategory, derive_seed(seed, "bg"));
}

DatasetIndex pool_as_dataset(const std::vector<ImageRecord>& pool) {
    DatasetIndex index;
    index.categories = CategoryRegistry({kTargetBackgroundCategory});
    index.records = pool;
    index.provenance = "background pool";
    return index;
}

int cmd_dataset_validate(const Common& c, const std::string& root) {
    LayoutConfig layout;
    layout.strict = c.strict;
    layout.load_pixels = true;
    const DatasetIndex data = load_dataset(root, registry_from_file(root), layout);
    data.validate();
    std::cout << "ok: " << data.records.size() << " records, " << data.annotation_count()
              << " boxes, " << data.categories.size() << " categories";
    if (data.skipped) std::cout << ", " << data.skipped << " skipped";
    std::cout << "\n";
    return 0;
}

int cmd_dataset_synth(const Common& c) {
    const Config cfg = load_config(c);
    if (c.out.empty()) throw std::invalid_argument("dataset synth requires --out");
    const DatasetIndex data = generate_synthetic_dataset(cfg.synth_spec(), c.seed);
    echo_config(cfg, c.out);
    materialize_dataset(data, c.out);
    std::cout << "wrote " << data.records.size() << " records to " << c.out << "\n";
    return 0;
}

int cmd_augment_apply(const Common& c) {
    const Config cfg = load_config(c);
    if (c.out.empty()) throw std::invalid_argument("augment apply requires --out");
    const DatasetIndex data = open_dataset(cfg, c);
    const AugmentStrategy strategy = cfg.augment_strategy();
    const auto pool = open_background_pool(cfg, c.seed);
    const DatasetIndex pool_index = pool_as_dataset(pool);
    const DatasetIndex out = apply_strategy(data, strategy, &pool_index, &pool, c.seed);
    echo_config(cfg, c.out);
    materialize_dataset(out, c.out);
    std::cout << "applied " << AugmentStrategy::kind_to_string(strategy.kind) << ": "
              << out.records.size() << " records to " << c.out << "\n";
    return 0;
}

int cmd_train_base(const Common& c, const std::string& resume_path) {
    const Config cfg = load_config(c);
    if (c.out.empty()) throw std::invalid_argument("train base requires --out");
    const DatasetIndex data = open_dataset(cfg, c);
    const CategorySplit split = make_split(data.categories, cfg.split_mode(), c.seed);
    AugmentStrategy strategy = cfg.augment_strategy();
    if (strategy.kind == AugmentKind::AddTargetBackground &&
        strategy.atb_replaced_category.empty())
        strategy.atb_replaced_category = split.base.front();
    const auto pool = open_background_pool(cfg, c.seed);
    const DatasetIndex pool_index = pool_as_dataset(pool);

    TrainConfig train_cfg = cfg.train_config(false);
    train_cfg.seed = c.seed;
    Checkpoint resume;
    const bool resuming = !resume_path.empty();
    if (resuming) resume = Checkpoint::load(resume_path);

    const TrainResult run = train_base(data, split, strategy, &pool_index, &pool,
                                       cfg.detector_config(), train_cfg,
                                       resuming ? &resume : nullptr);
    echo_config(cfg, c.out);
    run.checkpoint.save((fs::path(c.out) / "base.ckpt").string());
    write_text(fs::path(c.out) / "trace.csv", trace_to_csv(run.trace));
    std::cout << "base checkpoint: " << (fs::path(c.out) / "base.ckpt").string() << " ("
              << train_cfg.iterations << " iterations)\n";
    return 0;
}

int cmd_train_finetune(const Common& c, const std::string& base_path,
                       const std::string& resume_path) {
    const Config cfg = load_config(c);
    if (c.out.empty()) throw std::invalid_argument("train finetune requires --out");
    const DatasetIndex data = open_dataset(cfg, c);
    const CategorySplit split = make_split(data.categories, cfg.split_mode(), c.seed);
    TrainConfig train_cfg = cfg.train_config(true);
    train_cfg.seed = c.seed;
    const Checkpoint base = Checkpoint::load(base_path);
    Checkpoint resume;
    const bool resuming = !resume_path.empty();
    if (resuming) resume = Checkpoint::load(resume_path);

    const TrainResult run = finetune_fewshot(base, data, split, train_cfg.k,
                                             cfg.detector_config(), train_cfg,
                                             resuming ? &resume : nullptr);
    echo_config(cfg, c.out);
    run.checkpoint.save((fs::path(c.out) / "finetune.ckpt").string());
    write_text(fs::path(c.out) / "trace.csv", trace_to_csv(run.trace));
    std::cout << "finetune checkpoint: " << (fs::path(c.out) / "finetune.ckpt").string() << " ("
              << train_cfg.iterations << " iterations)\n";
    return 0;
}

int cmd_eval(const Common& c, const std::string& detections_path,
             const std::string& checkpoint_path) {
    const Config cfg = load_config(c);
    const DatasetIndex data = open_dataset(cfg, c);
    const CategorySplit split = make_split(data.categories, cfg.split_mode(), c.seed);

    std::vector<EvalDetection> detections;
    if (!detections_path.empty()) {
        std::ifstream in(detections_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read " + detections_path);
        std::ostringstream os;
        os << in.rdbuf();
        detections = detections_from_text(os.str());
    } else if (!checkpoint_path.empty()) {
        const Checkpoint ckpt = Checkpoint::load(checkpoint_path);
        Detector det(cfg.detector_config());
        det.load_values(ckpt.params);
        const int k = cfg.get_int("trainer.k");
        const KShotSubset subset =
            build_kshot_subset(data, split, k, derive_seed(c.seed, "kshot"));
        const DatasetIndex support_data = subset.materialize(data);
        detections = run_inference(det, support_data, support_from_kshot(subset, split.all()),
                                   data);
    } else {
        throw std::invalid_argument("eval requires --detections or --checkpoint");
    }

    const DetectionReport report =
        evaluate(detections, ground_truth_from_dataset(data), split.all(),
                 cfg.get_double("eval.iou_threshold"), cfg.ap_mode());
    std::cout << report.to_text();
    if (!c.out.empty()) {
        echo_config(cfg, c.out);
        write_text(fs::path(c.out) / "detections.txt", detections_to_text(detections));
        write_text(fs::path(c.out) / "report.txt", report.to_text());
        write_text(fs::path(c.out) / "report.csv", report.to_csv());
    }
    return 0;
}

int cmd_experiment_run(const Common& c) {
    const Config cfg = load_config(c);
    if (c.out.empty()) throw std::invalid_argument("experiment run requires --out");
    ExperimentSpec spec;
    spec.synth = cfg.synth_spec();
    spec.test_images = cfg.get_int("experiment.test_images");
    spec.background_count = cfg.get_int("experiment.backgrounds");
    spec.detector = cfg.detector_config();
    spec.base_train = cfg.train_config(false);
    spec.finetune_train = cfg.train_config(true);
    for (const auto& name : cfg.get_list("experiment.strategies")) {
        AugmentStrategy s = cfg.augment_strategy();
        s.kind = AugmentStrategy::kind_from_string(name);
        spec.strategies.push_back(s);
    }
    spec.seeds.clear();
    for (const auto& s : cfg.get_list("experiment.seeds"))
        spec.seeds.push_back(std::stoull(s));
    if (spec.seeds.empty()) spec.seeds.push_back(c.seed);
    spec.iou_threshold = cfg.get_double("eval.iou_threshold");
    spec.ap_mode = cfg.ap_mode();
    spec.output_dir = c.out;
    echo_config(cfg, c.out);
    const ComparisonResult result = run_comparison(spec);
    std::cout << result.table_text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"few-shot feature-reweighting object detection pipeline"};
    app.require_subcommand(1);

    Common c;
    std::string root, resume_path, base_path, detections_path, checkpoint_path;

    CLI::App* dataset = app.add_subcommand("dataset", "dataset utilities")->require_subcommand(1);
    CLI::App* ds_validate = dataset->add_subcommand("validate", "validate an on-disk dataset");
    ds_validate->add_option("--root", root, "dataset root directory")->required();
    add_common(ds_validate, c, false);
    CLI::App* ds_synth = dataset->add_subcommand("synth", "generate a synthetic dataset");
    add_common(ds_synth, c);

    CLI::App* augment = app.add_subcommand("augment", "augmentation utilities")
                            ->require_subcommand(1);
    CLI::App* aug_apply = augment->add_subcommand("apply", "apply a strategy to a dataset");
    add_common(aug_apply, c);

    CLI::App* train = app.add_subcommand("train", "training stages")->require_subcommand(1);
    CLI::App* tr_base = train->add_subcommand("base", "stage 1: base-category training");
    tr_base->add_option("--resume", resume_path, "resume from a base checkpoint");
    add_common(tr_base, c);
    CLI::App* tr_ft = train->add_subcommand("finetune", "stage 2: few-shot fine-tuning");
    tr_ft->add_option("--base", base_path, "base checkpoint")->required();
    tr_ft->add_option("--resume", resume_path, "resume from a finetune checkpoint");
    add_common(tr_ft, c);

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate detections (mAP)");
    eval_cmd->add_option("--detections", detections_path, "detections text file");
    eval_cmd->add_option("--checkpoint", checkpoint_path, "run inference from a checkpoint");
    add_common(eval_cmd, c);

    CLI::App* experiment = app.add_subcommand("experiment", "strategy comparisons")
                               ->require_subcommand(1);
    CLI::App* exp_run = experiment->add_subcommand("run", "run the strategy comparison");
    add_common(exp_run, c);

    // Exit codes: 0 success, 1 usage/validation failure, 2 runtime error.
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (ds_validate->parsed()) return cmd_dataset_validate(c, root);
        if (ds_synth->parsed()) return cmd_dataset_synth(c);
        if (aug_apply->parsed()) return cmd_augment_apply(c);
        if (tr_base->parsed()) return cmd_train_base(c, resume_path);
        if (tr_ft->parsed()) return cmd_train_finetune(c, base_path, resume_path);
        if (eval_cmd->parsed()) return cmd_eval(c, detections_path, checkpoint_path);
        if (exp_run->parsed()) return cmd_experiment_run(c);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
