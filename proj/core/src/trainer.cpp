// SPDX-License-Identifier: Apache-2.0
#include "fsdet/trainer.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fsdet {

void TrainConfig::validate(bool finetune) const {
    if (iterations < 0) throw std::invalid_argument("trainer: negative iteration count");
    if (learning_rate < 0) throw std::invalid_argument("trainer: negative learning rate");
    if (batch < 1) throw std::invalid_argument("trainer: batch must be >= 1");
    if (categories_per_task < 1)
        throw std::invalid_argument("trainer: categories_per_task must be >= 1");
    if (finetune && k < 1) throw std::invalid_argument("trainer: k must be >= 1");
}

namespace {

constexpr char kCkptMagic[4] = {'F', 'S', 'C', 'K'};
constexpr std::uint32_t kCkptVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void write_str(std::ostream& os, const std::string& s) {
    write_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (!is) throw std::runtime_error("checkpoint truncated");
    return v;
}
std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    if (!is) throw std::runtime_error("checkpoint truncated");
    return v;
}
std::string read_str(std::istream& is) {
    const std::uint32_t n = read_u32(is);
    if (n > 1 << 20) throw std::runtime_error("checkpoint: absurd string length");
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw std::runtime_error("checkpoint truncated");
    return s;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
    std::ostringstream os(std::ios::binary);
    os.write(kCkptMagic, 4);
    write_u32(os, kCkptVersion);
    write_str(os, stage);
    write_u32(os, static_cast<std::uint32_t>(iteration));
    write_u64(os, config_hash);
    write_str(os, rng_state);
    save_params(os, params);
    // write whole-file so a crash cannot leave a torn checkpoint behind
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    const std::string blob = os.str();
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read checkpoint " + path);
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCkptMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const std::uint32_t version = read_u32(is);
    if (version != kCkptVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    Checkpoint ckpt;
    ckpt.stage = read_str(is);
    ckpt.iteration = static_cast<int>(read_u32(is));
    ckpt.config_hash = read_u64(is);
    ckpt.rng_state = read_str(is);
    ckpt.params = load_params(is);
    return ckpt;
}

std::string trace_to_csv(const std::vector<LossTraceRow>& trace) {
    std::ostringstream os;
    os << "iteration,total,class_ce,box_reg,objectness\n";
    for (const auto& row : trace) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g\n", row.iteration, row.total,
                      row.class_ce, row.box_reg, row.objectness);
        os << buf;
    }
    return os.str();
}

namespace {

/// Support exemplars for one pass category within a step.
struct StepSupport {
    std::string category;
    std::vector<std::pair<const ImageRecord*, BoundingBox>> exemplars;
};

/// Mean support embedding per category, on the given tape.
std::vector<Var> embed_supports(Detector& det, Tape& tape,
                                const std::vector<StepSupport>& supports) {
    std::vector<Var> out;
    for (const auto& s : supports) {
        if (s.exemplars.empty())
            throw std::invalid_argument("support set: no exemplars for category '" + s.category +
                                        "'");
        std::vector<Var> vecs;
        for (const auto& [rec, box] : s.exemplars)
            vecs.push_back(det.embed_support(tape, det.support_to_tensor(*rec, box)));
        Var mean = vecs[0];
        for (std::size_t i = 1; i < vecs.size(); ++i) mean = nn::add(tape, mean, vecs[i]);
        if (vecs.size() > 1)
            mean = nn::scale(tape, mean, 1.0f / static_cast<float>(vecs.size()));
        out.push_back(mean);
    }
    return out;
}

struct StepStats {
    double total = 0, class_ce = 0, box_reg = 0, objectness = 0;
};

/// One optimization step: embeds supports, runs the re-weighted prediction
/// path over the query batch, and applies SGD on the mean loss.
StepStats train_step(Detector& det, const std::vector<StepSupport>& supports,
                     const std::vector<const ImageRecord*>& queries, double lr) {
    Tape tape;
    const std::vector<Var> w = embed_supports(det, tape, supports);
    std::vector<std::string> pass_categories;
    for (const auto& s : supports) pass_categories.push_back(s.category);

    Var total;
    StepStats stats;
    for (const ImageRecord* rec : queries) {
        Var features = det.extract_features(tape, det.image_to_tensor(*rec));
        std::vector<Var> heads;
        for (const auto& wi : w)
            heads.push_back(det.predict(tape, det.reweight(tape, features, wi)));
        const auto gts = gt_to_input_space(*rec, pass_categories, det.config());
        LossTermsT<float> terms = det.detection_loss(tape, heads, gts);
        total = total ? nn::add(tape, total, terms.total) : terms.total;
        stats.class_ce += terms.class_ce->value.data[0];
        stats.box_reg += terms.box_reg->value.data[0];
        stats.objectness += terms.objectness->value.data[0];
    }
    const float inv = 1.0f / static_cast<float>(queries.size());
    total = nn::scale(tape, total, inv);
    stats.total = total->value.data[0];
    stats.class_ce *= inv;
    stats.box_reg *= inv;
    stats.objectness *= inv;

    det.params().zero_grads();
    tape.backward(total);
    det.params().sgd_step(static_cast<float>(lr));
    return stats;
}

void check_finite(const StepStats& s, int iteration,
                  const std::vector<const ImageRecord*>& queries) {
    if (std::isfinite(s.total)) return;
    std::string manifest;
    for (const auto* r : queries) manifest += " " + r->id;
    throw std::runtime_error("non-finite loss at iteration " + std::to_string(iteration) +
                             "; batch manifest:" + manifest);
}

std::vector<const ImageRecord*> pick_batch(const DatasetIndex& data,
                                           const std::vector<std::string>& ids, int batch,
                                           Rng& rng) {
    std::vector<std::string> pool = ids;
    rng.shuffle(pool.begin(), pool.end());
    if (static_cast<int>(pool.size()) > batch) pool.resize(batch);
    std::vector<const ImageRecord*> out;
    for (const auto& id : pool) out.push_back(&data.by_id(id));
    return out;
}

}  // namespace

TrainResult train_base(const DatasetIndex& dataset, const CategorySplit& split,
                       const AugmentStrategy& strategy, const DatasetIndex* backgrounds,
                       const std::vector<ImageRecord>* background_records,
                       const DetectorConfig& detector_cfg, const TrainConfig& cfg,
                       const Checkpoint* resume) {
    cfg.validate(false);
    const DatasetIndex data =
        apply_strategy(dataset, strategy, backgrounds, background_records, cfg.seed);

    CategorySplit effective = split;
    if (strategy.kind == AugmentKind::AddTargetBackground) {
        for (auto& c : effective.base)
            if (c == strategy.atb_replaced_category) c = kTargetBackgroundCategory;
    }
    effective.validate(data.categories);

    Detector det(detector_cfg);
    int start_iteration = 0;
    if (resume) {
        if (resume->stage != "base")
            throw std::invalid_argument("train_base: resume checkpoint is not a base checkpoint");
        if (resume->config_hash != detector_cfg.fingerprint())
            throw std::invalid_argument("train_base: resume checkpoint config hash mismatch");
        det.load_values(resume->params);
        start_iteration = resume->iteration;
    } else {
        det.init(derive_seed(cfg.seed, "init"));
    }

    const std::size_t n_way =
        std::min<std::size_t>(cfg.categories_per_task, effective.base.size());

    TrainResult result;
    for (int it = start_iteration; it < cfg.iterations; ++it) {
        const std::uint64_t iter_seed = derive_seed(cfg.seed, "iter:" + std::to_string(it));
        const FewShotTask task = sample_task(data, effective, n_way, iter_seed);

        std::vector<StepSupport> supports;
        for (const auto& entry : task.support) {
            const ImageRecord& rec = data.by_id(entry.record_id);
            supports.push_back(
                StepSupport{entry.category, {{&rec, rec.annotations[entry.box_index].box}}});
        }
        Rng rng(derive_seed(iter_seed, "batch"));
        const auto queries = pick_batch(data, task.query_ids, cfg.batch, rng);

        const StepStats stats = train_step(det, supports, queries, cfg.learning_rate);
        check_finite(stats, it, queries);
        result.trace.push_back(
            LossTraceRow{it, stats.total, stats.class_ce, stats.box_reg, stats.objectness});
    }

    result.checkpoint.params = det.params();
    result.checkpoint.stage = "base";
    result.checkpoint.iteration = cfg.iterations;
    result.checkpoint.config_hash = detector_cfg.fingerprint();
    result.checkpoint.rng_state = "seed:" + std::to_string(cfg.seed);
    return result;
}

TrainResult finetune_fewshot(const Checkpoint& base, const DatasetIndex& dataset,
                             const CategorySplit& split, int k,
                             const DetectorConfig& detector_cfg, const TrainConfig& cfg,
                             const Checkpoint* resume) {
    cfg.validate(true);
    if (base.stage != "base")
        throw std::invalid_argument("finetune_fewshot: checkpoint stage is '" + base.stage +
                                    "', expected 'base'");
    if (base.config_hash != detector_cfg.fingerprint())
        throw std::invalid_argument("finetune_fewshot: checkpoint config hash mismatch");
    if (base.iteration > 0 && cfg.iterations >= base.iteration)
        throw std::invalid_argument(
            "finetune_fewshot: fine-tuning must use fewer iterations than the base stage");

    const KShotSubset subset =
        build_kshot_subset(dataset, split, k, derive_seed(cfg.seed, "kshot"));
    for (const auto& [cat, n] : subset.usable_counts) {
        if (static_cast<int>(n) != k)
            throw std::logic_error("k-shot subset has " + std::to_string(n) + " boxes for '" +
                                   cat + "'");
    }
    const DatasetIndex data = subset.materialize(dataset);
    const std::vector<std::string> categories = split.all();

    Detector det(detector_cfg);
    int start_iteration = 0;
    if (resume) {
        if (resume->stage != "finetune")
            throw std::invalid_argument("finetune_fewshot: resume checkpoint stage mismatch");
        if (resume->config_hash != detector_cfg.fingerprint())
            throw std::invalid_argument("finetune_fewshot: resume config hash mismatch");
        det.load_values(resume->params);
        start_iteration = resume->iteration;
    } else {
        det.load_values(base.params);
    }

    // every category's usable exemplars, fixed for the whole stage
    std::vector<StepSupport> supports;
    for (const auto& cat : categories) {
        StepSupport s{cat, {}};
        for (const auto& b : subset.boxes) {
            if (b.ignored || b.category != cat) continue;
            const ImageRecord& rec = data.by_id(b.record_id);
            s.exemplars.emplace_back(&rec, rec.annotations[b.box_index].box);
        }
        supports.push_back(std::move(s));
    }

    std::vector<std::string> record_ids;
    for (const auto& r : data.records) record_ids.push_back(r.id);

    TrainResult result;
    for (int it = start_iteration; it < cfg.iterations; ++it) {
        const std::uint64_t iter_seed = derive_seed(cfg.seed, "ft-iter:" + std::to_string(it));
        Rng rng(iter_seed);
        const auto queries = pick_batch(data, record_ids, cfg.batch, rng);
        const StepStats stats = train_step(det, supports, queries, cfg.learning_rate);
        check_finite(stats, it, queries);
        result.trace.push_back(
            LossTraceRow{it, stats.total, stats.class_ce, stats.box_reg, stats.objectness});
    }

    result.checkpoint.params = det.params();
    result.checkpoint.stage = "finetune";
    result.checkpoint.iteration = cfg.iterations;
    result.checkpoint.config_hash = detector_cfg.fingerprint();
    result.checkpoint.rng_state = "seed:" + std::to_string(cfg.seed);
    return result;
}

SupportSet support_from_kshot(const KShotSubset& subset,
                              const std::vector<std::string>& categories) {
    SupportSet out;
    for (const auto& cat : categories) {
        std::vector<SupportExemplar> ex;
        for (const auto& b : subset.boxes)
            if (!b.ignored && b.category == cat)
                ex.push_back(SupportExemplar{b.record_id, b.box_index});
        if (ex.empty())
            throw std::invalid_argument("support set: no exemplars for category '" + cat + "'");
        out.emplace_back(cat, std::move(ex));
    }
    return out;
}

std::vector<EvalDetection> run_inference(Detector& detector, const DatasetIndex& support_source,
                                         const SupportSet& support,
                                         const DatasetIndex& eval_data) {
    // embed the support set once; forward-only tape
    std::vector<Tensor> w_values;
    std::vector<std::string> categories;
    {
        Tape tape;
        std::vector<StepSupport> supports;
        for (const auto& [cat, exemplars] : support) {
            StepSupport s{cat, {}};
            for (const auto& e : exemplars) {
                const ImageRecord& rec = support_source.by_id(e.record_id);
                s.exemplars.emplace_back(&rec, rec.annotations[e.box_index].box);
            }
            supports.push_back(std::move(s));
            categories.push_back(cat);
        }
        for (const auto& v : embed_supports(detector, tape, supports))
            w_values.push_back(v->value);
    }

    std::vector<EvalDetection> out;
    for (const auto& rec : eval_data.records) {
        Tape tape;
        Var features = detector.extract_features(tape, detector.image_to_tensor(rec));
        std::vector<Tensor> heads;
        for (const auto& wv : w_values) {
            Var head = detector.predict(
                tape, detector.reweight(tape, features, tape.constant(wv)));
            heads.push_back(head->value);
        }
        for (const auto& d :
             detector.decode_predictions(heads, categories, rec.width, rec.height))
            out.push_back(EvalDetection{rec.id, d.category, d.confidence, d.box});
    }
    return out;
}

}  // namespace fsdet
