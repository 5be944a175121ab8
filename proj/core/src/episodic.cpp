// SPDX-License-Identifier: Apache-2.0
#include "fsdet/episodic.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fsdet/rng.hpp"

namespace fsdet {

std::vector<std::string> CategorySplit::all() const {
    std::vector<std::string> out = base;
    out.insert(out.end(), novel.begin(), novel.end());
    return out;
}

void CategorySplit::validate(const CategoryRegistry& registry) const {
    std::set<std::string> seen;
    for (const auto& c : all()) {
        if (!registry.contains(c))
            throw std::invalid_argument("split category '" + c + "' not in registry");
        if (!seen.insert(c).second)
            throw std::invalid_argument("split lists category '" + c + "' twice");
    }
    if (seen.size() != registry.size())
        throw std::invalid_argument("split does not cover the registry");
}

CategoryRegistry voc_cucumber_registry() {
    return CategoryRegistry({
        "aeroplane", "bicycle", "boat", "bottle", "car",
        "cat", "chair", "dining-table", "dog", "horse",
        "person", "potted-plant", "sheep", "train", "tv-monitor",
        "bird", "bus", "cow", "motobike", "cucumber",
    });
}

CategorySplit make_split(const CategoryRegistry& registry, SplitMode mode, std::uint64_t seed) {
    if (registry.size() < 2)
        throw std::invalid_argument("make_split: registry needs at least 2 categories");

    if (mode == SplitMode::Fixed) {
        const CategoryRegistry expected = voc_cucumber_registry();
        std::set<std::string> have(registry.names().begin(), registry.names().end());
        std::set<std::string> want(expected.names().begin(), expected.names().end());
        if (have != want)
            throw std::invalid_argument(
                "make_split: fixed mode applies only to the 20-category VOC+cucumber registry");
        CategorySplit split;
        split.base = {"aeroplane", "bicycle",     "boat",  "bottle", "car",
                      "cat",       "chair",       "dining-table", "dog", "horse",
                      "person",    "potted-plant", "sheep", "train", "tv-monitor"};
        split.novel = {"bird", "bus", "cow", "motobike", "cucumber"};
        return split;
    }

    std::vector<std::string> names = registry.names();
    Rng rng(seed);
    rng.shuffle(names.begin(), names.end());
    const std::size_t novel_count = std::max<std::size_t>(1, names.size() / 4);
    CategorySplit split;
    split.base.assign(names.begin(), names.end() - novel_count);
    split.novel.assign(names.end() - novel_count, names.end());
    return split;
}

namespace {

bool record_has_category(const ImageRecord& rec, const std::string& category) {
    return std::any_of(rec.annotations.begin(), rec.annotations.end(),
                       [&](const Annotation& a) { return a.category == category && !a.ignored; });
}

}  // namespace

FewShotTask sample_task(const DatasetIndex& dataset, const CategorySplit& split,
                        std::size_t categories_per_task, std::uint64_t seed) {
    if (categories_per_task < 1 || categories_per_task > split.base.size())
        throw std::invalid_argument("sample_task: bad categories_per_task");

    Rng rng(seed);
    std::vector<std::string> pool = split.base;
    rng.shuffle(pool.begin(), pool.end());
    pool.resize(categories_per_task);
    std::sort(pool.begin(), pool.end());

    FewShotTask task;
    task.task_id = seed;
    task.categories = pool;

    std::set<std::string> support_ids;
    for (const auto& cat : task.categories) {
        std::vector<std::size_t> candidates;
        std::vector<std::size_t> fresh;  // not already used as support
        for (std::size_t i = 0; i < dataset.records.size(); ++i) {
            if (!record_has_category(dataset.records[i], cat)) continue;
            candidates.push_back(i);
            if (!support_ids.count(dataset.records[i].id)) fresh.push_back(i);
        }
        if (candidates.empty())
            throw std::invalid_argument("sample_task: category '" + cat + "' has zero instances");
        const auto& from = fresh.empty() ? candidates : fresh;
        const ImageRecord& rec = dataset.records[from[rng.index(from.size())]];
        std::vector<std::size_t> box_indices;
        for (std::size_t b = 0; b < rec.annotations.size(); ++b)
            if (rec.annotations[b].category == cat && !rec.annotations[b].ignored)
                box_indices.push_back(b);
        task.support.push_back(
            SupportEntry{rec.id, box_indices[rng.index(box_indices.size())], cat});
        support_ids.insert(rec.id);
    }

    for (const auto& rec : dataset.records) {
        if (support_ids.count(rec.id)) continue;
        const bool relevant = std::any_of(task.categories.begin(), task.categories.end(),
                                          [&](const std::string& c) {
                                              return record_has_category(rec, c);
                                          });
        if (relevant) task.query_ids.push_back(rec.id);
    }
    if (task.query_ids.empty())
        throw std::runtime_error("sample_task: no query images left outside the support set");
    return task;
}

KShotSubset build_kshot_subset(const DatasetIndex& dataset, const CategorySplit& split, int k,
                               std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("build_kshot_subset: k must be >= 1");
    const std::vector<std::string> categories = split.all();

    Rng rng(seed);
    std::set<std::string> selected_ids;
    std::vector<const ImageRecord*> selected;  // in selection order
    std::map<std::string, int> counts;         // usable boxes in selected records
    for (const auto& c : categories) counts[c] = 0;

    auto add_record = [&](const ImageRecord& rec) {
        selected_ids.insert(rec.id);
        selected.push_back(&rec);
        for (const auto& a : rec.annotations)
            if (!a.ignored && counts.count(a.category)) ++counts[a.category];
    };

    for (const auto& cat : categories) {
        if (counts[cat] >= k) continue;
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < dataset.records.size(); ++i) {
            const auto& rec = dataset.records[i];
            if (selected_ids.count(rec.id)) continue;
            if (record_has_category(rec, cat)) candidates.push_back(i);
        }
        rng.shuffle(candidates.begin(), candidates.end());
        for (std::size_t i : candidates) {
            if (counts[cat] >= k) break;
            add_record(dataset.records[i]);
        }
    }

    std::string deficit;
    for (const auto& cat : categories) {
        if (counts[cat] < k)
            deficit += " " + cat + ":" + std::to_string(k - counts[cat]);
    }
    if (!deficit.empty())
        throw std::invalid_argument("build_kshot_subset: insufficient boxes, deficits:" + deficit);

    KShotSubset out;
    out.k = k;
    std::map<std::string, int> kept;
    for (const ImageRecord* rec : selected) {
        out.record_ids.push_back(rec->id);
        for (std::size_t b = 0; b < rec->annotations.size(); ++b) {
            const Annotation& a = rec->annotations[b];
            KShotBox box{rec->id, b, a.category, true};
            // overshoot past k, pre-ignored boxes, and off-split categories stay ignored
            if (!a.ignored && counts.count(a.category) && kept[a.category] < k) {
                box.ignored = false;
                ++kept[a.category];
            }
            out.boxes.push_back(std::move(box));
        }
    }
    for (const auto& [cat, n] : kept) out.usable_counts[cat] = static_cast<std::size_t>(n);
    return out;
}

DatasetIndex KShotSubset::materialize(const DatasetIndex& source) const {
    DatasetIndex out;
    out.categories = source.categories;
    out.provenance = source.provenance + "+kshot" + std::to_string(k);
    std::map<std::pair<std::string, std::size_t>, bool> usable;
    for (const auto& b : boxes) usable[{b.record_id, b.box_index}] = !b.ignored;
    for (const auto& id : record_ids) {
        ImageRecord rec = source.by_id(id);
        for (std::size_t b = 0; b < rec.annotations.size(); ++b) {
            auto it = usable.find({id, b});
            rec.annotations[b].ignored = (it == usable.end()) || !it->second;
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

std::string KShotSubset::to_manifest() const {
    std::ostringstream os;
    os << "k " << k << "\n";
    for (const auto& id : record_ids) os << "record " << id << "\n";
    for (const auto& b : boxes)
        os << "box " << b.record_id << " " << b.box_index << " " << b.category << " "
           << (b.ignored ? "ignored" : "usable") << "\n";
    return os.str();
}

KShotSubset KShotSubset::from_manifest(const std::string& text) {
    KShotSubset out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "k") {
            ls >> out.k;
        } else if (tag == "record") {
            std::string id;
            ls >> id;
            out.record_ids.push_back(id);
        } else if (tag == "box") {
            KShotBox b;
            std::string flag;
            ls >> b.record_id >> b.box_index >> b.category >> flag;
            b.ignored = flag == "ignored";
            if (flag != "ignored" && flag != "usable")
                throw std::invalid_argument("k-shot manifest: bad flag '" + flag + "'");
            if (!b.ignored) ++out.usable_counts[b.category];
            out.boxes.push_back(std::move(b));
        } else {
            throw std::invalid_argument("k-shot manifest: unknown line '" + line + "'");
        }
        if (ls.fail()) throw std::invalid_argument("k-shot manifest: malformed line '" + line + "'");
    }
    if (out.k < 1) throw std::invalid_argument("k-shot manifest: missing k");
    return out;
}

}  // namespace fsdet
