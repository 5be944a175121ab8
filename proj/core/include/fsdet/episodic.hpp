// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fsdet/dataset.hpp"

namespace fsdet {

struct CategorySplit {
    std::vector<std::string> base;
    std::vector<std::string> novel;

    std::vector<std::string> all() const;
    void validate(const CategoryRegistry& registry) const;  // disjoint, exhaustive
};

enum class SplitMode { Fixed, Seeded };

/// Fixed mode reproduces the published 15/5 split for the VOC+cucumber
/// registry (novel = bird, bus, cow, motobike, cucumber) and requires that
/// exact registry. Seeded mode shuffles deterministically and takes the
/// last quarter (at least one) of categories as novel.
CategorySplit make_split(const CategoryRegistry& registry, SplitMode mode,
                         std::uint64_t seed = 0);

/// The registry the fixed split applies to: 20 VOC categories with
/// "cucumber" in place of one novel class.
CategoryRegistry voc_cucumber_registry();

/// One support exemplar: a record plus the index of its designated box.
struct SupportEntry {
    std::string record_id;
    std::size_t box_index = 0;
    std::string category;
};

/// A support/query episode over N categories: exactly one support entry per
/// category; query records are disjoint from support records.
struct FewShotTask {
    std::vector<std::string> categories;
    std::vector<SupportEntry> support;
    std::vector<std::string> query_ids;
    std::uint64_t task_id = 0;
};

/// Samples an episode over `categories_per_task` base categories. Support
/// images are drawn without replacement where possible; every query image
/// contains at least one task category. Throws naming any category with
/// zero instances.
FewShotTask sample_task(const DatasetIndex& dataset, const CategorySplit& split,
                        std::size_t categories_per_task, std::uint64_t seed);

/// Box-level marker inside a k-shot subset.
struct KShotBox {
    std::string record_id;
    std::size_t box_index = 0;
    std::string category;
    bool ignored = false;
};

struct KShotSubset {
    int k = 0;
    std::vector<std::string> record_ids;
    std::vector<KShotBox> boxes;
    std::map<std::string, std::size_t> usable_counts;  // category -> non-ignored boxes

    /// Re-derives a dataset view: the selected records with ignore flags
    /// applied on their annotations.
    DatasetIndex materialize(const DatasetIndex& source) const;

    std::string to_manifest() const;
    static KShotSubset from_manifest(const std::string& text);
};

/// Greedy seeded selection of images per category until each category in
/// the split (base and novel) has at least k usable boxes; overshoot boxes
/// and boxes of already-satisfied categories are marked ignored so exactly
/// k usable boxes per category remain. Throws with a per-category deficit
/// report when the dataset is insufficient.
KShotSubset build_kshot_subset(const DatasetIndex& dataset, const CategorySplit& split, int k,
                               std::uint64_t seed);

}  // namespace fsdet
