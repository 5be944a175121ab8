// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fsdet/geometry.hpp"
#include "fsdet/image.hpp"

namespace fsdet {

/// Ordered list of category names; order is significant (it defines the
/// category axis everywhere downstream) and duplicates are rejected.
class CategoryRegistry {
public:
    CategoryRegistry() = default;
    explicit CategoryRegistry(std::vector<std::string> names);

    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }
    bool contains(const std::string& name) const;
    /// Index of a category; throws naming the category if absent.
    std::size_t index_of(const std::string& name) const;
    const std::string& at(std::size_t i) const { return names_.at(i); }
    /// Replaces the category in-place, keeping its slot. Throws if `from`
    /// is absent or `to` already present.
    void replace(const std::string& from, const std::string& to);

    bool operator==(const CategoryRegistry&) const = default;

private:
    std::vector<std::string> names_;
};

/// One labeled object. `ignored` objects are kept for bookkeeping but are
/// excluded from loss and from evaluator ground-truth counts (VOC
/// "difficult" maps onto this flag at the parse boundary).
struct Annotation {
    std::string category;
    BoundingBox box;
    bool ignored = false;

    bool operator==(const Annotation&) const = default;
};

struct ImageRecord {
    std::string id;
    int width = 0;
    int height = 0;
    Image pixels;                 // may be empty for annotation-only workflows
    std::vector<Annotation> annotations;
    Mask mask;                    // optional; empty() when absent

    bool has_mask() const { return !mask.empty(); }
    bool has_pixels() const { return pixels.valid(); }
    void validate() const;        // boxes within extent, buffers consistent
};

struct DatasetIndex {
    std::vector<ImageRecord> records;
    CategoryRegistry categories;
    std::string provenance;       // source path or synthesis seed string
    int skipped = 0;              // unparseable files skipped during load

    const ImageRecord& by_id(const std::string& id) const;
    std::size_t annotation_count() const;
    /// (total boxes, non-ignored boxes) for one category.
    std::pair<std::size_t, std::size_t> category_box_counts(const std::string& category) const;
    /// Throws on duplicate record ids or invalid records.
    void validate() const;
    /// Orders records lexicographically by id; load paths call this so
    /// directory iteration order cannot leak into results.
    void sort_records();
};

}  // namespace fsdet
