// SPDX-License-Identifier: Apache-2.0
#include "fsdet/dataset.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace fsdet {

CategoryRegistry::CategoryRegistry(std::vector<std::string> names) : names_(std::move(names)) {
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw std::invalid_argument("CategoryRegistry: empty category name");
        if (!seen.insert(n).second)
            throw std::invalid_argument("CategoryRegistry: duplicate category '" + n + "'");
    }
}

bool CategoryRegistry::contains(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t CategoryRegistry::index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        throw std::invalid_argument("unknown category '" + name + "'");
    return static_cast<std::size_t>(it - names_.begin());
}

void CategoryRegistry::replace(const std::string& from, const std::string& to) {
    if (contains(to))
        throw std::invalid_argument("CategoryRegistry: '" + to + "' already registered");
    names_[index_of(from)] = to;
}

void ImageRecord::validate() const {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("record '" + id + "': non-positive extent");
    if (has_pixels() && (pixels.width != width || pixels.height != height))
        throw std::invalid_argument("record '" + id + "': pixel buffer size mismatch");
    if (has_mask() && (mask.width != width || mask.height != height))
        throw std::invalid_argument("record '" + id + "': mask size mismatch");
    for (const auto& a : annotations) {
        require_valid(a.box, "record '" + id + "'");
        if (a.box.x_max > width || a.box.y_max > height)
            throw std::invalid_argument("record '" + id + "': annotation outside image extent");
    }
}

const ImageRecord& DatasetIndex::by_id(const std::string& id) const {
    for (const auto& r : records)
        if (r.id == id) return r;
    throw std::invalid_argument("no record with id '" + id + "'");
}

std::size_t DatasetIndex::annotation_count() const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.annotations.size();
    return n;
}

std::pair<std::size_t, std::size_t> DatasetIndex::category_box_counts(
    const std::string& category) const {
    std::size_t total = 0, usable = 0;
    for (const auto& r : records) {
        for (const auto& a : r.annotations) {
            if (a.category != category) continue;
            ++total;
            if (!a.ignored) ++usable;
        }
    }
    return {total, usable};
}

void DatasetIndex::validate() const {
    std::set<std::string> ids;
    for (const auto& r : records) {
        if (!ids.insert(r.id).second)
            throw std::invalid_argument("duplicate record id '" + r.id + "'");
        r.validate();
        for (const auto& a : r.annotations) {
            if (!categories.contains(a.category))
                throw std::invalid_argument("record '" + r.id + "' uses unknown category '" +
                                            a.category + "'");
        }
    }
}

void DatasetIndex::sort_records() {
    std::sort(records.begin(), records.end(),
              [](const ImageRecord& a, const ImageRecord& b) { return a.id < b.id; });
}

}  // namespace fsdet
