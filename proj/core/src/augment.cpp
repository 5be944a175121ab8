// SPDX-License-Identifier: Apache-2.0
#include "fsdet/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fsdet/rng.hpp"

namespace fsdet {

void AugmentStrategy::validate() const {
    if (gamma_factor <= 0.0) throw std::invalid_argument("augment: gamma factor must be > 0");
    if (contrast_factor <= 0.0) throw std::invalid_argument("augment: contrast factor must be > 0");
    if (replace_probability < 0.0 || replace_probability > 1.0)
        throw std::invalid_argument("augment: replace probability must be in [0,1]");
    if (kind == AugmentKind::AddTargetBackground && atb_replaced_category.empty())
        throw std::invalid_argument("augment: ATB needs the category to replace");
}

AugmentKind AugmentStrategy::kind_from_string(const std::string& s) {
    if (s == "none") return AugmentKind::None;
    if (s == "br") return AugmentKind::BackgroundReplace;
    if (s == "atb") return AugmentKind::AddTargetBackground;
    if (s == "ia") return AugmentKind::Illuminance;
    if (s == "ca") return AugmentKind::Contrast;
    throw std::invalid_argument("unknown augmentation kind '" + s +
                                "' (expected none|br|atb|ia|ca)");
}

std::string AugmentStrategy::kind_to_string(AugmentKind k) {
    switch (k) {
        case AugmentKind::None: return "none";
        case AugmentKind::BackgroundReplace: return "br";
        case AugmentKind::AddTargetBackground: return "atb";
        case AugmentKind::Illuminance: return "ia";
        case AugmentKind::Contrast: return "ca";
    }
    return "?";
}

std::array<std::uint8_t, 256> gamma_table(double gamma_factor, bool brighten) {
    if (gamma_factor <= 0.0) throw std::invalid_argument("gamma factor must be > 0");
    const double exponent = brighten ? 1.0 / gamma_factor : gamma_factor;
    std::array<std::uint8_t, 256> table{};
    for (int v = 0; v < 256; ++v) {
        const double mapped = 255.0 * std::pow(v / 255.0, exponent);
        table[v] = static_cast<std::uint8_t>(std::lround(mapped));
    }
    return table;
}

std::array<std::uint8_t, 256> contrast_table(double contrast_factor) {
    if (contrast_factor <= 0.0) throw std::invalid_argument("contrast factor must be > 0");
    std::array<std::uint8_t, 256> table{};
    for (int v = 0; v < 256; ++v) {
        const long mapped = std::lround(128.0 + contrast_factor * (v - 128.0));
        table[v] = static_cast<std::uint8_t>(std::clamp(mapped, 0L, 255L));
    }
    return table;
}

namespace {

ImageRecord map_pixels(const ImageRecord& record, const std::array<std::uint8_t, 256>& table) {
    if (!record.has_pixels())
        throw std::invalid_argument("record '" + record.id + "' has no pixels");
    ImageRecord out = record;
    for (auto& v : out.pixels.rgb) v = table[v];
    return out;
}

}  // namespace

ImageRecord adjust_illuminance(const ImageRecord& record, double gamma_factor, bool brighten) {
    return map_pixels(record, gamma_table(gamma_factor, brighten));
}

ImageRecord adjust_contrast(const ImageRecord& record, double contrast_factor) {
    return map_pixels(record, contrast_table(contrast_factor));
}

ImageRecord replace_background(const ImageRecord& record, const ImageRecord& background) {
    if (!record.has_mask())
        throw std::invalid_argument("BR requires masks: record '" + record.id + "' has none");
    if (!record.has_pixels() || !background.has_pixels())
        throw std::invalid_argument("replace_background: missing pixel data");
    const Image bg = (background.pixels.width == record.width &&
                      background.pixels.height == record.height)
                         ? background.pixels
                         : resize_nearest(background.pixels, record.width, record.height);
    ImageRecord out = record;
    for (int y = 0; y < record.height; ++y) {
        for (int x = 0; x < record.width; ++x) {
            if (record.mask.at(x, y) == 0) {
                const std::uint8_t* src = bg.pixel(x, y);
                std::uint8_t* dst = out.pixels.pixel(x, y);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
            }
        }
    }
    return out;
}

DatasetIndex apply_br_to_dataset(const DatasetIndex& base, const DatasetIndex& backgrounds,
                                 double p, std::uint64_t seed) {
    if (backgrounds.records.empty())
        throw std::invalid_argument("apply_br_to_dataset: empty background pool");
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("apply_br_to_dataset: probability must be in [0,1]");
    DatasetIndex out = base;
    for (auto& rec : out.records) {
        Rng rng(derive_seed(seed, "br:" + rec.id));
        if (!rng.bernoulli(p)) continue;
        const std::size_t pick = rng.index(backgrounds.records.size());
        rec = replace_background(rec, backgrounds.records[pick]);
    }
    return out;
}

DatasetIndex build_target_background_category(const DatasetIndex& base,
                                              const std::vector<ImageRecord>& background_records,
                                              const std::string& replaced_category) {
    if (!base.categories.contains(replaced_category))
        throw std::invalid_argument("ATB: category '" + replaced_category +
                                    "' not in the base registry");
    for (const auto& bg : background_records) {
        if (bg.annotations.empty())
            throw std::invalid_argument("ATB: background record '" + bg.id +
                                        "' carries no region boxes");
    }

    DatasetIndex out;
    out.categories = base.categories;
    out.categories.replace(replaced_category, kTargetBackgroundCategory);
    out.provenance = base.provenance + "+atb";

    for (const auto& rec : base.records) {
        const bool uses_replaced =
            std::any_of(rec.annotations.begin(), rec.annotations.end(),
                        [&](const Annotation& a) { return a.category == replaced_category; });
        if (!uses_replaced) out.records.push_back(rec);
    }
    for (const auto& bg : background_records) {
        ImageRecord rec = bg;
        for (auto& a : rec.annotations) a.category = kTargetBackgroundCategory;
        out.records.push_back(std::move(rec));
    }
    out.sort_records();
    return out;
}

DatasetIndex apply_strategy(const DatasetIndex& base, const AugmentStrategy& strategy,
                            const DatasetIndex* backgrounds,
                            const std::vector<ImageRecord>* background_records,
                            std::uint64_t seed) {
    strategy.validate();
    switch (strategy.kind) {
        case AugmentKind::None:
            return base;
        case AugmentKind::BackgroundReplace:
            if (!backgrounds)
                throw std::invalid_argument("BR strategy needs a background pool");
            return apply_br_to_dataset(base, *backgrounds, strategy.replace_probability, seed);
        case AugmentKind::AddTargetBackground:
            if (!background_records)
                throw std::invalid_argument("ATB strategy needs background records");
            return build_target_background_category(base, *background_records,
                                                    strategy.atb_replaced_category);
        case AugmentKind::Illuminance:
        case AugmentKind::Contrast: {
            DatasetIndex out = base;
            for (auto& rec : out.records) {
                const bool excluded = std::any_of(
                    rec.annotations.begin(), rec.annotations.end(), [&](const Annotation& a) {
                        return std::find(strategy.exclude_categories.begin(),
                                         strategy.exclude_categories.end(),
                                         a.category) != strategy.exclude_categories.end();
                    });
                if (excluded) continue;
                rec = strategy.kind == AugmentKind::Illuminance
                          ? adjust_illuminance(rec, strategy.gamma_factor, strategy.gamma_brighten)
                          : adjust_contrast(rec, strategy.contrast_factor);
            }
            return out;
        }
    }
    throw std::logic_error("unreachable augmentation kind");
}

}  // namespace fsdet
