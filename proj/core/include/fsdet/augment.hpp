// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fsdet/dataset.hpp"

namespace fsdet {

enum class AugmentKind {
    None,
    BackgroundReplace,      // BR: composite foreground objects onto new backgrounds
    AddTargetBackground,    // ATB: swap one base category for annotated background regions
    Illuminance,            // IA: gamma correction
    Contrast,               // CA: contrast stretching about mid-gray
};

struct AugmentStrategy {
    AugmentKind kind = AugmentKind::None;
    double gamma_factor = 1.5;        // IA; brightening map v' ~ v^(1/gamma)
    bool gamma_brighten = true;       // false flips the exponent direction
    double contrast_factor = 2.0;     // CA
    double replace_probability = 1.0; // BR
    std::string atb_replaced_category;            // ATB
    std::vector<std::string> exclude_categories;  // IA/CA: records containing these are left as-is

    void validate() const;
    static AugmentKind kind_from_string(const std::string& s);
    static std::string kind_to_string(AugmentKind k);
};

/// 256-entry lookup for the gamma map
///   v' = round(255 * (v/255)^(1/gamma))   (brighten=true)
/// or v' = round(255 * (v/255)^gamma)      (brighten=false).
std::array<std::uint8_t, 256> gamma_table(double gamma_factor, bool brighten = true);

/// 256-entry lookup for v' = clamp(round(128 + factor * (v - 128)), 0, 255).
std::array<std::uint8_t, 256> contrast_table(double contrast_factor);

/// Gamma-corrects pixels; annotations and mask are untouched.
ImageRecord adjust_illuminance(const ImageRecord& record, double gamma_factor = 1.5,
                               bool brighten = true);

/// Contrast-stretches pixels about mid-gray 128; annotations and mask untouched.
ImageRecord adjust_contrast(const ImageRecord& record, double contrast_factor = 2.0);

/// Hard-mask compositing: output pixel = record pixel where mask is nonzero,
/// else the background resized (nearest-neighbor) to the record extent.
/// Throws if the record has no mask.
ImageRecord replace_background(const ImageRecord& record, const ImageRecord& background);

/// Applies replace_background to each record independently with probability
/// `p`, drawing backgrounds uniformly. Per-record seeds derive from
/// (seed, record id), so results do not depend on processing order.
DatasetIndex apply_br_to_dataset(const DatasetIndex& base, const DatasetIndex& backgrounds,
                                 double p, std::uint64_t seed);

/// ATB: drops all records annotated with `replaced_category`, renames its
/// registry slot to "target-background", and appends the background records
/// (each must carry at least one region box) relabeled to that category.
DatasetIndex build_target_background_category(const DatasetIndex& base,
                                              const std::vector<ImageRecord>& background_records,
                                              const std::string& replaced_category);

inline const char* kTargetBackgroundCategory = "target-background";

/// Applies a strategy to a stage dataset. BR needs `backgrounds` records
/// with masks wrapped in a DatasetIndex; ATB needs `background_records`.
DatasetIndex apply_strategy(const DatasetIndex& base, const AugmentStrategy& strategy,
                            const DatasetIndex* backgrounds,
                            const std::vector<ImageRecord>* background_records,
                            std::uint64_t seed);

}  // namespace fsdet
