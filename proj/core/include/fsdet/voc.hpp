// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fsdet/dataset.hpp"

namespace fsdet {

/// Result of parsing one VOC annotation file.
struct VocAnnotationFile {
    int width = 0;
    int height = 0;
    std::vector<Annotation> annotations;
};

/// Parses a PASCAL-VOC annotation document. VOC stores 1-based inclusive
/// integer box corners; they are converted here to the 0-based exclusive
/// convention used everywhere else (x_min = xmin-1, x_max = xmax).
/// The `difficult` flag maps to Annotation::ignored.
/// Throws XmlError (with line context) on malformed input, and
/// std::invalid_argument for unknown categories or degenerate boxes.
VocAnnotationFile parse_voc_annotation(const std::string& xml_text,
                                       const CategoryRegistry& registry);

/// Emits a VOC annotation document for the given image size and boxes,
/// inverting the coordinate conversion of parse_voc_annotation. Output is
/// byte-stable and re-parses to the same annotations.
std::string write_voc_annotation(int width, int height,
                                 const std::vector<Annotation>& annotations);

struct LayoutConfig {
    std::string images_dir = "images";
    std::string annotations_dir = "annotations";
    std::string masks_dir = "masks";   // optional on disk
    bool load_pixels = true;
    bool strict = false;               // escalate skips to errors
};

/// Loads `root/images/*.png|jpg` with matching `root/annotations/*.xml`
/// (paired by stem) and optional `root/masks/*.png`. Unpaired or
/// unparseable files are counted as skips unless `strict`. Throws if no
/// record loads.
DatasetIndex load_dataset(const std::string& root_dir, const CategoryRegistry& registry,
                          const LayoutConfig& layout = {});

/// Writes a dataset to the on-disk layout expected by load_dataset.
void materialize_dataset(const DatasetIndex& data, const std::string& root_dir);

}  // namespace fsdet
