// SPDX-License-Identifier: Apache-2.0
#include "fsdet/voc.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fsdet/xml.hpp"

namespace fs = std::filesystem;

namespace fsdet {

VocAnnotationFile parse_voc_annotation(const std::string& xml_text,
                                       const CategoryRegistry& registry) {
    const XmlNode root = parse_xml(xml_text);
    if (root.name != "annotation")
        throw XmlError("root element is <" + root.name + ">, expected <annotation>", root.line);

    const XmlNode& size = root.require("size");
    VocAnnotationFile out;
    out.width = size.require_int("width");
    out.height = size.require_int("height");
    if (out.width <= 0 || out.height <= 0)
        throw std::invalid_argument("annotation declares non-positive image size");

    for (const XmlNode* obj : root.children_named("object")) {
        Annotation a;
        a.category = obj->require("name").text;
        if (!registry.contains(a.category))
            throw std::invalid_argument("unknown category '" + a.category + "'");
        if (const XmlNode* diff = obj->child("difficult"))
            a.ignored = diff->text != "0" && !diff->text.empty();
        const XmlNode& bb = obj->require("bndbox");
        const int xmin = bb.require_int("xmin");
        const int ymin = bb.require_int("ymin");
        const int xmax = bb.require_int("xmax");
        const int ymax = bb.require_int("ymax");
        if (xmin >= xmax || ymin >= ymax)
            throw std::invalid_argument("degenerate box for '" + a.category + "': xmin=" +
                                        std::to_string(xmin) + " xmax=" + std::to_string(xmax) +
                                        " ymin=" + std::to_string(ymin) +
                                        " ymax=" + std::to_string(ymax));
        // 1-based inclusive -> 0-based exclusive
        a.box = BoundingBox{static_cast<double>(xmin - 1), static_cast<double>(ymin - 1),
                            static_cast<double>(xmax), static_cast<double>(ymax)};
        if (a.box.x_min < 0 || a.box.y_min < 0 || a.box.x_max > out.width ||
            a.box.y_max > out.height)
            throw std::invalid_argument("box for '" + a.category + "' outside image extent");
        out.annotations.push_back(std::move(a));
    }
    return out;
}

std::string write_voc_annotation(int width, int height,
                                 const std::vector<Annotation>& annotations) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("write_voc_annotation: non-positive image size");
    std::ostringstream os;
    os << "<annotation>\n";
    os << "  <size>\n";
    os << "    <width>" << width << "</width>\n";
    os << "    <height>" << height << "</height>\n";
    os << "    <depth>3</depth>\n";
    os << "  </size>\n";
    for (const auto& a : annotations) {
        require_valid(a.box, "write_voc_annotation");
        if (a.box.x_max > width || a.box.y_max > height)
            throw std::invalid_argument("write_voc_annotation: box outside image extent");
        // inverse of the parse-side conversion; rounds to the VOC integer grid
        const int xmin = static_cast<int>(std::lround(a.box.x_min)) + 1;
        const int ymin = static_cast<int>(std::lround(a.box.y_min)) + 1;
        const int xmax = static_cast<int>(std::lround(a.box.x_max));
        const int ymax = static_cast<int>(std::lround(a.box.y_max));
        os << "  <object>\n";
        os << "    <name>" << xml_escape(a.category) << "</name>\n";
        os << "    <difficult>" << (a.ignored ? 1 : 0) << "</difficult>\n";
        os << "    <bndbox>\n";
        os << "      <xmin>" << xmin << "</xmin>\n";
        os << "      <ymin>" << ymin << "</ymin>\n";
        os << "      <xmax>" << xmax << "</xmax>\n";
        os << "      <ymax>" << ymax << "</ymax>\n";
        os << "    </bndbox>\n";
        os << "  </object>\n";
    }
    os << "</annotation>\n";
    return os.str();
}

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool is_image_ext(const fs::path& p) {
    const std::string e = p.extension().string();
    return e == ".png" || e == ".jpg" || e == ".jpeg";
}

}  // namespace

DatasetIndex load_dataset(const std::string& root_dir, const CategoryRegistry& registry,
                          const LayoutConfig& layout) {
    const fs::path root(root_dir);
    const fs::path img_dir = root / layout.images_dir;
    const fs::path ann_dir = root / layout.annotations_dir;
    const fs::path mask_dir = root / layout.masks_dir;
    if (!fs::is_directory(img_dir))
        throw std::runtime_error("no image directory at " + img_dir.string());

    DatasetIndex out;
    out.categories = registry;
    out.provenance = root_dir;

    std::map<std::string, fs::path> images;  // ordered by stem for determinism
    for (const auto& entry : fs::directory_iterator(img_dir)) {
        if (entry.is_regular_file() && is_image_ext(entry.path()))
            images.emplace(entry.path().stem().string(), entry.path());
    }

    for (const auto& [stem, img_path] : images) {
        const fs::path ann_path = ann_dir / (stem + ".xml");
        try {
            if (!fs::exists(ann_path))
                throw std::runtime_error("missing annotation " + ann_path.string());
            const VocAnnotationFile ann = parse_voc_annotation(read_file(ann_path), registry);
            ImageRecord rec;
            rec.id = stem;
            rec.width = ann.width;
            rec.height = ann.height;
            rec.annotations = ann.annotations;
            if (layout.load_pixels) {
                rec.pixels = read_image(img_path.string());
                if (rec.pixels.width != ann.width || rec.pixels.height != ann.height)
                    throw std::runtime_error("image size differs from annotation size");
            }
            const fs::path mask_path = mask_dir / (stem + ".png");
            if (fs::exists(mask_path)) {
                rec.mask = read_mask_png(mask_path.string());
                if (rec.mask.width != rec.width || rec.mask.height != rec.height)
                    throw std::runtime_error("mask size differs from image size");
            }
            rec.validate();
            out.records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            if (layout.strict)
                throw std::runtime_error("record '" + stem + "': " + e.what());
            ++out.skipped;
        }
    }

    if (out.records.empty())
        throw std::runtime_error("no records found under " + root_dir +
                                 (out.skipped ? " (" + std::to_string(out.skipped) + " skipped)"
                                              : ""));
    out.sort_records();
    return out;
}

void materialize_dataset(const DatasetIndex& data, const std::string& root_dir) {
    const fs::path root(root_dir);
    fs::create_directories(root / "images");
    fs::create_directories(root / "annotations");
    bool any_mask = false;
    for (const auto& r : data.records)
        if (r.has_mask()) any_mask = true;
    if (any_mask) fs::create_directories(root / "masks");

    for (const auto& r : data.records) {
        if (!r.has_pixels())
            throw std::runtime_error("materialize_dataset: record '" + r.id + "' has no pixels");
        write_png((root / "images" / (r.id + ".png")).string(), r.pixels);
        std::ofstream ann(root / "annotations" / (r.id + ".xml"), std::ios::binary);
        ann << write_voc_annotation(r.width, r.height, r.annotations);
        if (r.has_mask()) write_mask_png((root / "masks" / (r.id + ".png")).string(), r.mask);
    }
    std::ofstream cats(root / "categories.txt", std::ios::binary);
    for (const auto& c : data.categories.names()) cats << c << "\n";
}

}  // namespace fsdet
