// SPDX-License-Identifier: Apache-2.0
#include "fsdet/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fsdet {

namespace {

const std::map<std::string, std::string>& schema_defaults() {
    static const std::map<std::string, std::string> defaults = {
        {"dataset.kind", "synth"},        // synth | disk
        {"dataset.root", ""},

        {"synth.categories", "alpha:circle,beta:square,gamma:triangle"},
        {"synth.images", "60"},
        {"synth.width", "64"},
        {"synth.height", "64"},
        {"synth.min_shapes", "1"},
        {"synth.max_shapes", "1"},
        {"synth.min_size", "14"},
        {"synth.max_size", "28"},
        {"synth.noise", "8"},
        {"synth.distractors", "0"},
        {"synth.prefix", "synth"},

        {"split.mode", "seeded"},         // seeded | fixed
        {"split.seed", "0"},

        {"detector.input_size", "64"},
        {"detector.channels", "8,16,32"},
        {"detector.m", "32"},
        {"detector.anchors", "2.0x2.0,3.2x3.2"},
        {"detector.leaky_slope", "0.1"},
        {"detector.lambda_noobj", "0.2"},
        {"detector.lambda_box", "1.0"},
        {"detector.obj_threshold", "0.1"},
        {"detector.nms_iou", "0.45"},

        {"trainer.base_iterations", "2000"},
        {"trainer.finetune_iterations", "400"},
        {"trainer.lr", "0.005"},
        {"trainer.batch", "4"},
        {"trainer.categories_per_task", "2"},
        {"trainer.k", "10"},

        {"augment.kind", "none"},         // none | br | atb | ia | ca
        {"augment.gamma", "1.5"},
        {"augment.gamma_brighten", "true"},
        {"augment.contrast", "2.0"},
        {"augment.br_probability", "1.0"},
        {"augment.atb_replaced", ""},
        {"augment.exclude", ""},

        {"experiment.strategies", "none,br,atb,ia,ca"},
        {"experiment.seeds", "0"},
        {"experiment.backgrounds", "12"},
        {"experiment.test_images", "40"},

        {"eval.iou_threshold", "0.5"},
        {"eval.ap_mode", "voc07"},        // voc07 | all
    };
    return defaults;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string part;
    while (std::getline(is, part, ',')) {
        part = trim(part);
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

}  // namespace

Config::Config() : values_(schema_defaults()) {}

Config Config::parse_text(const std::string& text) {
    Config cfg;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_text(os.str());
}

void Config::set(const std::string& key, const std::string& value) {
    if (!schema_defaults().count(key))
        throw std::invalid_argument("unknown config key '" + key + "'");
    values_[key] = value;
}

void Config::set_override(const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override '" + assignment + "' is not key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    return it->second;
}

int Config::get_int(const std::string& key) const {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(get(key), &pos);
        if (pos != get(key).size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "' is not an integer: '" + get(key) +
                                    "'");
    }
}

double Config::get_double(const std::string& key) const {
    try {
        std::size_t pos = 0;
        const double v = std::stod(get(key), &pos);
        if (pos != get(key).size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "' is not a number: '" + get(key) +
                                    "'");
    }
}

bool Config::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    return split_commas(get(key));
}

std::string Config::resolved_text() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
    return os.str();
}

SynthSpec Config::synth_spec() const {
    SynthSpec spec;
    spec.categories.clear();
    struct Palette {
        std::uint8_t r, g, b;
    };
    static const Palette palette[] = {{220, 50, 40},  {40, 70, 220},  {230, 210, 40},
                                      {200, 40, 200}, {40, 210, 220}, {240, 140, 40},
                                      {120, 230, 60}, {150, 90, 220}};
    const auto entries = get_list("synth.categories");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string& e = entries[i];
        const std::size_t colon = e.find(':');
        SynthCategory cat;
        cat.name = colon == std::string::npos ? e : e.substr(0, colon);
        const std::string shape = colon == std::string::npos ? e : e.substr(colon + 1);
        if (shape == "circle")
            cat.shape = ShapeKind::Circle;
        else if (shape == "square")
            cat.shape = ShapeKind::Square;
        else if (shape == "triangle")
            cat.shape = ShapeKind::Triangle;
        else
            throw std::invalid_argument("synth.categories: unknown shape '" + shape + "'");
        const Palette& p = palette[i % (sizeof(palette) / sizeof(palette[0]))];
        cat.r = p.r;
        cat.g = p.g;
        cat.b = p.b;
        spec.categories.push_back(std::move(cat));
    }
    spec.image_count = get_int("synth.images");
    spec.width = get_int("synth.width");
    spec.height = get_int("synth.height");
    spec.min_shapes = get_int("synth.min_shapes");
    spec.max_shapes = get_int("synth.max_shapes");
    spec.min_size = get_int("synth.min_size");
    spec.max_size = get_int("synth.max_size");
    spec.noise_amplitude = get_int("synth.noise");
    spec.distractors = get_int("synth.distractors");
    spec.id_prefix = get("synth.prefix");
    return spec;
}

DetectorConfig Config::detector_config() const {
    DetectorConfig cfg;
    cfg.input_size = get_int("detector.input_size");
    cfg.backbone_channels.clear();
    for (const auto& c : get_list("detector.channels"))
        cfg.backbone_channels.push_back(std::stoi(c));
    cfg.feature_channels = get_int("detector.m");
    cfg.anchors.clear();
    for (const auto& a : get_list("detector.anchors")) {
        const std::size_t x = a.find('x');
        if (x == std::string::npos)
            throw std::invalid_argument("detector.anchors: expected WxH, got '" + a + "'");
        cfg.anchors.push_back(Anchor{std::stod(a.substr(0, x)), std::stod(a.substr(x + 1))});
    }
    cfg.leaky_slope = get_double("detector.leaky_slope");
    cfg.lambda_noobj = get_double("detector.lambda_noobj");
    cfg.lambda_box = get_double("detector.lambda_box");
    cfg.objectness_threshold = get_double("detector.obj_threshold");
    cfg.nms_iou = get_double("detector.nms_iou");
    cfg.validate();
    return cfg;
}

TrainConfig Config::train_config(bool finetune) const {
    TrainConfig cfg;
    cfg.iterations =
        finetune ? get_int("trainer.finetune_iterations") : get_int("trainer.base_iterations");
    cfg.learning_rate = get_double("trainer.lr");
    cfg.batch = get_int("trainer.batch");
    cfg.categories_per_task = get_int("trainer.categories_per_task");
    cfg.k = get_int("trainer.k");
    cfg.validate(finetune);
    return cfg;
}

AugmentStrategy Config::augment_strategy() const {
    AugmentStrategy s;
    s.kind = AugmentStrategy::kind_from_string(get("augment.kind"));
    s.gamma_factor = get_double("augment.gamma");
    s.gamma_brighten = get_bool("augment.gamma_brighten");
    s.contrast_factor = get_double("augment.contrast");
    s.replace_probability = get_double("augment.br_probability");
    s.atb_replaced_category = get("augment.atb_replaced");
    s.exclude_categories = get_list("augment.exclude");
    return s;
}

SplitMode Config::split_mode() const {
    const std::string& m = get("split.mode");
    if (m == "fixed") return SplitMode::Fixed;
    if (m == "seeded") return SplitMode::Seeded;
    throw std::invalid_argument("split.mode must be fixed or seeded, got '" + m + "'");
}

ApMode Config::ap_mode() const {
    const std::string& m = get("eval.ap_mode");
    if (m == "voc07") return ApMode::Voc07ElevenPoint;
    if (m == "all") return ApMode::AllPoint;
    throw std::invalid_argument("eval.ap_mode must be voc07 or all, got '" + m + "'");
}

}  // namespace fsdet
