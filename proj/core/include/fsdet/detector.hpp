// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fsdet/autodiff.hpp"
#include "fsdet/dataset.hpp"
#include "fsdet/rng.hpp"

namespace fsdet {

struct Anchor {
    double w = 1.0;  // grid-cell units
    double h = 1.0;
};

struct DetectorConfig {
    int input_size = 64;
    std::vector<int> backbone_channels = {8, 16, 32};  // one conv+pool stage each
    int feature_channels = 32;                         // m
    std::vector<Anchor> anchors = {{2.0, 2.0}, {3.2, 3.2}};
    double leaky_slope = 0.1;
    double lambda_noobj = 0.2;
    double lambda_box = 1.0;
    double objectness_threshold = 0.1;
    double nms_iou = 0.45;

    int grid() const { return input_size >> backbone_channels.size(); }
    double cell() const { return static_cast<double>(input_size) / grid(); }
    void validate() const;
    /// Architecture fingerprint; checkpoints refuse mismatched configs.
    std::string fingerprint_text() const;
    std::uint64_t fingerprint() const { return fnv1a(fingerprint_text()); }
};

struct Detection {
    BoundingBox box;     // image coordinates, clamped
    std::string category;
    double confidence = 0.0;
};

/// Greedy per-category non-maximum suppression; input order does not matter
/// (sorts by descending confidence, ties by box order).
std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold);

/// Ground truth prepared for the loss: boxes in input-space pixels with the
/// category resolved to a prediction-pass index (-1 when the category has
/// no pass this step; such boxes act as ignored).
struct GtBox {
    BoundingBox box;
    int pass = -1;
    bool ignored = false;
};

std::vector<GtBox> gt_to_input_space(const ImageRecord& record,
                                     const std::vector<std::string>& pass_categories,
                                     const DetectorConfig& cfg);

/// Bounded log-scale for box extents: predicted extent = anchor *
/// size_scale(t). The tanh bound keeps the squared-error size loss from
/// running away under SGD while remaining smooth everywhere.
inline double size_scale(double t) { return std::exp(4.0 * std::tanh(t / 4.0)); }
/// Inverse of size_scale; defined for scale ratios within (e^-4, e^4).
inline double size_scale_inv(double s) { return 4.0 * std::atanh(std::log(s) / 4.0); }

template <class T>
struct LossTermsT {
    VarT<T> total;
    VarT<T> class_ce;
    VarT<T> box_reg;      // already weighted by lambda_box
    VarT<T> objectness;   // no-object part weighted by lambda_noobj
};

/// The feature learner D, support re-weighter M, and shared prediction head
/// P. Parameters live in one ParamSet; all passes share P, so category
/// identity enters only through the re-weighting vector.
///
/// Head output layout per pass: (6*A, grid, grid) with channel f*A + a for
/// field f in {o, x, y, h, w, c} and anchor a. o/x/y are raw logits; h/w
/// are log-scales on the anchor; c is a raw class score calibrated across
/// passes by softmax.
template <class T>
class DetectorT {
public:
    explicit DetectorT(DetectorConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        build_params();
    }

    const DetectorConfig& config() const { return cfg_; }
    ParamSetT<T>& params() { return params_; }
    const ParamSetT<T>& params() const { return params_; }

    /// He-style random init; a freshly constructed detector is all-zero.
    void init(std::uint64_t seed) {
        Rng rng(seed);
        for (auto& p : params_.items) {
            if (p->name.back() == 'b') continue;  // biases stay zero
            const auto& s = p->value.shape;
            std::size_t fan_in = 1;
            for (std::size_t i = 1; i < s.size(); ++i) fan_in *= s[i];
            const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
            for (auto& v : p->value.data) v = static_cast<T>(rng.normal() * std_dev);
        }
    }

    /// Replaces parameter values from a loaded set (by name).
    void load_values(const ParamSetT<T>& loaded) {
        for (auto& p : params_.items) {
            auto src = loaded.find(p->name);
            if (!src || src->value.shape != p->value.shape)
                throw std::runtime_error("checkpoint is missing parameter '" + p->name + "'");
            p->value = src->value;
            p->zero_grad();
        }
    }

    // --- tensor preparation -------------------------------------------------

    /// (3, S, S) in [0,1], nearest-neighbor resized to the input size.
    TensorT<T> image_to_tensor(const ImageRecord& record) const {
        if (!record.has_pixels())
            throw std::invalid_argument("record '" + record.id + "' has no pixels");
        const int S = cfg_.input_size;
        const Image img = (record.pixels.width == S && record.pixels.height == S)
                              ? record.pixels
                              : resize_nearest(record.pixels, S, S);
        TensorT<T> t = TensorT<T>::zeros({3, S, S});
        for (int y = 0; y < S; ++y)
            for (int x = 0; x < S; ++x) {
                const std::uint8_t* p = img.pixel(x, y);
                for (int c = 0; c < 3; ++c)
                    t.at3(c, y, x) = static_cast<T>(p[c] / 255.0);
            }
        return t;
    }

    /// (4, S, S): RGB plus a binary mask channel covering the target box.
    /// Throws if the box rasterizes to zero pixels.
    TensorT<T> support_to_tensor(const ImageRecord& record, const BoundingBox& target_box) const {
        require_valid(target_box, "support target box");
        if (target_box.x_max > record.width || target_box.y_max > record.height)
            throw std::invalid_argument("support target box outside record '" + record.id + "'");
        const int S = cfg_.input_size;
        const TensorT<T> rgb = image_to_tensor(record);
        TensorT<T> t = TensorT<T>::zeros({4, S, S});
        std::copy(rgb.data.begin(), rgb.data.end(), t.data.begin());
        const double sx = static_cast<double>(S) / record.width;
        const double sy = static_cast<double>(S) / record.height;
        const BoundingBox scaled{target_box.x_min * sx, target_box.y_min * sy,
                                 target_box.x_max * sx, target_box.y_max * sy};
        bool any = false;
        for (int y = 0; y < S; ++y)
            for (int x = 0; x < S; ++x) {
                const double px = x + 0.5, py = y + 0.5;
                if (px >= scaled.x_min && px < scaled.x_max && py >= scaled.y_min &&
                    py < scaled.y_max) {
                    t.at3(3, y, x) = T(1);
                    any = true;
                }
            }
        if (!any)
            throw std::invalid_argument("support target box rasterizes to zero pixels");
        return t;
    }

    // --- forward passes -----------------------------------------------------

    /// D: meta-feature map (m, grid, grid).
    VarT<T> extract_features(TapeT<T>& tape, const TensorT<T>& image) {
        check_input(image, 3);
        return backbone(tape, tape.constant(image), "D");
    }

    /// M: length-m re-weighting vector from one support exemplar.
    VarT<T> embed_support(TapeT<T>& tape, const TensorT<T>& support) {
        check_input(support, 4);
        return nn::global_max_pool(tape, backbone(tape, tape.constant(support), "M"));
    }

    /// Eq.-style channel re-weighting: F_i = F (x) w_i.
    VarT<T> reweight(TapeT<T>& tape, const VarT<T>& features, const VarT<T>& w) {
        return nn::channel_scale(tape, features, w);
    }

    /// P: raw head output (6*A, grid, grid) from re-weighted features.
    VarT<T> predict(TapeT<T>& tape, const VarT<T>& reweighted) {
        return conv(tape, reweighted, "P.head", 1, 0);
    }

    // --- loss ---------------------------------------------------------------

    /// Per-pass slice of one raw head field f in {0..5} = {o,x,y,h,w,c},
    /// shape (A, grid, grid).
    VarT<T> head_field(TapeT<T>& tape, const VarT<T>& head, int field) const {
        const int A = static_cast<int>(cfg_.anchors.size());
        return nn::slice0(tape, head, field * A, A);
    }

    /// Class probabilities calibrated across passes: softmax over the pass
    /// axis of the raw class scores; shape (N, A, grid, grid).
    VarT<T> calibrate_scores(TapeT<T>& tape, const std::vector<VarT<T>>& heads) {
        if (heads.empty()) throw std::invalid_argument("calibrate_scores: no passes");
        std::vector<VarT<T>> cs;
        for (const auto& h : heads) cs.push_back(head_field(tape, h, 5));
        return nn::softmax(tape, nn::stack0(tape, cs), 0);
    }

    LossTermsT<T> detection_loss(TapeT<T>& tape, const std::vector<VarT<T>>& heads,
                                 const std::vector<GtBox>& gts);

    // --- decoding -----------------------------------------------------------

    /// Decodes raw per-pass head values into thresholded, per-category
    /// NMS-suppressed detections in image coordinates.
    std::vector<Detection> decode_predictions(const std::vector<TensorT<T>>& heads,
                                              const std::vector<std::string>& pass_categories,
                                              int image_w, int image_h) const;

private:
    DetectorConfig cfg_;
    ParamSetT<T> params_;

    void check_input(const TensorT<T>& t, int channels) const {
        const int S = cfg_.input_size;
        if (t.rank() != 3 || t.shape[0] != channels || t.shape[1] != S || t.shape[2] != S)
            throw std::invalid_argument("expected (" + std::to_string(channels) + "," +
                                        std::to_string(S) + "," + std::to_string(S) +
                                        ") input, got " + t.shape_string());
    }

    void build_params() {
        auto add_conv = [&](const std::string& name, int out_c, int in_c, int k) {
            params_.add(name + ".w", TensorT<T>::zeros({out_c, in_c, k, k}));
            params_.add(name + ".b", TensorT<T>::zeros({out_c}));
        };
        int in_c = 3;
        for (std::size_t i = 0; i < cfg_.backbone_channels.size(); ++i) {
            add_conv("D.conv" + std::to_string(i), cfg_.backbone_channels[i], in_c, 3);
            in_c = cfg_.backbone_channels[i];
        }
        add_conv("D.proj", cfg_.feature_channels, in_c, 3);
        in_c = 4;
        for (std::size_t i = 0; i < cfg_.backbone_channels.size(); ++i) {
            add_conv("M.conv" + std::to_string(i), cfg_.backbone_channels[i], in_c, 3);
            in_c = cfg_.backbone_channels[i];
        }
        add_conv("M.proj", cfg_.feature_channels, in_c, 3);
        add_conv("P.head", 6 * static_cast<int>(cfg_.anchors.size()), cfg_.feature_channels, 1);
    }

    VarT<T> conv(TapeT<T>& tape, const VarT<T>& x, const std::string& name, int k, int pad) {
        (void)k;
        auto w = params_.find(name + ".w");
        auto b = params_.find(name + ".b");
        return nn::conv2d(tape, x, tape.leaf(*w), tape.leaf(*b), 1, pad);
    }

    VarT<T> backbone(TapeT<T>& tape, const VarT<T>& input, const std::string& prefix) {
        VarT<T> x = input;
        for (std::size_t i = 0; i < cfg_.backbone_channels.size(); ++i) {
            x = conv(tape, x, prefix + ".conv" + std::to_string(i), 3, 1);
            x = nn::leaky_relu(tape, x, static_cast<T>(cfg_.leaky_slope));
            x = nn::max_pool2x2(tape, x);
        }
        x = conv(tape, x, prefix + ".proj", 3, 1);
        return nn::leaky_relu(tape, x, static_cast<T>(cfg_.leaky_slope));
    }
};

using Detector = DetectorT<float>;

// ---------------------------------------------------------------------------
// loss implementation
// ---------------------------------------------------------------------------

namespace detail {

/// One resolved target location.
struct Assignment {
    int pass = 0;
    int anchor = 0;
    int cy = 0;
    int cx = 0;
    double tx = 0, ty = 0;        // cell-relative center, targets for sigmoid(x)
    double tsw = 0, tsh = 0;      // sqrt of box extent in grid units
};

/// Center-cell + best-IoU-anchor assignment (sizes only, boxes centered).
/// First ground-truth box wins a contested location.
std::vector<Assignment> assign_targets(const std::vector<GtBox>& gts,
                                       const DetectorConfig& cfg,
                                       std::vector<std::array<int, 2>>& suppressed_cells);

}  // namespace detail

template <class T>
LossTermsT<T> DetectorT<T>::detection_loss(TapeT<T>& tape, const std::vector<VarT<T>>& heads,
                                           const std::vector<GtBox>& gts) {
    const int N = static_cast<int>(heads.size());
    if (N < 1) throw std::invalid_argument("detection_loss: no prediction passes");
    const int A = static_cast<int>(cfg_.anchors.size());
    const int G = cfg_.grid();
    for (const auto& h : heads) {
        if (h->value.rank() != 3 || h->value.shape[0] != 6 * A || h->value.shape[1] != G ||
            h->value.shape[2] != G)
            throw std::invalid_argument("detection_loss: bad head shape " +
                                        h->value.shape_string());
    }
    for (const auto& g : gts) {
        if (g.pass >= N)
            throw std::invalid_argument("detection_loss: ground truth pass out of range");
        if (g.box.x_max > cfg_.input_size || g.box.y_max > cfg_.input_size)
            throw std::invalid_argument("detection_loss: annotation outside image");
    }

    std::vector<std::array<int, 2>> suppressed_cells;
    const auto assignments = detail::assign_targets(gts, cfg_, suppressed_cells);

    // per-pass constant masks and targets, laid out (A, G, G)
    std::vector<TensorT<T>> obj_mask(N, TensorT<T>::zeros({A, G, G}));
    std::vector<TensorT<T>> noobj_mask(N, TensorT<T>::full({A, G, G}, T(1)));
    std::vector<TensorT<T>> tx(N, TensorT<T>::zeros({A, G, G})), ty = tx, tsw = tx, tsh = tx;
    TensorT<T> onehot = TensorT<T>::zeros({N, A, G, G});

    for (const auto& as : assignments) {
        obj_mask[as.pass].at3(as.anchor, as.cy, as.cx) = T(1);
        for (int p = 0; p < N; ++p) noobj_mask[p].at3(as.anchor, as.cy, as.cx) = T(0);
        tx[as.pass].at3(as.anchor, as.cy, as.cx) = static_cast<T>(as.tx);
        ty[as.pass].at3(as.anchor, as.cy, as.cx) = static_cast<T>(as.ty);
        tsw[as.pass].at3(as.anchor, as.cy, as.cx) = static_cast<T>(as.tsw);
        tsh[as.pass].at3(as.anchor, as.cy, as.cx) = static_cast<T>(as.tsh);
        onehot.data[((static_cast<std::size_t>(as.pass) * A + as.anchor) * G + as.cy) * G +
                    as.cx] = T(1);
    }
    // ignored boxes blank the no-object penalty at their cell, all anchors
    for (const auto& [cy, cx] : suppressed_cells)
        for (int p = 0; p < N; ++p)
            for (int a = 0; a < A; ++a) noobj_mask[p].at3(a, cy, cx) = T(0);

    TensorT<T> anchor_sw = TensorT<T>::zeros({A, G, G});
    TensorT<T> anchor_sh = TensorT<T>::zeros({A, G, G});
    for (int a = 0; a < A; ++a)
        for (int y = 0; y < G; ++y)
            for (int x = 0; x < G; ++x) {
                anchor_sw.at3(a, y, x) = static_cast<T>(std::sqrt(cfg_.anchors[a].w));
                anchor_sh.at3(a, y, x) = static_cast<T>(std::sqrt(cfg_.anchors[a].h));
            }

    auto sq = [&](const VarT<T>& v) { return nn::mul(tape, v, v); };

    VarT<T> obj_term, box_term;
    std::vector<VarT<T>> class_slices;
    for (int p = 0; p < N; ++p) {
        const VarT<T>& head = heads[p];
        VarT<T> o = nn::sigmoid(tape, head_field(tape, head, 0));
        VarT<T> sx = nn::sigmoid(tape, head_field(tape, head, 1));
        VarT<T> sy = nn::sigmoid(tape, head_field(tape, head, 2));
        // sqrt of predicted grid-unit extent: sqrt(anchor * size_scale(t))
        auto half_scale = [&](const VarT<T>& t) {
            return nn::exp_(tape,
                            nn::scale(tape, nn::tanh_(tape, nn::scale(tape, t, T(0.25))), T(2)));
        };
        VarT<T> ssh = nn::mul(tape, half_scale(head_field(tape, head, 3)),
                              tape.constant(anchor_sh));
        VarT<T> ssw = nn::mul(tape, half_scale(head_field(tape, head, 4)),
                              tape.constant(anchor_sw));

        VarT<T> om = tape.constant(obj_mask[p]);
        VarT<T> nm = tape.constant(noobj_mask[p]);
        VarT<T> pos = nn::sum(tape, nn::mul(tape, om, sq(nn::sub(tape, o, tape.constant(TensorT<T>::full({A, G, G}, T(1)))))));
        VarT<T> neg = nn::scale(tape, nn::sum(tape, nn::mul(tape, nm, sq(o))),
                                static_cast<T>(cfg_.lambda_noobj));
        VarT<T> obj_p = nn::add(tape, pos, neg);
        obj_term = obj_term ? nn::add(tape, obj_term, obj_p) : obj_p;

        VarT<T> coord = nn::add(
            tape,
            nn::add(tape, sq(nn::sub(tape, sx, tape.constant(tx[p]))),
                    sq(nn::sub(tape, sy, tape.constant(ty[p])))),
            nn::add(tape, sq(nn::sub(tape, ssw, tape.constant(tsw[p]))),
                    sq(nn::sub(tape, ssh, tape.constant(tsh[p])))));
        VarT<T> box_p = nn::sum(tape, nn::mul(tape, om, coord));
        box_term = box_term ? nn::add(tape, box_term, box_p) : box_p;
    }

    // stable cross-entropy: onehot . log_softmax over the pass axis
    std::vector<VarT<T>> cs;
    for (const auto& h : heads) cs.push_back(head_field(tape, h, 5));
    VarT<T> log_probs = nn::log_softmax(tape, nn::stack0(tape, cs), 0);
    VarT<T> class_term = nn::scale(
        tape, nn::sum(tape, nn::mul(tape, tape.constant(onehot), log_probs)), T(-1));

    LossTermsT<T> terms;
    terms.class_ce = class_term;
    terms.box_reg = nn::scale(tape, box_term, static_cast<T>(cfg_.lambda_box));
    terms.objectness = obj_term;
    terms.total = nn::add(tape, nn::add(tape, terms.class_ce, terms.box_reg), terms.objectness);
    return terms;
}

template <class T>
std::vector<Detection> DetectorT<T>::decode_predictions(
    const std::vector<TensorT<T>>& heads, const std::vector<std::string>& pass_categories,
    int image_w, int image_h) const {
    const int N = static_cast<int>(heads.size());
    if (N < 1 || pass_categories.size() != static_cast<std::size_t>(N))
        throw std::invalid_argument("decode_predictions: pass/category count mismatch");
    const int A = static_cast<int>(cfg_.anchors.size());
    const int G = cfg_.grid();
    const double cell = cfg_.cell();
    const double scale_x = static_cast<double>(image_w) / cfg_.input_size;
    const double scale_y = static_cast<double>(image_h) / cfg_.input_size;

    auto field = [&](const TensorT<T>& h, int f, int a, int y, int x) {
        return static_cast<double>(h.at3(f * A + a, y, x));
    };
    auto sigm = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };

    std::vector<Detection> cands;
    for (int y = 0; y < G; ++y) {
        for (int x = 0; x < G; ++x) {
            for (int a = 0; a < A; ++a) {
                // calibrated class probabilities across passes at this location
                double mx = field(heads[0], 5, a, y, x);
                for (int p = 1; p < N; ++p) mx = std::max(mx, field(heads[p], 5, a, y, x));
                double denom = 0.0;
                std::vector<double> ex(N);
                for (int p = 0; p < N; ++p) {
                    ex[p] = std::exp(field(heads[p], 5, a, y, x) - mx);
                    denom += ex[p];
                }
                for (int p = 0; p < N; ++p) {
                    const double o = sigm(field(heads[p], 0, a, y, x));
                    const double conf = o * (ex[p] / denom);
                    if (conf < cfg_.objectness_threshold) continue;
                    const double bx = (x + sigm(field(heads[p], 1, a, y, x))) * cell;
                    const double by = (y + sigm(field(heads[p], 2, a, y, x))) * cell;
                    const double bh = cfg_.anchors[a].h * size_scale(field(heads[p], 3, a, y, x)) * cell;
                    const double bw = cfg_.anchors[a].w * size_scale(field(heads[p], 4, a, y, x)) * cell;
                    BoundingBox box{(bx - bw / 2) * scale_x, (by - bh / 2) * scale_y,
                                    (bx + bw / 2) * scale_x, (by + bh / 2) * scale_y};
                    box = box.clamped(image_w, image_h);
                    if (!(box.x_min < box.x_max && box.y_min < box.y_max)) continue;
                    cands.push_back(Detection{box, pass_categories[p], conf});
                }
            }
        }
    }
    return nms(std::move(cands), cfg_.nms_iou);
}

}  // namespace fsdet
