// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "fsdet/augment.hpp"
#include "fsdet/detector.hpp"
#include "fsdet/episodic.hpp"
#include "fsdet/eval.hpp"
#include "fsdet/synth.hpp"
#include "fsdet/trainer.hpp"

namespace fsdet {

/// Flat namespaced key=value configuration ("trainer.lr = 0.05"). Every
/// key must appear in the schema; unknown keys are rejected at parse time.
/// '#' starts a comment.
class Config {
public:
    Config();  // all defaults

    static Config parse_text(const std::string& text);
    static Config parse_file(const std::string& path);

    /// Command-line override, "key=value".
    void set_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key) const;  // comma-separated

    /// Fully-resolved config text (sorted keys), echoed into run directories.
    std::string resolved_text() const;

    // typed views assembled from the flat keys
    SynthSpec synth_spec() const;
    DetectorConfig detector_config() const;
    TrainConfig train_config(bool finetune) const;
    AugmentStrategy augment_strategy() const;
    SplitMode split_mode() const;
    ApMode ap_mode() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace fsdet
