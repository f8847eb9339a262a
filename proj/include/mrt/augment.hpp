#pragma once

#include <cstdint>
#include <vector>

#include "mrt/annotations.hpp"
#include "mrt/audio.hpp"
#include "mrt/dataset.hpp"

namespace mrt {

// Semitone shift factor 2^(semitones/12).
double shift_rate_factor(int semitones);

// Resampling-based pitch shift: every component at f Hz moves to
// f * 2^(s/12) and the duration scales by 2^(-s/12). s = 0 returns the input
// unchanged. Pitch and tempo change together (no time-stretch compensation).
AudioClip pitch_shift(const AudioClip& clip, int semitones);

// Multiply every onset by 2^(-s/12) to follow the resampled time axis.
std::vector<Annotation> scale_annotations(const std::vector<Annotation>& annotations,
                                          int semitones);

struct AugmentConfig {
    // When true, re-run onset detection on each shifted clip and label each
    // detection with the nearest scaled annotation (dropping detections with
    // no annotation within `match_tolerance`). When false, trust the scaled
    // annotation times as onsets directly.
    bool redetect_onsets = false;
    double match_tolerance = 0.015;
};

// For each (recording, shift) pair: pitch-shift, rescale annotations, extract
// features, and pool everything into one dataset. groups[i] = index of the
// source recording.
LabeledDataset build_augmented_dataset(const std::vector<Recording>& recordings,
                                       const std::vector<int>& shifts,
                                       const AugmentConfig& config = {});

}  // namespace mrt
