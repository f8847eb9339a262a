#pragma once

#include <optional>
#include <vector>

#include "mrt/annotations.hpp"
#include "mrt/audio.hpp"

namespace mrt {

// Magnitudes of DFT bins 0..11,999 of the stroke window zero-padded to
// 48,000 samples: 1 Hz bin spacing, spectrum up to 12 kHz.
using FeatureVector = std::vector<float>;

inline constexpr int kFeatureDim = 12000;
inline constexpr int kDftSize = 48000;
inline constexpr double kWindowLead = 0.03;  // seconds before each onset

struct TemplateSet {
    std::vector<FeatureVector> templates;  // one per StrokeLabel value
    std::vector<std::size_t> counts;       // samples averaged per label
};

// Window = samples in [onset - 0.03 s, next_onset - 0.03 s) (start clamped to
// the beginning of the clip, end clamped to its last sample), truncated to
// 48,000 samples and zero-padded to 48,000; returns |DFT| bins 0..11,999.
FeatureVector extract_stroke_spectrum(const AudioClip& clip, double onset,
                                      std::optional<double> next_onset);

// One FeatureVector per onset; the final stroke's window ends at
// min(onset - 0.03 + 1.0 s, clip end).
std::vector<FeatureVector> extract_all(const AudioClip& clip,
                                       const std::vector<double>& onsets);

// Per-class elementwise mean of the given feature vectors.
TemplateSet compute_templates(const std::vector<FeatureVector>& features,
                              const std::vector<StrokeLabel>& labels);

// Debug helper: all 48,000 magnitude bins of the same stroke window (the
// upper half mirrors the lower by conjugate symmetry). Used to check energy
// conservation between the window and its spectrum.
std::vector<double> extract_full_spectrum(const AudioClip& clip, double onset,
                                          std::optional<double> next_onset);

// Scale a spectrum to unit maximum (no-op on an all-zero vector).
FeatureVector normalize_unit_max(const FeatureVector& v);

// Non-overlapping block means: 12,000 bins -> 12,000/factor bins. Each output
// bin is the mean of `factor` consecutive input bins, so narrow 1 Hz peaks
// survive (a plain every-Nth subsample would miss them).
FeatureVector decimate(const FeatureVector& v, int factor);

}  // namespace mrt
