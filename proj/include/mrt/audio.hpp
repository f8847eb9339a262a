#pragma once

#include <string>
#include <vector>

namespace mrt {

inline constexpr int kStandardRate = 48000;

// Mono sample buffer. Samples live in [-1, 1]; everything downstream assumes
// a 48 kHz rate after ingestion (1 Hz bins on a 48,000-point DFT).
struct AudioClip {
    std::vector<float> samples;
    int sample_rate = kStandardRate;

    double duration() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

// Loads a 16- or 24-bit PCM WAV file (1-2 channels). Stereo is averaged to
// mono, samples are scaled to [-1, 1], and anything not at 48 kHz is
// resampled with the windowed-sinc resampler.
AudioClip load_wav(const std::string& path);

// Writes a mono PCM WAV file. bits_per_sample must be 16 or 24.
void save_wav(const std::string& path, const AudioClip& clip, int bits_per_sample = 16);

// Windowed-sinc interpolation: y[n] = x(n * step), output length
// round(len / step). step > 1 lowers the cutoff to avoid aliasing.
std::vector<float> sinc_resample(const std::vector<float>& samples, double step);

// Rate conversion to target_rate (no-op when already there).
AudioClip resample(const AudioClip& clip, int target_rate);

}  // namespace mrt
