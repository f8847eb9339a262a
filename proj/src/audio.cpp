#include "mrt/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "WAV and model readers assume a little-endian host");

namespace mrt {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Blackman-windowed sinc, 32 zero crossings per side at the output rate.
constexpr int kSincTaps = 32;

double blackman(double x) {  // x in [-1, 1]
    const double t = 0.5 * (x + 1.0);
    return 0.42 - 0.5 * std::cos(2.0 * kPi * t) + 0.08 * std::cos(4.0 * kPi * t);
}

double sinc(double x) {
    if (std::abs(x) < 1e-12) {
        return 1.0;
    }
    const double px = kPi * x;
    return std::sin(px) / px;
}

struct ChunkHeader {
    char id[4];
    std::uint32_t size;
};

template <typename T>
T read_raw(std::ifstream& in, const std::string& path, const char* what) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw std::runtime_error(path + ": truncated WAV (" + what + ")");
    }
    return value;
}

}  // namespace

AudioClip load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open WAV file: " + path);
    }

    char riff[4];
    if (!in.read(riff, 4) || std::memcmp(riff, "RIFF", 4) != 0) {
        throw std::runtime_error(path + ": not a RIFF file");
    }
    read_raw<std::uint32_t>(in, path, "riff size");
    char wave[4];
    if (!in.read(wave, 4) || std::memcmp(wave, "WAVE", 4) != 0) {
        throw std::runtime_error(path + ": not a WAVE file");
    }

    std::uint16_t audio_format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits_per_sample = 0;
    std::vector<std::uint8_t> data;
    bool have_fmt = false;
    bool have_data = false;

    while (!have_data || !have_fmt) {
        ChunkHeader header{};
        if (!in.read(reinterpret_cast<char*>(&header), sizeof(header))) {
            break;
        }
        if (std::memcmp(header.id, "fmt ", 4) == 0) {
            audio_format = read_raw<std::uint16_t>(in, path, "audio format");
            channels = read_raw<std::uint16_t>(in, path, "channel count");
            sample_rate = read_raw<std::uint32_t>(in, path, "sample rate");
            read_raw<std::uint32_t>(in, path, "byte rate");
            read_raw<std::uint16_t>(in, path, "block align");
            bits_per_sample = read_raw<std::uint16_t>(in, path, "bit depth");
            if (header.size > 16) {
                in.seekg(header.size - 16, std::ios::cur);
            }
            have_fmt = true;
        } else if (std::memcmp(header.id, "data", 4) == 0) {
            data.resize(header.size);
            if (!in.read(reinterpret_cast<char*>(data.data()), header.size)) {
                throw std::runtime_error(path + ": truncated WAV data chunk");
            }
            have_data = true;
        } else {
            in.seekg(header.size + (header.size & 1u), std::ios::cur);
        }
    }

    if (!have_fmt || !have_data) {
        throw std::runtime_error(path + ": missing fmt or data chunk");
    }
    if (audio_format != 1) {
        throw std::runtime_error(path + ": unsupported audio format " +
                                 std::to_string(audio_format) + " (PCM only)");
    }
    if (bits_per_sample != 16 && bits_per_sample != 24) {
        throw std::runtime_error(path + ": unsupported bit depth " +
                                 std::to_string(bits_per_sample) + " (16/24-bit only)");
    }
    if (channels < 1 || channels > 2) {
        throw std::runtime_error(path + ": unsupported channel count " +
                                 std::to_string(channels));
    }
    if (sample_rate == 0) {
        throw std::runtime_error(path + ": zero sample rate");
    }

    const std::size_t bytes_per_sample = bits_per_sample / 8;
    const std::size_t frame_bytes = bytes_per_sample * channels;
    const std::size_t frames = data.size() / frame_bytes;

    AudioClip clip;
    clip.sample_rate = static_cast<int>(sample_rate);
    clip.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const std::uint8_t* p = data.data() + i * frame_bytes + ch * bytes_per_sample;
            if (bits_per_sample == 16) {
                std::int16_t v;
                std::memcpy(&v, p, 2);
                acc += v / 32768.0;
            } else {
                std::int32_t v = (p[0] << 8) | (p[1] << 16) | (p[2] << 24);
                v >>= 8;  // sign-extend the 24-bit value
                acc += v / 8388608.0;
            }
        }
        clip.samples[i] = static_cast<float>(acc / channels);
    }

    if (clip.sample_rate != kStandardRate) {
        clip = resample(clip, kStandardRate);
    }
    return clip;
}

void save_wav(const std::string& path, const AudioClip& clip, int bits_per_sample) {
    if (bits_per_sample != 16 && bits_per_sample != 24) {
        throw std::runtime_error("save_wav: bits_per_sample must be 16 or 24");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write WAV file: " + path);
    }

    const std::uint32_t bytes_per_sample = bits_per_sample / 8;
    const std::uint32_t data_size =
        static_cast<std::uint32_t>(clip.samples.size() * bytes_per_sample);
    const std::uint32_t riff_size = 36 + data_size;
    const std::uint16_t channels = 1;
    const std::uint32_t byte_rate = clip.sample_rate * bytes_per_sample;
    const std::uint16_t block_align = static_cast<std::uint16_t>(bytes_per_sample);
    const std::uint16_t format = 1;
    const std::uint32_t fmt_size = 16;
    const std::uint32_t rate = static_cast<std::uint32_t>(clip.sample_rate);
    const std::uint16_t bits = static_cast<std::uint16_t>(bits_per_sample);

    out.write("RIFF", 4);
    out.write(reinterpret_cast<const char*>(&riff_size), 4);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    out.write(reinterpret_cast<const char*>(&fmt_size), 4);
    out.write(reinterpret_cast<const char*>(&format), 2);
    out.write(reinterpret_cast<const char*>(&channels), 2);
    out.write(reinterpret_cast<const char*>(&rate), 4);
    out.write(reinterpret_cast<const char*>(&byte_rate), 4);
    out.write(reinterpret_cast<const char*>(&block_align), 2);
    out.write(reinterpret_cast<const char*>(&bits), 2);
    out.write("data", 4);
    out.write(reinterpret_cast<const char*>(&data_size), 4);

    for (float sample : clip.samples) {
        const double x = std::clamp(static_cast<double>(sample), -1.0, 1.0);
        if (bits_per_sample == 16) {
            const auto v = static_cast<std::int16_t>(std::clamp<long>(
                std::lround(x * 32768.0), -32768, 32767));
            out.write(reinterpret_cast<const char*>(&v), 2);
        } else {
            const auto v = static_cast<std::int32_t>(std::clamp<long>(
                std::lround(x * 8388608.0), -8388608, 8388607));
            const std::uint8_t bytes[3] = {static_cast<std::uint8_t>(v & 0xff),
                                           static_cast<std::uint8_t>((v >> 8) & 0xff),
                                           static_cast<std::uint8_t>((v >> 16) & 0xff)};
            out.write(reinterpret_cast<const char*>(bytes), 3);
        }
    }
    if (!out) {
        throw std::runtime_error("failed writing WAV file: " + path);
    }
}

std::vector<float> sinc_resample(const std::vector<float>& samples, double step) {
    if (step <= 0.0) {
        throw std::runtime_error("sinc_resample: step must be positive");
    }
    if (samples.empty()) {
        return {};
    }
    if (step == 1.0) {
        return samples;
    }

    // When decimating (step > 1) the kernel is stretched and the cutoff
    // lowered accordingly so content above the new Nyquist is rejected.
    const double cutoff = std::min(1.0, 1.0 / step);
    const double half_width = kSincTaps / cutoff;

    const auto out_len = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(samples.size() / step)));
    std::vector<float> out(out_len);
    const auto n = static_cast<long long>(samples.size());

    for (std::size_t i = 0; i < out_len; ++i) {
        const double pos = i * step;
        const auto k_lo = static_cast<long long>(std::ceil(pos - half_width));
        const auto k_hi = static_cast<long long>(std::floor(pos + half_width));
        double acc = 0.0;
        for (long long k = std::max<long long>(0, k_lo); k <= std::min(n - 1, k_hi); ++k) {
            const double d = pos - k;
            acc += samples[static_cast<std::size_t>(k)] * cutoff * sinc(cutoff * d) *
                   blackman(d / half_width);
        }
        out[i] = static_cast<float>(acc);
    }
    return out;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
    if (target_rate <= 0) {
        throw std::runtime_error("resample: target rate must be positive");
    }
    if (clip.sample_rate == target_rate) {
        return clip;
    }
    AudioClip out;
    out.sample_rate = target_rate;
    out.samples = sinc_resample(clip.samples,
                                static_cast<double>(clip.sample_rate) / target_rate);
    return out;
}

}  // namespace mrt
