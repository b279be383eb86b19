#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbai/stimulus.hpp"

namespace cbai {

inline constexpr std::size_t kNumChannels = 6;
inline constexpr int kSampleRateHz = 1000;
inline constexpr std::array<std::string_view, kNumChannels> kChannelNames = {"POz", "PO3", "PO4",
                                                                           "Oz",  "O9",  "O10"};

// Impulse response of one flash, per channel, sampled at 1 kHz.
struct VepKernel {
    std::array<std::vector<double>, kNumChannels> impulse_response;
    int duration_ms = 250;
    std::array<double, kNumChannels> channel_gains{};
};

// Damped 10 Hz sinusoid, exp(-t/45ms) * sin(2*pi*10Hz*t), normalised to unit
// peak and scaled by the channel gains. Values are rounded onto a 2^-24 grid so
// that superposing a handful of kernels is exact in double precision.
VepKernel default_kernel();

enum class NoiseKind { White, Pink };

struct NoiseModel {
    NoiseKind kind = NoiseKind::White;
    double sigma = 0.0;
    std::uint64_t rng_seed = 0;
};

// channels x N samples, row-major (channel-major).
class EegSegment {
public:
    EegSegment() = default;
    EegSegment(std::size_t channels, std::size_t samples, int sample_rate_hz = kSampleRateHz,
               double t0_ms = 0.0);

    std::size_t channels() const { return channels_; }
    std::size_t samples() const { return samples_; }
    int sample_rate_hz() const { return sample_rate_hz_; }
    double t0_ms() const { return t0_ms_; }

    double& at(std::size_t channel, std::size_t sample) { return data_[channel * samples_ + sample]; }
    double at(std::size_t channel, std::size_t sample) const { return data_[channel * samples_ + sample]; }

    std::span<double> channel(std::size_t c) { return {data_.data() + c * samples_, samples_}; }
    std::span<const double> channel(std::size_t c) const { return {data_.data() + c * samples_, samples_}; }

    const std::vector<double>& data() const { return data_; }

    bool same_shape(const EegSegment& other) const {
        return channels_ == other.channels_ && samples_ == other.samples_;
    }

    friend bool operator==(const EegSegment&, const EegSegment&) = default;

private:
    std::size_t channels_ = 0;
    std::size_t samples_ = 0;
    int sample_rate_hz_ = kSampleRateHz;
    double t0_ms_ = 0.0;
    std::vector<double> data_;
};

struct SynthesisOptions {
    // Response gain applied to non-attended stimuli's ON frames (0 = covert attention ideal).
    double leakage_gain = 0.0;
};

// Linear superposition of the kernel at every ON frame of the attended stimulus,
// plus seeded noise. Length: ceil((span + kernel duration) * rate).
EegSegment synthesize(const FrameTimeline& timeline, std::size_t attended, const VepKernel& kernel,
                      const NoiseModel& noise, const SynthesisOptions& options = {});

// Noise-only segment of the given shape; the noise part of synthesize().
EegSegment generate_noise(std::size_t channels, std::size_t samples, const NoiseModel& noise);

// 10*log10(P(clean) / P(segment - clean)); +infinity when the two are identical.
double snr_estimate(const EegSegment& segment, const EegSegment& clean);
bool is_noiseless(double snr_db);

// Binary container: "BAIEEG1\0", u32 channels, u32 rate, u64 samples,
// then little-endian f32 samples, channel-major.
void write_segment(std::ostream& out, const EegSegment& segment);
EegSegment read_segment(std::istream& in);
void save_segment(const std::string& path, const EegSegment& segment);
EegSegment load_segment(const std::string& path);

}  // namespace cbai
