#include "cbai/eegsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "cbai/binary_io.hpp"
#include "cbai/error.hpp"
#include "cbai/rng.hpp"

namespace cbai {

namespace {

constexpr double kKernelDecayMs = 45.0;
constexpr double kKernelFrequencyHz = 10.0;
constexpr double kKernelGrid = 0x1.0p24;
constexpr std::array<double, kNumChannels> kDefaultGains = {0.9, 0.7, 0.7, 1.0, 0.5, 0.5};

constexpr int kPinkRows = 16;

void add_white(std::span<double> out, double sigma, Rng& rng) {
    for (double& v : out) v += sigma * standard_normal(rng);
}

// Voss-McCartney: row k is refreshed every 2^k samples (selected by the
// number of trailing zeros of the sample counter), plus one white row.
void add_pink(std::span<double> out, double sigma, Rng& rng) {
    std::array<double, kPinkRows> rows{};
    double running = 0.0;
    for (double& r : rows) {
        r = standard_normal(rng);
        running += r;
    }
    const double scale = sigma / std::sqrt(static_cast<double>(kPinkRows + 1));
    for (std::size_t n = 0; n < out.size(); ++n) {
        if (n > 0) {
            const int k = std::countr_zero(static_cast<std::uint64_t>(n));
            if (k < kPinkRows) {
                running -= rows[k];
                rows[k] = standard_normal(rng);
                running += rows[k];
            }
        }
        out[n] += scale * (running + standard_normal(rng));
    }
}

}  // namespace

EegSegment::EegSegment(std::size_t channels, std::size_t samples, int sample_rate_hz, double t0_ms)
    : channels_(channels),
      samples_(samples),
      sample_rate_hz_(sample_rate_hz),
      t0_ms_(t0_ms),
      data_(channels * samples, 0.0) {}

VepKernel default_kernel() {
    VepKernel kernel;
    kernel.duration_ms = 250;
    kernel.channel_gains = kDefaultGains;
    const auto n = static_cast<std::size_t>(kernel.duration_ms * kSampleRateHz / 1000);

    std::vector<double> shape(n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t_ms = static_cast<double>(i) * 1000.0 / kSampleRateHz;
        shape[i] = std::exp(-t_ms / kKernelDecayMs) *
                   std::sin(2.0 * std::numbers::pi * kKernelFrequencyHz * t_ms / 1000.0);
        peak = std::max(peak, std::abs(shape[i]));
    }
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        auto& row = kernel.impulse_response[c];
        row.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = std::round(kernel.channel_gains[c] * shape[i] / peak * kKernelGrid) / kKernelGrid;
        }
    }
    return kernel;
}

EegSegment generate_noise(std::size_t channels, std::size_t samples, const NoiseModel& noise) {
    if (noise.sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
    EegSegment seg(channels, samples);
    if (noise.sigma == 0.0) return seg;
    Rng rng(noise.rng_seed);
    for (std::size_t c = 0; c < channels; ++c) {
        if (noise.kind == NoiseKind::White) {
            add_white(seg.channel(c), noise.sigma, rng);
        } else {
            add_pink(seg.channel(c), noise.sigma, rng);
        }
    }
    return seg;
}

EegSegment synthesize(const FrameTimeline& timeline, std::size_t attended, const VepKernel& kernel,
                      const NoiseModel& noise, const SynthesisOptions& options) {
    if (timeline.frames.empty()) throw Error(ErrorCode::InvalidArgument, "empty timeline");
    if (attended >= timeline.frames.front().states.size()) {
        throw Error(ErrorCode::BadStimulusId, "attended stimulus " + std::to_string(attended) +
                                                  " out of range");
    }
    const double total_ms = timeline.span_ms() + kernel.duration_ms;
    const auto n = static_cast<std::size_t>(std::ceil(total_ms * kSampleRateHz / 1000.0));

    EegSegment seg = generate_noise(kNumChannels, n, noise);
    EegSegment clean(kNumChannels, n);
    for (const FrameEvent& frame : timeline.frames) {
        double gain = frame.states[attended] ? 1.0 : 0.0;
        if (options.leakage_gain != 0.0) {
            for (std::size_t s = 0; s < frame.states.size(); ++s) {
                if (s != attended && frame.states[s]) gain += options.leakage_gain;
            }
        }
        if (gain == 0.0) continue;
        const auto onset = static_cast<std::size_t>(std::llround(frame.onset_ms * kSampleRateHz / 1000.0));
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            const auto& ir = kernel.impulse_response[c];
            auto row = clean.channel(c);
            const std::size_t len = std::min(ir.size(), n - std::min(n, onset));
            for (std::size_t k = 0; k < len; ++k) row[onset + k] += gain * ir[k];
        }
    }
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        auto out = seg.channel(c);
        auto src = clean.channel(c);
        for (std::size_t i = 0; i < n; ++i) out[i] = src[i] + out[i];
    }
    return seg;
}

double snr_estimate(const EegSegment& segment, const EegSegment& clean) {
    if (!segment.same_shape(clean)) throw Error(ErrorCode::ShapeMismatch, "segment shapes differ");
    double signal = 0.0;
    double noise = 0.0;
    const auto& a = segment.data();
    const auto& b = clean.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        signal += b[i] * b[i];
        const double d = a[i] - b[i];
        noise += d * d;
    }
    if (noise == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / noise);
}

bool is_noiseless(double snr_db) { return std::isinf(snr_db) && snr_db > 0.0; }

void write_segment(std::ostream& out, const EegSegment& segment) {
    binio::put_magic(out, "BAIEEG1");
    binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(segment.channels()));
    binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(segment.sample_rate_hz()));
    binio::put_uint<std::uint64_t>(out, segment.samples());
    for (double v : segment.data()) binio::put_f32(out, static_cast<float>(v));
    if (!out) throw Error(ErrorCode::IoError, "failed writing segment");
}

EegSegment read_segment(std::istream& in) {
    binio::expect_magic(in, "BAIEEG1");
    const auto channels = binio::get_uint<std::uint32_t>(in);
    const auto rate = binio::get_uint<std::uint32_t>(in);
    const auto samples = binio::get_uint<std::uint64_t>(in);
    if (channels == 0 || channels > 1024 || samples > (1ull << 32)) {
        throw Error(ErrorCode::ParseError, "implausible segment header");
    }
    EegSegment seg(channels, static_cast<std::size_t>(samples), static_cast<int>(rate));
    for (std::size_t c = 0; c < channels; ++c) {
        for (double& v : seg.channel(c)) v = binio::get_f32(in);
    }
    return seg;
}

void save_segment(const std::string& path, const EegSegment& segment) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
    write_segment(out, segment);
}

EegSegment load_segment(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return read_segment(in);
}

}  // namespace cbai
