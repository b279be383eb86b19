#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cbai {

using Bits = std::vector<std::uint8_t>;

// Output of a maximal-length Fibonacci LFSR. Stored as 0/1; the +/-1 mapping
// is applied only inside correlation routines.
struct MSequence {
    Bits bits;
    int degree = 0;
    std::vector<int> taps;  // 1-based register positions

    std::size_t length() const { return bits.size(); }
};

// Register r[1..k], output r[k], feedback into r[1] = XOR of r[t] for t in taps.
// seed_state[j] holds r[j+1].
MSequence generate_msequence(int degree, std::span<const int> taps,
                             std::span<const std::uint8_t> seed_state);

// Degree 5, taps {5,2}, seed 00001: the 31-frame code used by default.
MSequence default_msequence();

Bits circular_shift(std::span<const std::uint8_t> bits, long long n);

// Unnormalised periodic autocorrelation of the +/-1 mapped sequence.
int periodic_autocorrelation(std::span<const std::uint8_t> bits, std::size_t lag);

struct StimulusCodebook {
    MSequence base;
    std::vector<std::size_t> shifts;
    std::size_t shift_step = 3;
    double amplitude = 0.5;

    std::size_t num_stimuli() const { return shifts.size(); }
    std::size_t code_length() const { return base.length(); }

    // On/off state of `stimulus` at absolute frame index `frame`.
    std::uint8_t bit(std::size_t stimulus, std::size_t frame) const {
        return base.bits[(frame + shifts[stimulus]) % base.length()];
    }

    Bits row(std::size_t stimulus) const;
};

inline constexpr std::size_t kDefaultNumStimuli = 10;
inline constexpr std::size_t kDefaultShiftStep = 3;

StimulusCodebook build_codebook(const MSequence& base,
                                std::size_t num_stimuli = kDefaultNumStimuli,
                                std::size_t shift_step = kDefaultShiftStep);

struct FrameEvent {
    std::size_t frame_index = 0;
    double onset_ms = 0.0;
    Bits states;  // one entry per stimulus
};

struct FrameTimeline {
    double frame_duration_ms = 50.0;
    double frame_rate_hz = 20.0;
    int max_repetitions = 7;
    std::vector<FrameEvent> frames;

    double span_ms() const { return static_cast<double>(frames.size()) * frame_duration_ms; }
};

FrameTimeline build_timeline(const StimulusCodebook& codebook, double frame_rate_hz = 20.0,
                             int max_repetitions = 7);

// Plain-text codebook: "key=value" header lines, a blank line, then one row of
// '0'/'1' characters per stimulus.
std::string export_codebook(const StimulusCodebook& codebook);
StimulusCodebook parse_codebook(const std::string& text);

}  // namespace cbai
