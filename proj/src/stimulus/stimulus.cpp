#include "cbai/stimulus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>

#include "cbai/error.hpp"

namespace cbai {

MSequence generate_msequence(int degree, std::span<const int> taps,
                             std::span<const std::uint8_t> seed_state) {
    if (degree < 2 || degree > 16) {
        throw Error(ErrorCode::InvalidArgument, "degree must be in [2, 16]");
    }
    if (taps.empty()) throw Error(ErrorCode::InvalidArgument, "tap set is empty");
    for (int t : taps) {
        if (t < 1 || t > degree) throw Error(ErrorCode::InvalidArgument, "tap outside [1, degree]");
    }
    if (seed_state.size() != static_cast<std::size_t>(degree)) {
        throw Error(ErrorCode::InvalidArgument, "seed state length must equal degree");
    }
    if (std::none_of(seed_state.begin(), seed_state.end(), [](std::uint8_t b) { return b != 0; })) {
        throw Error(ErrorCode::ZeroSeed, "LFSR seed state is all zero");
    }

    // Bit j of `state` holds register r[j+1].
    std::uint32_t state = 0;
    for (int j = 0; j < degree; ++j) {
        if (seed_state[j] != 0) state |= 1u << j;
    }
    std::uint32_t tap_mask = 0;
    for (int t : taps) tap_mask |= 1u << (t - 1);

    const std::uint32_t seed = state;
    const std::size_t full_period = (std::size_t{1} << degree) - 1;
    const std::uint32_t register_mask = (1u << degree) - 1;

    MSequence seq;
    seq.degree = degree;
    seq.taps.assign(taps.begin(), taps.end());
    seq.bits.reserve(full_period);

    std::size_t period = 0;
    do {
        seq.bits.push_back(static_cast<std::uint8_t>((state >> (degree - 1)) & 1u));
        const std::uint32_t feedback = static_cast<std::uint32_t>(std::popcount(state & tap_mask) & 1);
        state = ((state << 1) | feedback) & register_mask;
        ++period;
    } while (state != seed && period <= full_period);

    if (period != full_period || state != seed) {
        throw Error(ErrorCode::DegenerateSequence,
                    "observed period " + std::to_string(period) + " < " + std::to_string(full_period));
    }
    return seq;
}

MSequence default_msequence() {
    static constexpr int taps[] = {5, 2};
    static constexpr std::uint8_t seed[] = {0, 0, 0, 0, 1};
    return generate_msequence(5, taps, seed);
}

Bits circular_shift(std::span<const std::uint8_t> bits, long long n) {
    const auto len = static_cast<long long>(bits.size());
    Bits out(bits.size());
    if (len == 0) return out;
    const long long offset = ((n % len) + len) % len;
    for (long long i = 0; i < len; ++i) {
        out[static_cast<std::size_t>(i)] = bits[static_cast<std::size_t>((i + offset) % len)];
    }
    return out;
}

int periodic_autocorrelation(std::span<const std::uint8_t> bits, std::size_t lag) {
    const std::size_t len = bits.size();
    if (lag >= len) throw Error(ErrorCode::InvalidArgument, "lag must be < sequence length");
    int sum = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const int a = bits[i] ? 1 : -1;
        const int b = bits[(i + lag) % len] ? 1 : -1;
        sum += a * b;
    }
    return sum;
}

Bits StimulusCodebook::row(std::size_t stimulus) const {
    return circular_shift(base.bits, static_cast<long long>(shifts.at(stimulus)));
}

StimulusCodebook build_codebook(const MSequence& base, std::size_t num_stimuli,
                                std::size_t shift_step) {
    const std::size_t len = base.length();
    if (len == 0) throw Error(ErrorCode::InvalidArgument, "empty base sequence");
    if (num_stimuli == 0) throw Error(ErrorCode::InvalidArgument, "need at least one stimulus");

    StimulusCodebook book;
    book.base = base;
    book.shift_step = shift_step;
    std::set<std::size_t> seen;
    for (std::size_t s = 0; s < num_stimuli; ++s) {
        const std::size_t shift = (s * shift_step) % len;
        if (!seen.insert(shift).second) {
            throw Error(ErrorCode::ShiftCollision,
                        "stimulus " + std::to_string(s) + " reuses shift " + std::to_string(shift));
        }
        book.shifts.push_back(shift);
    }
    return book;
}

FrameTimeline build_timeline(const StimulusCodebook& codebook, double frame_rate_hz,
                             int max_repetitions) {
    if (!(frame_rate_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "frame rate must be positive");
    if (max_repetitions < 1) throw Error(ErrorCode::InvalidArgument, "need at least one repetition");

    FrameTimeline timeline;
    timeline.frame_rate_hz = frame_rate_hz;
    timeline.frame_duration_ms = 1000.0 / frame_rate_hz;
    timeline.max_repetitions = max_repetitions;

    const std::size_t total = static_cast<std::size_t>(max_repetitions) * codebook.code_length();
    timeline.frames.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        FrameEvent ev;
        ev.frame_index = i;
        ev.onset_ms = static_cast<double>(i) * timeline.frame_duration_ms;
        ev.states.resize(codebook.num_stimuli());
        for (std::size_t s = 0; s < codebook.num_stimuli(); ++s) ev.states[s] = codebook.bit(s, i);
        timeline.frames.push_back(std::move(ev));
    }
    return timeline;
}

std::string export_codebook(const StimulusCodebook& codebook) {
    std::ostringstream out;
    out << "degree=" << codebook.base.degree << '\n';
    out << "taps=";
    for (std::size_t i = 0; i < codebook.base.taps.size(); ++i) {
        out << (i ? "," : "") << codebook.base.taps[i];
    }
    out << '\n';
    out << "shift_step=" << codebook.shift_step << '\n';
    out << "amplitude=" << codebook.amplitude << '\n';
    out << '\n';
    for (std::size_t s = 0; s < codebook.num_stimuli(); ++s) {
        for (std::uint8_t b : codebook.row(s)) out << (b ? '1' : '0');
        out << '\n';
    }
    return out.str();
}

StimulusCodebook parse_codebook(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int degree = 0;
    std::vector<int> taps;
    std::size_t step = 0;
    double amplitude = 0.5;
    std::vector<Bits> rows;
    bool in_body = false;
    while (std::getline(in, line)) {
        if (!in_body) {
            if (line.empty()) {
                in_body = true;
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "bad header line: " + line);
            const std::string key = line.substr(0, eq);
            const std::string value = line.substr(eq + 1);
            try {
                if (key == "degree") {
                    degree = std::stoi(value);
                } else if (key == "taps") {
                    std::istringstream tv(value);
                    std::string tok;
                    while (std::getline(tv, tok, ',')) taps.push_back(std::stoi(tok));
                } else if (key == "shift_step") {
                    step = static_cast<std::size_t>(std::stoul(value));
                } else if (key == "amplitude") {
                    amplitude = std::stod(value);
                }
            } catch (const std::logic_error&) {
                throw Error(ErrorCode::ParseError, "bad value for " + key);
            }
        } else if (!line.empty()) {
            Bits row;
            for (char c : line) {
                if (c != '0' && c != '1') throw Error(ErrorCode::ParseError, "row must be 0/1 characters");
                row.push_back(static_cast<std::uint8_t>(c - '0'));
            }
            rows.push_back(std::move(row));
        }
    }
    if (rows.empty()) throw Error(ErrorCode::ParseError, "codebook has no rows");

    StimulusCodebook book;
    book.base.bits = rows.front();
    book.base.degree = degree;
    book.base.taps = taps;
    book.shift_step = step;
    book.amplitude = amplitude;
    for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s].size() != book.base.length()) throw Error(ErrorCode::ParseError, "ragged rows");
        book.shifts.push_back((s * step) % book.base.length());
        if (rows[s] != book.row(s)) throw Error(ErrorCode::ParseError, "row does not match header shift");
    }
    return book;
}

}  // namespace cbai
