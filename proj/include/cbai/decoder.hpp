#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cbai/classifier.hpp"
#include "cbai/eegsim.hpp"
#include "cbai/stimulus.hpp"

namespace cbai {

enum class FinishedMode { Cumulative, Consecutive };

struct DecoderConfig {
    double select_threshold = 0.8;
    double reject_ceiling = 0.6;
    std::size_t min_frames = 16;
    std::size_t window_frames = 31;
    std::size_t max_frames = 217;
    std::size_t finished_stimulus = 9;
    std::size_t finished_required_frames = 10;
    FinishedMode finished_mode = FinishedMode::Cumulative;
    double frame_duration_ms = 50.0;
    double acquisition_tail_ms = 200.0;

    // Throws InvalidArgument when the ordering invariants are violated.
    void validate() const;
};

enum class DecisionKind { Selected, Timeout };

struct DecisionOutcome {
    DecisionKind kind = DecisionKind::Selected;
    std::size_t stimulus = 0;
    std::size_t frames_to_decision = 0;
    double frame_duration_ms = 50.0;
    double acquisition_tail_ms = 200.0;

    double selection_time_ms() const { return static_cast<double>(frames_to_decision) * frame_duration_ms; }
    // Includes the EEG still being recorded for the last frame's window.
    double wall_time_ms() const { return selection_time_ms() + acquisition_tail_ms; }

    friend bool operator==(const DecisionOutcome&, const DecisionOutcome&) = default;
};

struct DecoderState {
    std::deque<std::uint8_t> predicted_bits;  // most recent <= window_frames bits
    std::size_t frames_seen = 0;
    std::vector<double> accuracies;           // per stimulus; zero until min_frames
    std::size_t finished_hits = 0;
    std::optional<std::size_t> first_qualifying_frame;  // frames_seen when any stimulus first qualified
    std::optional<DecisionOutcome> decided;

    friend bool operator==(const DecoderState&, const DecoderState&) = default;
};

// Feeds the prediction for absolute frame index state.frames_seen. Predicted
// bit i is compared with code bit (i + shift_s) mod L for every stimulus s.
std::optional<DecisionOutcome> push_prediction(DecoderState& state, std::uint8_t bit,
                                               const StimulusCodebook& codebook, const DecoderConfig& cfg);

// One line-delimited JSON record per push.
struct TrialLogRecord {
    std::size_t frame_index = 0;
    std::uint8_t bit = 0;
    std::vector<double> accuracies;
    bool decided = false;
    std::optional<DecisionOutcome> outcome;
    std::optional<std::size_t> target;  // known intended stimulus, when simulated
};

std::string format_trial_log_record(const TrialLogRecord& record);
TrialLogRecord parse_trial_log_record(const std::string& line);

using TrialLogSink = std::function<void(const TrialLogRecord&)>;

// extract_window -> predict -> push_prediction for each frame until a decision.
DecisionOutcome run_offline(const EegSegment& segment, const FrameTimeline& timeline,
                            const FramePredictor& model, const StimulusCodebook& codebook,
                            const DecoderConfig& cfg, const TrialLogSink& sink = {});

// Predicts the true code bit of one stimulus, ignoring the EEG.
class GroundTruthPredictor : public FramePredictor {
public:
    GroundTruthPredictor(const StimulusCodebook& codebook, std::size_t attended)
        : codebook_(codebook), attended_(attended) {}

    double predict(const FrameWindow& window) const override {
        return codebook_.bit(attended_, window.frame_index) ? 1.0 : 0.0;
    }

private:
    StimulusCodebook codebook_;
    std::size_t attended_;
};

struct TrialResult {
    std::size_t true_stimulus;
    DecisionOutcome outcome;
};

double selection_accuracy(const std::vector<TrialResult>& trials);

}  // namespace cbai
