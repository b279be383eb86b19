#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cbai/classifier.hpp"
#include "cbai/decoder.hpp"
#include "cbai/dialogue.hpp"
#include "cbai/eegsim.hpp"
#include "cbai/provider.hpp"
#include "cbai/stimulus.hpp"

namespace cbai {

// ---- configuration ---------------------------------------------------------

enum class SnrLevel { Noiseless, High, Medium, Low };

inline constexpr std::array<SnrLevel, 4> kSnrSweep = {SnrLevel::Noiseless, SnrLevel::High, SnrLevel::Medium,
                                                      SnrLevel::Low};

std::string_view to_string(SnrLevel level);
SnrLevel parse_snr_level(std::string_view name);  // throws InvalidArgument
// Pink-noise marginal sigma of each preset, relative to a unit-peak kernel.
double snr_sigma(SnrLevel level);

enum class ProviderMode { Mock, Remote };

struct EngineConfig {
    // stimulus
    double frame_rate_hz = 20.0;
    int code_degree = 5;
    std::size_t num_stimuli = 10;
    std::size_t shift_step = 3;
    double amplitude = 0.5;
    int max_repetitions = 7;
    // simulator
    NoiseKind noise_kind = NoiseKind::Pink;
    double noise_sigma = 0.5;
    double leakage_gain = 0.0;
    // decoder
    DecoderConfig decoder;
    // classifier
    ModelDescriptor model;
    std::size_t training_trials = 7;
    std::size_t heldout_trials = 3;
    // dialogue
    DialogueConfig dialogue;
    std::string knowledge_base_path;  // empty: built-in lists
    ProviderMode provider = ProviderMode::Mock;
    HttpProviderConfig remote;
    // seeds
    std::uint64_t seed = 1;

    // Throws InvalidArgument when a field breaks its module's bounds.
    void validate() const;
};

nlohmann::json config_to_json(const EngineConfig& cfg);
// Missing keys keep their defaults; unknown keys are a ParseError.
EngineConfig config_from_json(const nlohmann::json& j);
EngineConfig load_config(const std::string& path);
void save_config(const std::string& path, const EngineConfig& cfg);

void apply_snr_level(EngineConfig& cfg, SnrLevel level);

// ---- simulation ------------------------------------------------------------

struct Simulator {
    StimulusCodebook codebook;
    FrameTimeline timeline;
    VepKernel kernel;
    SynthesisOptions options;
    NoiseKind noise_kind = NoiseKind::Pink;
    double noise_sigma = 0.0;

    // Seeded by derive_seed(master, label).
    EegSegment trial(std::size_t attended, std::uint64_t master, std::string_view label) const;
};

Simulator make_simulator(const EngineConfig& cfg);

// The knowledge base named by the config, or the built-in one.
KnowledgeBase make_knowledge_base(const EngineConfig& cfg);
// Mock, or the HTTP provider for remote mode.
std::unique_ptr<LanguageModelProvider> make_provider(const EngineConfig& cfg);

// Decodes one trial: synthesizes EEG attending `attended` and runs the
// decoder. A null model decodes with the ground-truth predictor.
DecisionOutcome decode_trial(const Simulator& sim, const FramePredictor* model, const DecoderConfig& dcfg,
                             std::size_t attended, std::uint64_t master, std::string_view label,
                             const TrialLogSink& sink = {});

// ---- training session ------------------------------------------------------

struct TrainingSessionResult {
    ClassifierModel model;
    TrainingReport report;
    std::size_t training_frames = 0;
    double heldout_frame_accuracy = 0.0;
    std::string digest;  // fnv1a64 of the serialized model, hex
};

// training_trials full-length trials (stimulus t mod N for trial t), then a
// held-out set of heldout_trials trials with separate seeds.
TrainingSessionResult run_training_session(const EngineConfig& cfg);
std::string format_training_report(const TrainingSessionResult& r);

// ---- scenarios -------------------------------------------------------------

inline constexpr std::string_view kFinishedTarget = "FINISHED";

struct ScriptStep {
    std::string question;
    std::string target;  // detail to convey; kFinishedTarget ends the scenario
};

struct ScenarioScript {
    std::string tag;
    std::string goal;
    std::vector<ScriptStep> steps;  // the first question is the opening line

    void validate() const;  // throws InvalidArgument
};

ScenarioScript pizzeria_script();
// {"tag":..., "goal":..., "steps":[{"question":..., "target":...}]}. Throws ParseError.
ScenarioScript parse_script(std::string_view json_text);
ScenarioScript load_script(const std::string& path);

// The simulated user's choice for the visible labels: exact match on this
// page, exact match on the other page (More/Previous), containment on this
// page, containment on the other page, else None.
std::size_t intended_stimulus(const DialogueEngine& engine, std::string_view target);

struct ScenarioTrial {
    std::size_t step = 0;
    std::size_t intended = 0;
    DecisionOutcome outcome;
    bool wasted = false;  // decoded an empty keyword slot
};

struct ScenarioResult {
    Transcript transcript;
    std::vector<ScenarioTrial> trials;
    std::vector<std::string> trial_log;  // decoder records, one per frame
    std::size_t steps_completed = 0;
    bool finished = false;  // ended through the Finished option
    double selection_accuracy = 0.0;
};

// Partner asks each step's question; a step is repeated after a wrong
// answer. Ends on Finished, on the budget, or when the script runs out.
ScenarioResult run_scenario(const EngineConfig& cfg, const ScenarioScript& script, const FramePredictor* model,
                            LanguageModelProvider& provider);

// ---- accuracy evaluation ---------------------------------------------------

struct AccuracyQuestion {
    std::string question;
    std::size_t intended = 0;
};

const std::vector<AccuracyQuestion>& default_accuracy_questions();

struct AccuracyReport {
    std::vector<AccuracyQuestion> questions;
    std::vector<TrialResult> trials;
    double accuracy = 0.0;
    double chance_level = 0.1;
    double mean_selection_time_ms = 0.0;
};

// Throws EmptyInput for n == 0. Questions cycle through the default list.
AccuracyReport run_accuracy_evaluation(const EngineConfig& cfg, const FramePredictor* model, std::size_t n = 20);
std::string format_accuracy_report(const AccuracyReport& r);

// ---- serve -----------------------------------------------------------------

using LogSink = std::function<void(const std::string&)>;

// One engine session; transport-free so it can be driven directly.
//   in:  {"type":"question","text":...}
//        {"type":"attend","stimulus":k}
//        {"type":"snapshot"}
//   out: snapshot, keywords, trace (one per frame), decision, answer, end,
//        and error for rejected messages.
class ServeSession {
public:
    ServeSession(const EngineConfig& cfg, const FramePredictor* model, std::unique_ptr<LanguageModelProvider> provider,
                 LogSink log = {});

    nlohmann::json snapshot() const;
    std::vector<nlohmann::json> handle(const nlohmann::json& message);
    // Parses one line; malformed JSON yields an error message.
    std::vector<nlohmann::json> handle_line(std::string_view line);

    const DialogueEngine& engine() const { return engine_; }

private:
    nlohmann::json keywords_message() const;
    std::vector<nlohmann::json> attend(std::size_t stimulus);

    EngineConfig cfg_;
    Simulator sim_;
    const FramePredictor* model_;
    std::unique_ptr<LanguageModelProvider> provider_;
    DialogueEngine engine_;
    LogSink log_;
    std::size_t trial_counter_ = 0;
};

// Line-delimited JSON over TCP on 127.0.0.1, one ServeSession per
// connection, each on its own thread.
class ServeServer {
public:
    // Receives the server's log sink so sessions can log their transitions.
    using SessionFactory = std::function<std::unique_ptr<ServeSession>(const LogSink&)>;

    ServeServer(SessionFactory factory, LogSink log = {});
    ~ServeServer();
    ServeServer(const ServeServer&) = delete;
    ServeServer& operator=(const ServeServer&) = delete;

    // Port 0 picks a free port. Throws BindFailure.
    std::uint16_t bind(std::uint16_t port);
    // Accepts until stop(); returns after all connection threads finish.
    void run();
    void stop();

private:
    void serve_connection(int fd);

    SessionFactory factory_;
    LogSink log_;
    int listen_fd_ = -1;
    std::atomic<bool> stopping_{false};
    std::mutex mutex_;
    std::vector<std::thread> workers_;
    std::vector<int> client_fds_;
};

}  // namespace cbai
