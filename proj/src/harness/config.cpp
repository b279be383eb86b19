#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cbai/error.hpp"
#include "cbai/harness.hpp"

namespace cbai {

namespace {

using nlohmann::json;

// Primitive feedback taps per register length.
std::vector<int> taps_for_degree(int degree) {
    switch (degree) {
        case 3: return {3, 2};
        case 4: return {4, 3};
        case 5: return {5, 2};
        case 6: return {6, 5};
        case 7: return {7, 6};
        default: throw Error(ErrorCode::InvalidArgument, "code degree must be in [3, 7]");
    }
}

std::string_view noise_name(NoiseKind k) { return k == NoiseKind::White ? "white" : "pink"; }

NoiseKind parse_noise(const std::string& s) {
    if (s == "white") return NoiseKind::White;
    if (s == "pink") return NoiseKind::Pink;
    throw Error(ErrorCode::ParseError, "noise_kind must be white or pink");
}

// Reads a known key into `out` and records it as consumed.
template <typename T>
void take(const json& j, std::set<std::string>& seen, const std::string& key, T& out) {
    seen.insert(key);
    if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, const std::set<std::string>& seen, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!seen.contains(key)) throw Error(ErrorCode::ParseError, "unknown config key " + where + key);
    }
}

}  // namespace

std::string_view to_string(SnrLevel level) {
    switch (level) {
        case SnrLevel::Noiseless: return "noiseless";
        case SnrLevel::High: return "high";
        case SnrLevel::Medium: return "medium";
        case SnrLevel::Low: return "low";
    }
    return "high";
}

SnrLevel parse_snr_level(std::string_view name) {
    for (SnrLevel l : kSnrSweep) {
        if (to_string(l) == name) return l;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown SNR level: " + std::string(name));
}

double snr_sigma(SnrLevel level) {
    switch (level) {
        case SnrLevel::Noiseless: return 0.0;
        case SnrLevel::High: return 0.5;
        case SnrLevel::Medium: return 1.5;
        case SnrLevel::Low: return 3.0;
    }
    return 0.5;
}

void apply_snr_level(EngineConfig& cfg, SnrLevel level) {
    cfg.noise_kind = NoiseKind::Pink;
    cfg.noise_sigma = snr_sigma(level);
}

void EngineConfig::validate() const {
    if (!(frame_rate_hz > 0.0 && frame_rate_hz <= 100.0)) {
        throw Error(ErrorCode::InvalidArgument, "frame_rate_hz must be in (0, 100]");
    }
    taps_for_degree(code_degree);
    const std::size_t code_length = (std::size_t{1} << code_degree) - 1;
    if (num_stimuli < 2 || shift_step == 0 || (num_stimuli - 1) * shift_step >= code_length) {
        throw Error(ErrorCode::InvalidArgument, "stimulus shifts must be distinct within one code period");
    }
    if (!(amplitude > 0.0 && amplitude <= 1.0)) throw Error(ErrorCode::InvalidArgument, "amplitude must be in (0, 1]");
    if (max_repetitions < 1) throw Error(ErrorCode::InvalidArgument, "max_repetitions must be >= 1");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw Error(ErrorCode::InvalidArgument, "noise_sigma must be finite and >= 0");
    }
    if (!(leakage_gain >= 0.0 && leakage_gain <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "leakage_gain must be in [0, 1]");
    }
    decoder.validate();
    if (decoder.window_frames > code_length) {
        throw Error(ErrorCode::InvalidArgument, "decoder window exceeds the code length");
    }
    if (decoder.max_frames > code_length * static_cast<std::size_t>(max_repetitions)) {
        throw Error(ErrorCode::InvalidArgument, "decoder max_frames exceeds the stimulation timeline");
    }
    if (decoder.finished_stimulus >= num_stimuli) {
        throw Error(ErrorCode::InvalidArgument, "finished_stimulus is not a stimulus id");
    }
    if (std::abs(decoder.frame_duration_ms * frame_rate_hz - 1000.0) > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "decoder frame duration must match the frame rate");
    }
    describe_layers(model);
    if (model.epochs < 1 || model.batch_size < 1 || !(model.learning_rate > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "training needs positive epochs, batch size and learning rate");
    }
    if (!(model.validation_fraction >= 0.0 && model.validation_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "validation_fraction must be in [0, 1)");
    }
    if (training_trials < 1) throw Error(ErrorCode::InvalidArgument, "training_trials must be >= 1");
    if (dialogue.budget < 1) throw Error(ErrorCode::InvalidArgument, "dialogue budget must be >= 1");
    if (!(dialogue.keyword_temperature >= 0.0 && dialogue.keyword_temperature <= 2.0) ||
        !(dialogue.sentence_temperature >= 0.0 && dialogue.sentence_temperature <= 2.0)) {
        throw Error(ErrorCode::InvalidArgument, "temperatures must be in [0, 2]");
    }
    if (remote.port < 1 || remote.port > 65535) throw Error(ErrorCode::InvalidArgument, "remote port out of range");
}

json config_to_json(const EngineConfig& c) {
    json j;
    j["frame_rate_hz"] = c.frame_rate_hz;
    j["code_degree"] = c.code_degree;
    j["num_stimuli"] = c.num_stimuli;
    j["shift_step"] = c.shift_step;
    j["amplitude"] = c.amplitude;
    j["max_repetitions"] = c.max_repetitions;
    j["noise_kind"] = noise_name(c.noise_kind);
    j["noise_sigma"] = c.noise_sigma;
    j["leakage_gain"] = c.leakage_gain;
    j["decoder"] = {
        {"select_threshold", c.decoder.select_threshold},
        {"reject_ceiling", c.decoder.reject_ceiling},
        {"min_frames", c.decoder.min_frames},
        {"window_frames", c.decoder.window_frames},
        {"max_frames", c.decoder.max_frames},
        {"finished_stimulus", c.decoder.finished_stimulus},
        {"finished_required_frames", c.decoder.finished_required_frames},
        {"finished_mode", c.decoder.finished_mode == FinishedMode::Cumulative ? "cumulative" : "consecutive"},
        {"frame_duration_ms", c.decoder.frame_duration_ms},
        {"acquisition_tail_ms", c.decoder.acquisition_tail_ms},
    };
    j["model"] = {
        {"kind", to_string(c.model.kind)},
        {"spatial_filters", c.model.cnn.spatial_filters},
        {"temporal_filters", c.model.cnn.temporal_filters},
        {"temporal_kernel", c.model.cnn.temporal_kernel},
        {"pool", c.model.cnn.pool},
        {"dense_units", c.model.cnn.dense_units},
        {"learning_rate", c.model.learning_rate},
        {"epochs", c.model.epochs},
        {"batch_size", c.model.batch_size},
        {"patience", c.model.patience},
        {"validation_fraction", c.model.validation_fraction},
    };
    j["training_trials"] = c.training_trials;
    j["heldout_trials"] = c.heldout_trials;
    j["dialogue"] = {
        {"budget", c.dialogue.budget},
        {"keyword_temperature", c.dialogue.keyword_temperature},
        {"sentence_temperature", c.dialogue.sentence_temperature},
    };
    j["knowledge_base_path"] = c.knowledge_base_path;
    j["provider"] = c.provider == ProviderMode::Mock ? "mock" : "remote";
    j["remote"] = {{"host", c.remote.host}, {"port", c.remote.port}, {"path", c.remote.path},
                   {"model", c.remote.model}};
    j["seed"] = c.seed;
    return j;
}

EngineConfig config_from_json(const json& j) {
    EngineConfig c;
    try {
        if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
        std::set<std::string> seen;
        take(j, seen, "frame_rate_hz", c.frame_rate_hz);
        take(j, seen, "code_degree", c.code_degree);
        take(j, seen, "num_stimuli", c.num_stimuli);
        take(j, seen, "shift_step", c.shift_step);
        take(j, seen, "amplitude", c.amplitude);
        take(j, seen, "max_repetitions", c.max_repetitions);
        std::string noise(noise_name(c.noise_kind));
        take(j, seen, "noise_kind", noise);
        c.noise_kind = parse_noise(noise);
        take(j, seen, "noise_sigma", c.noise_sigma);
        take(j, seen, "leakage_gain", c.leakage_gain);
        seen.insert("decoder");
        if (j.contains("decoder")) {
            const json& d = j.at("decoder");
            std::set<std::string> s;
            take(d, s, "select_threshold", c.decoder.select_threshold);
            take(d, s, "reject_ceiling", c.decoder.reject_ceiling);
            take(d, s, "min_frames", c.decoder.min_frames);
            take(d, s, "window_frames", c.decoder.window_frames);
            take(d, s, "max_frames", c.decoder.max_frames);
            take(d, s, "finished_stimulus", c.decoder.finished_stimulus);
            take(d, s, "finished_required_frames", c.decoder.finished_required_frames);
            std::string mode = "cumulative";
            take(d, s, "finished_mode", mode);
            if (mode != "cumulative" && mode != "consecutive") {
                throw Error(ErrorCode::ParseError, "finished_mode must be cumulative or consecutive");
            }
            c.decoder.finished_mode = mode == "cumulative" ? FinishedMode::Cumulative : FinishedMode::Consecutive;
            take(d, s, "frame_duration_ms", c.decoder.frame_duration_ms);
            take(d, s, "acquisition_tail_ms", c.decoder.acquisition_tail_ms);
            reject_unknown(d, s, "decoder.");
        }
        seen.insert("model");
        if (j.contains("model")) {
            const json& m = j.at("model");
            std::set<std::string> s;
            std::string kind = to_string(c.model.kind);
            take(m, s, "kind", kind);
            try {
                c.model.kind = parse_model_kind(kind);
            } catch (const Error& e) {
                throw Error(ErrorCode::ParseError, e.what());
            }
            take(m, s, "spatial_filters", c.model.cnn.spatial_filters);
            take(m, s, "temporal_filters", c.model.cnn.temporal_filters);
            take(m, s, "temporal_kernel", c.model.cnn.temporal_kernel);
            take(m, s, "pool", c.model.cnn.pool);
            take(m, s, "dense_units", c.model.cnn.dense_units);
            take(m, s, "learning_rate", c.model.learning_rate);
            take(m, s, "epochs", c.model.epochs);
            take(m, s, "batch_size", c.model.batch_size);
            take(m, s, "patience", c.model.patience);
            take(m, s, "validation_fraction", c.model.validation_fraction);
            reject_unknown(m, s, "model.");
        }
        take(j, seen, "training_trials", c.training_trials);
        take(j, seen, "heldout_trials", c.heldout_trials);
        seen.insert("dialogue");
        if (j.contains("dialogue")) {
            const json& d = j.at("dialogue");
            std::set<std::string> s;
            take(d, s, "budget", c.dialogue.budget);
            take(d, s, "keyword_temperature", c.dialogue.keyword_temperature);
            take(d, s, "sentence_temperature", c.dialogue.sentence_temperature);
            reject_unknown(d, s, "dialogue.");
        }
        take(j, seen, "knowledge_base_path", c.knowledge_base_path);
        std::string provider = "mock";
        take(j, seen, "provider", provider);
        if (provider != "mock" && provider != "remote") throw Error(ErrorCode::ParseError, "provider must be mock or remote");
        c.provider = provider == "mock" ? ProviderMode::Mock : ProviderMode::Remote;
        seen.insert("remote");
        if (j.contains("remote")) {
            const json& r = j.at("remote");
            std::set<std::string> s;
            take(r, s, "host", c.remote.host);
            take(r, s, "port", c.remote.port);
            take(r, s, "path", c.remote.path);
            take(r, s, "model", c.remote.model);
            take(r, s, "api_key", c.remote.api_key);
            reject_unknown(r, s, "remote.");
        }
        take(j, seen, "seed", c.seed);
        reject_unknown(j, seen, "");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

EngineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return config_from_json(json::parse(buf.str()));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, "config " + path + ": " + e.what());
    }
}

void save_config(const std::string& path, const EngineConfig& cfg) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write config " + path);
    out << config_to_json(cfg).dump(2) << "\n";
    if (!out) throw Error(ErrorCode::IoError, "failed writing config " + path);
}

Simulator make_simulator(const EngineConfig& cfg) {
    const std::vector<int> taps = taps_for_degree(cfg.code_degree);
    std::vector<std::uint8_t> seed(static_cast<std::size_t>(cfg.code_degree), 0);
    seed.back() = 1;
    Simulator sim;
    sim.codebook = build_codebook(generate_msequence(cfg.code_degree, taps, seed), cfg.num_stimuli, cfg.shift_step);
    sim.codebook.amplitude = cfg.amplitude;
    sim.timeline = build_timeline(sim.codebook, cfg.frame_rate_hz, cfg.max_repetitions);
    sim.kernel = default_kernel();
    sim.options.leakage_gain = cfg.leakage_gain;
    sim.noise_kind = cfg.noise_kind;
    sim.noise_sigma = cfg.noise_sigma;
    return sim;
}

}  // namespace cbai
