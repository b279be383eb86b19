#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cbai/eegsim.hpp"
#include "cbai/stimulus.hpp"

namespace cbai {

inline constexpr std::size_t kWindowSamples = 250;  // 50 ms frame + 200 ms tail at 1 kHz

// One channels x samples block of raw EEG, row-major.
struct FrameWindow {
    std::size_t channels = kNumChannels;
    std::size_t samples = kWindowSamples;
    std::size_t frame_index = 0;
    std::vector<double> data;

    double at(std::size_t c, std::size_t t) const { return data[c * samples + t]; }
};

// Samples [onset, onset + 250) of every channel; OutOfRange if the tail runs
// past the end of the segment.
FrameWindow extract_window(const EegSegment& segment, const FrameEvent& frame,
                           std::size_t window_samples = kWindowSamples);

enum class ModelKind : std::uint32_t { Cnn = 0, Linear = 1 };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

struct CnnShape {
    int spatial_filters = 8;
    int spatial_kernel = 16;  // spans all input channels
    int temporal_filters = 8;
    int temporal_kernel = 8;
    int pool = 2;
    int dense_units = 128;
};

// Architecture plus optimiser settings; everything needed to reproduce a model.
struct ModelDescriptor {
    ModelKind kind = ModelKind::Cnn;
    int channels = static_cast<int>(kNumChannels);
    int window = static_cast<int>(kWindowSamples);
    CnnShape cnn;
    double learning_rate = 1e-3;
    int epochs = 30;
    int batch_size = 32;
    std::uint64_t seed = 1;
    int patience = 4;
    double validation_fraction = 0.1;
};

enum class LayerKind { Conv, MaxPool, Dense };

struct LayerSpec {
    LayerKind kind;
    int in_channels;
    int in_length;
    int out_channels;
    int out_length;
    int kernel_rows;  // conv: input rows covered; dense: 0
    int kernel_cols;  // conv: taps along time; pool: pool width; dense: 0
    std::size_t parameters;
};

// Layer-by-layer shape introspection; throws InvalidArgument for shapes that
// collapse to zero length.
std::vector<LayerSpec> describe_layers(const ModelDescriptor& desc);
std::size_t parameter_count(const ModelDescriptor& desc);

// Anything that maps a frame window to P(attended stimulus was ON).
class FramePredictor {
public:
    virtual ~FramePredictor() = default;
    virtual double predict(const FrameWindow& window) const = 0;
};

class ClassifierModel : public FramePredictor {
public:
    ClassifierModel() = default;

    static ClassifierModel zeros(const ModelDescriptor& desc);
    // He-uniform weights, zero biases, drawn from desc.seed.
    static ClassifierModel initialized(const ModelDescriptor& desc);

    ModelKind kind() const { return desc_.kind; }
    const ModelDescriptor& descriptor() const { return desc_; }
    std::span<const double> parameters() const { return params_; }
    std::span<double> parameters() { return params_; }

    // Per-channel input standardisation applied before the first layer.
    const std::array<double, kNumChannels>& channel_mean() const { return mean_; }
    const std::array<double, kNumChannels>& channel_scale() const { return scale_; }
    void set_normalization(const std::array<double, kNumChannels>& mean,
                           const std::array<double, kNumChannels>& scale);

    double logit(const FrameWindow& window) const;
    double predict(const FrameWindow& window) const override;

    // Binary cross-entropy of one example; writes d(loss)/d(parameters) into grad.
    double loss_and_gradient(const FrameWindow& window, int label, std::span<double> grad) const;
    double loss(const FrameWindow& window, int label) const;

    friend bool operator==(const ClassifierModel&, const ClassifierModel&);

private:
    void check_shape(const FrameWindow& window) const;
    std::vector<double> normalized(const FrameWindow& window) const;

    ModelDescriptor desc_;
    std::vector<double> params_;
    std::array<double, kNumChannels> mean_{};
    std::array<double, kNumChannels> scale_{1, 1, 1, 1, 1, 1};
};

double predict(const ClassifierModel& model, const FrameWindow& window);

struct TrainingSet {
    std::vector<FrameWindow> windows;
    std::vector<std::uint8_t> labels;
    std::vector<std::size_t> provenance;  // trial id per window

    std::size_t size() const { return windows.size(); }
};

// Appends up to max_frames windows of one trial, labelled with the true
// stimulus's code bits.
void append_trial(TrainingSet& set, const EegSegment& segment, const FrameTimeline& timeline,
                  const StimulusCodebook& codebook, std::size_t true_stimulus, std::size_t trial_id,
                  std::size_t max_frames = SIZE_MAX);

struct TrainingReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int epochs_run = 0;
    std::size_t train_examples = 0;
    std::size_t validation_examples = 0;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
};

// Mini-batch Adam on binary cross-entropy with early stopping on the held-out
// split. Linear models start from zero, CNNs from the seeded initialisation.
ClassifierModel train(const TrainingSet& data, const ModelDescriptor& desc,
                      TrainingReport* report = nullptr);

double frame_accuracy(const FramePredictor& model, const TrainingSet& data);

// Max over >= num_coordinates random parameters of |analytic - numeric| /
// max(|analytic|, |numeric|, 1e-6), numeric by central differences (step 1e-5).
double gradient_check(const ClassifierModel& model, const FrameWindow& window, int label,
                      std::size_t num_coordinates = 100, std::uint64_t seed = 0);

// "BAICLF1\0", u32 version, descriptor, normalisation, u64 count, f64 parameters.
void write_model(std::ostream& out, const ClassifierModel& model);
ClassifierModel read_model(std::istream& in);
void save_model(const std::string& path, const ClassifierModel& model);
ClassifierModel load_model(const std::string& path);
std::string serialize_model(const ClassifierModel& model);

}  // namespace cbai
