#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cbai/classifier.hpp"
#include "cbai/error.hpp"
#include "cbai/rng.hpp"
#include "network.hpp"

namespace cbai {

void append_trial(TrainingSet& set, const EegSegment& segment, const FrameTimeline& timeline,
                  const StimulusCodebook& codebook, std::size_t true_stimulus, std::size_t trial_id,
                  std::size_t max_frames) {
    if (true_stimulus >= codebook.num_stimuli()) {
        throw Error(ErrorCode::BadStimulusId, "true stimulus out of range");
    }
    const std::size_t count = std::min(max_frames, timeline.frames.size());
    for (std::size_t i = 0; i < count; ++i) {
        const FrameEvent& frame = timeline.frames[i];
        set.windows.push_back(extract_window(segment, frame));
        set.labels.push_back(codebook.bit(true_stimulus, frame.frame_index));
        set.provenance.push_back(trial_id);
    }
}

double frame_accuracy(const FramePredictor& model, const TrainingSet& data) {
    if (data.size() == 0) throw Error(ErrorCode::EmptyInput, "no frames to score");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int bit = model.predict(data.windows[i]) >= 0.5 ? 1 : 0;
        if (bit == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

// Pre-normalised copy of the training inputs plus a forward/backward closure
// that avoids per-example allocation.
class Trainer {
public:
    Trainer(const TrainingSet& data, const ModelDescriptor& desc)
        : desc_(desc), inputs_(static_cast<std::size_t>(desc.channels) * desc.window) {
        if (desc.kind == ModelKind::Cnn) {
            dims_ = detail::cnn_dims(desc);
            ws_.emplace_back(dims_);
        }
        compute_normalization(data);
        x_.resize(data.size() * inputs_);
        for (std::size_t n = 0; n < data.size(); ++n) {
            const FrameWindow& w = data.windows[n];
            for (std::size_t c = 0; c < w.channels; ++c) {
                for (std::size_t t = 0; t < w.samples; ++t) {
                    const std::size_t i = c * w.samples + t;
                    x_[n * inputs_ + i] = (w.data[i] - mean_[c]) / scale_[c];
                }
            }
        }
    }

    const std::array<double, kNumChannels>& mean() const { return mean_; }
    const std::array<double, kNumChannels>& scale() const { return scale_; }

    double logit(const std::vector<double>& params, std::size_t n) {
        const double* x = x_.data() + n * inputs_;
        if (desc_.kind == ModelKind::Linear) return detail::linear_forward(inputs_, params.data(), x);
        return detail::cnn_forward(dims_, params.data(), x, ws_.front());
    }

    double accumulate(const std::vector<double>& params, std::size_t n, int label, std::vector<double>& grad) {
        const double* x = x_.data() + n * inputs_;
        const double z = logit(params, n);
        const double dz = detail::sigmoid(z) - label;
        if (desc_.kind == ModelKind::Linear) {
            detail::linear_backward(inputs_, x, dz, grad.data());
        } else {
            detail::cnn_backward(dims_, params.data(), x, ws_.front(), dz, grad.data());
        }
        return detail::bce_with_logit(z, label);
    }

    double mean_loss(const std::vector<double>& params, const std::vector<std::size_t>& idx,
                     const std::vector<std::uint8_t>& labels, double* accuracy = nullptr) {
        double total = 0.0;
        std::size_t correct = 0;
        for (std::size_t n : idx) {
            const double z = logit(params, n);
            total += detail::bce_with_logit(z, labels[n]);
            if ((z >= 0.0 ? 1 : 0) == labels[n]) ++correct;
        }
        if (accuracy) *accuracy = idx.empty() ? 0.0 : static_cast<double>(correct) / idx.size();
        return idx.empty() ? 0.0 : total / static_cast<double>(idx.size());
    }

private:
    void compute_normalization(const TrainingSet& data) {
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            double sum = 0.0;
            double sq = 0.0;
            std::size_t count = 0;
            for (const FrameWindow& w : data.windows) {
                for (std::size_t t = 0; t < w.samples; ++t) {
                    const double v = w.data[c * w.samples + t];
                    sum += v;
                    sq += v * v;
                }
                count += w.samples;
            }
            const double mu = sum / static_cast<double>(count);
            const double var = std::max(0.0, sq / static_cast<double>(count) - mu * mu);
            mean_[c] = mu;
            scale_[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
        }
    }

    ModelDescriptor desc_;
    std::size_t inputs_;
    detail::CnnDims dims_{};
    std::vector<detail::CnnWorkspace> ws_;
    std::vector<double> x_;
    std::array<double, kNumChannels> mean_{};
    std::array<double, kNumChannels> scale_{};
};

struct Adam {
    double lr;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<double> m, v;
    long step = 0;

    Adam(std::size_t n, double learning_rate) : lr(learning_rate), m(n, 0.0), v(n, 0.0) {}

    void update(std::vector<double>& params, const std::vector<double>& grad) {
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

}  // namespace

// Validation loss must improve by at least this much to reset patience.
constexpr double kMinDelta = 1e-4;

ClassifierModel train(const TrainingSet& data, const ModelDescriptor& desc, TrainingReport* report) {
    if (data.size() == 0) throw Error(ErrorCode::EmptyInput, "empty training set");
    if (data.labels.size() != data.size()) throw Error(ErrorCode::ShapeMismatch, "labels/windows length");
    const auto ones = static_cast<std::size_t>(std::count(data.labels.begin(), data.labels.end(), 1));
    if (ones == 0 || ones == data.size()) {
        throw Error(ErrorCode::DegenerateLabels, "training labels contain a single class");
    }
    if (desc.batch_size < 1 || desc.epochs < 1 || !(desc.learning_rate > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "bad optimiser settings");
    }
    for (const FrameWindow& w : data.windows) {
        if (w.channels != static_cast<std::size_t>(desc.channels) ||
            w.samples != static_cast<std::size_t>(desc.window)) {
            throw Error(ErrorCode::ShapeMismatch, "training window shape does not match descriptor");
        }
    }

    ClassifierModel model = ClassifierModel::initialized(desc);
    Trainer trainer(data, desc);
    model.set_normalization(trainer.mean(), trainer.scale());

    Rng rng(derive_seed(desc.seed, "classifier/train"));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_in_place(order, rng);
    auto n_val = static_cast<std::size_t>(std::floor(desc.validation_fraction * static_cast<double>(data.size())));
    if (n_val >= data.size()) n_val = 0;
    std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> fit(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

    std::vector<double> params(model.parameters().begin(), model.parameters().end());
    const double initial_loss = trainer.mean_loss(params, fit, data.labels);

    Adam adam(params.size(), desc.learning_rate);
    std::vector<double> grad(params.size());
    std::vector<double> best = params;
    double best_score = std::numeric_limits<double>::infinity();
    int stale = 0;
    int epochs_run = 0;
    const auto batch = static_cast<std::size_t>(desc.batch_size);

    for (int epoch = 0; epoch < desc.epochs; ++epoch) {
        shuffle_in_place(fit, rng);
        for (std::size_t start = 0; start < fit.size(); start += batch) {
            const std::size_t end = std::min(fit.size(), start + batch);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t k = start; k < end; ++k) trainer.accumulate(params, fit[k], data.labels[fit[k]], grad);
            const double inv = 1.0 / static_cast<double>(end - start);
            for (double& g : grad) g *= inv;
            adam.update(params, grad);
        }
        ++epochs_run;
        const double score = val.empty() ? trainer.mean_loss(params, fit, data.labels)
                                         : trainer.mean_loss(params, val, data.labels);
        if (epoch == 0 || score < best_score - kMinDelta) {
            best_score = score;
            best = params;
            stale = 0;
        } else if (++stale >= desc.patience) {
            break;
        }
    }

    std::copy(best.begin(), best.end(), model.parameters().begin());
    if (report) {
        report->initial_loss = initial_loss;
        report->final_loss = trainer.mean_loss(best, fit, data.labels, &report->train_accuracy);
        report->epochs_run = epochs_run;
        report->train_examples = fit.size();
        report->validation_examples = val.size();
        report->validation_accuracy = 0.0;
        if (!val.empty()) trainer.mean_loss(best, val, data.labels, &report->validation_accuracy);
    }
    return model;
}

}  // namespace cbai
