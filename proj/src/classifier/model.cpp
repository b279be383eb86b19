#include <algorithm>
#include <cmath>

#include "cbai/classifier.hpp"
#include "cbai/error.hpp"
#include "cbai/rng.hpp"
#include "network.hpp"

namespace cbai {

std::string to_string(ModelKind kind) { return kind == ModelKind::Cnn ? "cnn" : "linear"; }

ModelKind parse_model_kind(const std::string& text) {
    if (text == "cnn") return ModelKind::Cnn;
    if (text == "linear") return ModelKind::Linear;
    throw Error(ErrorCode::InvalidArgument, "unknown model kind '" + text + "'");
}

FrameWindow extract_window(const EegSegment& segment, const FrameEvent& frame,
                           std::size_t window_samples) {
    const double onset_samples = frame.onset_ms * segment.sample_rate_hz() / 1000.0;
    const auto onset = static_cast<std::size_t>(std::llround(onset_samples));
    if (onset_samples < 0.0 || onset + window_samples > segment.samples()) {
        throw Error(ErrorCode::OutOfRange, "window for frame " + std::to_string(frame.frame_index) +
                                               " extends past the segment");
    }
    FrameWindow w;
    w.channels = segment.channels();
    w.samples = window_samples;
    w.frame_index = frame.frame_index;
    w.data.resize(w.channels * w.samples);
    for (std::size_t c = 0; c < w.channels; ++c) {
        auto src = segment.channel(c).subspan(onset, window_samples);
        std::copy(src.begin(), src.end(), w.data.begin() + static_cast<std::ptrdiff_t>(c * w.samples));
    }
    return w;
}

std::vector<LayerSpec> describe_layers(const ModelDescriptor& desc) {
    if (desc.kind == ModelKind::Linear) {
        const int in = desc.channels * desc.window;
        return {LayerSpec{LayerKind::Dense, 1, in, 1, 1, 0, 0, static_cast<std::size_t>(in) + 1}};
    }
    const detail::CnnDims d = detail::cnn_dims(desc);
    auto conv = [](int cin, int lin, int cout, int rows, int k) {
        return LayerSpec{LayerKind::Conv, cin,  lin, cout, lin - k + 1, rows, k,
                         static_cast<std::size_t>(cout) * (static_cast<std::size_t>(rows) * k + 1)};
    };
    auto pool = [&d](int c, int lin) {
        return LayerSpec{LayerKind::MaxPool, c, lin, c, lin / d.pool, 0, d.pool, 0};
    };
    // Block 1 treats the electrode montage as a single input plane: each
    // filter spans every channel, so in_channels is 1 with `channels` rows.
    return {
        conv(1, d.length, d.f1, d.channels, d.k1),
        pool(d.f1, d.l1),
        conv(d.f1, d.p1, d.f2, d.f1, d.k2),
        pool(d.f2, d.l2),
        conv(d.f2, d.p2, d.f3, d.f2, d.k3),
        pool(d.f3, d.l3),
        LayerSpec{LayerKind::Dense, 1, d.flat, 1, d.hidden, 0, 0,
                  static_cast<std::size_t>(d.hidden) * d.flat + d.hidden},
        LayerSpec{LayerKind::Dense, 1, d.hidden, 1, 1, 0, 0, static_cast<std::size_t>(d.hidden) + 1},
    };
}

std::size_t parameter_count(const ModelDescriptor& desc) {
    std::size_t n = 0;
    for (const LayerSpec& l : describe_layers(desc)) n += l.parameters;
    return n;
}

ClassifierModel ClassifierModel::zeros(const ModelDescriptor& desc) {
    ClassifierModel m;
    m.desc_ = desc;
    m.params_.assign(parameter_count(desc), 0.0);
    return m;
}

ClassifierModel ClassifierModel::initialized(const ModelDescriptor& desc) {
    ClassifierModel m = zeros(desc);
    if (desc.kind == ModelKind::Linear) return m;

    Rng rng(derive_seed(desc.seed, "classifier/init"));
    const detail::CnnDims d = detail::cnn_dims(desc);
    auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i) m.params_[offset + i] = limit * (2.0 * uniform01(rng) - 1.0);
    };
    fill(d.w1, d.b1 - d.w1, static_cast<std::size_t>(d.channels) * d.k1);
    fill(d.w2, d.b2 - d.w2, static_cast<std::size_t>(d.f1) * d.k2);
    fill(d.w3, d.b3 - d.w3, static_cast<std::size_t>(d.f2) * d.k3);
    fill(d.wd, d.bd - d.wd, static_cast<std::size_t>(d.flat));
    // Output layer uses the Glorot range for a single logistic unit.
    const double limit = std::sqrt(6.0 / static_cast<double>(d.hidden + 1));
    for (std::size_t i = 0; i < static_cast<std::size_t>(d.hidden); ++i) {
        m.params_[d.wo + i] = limit * (2.0 * uniform01(rng) - 1.0);
    }
    return m;
}

void ClassifierModel::set_normalization(const std::array<double, kNumChannels>& mean,
                                        const std::array<double, kNumChannels>& scale) {
    for (double s : scale) {
        if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "normalisation scale must be positive");
    }
    mean_ = mean;
    scale_ = scale;
}

void ClassifierModel::check_shape(const FrameWindow& window) const {
    if (window.channels != static_cast<std::size_t>(desc_.channels) ||
        window.samples != static_cast<std::size_t>(desc_.window) ||
        window.data.size() != window.channels * window.samples) {
        throw Error(ErrorCode::ShapeMismatch, "window shape does not match model input");
    }
    if (params_.size() != parameter_count(desc_)) {
        throw Error(ErrorCode::ShapeMismatch, "parameter vector does not match descriptor");
    }
}

std::vector<double> ClassifierModel::normalized(const FrameWindow& window) const {
    std::vector<double> x(window.data.size());
    for (std::size_t c = 0; c < window.channels; ++c) {
        const double mu = c < kNumChannels ? mean_[c] : 0.0;
        const double inv = 1.0 / (c < kNumChannels ? scale_[c] : 1.0);
        for (std::size_t t = 0; t < window.samples; ++t) {
            const std::size_t i = c * window.samples + t;
            x[i] = (window.data[i] - mu) * inv;
        }
    }
    return x;
}

double ClassifierModel::logit(const FrameWindow& window) const {
    check_shape(window);
    const std::vector<double> x = normalized(window);
    if (desc_.kind == ModelKind::Linear) return detail::linear_forward(x.size(), params_.data(), x.data());
    const detail::CnnDims d = detail::cnn_dims(desc_);
    detail::CnnWorkspace ws(d);
    return detail::cnn_forward(d, params_.data(), x.data(), ws);
}

double ClassifierModel::predict(const FrameWindow& window) const { return detail::sigmoid(logit(window)); }

double ClassifierModel::loss(const FrameWindow& window, int label) const {
    return detail::bce_with_logit(logit(window), label);
}

double ClassifierModel::loss_and_gradient(const FrameWindow& window, int label,
                                          std::span<double> grad) const {
    check_shape(window);
    if (grad.size() != params_.size()) throw Error(ErrorCode::ShapeMismatch, "gradient buffer size");
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::vector<double> x = normalized(window);
    if (desc_.kind == ModelKind::Linear) {
        const double z = detail::linear_forward(x.size(), params_.data(), x.data());
        detail::linear_backward(x.size(), x.data(), detail::sigmoid(z) - label, grad.data());
        return detail::bce_with_logit(z, label);
    }
    const detail::CnnDims d = detail::cnn_dims(desc_);
    detail::CnnWorkspace ws(d);
    const double z = detail::cnn_forward(d, params_.data(), x.data(), ws);
    detail::cnn_backward(d, params_.data(), x.data(), ws, detail::sigmoid(z) - label, grad.data());
    return detail::bce_with_logit(z, label);
}

bool operator==(const ClassifierModel& a, const ClassifierModel& b) {
    return a.desc_.kind == b.desc_.kind && a.params_ == b.params_ && a.mean_ == b.mean_ &&
           a.scale_ == b.scale_;
}

double predict(const ClassifierModel& model, const FrameWindow& window) { return model.predict(window); }

double gradient_check(const ClassifierModel& model, const FrameWindow& window, int label,
                      std::size_t num_coordinates, std::uint64_t seed) {
    constexpr double kStep = 1e-5;
    constexpr double kFloor = 1e-6;
    const std::size_t n = model.parameters().size();
    std::vector<double> grad(n);
    model.loss_and_gradient(window, label, grad);

    std::vector<std::size_t> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    Rng rng(derive_seed(seed, "classifier/gradient-check"));
    shuffle_in_place(coords, rng);
    coords.resize(std::min(n, num_coordinates));

    ClassifierModel probe = model;
    double worst = 0.0;
    for (std::size_t i : coords) {
        const double saved = probe.parameters()[i];
        probe.parameters()[i] = saved + kStep;
        const double up = probe.loss(window, label);
        probe.parameters()[i] = saved - kStep;
        const double down = probe.loss(window, label);
        probe.parameters()[i] = saved;
        const double numeric = (up - down) / (2.0 * kStep);
        const double denom = std::max({std::abs(grad[i]), std::abs(numeric), kFloor});
        worst = std::max(worst, std::abs(grad[i] - numeric) / denom);
    }
    return worst;
}

}  // namespace cbai
