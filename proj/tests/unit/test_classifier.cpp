#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cbai/classifier.hpp"
#include "cbai/error.hpp"
#include "cbai/rng.hpp"

using namespace cbai;

namespace {

FrameWindow random_window(std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    FrameWindow w;
    w.data.resize(kNumChannels * kWindowSamples);
    for (double& v : w.data) v = scale * standard_normal(rng);
    return w;
}

// Two fixed templates plus tiny noise: linearly separable by construction.
TrainingSet separable_set(std::size_t n, std::uint64_t seed, FrameWindow& on_template) {
    on_template = random_window(1000);
    const FrameWindow off_template = random_window(2000);
    Rng rng(seed);
    TrainingSet set;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t label = static_cast<std::uint8_t>(i % 2);
        FrameWindow w = label ? on_template : off_template;
        for (double& v : w.data) v += 0.01 * standard_normal(rng);
        w.frame_index = i;
        set.windows.push_back(std::move(w));
        set.labels.push_back(label);
        set.provenance.push_back(0);
    }
    return set;
}

struct Simulated {
    StimulusCodebook book = build_codebook(default_msequence());
    FrameTimeline timeline = build_timeline(book);
    VepKernel kernel = default_kernel();
};

}  // namespace

TEST_CASE("extract_window offsets") {
    Simulated sim;
    EegSegment seg(6, 11100);
    for (std::size_t c = 0; c < 6; ++c) {
        for (std::size_t i = 0; i < seg.samples(); ++i) seg.at(c, i) = static_cast<double>(c * 100000 + i);
    }
    const FrameWindow w0 = extract_window(seg, sim.timeline.frames[0]);
    CHECK(w0.at(0, 0) == 0.0);
    CHECK(w0.at(0, 249) == 249.0);
    const FrameWindow w16 = extract_window(seg, sim.timeline.frames[16]);
    CHECK(w16.frame_index == 16);
    CHECK(w16.at(0, 0) == 800.0);
    CHECK(w16.at(5, 249) == 500000.0 + 1049.0);

    FrameEvent late{999, static_cast<double>(seg.samples()) - 100.0, {}};
    try {
        (void)extract_window(seg, late);
        FAIL("expected OutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfRange);
    }
}

TEST_CASE("architecture: three conv+pool blocks then two dense stages") {
    ModelDescriptor d;
    const auto layers = describe_layers(d);
    REQUIRE(layers.size() == 8);
    const LayerKind expected[] = {LayerKind::Conv, LayerKind::MaxPool, LayerKind::Conv, LayerKind::MaxPool,
                                  LayerKind::Conv, LayerKind::MaxPool, LayerKind::Dense, LayerKind::Dense};
    for (std::size_t i = 0; i < 8; ++i) CHECK(layers[i].kind == expected[i]);
    // Block 1 spans all 6 electrodes with 16 taps; blocks 2-3 use 8 taps.
    CHECK(layers[0].kernel_rows == 6);
    CHECK(layers[0].kernel_cols == 16);
    CHECK(layers[0].out_length == 235);
    CHECK(layers[2].kernel_cols == 8);
    CHECK(layers[4].kernel_cols == 8);
    CHECK(layers[5].out_length == 24);
    CHECK(layers[6].out_length == 128);
    CHECK(layers[7].out_length == 1);
    CHECK(parameter_count(d) == 776 + 520 + 520 + (192 * 128 + 128) + 129);
    CHECK(parameter_count(d) == ClassifierModel::initialized(d).parameters().size());

    ModelDescriptor lin;
    lin.kind = ModelKind::Linear;
    CHECK(parameter_count(lin) == 1501);

    ModelDescriptor tiny;
    tiny.window = 20;
    CHECK_THROWS_AS(describe_layers(tiny), Error);
}

TEST_CASE("predict output contract") {
    ModelDescriptor lin;
    lin.kind = ModelKind::Linear;
    const ClassifierModel zero = ClassifierModel::zeros(lin);
    CHECK(zero.predict(random_window(5)) == 0.5);

    const ClassifierModel cnn = ClassifierModel::initialized(ModelDescriptor{});
    for (std::uint64_t s = 0; s < 10; ++s) {
        const double p = predict(cnn, random_window(s, 50.0));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    FrameWindow wrong;
    wrong.samples = 100;
    wrong.data.resize(600);
    CHECK_THROWS_AS(cnn.predict(wrong), Error);
}

TEST_CASE("gradient check against central differences") {
    const ClassifierModel cnn = ClassifierModel::initialized(ModelDescriptor{});
    for (int label : {0, 1}) {
        const double err = gradient_check(cnn, random_window(77), label, 200, 3);
        CHECK(err < 1e-3);
    }

    ModelDescriptor lin;
    lin.kind = ModelKind::Linear;
    ClassifierModel linear = ClassifierModel::zeros(lin);
    Rng rng(11);
    for (double& p : linear.parameters()) p = 0.02 * standard_normal(rng);
    for (int label : {0, 1}) CHECK(gradient_check(linear, random_window(78), label, 200, 4) < 1e-6);
}

TEST_CASE("zero window, zero parameters: bias gradients are mirror images") {
    ModelDescriptor lin;
    lin.kind = ModelKind::Linear;
    const ClassifierModel zero = ClassifierModel::zeros(lin);
    FrameWindow w;
    w.data.assign(kNumChannels * kWindowSamples, 0.0);
    std::vector<double> g0(zero.parameters().size());
    std::vector<double> g1(zero.parameters().size());
    zero.loss_and_gradient(w, 0, g0);
    zero.loss_and_gradient(w, 1, g1);
    CHECK(g0.back() == 0.5);
    CHECK(g1.back() == -0.5);
}

TEST_CASE("linear model separates two templates perfectly") {
    FrameWindow on;
    TrainingSet set = separable_set(200, 5, on);
    ModelDescriptor d;
    d.kind = ModelKind::Linear;
    d.learning_rate = 1e-2;
    d.epochs = 20;
    TrainingReport report;
    const ClassifierModel m = train(set, d, &report);
    CHECK(report.final_loss < report.initial_loss);
    FrameWindow on_test = separable_set(10, 99, on).windows[1];
    CHECK(frame_accuracy(m, separable_set(100, 77, on)) == 1.0);
    CHECK(m.predict(on) >= 0.99);
    CHECK(m.predict(on_test) >= 0.99);
}

TEST_CASE("training rejects a single class and is deterministic") {
    FrameWindow on;
    TrainingSet set = separable_set(64, 8, on);
    TrainingSet mono = set;
    std::fill(mono.labels.begin(), mono.labels.end(), 1);
    try {
        (void)train(mono, ModelDescriptor{});
        FAIL("expected DegenerateLabels");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateLabels);
    }

    ModelDescriptor d;
    d.epochs = 2;
    d.seed = 1234;
    TrainingReport r1;
    const ClassifierModel a = train(set, d, &r1);
    const ClassifierModel b = train(set, d);
    CHECK(a == b);
    CHECK(serialize_model(a) == serialize_model(b));
    CHECK(r1.final_loss < r1.initial_loss);
    d.seed = 1235;
    CHECK_FALSE(train(set, d) == a);
}

TEST_CASE("model container round trip") {
    ModelDescriptor d;
    d.seed = 99;
    ClassifierModel m = ClassifierModel::initialized(d);
    m.set_normalization({1, 2, 3, 4, 5, 6}, {0.5, 1, 1.5, 2, 2.5, 3});
    const std::string bytes = serialize_model(m);
    CHECK(bytes.substr(0, 7) == "BAICLF1");
    std::istringstream in(bytes);
    const ClassifierModel back = read_model(in);
    CHECK(back == m);
    CHECK(back.descriptor().seed == 99);
    const FrameWindow w = random_window(3);
    CHECK(back.predict(w) == m.predict(w));

    std::string corrupt = bytes;
    corrupt[0] = 'X';
    std::istringstream bad(corrupt);
    CHECK_THROWS_AS(read_model(bad), Error);
}
