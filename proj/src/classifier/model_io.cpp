#include <fstream>
#include <sstream>

#include "cbai/binary_io.hpp"
#include "cbai/classifier.hpp"
#include "cbai/error.hpp"

namespace cbai {

namespace {
constexpr std::uint32_t kModelFormatVersion = 1;
}

void write_model(std::ostream& out, const ClassifierModel& model) {
    const ModelDescriptor& d = model.descriptor();
    binio::put_magic(out, "BAICLF1");
    binio::put_uint<std::uint32_t>(out, kModelFormatVersion);
    binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(d.kind));
    for (int v : {d.channels, d.window, d.cnn.spatial_filters, d.cnn.spatial_kernel, d.cnn.temporal_filters,
                  d.cnn.temporal_kernel, d.cnn.pool, d.cnn.dense_units, d.epochs, d.batch_size, d.patience}) {
        binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(v));
    }
    binio::put_f64(out, d.learning_rate);
    binio::put_f64(out, d.validation_fraction);
    binio::put_uint<std::uint64_t>(out, d.seed);
    binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(kNumChannels));
    for (double v : model.channel_mean()) binio::put_f64(out, v);
    for (double v : model.channel_scale()) binio::put_f64(out, v);
    binio::put_uint<std::uint64_t>(out, model.parameters().size());
    for (double v : model.parameters()) binio::put_f64(out, v);
    if (!out) throw Error(ErrorCode::IoError, "failed writing model");
}

ClassifierModel read_model(std::istream& in) {
    binio::expect_magic(in, "BAICLF1");
    const auto version = binio::get_uint<std::uint32_t>(in);
    if (version != kModelFormatVersion) {
        throw Error(ErrorCode::ParseError, "unsupported model version " + std::to_string(version));
    }
    ModelDescriptor d;
    const auto kind = binio::get_uint<std::uint32_t>(in);
    if (kind > 1) throw Error(ErrorCode::ParseError, "unknown model kind");
    d.kind = static_cast<ModelKind>(kind);
    auto next = [&in] { return static_cast<int>(binio::get_uint<std::uint32_t>(in)); };
    d.channels = next();
    d.window = next();
    d.cnn.spatial_filters = next();
    d.cnn.spatial_kernel = next();
    d.cnn.temporal_filters = next();
    d.cnn.temporal_kernel = next();
    d.cnn.pool = next();
    d.cnn.dense_units = next();
    d.epochs = next();
    d.batch_size = next();
    d.patience = next();
    d.learning_rate = binio::get_f64(in);
    d.validation_fraction = binio::get_f64(in);
    d.seed = binio::get_uint<std::uint64_t>(in);
    if (binio::get_uint<std::uint32_t>(in) != kNumChannels) {
        throw Error(ErrorCode::ParseError, "normalisation block has wrong channel count");
    }
    std::array<double, kNumChannels> mean{};
    std::array<double, kNumChannels> scale{};
    for (double& v : mean) v = binio::get_f64(in);
    for (double& v : scale) v = binio::get_f64(in);

    ClassifierModel model = ClassifierModel::zeros(d);
    const auto count = binio::get_uint<std::uint64_t>(in);
    if (count != model.parameters().size()) {
        throw Error(ErrorCode::ParseError, "parameter count does not match descriptor");
    }
    for (double& v : model.parameters()) v = binio::get_f64(in);
    model.set_normalization(mean, scale);
    return model;
}

void save_model(const std::string& path, const ClassifierModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
    write_model(out, model);
}

ClassifierModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return read_model(in);
}

std::string serialize_model(const ClassifierModel& model) {
    std::ostringstream out(std::ios::binary);
    write_model(out, model);
    return out.str();
}

}  // namespace cbai
