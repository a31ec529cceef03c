#include "qcutlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "qcutlab/rng.hpp"

namespace qcutlab {

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_u32(const std::vector<unsigned char>& bytes, std::size_t offset) {
    if (offset + 4 > bytes.size()) throw std::runtime_error("IDX file truncated");
    return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
           (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

} // namespace

IdxImages read_idx_images(const std::string& path) {
    const auto bytes = read_file(path);
    const std::uint32_t magic = read_u32(bytes, 0);
    if (magic != 0x00000803u)
        throw std::runtime_error("'" + path + "': bad IDX image magic (expected 0x00000803)");
    IdxImages out;
    out.count = static_cast<int>(read_u32(bytes, 4));
    out.rows = static_cast<int>(read_u32(bytes, 8));
    out.cols = static_cast<int>(read_u32(bytes, 12));
    const std::size_t expected = 16 + std::size_t(out.count) * out.rows * out.cols;
    if (bytes.size() < expected) throw std::runtime_error("'" + path + "': IDX image payload truncated");
    out.pixels.reserve(std::size_t(out.count) * out.rows * out.cols);
    for (std::size_t i = 16; i < expected; ++i) out.pixels.push_back(double(bytes[i]) / 255.0);
    return out;
}

std::vector<int> read_idx_labels(const std::string& path) {
    const auto bytes = read_file(path);
    const std::uint32_t magic = read_u32(bytes, 0);
    if (magic != 0x00000801u)
        throw std::runtime_error("'" + path + "': bad IDX label magic (expected 0x00000801)");
    const std::uint32_t count = read_u32(bytes, 4);
    if (bytes.size() < 8 + count) throw std::runtime_error("'" + path + "': IDX label payload truncated");
    std::vector<int> labels;
    labels.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) labels.push_back(bytes[8 + i]);
    return labels;
}

std::vector<Sample> ingest_idx(const std::string& images_path, const std::string& labels_path) {
    const IdxImages images = read_idx_images(images_path);
    const std::vector<int> labels = read_idx_labels(labels_path);
    if (static_cast<std::size_t>(images.count) != labels.size())
        throw std::runtime_error("IDX image/label count mismatch: " + std::to_string(images.count) + " vs " +
                                 std::to_string(labels.size()));
    std::vector<Sample> out;
    out.reserve(labels.size());
    const std::size_t stride = std::size_t(images.rows) * images.cols;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        Sample s;
        s.features.assign(images.pixels.begin() + i * stride, images.pixels.begin() + (i + 1) * stride);
        s.label = labels[i];
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<double> downsample(const std::vector<double>& img, int src, int target) {
    if (target > src) throw std::invalid_argument("downsample: target must not exceed source size");
    if (img.size() != std::size_t(src) * src) throw std::invalid_argument("downsample: image size mismatch");
    if (target == src) return img;
    std::vector<double> out(std::size_t(target) * target, 0.0);
    const double scale = double(src) / double(target);
    for (int r = 0; r < target; ++r) {
        for (int c = 0; c < target; ++c) {
            // pixel-center alignment
            const double y = (r + 0.5) * scale - 0.5;
            const double x = (c + 0.5) * scale - 0.5;
            const int y0 = std::clamp(int(std::floor(y)), 0, src - 1);
            const int x0 = std::clamp(int(std::floor(x)), 0, src - 1);
            const int y1 = std::min(y0 + 1, src - 1);
            const int x1 = std::min(x0 + 1, src - 1);
            const double fy = std::clamp(y - y0, 0.0, 1.0);
            const double fx = std::clamp(x - x0, 0.0, 1.0);
            const double top = img[std::size_t(y0) * src + x0] * (1 - fx) + img[std::size_t(y0) * src + x1] * fx;
            const double bot = img[std::size_t(y1) * src + x0] * (1 - fx) + img[std::size_t(y1) * src + x1] * fx;
            out[std::size_t(r) * target + c] = top * (1 - fy) + bot * fy;
        }
    }
    return out;
}

std::vector<Sample> filter_classes(const std::vector<Sample>& samples, const std::vector<int>& classes) {
    std::vector<Sample> out;
    for (const Sample& s : samples) {
        const auto it = std::find(classes.begin(), classes.end(), s.label);
        if (it == classes.end()) continue;
        Sample relabeled = s;
        relabeled.label = static_cast<int>(it - classes.begin());
        out.push_back(std::move(relabeled));
    }
    return out;
}

LabeledDataset synth_dataset(int feature_dim, int train_count, int test_count, std::uint64_t seed) {
    if (feature_dim < 2) throw std::invalid_argument("synth_dataset: feature_dim must be >= 2");
    auto engine = make_engine(seed);
    std::normal_distribution<double> noise(0.0, 0.15);
    std::uniform_int_distribution<int> coin(0, 1);
    auto draw = [&]() {
        Sample s;
        s.label = coin(engine);
        s.features.assign(feature_dim, 0.0);
        const int half = feature_dim / 2;
        const int begin = s.label == 0 ? 0 : half;
        const int end = s.label == 0 ? half : feature_dim;
        for (int i = 0; i < feature_dim; ++i) s.features[i] = noise(engine);
        for (int i = begin; i < end; ++i) s.features[i] += 1.0;
        return s;
    };
    LabeledDataset data;
    for (int i = 0; i < train_count; ++i) data.train.push_back(draw());
    for (int i = 0; i < test_count; ++i) data.test.push_back(draw());
    return data;
}

std::uint64_t fnv1a(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t dataset_checksum(const LabeledDataset& data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&](const std::vector<Sample>& split) {
        for (const Sample& s : split) {
            hash ^= fnv1a(s.features.data(), s.features.size() * sizeof(double));
            hash *= 0x100000001b3ULL;
            hash ^= static_cast<std::uint64_t>(s.label);
            hash *= 0x100000001b3ULL;
        }
    };
    mix(data.train);
    mix(data.test);
    return hash;
}

} // namespace qcutlab
