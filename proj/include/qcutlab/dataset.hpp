#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcutlab/classifier.hpp"

namespace qcutlab {

struct IdxImages {
    int count = 0;
    int rows = 0;
    int cols = 0;
    std::vector<double> pixels; // count * rows * cols, row-major, scaled to [0,1]
};

// IDX readers: big-endian magic 0x00000803 for images (u32 count, rows,
// cols, then u8 pixels) and 0x00000801 for labels. Pixels map to [0,1].
IdxImages read_idx_images(const std::string& path);
std::vector<int> read_idx_labels(const std::string& path);

// One split from an (images, labels) file pair; counts must agree.
std::vector<Sample> ingest_idx(const std::string& images_path, const std::string& labels_path);

// Bilinear resample with pixel-center alignment; a constant image maps to
// the same constant and outputs stay within the input min/max.
std::vector<double> downsample(const std::vector<double>& img, int src, int target);

// Keeps only the listed classes and relabels them 0..K-1 in list order.
std::vector<Sample> filter_classes(const std::vector<Sample>& samples, const std::vector<int>& classes);

// Two linearly separable clusters in feature_dim dimensions (half the
// coordinates active per class plus noise); deterministic per seed.
LabeledDataset synth_dataset(int feature_dim, int train_count, int test_count, std::uint64_t seed);

// FNV-1a over raw bytes; used for the run manifest.
std::uint64_t fnv1a(const void* data, std::size_t size);
std::uint64_t dataset_checksum(const LabeledDataset& data);

} // namespace qcutlab
