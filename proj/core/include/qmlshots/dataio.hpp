#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmlshots::data {

constexpr int kImageSide = 28;
constexpr int kImagePixels = kImageSide * kImageSide;  // flattened length 784
constexpr int kNumClasses = 10;

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flattened images with pixel intensities scaled to [0,1] and labels 0..9.
struct LabeledImageSet {
    std::vector<std::vector<float>> images;
    std::vector<int> labels;
    std::string name;

    std::size_t size() const { return images.size(); }
};

struct SplitSpec {
    int per_class_train = 100;
    int per_class_test = 25;
    std::uint64_t seed = 0;
};

// Reads an IDX image/label pair (big-endian, magic 0x00000803 / 0x00000801,
// 28x28 images). Bytes are scaled by 1/255. Magic mismatch, truncation, and
// image/label count mismatch each raise a distinct DataError.
LabeledImageSet load_idx(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path);

// Writes a set back out as an IDX pair (test fixtures, synthetic data).
void write_idx(const LabeledImageSet& set, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path);

// Seeded uniform draw without replacement of `per_class` items per class.
// Deterministic per (seed, tag).
LabeledImageSet stratified_sample(const LabeledImageSet& set, int per_class,
                                  std::uint64_t seed, const std::string& tag);

// Short-version split: train subset drawn from the train set, test subset
// from the test set, using the per-class counts in `spec`.
std::pair<LabeledImageSet, LabeledImageSet> stratified_subset(
    const LabeledImageSet& train_set, const LabeledImageSet& test_set,
    const SplitSpec& spec);

// Deterministic synthetic image set: one smooth template per class plus
// small seeded pixel noise. Stands in for MNIST-family data where the real
// files are not on disk (smoke presets, CI).
LabeledImageSet synthetic_image_set(int per_class, int num_classes,
                                    std::uint64_t seed);

}  // namespace qmlshots::data
