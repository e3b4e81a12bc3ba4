#include "qmlshots/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qmlshots/rng.hpp"

namespace qmlshots::data {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803u;
constexpr std::uint32_t kLabelsMagic = 0x00000801u;

std::uint32_t read_be32(std::ifstream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw DataError("truncated IDX file while reading " + what);
    }
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
           (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    const unsigned char b[4] = {
        static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

LabeledImageSet load_idx(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) {
        throw DataError("cannot open images file: " + images_path.string());
    }
    const std::uint32_t img_magic = read_be32(img, "images magic");
    if (img_magic != kImagesMagic) {
        throw DataError("images magic mismatch in " + images_path.string() +
                        " (expected 0x00000803)");
    }
    const std::uint32_t count = read_be32(img, "image count");
    const std::uint32_t rows = read_be32(img, "image rows");
    const std::uint32_t cols = read_be32(img, "image cols");
    if (rows != kImageSide || cols != kImageSide) {
        throw DataError("unexpected image dimensions (want 28x28)");
    }

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) {
        throw DataError("cannot open labels file: " + labels_path.string());
    }
    const std::uint32_t lab_magic = read_be32(lab, "labels magic");
    if (lab_magic != kLabelsMagic) {
        throw DataError("labels magic mismatch in " + labels_path.string() +
                        " (expected 0x00000801)");
    }
    const std::uint32_t lab_count = read_be32(lab, "label count");
    if (lab_count != count) {
        throw DataError("image/label count mismatch: " + std::to_string(count) +
                        " images vs " + std::to_string(lab_count) + " labels");
    }

    LabeledImageSet set;
    set.name = images_path.stem().string();
    set.images.reserve(count);
    set.labels.reserve(count);
    std::vector<unsigned char> buf(kImagePixels);
    for (std::uint32_t i = 0; i < count; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), kImagePixels)) {
            throw DataError("truncated IDX file while reading image " +
                            std::to_string(i));
        }
        std::vector<float> pixels(kImagePixels);
        for (int p = 0; p < kImagePixels; ++p) {
            pixels[p] = static_cast<float>(buf[p]) / 255.0f;
        }
        set.images.push_back(std::move(pixels));

        unsigned char label;
        if (!lab.read(reinterpret_cast<char*>(&label), 1)) {
            throw DataError("truncated IDX file while reading label " +
                            std::to_string(i));
        }
        if (label > 9) {
            throw DataError("label out of range 0..9: " + std::to_string(label));
        }
        set.labels.push_back(label);
    }
    return set;
}

void write_idx(const LabeledImageSet& set, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path) {
    std::ofstream img(images_path, std::ios::binary);
    std::ofstream lab(labels_path, std::ios::binary);
    if (!img || !lab) {
        throw DataError("cannot open output IDX files for writing");
    }
    write_be32(img, kImagesMagic);
    write_be32(img, static_cast<std::uint32_t>(set.size()));
    write_be32(img, kImageSide);
    write_be32(img, kImageSide);
    write_be32(lab, kLabelsMagic);
    write_be32(lab, static_cast<std::uint32_t>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (int p = 0; p < kImagePixels; ++p) {
            const float v = std::clamp(set.images[i][p], 0.0f, 1.0f);
            const unsigned char byte =
                static_cast<unsigned char>(std::lround(v * 255.0f));
            img.write(reinterpret_cast<const char*>(&byte), 1);
        }
        const unsigned char label = static_cast<unsigned char>(set.labels[i]);
        lab.write(reinterpret_cast<const char*>(&label), 1);
    }
}

LabeledImageSet stratified_sample(const LabeledImageSet& set, int per_class,
                                  std::uint64_t seed, const std::string& tag) {
    if (per_class < 1) {
        throw DataError("per-class count must be >= 1");
    }
    std::vector<std::vector<std::size_t>> by_class(kNumClasses);
    for (std::size_t i = 0; i < set.size(); ++i) {
        by_class[set.labels[i]].push_back(i);
    }

    LabeledImageSet out;
    out.name = set.name + "_" + tag;
    for (int c = 0; c < kNumClasses; ++c) {
        auto& pool = by_class[c];
        if (pool.empty()) {
            continue;  // a class absent from the source set stays absent
        }
        if (static_cast<int>(pool.size()) < per_class) {
            throw DataError("class " + std::to_string(c) + " has only " +
                            std::to_string(pool.size()) + " items, need " +
                            std::to_string(per_class));
        }
        // partial Fisher-Yates: the first per_class entries are a uniform
        // draw without replacement
        RngStream rng = derive_stream(seed, "stratified/" + tag, c);
        for (int k = 0; k < per_class; ++k) {
            const std::size_t j =
                k + static_cast<std::size_t>(rng.below(pool.size() - k));
            std::swap(pool[k], pool[j]);
        }
        for (int k = 0; k < per_class; ++k) {
            out.images.push_back(set.images[pool[k]]);
            out.labels.push_back(c);
        }
    }
    return out;
}

std::pair<LabeledImageSet, LabeledImageSet> stratified_subset(
    const LabeledImageSet& train_set, const LabeledImageSet& test_set,
    const SplitSpec& spec) {
    return {stratified_sample(train_set, spec.per_class_train, spec.seed, "train"),
            stratified_sample(test_set, spec.per_class_test, spec.seed, "test")};
}

LabeledImageSet synthetic_image_set(int per_class, int num_classes,
                                    std::uint64_t seed) {
    if (num_classes < 1 || num_classes > kNumClasses) {
        throw DataError("num_classes must be in 1..10");
    }
    if (per_class < 1) {
        throw DataError("per_class must be >= 1");
    }
    LabeledImageSet set;
    set.name = "synthetic";
    for (int c = 0; c < num_classes; ++c) {
        // class template: a 2-D cosine pattern whose frequency and phase
        // depend on the class
        std::vector<float> tmpl(kImagePixels);
        const double fx = 1.0 + 0.5 * c;
        const double fy = 1.0 + 0.5 * ((c + 3) % kNumClasses);
        const double phase = 0.7 * c;
        for (int r = 0; r < kImageSide; ++r) {
            for (int col = 0; col < kImageSide; ++col) {
                const double u = static_cast<double>(r) / kImageSide;
                const double v = static_cast<double>(col) / kImageSide;
                const double val = 0.5 + 0.35 * std::cos(2 * M_PI * (fx * u + fy * v) + phase);
                tmpl[r * kImageSide + col] = static_cast<float>(val);
            }
        }
        for (int i = 0; i < per_class; ++i) {
            RngStream rng = derive_stream(seed, "synthetic", c, i);
            std::vector<float> pixels(kImagePixels);
            for (int p = 0; p < kImagePixels; ++p) {
                const double noisy = tmpl[p] + 0.05 * rng.normal();
                pixels[p] = static_cast<float>(std::clamp(noisy, 0.0, 1.0));
            }
            set.images.push_back(std::move(pixels));
            set.labels.push_back(c);
        }
    }
    return set;
}

}  // namespace qmlshots::data
