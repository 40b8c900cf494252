#pragma once
#include <cstddef>
#include <string>
#include <vector>

#include "gscl/numerics.hpp"

namespace gscl {

// One (image, one-hot label) pair. Image is row-major y, x, channel with
// values in [0,1]; dims live on the owning Dataset.
struct LabeledExample {
    Vec image;
    Vec label;
};

struct Dataset {
    int h = 0, w = 0, ch = 0, classes = 0;
    std::string name;
    std::vector<LabeledExample> examples;

    int image_dim() const { return h * w * ch; }
    std::size_t size() const { return examples.size(); }
    int label_of(std::size_t i) const;  // argmax of the one-hot
};

// Validates shared dims, one-hot labels, pixel range, class coverage.
void validate_dataset(const Dataset& ds);

struct AugmentConfig {
    int crop_pad = 1;
    double flip_prob = 0.5;
    double noise_std = 0.05;
    bool crop_enabled = true;
    bool flip_enabled = true;
    bool noise_enabled = true;
};

// Number of built-in class templates generate_synthetic can hand out.
int synthetic_template_count();

// Deterministic per-class spatial pattern (gradients / stripes / checker)
// at amplitude 0.4 around mid-gray, plus N(0, noise_std) pixel noise,
// clipped to [0,1]. Same (seed, params) gives a bit-identical dataset.
Dataset generate_synthetic(int classes, int per_class, int h, int w,
                           double noise_std, Rng& rng);

// pad -> random crop, horizontal flip with flip_prob, additive Gaussian
// noise; result clipped to [0,1]. Disabled transforms draw nothing, so an
// all-disabled config returns the input unchanged.
Vec augment(const Vec& image, int h, int w, int ch, const AugmentConfig& cfg,
            Rng& rng);

// Epoch iterator: seeded shuffle, deal out batches without replacement,
// reshuffle when the deck is exhausted.
class BatchSampler {
  public:
    BatchSampler(std::size_t dataset_size, Rng rng);
    std::vector<std::size_t> next(std::size_t n);

  private:
    void reshuffle();
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
    Rng rng_;
};

// Single-shot draw of n distinct examples (first n of a fresh shuffle).
std::vector<LabeledExample> sample_batch(const Dataset& ds, std::size_t n,
                                         Rng& rng);

// Binary dataset file. Little-endian: magic "GSCL", version u32=1,
// H u32, W u32, Ch u32, C u32, count u64, then per example C f64 label
// values followed by H*W*Ch f64 pixels.
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

}  // namespace gscl
