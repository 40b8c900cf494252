#include "gscl/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gscl/io.hpp"

namespace gscl {

namespace {

constexpr char kMagic[4] = {'G', 'S', 'C', 'L'};
constexpr std::uint32_t kVersion = 1;
constexpr double kTemplateAmp = 0.4;

// Zero-mean patterns in [-1,1]; class identity is the pattern shape.
double pattern_value(int tmpl, int x, int y, int w, int h) {
    switch (tmpl) {
        case 0: return w > 1 ? -1.0 + 2.0 * x / (w - 1) : 0.0;
        case 1: return (x % 2 == 0) ? 1.0 : -1.0;
        case 2: return ((x + y) % 2 == 0) ? 1.0 : -1.0;
        case 3: return h > 1 ? -1.0 + 2.0 * y / (h - 1) : 0.0;
        case 4: return (y % 2 == 0) ? 1.0 : -1.0;
        case 5:
            return (w > 1 && h > 1)
                       ? -1.0 + (double(x) / (w - 1) + double(y) / (h - 1))
                       : 0.0;
        default: throw InvalidArgument("pattern_value: no such template");
    }
}

}  // namespace

int Dataset::label_of(std::size_t i) const {
    const Vec& y = examples.at(i).label;
    return int(std::max_element(y.begin(), y.end()) - y.begin());
}

void validate_dataset(const Dataset& ds) {
    if (ds.h < 1 || ds.w < 1 || ds.ch < 1 || ds.classes < 2)
        throw InvalidArgument("dataset: bad dims or class count");
    std::vector<int> seen(ds.classes, 0);
    for (const auto& ex : ds.examples) {
        if (int(ex.image.size()) != ds.image_dim())
            throw InvalidArgument("dataset: image size mismatch");
        if (int(ex.label.size()) != ds.classes)
            throw InvalidArgument("dataset: label size mismatch");
        int ones = 0;
        int cls = -1;
        for (int c = 0; c < ds.classes; ++c) {
            double v = ex.label[c];
            if (v == 1.0) {
                ++ones;
                cls = c;
            } else if (v != 0.0) {
                throw InvalidArgument("dataset: label is not one-hot");
            }
        }
        if (ones != 1) throw InvalidArgument("dataset: label is not one-hot");
        seen[cls] = 1;
        for (double p : ex.image)
            if (!(p >= 0.0 && p <= 1.0))
                throw InvalidArgument("dataset: pixel outside [0,1]");
    }
    for (int c = 0; c < ds.classes; ++c)
        if (!seen[c]) throw InvalidArgument("dataset: class has no examples");
}

int synthetic_template_count() { return 6; }

Dataset generate_synthetic(int classes, int per_class, int h, int w,
                           double noise_std, Rng& rng) {
    if (classes < 2) throw InvalidArgument("generate_synthetic: classes < 2");
    if (classes > synthetic_template_count())
        throw InvalidArgument(
            "generate_synthetic: more classes than available templates");
    if (h < 4 || w < 4)
        throw InvalidArgument("generate_synthetic: H and W must be >= 4");
    if (per_class < 1)
        throw InvalidArgument("generate_synthetic: per_class < 1");
    if (noise_std < 0)
        throw InvalidArgument("generate_synthetic: negative noise_std");

    Dataset ds;
    ds.h = h;
    ds.w = w;
    ds.ch = 1;
    ds.classes = classes;
    ds.name = "synthetic";
    ds.examples.reserve(std::size_t(classes) * per_class);
    for (int c = 0; c < classes; ++c) {
        for (int k = 0; k < per_class; ++k) {
            LabeledExample ex;
            ex.image.resize(std::size_t(h) * w);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    double v = 0.5 + kTemplateAmp * pattern_value(c, x, y, w, h);
                    if (noise_std > 0) v += noise_std * rng.normal();
                    ex.image[std::size_t(y) * w + x] = std::clamp(v, 0.0, 1.0);
                }
            }
            ex.label.assign(classes, 0.0);
            ex.label[c] = 1.0;
            ds.examples.push_back(std::move(ex));
        }
    }
    return ds;
}

Vec augment(const Vec& image, int h, int w, int ch, const AugmentConfig& cfg,
            Rng& rng) {
    if (int(image.size()) != h * w * ch)
        throw InvalidArgument("augment: image size mismatch");
    if (cfg.crop_pad < 0 || cfg.crop_pad >= (std::min(h, w) + 1) / 2)
        throw InvalidArgument("augment: crop_pad too large for image");
    if (cfg.flip_prob < 0 || cfg.flip_prob > 1)
        throw InvalidArgument("augment: flip_prob outside [0,1]");
    if (cfg.noise_std < 0)
        throw InvalidArgument("augment: negative noise_std");

    Vec out = image;
    auto at = [&](Vec& img, int y, int x, int c) -> double& {
        return img[(std::size_t(y) * w + x) * ch + c];
    };

    if (cfg.crop_enabled && cfg.crop_pad > 0) {
        int pad = cfg.crop_pad;
        // offsets into the zero-padded canvas
        int oy = int(rng.uniform_int(0, 2 * pad));
        int ox = int(rng.uniform_int(0, 2 * pad));
        Vec crop(out.size(), 0.0);
        for (int y = 0; y < h; ++y) {
            int sy = y + oy - pad;  // source row in the original image
            if (sy < 0 || sy >= h) continue;
            for (int x = 0; x < w; ++x) {
                int sx = x + ox - pad;
                if (sx < 0 || sx >= w) continue;
                for (int c = 0; c < ch; ++c) at(crop, y, x, c) = at(out, sy, sx, c);
            }
        }
        out = std::move(crop);
    }
    if (cfg.flip_enabled && rng.next_double() < cfg.flip_prob) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w / 2; ++x)
                for (int c = 0; c < ch; ++c)
                    std::swap(at(out, y, x, c), at(out, y, w - 1 - x, c));
    }
    if (cfg.noise_enabled && cfg.noise_std > 0) {
        for (double& p : out)
            p = std::clamp(p + cfg.noise_std * rng.normal(), 0.0, 1.0);
    }
    return out;
}

BatchSampler::BatchSampler(std::size_t dataset_size, Rng rng) : rng_(rng) {
    if (dataset_size == 0) throw InvalidArgument("BatchSampler: empty dataset");
    order_.resize(dataset_size);
    for (std::size_t i = 0; i < dataset_size; ++i) order_[i] = i;
    reshuffle();
}

void BatchSampler::reshuffle() {
    // Fisher-Yates with our own rng so the order is platform-stable.
    for (std::size_t i = order_.size(); i > 1; --i) {
        std::size_t j = std::size_t(rng_.uniform_int(0, std::int64_t(i) - 1));
        std::swap(order_[i - 1], order_[j]);
    }
    pos_ = 0;
}

std::vector<std::size_t> BatchSampler::next(std::size_t n) {
    if (n == 0 || n > order_.size())
        throw InvalidArgument("BatchSampler: batch size out of range");
    if (pos_ + n > order_.size()) reshuffle();
    std::vector<std::size_t> out(order_.begin() + pos_,
                                 order_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

std::vector<LabeledExample> sample_batch(const Dataset& ds, std::size_t n,
                                         Rng& rng) {
    if (n == 0 || n > ds.size())
        throw InvalidArgument("sample_batch: N out of range");
    // Fresh shuffle driven by the caller's rng (which advances), batch is
    // the first n — distinct examples by construction.
    std::vector<std::size_t> order(ds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
        std::size_t j = std::size_t(rng.uniform_int(0, std::int64_t(i) - 1));
        std::swap(order[i - 1], order[j]);
    }
    std::vector<LabeledExample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(ds.examples[order[i]]);
    return out;
}

void save_dataset(const std::string& path, const Dataset& ds) {
    validate_dataset(ds);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("save_dataset: cannot open " + path);
    io::write_bytes(os, kMagic, 4);
    io::write_u32(os, kVersion);
    io::write_u32(os, std::uint32_t(ds.h));
    io::write_u32(os, std::uint32_t(ds.w));
    io::write_u32(os, std::uint32_t(ds.ch));
    io::write_u32(os, std::uint32_t(ds.classes));
    io::write_u64(os, ds.examples.size());
    for (const auto& ex : ds.examples) {
        for (double v : ex.label) io::write_f64(os, v);
        for (double v : ex.image) io::write_f64(os, v);
    }
    os.flush();
    if (!os) throw IoError("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_dataset: cannot open " + path);
    char magic[4];
    io::read_bytes(is, magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("load_dataset: bad magic bytes");
    std::uint32_t version = io::read_u32(is);
    if (version != kVersion)
        throw VersionError("load_dataset: unsupported version " +
                           std::to_string(version));
    Dataset ds;
    ds.h = int(io::read_u32(is));
    ds.w = int(io::read_u32(is));
    ds.ch = int(io::read_u32(is));
    ds.classes = int(io::read_u32(is));
    std::uint64_t count = io::read_u64(is);
    ds.examples.resize(count);
    for (auto& ex : ds.examples) {
        ex.label.resize(ds.classes);
        for (double& v : ex.label) v = io::read_f64(is);
        ex.image.resize(std::size_t(ds.image_dim()));
        for (double& v : ex.image) v = io::read_f64(is);
    }
    validate_dataset(ds);
    return ds;
}

}  // namespace gscl
