#include "gscl/mixing.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace gscl {

MixKind mix_kind_from_string(const std::string& s) {
    if (s == "none") return MixKind::none;
    if (s == "mixup") return MixKind::mixup;
    if (s == "cutmix") return MixKind::cutmix;
    throw InvalidArgument("unknown mix kind: " + s);
}

const char* to_string(MixKind k) {
    switch (k) {
        case MixKind::none: return "none";
        case MixKind::mixup: return "mixup";
        case MixKind::cutmix: return "cutmix";
    }
    return "?";
}

namespace {

void check_pair_shapes(const Vec& image_a, const Vec& label_a,
                       const Vec& image_b, const Vec& label_b) {
    if (image_a.size() != image_b.size())
        throw InvalidArgument("mixing: image shape mismatch");
    if (label_a.size() != label_b.size())
        throw InvalidArgument("mixing: label shape mismatch");
}

Vec blend_labels(const Vec& label_a, const Vec& label_b, double lam) {
    Vec out(label_a.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = lam * label_a[i] + (1.0 - lam) * label_b[i];
    return out;
}

}  // namespace

MixedView mixup(const Vec& image_a, const Vec& label_a, const Vec& image_b,
                const Vec& label_b, double lambda) {
    check_pair_shapes(image_a, label_a, image_b, label_b);
    if (lambda < 0.0 || lambda > 1.0)
        throw InvalidArgument("mixup: lambda outside [0,1]");
    MixedView v;
    v.image.resize(image_a.size());
    for (std::size_t i = 0; i < image_a.size(); ++i)
        v.image[i] = lambda * image_a[i] + (1.0 - lambda) * image_b[i];
    v.soft_label = blend_labels(label_a, label_b, lambda);
    v.lambda = lambda;
    v.mix_kind = MixKind::mixup;
    return v;
}

MixedView cutmix(const Vec& image_a, const Vec& label_a, const Vec& image_b,
                 const Vec& label_b, int h, int w, int ch, double lambda_draw,
                 Rng& rng) {
    check_pair_shapes(image_a, label_a, image_b, label_b);
    if (int(image_a.size()) != h * w * ch)
        throw InvalidArgument("cutmix: dims do not match image size");
    if (lambda_draw < 0.0 || lambda_draw > 1.0)
        throw InvalidArgument("cutmix: lambda_draw outside [0,1]");

    double half_w = w * std::sqrt(1.0 - lambda_draw) / 2.0;
    double half_h = h * std::sqrt(1.0 - lambda_draw) / 2.0;
    double cx = rng.uniform(0.0, double(w));
    double cy = rng.uniform(0.0, double(h));
    int x1 = int(std::clamp(std::llround(cx - half_w), 0LL, (long long)w));
    int x2 = int(std::clamp(std::llround(cx + half_w), 0LL, (long long)w));
    int y1 = int(std::clamp(std::llround(cy - half_h), 0LL, (long long)h));
    int y2 = int(std::clamp(std::llround(cy + half_h), 0LL, (long long)h));

    long long pasted = (long long)(x2 - x1) * (y2 - y1);
    double lam_eff = 1.0 - double(pasted) / (double(h) * double(w));

    MixedView v;
    v.image = image_a;
    for (int y = y1; y < y2; ++y)
        for (int x = x1; x < x2; ++x)
            for (int c = 0; c < ch; ++c) {
                std::size_t i = (std::size_t(y) * w + x) * ch + c;
                v.image[i] = image_b[i];
            }
    v.soft_label = blend_labels(label_a, label_b, lam_eff);
    v.lambda = lam_eff;
    v.mix_kind = MixKind::cutmix;
    return v;
}

MultiViewBatch build_multiview_batch(const std::vector<LabeledExample>& batch,
                                     int h, int w, int ch, int classes,
                                     const AugmentConfig& aug, MixKind mix_kind,
                                     double beta_alpha, Rng& rng) {
    const int n = int(batch.size());
    if (n < 1) throw InvalidArgument("build_multiview_batch: empty batch");
    if (mix_kind != MixKind::none && n < 2)
        throw InvalidArgument(
            "build_multiview_batch: mixing needs at least 2 examples");
    if (beta_alpha <= 0.0)
        throw InvalidArgument("build_multiview_batch: beta_alpha must be > 0");

    MultiViewBatch out;
    out.h = h;
    out.w = w;
    out.ch = ch;
    out.classes = classes;
    out.views.reserve(std::size_t(n) * 2);

    // Pre-augment both views of every example so partner draws can pick
    // the matching view of the partner.
    std::vector<std::array<Vec, 2>> views(n);
    for (int k = 0; k < n; ++k)
        for (int v = 0; v < 2; ++v)
            views[std::size_t(k)][std::size_t(v)] =
                augment(batch[std::size_t(k)].image, h, w, ch, aug, rng);

    for (int k = 0; k < n; ++k) {
        for (int vi = 0; vi < 2; ++vi) {
            const Vec& img = views[std::size_t(k)][std::size_t(vi)];
            const Vec& lab = batch[std::size_t(k)].label;
            MixedView mv;
            if (mix_kind == MixKind::none) {
                mv.image = img;
                mv.soft_label = lab;
                mv.lambda = 1.0;
                mv.mix_kind = MixKind::none;
                mv.partner_index = -1;
            } else {
                // partner: uniform over the other n-1 members, per view
                int p = int(rng.uniform_int(0, n - 2));
                if (p >= k) ++p;
                double lam = rng.beta(beta_alpha, beta_alpha);
                const Vec& pimg = views[std::size_t(p)][std::size_t(vi)];
                const Vec& plab = batch[std::size_t(p)].label;
                if (mix_kind == MixKind::mixup) {
                    mv = mixup(img, lab, pimg, plab, lam);
                } else {
                    mv = cutmix(img, lab, pimg, plab, h, w, ch, lam, rng);
                }
                mv.partner_index = p;
            }
            mv.source_index = k;
            out.views.push_back(std::move(mv));
        }
    }
    return out;
}

}  // namespace gscl
