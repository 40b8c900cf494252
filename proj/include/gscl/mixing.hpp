#pragma once
#include <string>
#include <vector>

#include "gscl/data.hpp"
#include "gscl/numerics.hpp"

namespace gscl {

enum class MixKind { none, mixup, cutmix };

MixKind mix_kind_from_string(const std::string& s);
const char* to_string(MixKind k);

// One augmented-and-possibly-mixed view. source_index / partner_index are
// positions in the originating batch; partner_index is -1 when unmixed.
struct MixedView {
    Vec image;
    Vec soft_label;
    int source_index = 0;
    int partner_index = -1;
    double lambda = 1.0;
    MixKind mix_kind = MixKind::none;
};

// 2N views, positions 2k and 2k+1 derived from batch example k.
struct MultiViewBatch {
    int h = 0, w = 0, ch = 0, classes = 0;
    std::vector<MixedView> views;
};

// Convex pixel and label interpolation with the same lambda.
MixedView mixup(const Vec& image_a, const Vec& label_a, const Vec& image_b,
                const Vec& label_b, double lambda);

// Paste a rectangle of b into a. Rectangle center is uniform over the
// image; half extents are W*sqrt(1-lambda_draw)/2 and H*sqrt(1-lambda_draw)/2
// before clipping. The stored lambda is recomputed from the clipped box so
// the soft label always matches the surviving pixel area exactly.
MixedView cutmix(const Vec& image_a, const Vec& label_a, const Vec& image_b,
                 const Vec& label_b, int h, int w, int ch, double lambda_draw,
                 Rng& rng);

// Per example k and view v: augment, then (when mixing) blend with a
// partner drawn uniformly from the other batch members, lambda from
// Beta(beta_alpha, beta_alpha). mix_kind none keeps labels one-hot.
MultiViewBatch build_multiview_batch(const std::vector<LabeledExample>& batch,
                                     int h, int w, int ch, int classes,
                                     const AugmentConfig& aug, MixKind mix_kind,
                                     double beta_alpha, Rng& rng);

}  // namespace gscl
