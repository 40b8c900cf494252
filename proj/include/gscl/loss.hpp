#pragma once
#include <string>
#include <vector>

#include "gscl/numerics.hpp"

namespace gscl {

enum class LossKind { supcon, genscl, kd };
enum class KdMode { weighted, teacher_only };

LossKind loss_kind_from_string(const std::string& s);
const char* to_string(LossKind k);

// Everything the loss family consumes for one batch of 2N views: the
// projection outputs before (w) and after (z) normalization, per-view
// soft labels, optional teacher predictions, and the temperature.
struct ProjectedBatch {
    std::vector<Vec> w;
    std::vector<Vec> z;
    std::vector<Vec> labels;
    std::vector<Vec> teacher_preds;  // empty when no teacher in play
    double tau = 0.1;

    int size() const { return int(z.size()); }
};

// Checks unit-norm z (1e-10), distribution-valid labels / teacher preds,
// matching sizes, 2N >= 2.
void validate_projected_batch(const ProjectedBatch& pb);

// Per-anchor results plus the similarity spaces, row i laid out over the
// contrast set A(i) = all j != i in ascending j (2N-1 entries per row).
struct LossBreakdown {
    double total = 0.0;
    Vec per_anchor;
    std::vector<Vec> Y;   // label similarities
    std::vector<Vec> Pt;  // teacher similarities; empty when no teacher
    std::vector<Vec> Z;   // latent softmax rows
    double mean_pos_dot = 0.0;  // mean z_i.z_j over label-similar pairs
};

// Softmax over the anchor's contrasts: exp(z_i.z_j / tau) normalized over
// j in A(i). Computed through log-sum-exp.
Vec latent_softmax(const ProjectedBatch& pb, int i);

// Requires strictly one-hot labels. Anchors with no same-class contrast
// contribute zero. per_anchor[i] = -(1/|P(i)|) sum_{j in P(i)} log P_ij.
LossBreakdown supcon_loss(const ProjectedBatch& pb);

// per_anchor[i] = -(1/|A(i)|) sum_j sim(y_i,y_j) log P_ij.
LossBreakdown genscl_loss(const ProjectedBatch& pb);

// Pair weight becomes sim(y_i,y_j) + alpha_kd * sim(pt_i,pt_j); the
// teacher_only mode drops the label term entirely (the "relies only on
// the teacher" configuration) instead of using a float infinity.
// alpha_kd = 0 in weighted mode delegates to genscl_loss, bit for bit.
LossBreakdown kd_genscl_loss(const ProjectedBatch& pb, double alpha_kd,
                             KdMode mode = KdMode::weighted);

struct AnchorGradient {
    Vec d_w;  // derivative of the anchor's own loss term w.r.t. w_i
};

// Closed-form per-anchor gradient of the label-weighted loss at anchor i:
//   (1/(tau |w_i|)) sum_j (z_j - (z_i.z_j) z_i)
//                        * [ (sum_a sim_ia / |A|) P_ij - sim_ij / |A| ].
// Verified against finite differences of genscl per_anchor[i].
AnchorGradient anchor_gradient_analytic(const ProjectedBatch& pb, int i);

struct GradContribStats {
    double mean_pos_dot = 0.0;   // over pairs with label sim > threshold
    double sigma_pos_dot = 0.0;
    double mean_all_dot = 0.0;   // over all unordered pairs
    double sigma_all_dot = 0.0;
    // mean sqrt(1 - (z_i.z_j)^2) over all pairs: the factor that sends
    // easy-pair gradients to zero as dots approach +-1
    double mean_vanish_factor = 0.0;
    int n_pos_pairs = 0;
};

GradContribStats gradient_contribution_stats(const ProjectedBatch& pb,
                                             double pos_threshold = 0.5);

// d(total)/d(w_m) for every view m, through every anchor term that sees
// z_m (not just m's own row). This is what the trainer backpropagates.
std::vector<Vec> loss_backward(const ProjectedBatch& pb, LossKind kind,
                               double alpha_kd = 0.0,
                               KdMode mode = KdMode::weighted);

}  // namespace gscl
