#include "gscl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gscl {

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "supcon") return LossKind::supcon;
    if (s == "genscl") return LossKind::genscl;
    if (s == "kd") return LossKind::kd;
    throw InvalidArgument("unknown loss kind: " + s);
}

const char* to_string(LossKind k) {
    switch (k) {
        case LossKind::supcon: return "supcon";
        case LossKind::genscl: return "genscl";
        case LossKind::kd: return "kd";
    }
    return "?";
}

namespace {

void check_distribution(const Vec& p, const char* what) {
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0))
            throw InvalidArgument(std::string(what) + ": negative entry");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9)
        throw InvalidArgument(std::string(what) + ": entries do not sum to 1");
}

// one-hot check for the strict losses: entries exactly 0 or 1
bool is_one_hot(const Vec& y) {
    int ones = 0;
    for (double v : y) {
        if (v == 1.0) ++ones;
        else if (v != 0.0) return false;
    }
    return ones == 1;
}

int argmax(const Vec& y) {
    return int(std::max_element(y.begin(), y.end()) - y.begin());
}

// log P_ij for one anchor row, over j != i ascending (log-sum-exp form)
Vec log_latent_row(const ProjectedBatch& pb, int i) {
    const int n = pb.size();
    Vec logits;
    logits.reserve(std::size_t(n) - 1);
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        logits.push_back(dot(pb.z[std::size_t(i)], pb.z[std::size_t(j)]) /
                         pb.tau);
    }
    double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - mx);
    double lse = mx + std::log(z);
    for (double& l : logits) l -= lse;
    return logits;  // now log P_ij
}

// similarity row: sim(v_i, v_j) for j != i ascending
Vec similarity_row(const std::vector<Vec>& vs, int i) {
    const int n = int(vs.size());
    Vec row;
    row.reserve(std::size_t(n) - 1);
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        row.push_back(cosine_sim(vs[std::size_t(i)], vs[std::size_t(j)]));
    }
    return row;
}

// Shared assembly: given per-row pair weights w_ij (over A(i)) and the
// per-row normalizer, fill the breakdown. weight_rows[i] aligned with
// log P rows.
LossBreakdown assemble(const ProjectedBatch& pb,
                       const std::vector<Vec>& weight_rows,
                       const std::vector<double>& row_norm) {
    const int n = pb.size();
    LossBreakdown out;
    out.per_anchor.assign(std::size_t(n), 0.0);
    out.Z.resize(std::size_t(n));
    out.Y.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        Vec logP = log_latent_row(pb, i);
        Vec& Zrow = out.Z[std::size_t(i)];
        Zrow.resize(logP.size());
        for (std::size_t k = 0; k < logP.size(); ++k)
            Zrow[k] = std::exp(logP[k]);
        out.Y[std::size_t(i)] = similarity_row(pb.labels, i);
        if (row_norm[std::size_t(i)] == 0.0) continue;  // empty positives
        double acc = 0.0;
        const Vec& wrow = weight_rows[std::size_t(i)];
        for (std::size_t k = 0; k < logP.size(); ++k)
            acc += wrow[k] * logP[k];
        out.per_anchor[std::size_t(i)] = -acc / row_norm[std::size_t(i)];
    }
    if (!pb.teacher_preds.empty()) {
        out.Pt.resize(std::size_t(n));
        for (int i = 0; i < n; ++i)
            out.Pt[std::size_t(i)] = similarity_row(pb.teacher_preds, i);
    }
    // fixed ascending-index reduction for bit-reproducibility
    out.total = 0.0;
    for (double l : out.per_anchor) out.total += l;
    out.mean_pos_dot = gradient_contribution_stats(pb).mean_pos_dot;
    return out;
}

}  // namespace

void validate_projected_batch(const ProjectedBatch& pb) {
    const int n = pb.size();
    if (n < 2) throw InvalidArgument("projected batch: need 2N >= 2 views");
    if (int(pb.w.size()) != n || int(pb.labels.size()) != n)
        throw InvalidArgument("projected batch: field sizes disagree");
    if (!pb.teacher_preds.empty() && int(pb.teacher_preds.size()) != n)
        throw InvalidArgument("projected batch: teacher_preds size mismatch");
    if (pb.tau <= 0.0) throw InvalidArgument("projected batch: tau must be > 0");
    const std::size_t p = pb.z[0].size();
    const std::size_t c = pb.labels[0].size();
    for (int i = 0; i < n; ++i) {
        if (pb.z[std::size_t(i)].size() != p ||
            pb.w[std::size_t(i)].size() != p)
            throw InvalidArgument("projected batch: inconsistent feature dim");
        if (pb.labels[std::size_t(i)].size() != c)
            throw InvalidArgument("projected batch: inconsistent label dim");
        if (std::abs(norm(pb.z[std::size_t(i)]) - 1.0) > 1e-10)
            throw InvalidArgument("projected batch: z not unit norm");
        check_distribution(pb.labels[std::size_t(i)], "label");
        if (!pb.teacher_preds.empty())
            check_distribution(pb.teacher_preds[std::size_t(i)],
                               "teacher prediction");
    }
}

Vec latent_softmax(const ProjectedBatch& pb, int i) {
    if (i < 0 || i >= pb.size())
        throw InvalidArgument("latent_softmax: index out of range");
    if (pb.tau <= 0.0) throw InvalidArgument("latent_softmax: tau must be > 0");
    Vec logP = log_latent_row(pb, i);
    for (double& l : logP) l = std::exp(l);
    return logP;
}

LossBreakdown supcon_loss(const ProjectedBatch& pb) {
    validate_projected_batch(pb);
    const int n = pb.size();
    for (const Vec& y : pb.labels)
        if (!is_one_hot(y))
            throw InvalidArgument(
                "supcon_loss: labels must be one-hot; mixed soft labels need "
                "genscl");
    auto weights = std::vector<Vec>(std::size_t(n));
    auto norms = std::vector<double>(std::size_t(n), 0.0);
    for (int i = 0; i < n; ++i) {
        int ci = argmax(pb.labels[std::size_t(i)]);
        Vec row;
        row.reserve(std::size_t(n) - 1);
        int pos = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            bool same = argmax(pb.labels[std::size_t(j)]) == ci;
            row.push_back(same ? 1.0 : 0.0);
            pos += same;
        }
        weights[std::size_t(i)] = std::move(row);
        norms[std::size_t(i)] = double(pos);  // 0 => anchor contributes 0
    }
    return assemble(pb, weights, norms);
}

LossBreakdown genscl_loss(const ProjectedBatch& pb) {
    validate_projected_batch(pb);
    const int n = pb.size();
    auto weights = std::vector<Vec>(std::size_t(n));
    std::vector<double> norms(std::size_t(n), double(n - 1));
    for (int i = 0; i < n; ++i)
        weights[std::size_t(i)] = similarity_row(pb.labels, i);
    return assemble(pb, weights, norms);
}

LossBreakdown kd_genscl_loss(const ProjectedBatch& pb, double alpha_kd,
                             KdMode mode) {
    if (alpha_kd < 0.0)
        throw InvalidArgument("kd_genscl_loss: alpha_kd must be >= 0");
    if (mode == KdMode::weighted && alpha_kd == 0.0)
        return genscl_loss(pb);  // exact degeneration, same code path
    validate_projected_batch(pb);
    if (pb.teacher_preds.empty())
        throw InvalidArgument(
            "kd_genscl_loss: teacher predictions required for kd weighting");
    const int n = pb.size();
    auto weights = std::vector<Vec>(std::size_t(n));
    std::vector<double> norms(std::size_t(n), double(n - 1));
    for (int i = 0; i < n; ++i) {
        Vec wrow;
        if (mode == KdMode::teacher_only) {
            wrow = similarity_row(pb.teacher_preds, i);
        } else {
            wrow = similarity_row(pb.labels, i);
            Vec trow = similarity_row(pb.teacher_preds, i);
            for (std::size_t k = 0; k < wrow.size(); ++k)
                wrow[k] += alpha_kd * trow[k];
        }
        weights[std::size_t(i)] = std::move(wrow);
    }
    return assemble(pb, weights, norms);
}

AnchorGradient anchor_gradient_analytic(const ProjectedBatch& pb, int i) {
    validate_projected_batch(pb);
    if (i < 0 || i >= pb.size())
        throw InvalidArgument("anchor_gradient_analytic: index out of range");
    const int n = pb.size();
    const std::size_t p = pb.z[0].size();
    double wnorm = norm(pb.w[std::size_t(i)]);
    if (wnorm == 0.0)
        throw NumericError("anchor_gradient_analytic: zero-norm w");

    Vec sims = similarity_row(pb.labels, i);
    Vec logP = log_latent_row(pb, i);
    double mean_sim = 0.0;
    for (double s : sims) mean_sim += s;
    mean_sim /= double(n - 1);

    const Vec& zi = pb.z[std::size_t(i)];
    AnchorGradient out;
    out.d_w.assign(p, 0.0);
    std::size_t k = 0;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const Vec& zj = pb.z[std::size_t(j)];
        double pij = std::exp(logP[k]);
        double coef = mean_sim * pij - sims[k] / double(n - 1);
        double zij = dot(zi, zj);
        for (std::size_t d = 0; d < p; ++d)
            out.d_w[d] += (zj[d] - zij * zi[d]) * coef;
        ++k;
    }
    for (double& v : out.d_w) v /= pb.tau * wnorm;
    return out;
}

GradContribStats gradient_contribution_stats(const ProjectedBatch& pb,
                                             double pos_threshold) {
    const int n = pb.size();
    if (n < 2)
        throw InvalidArgument("gradient_contribution_stats: need 2N >= 2");
    GradContribStats st;
    double sp = 0, sp2 = 0, sa = 0, sa2 = 0, sv = 0;
    int np = 0, na = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double d = dot(pb.z[std::size_t(i)], pb.z[std::size_t(j)]);
            sa += d;
            sa2 += d * d;
            sv += std::sqrt(std::max(0.0, 1.0 - d * d));
            ++na;
            if (cosine_sim(pb.labels[std::size_t(i)],
                           pb.labels[std::size_t(j)]) > pos_threshold) {
                sp += d;
                sp2 += d * d;
                ++np;
            }
        }
    }
    st.n_pos_pairs = np;
    st.mean_all_dot = sa / na;
    st.sigma_all_dot = std::sqrt(std::max(
        0.0, sa2 / na - st.mean_all_dot * st.mean_all_dot));
    st.mean_vanish_factor = sv / na;
    if (np > 0) {
        st.mean_pos_dot = sp / np;
        st.sigma_pos_dot = std::sqrt(
            std::max(0.0, sp2 / np - st.mean_pos_dot * st.mean_pos_dot));
    }
    return st;
}

std::vector<Vec> loss_backward(const ProjectedBatch& pb, LossKind kind,
                               double alpha_kd, KdMode mode) {
    validate_projected_batch(pb);
    const int n = pb.size();
    const std::size_t p = pb.z[0].size();

    if (kind == LossKind::supcon)
        for (const Vec& y : pb.labels)
            if (!is_one_hot(y))
                throw InvalidArgument(
                    "loss_backward: supcon needs one-hot labels");

    // C[i][j] = d L_i / d (z_i.z_j), laid out densely with zero diagonal.
    std::vector<Vec> C(std::size_t(n), Vec(std::size_t(n), 0.0));
    for (int i = 0; i < n; ++i) {
        Vec logP = log_latent_row(pb, i);

        Vec wrow;               // pair weights over A(i)
        double row_norm = 0.0;  // |A| or |P(i)|
        if (kind == LossKind::supcon) {
            int ci = argmax(pb.labels[std::size_t(i)]);
            int pos = 0;
            wrow.reserve(std::size_t(n) - 1);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                bool same = argmax(pb.labels[std::size_t(j)]) == ci;
                wrow.push_back(same ? 1.0 : 0.0);
                pos += same;
            }
            if (pos == 0) continue;  // anchor contributes no gradient
            row_norm = double(pos);
        } else if (kind == LossKind::genscl ||
                   (kind == LossKind::kd && mode == KdMode::weighted &&
                    alpha_kd == 0.0)) {
            wrow = similarity_row(pb.labels, i);
            row_norm = double(n - 1);
        } else {
            if (pb.teacher_preds.empty())
                throw InvalidArgument(
                    "loss_backward: kd weighting needs teacher predictions");
            if (mode == KdMode::teacher_only) {
                wrow = similarity_row(pb.teacher_preds, i);
            } else {
                wrow = similarity_row(pb.labels, i);
                Vec trow = similarity_row(pb.teacher_preds, i);
                for (std::size_t k = 0; k < wrow.size(); ++k)
                    wrow[k] += alpha_kd * trow[k];
            }
            row_norm = double(n - 1);
        }

        double wsum = 0.0;
        for (double v : wrow) wsum += v;
        std::size_t k = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double pij = std::exp(logP[k]);
            C[std::size_t(i)][std::size_t(j)] =
                (wsum / row_norm * pij - wrow[k] / row_norm) / pb.tau;
            ++k;
        }
    }

    auto d_w = std::vector<Vec>(std::size_t(n));
    for (int m = 0; m < n; ++m) {
        Vec dz(p, 0.0);
        for (int j = 0; j < n; ++j) {
            if (j == m) continue;
            double c = C[std::size_t(m)][std::size_t(j)] +
                       C[std::size_t(j)][std::size_t(m)];
            if (c == 0.0) continue;
            const Vec& zj = pb.z[std::size_t(j)];
            for (std::size_t d = 0; d < p; ++d) dz[d] += c * zj[d];
        }
        double wn = norm(pb.w[std::size_t(m)]);
        if (wn == 0.0) throw NumericError("loss_backward: zero-norm w");
        Vec g = tangent_project(pb.z[std::size_t(m)], dz);
        for (double& v : g) v /= wn;
        d_w[std::size_t(m)] = std::move(g);
    }
    return d_w;
}

}  // namespace gscl
