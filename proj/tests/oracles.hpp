#pragma once
// Independent direct-summation reference implementations used only by
// tests. Deliberately naive: plain exp()/log(), no log-sum-exp, no code
// shared with the library kernels. Valid for moderate temperatures
// (tau >= ~0.5 keeps the naive exponentials in range).
#include <cmath>
#include <vector>

namespace oracle {

using V = std::vector<double>;

inline double cosine(const V& a, const V& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

inline double p_ij(const std::vector<V>& z, double tau, int i, int j) {
    double den = 0;
    for (int a = 0; a < int(z.size()); ++a) {
        if (a == i) continue;
        double d = 0;
        for (std::size_t k = 0; k < z[std::size_t(i)].size(); ++k)
            d += z[std::size_t(i)][k] * z[std::size_t(a)][k];
        den += std::exp(d / tau);
    }
    double dij = 0;
    for (std::size_t k = 0; k < z[std::size_t(i)].size(); ++k)
        dij += z[std::size_t(i)][k] * z[std::size_t(j)][k];
    return std::exp(dij / tau) / den;
}

// one-hot-only loss: per-anchor mean of -log P over same-class contrasts
inline double supcon_anchor(const std::vector<V>& z,
                            const std::vector<int>& cls, double tau, int i) {
    int n = int(z.size());
    double acc = 0;
    int npos = 0;
    for (int j = 0; j < n; ++j) {
        if (j == i || cls[std::size_t(j)] != cls[std::size_t(i)]) continue;
        acc += -std::log(p_ij(z, tau, i, j));
        ++npos;
    }
    return npos == 0 ? 0.0 : acc / npos;
}

// label-similarity weighted loss, averaged over the whole contrast set
inline double genscl_anchor(const std::vector<V>& z, const std::vector<V>& y,
                            double tau, int i) {
    int n = int(z.size());
    double acc = 0;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        acc += -cosine(y[std::size_t(i)], y[std::size_t(j)]) *
               std::log(p_ij(z, tau, i, j));
    }
    return acc / (n - 1);
}

// adds the teacher-similarity term; teacher_only drops the label term
inline double kd_anchor(const std::vector<V>& z, const std::vector<V>& y,
                        const std::vector<V>& pt, double alpha,
                        bool teacher_only, double tau, int i) {
    int n = int(z.size());
    double acc = 0;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double w;
        if (teacher_only) {
            w = cosine(pt[std::size_t(i)], pt[std::size_t(j)]);
        } else {
            w = cosine(y[std::size_t(i)], y[std::size_t(j)]) +
                alpha * cosine(pt[std::size_t(i)], pt[std::size_t(j)]);
        }
        acc += -w * std::log(p_ij(z, tau, i, j));
    }
    return acc / (n - 1);
}

}  // namespace oracle
