#pragma once
// Shared random-batch construction for the loss/gradient tests.
#include <vector>

#include "gscl/loss.hpp"
#include "gscl/numerics.hpp"

namespace fixtures {

// Soft labels shaped like the mixing pipeline produces: a convex blend of
// exactly two one-hot rows (or a plain one-hot when `onehot` is set).
inline gscl::Vec random_label(gscl::Rng& rng, int classes, bool onehot) {
    gscl::Vec y(std::size_t(classes), 0.0);
    int a = rng.uniform_int(0, classes - 1);
    if (onehot) {
        y[std::size_t(a)] = 1.0;
        return y;
    }
    int b = rng.uniform_int(0, classes - 2);
    if (b >= a) ++b;
    double lam = rng.next_double();
    y[std::size_t(a)] += lam;
    y[std::size_t(b)] += 1.0 - lam;
    return y;
}

inline gscl::Vec random_distribution(gscl::Rng& rng, int classes) {
    gscl::Vec logits(std::size_t(classes), 0.0);
    for (auto& v : logits) v = rng.normal();
    return gscl::softmax_with_temperature(logits, 1.0);
}

inline gscl::ProjectedBatch random_batch(gscl::Rng& rng, int n, int dim,
                                         int classes, double tau,
                                         bool onehot = false,
                                         bool teacher = false) {
    gscl::ProjectedBatch pb;
    pb.tau = tau;
    for (int i = 0; i < n; ++i) {
        gscl::Vec w(std::size_t(dim), 0.0);
        for (auto& v : w) v = rng.normal() * (0.5 + rng.next_double());
        pb.w.push_back(w);
        pb.z.push_back(gscl::l2_normalize(w));
        pb.labels.push_back(random_label(rng, classes, onehot));
        if (teacher) pb.teacher_preds.push_back(random_distribution(rng, classes));
    }
    return pb;
}

}  // namespace fixtures
