#pragma once
#include <string>
#include <vector>

#include "gscl/data.hpp"
#include "gscl/loss.hpp"
#include "gscl/mixing.hpp"
#include "gscl/model.hpp"
#include "gscl/numerics.hpp"

namespace gscl {

struct TrainConfig {
    int epochs = 50;
    int batch_size = 32;
    double lr = 0.003;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    int warmup_epochs = 2;
    double tau = 0.1;
    LossKind loss = LossKind::genscl;
    double alpha_kd = 0.0;
    bool teacher_only = false;
    MixKind mix = MixKind::none;
    double beta_alpha = 1.0;
    unsigned long long seed = 0;
    int hidden_dim = 64;
    int embed_dim = 32;
    int proj_dim = 16;
    double pos_threshold = 0.5;
    AugmentConfig aug;
};

// lr>0, 0<=momentum<1, weight_decay>=0, 0<=warmup_epochs<=epochs, tau>0,
// positive dims, batch_size>=2 when mixing, one-hot-only loss requires
// mix=none (mixed labels are soft by construction).
void validate_train_config(const TrainConfig& cfg);

struct TrainLogRecord {
    int epoch = 0;
    double loss = 0.0;          // epoch mean of the per-anchor loss
    double mean_pos_dot = 0.0;  // epoch mean embedding dot over positive pairs
    double mean_vanish_factor = 0.0;  // epoch mean easy-pair damping factor
    double lr = 0.0;
    double wall_seconds = 0.0;  // in-memory diagnostic; never serialized
};

// Linear warmup lr*(epoch+1)/warmup_epochs for the first warmup_epochs,
// then cosine annealing lr*0.5*(1+cos(pi*progress)) with
// progress = (epoch-warmup)/(epochs-warmup). Continuous at the boundary.
double lr_at(const TrainConfig& cfg, int epoch);

// g = grad + weight_decay*param; v = momentum*v + g; param -= lr*v.
void sgd_step(Vec& params, const Vec& grads, Vec& velocity, double lr,
              double momentum, double weight_decay);

struct TrainResult {
    EncoderParams encoder;
    ProjectionParams projection;
    std::vector<TrainLogRecord> log;  // one record per epoch
};

// Contrastive pretraining over mixed two-view batches. Fully determined
// by (dataset bytes, cfg, cfg.seed): parameter init, shuffling, and all
// augmentation/mixing draws come from fixed substreams of cfg.seed.
// teacher must be non-null exactly when cfg.loss requires teacher
// similarities, and is never modified. A non-finite forward value or loss
// aborts with a NumericError whose message carries the epoch, batch, and
// batch stream id needed to replay the offending step.
TrainResult train_contrastive(const Dataset& ds, const TrainConfig& cfg,
                              const TeacherParams* teacher = nullptr);

struct TeacherTrainConfig {
    int epochs = 30;
    int batch_size = 32;
    double lr = 0.05;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    unsigned long long seed = 0;
    int hidden_dim = 64;
    double tau_soft = 1.0;  // stored on the resulting teacher
};

struct TeacherTrainResult {
    TeacherParams teacher;
    double train_accuracy = 0.0;
    std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

// Plain softmax cross-entropy training of the classifier used as a frozen
// distillation teacher. Constant lr, no augmentation, deterministic.
TeacherTrainResult train_teacher(const Dataset& ds,
                                 const TeacherTrainConfig& cfg);

struct ProbeConfig {
    int epochs = 100;
    int batch_size = 32;
    double lr = 0.1;  // constant schedule
    double momentum = 0.9;
    unsigned long long seed = 0;
};

struct ProbeResult {
    LinearProbeParams probe;
    double top1 = 0.0;  // on ds_test
};

// Frozen-encoder evaluation: fit a single linear layer on encoder
// features with cross-entropy (no augmentation, no mixing), report top-1
// accuracy on ds_test. The encoder is read-only throughout.
ProbeResult linear_eval(const EncoderParams& encoder, const Dataset& ds_train,
                        const Dataset& ds_test, const ProbeConfig& cfg);

// Per-epoch metrics serialization. Header and row layout are a pinned
// interface for external plotting; doubles are printed with %.17g so a
// parse/format round trip is bit-exact. Wall-clock never appears.
extern const char* const kMetricsHeader;
std::string format_metrics_csv(const std::vector<TrainLogRecord>& log);
std::vector<TrainLogRecord> parse_metrics_csv(const std::string& text);

}  // namespace gscl
