#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "gscl/data.hpp"
#include "gscl/errors.hpp"
#include "gscl/trainer.hpp"

using namespace gscl;

namespace {

constexpr double kPi = 3.14159265358979323846;

Dataset tiny_dataset(int per_class = 20, unsigned long long seed = 900) {
    Rng rng(seed);
    return generate_synthetic(3, per_class, 8, 8, 0.05, rng);
}

TrainConfig tiny_config(int epochs) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = 20;
    cfg.warmup_epochs = std::min(2, epochs);
    cfg.seed = 42;
    return cfg;
}

// Label-independent images: any accuracy above chance on held-out data
// would be spurious.
Dataset noise_dataset(int n, int classes, unsigned long long seed) {
    Rng rng(seed);
    Dataset ds;
    ds.h = 8;
    ds.w = 8;
    ds.ch = 1;
    ds.classes = classes;
    ds.name = "noise";
    for (int i = 0; i < n; ++i) {
        LabeledExample ex;
        ex.image.resize(64);
        for (auto& p : ex.image) p = rng.next_double();
        ex.label.assign(std::size_t(classes), 0.0);
        ex.label[std::size_t(i % classes)] = 1.0;
        ds.examples.push_back(ex);
    }
    return ds;
}

}  // namespace

TEST_CASE("learning-rate schedule: warmup peak, continuity, cosine tail") {
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.warmup_epochs = 2;
    cfg.lr = 0.003;
    CHECK(lr_at(cfg, 0) == doctest::Approx(0.0015).epsilon(1e-12));
    CHECK(lr_at(cfg, 1) == doctest::Approx(0.003).epsilon(1e-12));  // peak
    // First cosine epoch equals the peak: the schedule is continuous.
    CHECK(lr_at(cfg, 2) == doctest::Approx(0.003).epsilon(1e-12));
    // Strictly decreasing afterwards, tail near zero.
    for (int e = 3; e < 50; ++e) CHECK(lr_at(cfg, e) < lr_at(cfg, e - 1));
    double tail = cfg.lr * 0.5 * (1.0 + std::cos(kPi * 47.0 / 48.0));
    CHECK(lr_at(cfg, 49) == doctest::Approx(tail).epsilon(1e-12));
    CHECK(lr_at(cfg, 49) < 0.1 * cfg.lr);
    CHECK_THROWS_AS(lr_at(cfg, -1), InvalidArgument);
    CHECK_THROWS_AS(lr_at(cfg, 50), InvalidArgument);
}

TEST_CASE("learning-rate schedule: zero warmup starts the cosine at lr") {
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.warmup_epochs = 0;
    cfg.lr = 0.1;
    CHECK(lr_at(cfg, 0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(lr_at(cfg, 5) ==
          doctest::Approx(0.05 * (1.0 + std::cos(kPi * 0.5))).epsilon(1e-12));
}

TEST_CASE("sgd step fixed points and closed forms") {
    Vec p = {1.0, -2.0};
    Vec v = {0.0, 0.0};
    sgd_step(p, {0.0, 0.0}, v, 0.1, 0.9, 0.0);
    CHECK(p[0] == 1.0);  // zero grad, zero decay, zero velocity: unchanged
    CHECK(p[1] == -2.0);

    // Gradient of f(p)=p^2/2 is p itself: one plain step from 1 with
    // lr=0.1 lands on 0.9.
    p = {1.0};
    v = {0.0};
    sgd_step(p, {1.0}, v, 0.1, 0.0, 0.0);
    CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-15));

    // Momentum accumulates: constant unit gradient, mu=0.9, lr=1.
    p = {0.0};
    v = {0.0};
    sgd_step(p, {1.0}, v, 1.0, 0.9, 0.0);
    CHECK(p[0] == doctest::Approx(-1.0).epsilon(1e-15));
    sgd_step(p, {1.0}, v, 1.0, 0.9, 0.0);
    CHECK(p[0] == doctest::Approx(-2.9).epsilon(1e-15));

    // Weight decay folds into the gradient before momentum.
    p = {2.0};
    v = {0.0};
    sgd_step(p, {0.0}, v, 0.5, 0.0, 0.1);
    CHECK(p[0] == doctest::Approx(2.0 - 0.5 * 0.2).epsilon(1e-15));

    Vec bad = {1.0};
    CHECK_THROWS_AS(sgd_step(bad, {1.0, 2.0}, v, 0.1, 0.0, 0.0),
                    InvalidArgument);
}

TEST_CASE("train config validation") {
    TrainConfig cfg = tiny_config(4);
    CHECK_NOTHROW(validate_train_config(cfg));
    TrainConfig bad = cfg;
    bad.lr = 0.0;
    CHECK_THROWS_AS(validate_train_config(bad), InvalidArgument);
    bad = cfg;
    bad.momentum = 1.0;
    CHECK_THROWS_AS(validate_train_config(bad), InvalidArgument);
    bad = cfg;
    bad.warmup_epochs = 5;  // exceeds epochs=4
    CHECK_THROWS_AS(validate_train_config(bad), InvalidArgument);
    bad = cfg;
    bad.loss = LossKind::supcon;
    bad.mix = MixKind::mixup;
    CHECK_THROWS_AS(validate_train_config(bad), InvalidArgument);
    bad = cfg;
    bad.mix = MixKind::cutmix;
    bad.batch_size = 1;
    CHECK_THROWS_AS(validate_train_config(bad), InvalidArgument);
    bad = cfg;
    bad.alpha_kd = -0.5;
    CHECK_THROWS_AS(validate_train_config(bad), InvalidArgument);
}

TEST_CASE("zero-epoch training returns the seeded initialization") {
    Dataset ds = tiny_dataset();
    TrainConfig cfg = tiny_config(0);
    TrainResult a = train_contrastive(ds, cfg);
    TrainResult b = train_contrastive(ds, cfg);
    CHECK(a.log.empty());
    CHECK(a.encoder.mlp.params == b.encoder.mlp.params);
    CHECK(a.projection.mlp.params == b.projection.mlp.params);
    // Different seed, different init.
    cfg.seed = 43;
    TrainResult c = train_contrastive(ds, cfg);
    CHECK(a.encoder.mlp.params != c.encoder.mlp.params);
}

TEST_CASE("training is bit-deterministic in config and seed") {
    Dataset ds = tiny_dataset();
    TrainConfig cfg = tiny_config(3);
    cfg.mix = MixKind::cutmix;
    TrainResult a = train_contrastive(ds, cfg);
    TrainResult b = train_contrastive(ds, cfg);
    CHECK(a.encoder.mlp.params == b.encoder.mlp.params);
    CHECK(a.projection.mlp.params == b.projection.mlp.params);
    REQUIRE(a.log.size() == 3);
    REQUIRE(b.log.size() == 3);
    for (std::size_t e = 0; e < a.log.size(); ++e) {
        CHECK(a.log[e].epoch == int(e));
        CHECK(a.log[e].loss == b.log[e].loss);
        CHECK(a.log[e].mean_pos_dot == b.log[e].mean_pos_dot);
        CHECK(a.log[e].mean_vanish_factor == b.log[e].mean_vanish_factor);
        CHECK(a.log[e].lr == lr_at(cfg, int(e)));
        CHECK(a.log[e].mean_pos_dot >= -1.0);
        CHECK(a.log[e].mean_pos_dot <= 1.0);
        CHECK(a.log[e].mean_vanish_factor >= 0.0);
        CHECK(a.log[e].mean_vanish_factor <= 1.0);
    }
}

TEST_CASE("contrastive training reduces the loss on separable data") {
    Dataset ds = tiny_dataset(20);
    TrainConfig cfg = tiny_config(12);
    cfg.lr = 0.003;
    TrainResult r = train_contrastive(ds, cfg);
    REQUIRE(r.log.size() == 12);
    CHECK(r.log.back().loss < r.log.front().loss);
    for (const auto& rec : r.log) CHECK(std::isfinite(rec.loss));
}

TEST_CASE("teacher handing matches the loss mode") {
    Dataset ds = tiny_dataset();
    TrainConfig cfg = tiny_config(1);
    TeacherParams oracle;
    oracle.oracle = true;
    oracle.classes = 3;
    // Teacher without a distillation loss is rejected, and vice versa.
    CHECK_THROWS_AS(train_contrastive(ds, cfg, &oracle), InvalidArgument);
    cfg.loss = LossKind::kd;
    cfg.alpha_kd = 0.5;
    CHECK_THROWS_AS(train_contrastive(ds, cfg), InvalidArgument);
    TrainResult r = train_contrastive(ds, cfg, &oracle);
    CHECK(r.log.size() == 1);
    CHECK(std::isfinite(r.log[0].loss));
    // Oracle class-count mismatch is caught up front.
    oracle.classes = 4;
    CHECK_THROWS_AS(train_contrastive(ds, cfg, &oracle), InvalidArgument);
}

TEST_CASE("teacher-only distillation trains") {
    Dataset ds = tiny_dataset();
    TrainConfig cfg = tiny_config(2);
    cfg.loss = LossKind::kd;
    cfg.alpha_kd = 0.0;
    cfg.teacher_only = true;
    cfg.mix = MixKind::mixup;
    TeacherParams oracle;
    oracle.oracle = true;
    oracle.classes = 3;
    TrainResult r = train_contrastive(ds, cfg, &oracle);
    CHECK(r.log.size() == 2);
    CHECK(std::isfinite(r.log[1].loss));
}

TEST_CASE("one-hot loss path trains without mixing") {
    Dataset ds = tiny_dataset();
    TrainConfig cfg = tiny_config(2);
    cfg.loss = LossKind::supcon;
    TrainResult r = train_contrastive(ds, cfg);
    CHECK(r.log.size() == 2);
    CHECK(r.log[0].loss > 0.0);
}

TEST_CASE("diverging parameters abort with replay information") {
    Dataset ds = tiny_dataset();
    TrainConfig cfg = tiny_config(5);
    cfg.lr = 1e200;
    cfg.weight_decay = 1.0;
    cfg.warmup_epochs = 0;
    bool aborted = false;
    try {
        train_contrastive(ds, cfg);
    } catch (const NumericError& e) {
        aborted = true;
        std::string msg = e.what();
        CHECK(msg.find("replay") != std::string::npos);
        CHECK(msg.find("batch_stream=") != std::string::npos);
    }
    CHECK(aborted);
}

TEST_CASE("teacher pretraining fits separable data") {
    Dataset ds = tiny_dataset(30);
    TeacherTrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 30;
    cfg.seed = 7;
    TeacherTrainResult r = train_teacher(ds, cfg);
    CHECK(r.train_accuracy > 0.9);
    CHECK(r.epoch_loss.size() == 30);
    CHECK(r.epoch_loss.back() < r.epoch_loss.front());
    CHECK(r.teacher.classes == 3);
    CHECK(r.teacher.oracle == false);

    // Zero epochs: untouched initialization, reproducible.
    cfg.epochs = 0;
    TeacherTrainResult z1 = train_teacher(ds, cfg);
    TeacherTrainResult z2 = train_teacher(ds, cfg);
    CHECK(z1.epoch_loss.empty());
    CHECK(z1.teacher.mlp.params == z2.teacher.mlp.params);
    CHECK(z1.teacher.mlp.params != r.teacher.mlp.params);
}

TEST_CASE("linear probe memorizes a two-example dataset") {
    Dataset ds = noise_dataset(2, 2, 11);
    EncoderParams enc;
    enc.mlp = make_mlp({64, 16, 8});
    Rng rng(3);
    glorot_init(enc.mlp, rng);
    ProbeConfig cfg;
    cfg.batch_size = 2;
    cfg.seed = 5;
    ProbeResult r = linear_eval(enc, ds, ds, cfg);
    CHECK(r.top1 == 1.0);
}

TEST_CASE("linear probe on label-independent data sits at chance") {
    Dataset train = noise_dataset(210, 3, 21);
    Dataset test = noise_dataset(210, 3, 22);
    EncoderParams enc;
    enc.mlp = make_mlp({64, 32, 16});
    Rng rng(9);
    glorot_init(enc.mlp, rng);
    Vec before = enc.mlp.params;
    ProbeConfig cfg;
    cfg.seed = 13;
    ProbeResult r = linear_eval(enc, train, test, cfg);
    CHECK(std::abs(r.top1 - 1.0 / 3.0) < 0.12);
    CHECK(enc.mlp.params == before);  // encoder untouched
}

TEST_CASE("linear probe rejects mismatched shapes") {
    Dataset train = noise_dataset(12, 3, 31);
    Dataset test2 = noise_dataset(12, 2, 32);
    EncoderParams enc;
    enc.mlp = make_mlp({64, 16, 8});
    Rng rng(4);
    glorot_init(enc.mlp, rng);
    ProbeConfig cfg;
    cfg.batch_size = 6;
    CHECK_THROWS_AS(linear_eval(enc, train, test2, cfg), InvalidArgument);
    EncoderParams wrong;
    wrong.mlp = make_mlp({32, 16, 8});
    glorot_init(wrong.mlp, rng);
    CHECK_THROWS_AS(linear_eval(wrong, train, train, cfg), InvalidArgument);
}

TEST_CASE("metrics csv round-trips bit-exactly") {
    std::vector<TrainLogRecord> log(3);
    log[0] = {0, 1.2345678901234567, 0.59, 0.71, 0.0015, 9.9};
    log[1] = {1, 1.1, 0.25, 1.0 / 3.0, 0.003, 8.8};
    log[2] = {2, 1.05, -0.125, 0.999999999999999, 0.00299, 7.7};
    std::string csv = format_metrics_csv(log);
    CHECK(csv.substr(0, csv.find('\n')) ==
          std::string("epoch,loss,mean_pos_dot,eq4_factor,lr"));
    std::vector<TrainLogRecord> back = parse_metrics_csv(csv);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].epoch == log[i].epoch);
        CHECK(back[i].loss == log[i].loss);
        CHECK(back[i].mean_pos_dot == log[i].mean_pos_dot);
        CHECK(back[i].mean_vanish_factor == log[i].mean_vanish_factor);
        CHECK(back[i].lr == log[i].lr);
        CHECK(back[i].wall_seconds == 0.0);  // never serialized
    }
    CHECK(csv.find("9.9") == std::string::npos);
    // Formatting is parse-stable: a second round trip is identical text.
    CHECK(format_metrics_csv(back) == csv);
}

TEST_CASE("metrics csv parser rejects malformed input") {
    CHECK_THROWS_AS(parse_metrics_csv(""), FormatError);
    CHECK_THROWS_AS(parse_metrics_csv("epoch,loss\n"), FormatError);
    std::string good = "epoch,loss,mean_pos_dot,eq4_factor,lr\n";
    CHECK(parse_metrics_csv(good).empty());
    CHECK_THROWS_AS(parse_metrics_csv(good + "0,1,2,3\n"), FormatError);
    CHECK_THROWS_AS(parse_metrics_csv(good + "0,1,2,3,x\n"), FormatError);
    CHECK_THROWS_AS(parse_metrics_csv(good + "1,1,1,1,1\n0,1,1,1,1\n"),
                    FormatError);
}
