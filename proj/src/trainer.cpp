#include "gscl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "gscl/errors.hpp"

namespace gscl {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Substream ids off the root seed. Every batch gets its own stream so an
// aborted step can be replayed in isolation.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kBatchStreamBase = 2;

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void abort_nonfinite(const char* what, int epoch, int batch,
                                  std::uint64_t stream_id,
                                  unsigned long long seed,
                                  const std::vector<TrainLogRecord>& log) {
    std::string msg = std::string("non-finite ") + what + " at epoch " +
                      std::to_string(epoch) + " batch " +
                      std::to_string(batch) + "; replay: seed=" +
                      std::to_string(seed) +
                      " batch_stream=" + std::to_string(stream_id);
    if (!log.empty()) {
        const TrainLogRecord& r = log.back();
        msg += "; last valid epoch " + std::to_string(r.epoch) +
               " loss=" + fmt_g17(r.loss);
    }
    throw NumericError(msg);
}

void check_common_optim(double lr, double momentum, double weight_decay,
                        int epochs, int batch_size) {
    if (!(lr > 0.0)) throw InvalidArgument("lr must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0))
        throw InvalidArgument("momentum must lie in [0,1)");
    if (!(weight_decay >= 0.0))
        throw InvalidArgument("weight_decay must be >= 0");
    if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
    if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
}

// Softmax cross-entropy on one example; accumulates parameter gradients
// scaled by `grad_scale` and returns the loss value.
double ce_example_step(const Mlp& m, const Vec& x, const Vec& label,
                       double grad_scale, Vec& dparams) {
    MlpCache cache;
    Vec logits = mlp_forward(m, x, &cache);
    Vec logp = log_softmax_with_temperature(logits, 1.0);
    Vec p = softmax_with_temperature(logits, 1.0);
    double ce = 0.0;
    Vec dlogits(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
        ce -= label[k] * logp[k];
        dlogits[k] = (p[k] - label[k]) * grad_scale;
    }
    mlp_backward(m, cache, dlogits, dparams, nullptr);
    return ce;
}

int argmax_of(const Vec& v) {
    int best = 0;
    for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] > v[std::size_t(best)]) best = int(k);
    return best;
}

}  // namespace

void validate_train_config(const TrainConfig& cfg) {
    check_common_optim(cfg.lr, cfg.momentum, cfg.weight_decay, cfg.epochs,
                       cfg.batch_size);
    if (cfg.warmup_epochs < 0 || cfg.warmup_epochs > cfg.epochs)
        throw InvalidArgument("warmup_epochs must lie in [0, epochs]");
    if (!(cfg.tau > 0.0)) throw InvalidArgument("tau must be > 0");
    if (cfg.hidden_dim < 1 || cfg.embed_dim < 1 || cfg.proj_dim < 1)
        throw InvalidArgument("model dims must be >= 1");
    if (!(cfg.beta_alpha > 0.0))
        throw InvalidArgument("beta_alpha must be > 0");
    if (cfg.alpha_kd < 0.0) throw InvalidArgument("alpha_kd must be >= 0");
    if (cfg.mix != MixKind::none && cfg.batch_size < 2)
        throw InvalidArgument("mixing needs batch_size >= 2 for partners");
    if (cfg.loss == LossKind::supcon && cfg.mix != MixKind::none)
        throw InvalidArgument(
            "the one-hot-only loss cannot train on mixed (soft) labels; "
            "use mix=none or a label-similarity loss");
}

double lr_at(const TrainConfig& cfg, int epoch) {
    if (epoch < 0 || epoch >= cfg.epochs)
        throw InvalidArgument("epoch out of schedule range");
    if (epoch < cfg.warmup_epochs)
        return cfg.lr * double(epoch + 1) / double(cfg.warmup_epochs);
    double progress = double(epoch - cfg.warmup_epochs) /
                      double(cfg.epochs - cfg.warmup_epochs);
    return cfg.lr * 0.5 * (1.0 + std::cos(kPi * progress));
}

void sgd_step(Vec& params, const Vec& grads, Vec& velocity, double lr,
              double momentum, double weight_decay) {
    if (params.size() != grads.size() || params.size() != velocity.size())
        throw InvalidArgument("sgd_step size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        double g = grads[i] + weight_decay * params[i];
        velocity[i] = momentum * velocity[i] + g;
        params[i] -= lr * velocity[i];
    }
}

TrainResult train_contrastive(const Dataset& ds, const TrainConfig& cfg,
                              const TeacherParams* teacher) {
    validate_dataset(ds);
    validate_train_config(cfg);
    const bool needs_teacher = cfg.loss == LossKind::kd;
    if (needs_teacher && teacher == nullptr)
        throw InvalidArgument("distillation loss needs a teacher");
    if (!needs_teacher && teacher != nullptr)
        throw InvalidArgument("teacher given but the loss never reads it");
    if (std::size_t(cfg.batch_size) > ds.size())
        throw InvalidArgument("batch_size exceeds dataset size");
    if (teacher != nullptr) {
        if (teacher->oracle) {
            if (teacher->classes != ds.classes)
                throw InvalidArgument("oracle teacher class count mismatch");
        } else if (teacher->mlp.in_dim() != ds.image_dim() ||
                   teacher->mlp.out_dim() != ds.classes) {
            throw InvalidArgument("teacher dims do not match the dataset");
        }
    }

    Rng root(cfg.seed);
    TrainResult res;
    res.encoder.mlp =
        make_mlp({ds.image_dim(), cfg.hidden_dim, cfg.embed_dim});
    res.projection.mlp =
        make_mlp({cfg.embed_dim, cfg.embed_dim, cfg.proj_dim});
    Rng init_rng = root.substream(kInitStream);
    glorot_init(res.encoder.mlp, init_rng);
    glorot_init(res.projection.mlp, init_rng);
    if (cfg.epochs == 0) return res;

    const KdMode mode =
        cfg.teacher_only ? KdMode::teacher_only : KdMode::weighted;
    BatchSampler sampler(ds.size(), root.substream(kShuffleStream));
    Vec v_enc(res.encoder.mlp.params.size(), 0.0);
    Vec v_proj(res.projection.mlp.params.size(), 0.0);
    const int steps = int(ds.size() / std::size_t(cfg.batch_size));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        const double lr = lr_at(cfg, epoch);
        double loss_sum = 0.0;
        std::size_t anchor_count = 0;
        double pos_dot_sum = 0.0, vanish_sum = 0.0;

        for (int b = 0; b < steps; ++b) {
            const std::uint64_t stream_id =
                kBatchStreamBase +
                std::uint64_t(epoch) * std::uint64_t(steps) +
                std::uint64_t(b);
            Rng brng = root.substream(stream_id);
            std::vector<LabeledExample> batch;
            batch.reserve(std::size_t(cfg.batch_size));
            for (std::size_t i : sampler.next(std::size_t(cfg.batch_size)))
                batch.push_back(ds.examples[i]);
            MultiViewBatch mv =
                build_multiview_batch(batch, ds.h, ds.w, ds.ch, ds.classes,
                                      cfg.aug, cfg.mix, cfg.beta_alpha, brng);

            const int n_views = int(mv.views.size());
            ProjectedBatch pb;
            pb.tau = cfg.tau;
            auto ecache = std::vector<MlpCache>(std::size_t(n_views));
            auto pcache = std::vector<MlpCache>(std::size_t(n_views));
            for (int vi = 0; vi < n_views; ++vi) {
                const MixedView& view = mv.views[std::size_t(vi)];
                Vec x = standardize_pixels(view.image);
                Vec h = encode(res.encoder, x, &ecache[std::size_t(vi)]);
                Projected pr;
                try {
                    pr = project(res.projection, h, &pcache[std::size_t(vi)]);
                } catch (const NumericError&) {
                    abort_nonfinite("projection", epoch, b, stream_id,
                                    cfg.seed, res.log);
                }
                if (!all_finite(pr.w))
                    abort_nonfinite("projection", epoch, b, stream_id,
                                    cfg.seed, res.log);
                pb.w.push_back(std::move(pr.w));
                pb.z.push_back(std::move(pr.z));
                pb.labels.push_back(view.soft_label);
                if (teacher != nullptr)
                    pb.teacher_preds.push_back(
                        teacher_predict(*teacher, x, &view.soft_label));
            }

            LossBreakdown lb;
            switch (cfg.loss) {
                case LossKind::supcon: lb = supcon_loss(pb); break;
                case LossKind::genscl: lb = genscl_loss(pb); break;
                case LossKind::kd:
                    lb = kd_genscl_loss(pb, cfg.alpha_kd, mode);
                    break;
            }
            if (!std::isfinite(lb.total))
                abort_nonfinite("loss", epoch, b, stream_id, cfg.seed,
                                res.log);
            GradContribStats st =
                gradient_contribution_stats(pb, cfg.pos_threshold);

            std::vector<Vec> dws =
                loss_backward(pb, cfg.loss, cfg.alpha_kd, mode);
            Vec d_enc(res.encoder.mlp.params.size(), 0.0);
            Vec d_proj(res.projection.mlp.params.size(), 0.0);
            for (int vi = 0; vi < n_views; ++vi) {
                Vec dh;
                mlp_backward(res.projection.mlp, pcache[std::size_t(vi)],
                             dws[std::size_t(vi)], d_proj, &dh);
                mlp_backward(res.encoder.mlp, ecache[std::size_t(vi)], dh,
                             d_enc, nullptr);
            }
            sgd_step(res.encoder.mlp.params, d_enc, v_enc, lr, cfg.momentum,
                     cfg.weight_decay);
            sgd_step(res.projection.mlp.params, d_proj, v_proj, lr,
                     cfg.momentum, cfg.weight_decay);

            loss_sum += lb.total;
            anchor_count += std::size_t(n_views);
            pos_dot_sum += st.mean_pos_dot;
            vanish_sum += st.mean_vanish_factor;
        }

        TrainLogRecord rec;
        rec.epoch = epoch;
        rec.loss = loss_sum / double(anchor_count);
        rec.mean_pos_dot = pos_dot_sum / double(steps);
        rec.mean_vanish_factor = vanish_sum / double(steps);
        rec.lr = lr;
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();
        res.log.push_back(rec);
    }
    return res;
}

TeacherTrainResult train_teacher(const Dataset& ds,
                                 const TeacherTrainConfig& cfg) {
    validate_dataset(ds);
    check_common_optim(cfg.lr, cfg.momentum, cfg.weight_decay, cfg.epochs,
                       cfg.batch_size);
    if (cfg.hidden_dim < 1) throw InvalidArgument("hidden_dim must be >= 1");
    if (!(cfg.tau_soft > 0.0)) throw InvalidArgument("tau_soft must be > 0");
    if (std::size_t(cfg.batch_size) > ds.size())
        throw InvalidArgument("batch_size exceeds dataset size");

    Rng root(cfg.seed);
    TeacherTrainResult out;
    out.teacher.mlp = make_mlp({ds.image_dim(), cfg.hidden_dim, ds.classes});
    out.teacher.tau_soft = cfg.tau_soft;
    out.teacher.classes = ds.classes;
    Rng init_rng = root.substream(kInitStream);
    glorot_init(out.teacher.mlp, init_rng);

    if (cfg.epochs > 0) {
        BatchSampler sampler(ds.size(), root.substream(kShuffleStream));
        Vec vel(out.teacher.mlp.params.size(), 0.0);
        const int steps = int(ds.size() / std::size_t(cfg.batch_size));
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            double loss_sum = 0.0;
            std::size_t seen = 0;
            for (int b = 0; b < steps; ++b) {
                Vec dpar(out.teacher.mlp.params.size(), 0.0);
                double batch_loss = 0.0;
                for (std::size_t i :
                     sampler.next(std::size_t(cfg.batch_size))) {
                    const LabeledExample& ex = ds.examples[i];
                    batch_loss += ce_example_step(
                        out.teacher.mlp, standardize_pixels(ex.image),
                        ex.label, 1.0 / double(cfg.batch_size), dpar);
                }
                if (!std::isfinite(batch_loss))
                    throw NumericError(
                        "non-finite teacher loss at epoch " +
                        std::to_string(epoch) + " batch " +
                        std::to_string(b) + "; replay: seed=" +
                        std::to_string(cfg.seed));
                sgd_step(out.teacher.mlp.params, dpar, vel, cfg.lr,
                         cfg.momentum, cfg.weight_decay);
                loss_sum += batch_loss;
                seen += std::size_t(cfg.batch_size);
            }
            out.epoch_loss.push_back(loss_sum / double(seen));
        }
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        Vec logits = mlp_forward(out.teacher.mlp,
                                 standardize_pixels(ds.examples[i].image));
        if (argmax_of(logits) == ds.label_of(i)) ++correct;
    }
    out.train_accuracy = double(correct) / double(ds.size());
    return out;
}

ProbeResult linear_eval(const EncoderParams& encoder, const Dataset& ds_train,
                        const Dataset& ds_test, const ProbeConfig& cfg) {
    validate_dataset(ds_train);
    validate_dataset(ds_test);
    if (ds_train.classes != ds_test.classes)
        throw InvalidArgument("train/test class count mismatch");
    if (encoder.mlp.in_dim() != ds_train.image_dim() ||
        encoder.mlp.in_dim() != ds_test.image_dim())
        throw InvalidArgument("encoder input dim does not match the data");
    check_common_optim(cfg.lr, cfg.momentum, 0.0, cfg.epochs, cfg.batch_size);
    if (std::size_t(cfg.batch_size) > ds_train.size())
        throw InvalidArgument("batch_size exceeds dataset size");

    // The encoder is frozen: features are computed once, up front.
    std::vector<Vec> f_train, f_test;
    f_train.reserve(ds_train.size());
    for (const auto& ex : ds_train.examples)
        f_train.push_back(encode(encoder, standardize_pixels(ex.image)));
    f_test.reserve(ds_test.size());
    for (const auto& ex : ds_test.examples)
        f_test.push_back(encode(encoder, standardize_pixels(ex.image)));

    ProbeResult out;
    out.probe.mlp = make_mlp({encoder.mlp.out_dim(), ds_train.classes});
    Rng root(cfg.seed);
    Rng init_rng = root.substream(kInitStream);
    glorot_init(out.probe.mlp, init_rng);

    if (cfg.epochs > 0) {
        BatchSampler sampler(ds_train.size(), root.substream(kShuffleStream));
        Vec vel(out.probe.mlp.params.size(), 0.0);
        const int steps = int(ds_train.size() / std::size_t(cfg.batch_size));
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            for (int b = 0; b < steps; ++b) {
                Vec dpar(out.probe.mlp.params.size(), 0.0);
                double batch_loss = 0.0;
                for (std::size_t i :
                     sampler.next(std::size_t(cfg.batch_size)))
                    batch_loss += ce_example_step(
                        out.probe.mlp, f_train[i], ds_train.examples[i].label,
                        1.0 / double(cfg.batch_size), dpar);
                if (!std::isfinite(batch_loss))
                    throw NumericError("non-finite probe loss; replay: seed=" +
                                       std::to_string(cfg.seed));
                sgd_step(out.probe.mlp.params, dpar, vel, cfg.lr,
                         cfg.momentum, 0.0);
            }
        }
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds_test.size(); ++i) {
        Vec logits = mlp_forward(out.probe.mlp, f_test[i]);
        if (argmax_of(logits) == ds_test.label_of(i)) ++correct;
    }
    out.top1 = double(correct) / double(ds_test.size());
    return out;
}

// Column names are a frozen external contract for downstream tooling.
const char* const kMetricsHeader = "epoch,loss,mean_pos_dot,eq4_factor,lr";

std::string format_metrics_csv(const std::vector<TrainLogRecord>& log) {
    std::string out = kMetricsHeader;
    out += '\n';
    for (const TrainLogRecord& r : log) {
        out += std::to_string(r.epoch);
        out += ',';
        out += fmt_g17(r.loss);
        out += ',';
        out += fmt_g17(r.mean_pos_dot);
        out += ',';
        out += fmt_g17(r.mean_vanish_factor);
        out += ',';
        out += fmt_g17(r.lr);
        out += '\n';
    }
    return out;
}

std::vector<TrainLogRecord> parse_metrics_csv(const std::string& text) {
    std::vector<TrainLogRecord> log;
    std::size_t pos = 0;
    bool saw_header = false;
    int last_epoch = -1;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != kMetricsHeader)
                throw FormatError("bad metrics header: " + line);
            saw_header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(start));
                break;
            }
            cells.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (cells.size() != 5)
            throw FormatError("metrics row needs 5 cells: " + line);
        TrainLogRecord r;
        try {
            std::size_t used = 0;
            r.epoch = std::stoi(cells[0], &used);
            if (used != cells[0].size()) throw std::invalid_argument(cells[0]);
            auto num = [](const std::string& s) {
                std::size_t u = 0;
                double v = std::stod(s, &u);
                if (u != s.size()) throw std::invalid_argument(s);
                return v;
            };
            r.loss = num(cells[1]);
            r.mean_pos_dot = num(cells[2]);
            r.mean_vanish_factor = num(cells[3]);
            r.lr = num(cells[4]);
        } catch (const std::exception&) {
            throw FormatError("unparsable metrics row: " + line);
        }
        if (r.epoch <= last_epoch)
            throw FormatError("metrics epochs must increase");
        last_epoch = r.epoch;
        log.push_back(r);
    }
    if (!saw_header) throw FormatError("empty metrics stream");
    return log;
}

}  // namespace gscl
