// Command-line front end: dataset generation, teacher pretraining,
// contrastive training, linear evaluation, gradient checking, and metric
// merging for external plotting.
//
// Exit codes are a stable scripting contract:
//   0 success, 1 property failure, 2 usage/config, 3 I/O, 4 numeric abort.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gscl/config.hpp"
#include "gscl/data.hpp"
#include "gscl/errors.hpp"
#include "gscl/loss.hpp"
#include "gscl/mixing.hpp"
#include "gscl/model.hpp"
#include "gscl/numerics.hpp"
#include "gscl/trainer.hpp"

namespace fs = std::filesystem;
using namespace gscl;

namespace {

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

// Referenced input paths must resolve at validation time; a missing one
// is a configuration mistake (exit 2), not a runtime I/O failure.
void require_input(const std::string& path, const char* what) {
    if (path.empty())
        throw ConfigError(std::string(what) + " path is required");
    if (!fs::exists(path))
        throw ConfigError(std::string(what) + " not found: " + path);
}

void require_value(const std::string& value, const char* flag,
                   CLI::App* cmd) {
    if (!value.empty()) return;
    throw ConfigError(std::string(flag) +
                      " is required (flag or config key)\n" + cmd->help());
}

unsigned long long parse_u64_strict(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string(what) + " is not an unsigned integer: " +
                          s);
    }
}

// Flag > config file > environment fallback > default 0.
unsigned long long resolve_seed(CLI::App* cmd, const KeyValueConfig& kv,
                                unsigned long long flag_value) {
    if (cmd->count("--seed") > 0) return flag_value;
    if (kv.has("seed")) return kv.get_u64("seed");
    if (const char* env = std::getenv("GSCL_SEED"))
        return parse_u64_strict(env, "GSCL_SEED");
    return 0;
}

// Merges a loaded config file under the command's flags: an explicit flag
// always wins, otherwise the file value is used, otherwise the default.
struct Merger {
    CLI::App* cmd;
    KeyValueConfig kv;

    bool from_file(const char* flag, const std::string& key) const {
        return cmd->count(flag) == 0 && kv.has(key);
    }
    double d(const char* flag, const std::string& key, double v) const {
        return from_file(flag, key) ? kv.get_double(key) : v;
    }
    int i(const char* flag, const std::string& key, int v) const {
        return from_file(flag, key) ? kv.get_int(key) : v;
    }
    std::string s(const char* flag, const std::string& key,
                  const std::string& v) const {
        return from_file(flag, key) ? kv.get_string(key) : v;
    }
    // For --no-x style switches backed by an x_enabled config key.
    bool enabled(const char* off_flag, const std::string& key) const {
        if (cmd->count(off_flag) > 0) return false;
        if (kv.has(key)) return kv.get_bool(key);
        return true;
    }
};

Merger make_merger(CLI::App* cmd, const std::string& config_path,
                   const std::vector<std::string>& allowed) {
    Merger m{cmd, {}};
    if (!config_path.empty()) {
        require_input(config_path, "config file");
        m.kv = KeyValueConfig::load(config_path);
        m.kv.check_known(allowed);
    }
    return m;
}

void maybe_dump(const std::string& dump_path, const KeyValueConfig& eff) {
    if (!dump_path.empty()) write_text_file(dump_path, eff.dump());
}

double vec_rel_err(const Vec& a, const Vec& b) {
    double diff = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    double scale = std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
    return std::sqrt(diff) / scale;
}

// ----------------------------------------------------------------- gen-data

struct GenArgs {
    int classes = 3, per_class = 200, size = 8;
    double noise = 0.05;
    unsigned long long seed = 0;
    std::string out, config, dump;
};

const std::vector<std::string> kGenKeys = {"classes", "per_class", "size",
                                           "noise",   "seed",      "out"};

int run_gen_data(CLI::App* cmd, const GenArgs& a) {
    Merger m = make_merger(cmd, a.config, kGenKeys);
    int classes = m.i("--classes", "classes", a.classes);
    int per_class = m.i("--per-class", "per_class", a.per_class);
    int size = m.i("--size", "size", a.size);
    double noise = m.d("--noise", "noise", a.noise);
    std::string out = m.s("--out", "out", a.out);
    unsigned long long seed = resolve_seed(cmd, m.kv, a.seed);

    KeyValueConfig eff;
    eff.set("classes", std::to_string(classes));
    eff.set("per_class", std::to_string(per_class));
    eff.set("size", std::to_string(size));
    eff.set("noise", fmt_g17(noise));
    eff.set("seed", std::to_string(seed));
    eff.set("out", out);
    maybe_dump(a.dump, eff);

    require_value(out, "--out", cmd);
    Rng rng(seed);
    Dataset ds = generate_synthetic(classes, per_class, size, size, noise, rng);
    save_dataset(out, ds);
    std::printf("{\"classes\":%d,\"examples\":%zu,\"h\":%d,\"w\":%d,\"ch\":%d}\n",
                ds.classes, ds.size(), ds.h, ds.w, ds.ch);
    return 0;
}

// ------------------------------------------------------------ train-teacher

struct TeachArgs {
    std::string data, out, config, dump;
    int epochs = 30, batch = 32, hidden = 64;
    double lr = 0.05, momentum = 0.9, wd = 1e-4;
    unsigned long long seed = 0;
};

const std::vector<std::string> kTeachKeys = {
    "data", "out", "epochs", "batch", "hidden", "lr", "momentum", "wd",
    "seed"};

int run_train_teacher(CLI::App* cmd, const TeachArgs& a) {
    Merger m = make_merger(cmd, a.config, kTeachKeys);
    TeacherTrainConfig cfg;
    std::string data = m.s("--data", "data", a.data);
    std::string out = m.s("--out", "out", a.out);
    cfg.epochs = m.i("--epochs", "epochs", a.epochs);
    cfg.batch_size = m.i("--batch", "batch", a.batch);
    cfg.hidden_dim = m.i("--hidden", "hidden", a.hidden);
    cfg.lr = m.d("--lr", "lr", a.lr);
    cfg.momentum = m.d("--momentum", "momentum", a.momentum);
    cfg.weight_decay = m.d("--wd", "wd", a.wd);
    cfg.seed = resolve_seed(cmd, m.kv, a.seed);

    KeyValueConfig eff;
    eff.set("data", data);
    eff.set("out", out);
    eff.set("epochs", std::to_string(cfg.epochs));
    eff.set("batch", std::to_string(cfg.batch_size));
    eff.set("hidden", std::to_string(cfg.hidden_dim));
    eff.set("lr", fmt_g17(cfg.lr));
    eff.set("momentum", fmt_g17(cfg.momentum));
    eff.set("wd", fmt_g17(cfg.weight_decay));
    eff.set("seed", std::to_string(cfg.seed));
    maybe_dump(a.dump, eff);

    require_value(data, "--data", cmd);
    require_value(out, "--out", cmd);
    require_input(data, "dataset");
    Dataset ds = load_dataset(data);
    TeacherTrainResult r = train_teacher(ds, cfg);
    save_checkpoint(out, {r.teacher.mlp});
    std::printf("{\"train_accuracy\":%s,\"epochs\":%d}\n",
                fmt_g17(r.train_accuracy).c_str(), cfg.epochs);
    return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
    std::string data, out, metrics, config, dump;
    std::string loss = "genscl";
    std::string alpha_kd = "0";
    std::string teacher;  // path, or "oracle"
    double teacher_tau = 1.0, oracle_eps = 0.1;
    std::string mix = "none";
    double beta_alpha = 1.0, tau = 0.1, lr = 0.003, momentum = 0.9,
           wd = 1e-4, pos_threshold = 0.5, flip_prob = 0.5, noise_std = 0.05;
    int epochs = 50, batch = 32, warmup = 2, hidden = 64, embed = 32,
        proj = 16, crop_pad = 1;
    unsigned long long seed = 0;
};

const std::vector<std::string> kTrainKeys = {
    "data",          "out",          "metrics",       "loss",
    "alpha_kd",      "teacher",      "teacher_tau",   "oracle_eps",
    "mix",           "beta_alpha",   "tau",           "epochs",
    "batch",         "lr",           "momentum",      "wd",
    "warmup",        "hidden",       "embed",         "proj",
    "pos_threshold", "crop_pad",     "flip_prob",     "noise_std",
    "crop_enabled",  "flip_enabled", "noise_enabled", "seed"};

int run_train(CLI::App* cmd, const TrainArgs& a) {
    Merger m = make_merger(cmd, a.config, kTrainKeys);
    std::string data = m.s("--data", "data", a.data);
    std::string out = m.s("--out", "out", a.out);
    std::string metrics = m.s("--metrics", "metrics", a.metrics);
    std::string loss_str = m.s("--loss", "loss", a.loss);
    std::string alpha_str = m.s("--alpha-kd", "alpha_kd", a.alpha_kd);
    std::string teacher_str = m.s("--teacher", "teacher", a.teacher);

    TrainConfig tc;
    tc.epochs = m.i("--epochs", "epochs", a.epochs);
    tc.batch_size = m.i("--batch", "batch", a.batch);
    tc.lr = m.d("--lr", "lr", a.lr);
    tc.momentum = m.d("--momentum", "momentum", a.momentum);
    tc.weight_decay = m.d("--wd", "wd", a.wd);
    tc.warmup_epochs = m.i("--warmup", "warmup", a.warmup);
    tc.tau = m.d("--tau", "tau", a.tau);
    tc.beta_alpha = m.d("--beta-alpha", "beta_alpha", a.beta_alpha);
    tc.hidden_dim = m.i("--hidden", "hidden", a.hidden);
    tc.embed_dim = m.i("--embed", "embed", a.embed);
    tc.proj_dim = m.i("--proj", "proj", a.proj);
    tc.pos_threshold = m.d("--pos-threshold", "pos_threshold",
                           a.pos_threshold);
    tc.aug.crop_pad = m.i("--crop-pad", "crop_pad", a.crop_pad);
    tc.aug.flip_prob = m.d("--flip-prob", "flip_prob", a.flip_prob);
    tc.aug.noise_std = m.d("--noise-std", "noise_std", a.noise_std);
    tc.aug.crop_enabled = m.enabled("--no-crop", "crop_enabled");
    tc.aug.flip_enabled = m.enabled("--no-flip", "flip_enabled");
    tc.aug.noise_enabled = m.enabled("--no-noise", "noise_enabled");
    tc.seed = resolve_seed(cmd, m.kv, a.seed);
    double teacher_tau = m.d("--teacher-tau", "teacher_tau", a.teacher_tau);
    double oracle_eps = m.d("--oracle-eps", "oracle_eps", a.oracle_eps);
    tc.mix = mix_kind_from_string(m.s("--mix", "mix", a.mix));

    // The distillation weight is either a nonnegative number or the
    // literal "teacher-only"; any positive weight (or teacher-only mode)
    // upgrades a label-similarity run to the teacher-weighted loss.
    LossKind base = loss_kind_from_string(loss_str);
    if (alpha_str == "teacher-only") {
        tc.teacher_only = true;
        tc.alpha_kd = 0.0;
    } else {
        try {
            std::size_t used = 0;
            tc.alpha_kd = std::stod(alpha_str, &used);
            if (used != alpha_str.size())
                throw std::invalid_argument(alpha_str);
        } catch (const std::exception&) {
            throw ConfigError(
                "--alpha-kd must be a number or 'teacher-only', got: " +
                alpha_str);
        }
        if (tc.alpha_kd < 0.0)
            throw ConfigError("--alpha-kd must be >= 0");
    }
    tc.loss = base;
    if (tc.teacher_only || tc.alpha_kd > 0.0) {
        if (base == LossKind::supcon)
            throw ConfigError(
                "distillation weighting needs a label-similarity loss; "
                "use --loss genscl or kd");
        tc.loss = LossKind::kd;
    }

    KeyValueConfig eff;
    eff.set("data", data);
    eff.set("out", out);
    eff.set("metrics", metrics);
    eff.set("loss", loss_str);
    eff.set("alpha_kd", alpha_str);
    eff.set("teacher", teacher_str);
    eff.set("teacher_tau", fmt_g17(teacher_tau));
    eff.set("oracle_eps", fmt_g17(oracle_eps));
    eff.set("mix", to_string(tc.mix));
    eff.set("beta_alpha", fmt_g17(tc.beta_alpha));
    eff.set("tau", fmt_g17(tc.tau));
    eff.set("epochs", std::to_string(tc.epochs));
    eff.set("batch", std::to_string(tc.batch_size));
    eff.set("lr", fmt_g17(tc.lr));
    eff.set("momentum", fmt_g17(tc.momentum));
    eff.set("wd", fmt_g17(tc.weight_decay));
    eff.set("warmup", std::to_string(tc.warmup_epochs));
    eff.set("hidden", std::to_string(tc.hidden_dim));
    eff.set("embed", std::to_string(tc.embed_dim));
    eff.set("proj", std::to_string(tc.proj_dim));
    eff.set("pos_threshold", fmt_g17(tc.pos_threshold));
    eff.set("crop_pad", std::to_string(tc.aug.crop_pad));
    eff.set("flip_prob", fmt_g17(tc.aug.flip_prob));
    eff.set("noise_std", fmt_g17(tc.aug.noise_std));
    eff.set("crop_enabled", tc.aug.crop_enabled ? "true" : "false");
    eff.set("flip_enabled", tc.aug.flip_enabled ? "true" : "false");
    eff.set("noise_enabled", tc.aug.noise_enabled ? "true" : "false");
    eff.set("seed", std::to_string(tc.seed));
    maybe_dump(a.dump, eff);

    require_value(data, "--data", cmd);
    require_value(out, "--out", cmd);
    require_value(metrics, "--metrics", cmd);
    require_input(data, "dataset");
    Dataset ds = load_dataset(data);

    TeacherParams teacher;
    bool have_teacher = !teacher_str.empty();
    if (tc.loss == LossKind::kd && !have_teacher)
        throw ConfigError(
            "this loss mode needs --teacher (checkpoint path or 'oracle')");
    if (tc.loss != LossKind::kd && have_teacher)
        throw ConfigError("--teacher given but the loss never uses it");
    if (have_teacher) {
        if (teacher_str == "oracle") {
            teacher.oracle = true;
            teacher.classes = ds.classes;
            teacher.oracle_eps = oracle_eps;
        } else {
            require_input(teacher_str, "teacher checkpoint");
            std::vector<Mlp> blocks = load_checkpoint(teacher_str);
            if (blocks.empty())
                throw FormatError("teacher checkpoint has no blocks");
            teacher.mlp = blocks[0];
            teacher.classes = teacher.mlp.out_dim();
        }
        teacher.tau_soft = teacher_tau;
    }

    TrainResult r =
        train_contrastive(ds, tc, have_teacher ? &teacher : nullptr);
    save_checkpoint(out, {r.encoder.mlp, r.projection.mlp});
    write_text_file(metrics, format_metrics_csv(r.log));
    if (r.log.empty()) {
        std::printf("{\"epochs\":0}\n");
    } else {
        const TrainLogRecord& last = r.log.back();
        std::printf("{\"epochs\":%d,\"final_loss\":%s,\"final_pos_dot\":%s}\n",
                    tc.epochs, fmt_g17(last.loss).c_str(),
                    fmt_g17(last.mean_pos_dot).c_str());
    }
    return 0;
}

// -------------------------------------------------------------- linear-eval

struct EvalArgs {
    std::string checkpoint, train_data, test_data, config, dump;
    int epochs = 100, batch = 32;
    double lr = 0.1, momentum = 0.9;
    unsigned long long seed = 0;
};

const std::vector<std::string> kEvalKeys = {
    "checkpoint", "train_data", "test_data", "epochs",
    "batch",      "lr",         "momentum",  "seed"};

int run_linear_eval(CLI::App* cmd, const EvalArgs& a) {
    Merger m = make_merger(cmd, a.config, kEvalKeys);
    std::string checkpoint = m.s("--checkpoint", "checkpoint", a.checkpoint);
    std::string train_path = m.s("--train-data", "train_data", a.train_data);
    std::string test_path = m.s("--test-data", "test_data", a.test_data);
    ProbeConfig pc;
    pc.epochs = m.i("--epochs", "epochs", a.epochs);
    pc.batch_size = m.i("--batch", "batch", a.batch);
    pc.lr = m.d("--lr", "lr", a.lr);
    pc.momentum = m.d("--momentum", "momentum", a.momentum);
    pc.seed = resolve_seed(cmd, m.kv, a.seed);

    KeyValueConfig eff;
    eff.set("checkpoint", checkpoint);
    eff.set("train_data", train_path);
    eff.set("test_data", test_path);
    eff.set("epochs", std::to_string(pc.epochs));
    eff.set("batch", std::to_string(pc.batch_size));
    eff.set("lr", fmt_g17(pc.lr));
    eff.set("momentum", fmt_g17(pc.momentum));
    eff.set("seed", std::to_string(pc.seed));
    maybe_dump(a.dump, eff);

    require_value(checkpoint, "--checkpoint", cmd);
    require_value(train_path, "--train-data", cmd);
    require_value(test_path, "--test-data", cmd);
    require_input(checkpoint, "checkpoint");
    require_input(train_path, "train dataset");
    require_input(test_path, "test dataset");

    std::vector<Mlp> blocks = load_checkpoint(checkpoint);
    if (blocks.empty()) throw FormatError("checkpoint has no blocks");
    EncoderParams enc;
    enc.mlp = blocks[0];
    Dataset ds_train = load_dataset(train_path);
    Dataset ds_test = load_dataset(test_path);
    ProbeResult r = linear_eval(enc, ds_train, ds_test, pc);
    std::printf("{\"top1\":%s}\n", fmt_g17(r.top1).c_str());
    return 0;
}

// ---------------------------------------------------------------- gradcheck

struct GradArgs {
    int trials = 100;
    unsigned long long seed = 0;
    bool inject_sign_flip = false;
    std::string config, dump;
};

const std::vector<std::string> kGradKeys = {"trials", "seed",
                                            "inject_sign_flip"};

// Soft labels shaped like the mixing pipeline: a convex blend of two
// one-hot rows.
Vec blended_label(Rng& rng, int classes) {
    Vec y(std::size_t(classes), 0.0);
    int p = rng.uniform_int(0, classes - 1);
    int q = rng.uniform_int(0, classes - 2);
    if (q >= p) ++q;
    double lam = rng.next_double();
    y[std::size_t(p)] += lam;
    y[std::size_t(q)] += 1.0 - lam;
    return y;
}

int run_gradcheck(CLI::App* cmd, const GradArgs& a) {
    Merger m = make_merger(cmd, a.config, kGradKeys);
    int trials = m.i("--trials", "trials", a.trials);
    bool inject = a.inject_sign_flip ||
                  (cmd->count("--inject-sign-flip") == 0 &&
                   m.kv.has("inject_sign_flip") &&
                   m.kv.get_bool("inject_sign_flip"));
    unsigned long long seed = resolve_seed(cmd, m.kv, a.seed);
    if (trials < 1) throw ConfigError("--trials must be >= 1");

    KeyValueConfig eff;
    eff.set("trials", std::to_string(trials));
    eff.set("seed", std::to_string(seed));
    eff.set("inject_sign_flip", inject ? "true" : "false");
    maybe_dump(a.dump, eff);

    const double tol = 1e-5;
    const int sizes[] = {4, 6, 8};
    const int dims[] = {3, 8, 16};
    const double taus[] = {0.07, 0.5, 1.0};
    Rng root(seed);
    double max_err = 0.0;
    long long failed_trial = -1;
    for (int t = 0; t < trials; ++t) {
        Rng rng = root.substream(std::uint64_t(t));
        int n = sizes[rng.uniform_int(0, 2)];
        int dim = dims[rng.uniform_int(0, 2)];
        double tau = taus[rng.uniform_int(0, 2)];
        ProjectedBatch pb;
        pb.tau = tau;
        for (int i = 0; i < n; ++i) {
            Vec w(std::size_t(dim), 0.0);
            for (auto& v : w) v = rng.normal() * (0.5 + rng.next_double());
            pb.w.push_back(w);
            pb.z.push_back(l2_normalize(w));
            pb.labels.push_back(blended_label(rng, 3));
        }
        int anchor = rng.uniform_int(0, n - 1);
        AnchorGradient g = anchor_gradient_analytic(pb, anchor);
        if (inject)
            for (auto& v : g.d_w) v = -v;
        Vec fd(std::size_t(dim), 0.0);
        const double h = 1e-6;
        for (int d = 0; d < dim; ++d) {
            double orig = pb.w[std::size_t(anchor)][std::size_t(d)];
            pb.w[std::size_t(anchor)][std::size_t(d)] = orig + h;
            pb.z[std::size_t(anchor)] = l2_normalize(pb.w[std::size_t(anchor)]);
            double up = genscl_loss(pb).per_anchor[std::size_t(anchor)];
            pb.w[std::size_t(anchor)][std::size_t(d)] = orig - h;
            pb.z[std::size_t(anchor)] = l2_normalize(pb.w[std::size_t(anchor)]);
            double dn = genscl_loss(pb).per_anchor[std::size_t(anchor)];
            pb.w[std::size_t(anchor)][std::size_t(d)] = orig;
            pb.z[std::size_t(anchor)] = l2_normalize(pb.w[std::size_t(anchor)]);
            fd[std::size_t(d)] = (up - dn) / (2.0 * h);
        }
        double rel = vec_rel_err(g.d_w, fd);
        if (rel > max_err) max_err = rel;
        if (rel >= tol && failed_trial < 0) failed_trial = t;
    }
    if (failed_trial < 0) {
        std::printf("{\"trials\":%d,\"max_rel_err\":%s,\"tolerance\":%s}\n",
                    trials, fmt_g17(max_err).c_str(), fmt_g17(tol).c_str());
        return 0;
    }
    std::printf(
        "{\"trials\":%d,\"max_rel_err\":%s,\"tolerance\":%s,"
        "\"failed_trial\":%lld,\"replay_seed\":%llu,\"replay_substream\":%lld}\n",
        trials, fmt_g17(max_err).c_str(), fmt_g17(tol).c_str(), failed_trial,
        seed, failed_trial);
    return 1;
}

// ----------------------------------------------------------------- diagnose

struct DiagArgs {
    std::vector<std::string> inputs;
    std::string out, config, dump;
};

const std::vector<std::string> kDiagKeys = {"inputs", "out"};

int run_diagnose(CLI::App* cmd, const DiagArgs& a) {
    Merger m = make_merger(cmd, a.config, kDiagKeys);
    std::vector<std::string> inputs = a.inputs;
    if (cmd->count("--in") == 0 && m.kv.has("inputs")) {
        inputs.clear();
        std::string joined = m.kv.get_string("inputs");
        std::size_t start = 0;
        while (start <= joined.size()) {
            std::size_t comma = joined.find(',', start);
            if (comma == std::string::npos) {
                inputs.push_back(joined.substr(start));
                break;
            }
            inputs.push_back(joined.substr(start, comma - start));
            start = comma + 1;
        }
    }
    std::string out = m.s("--out", "out", a.out);

    if (!a.dump.empty()) {
        KeyValueConfig eff;
        std::string joined;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            if (i) joined += ',';
            joined += inputs[i];
        }
        eff.set("inputs", joined);
        eff.set("out", out);
        maybe_dump(a.dump, eff);
    }

    if (inputs.empty())
        throw ConfigError("diagnose needs at least one --in metrics file");
    require_value(out, "--out", cmd);
    for (const auto& p : inputs) require_input(p, "metrics file");

    if (inputs.size() == 1) {
        // Degenerate merge: byte-exact pass-through.
        write_text_file(out, read_text_file(inputs[0]));
        std::printf("{\"inputs\":1,\"mode\":\"passthrough\"}\n");
        return 0;
    }
    if (inputs.size() > 26)
        throw ConfigError("diagnose merges at most 26 runs");

    std::vector<std::vector<TrainLogRecord>> runs;
    for (const auto& p : inputs)
        runs.push_back(parse_metrics_csv(read_text_file(p)));
    for (std::size_t r = 1; r < runs.size(); ++r) {
        bool same = runs[r].size() == runs[0].size();
        if (same)
            for (std::size_t e = 0; e < runs[r].size(); ++e)
                if (runs[r][e].epoch != runs[0][e].epoch) same = false;
        if (!same)
            throw ConfigError("epoch ranges differ between " + inputs[0] +
                              " and " + inputs[r]);
    }

    std::string csv = "epoch";
    for (std::size_t r = 0; r < runs.size(); ++r) {
        csv += ",run_";
        csv += char('a' + int(r));
    }
    csv += '\n';
    for (std::size_t e = 0; e < runs[0].size(); ++e) {
        csv += std::to_string(runs[0][e].epoch);
        for (const auto& run : runs) {
            csv += ',';
            csv += fmt_g17(run[e].mean_pos_dot);
        }
        csv += '\n';
    }
    write_text_file(out, csv);
    std::printf("{\"inputs\":%zu,\"epochs\":%zu}\n", runs.size(),
                runs[0].size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Contrastive representation training toolkit: synthetic data, "
        "teacher pretraining, contrastive training with mixing and "
        "distillation, linear evaluation, gradient checking, and metric "
        "merging."};
    app.require_subcommand(1);

    GenArgs g;
    CLI::App* gen = app.add_subcommand("gen-data",
                                       "generate a synthetic dataset file");
    gen->add_option("--classes", g.classes, "number of classes (2-6)");
    gen->add_option("--per-class", g.per_class, "examples per class");
    gen->add_option("--size", g.size, "square image side length");
    gen->add_option("--noise", g.noise, "pixel noise standard deviation");
    gen->add_option("--seed", g.seed, "rng seed (GSCL_SEED fallback)");
    gen->add_option("--out", g.out, "output dataset path");
    gen->add_option("--config", g.config, "key=value config file");
    gen->add_option("--dump-config", g.dump, "write the effective config");

    TeachArgs t;
    CLI::App* teach = app.add_subcommand(
        "train-teacher", "pretrain the classifier used as a teacher");
    teach->add_option("--data", t.data, "training dataset path");
    teach->add_option("--out", t.out, "output checkpoint path");
    teach->add_option("--epochs", t.epochs, "training epochs");
    teach->add_option("--batch", t.batch, "batch size");
    teach->add_option("--hidden", t.hidden, "hidden layer width");
    teach->add_option("--lr", t.lr, "learning rate (constant)");
    teach->add_option("--momentum", t.momentum, "sgd momentum");
    teach->add_option("--wd", t.wd, "weight decay");
    teach->add_option("--seed", t.seed, "rng seed (GSCL_SEED fallback)");
    teach->add_option("--config", t.config, "key=value config file");
    teach->add_option("--dump-config", t.dump, "write the effective config");

    TrainArgs tr;
    CLI::App* train = app.add_subcommand(
        "train", "contrastive pretraining of encoder + projection");
    train->add_option("--data", tr.data, "training dataset path");
    train->add_option("--out", tr.out, "output checkpoint path");
    train->add_option("--metrics", tr.metrics, "per-epoch metrics csv path");
    train->add_option("--loss", tr.loss, "supcon | genscl | kd");
    train->add_option("--alpha-kd", tr.alpha_kd,
                      "teacher weight: number >= 0 or 'teacher-only'");
    train->add_option("--teacher", tr.teacher,
                      "teacher checkpoint path, or 'oracle'");
    train->add_option("--teacher-tau", tr.teacher_tau,
                      "teacher softening temperature");
    train->add_option("--oracle-eps", tr.oracle_eps,
                      "oracle teacher smoothing");
    train->add_option("--mix", tr.mix, "none | mixup | cutmix");
    train->add_option("--beta-alpha", tr.beta_alpha,
                      "Beta(alpha,alpha) mixing parameter");
    train->add_option("--tau", tr.tau, "contrastive temperature");
    train->add_option("--epochs", tr.epochs, "training epochs");
    train->add_option("--batch", tr.batch, "examples per batch (2N views)");
    train->add_option("--lr", tr.lr, "peak learning rate");
    train->add_option("--momentum", tr.momentum, "sgd momentum");
    train->add_option("--wd", tr.wd, "weight decay");
    train->add_option("--warmup", tr.warmup, "linear warmup epochs");
    train->add_option("--hidden", tr.hidden, "encoder hidden width");
    train->add_option("--embed", tr.embed, "encoder output width");
    train->add_option("--proj", tr.proj, "projection output width");
    train->add_option("--pos-threshold", tr.pos_threshold,
                      "label-similarity cutoff for positive-pair stats");
    train->add_option("--crop-pad", tr.crop_pad, "augment: crop padding");
    train->add_option("--flip-prob", tr.flip_prob,
                      "augment: horizontal flip probability");
    train->add_option("--noise-std", tr.noise_std,
                      "augment: gaussian pixel noise");
    train->add_flag("--no-crop", "disable the crop augmentation");
    train->add_flag("--no-flip", "disable the flip augmentation");
    train->add_flag("--no-noise", "disable the noise augmentation");
    train->add_option("--seed", tr.seed, "rng seed (GSCL_SEED fallback)");
    train->add_option("--config", tr.config, "key=value config file");
    train->add_option("--dump-config", tr.dump, "write the effective config");

    EvalArgs ev;
    CLI::App* eval = app.add_subcommand(
        "linear-eval", "frozen-encoder linear probe, reports top-1");
    eval->add_option("--checkpoint", ev.checkpoint,
                     "encoder checkpoint from train");
    eval->add_option("--train-data", ev.train_data, "probe training set");
    eval->add_option("--test-data", ev.test_data, "probe evaluation set");
    eval->add_option("--epochs", ev.epochs, "probe training epochs");
    eval->add_option("--batch", ev.batch, "probe batch size");
    eval->add_option("--lr", ev.lr, "probe learning rate (constant)");
    eval->add_option("--momentum", ev.momentum, "probe sgd momentum");
    eval->add_option("--seed", ev.seed, "rng seed (GSCL_SEED fallback)");
    eval->add_option("--config", ev.config, "key=value config file");
    eval->add_option("--dump-config", ev.dump, "write the effective config");

    GradArgs gc;
    CLI::App* grad = app.add_subcommand(
        "gradcheck",
        "verify the closed-form anchor gradient against finite differences");
    grad->add_option("--trials", gc.trials, "random instances to check");
    grad->add_option("--seed", gc.seed, "rng seed (GSCL_SEED fallback)");
    grad->add_flag("--inject-sign-flip", gc.inject_sign_flip,
                   "self-test mutation: corrupt the gradient; must exit 1");
    grad->add_option("--config", gc.config, "key=value config file");
    grad->add_option("--dump-config", gc.dump, "write the effective config");

    DiagArgs dg;
    CLI::App* diag = app.add_subcommand(
        "diagnose", "merge per-run mean_pos_dot series for plotting");
    diag->add_option("--in", dg.inputs, "metrics csv (repeatable)");
    diag->add_option("--out", dg.out, "merged csv path");
    diag->add_option("--config", dg.config, "key=value config file");
    diag->add_option("--dump-config", dg.dump, "write the effective config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return run_gen_data(gen, g);
        if (teach->parsed()) return run_train_teacher(teach, t);
        if (train->parsed()) return run_train(train, tr);
        if (eval->parsed()) return run_linear_eval(eval, ev);
        if (grad->parsed()) return run_gradcheck(grad, gc);
        if (diag->parsed()) return run_diagnose(diag, dg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "invalid argument: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric abort: %s\n", e.what());
        return 4;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const VersionError& e) {
        std::fprintf(stderr, "format error: %s\n", e.what());
        return 3;
    } catch (const TruncationError& e) {
        std::fprintf(stderr, "format error: %s\n", e.what());
        return 3;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "format error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;  // no subcommand matched (require_subcommand should prevent)
}
