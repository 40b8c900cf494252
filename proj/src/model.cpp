#include "gscl/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "gscl/io.hpp"

namespace gscl {

namespace {
constexpr char kMagic[4] = {'G', 'S', 'C', 'M'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (int l = 0; l < n_layers(); ++l)
        n += std::size_t(dims[l + 1]) * dims[l] + dims[l + 1];
    return n;
}

std::size_t Mlp::layer_offset(int l) const {
    std::size_t off = 0;
    for (int k = 0; k < l; ++k)
        off += std::size_t(dims[k + 1]) * dims[k] + dims[k + 1];
    return off;
}

Mlp make_mlp(std::vector<int> dims) {
    if (dims.size() < 2) throw InvalidArgument("make_mlp: need >= 2 dims");
    for (int d : dims)
        if (d < 1) throw InvalidArgument("make_mlp: non-positive layer dim");
    Mlp m;
    m.dims = std::move(dims);
    m.params.assign(m.param_count(), 0.0);
    return m;
}

void glorot_init(Mlp& m, Rng& rng) {
    for (int l = 0; l < m.n_layers(); ++l) {
        int in = m.dims[l], out = m.dims[l + 1];
        double bound = std::sqrt(6.0 / (in + out));
        std::size_t off = m.layer_offset(l);
        for (std::size_t i = 0; i < std::size_t(out) * in; ++i)
            m.params[off + i] = rng.uniform(-bound, bound);
        for (int i = 0; i < out; ++i)
            m.params[off + std::size_t(out) * in + i] = 0.0;
    }
}

Vec mlp_forward(const Mlp& m, const Vec& x, MlpCache* cache) {
    if (int(x.size()) != m.in_dim())
        throw InvalidArgument("mlp_forward: input size mismatch");
    if (cache) {
        cache->input = x;
        cache->pre_act.assign(std::size_t(m.n_layers()), {});
        cache->post_act.assign(std::size_t(m.n_layers()), {});
    }
    Vec cur = x;
    for (int l = 0; l < m.n_layers(); ++l) {
        int in = m.dims[l], out = m.dims[l + 1];
        std::size_t off = m.layer_offset(l);
        const double* W = m.params.data() + off;
        const double* b = W + std::size_t(out) * in;
        Vec next(std::size_t(out), 0.0);
        for (int o = 0; o < out; ++o) {
            double s = b[o];
            const double* row = W + std::size_t(o) * in;
            for (int i = 0; i < in; ++i) s += row[i] * cur[std::size_t(i)];
            next[std::size_t(o)] = s;
        }
        if (cache) cache->pre_act[std::size_t(l)] = next;
        if (l + 1 < m.n_layers())
            for (double& v : next) v = std::max(v, 0.0);
        if (cache) cache->post_act[std::size_t(l)] = next;
        cur = std::move(next);
    }
    if (cache) cache->valid = true;
    return cur;
}

void mlp_backward(const Mlp& m, const MlpCache& cache, const Vec& dout,
                  Vec& dparams, Vec* dinput) {
    if (!cache.valid) throw InvalidArgument("mlp_backward: no forward cache");
    if (int(dout.size()) != m.out_dim())
        throw InvalidArgument("mlp_backward: dout size mismatch");
    if (dparams.size() != m.param_count())
        throw InvalidArgument("mlp_backward: dparams size mismatch");

    Vec delta = dout;
    for (int l = m.n_layers() - 1; l >= 0; --l) {
        int in = m.dims[l], out = m.dims[l + 1];
        std::size_t off = m.layer_offset(l);
        const double* W = m.params.data() + off;
        double* dW = dparams.data() + off;
        double* db = dW + std::size_t(out) * in;
        // ReLU applies to this layer's output only when it is not the last
        if (l + 1 < m.n_layers()) {
            const Vec& pre = cache.pre_act[std::size_t(l)];
            for (int o = 0; o < out; ++o)
                if (pre[std::size_t(o)] <= 0.0) delta[std::size_t(o)] = 0.0;
        }
        const Vec& layer_in =
            (l == 0) ? cache.input : cache.post_act[std::size_t(l) - 1];
        for (int o = 0; o < out; ++o) {
            double d = delta[std::size_t(o)];
            db[o] += d;
            double* dRow = dW + std::size_t(o) * in;
            for (int i = 0; i < in; ++i)
                dRow[i] += d * layer_in[std::size_t(i)];
        }
        if (l > 0 || dinput) {
            Vec prev(std::size_t(in), 0.0);
            for (int o = 0; o < out; ++o) {
                double d = delta[std::size_t(o)];
                const double* row = W + std::size_t(o) * in;
                for (int i = 0; i < in; ++i) prev[std::size_t(i)] += d * row[i];
            }
            if (l == 0 && dinput) *dinput = std::move(prev);
            else delta = std::move(prev);
        }
    }
}

Vec encode(const EncoderParams& enc, const Vec& x, MlpCache* cache) {
    return mlp_forward(enc.mlp, x, cache);
}

Projected project(const ProjectionParams& proj, const Vec& h, MlpCache* cache) {
    Projected out;
    out.w = mlp_forward(proj.mlp, h, cache);
    double n = norm(out.w);
    if (n == 0.0) throw NumericError("project: zero-norm projection output");
    out.z.resize(out.w.size());
    for (std::size_t i = 0; i < out.w.size(); ++i) out.z[i] = out.w[i] / n;
    return out;
}

Vec normalization_backward(const Vec& w, const Vec& z, const Vec& dz) {
    double n = norm(w);
    if (n == 0.0) throw NumericError("normalization_backward: zero-norm w");
    Vec g = tangent_project(z, dz);
    for (double& v : g) v /= n;
    return g;
}

Vec teacher_predict(const TeacherParams& t, const Vec& image,
                    const Vec* soft_label) {
    if (t.oracle) {
        if (!soft_label)
            throw InvalidArgument("teacher_predict: oracle mode needs a label");
        if (t.classes < 2 || int(soft_label->size()) != t.classes)
            throw InvalidArgument("teacher_predict: oracle class mismatch");
        Vec p(std::size_t(t.classes), 0.0);
        for (int c = 0; c < t.classes; ++c)
            p[std::size_t(c)] = (1.0 - t.oracle_eps) * (*soft_label)[std::size_t(c)] +
                                t.oracle_eps / t.classes;
        return p;
    }
    Vec logits = mlp_forward(t.mlp, image);
    return softmax_with_temperature(logits, t.tau_soft);
}

Vec standardize_pixels(const Vec& image) {
    Vec out(image.size());
    for (std::size_t i = 0; i < image.size(); ++i)
        out[i] = (image[i] - 0.5) / 0.5;
    return out;
}

void save_checkpoint(const std::string& path, const std::vector<Mlp>& blocks) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("save_checkpoint: cannot open " + path);
    io::write_bytes(os, kMagic, 4);
    io::write_u32(os, kVersion);
    io::write_u32(os, std::uint32_t(blocks.size()));
    for (const Mlp& m : blocks) {
        io::write_u32(os, std::uint32_t(m.dims.size()));
        for (int d : m.dims) io::write_u32(os, std::uint32_t(d));
        io::write_u64(os, m.params.size());
        for (double p : m.params) io::write_f64(os, p);
    }
    os.flush();
    if (!os) throw IoError("save_checkpoint: write failed for " + path);
}

std::vector<Mlp> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_checkpoint: cannot open " + path);
    char magic[4];
    io::read_bytes(is, magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("load_checkpoint: bad magic bytes");
    std::uint32_t version = io::read_u32(is);
    if (version != kVersion)
        throw VersionError("load_checkpoint: unsupported version " +
                           std::to_string(version));
    std::uint32_t n_blocks = io::read_u32(is);
    std::vector<Mlp> blocks;
    blocks.reserve(n_blocks);
    for (std::uint32_t bi = 0; bi < n_blocks; ++bi) {
        Mlp m;
        std::uint32_t nd = io::read_u32(is);
        if (nd < 2) throw FormatError("load_checkpoint: block needs >= 2 dims");
        m.dims.resize(nd);
        for (auto& d : m.dims) d = int(io::read_u32(is));
        std::uint64_t np = io::read_u64(is);
        if (np != m.param_count())
            throw FormatError("load_checkpoint: parameter count mismatch");
        m.params.resize(np);
        for (double& p : m.params) p = io::read_f64(is);
        check_finite(m.params, "checkpoint parameters");
        blocks.push_back(std::move(m));
    }
    return blocks;
}

}  // namespace gscl
