#pragma once
#include <string>
#include <vector>

#include "gscl/numerics.hpp"

namespace gscl {

// Fully-connected net with ReLU between layers (none after the last).
// Parameters live in one flat vector, per layer: weight matrix (out x in,
// row-major), then bias. Flat storage keeps the optimizer and the
// checkpoint format trivial.
struct Mlp {
    std::vector<int> dims;  // layer widths, e.g. {64, 64, 32}
    Vec params;

    int n_layers() const { return int(dims.size()) - 1; }
    int in_dim() const { return dims.front(); }
    int out_dim() const { return dims.back(); }
    std::size_t param_count() const;
    // offset of layer l's weights; biases follow at weight_offset + out*in
    std::size_t layer_offset(int l) const;
};

Mlp make_mlp(std::vector<int> dims);  // zero-initialized

// Weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero.
void glorot_init(Mlp& m, Rng& rng);

// Forward activations retained for the backward pass.
struct MlpCache {
    Vec input;
    std::vector<Vec> pre_act;   // W x + b per layer
    std::vector<Vec> post_act;  // after ReLU (last layer: == pre_act)
    bool valid = false;
};

Vec mlp_forward(const Mlp& m, const Vec& x, MlpCache* cache = nullptr);

// Accumulates parameter gradients into dparams (same layout as params);
// optionally emits the gradient w.r.t. the input. ReLU subgradient at
// exactly 0 is 0.
void mlp_backward(const Mlp& m, const MlpCache& cache, const Vec& dout,
                  Vec& dparams, Vec* dinput = nullptr);

// --- roles -----------------------------------------------------------

struct EncoderParams {
    Mlp mlp;  // D -> hidden -> E
};

struct ProjectionParams {
    Mlp mlp;  // E -> E -> P; output is normalized onto the unit sphere
};

struct TeacherParams {
    Mlp mlp;               // D -> hidden -> C (ignored in oracle mode)
    double tau_soft = 1.0;  // softening temperature
    bool oracle = false;
    double oracle_eps = 0.1;
    int classes = 0;  // required in oracle mode
};

struct LinearProbeParams {
    Mlp mlp;  // single layer E -> C
};

Vec encode(const EncoderParams& enc, const Vec& x, MlpCache* cache = nullptr);

struct Projected {
    Vec w;  // pre-normalization projection output
    Vec z;  // w / |w|
};

// Errors on |w| = 0 (degenerate projection).
Projected project(const ProjectionParams& proj, const Vec& h,
                  MlpCache* cache = nullptr);

// dL/dw -> dL/dz path helper: (I - zz^T)/|w| applied to an upstream
// gradient taken at z.
Vec normalization_backward(const Vec& w, const Vec& z, const Vec& dz);

// Trained mode: softened softmax of the classifier logits. Oracle mode
// ignores the image and returns (1-eps) * soft_label + eps/C, which needs
// the view's label. soft_label may be null in trained mode.
Vec teacher_predict(const TeacherParams& t, const Vec& image,
                    const Vec* soft_label = nullptr);

// Maps [0,1] pixels to [-1,1]; the fixed input whitening applied by the
// trainer before encoder / teacher forward passes.
Vec standardize_pixels(const Vec& image);

// Checkpoint file. Little-endian: magic "GSCM", version u32=1, u32 block
// count, then per block: u32 dim count, u32 dims, u64 parameter count,
// f64 parameters. Bit-exact round trip.
void save_checkpoint(const std::string& path, const std::vector<Mlp>& blocks);
std::vector<Mlp> load_checkpoint(const std::string& path);

}  // namespace gscl
