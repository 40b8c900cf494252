#pragma once
#include <cstdint>
#include <vector>

#include "gscl/errors.hpp"

namespace gscl {

// All numeric work is done in 64-bit floats; gradient verification needs
// the headroom.
using Vec = std::vector<double>;

// Counter-based seeded generator (splitmix64 stream). Same seed gives the
// same draw sequence on every platform; no libc RNG anywhere. One Rng per
// logical stream, never shared between threads.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double next_double();

    // Uniform in [lo, hi] inclusive; lo <= hi.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    double uniform(double lo, double hi);

    // Standard normal via Box-Muller (two draws per call, no caching).
    double normal();

    double gamma(double shape);          // shape > 0, scale 1
    double beta(double a, double b);     // a, b > 0

    // Independent deterministic child stream; used to keep init / shuffle /
    // batch-build draws decoupled while staying reproducible.
    Rng substream(std::uint64_t id) const;

  private:
    std::uint64_t state_;
};

double dot(const Vec& u, const Vec& v);
double norm(const Vec& v);

// u.v / (|u||v|), clamped into [-1,1] against rounding. Zero-norm input is
// an error: a degenerate label or prediction upstream.
double cosine_sim(const Vec& u, const Vec& v);

// Max-subtracted softmax of logits/tau. tau must be > 0.
Vec softmax_with_temperature(const Vec& logits, double tau);

// log of softmax_with_temperature, computed via log-sum-exp directly so
// small tau never flows through exp() before log().
Vec log_softmax_with_temperature(const Vec& logits, double tau);

// v / |v|; zero vector is an error.
Vec l2_normalize(const Vec& v);

// v - (z.v) z: the component of v orthogonal to unit vector z. This is the
// (I - zz^T) factor of the normalization Jacobian d(w/|w|)/dw = (I-zz^T)/|w|.
Vec tangent_project(const Vec& z, const Vec& v);

void check_finite(const Vec& v, const char* what);

}  // namespace gscl
