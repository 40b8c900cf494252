#include "gscl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gscl {

std::uint64_t Rng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw InvalidArgument("uniform_int: lo > hi");
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    // span never approaches 2^64 here; modulo bias is < 2^-50 for the
    // desk-scale ranges we draw (crop offsets, partner indices).
    return lo + static_cast<std::int64_t>(next_u64() % span);
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

double Rng::normal() {
    // Box-Muller; draw u1 away from 0 so log() stays finite.
    double u1 = 0.0;
    do {
        u1 = next_double();
    } while (u1 <= 0.0);
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::gamma(double shape) {
    if (shape <= 0.0) throw InvalidArgument("gamma: shape must be > 0");
    // Marsaglia-Tsang squeeze; shape < 1 boosted through G(a+1) * U^(1/a).
    if (shape < 1.0) {
        double u = 0.0;
        do {
            u = next_double();
        } while (u <= 0.0);
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = next_double();
        if (u <= 0.0) continue;
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::beta(double a, double b) {
    double ga = gamma(a);
    double gb = gamma(b);
    double s = ga + gb;
    if (s <= 0.0) return 0.5;  // both draws underflowed; symmetric fallback
    return ga / s;
}

Rng Rng::substream(std::uint64_t id) const {
    // Derive the child seed by running the mixer over (state, id); children
    // with distinct ids get decorrelated streams.
    Rng mixer(state_ ^ (0xD1B54A32D192ED03ULL * (id + 1)));
    return Rng(mixer.next_u64());
}

double dot(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw InvalidArgument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double norm(const Vec& v) {
    return std::sqrt(dot(v, v));
}

double cosine_sim(const Vec& u, const Vec& v) {
    if (u.size() != v.size())
        throw InvalidArgument("cosine_sim: dimension mismatch");
    // Divide each vector by its largest entry first so the squared sums
    // can neither underflow (tiny inputs) nor overflow (huge ones).
    double mu = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        mu = std::max(mu, std::abs(u[i]));
        mv = std::max(mv, std::abs(v[i]));
    }
    if (mu == 0.0 || mv == 0.0)
        throw NumericError("cosine_sim: zero-norm input");
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double a = u[i] / mu;
        double b = v[i] / mv;
        ab += a * b;
        aa += a * a;
        bb += b * b;
    }
    double s = ab / std::sqrt(aa * bb);
    return std::clamp(s, -1.0, 1.0);
}

Vec softmax_with_temperature(const Vec& logits, double tau) {
    if (tau <= 0.0)
        throw InvalidArgument("softmax_with_temperature: tau must be > 0");
    if (logits.empty())
        throw InvalidArgument("softmax_with_temperature: empty input");
    check_finite(logits, "softmax logits");
    double mx = *std::max_element(logits.begin(), logits.end());
    Vec out(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp((logits[i] - mx) / tau);
        z += out[i];
    }
    for (double& o : out) o /= z;
    return out;
}

Vec log_softmax_with_temperature(const Vec& logits, double tau) {
    if (tau <= 0.0)
        throw InvalidArgument("log_softmax_with_temperature: tau must be > 0");
    if (logits.empty())
        throw InvalidArgument("log_softmax_with_temperature: empty input");
    check_finite(logits, "softmax logits");
    double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp((l - mx) / tau);
    double lz = std::log(z);
    Vec out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i)
        out[i] = (logits[i] - mx) / tau - lz;
    return out;
}

Vec l2_normalize(const Vec& v) {
    double n = norm(v);
    if (n == 0.0) throw NumericError("l2_normalize: zero vector");
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    return out;
}

Vec tangent_project(const Vec& z, const Vec& v) {
    double zv = dot(z, v);
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - zv * z[i];
    return out;
}

void check_finite(const Vec& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw NumericError(std::string("non-finite value in ") + what);
}

}  // namespace gscl
