#pragma once

/// Deterministic RNG, domain boxes, and a bounded parallel map.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace wk {

/// Deterministic 64-bit generator (std::mt19937_64). Uniform doubles are
/// produced from the top 53 bits so streams are bit-identical across
/// platforms and library versions; seeded substreams come from FNV-1a mixing
/// of a label into the base seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }
    std::uint64_t integer() { return gen_(); }

    static std::uint64_t substream(std::uint64_t seed, const std::string& label) {
        std::uint64_t h = 1469598103934665603ull;
        for (char c : label) {
            h ^= std::uint64_t(static_cast<unsigned char>(c));
            h *= 1099511628211ull;
        }
        return seed ^ h;
    }

  private:
    std::mt19937_64 gen_;
};

/// Axis-aligned chart domain. Sampling shrinks the box by a relative margin
/// to avoid chart-edge artifacts.
struct Box {
    std::vector<std::pair<double, double>> range;

    std::size_t dim() const { return range.size(); }

    std::vector<double> sample(Rng& rng, double margin = 0.01) const {
        std::vector<double> x(range.size());
        for (std::size_t i = 0; i < range.size(); ++i) {
            const double lo = range[i].first, hi = range[i].second;
            const double pad = (hi - lo) * margin;
            x[i] = rng.uniform(lo + pad, hi - pad);
        }
        return x;
    }
};

/// Thread cap: WAVEKAHLER_THREADS (0 or unset = hardware concurrency).
inline unsigned thread_cap() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("WAVEKAHLER_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(v) < hw ? unsigned(v) : hw;
    }
    return hw;
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(std::size_t(n), 0.0);
    w.assign(std::size_t(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[std::size_t(i)] = -t;
        x[std::size_t(n - 1 - i)] = t;
        w[std::size_t(i)] = w[std::size_t(n - 1 - i)] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

/// Integrate a smooth function over [a, b] with composite Gauss-Legendre
/// (5 points per segment).
template <typename F>
double integrate_gl(F&& f, double a, double b, int segments) {
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    double total = 0.0;
    const double h = (b - a) / segments;
    for (int s = 0; s < segments; ++s) {
        const double mid = a + (s + 0.5) * h;
        for (int q = 0; q < 5; ++q) total += gw[q] * f(mid + 0.5 * h * gx[q]) * 0.5 * h;
    }
    return total;
}

/// Cumulative integral of uniformly sampled values (step h) by piecewise
/// cubic interpolation on 4-point stencils; global accuracy O(h^4).
inline std::vector<double> cumulative_integral(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    std::vector<double> c(n, 0.0);
    if (n < 2) return c;
    if (n < 4) {  // trapezoid fallback for tiny grids
        for (std::size_t j = 1; j < n; ++j) c[j] = c[j - 1] + 0.5 * h * (v[j - 1] + v[j]);
        return c;
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double seg;
        if (j == 0)
            seg = h * (9 * v[0] + 19 * v[1] - 5 * v[2] + v[3]) / 24.0;
        else if (j + 2 == n)
            seg = h * (v[n - 4] - 5 * v[n - 3] + 19 * v[n - 2] + 9 * v[n - 1]) / 24.0;
        else
            seg = h * (-v[j - 1] + 13 * v[j] + 13 * v[j + 1] - v[j + 2]) / 24.0;
        c[j + 1] = c[j] + seg;
    }
    return c;
}

/// Index-parallel map; results are stored by index, so output order (and
/// therefore every report built from it) is deterministic.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned workers = thread_cap();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    for (auto& t : pool) t.join();
}

}  // namespace wk
