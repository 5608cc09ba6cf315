#pragma once

/// Truncated multivariate derivative towers (forward-mode jets).
///
/// A Jet stores the Taylor-normalized coefficients of a scalar quantity at a
/// point: coefficient(alpha) = partial^alpha f / alpha! for every multi-index
/// alpha of total degree <= order over `dim` active variables. Storage is
/// dense; indices are enumerated by (total degree, lexicographic), so the
/// coefficients of an order-(k-1) jet are exactly the leading prefix of an
/// order-k jet of the same quantity. Arithmetic is truncated Taylor algebra
/// and therefore exact differentiation of the composite expression.
///
/// Un-normalized partial derivatives are exposed through `partial`
/// (coefficient times alpha!).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "wavekahler/errors.hpp"

namespace wk {

class Jet;
Jet compose_inv(const Jet& u);

using MultiIndex = std::vector<int>;

inline int mi_degree(const MultiIndex& a) {
    return std::accumulate(a.begin(), a.end(), 0);
}

inline double mi_factorial(const MultiIndex& a) {
    double f = 1.0;
    for (int e : a)
        for (int k = 2; k <= e; ++k) f *= k;
    return f;
}

/// Precomputed index bookkeeping shared by all jets of a given (dim, order).
class JetTable {
  public:
    int dim;
    int order;
    std::vector<MultiIndex> alpha;          // position -> multi-index
    std::vector<int> degree;                // position -> total degree
    std::vector<int> count_by_order;        // #indices of degree <= k, k=0..order
    struct MulTriple { int out, a, b; };
    std::vector<MulTriple> mul;             // out += a*b, sorted by out
    // derivative map per variable: dst position -> (src position, factor)
    std::vector<std::vector<std::pair<int, double>>> der;

    static const JetTable& get(int dim, int order);

    int position(const MultiIndex& a) const {
        auto it = pos_.find(pack(a));
        if (it == pos_.end())
            throw order_error("multi-index of degree " + std::to_string(mi_degree(a)) +
                              " exceeds jet order " + std::to_string(order));
        return it->second;
    }

  private:
    std::map<std::uint64_t, int> pos_;

    static std::uint64_t pack(const MultiIndex& a) {
        std::uint64_t k = 0;
        for (std::size_t i = 0; i < a.size(); ++i) k |= std::uint64_t(a[i] & 0xff) << (8 * i);
        return k;
    }

    JetTable(int d, int o) : dim(d), order(o) {
        // enumerate multi-indices by (degree, lex)
        for (int deg = 0; deg <= order; ++deg) {
            MultiIndex a(dim, 0);
            enumerate(a, 0, deg);
            count_by_order.push_back(int(alpha.size()));
        }
        for (std::size_t p = 0; p < alpha.size(); ++p) {
            pos_[pack(alpha[p])] = int(p);
            degree.push_back(mi_degree(alpha[p]));
        }
        // multiplication triples
        for (std::size_t i = 0; i < alpha.size(); ++i)
            for (std::size_t j = 0; j < alpha.size(); ++j) {
                if (degree[i] + degree[j] > order) continue;
                MultiIndex s(dim);
                for (int v = 0; v < dim; ++v) s[v] = alpha[i][v] + alpha[j][v];
                mul.push_back({position(s), int(i), int(j)});
            }
        std::sort(mul.begin(), mul.end(),
                  [](const MulTriple& x, const MulTriple& y) { return x.out < y.out; });
        // derivative maps (output lives in the order-1 prefix)
        der.resize(dim);
        const int n_out = order == 0 ? 0 : count_by_order[order - 1];
        for (int v = 0; v < dim; ++v) {
            der[v].resize(n_out);
            for (int b = 0; b < n_out; ++b) {
                MultiIndex s = alpha[b];
                s[v] += 1;
                der[v][b] = {position(s), double(s[v])};
            }
        }
    }

    void enumerate(MultiIndex& a, int from, int remaining) {
        if (from == dim) {
            if (remaining == 0) alpha.push_back(a);
            return;
        }
        if (from == dim - 1) {
            a[from] = remaining;
            alpha.push_back(a);
            a[from] = 0;
            return;
        }
        for (int e = 0; e <= remaining; ++e) {
            a[from] = e;
            enumerate(a, from + 1, remaining - e);
        }
        a[from] = 0;
    }
};

inline const JetTable& JetTable::get(int dim, int order) {
    static std::mutex m;
    static std::map<std::pair<int, int>, std::unique_ptr<JetTable>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto key = std::make_pair(dim, order);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::unique_ptr<JetTable>(new JetTable(dim, order))).first;
    return *it->second;
}

class Jet {
  public:
    Jet() : t_(nullptr) {}
    Jet(int dim, int order, double value = 0.0) {
        if (dim < 1 || order < 0)
            throw order_error("jet needs dim >= 1 and order >= 0");
        t_ = &JetTable::get(dim, order);
        c_.assign(t_->alpha.size(), 0.0);
        c_[0] = value;
    }

    static Jet constant(int dim, int order, double v) { return Jet(dim, order, v); }

    static Jet variable(int dim, int order, int var, double v) {
        Jet j(dim, order, v);
        if (order >= 1) {
            MultiIndex e(dim, 0);
            e[var] = 1;
            j.c_[j.t_->position(e)] = 1.0;
        }
        return j;
    }

    int dim() const { return t_ ? t_->dim : 0; }
    int order() const { return t_ ? t_->order : 0; }
    double value() const { return t_ ? c_[0] : 0.0; }
    const std::vector<double>& coeffs() const { return c_; }
    const JetTable& table() const { return *t_; }

    /// Taylor coefficient for a multi-index (partials / alpha!).
    double coeff(const MultiIndex& a) const {
        require();
        return c_[t_->position(a)];
    }

    void set_coeff(const MultiIndex& a, double v) {
        require();
        c_[t_->position(a)] = v;
    }

    /// Restrict to a lower order (prefix copy).
    Jet truncated(int new_order) const {
        require();
        if (new_order > order()) throw order_error("cannot raise jet order by truncation");
        Jet r(dim(), new_order);
        std::copy(c_.begin(), c_.begin() + r.c_.size(), r.c_.begin());
        return r;
    }

    /// Jet of the partial derivative along variable v; order drops by one.
    Jet derivative(int v) const {
        require();
        if (order() == 0)
            throw order_error("derivative of an order-0 jet requested");
        Jet r(dim(), order() - 1);
        const auto& map = t_->der[v];
        for (std::size_t b = 0; b < map.size(); ++b) r.c_[b] = map[b].second * c_[map[b].first];
        return r;
    }

    Jet operator-() const {
        Jet r = *this;
        for (double& x : r.c_) x = -x;
        return r;
    }

    friend Jet operator+(const Jet& a, const Jet& b) { return binary(a, b, +1.0); }
    friend Jet operator-(const Jet& a, const Jet& b) { return binary(a, b, -1.0); }

    friend Jet operator*(const Jet& a, const Jet& b) {
        const Jet* x = &a;
        const Jet* y = &b;
        Jet ta, tb;
        align(x, y, ta, tb);
        Jet r(x->dim(), x->order());
        const auto& mul = r.t_->mul;
        const auto& ca = x->c_;
        const auto& cb = y->c_;
        auto& cr = r.c_;
        for (const auto& m : mul) cr[m.out] += ca[m.a] * cb[m.b];
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) {
        if (b.value() == 0.0) throw domain_error("division by zero");
        return a * compose_inv(b);
    }

    friend Jet operator+(const Jet& a, double s) { Jet r = a; r.c_[0] += s; return r; }
    friend Jet operator+(double s, const Jet& a) { return a + s; }
    friend Jet operator-(const Jet& a, double s) { Jet r = a; r.c_[0] -= s; return r; }
    friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
    friend Jet operator*(const Jet& a, double s) {
        Jet r = a;
        for (double& x : r.c_) x *= s;
        return r;
    }
    friend Jet operator*(double s, const Jet& a) { return a * s; }
    friend Jet operator/(const Jet& a, double s) {
        if (s == 0.0) throw domain_error("division by zero");
        return a * (1.0 / s);
    }
    friend Jet operator/(double s, const Jet& a) { return compose_inv(a) * s; }

    Jet& operator+=(const Jet& b) { *this = *this + b; return *this; }
    Jet& operator-=(const Jet& b) { *this = *this - b; return *this; }
    Jet& operator*=(const Jet& b) { *this = *this * b; return *this; }

    /// Composition with a univariate analytic function given by the
    /// un-normalized derivatives f^(0..k) at this jet's value (Horner on the
    /// zero-constant part).
    friend Jet compose(const Jet& u, const std::vector<double>& derivs) {
        u.require();
        const int k = u.order();
        Jet du = u;  // u - u0
        du.c_[0] = 0.0;
        double fact = 1.0;
        std::vector<double> a(k + 1);  // Taylor coefficients of f at u0
        for (int m = 0; m <= k; ++m) {
            if (m > 1) fact *= m;
            a[m] = derivs[std::size_t(m)] / fact;
        }
        Jet r = Jet::constant(u.dim(), k, a[k]);
        for (int m = k - 1; m >= 0; --m) r = r * du + a[m];
        return r;
    }

    friend Jet sin(const Jet& u) { return compose(u, cyclic(u.order(), std::sin(u.value()), std::cos(u.value()))); }
    friend Jet cos(const Jet& u) { return compose(u, cyclic(u.order(), std::cos(u.value()), -std::sin(u.value()))); }

    friend Jet exp(const Jet& u) {
        const double e = std::exp(u.value());
        return compose(u, std::vector<double>(std::size_t(u.order()) + 1, e));
    }

    friend Jet log(const Jet& u) {
        if (!(u.value() > 0.0)) throw domain_error("log of non-positive value");
        std::vector<double> d(std::size_t(u.order()) + 1);
        d[0] = std::log(u.value());
        double p = 1.0;  // (m-1)! / u0^m with alternating sign
        for (int m = 1; m <= u.order(); ++m) {
            p *= (m == 1 ? 1.0 : -double(m - 1)) / u.value();
            d[std::size_t(m)] = p;
        }
        return compose(u, d);
    }

    friend Jet sqrt(const Jet& u) {
        if (!(u.value() > 0.0)) throw domain_error("sqrt of non-positive value");
        return pow(u, 0.5);
    }

    /// Integer powers by repeated multiplication (exact for polynomials).
    friend Jet powi(const Jet& u, long n) {
        u.require();
        if (n < 0) return 1.0 / powi(u, -n);
        Jet r = Jet::constant(u.dim(), u.order(), 1.0);
        Jet base = u;
        while (n > 0) {
            if (n & 1) r = r * base;
            n >>= 1;
            if (n) base = base * base;
        }
        return r;
    }

    friend Jet pow(const Jet& u, double p) {
        if (p == std::floor(p) && std::abs(p) <= 64) return powi(u, long(p));
        if (!(u.value() > 0.0)) throw domain_error("pow of non-positive base with non-integer exponent");
        std::vector<double> d(std::size_t(u.order()) + 1);
        double coef = 1.0;
        for (int m = 0; m <= u.order(); ++m) {
            d[std::size_t(m)] = coef * std::pow(u.value(), p - m);
            coef *= (p - m);
        }
        return compose(u, d);
    }

    friend Jet pow(const Jet& u, const Jet& v) { return exp(v * log(u)); }

  private:
    const JetTable* t_;
    std::vector<double> c_;

    void require() const {
        if (!t_) throw order_error("operation on an empty jet");
    }

    static void align(const Jet*& a, const Jet*& b, Jet& ta, Jet& tb) {
        a->require();
        b->require();
        if (a->dim() != b->dim()) throw order_error("jet dimension mismatch");
        if (a->order() > b->order()) { ta = a->truncated(b->order()); a = &ta; }
        else if (b->order() > a->order()) { tb = b->truncated(a->order()); b = &tb; }
    }

    static Jet binary(const Jet& x, const Jet& y, double sign) {
        const Jet* a = &x;
        const Jet* b = &y;
        Jet ta, tb;
        align(a, b, ta, tb);
        Jet r = *a;
        for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] += sign * b->c_[i];
        return r;
    }

    static std::vector<double> cyclic(int order, double f0, double f1) {
        std::vector<double> d(std::size_t(order) + 1);
        const double cycle[4] = {f0, f1, -f0, -f1};
        for (int m = 0; m <= order; ++m) d[std::size_t(m)] = cycle[m % 4];
        return d;
    }
};

/// Un-normalized partial derivative: coefficient(alpha) * alpha!.
inline double partial(const Jet& j, const MultiIndex& a) {
    return j.coeff(a) * mi_factorial(a);
}

/// Seeded coordinates of a chart point: one jet per active variable.
using JetPoint = std::vector<Jet>;

inline JetPoint seed_point(const std::vector<double>& x, int order) {
    JetPoint p;
    const int dim = int(x.size());
    p.reserve(x.size());
    for (int i = 0; i < dim; ++i) p.push_back(Jet::variable(dim, order, i, x[i]));
    return p;
}

/// A differentiable scalar quantity on a chart: JetPoint in, Jet out.
using ScalarField = std::function<Jet(const JetPoint&)>;

inline ScalarField constant_field(double v) {
    return [v](const JetPoint& p) { return Jet::constant(p.at(0).dim(), p.at(0).order(), v); };
}

inline ScalarField coordinate_field(int i) {
    return [i](const JetPoint& p) { return p.at(std::size_t(i)); };
}

/// Lift a field at a point to a jet of the requested order.
inline Jet lift(const ScalarField& f, const std::vector<double>& x, int order) {
    if (order < 0) throw order_error("negative jet order");
    return f(seed_point(x, order));
}

inline Jet compose_inv(const Jet& u) {
    if (u.value() == 0.0) throw domain_error("division by zero");
    std::vector<double> d(std::size_t(u.order()) + 1);
    double p = 1.0 / u.value();
    d[0] = p;
    for (int m = 1; m <= u.order(); ++m) {
        p *= -double(m) / u.value();
        d[std::size_t(m)] = p;
    }
    return compose(u, d);
}

}  // namespace wk
