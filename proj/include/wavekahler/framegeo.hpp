#pragma once

/// Riemannian geometry in a declared-orthonormal moving frame over a chart.
///
/// Two patch kinds cover everything the constructions need:
///   * coordinate-frame: each leg is given by chart-component functions;
///     structure functions come from jets of the components and the inverse
///     frame matrix.
///   * abstract-frame: the bracket table [E_i,E_j] = sum_k c^k_ij E_k is
///     supplied directly as functions of the chart coordinates, together
///     with each leg's chart components. Scalars may depend only on the
///     declared chart coordinates, and the directional derivative of a
///     scalar along a leg is (chart component) . (chart partial).
///
/// Conventions (see docs/conventions.md):
///   * orthonormal Koszul, Gamma^k_ij = <nabla_{E_i} E_j, E_k>
///       2 Gamma^k_ij = c^k_ij - c^i_jk + c^j_ki
///   * curvature  R_{X,Y} = nabla_[X,Y] - [nabla_X, nabla_Y]
///   * scalar curvature  s = sum_{i,j} <R(E_i,E_j)E_i, E_j>
///     (round unit 2-sphere: sectional curvature +1, s = +2).

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wavekahler/errors.hpp"
#include "wavekahler/jets.hpp"
#include "wavekahler/util.hpp"

namespace wk {

/// Gauss-Jordan inverse of a square jet matrix (row-major), with a 1-norm
/// condition estimate of the value part. Throws degenerate_frame_error on a
/// (numerically) singular value part.
inline std::vector<Jet> invert_jet_matrix(std::vector<Jet> a, int m, double* condition = nullptr) {
    if (m <= 0 || a.size() != std::size_t(m) * std::size_t(m))
        throw construction_error("invert_jet_matrix: bad shape");
    const int dim = a[0].dim();
    const int order = a[0].order();
    double norm1 = 0.0;
    for (int col = 0; col < m; ++col) {
        double s = 0.0;
        for (int row = 0; row < m; ++row) s += std::abs(a[std::size_t(row * m + col)].value());
        norm1 = std::max(norm1, s);
    }
    std::vector<Jet> inv(std::size_t(m * m), Jet::constant(dim, order, 0.0));
    for (int i = 0; i < m; ++i) inv[std::size_t(i * m + i)] = Jet::constant(dim, order, 1.0);
    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int row = col + 1; row < m; ++row)
            if (std::abs(a[std::size_t(row * m + col)].value()) >
                std::abs(a[std::size_t(piv * m + col)].value()))
                piv = row;
        if (std::abs(a[std::size_t(piv * m + col)].value()) < 1e-12)
            throw degenerate_frame_error("frame matrix is singular at the evaluation point");
        if (piv != col)
            for (int k = 0; k < m; ++k) {
                std::swap(a[std::size_t(piv * m + k)], a[std::size_t(col * m + k)]);
                std::swap(inv[std::size_t(piv * m + k)], inv[std::size_t(col * m + k)]);
            }
        Jet d = a[std::size_t(col * m + col)];
        for (int k = 0; k < m; ++k) {
            a[std::size_t(col * m + k)] = a[std::size_t(col * m + k)] / d;
            inv[std::size_t(col * m + k)] = inv[std::size_t(col * m + k)] / d;
        }
        for (int row = 0; row < m; ++row) {
            if (row == col) continue;
            Jet f = a[std::size_t(row * m + col)];
            bool zero = true;
            for (double x : f.coeffs())
                if (x != 0.0) { zero = false; break; }
            if (zero) continue;
            for (int k = 0; k < m; ++k) {
                a[std::size_t(row * m + k)] -= f * a[std::size_t(col * m + k)];
                inv[std::size_t(row * m + k)] -= f * inv[std::size_t(col * m + k)];
            }
        }
    }
    if (condition) {
        double inorm1 = 0.0;
        for (int col = 0; col < m; ++col) {
            double s = 0.0;
            for (int row = 0; row < m; ++row) s += std::abs(inv[std::size_t(row * m + col)].value());
            inorm1 = std::max(inorm1, s);
        }
        *condition = norm1 * inorm1;
    }
    return inv;
}

struct FramePatch {
    enum class Kind { Coordinate, Abstract };

    Kind kind = Kind::Coordinate;
    std::vector<std::string> coords;  // chart coordinate names (jet variables)
    Box domain;
    int frame_dim = 0;

    // legs x chart components. Coordinate kind: the full (square) frame
    // matrix. Abstract kind: components along declared chart coords only
    // (legs pointing along undeclared orbit directions have all zeros).
    std::vector<std::vector<ScalarField>> comp;

    // Abstract kind only: bracket table entries with i < j.
    struct BracketTerm {
        int i, j, k;
        ScalarField f;
    };
    std::vector<BracketTerm> brackets;

    int chart_dim() const { return int(coords.size()); }

    int coord_index(const std::string& name) const {
        for (std::size_t i = 0; i < coords.size(); ++i)
            if (coords[i] == name) return int(i);
        throw construction_error("no chart coordinate named '" + name + "'");
    }
};

/// All jet data of a patch at one point; shared by every downstream operation.
class PatchEval {
  public:
    const FramePatch* patch;
    std::vector<double> point;
    int order;
    JetPoint pt;
    std::vector<std::vector<Jet>> comp;  // [leg][coord]
    std::vector<Jet> c_;                 // structure functions, flattened
    double frame_condition = 1.0;        // 1-norm condition estimate (coordinate kind)

    PatchEval(const FramePatch& p, const std::vector<double>& x, int ord)
        : patch(&p), point(x), order(ord), n_(p.frame_dim) {
        if (ord < 1) throw order_error("patch evaluation needs jet order >= 1");
        pt = seed_point(x, ord);
        comp.assign(std::size_t(n_), {});
        for (int i = 0; i < n_; ++i) {
            comp[std::size_t(i)].reserve(p.coords.size());
            for (std::size_t a = 0; a < p.coords.size(); ++a)
                comp[std::size_t(i)].push_back(p.comp[std::size_t(i)][a](pt));
        }
        c_.assign(std::size_t(n_ * n_ * n_), Jet::constant(chart_dim(), ord, 0.0));
        if (p.kind == FramePatch::Kind::Coordinate)
            build_coordinate_brackets();
        else
            build_abstract_brackets();
    }

    int frame_dim() const { return n_; }
    int chart_dim() const { return patch->chart_dim(); }

    /// c^k_ij with [E_i,E_j] = sum_k c^k_ij E_k.
    const Jet& c(int i, int j, int k) const {
        return c_[std::size_t((i * n_ + j) * n_ + k)];
    }

    /// Directional derivative of a scalar jet along frame leg i.
    Jet dir(int i, const Jet& f) const {
        Jet out = Jet::constant(f.dim(), f.order() - 1 >= 0 ? f.order() - 1 : 0, 0.0);
        if (f.order() == 0) throw order_error("directional derivative needs jet order >= 1");
        for (int a = 0; a < chart_dim(); ++a) out += comp[std::size_t(i)][std::size_t(a)] * f.derivative(a);
        return out;
    }

  private:
    int n_;

    Jet& cm(int i, int j, int k) { return c_[std::size_t((i * n_ + j) * n_ + k)]; }

    void build_coordinate_brackets() {
        const int m = chart_dim();
        if (m != n_)
            throw construction_error("coordinate-frame patch needs a square frame matrix");
        // invert the frame matrix F^a_k = comp[k][a] in jet arithmetic
        std::vector<Jet> F(std::size_t(m * m));
        for (int a = 0; a < m; ++a)
            for (int k = 0; k < m; ++k) F[std::size_t(a * m + k)] = comp[std::size_t(k)][std::size_t(a)];
        std::vector<Jet> inv = invert_jet_matrix(std::move(F), m, &frame_condition);
        // brackets in chart components, then solve for frame coefficients
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) {
                std::vector<Jet> w(static_cast<std::size_t>(m));
                for (int a = 0; a < m; ++a) {
                    Jet acc = Jet::constant(m, order - 1, 0.0);
                    for (int b = 0; b < m; ++b)
                        acc += comp[std::size_t(i)][std::size_t(b)] *
                                   comp[std::size_t(j)][std::size_t(a)].derivative(b) -
                               comp[std::size_t(j)][std::size_t(b)] *
                                   comp[std::size_t(i)][std::size_t(a)].derivative(b);
                    w[std::size_t(a)] = acc;
                }
                for (int k = 0; k < n_; ++k) {
                    Jet ck = Jet::constant(m, order - 1, 0.0);
                    for (int a = 0; a < m; ++a) ck += inv[std::size_t(k * m + a)] * w[std::size_t(a)];
                    cm(i, j, k) = ck;
                    cm(j, i, k) = -ck;
                }
            }
    }

    void build_abstract_brackets() {
        for (const auto& t : patch->brackets) {
            Jet v = t.f(pt);
            cm(t.i, t.j, t.k) = v;
            cm(t.j, t.i, t.k) = -v;
        }
    }
};

/// Connection coefficients A^k_ij = <nabla_{E_i} E_j, E_k>, flattened.
using ConnectionCoeffs = std::vector<Jet>;

/// Curvature table <R(E_i,E_j)E_k, E_l>, flattened.
using CurvatureTable = std::vector<Jet>;

inline std::size_t idx3(int n, int i, int j, int k) { return std::size_t((i * n + j) * n + k); }
inline std::size_t idx4(int n, int i, int j, int k, int l) {
    return std::size_t(((i * n + j) * n + k) * n + l);
}

/// Levi-Civita coefficients by orthonormal Koszul.
inline ConnectionCoeffs levi_civita(const PatchEval& pe) {
    const int n = pe.frame_dim();
    ConnectionCoeffs g(std::size_t(n * n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                g[idx3(n, i, j, k)] = 0.5 * (pe.c(i, j, k) - pe.c(j, k, i) + pe.c(k, i, j));
    return g;
}

/// Curvature of a connection in the convention R_{X,Y} = nabla_[X,Y] - [nabla_X, nabla_Y].
inline CurvatureTable curvature(const PatchEval& pe, const ConnectionCoeffs& A) {
    const int n = pe.frame_dim();
    const Jet zero = Jet::constant(pe.chart_dim(), std::max(pe.order - 2, 0), 0.0);
    CurvatureTable R(std::size_t(n) * std::size_t(n * n * n), zero);
    // every (k,l) entry is computed; antisymmetry in the last pair is a
    // property of metric connections that the tests verify, not an input
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Jet acc = pe.dir(j, A[idx3(n, i, k, l)]) - pe.dir(i, A[idx3(n, j, k, l)]);
                    for (int m = 0; m < n; ++m) {
                        acc += pe.c(i, j, m) * A[idx3(n, m, k, l)];
                        acc += A[idx3(n, i, k, m)] * A[idx3(n, j, m, l)] -
                               A[idx3(n, j, k, m)] * A[idx3(n, i, m, l)];
                    }
                    R[idx4(n, i, j, k, l)] = acc;
                    R[idx4(n, j, i, k, l)] = -acc;
                }
    return R;
}

/// s = sum_{i,j} <R(E_i,E_j)E_i, E_j>.
inline Jet scalar_curvature(const PatchEval& pe, const CurvatureTable& R) {
    const int n = pe.frame_dim();
    Jet s = Jet::constant(pe.chart_dim(), std::max(pe.order - 2, 0), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += R[idx4(n, i, j, i, j)];
    return s;
}

/// Gradient of a scalar in the orthonormal frame: grad f = sum_i E_i(f) E_i.
inline std::vector<Jet> gradient(const PatchEval& pe, const Jet& f) {
    std::vector<Jet> g;
    g.reserve(std::size_t(pe.frame_dim()));
    for (int i = 0; i < pe.frame_dim(); ++i) g.push_back(pe.dir(i, f));
    return g;
}

/// Entries of the Lie derivative of g along K (frame components), via
/// (L_K g)(E_i,E_j) = <nabla_{E_i} K, E_j> + <nabla_{E_j} K, E_i>.
inline std::vector<std::vector<Jet>> lie_derivative_metric(const PatchEval& pe,
                                                           const ConnectionCoeffs& gamma,
                                                           const std::vector<Jet>& K) {
    const int n = pe.frame_dim();
    auto covNabla = [&](int i, int j) {
        Jet acc = pe.dir(i, K[std::size_t(j)]);
        for (int m = 0; m < n; ++m) acc += K[std::size_t(m)] * gamma[idx3(n, i, m, j)];
        return acc;
    };
    std::vector<std::vector<Jet>> L(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        L[std::size_t(i)].resize(std::size_t(n));
        for (int j = 0; j < n; ++j) L[std::size_t(i)][std::size_t(j)] = covNabla(i, j) + covNabla(j, i);
    }
    return L;
}

/// Max-norm Killing residual of a frame vector field.
inline double killing_residual(const PatchEval& pe, const ConnectionCoeffs& gamma,
                               const std::vector<Jet>& K) {
    auto L = lie_derivative_metric(pe, gamma, K);
    double m = 0.0;
    for (auto& row : L)
        for (auto& e : row) m = std::max(m, std::abs(e.value()));
    return m;
}

/// Exterior forms with frame-leg components (antisymmetric, jets).
class FrameForm {
  public:
    FrameForm() = default;
    FrameForm(int degree, int frame_dim, int jet_dim, int jet_order)
        : p_(degree), n_(frame_dim) {
        comps_.assign(combinations(), Jet::constant(jet_dim, jet_order, 0.0));
    }

    int degree() const { return p_; }
    int frame_dim() const { return n_; }

    Jet get(std::vector<int> idx) const {
        int sign = sort_sign(idx);
        if (sign == 0) {
            const Jet& any = comps_.at(0);
            return Jet::constant(any.dim(), any.order(), 0.0);
        }
        const Jet& v = comps_[rank(idx)];
        return sign > 0 ? v : -v;
    }

    void set_sorted(const std::vector<int>& idx, const Jet& v) { comps_[rank(idx)] = v; }
    void add_sorted(const std::vector<int>& idx, const Jet& v) { comps_[rank(idx)] += v; }

    double value(std::vector<int> idx) const { return get(std::move(idx)).value(); }

    /// Max |component value|.
    double max_abs() const {
        double m = 0.0;
        for (auto& c : comps_) m = std::max(m, std::abs(c.value()));
        return m;
    }

    friend FrameForm operator+(const FrameForm& a, const FrameForm& b) {
        FrameForm r = a;
        for (std::size_t i = 0; i < r.comps_.size(); ++i) r.comps_[i] += b.comps_[i];
        return r;
    }
    friend FrameForm operator-(const FrameForm& a, const FrameForm& b) {
        FrameForm r = a;
        for (std::size_t i = 0; i < r.comps_.size(); ++i) r.comps_[i] -= b.comps_[i];
        return r;
    }
    friend FrameForm operator*(const Jet& s, const FrameForm& a) {
        FrameForm r = a;
        for (auto& c : r.comps_) c = s * c;
        return r;
    }
    friend FrameForm operator*(double s, const FrameForm& a) {
        FrameForm r = a;
        for (auto& c : r.comps_) c = s * c;
        return r;
    }

    /// Evaluate a 2-form on two frame vectors given by component jets.
    Jet eval2(const std::vector<Jet>& v, const std::vector<Jet>& w) const {
        const Jet& probe = comps_.at(0);
        Jet acc = Jet::constant(probe.dim(), probe.order(), 0.0);
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j)
                acc += get({i, j}) * (v[std::size_t(i)] * w[std::size_t(j)] -
                                      v[std::size_t(j)] * w[std::size_t(i)]);
        return acc;
    }

    /// Iterate strictly increasing index tuples.
    template <typename F>
    void for_each_sorted(F&& f) const {
        std::vector<int> idx(static_cast<std::size_t>(p_));
        for (int i = 0; i < p_; ++i) idx[std::size_t(i)] = i;
        for (;;) {
            f(static_cast<const std::vector<int>&>(idx));
            int pos = p_ - 1;
            while (pos >= 0 && idx[std::size_t(pos)] == n_ - p_ + pos) --pos;
            if (pos < 0) return;
            ++idx[std::size_t(pos)];
            for (int q = pos + 1; q < p_; ++q) idx[std::size_t(q)] = idx[std::size_t(q - 1)] + 1;
        }
    }

  private:
    int p_ = 0, n_ = 0;
    std::vector<Jet> comps_;

    std::size_t combinations() const {
        std::size_t c = 1;
        for (int i = 0; i < p_; ++i) c = c * std::size_t(n_ - i) / std::size_t(i + 1);
        return c;
    }

    static int sort_sign(std::vector<int>& idx) {
        int sign = 1;
        for (std::size_t i = 1; i < idx.size(); ++i)
            for (std::size_t j = i; j > 0 && idx[j] < idx[j - 1]; --j) {
                std::swap(idx[j], idx[j - 1]);
                sign = -sign;
            }
        for (std::size_t i = 1; i < idx.size(); ++i)
            if (idx[i] == idx[i - 1]) return 0;
        return sign;
    }

    std::size_t rank(const std::vector<int>& idx) const {
        // colexicographic rank of a strictly increasing tuple
        std::size_t r = 0;
        for (std::size_t q = 0; q < idx.size(); ++q) {
            std::size_t c = 1;
            for (std::size_t i = 0; i < q + 1; ++i) c = c * std::size_t(idx[q] - int(i)) / (i + 1);
            r += c;
        }
        return r;
    }
};

/// Invariant-formula exterior derivative in the moving frame.
inline FrameForm exterior_derivative(const PatchEval& pe, const FrameForm& F) {
    const int n = pe.frame_dim();
    const int p = F.degree();
    FrameForm out(p + 1, n, pe.chart_dim(), std::max(pe.order - 1, 0));
    std::vector<int> idx(static_cast<std::size_t>(p + 1));
    std::function<void(int, int)> walk = [&](int from, int pos) {
        if (pos == p + 1) {
            Jet acc = Jet::constant(pe.chart_dim(), std::max(pe.order - 1, 0), 0.0);
            // sum_q (-1)^q E_q( F(...hat q...) )
            for (int q = 0; q <= p; ++q) {
                std::vector<int> rest;
                for (int t = 0; t <= p; ++t)
                    if (t != q) rest.push_back(idx[std::size_t(t)]);
                Jet term = pe.dir(idx[std::size_t(q)], F.get(rest));
                acc += (q % 2 == 0) ? term : -term;
            }
            // sum_{q<r} (-1)^{q+r} F([E_q,E_r], ...rest...)
            for (int q = 0; q <= p; ++q)
                for (int r = q + 1; r <= p; ++r) {
                    std::vector<int> rest;
                    for (int t = 0; t <= p; ++t)
                        if (t != q && t != r) rest.push_back(idx[std::size_t(t)]);
                    Jet term = Jet::constant(pe.chart_dim(), std::max(pe.order - 1, 0), 0.0);
                    for (int m = 0; m < n; ++m) {
                        std::vector<int> args = {m};
                        args.insert(args.end(), rest.begin(), rest.end());
                        term += pe.c(idx[std::size_t(q)], idx[std::size_t(r)], m) * F.get(args);
                    }
                    acc += ((q + r) % 2 == 0) ? term : -term;
                }
            out.set_sorted(idx, acc);
            return;
        }
        for (int v = from; v < n; ++v) {
            idx[std::size_t(pos)] = v;
            walk(v + 1, pos + 1);
        }
    };
    walk(0, 0);
    return out;
}

}  // namespace wk
