#pragma once

/// Almost-Kähler structure on a declared-orthonormal frame patch.
///
/// The frame is J-adapted with the fixed pairing J e_{2a} = e_{2a+1},
/// J e_{2a+1} = -e_{2a} (0-based legs), so omega(e_{2a}, e_{2a+1}) = 1 and
/// everything J does to frame legs is a signed permutation.
///
/// Curvature forms, in the conventions of docs/conventions.md:
///   rho(X,Y)  = 1/2 sum_i <R^D_{X,Y} e_i, J e_i>       (first Chern-Ricci)
///   r(X,Y)    = 1/2 sum_i <R^D_{e_i, J e_i} X, Y>      (second Chern-Ricci)
///   rho*(X,Y) = 1/2 sum_i <R^g_{e_i, J e_i} X, Y>      (star-Ricci)
///   s^H = sum_i rho(e_i, J e_i) = sum_i r(e_i, J e_i)
/// with R the curvature of the canonical Hermitian connection
/// nabla = D^g - 1/2 J (D^g J) and R^g that of the Levi-Civita connection.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wavekahler/framegeo.hpp"

namespace wk {

/// J action on a frame leg: index and sign.
inline int jpair(int i) { return i ^ 1; }
inline double jsign(int i) { return (i % 2 == 0) ? 1.0 : -1.0; }

struct AKFrame {
    FramePatch patch;  // frame_dim must be even; legs paired (2a, 2a+1)
};

/// Per-point evaluation pipeline for an almost-Kähler frame.
class AKEval {
  public:
    AKEval(const AKFrame& s, const std::vector<double>& x, int order)
        : pe_(s.patch, x, order), n_(s.patch.frame_dim) {
        if (n_ % 2 != 0) throw construction_error("almost-Kähler frame needs even dimension");
        gamma_ = levi_civita(pe_);
        nabla_.resize(gamma_.size());
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k)
                    nabla_[idx3(n_, i, j, k)] =
                        0.5 * (gamma_[idx3(n_, i, j, k)] -
                               jsign(j) * jsign(jpair(k)) *
                                   gamma_[idx3(n_, i, jpair(j), jpair(k))]);
        nij_.resize(gamma_.size());
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k)
                    nij_[idx3(n_, i, j, k)] =
                        0.25 * (jsign(i) * jsign(j) * pe_.c(jpair(i), jpair(j), k) -
                                pe_.c(i, j, k) -
                                jsign(i) * jsign(jpair(k)) * pe_.c(jpair(i), j, jpair(k)) -
                                jsign(j) * jsign(jpair(k)) * pe_.c(i, jpair(j), jpair(k)));
    }

    const PatchEval& patch_eval() const { return pe_; }
    int frame_dim() const { return n_; }
    int chart_dim() const { return pe_.chart_dim(); }
    const ConnectionCoeffs& levi_civita_coeffs() const { return gamma_; }
    const ConnectionCoeffs& chern_coeffs() const { return nabla_; }

    /// <N(E_i,E_j), E_k>
    const Jet& nijenhuis(int i, int j, int k) const { return nij_[idx3(n_, i, j, k)]; }

    double nijenhuis_norm2() const {
        double s = 0.0;
        for (const auto& v : nij_) s += v.value() * v.value();
        return s;
    }

    const CurvatureTable& chern_curvature() const {
        if (!Rn_) Rn_ = curvature(pe_, nabla_);
        return *Rn_;
    }
    const CurvatureTable& lc_curvature() const {
        if (!Rg_) Rg_ = curvature(pe_, gamma_);
        return *Rg_;
    }

    /// omega as a frame 2-form (canonical under the pairing).
    FrameForm omega() const {
        FrameForm w(2, n_, chart_dim(), pe_.order);
        for (int a = 0; a < n_; a += 2)
            w.set_sorted({a, a + 1}, Jet::constant(chart_dim(), pe_.order, 1.0));
        return w;
    }

    FrameForm first_chern_ricci() const { return trace_form_first(chern_curvature()); }
    FrameForm second_chern_ricci() const { return trace_form_second(chern_curvature()); }
    FrameForm star_ricci() const { return trace_form_second(lc_curvature()); }

    /// trace of a 2-form against omega: sum_i F(e_i, J e_i).
    Jet trace_omega(const FrameForm& F) const {
        Jet acc;
        bool first = true;
        for (int i = 0; i < n_; ++i) {
            Jet t = jsign(i) * F.get({i, jpair(i)});
            if (first) { acc = t; first = false; }
            else acc += t;
        }
        return acc;
    }

    Jet hermitian_scalar() const { return trace_omega(first_chern_ricci()); }
    Jet riemannian_scalar() const { return scalar_curvature(pe_, lc_curvature()); }
    Jet star_scalar() const { return trace_omega(star_ricci()); }

    /// max over frame triples of |<(D_A J)B, C> - 2<JA, N(B,C)>|
    double ak_relation_residual() const {
        double m = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k) {
                    const double dj = jsign(j) * gamma_[idx3(n_, i, jpair(j), k)].value() -
                                      jsign(jpair(k)) * gamma_[idx3(n_, i, j, jpair(k))].value();
                    const double nn = 2.0 * jsign(i) * nij_[idx3(n_, j, k, jpair(i))].value();
                    m = std::max(m, std::abs(dj - nn));
                }
        return m;
    }

    /// residuals of the defining properties of the canonical connection
    struct ChernReport {
        double metricity;    // max |nabla[i][j][k] + nabla[i][k][j]|
        double preserves_j;  // max |<(nabla_i J)e_j, e_k>|
        double torsion_vs_n; // max |torsion - N|
    };
    ChernReport chern_connection_report() const {
        ChernReport rep{0, 0, 0};
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k) {
                    rep.metricity = std::max(rep.metricity,
                                             std::abs(nabla_[idx3(n_, i, j, k)].value() +
                                                      nabla_[idx3(n_, i, k, j)].value()));
                    const double nj = jsign(j) * nabla_[idx3(n_, i, jpair(j), k)].value() -
                                      jsign(jpair(k)) * nabla_[idx3(n_, i, j, jpair(k))].value();
                    rep.preserves_j = std::max(rep.preserves_j, std::abs(nj));
                    const double tor = nabla_[idx3(n_, i, j, k)].value() -
                                       nabla_[idx3(n_, j, i, k)].value() - pe_.c(i, j, k).value();
                    rep.torsion_vs_n =
                        std::max(rep.torsion_vs_n, std::abs(tor - nij_[idx3(n_, i, j, k)].value()));
                }
        return rep;
    }

    /// Structural identity relating r, rho and two N-contractions; both sides
    /// are computed on independent paths and the max component difference is
    /// returned.
    double second_chern_formula_residual() const {
        FrameForm r = second_chern_ricci();
        FrameForm rho = first_chern_ricci();
        double m = 0.0;
        for (int a = 0; a < n_; ++a)
            for (int b = a + 1; b < n_; ++b) {
                double rhs = 0.5 * (rho.value({a, b}) +
                                    jsign(a) * jsign(b) * rho.value({jpair(a), jpair(b)}));
                for (int i = 0; i < n_; ++i)
                    for (int k = 0; k < n_; ++k) {
                        rhs += jsign(a) * nij_[idx3(n_, i, k, jpair(a))].value() *
                               nij_[idx3(n_, i, k, b)].value();
                        rhs += nij_[idx3(n_, a, k, i)].value() * jsign(i) *
                               nij_[idx3(n_, b, k, jpair(i))].value();
                    }
                m = std::max(m, std::abs(r.value({a, b}) - rhs));
            }
        return m;
    }

    /// pointwise Einstein quotient and deviation of r from lambda * omega
    std::pair<double, double> sce_residual() const {
        FrameForm r = second_chern_ricci();
        const double lambda = trace_omega(r).value() / n_;
        FrameForm dev = r - lambda * omega();
        return {lambda, dev.max_abs()};
    }

    /// Killing residual of J grad s^H (the extremality defect).
    double extremality_residual() const {
        Jet sH = hermitian_scalar();
        if (sH.order() < 1)
            throw order_error("extremality residual needs jets of order >= 3 at the lift");
        std::vector<Jet> K;
        K.reserve(std::size_t(n_));
        for (int j = 0; j < n_; ++j)
            K.push_back(jsign(jpair(j)) * pe_.dir(jpair(j), sH));
        return killing_residual(pe_, gamma_, K);
    }

  private:
    PatchEval pe_;
    int n_;
    ConnectionCoeffs gamma_, nabla_, nij_;
    mutable std::optional<CurvatureTable> Rn_, Rg_;

    FrameForm trace_form_first(const CurvatureTable& R) const {
        FrameForm F(2, n_, chart_dim(), std::max(pe_.order - 2, 0));
        F.for_each_sorted([&](const std::vector<int>& ab) {
            Jet acc = Jet::constant(chart_dim(), std::max(pe_.order - 2, 0), 0.0);
            for (int i = 0; i < n_; ++i)
                acc += 0.5 * jsign(i) * R[idx4(n_, ab[0], ab[1], i, jpair(i))];
            F.set_sorted(ab, acc);
        });
        return F;
    }

    FrameForm trace_form_second(const CurvatureTable& R) const {
        FrameForm F(2, n_, chart_dim(), std::max(pe_.order - 2, 0));
        F.for_each_sorted([&](const std::vector<int>& ab) {
            Jet acc = Jet::constant(chart_dim(), std::max(pe_.order - 2, 0), 0.0);
            for (int i = 0; i < n_; ++i)
                acc += 0.5 * jsign(i) * R[idx4(n_, i, jpair(i), ab[0], ab[1])];
            F.set_sorted(ab, acc);
        });
        return F;
    }
};

/// Point diagnostics bundle: forms, scalars, named residuals.
struct CurvatureReport {
    std::vector<double> point;
    FrameForm rho, r, rho_star;
    double s_h = 0, s_g = 0, s_star = 0;
    double nijenhuis_norm2 = 0;
    std::map<std::string, double> residuals;
};

/// The standard identity battery at one point. `order` >= 4 enables the
/// d(rho) closedness check; the almost-Kähler condition d(omega) = 0 is
/// checked, not assumed.
inline CurvatureReport curvature_report(const AKFrame& s, const std::vector<double>& x,
                                        int order = 4) {
    AKEval e(s, x, order);
    CurvatureReport rep;
    rep.point = x;
    Jet sH = e.hermitian_scalar();
    FrameForm r = e.second_chern_ricci();
    FrameForm rho = e.first_chern_ricci();
    FrameForm rhostar = e.star_ricci();
    rep.rho = rho;
    rep.r = r;
    rep.rho_star = rhostar;
    rep.s_h = sH.value();
    rep.s_g = e.riemannian_scalar().value();
    rep.s_star = e.star_scalar().value();
    rep.nijenhuis_norm2 = e.nijenhuis_norm2();

    auto& res = rep.residuals;
    res["d_omega"] = exterior_derivative(e.patch_eval(), e.omega()).max_abs();
    res["d_rho"] = exterior_derivative(e.patch_eval(), rho).max_abs();
    res["trace_equality"] = std::abs(sH.value() - e.trace_omega(r).value());
    double jinv = 0.0;
    r.for_each_sorted([&](const std::vector<int>& ab) {
        jinv = std::max(jinv, std::abs(r.value({ab[0], ab[1]}) -
                                       jsign(ab[0]) * jsign(ab[1]) *
                                           r.value({jpair(ab[0]), jpair(ab[1])})));
    });
    res["r_j_invariance"] = jinv;
    res["ak_relation"] = e.ak_relation_residual();
    auto chern = e.chern_connection_report();
    res["chern_metricity"] = chern.metricity;
    res["chern_preserves_j"] = chern.preserves_j;
    res["chern_torsion_vs_n"] = chern.torsion_vs_n;
    res["second_chern_formula"] = e.second_chern_formula_residual();
    auto [lambda, sce] = e.sce_residual();
    res["sce"] = sce;
    res["sce_lambda"] = lambda;
    return rep;
}

}  // namespace wk
