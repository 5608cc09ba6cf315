#pragma once

/// The six-dimensional cohomogeneity-one family over the first Hirzebruch
/// surface.
///
/// Base metric g_M = h^2 (e1 (x) e1 + e2 (x) e2) + h^2 h'^2 e3 (x) e3 + dt^2
/// with S^3 frame fields X, Y, V obeying [X,Y] = 2V, [Y,V] = 2X, [V,X] = 2Y;
/// the orthonormal legs are E1 = X/h, E2 = Y/h, E3 = V/(h h'), E4 = d/dt
/// with J-pairs (E1, E2) and (E3, E4).
///
/// The profile ODE  -h'''/h' - h''/h + 8 h'^2/h^2 - 8/h^2 = 0  is solved in
/// closed form through y(h) = h'^2: y = c1 h^4 + c2 h^{-4} + 1 with both
/// boundary orders pinned, which forces h_l / h_0 = 3^{1/4} (the positive
/// root of 3 - x^4). The arclength map t(h) is a quadrature with
/// inverse-square-root endpoint behavior, removed by h = m - R cos(s):
/// y factors as (-c1)(h^4 - h0^4)(hl^4 - h^4)/h^4, so the integrand
/// 1/sqrt(w(h(s))) with w = y/((h - h0)(hl - h)) is smooth on [0, pi].

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "wavekahler/akcore.hpp"
#include "wavekahler/framegeo.hpp"
#include "wavekahler/util.hpp"
#include "wavekahler/wavebuild.hpp"

namespace wk {

class HirzebruchProfile {
  public:
    // c1, c2 are the working coefficients used by every substitution-based
    // formula; trajectory data (the t/h grids and the derivative closures
    // below) are frozen from the construction-time values so that
    // perturbation experiments on c1/c2 register as ODE residuals.
    double h0 = 1.0, hl = 0.0, c1 = 0.0, c2 = 0.0, l = 0.0;

    static HirzebruchProfile solve(double h0, int grid = 512) {
        if (!(h0 > 0.0)) throw domain_error("profile needs h0 > 0");
        HirzebruchProfile p;
        p.h0 = h0;
        p.ratio_ = endpoint_ratio();
        p.hl = p.ratio_ * h0;
        const double h04 = std::pow(h0, 4), hl4 = std::pow(p.hl, 4);
        p.c1 = -1.0 / (h04 + hl4);
        p.c2 = -h04 * hl4 / (h04 + hl4);
        p.bc1_ = p.c1;
        p.bc2_ = p.c2;
        p.mid_ = 0.5 * (p.h0 + p.hl);
        p.rad_ = 0.5 * (p.hl - p.h0);
        p.build_grids(grid);
        return p;
    }

    /// positive root of 3 - x^4 by bisected Newton (closed form 3^{1/4})
    static double endpoint_ratio() {
        double x = 1.5;
        for (int it = 0; it < 200; ++it) {
            const double f = 3.0 - x * x * x * x;
            const double df = -4.0 * x * x * x;
            const double step = f / df;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        if (std::abs(3.0 - x * x * x * x) > 1e-12)
            throw numeric_error("endpoint ratio root-finding failed to converge");
        return x;
    }

    // y and its h-derivatives from the working coefficients
    double y(double h) const { return c1 * std::pow(h, 4) + c2 * std::pow(h, -4) + 1.0; }
    double yp(double h) const { return 4 * c1 * std::pow(h, 3) - 4 * c2 * std::pow(h, -5); }
    double ypp(double h) const { return 12 * c1 * h * h + 20 * c2 * std::pow(h, -6); }
    double yppp(double h) const { return 24 * c1 * h - 120 * c2 * std::pow(h, -7); }

    template <typename T>
    T y_jet(const T& h) const {
        return c1 * powi(h, 4) + c2 / powi(h, 4) + 1.0;
    }

    /// trajectory h(t): bracket on the cached grid, then Newton in s
    double h_of_t(double t) const {
        if (t <= 0.0) return h0;
        if (t >= l) return hl;
        std::size_t lo = 0, hi = tgrid_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (tgrid_[mid] <= t ? lo : hi) = mid;
        }
        double s = sgrid_[lo] +
                   (sgrid_[hi] - sgrid_[lo]) * (t - tgrid_[lo]) / (tgrid_[hi] - tgrid_[lo]);
        for (int it = 0; it < 60; ++it) {
            const double ft = t_of_s(s) - t;
            const double step = ft * std::sqrt(w_build(h_of_s(s)));
            s -= step;
            s = std::clamp(s, 0.0, M_PI);
            if (std::abs(step) < 1e-15) break;
        }
        return h_of_s(s);
    }

    /// trajectory dh/dt through the substitution-free route
    /// dh/dt = (dh/ds)/(dt/ds) = R sin(s) sqrt(w(h))
    double hp_of_t(double t) const {
        const double h = h_of_t(t);
        const double cs = std::clamp((mid_ - h) / rad_, -1.0, 1.0);
        const double s = std::acos(cs);
        return rad_ * std::sin(s) * std::sqrt(w_build(h));
    }

    /// quadrature map t(h) (construction-time coefficients)
    double t_of_h(double h) const {
        if (h <= h0) return 0.0;
        if (h >= hl) return l;
        const double cs = std::clamp((mid_ - h) / rad_, -1.0, 1.0);
        return t_of_s(std::acos(cs));
    }

    /// un-normalized derivative list h(t0), h'(t0), ..., h^(K)(t0) via the
    /// Taylor recursion for h' = sqrt(y(h)) (construction-time coefficients)
    std::vector<double> h_derivs(double t0, int order) const {
        const double hv = h_of_t(t0);
        Jet p = Jet::constant(1, order, hv);
        for (int m = 1; m <= order; ++m) {
            Jet q = sqrt(y_build_jet(p));
            const double am = q.coeff({m - 1}) / m;
            p.set_coeff({m}, am);
        }
        std::vector<double> d(std::size_t(order) + 1);
        double fact = 1.0;
        for (int m = 0; m <= order; ++m) {
            if (m > 1) fact *= m;
            d[std::size_t(m)] = p.coeff({m}) * fact;
        }
        return d;
    }

    /// h(t) as a field over a chart whose coordinate `t_index` is t
    ScalarField h_field(int t_index) const {
        auto self = *this;
        return [self, t_index](const JetPoint& p) {
            const Jet& tj = p.at(std::size_t(t_index));
            return compose(tj, self.h_derivs(tj.value(), tj.order()));
        };
    }

    /// H'(t) = sqrt(8 (4 - 4y - h y') / h^2) with the construction-time y;
    /// the sign is the positive branch
    double Hp_of_t(double t) const {
        const double h = h_of_t(t);
        const double A = (4.0 - 4.0 * y_build(h) - h * yp_build(h)) / (h * h);
        if (A < -1e-12) throw condition_violated_error("H'^2/8 went negative");
        return std::sqrt(8.0 * std::max(A, 0.0));
    }

    /// derivative list of H at t0: H^(m) = (m-1)-th derivative of H'(t)
    std::vector<double> H_derivs(double t0, int order) const {
        std::vector<double> hd = h_derivs(t0, order);
        // univariate jet of h at t0
        Jet hjet = Jet::constant(1, std::max(order - 1, 0), hd[0]);
        double fact = 1.0;
        for (int m = 1; m <= hjet.order(); ++m) {
            fact *= m;
            hjet.set_coeff({m}, hd[std::size_t(m)] / fact);
        }
        Jet A = (4.0 - 4.0 * y_build_jet(hjet) - hjet * yp_build_jet(hjet)) / (hjet * hjet);
        if (A.value() < -1e-12) throw condition_violated_error("H'^2/8 went negative");
        Jet Hp = sqrt(8.0 * A);
        std::vector<double> d(std::size_t(order) + 1);
        d[0] = H_of_t(t0);
        fact = 1.0;
        for (int m = 1; m <= order; ++m) {
            if (m > 1) fact *= (m - 1);
            d[std::size_t(m)] = Hp.coeff({m - 1}) * fact;
        }
        return d;
    }

    /// H(t) with the gauge H(0) = 0, from the cached cumulative table
    double H_of_t(double t) const {
        std::size_t lo = 0, hi = tgrid_.size() - 1;
        if (t <= 0.0) return 0.0;
        if (t >= l) return Hgrid_.back();
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (tgrid_[mid] <= t ? lo : hi) = mid;
        }
        // integrate the remainder from the bracketing node
        const double cs = std::clamp((mid_ - h_of_t(t)) / rad_, -1.0, 1.0);
        const double s_target = std::acos(cs);
        auto integrand = [this](double s) {
            const double h = h_of_s(s);
            const double A = (4.0 - 4.0 * y_build(h) - h * yp_build(h)) / (h * h);
            return std::sqrt(8.0 * std::max(A, 0.0)) / std::sqrt(w_build(h));
        };
        return Hgrid_[lo] + integrate_gl(integrand, sgrid_[lo], s_target, 4);
    }

    ScalarField H_field(int t_index) const {
        auto self = *this;
        return [self, t_index](const JetPoint& p) {
            const Jet& tj = p.at(std::size_t(t_index));
            return compose(tj, self.H_derivs(tj.value(), tj.order()));
        };
    }

    const std::vector<double>& s_grid() const { return sgrid_; }
    const std::vector<double>& t_grid() const { return tgrid_; }
    const std::vector<double>& h_grid() const { return hgrid_; }

  private:
    double ratio_ = 0.0, mid_ = 0.0, rad_ = 0.0;
    double bc1_ = 0.0, bc2_ = 0.0;  // construction-time coefficients
    std::vector<double> sgrid_, tgrid_, hgrid_, Hgrid_;

    double h_of_s(double s) const { return mid_ - rad_ * std::cos(s); }

    double y_build(double h) const { return bc1_ * std::pow(h, 4) + bc2_ * std::pow(h, -4) + 1.0; }
    double yp_build(double h) const { return 4 * bc1_ * std::pow(h, 3) - 4 * bc2_ * std::pow(h, -5); }

    template <typename T>
    T y_build_jet(const T& h) const {
        return bc1_ * powi(h, 4) + bc2_ / powi(h, 4) + 1.0;
    }
    template <typename T>
    T yp_build_jet(const T& h) const {
        return 4.0 * bc1_ * powi(h, 3) - 4.0 * bc2_ / powi(h, 5);
    }

    /// w(h) = y / ((h - h0)(hl - h)), evaluated in the factored form that is
    /// smooth and positive across the endpoints
    double w_build(double h) const {
        const double p1 = h * h * h + h * h * h0 + h * h0 * h0 + h0 * h0 * h0;
        const double p2 = hl * hl * hl + hl * hl * h + hl * h * h + h * h * h;
        return (-bc1_) * p1 * p2 / std::pow(h, 4);
    }

    double t_of_s(double s) const {
        // cached cumulative + exact tail on the open segment
        const double hs = M_PI / (double(sgrid_.size()) - 1.0);
        const std::size_t j = std::min(std::size_t(s / hs), sgrid_.size() - 1);
        auto integrand = [this](double sv) { return 1.0 / std::sqrt(w_build(h_of_s(sv))); };
        return tgrid_[j] + integrate_gl(integrand, sgrid_[j], s, 4);
    }

    void build_grids(int grid) {
        sgrid_.resize(std::size_t(grid) + 1);
        hgrid_.resize(std::size_t(grid) + 1);
        tgrid_.assign(std::size_t(grid) + 1, 0.0);
        const double hs = M_PI / grid;
        for (int j = 0; j <= grid; ++j) {
            sgrid_[std::size_t(j)] = j * hs;
            hgrid_[std::size_t(j)] = h_of_s(j * hs);
        }
        auto integrand = [this](double s) { return 1.0 / std::sqrt(w_build(h_of_s(s))); };
        for (int j = 1; j <= grid; ++j)
            tgrid_[std::size_t(j)] = tgrid_[std::size_t(j - 1)] +
                                     integrate_gl(integrand, sgrid_[std::size_t(j - 1)],
                                                  sgrid_[std::size_t(j)], 2);
        l = tgrid_.back();
        // cumulative H' dt for the H(t) table
        std::vector<double> hp(std::size_t(grid) + 1);
        for (int j = 0; j <= grid; ++j) {
            const double h = hgrid_[std::size_t(j)];
            const double A = (4.0 - 4.0 * y_build(h) - h * yp_build(h)) / (h * h);
            hp[std::size_t(j)] = std::sqrt(8.0 * std::max(A, 0.0)) / std::sqrt(w_build(h));
        }
        Hgrid_ = cumulative_integral(hp, hs);
    }
};

struct OdeResidual {
    double t_form = 0.0;
    double y_form = 0.0;
    double max() const { return std::max(t_form, y_form); }
};

/// ODE residuals at interior samples. The y-form substitutes the working
/// coefficients; the t-form takes h and h' from the stored trajectory and
/// h'', h''' from the working coefficients, so coefficient perturbations
/// after construction show up as nonzero residuals.
inline OdeResidual ode_residual(const HirzebruchProfile& p, const std::vector<double>& ts) {
    OdeResidual out;
    for (double t : ts) {
        if (t <= 0.0 || t >= p.l)
            throw precondition_error("ODE residual needs interior samples (h' = 0 at the ends)");
        const double h = p.h_of_t(t);
        const double hp = p.hp_of_t(t);
        const double hpp = 0.5 * p.yp(h);
        const double hppp = 0.5 * p.ypp(h) * hp;
        const double tform =
            -hppp / hp - hpp / h + 8.0 * hp * hp / (h * h) - 8.0 / (h * h);
        const double yform = -0.5 * p.ypp(h) - p.yp(h) / (2.0 * h) + 8.0 * p.y(h) / (h * h) -
                             8.0 / (h * h);
        out.t_form = std::max(out.t_form, std::abs(tform));
        out.y_form = std::max(out.y_form, std::abs(yform));
    }
    return out;
}

struct HReconstruction {
    std::vector<double> t, Hp, H;
    double expr_agreement = 0.0;  // max |A - B| of the two printed expressions
};

/// H' from the positive square root of 8 (4 - 4h'^2 - 2hh'')/h^2; the second
/// printed expression -(5h'h'' + hh''')/(2hh') must agree at interior points.
inline HReconstruction reconstruct_H(const HirzebruchProfile& p, const std::vector<double>& ts) {
    HReconstruction out;
    for (double t : ts) {
        const double h = p.h_of_t(t);
        const double A = (4.0 - 4.0 * p.y(h) - h * p.yp(h)) / (h * h);
        if (A < -1e-12) throw condition_violated_error("H'^2/8 went negative");
        const bool interior = t > 0.0 && t < p.l;
        if (interior) {
            const double B = -(5.0 * p.yp(h) + h * p.ypp(h)) / (4.0 * h);
            out.expr_agreement = std::max(out.expr_agreement, std::abs(A - B));
        }
        out.t.push_back(t);
        out.Hp.push_back(std::sqrt(8.0 * std::max(A, 0.0)));
        out.H.push_back(p.H_of_t(t));
    }
    return out;
}

struct BoundaryReport {
    std::map<std::string, double> residuals;
    std::string note =
        "odd derivatives h^(2p+1) for p >= 2 are outside the shipped checks";
};

/// Endpoint conditions through the y-representation (one-sided limits):
/// h'' = y'/2 pins h''(0) = 1/h0 and h''(l) = -1/hl; h' = sqrt(y) and
/// h''' = y'' h'/2 vanish where y does.
inline BoundaryReport boundary_smoothness_check(const HirzebruchProfile& p) {
    BoundaryReport rep;
    auto& r = rep.residuals;
    r["y_at_h0"] = std::abs(p.y(p.h0));
    r["y_at_hl"] = std::abs(p.y(p.hl));
    r["yp_at_h0"] = std::abs(p.yp(p.h0) - 2.0 / p.h0);
    r["yp_at_hl"] = std::abs(p.yp(p.hl) + 2.0 / p.hl);
    r["hpp_0"] = std::abs(0.5 * p.yp(p.h0) - 1.0 / p.h0);
    r["hpp_l"] = std::abs(0.5 * p.yp(p.hl) + 1.0 / p.hl);
    const double hp0 = std::sqrt(std::max(p.y(p.h0), 0.0));
    const double hpl = std::sqrt(std::max(p.y(p.hl), 0.0));
    r["hp_0"] = hp0;
    r["hp_l"] = hpl;
    r["hppp_0"] = std::abs(0.5 * p.ypp(p.h0) * hp0);
    r["hppp_l"] = std::abs(0.5 * p.ypp(p.hl) * hpl);
    return rep;
}

/// Abstract 4-dimensional base frame (chart: t).
inline BaseAK make_hirzebruch_base(const HirzebruchProfile& p) {
    BaseAK b;
    b.preset = BaseAK::Preset::Abstract;
    b.name = "hirzebruch";
    FramePatch& fp = b.ak.patch;
    fp.kind = FramePatch::Kind::Abstract;
    fp.coords = {"t"};
    fp.domain.range = {{0.0, p.l}};
    fp.frame_dim = 4;
    auto zero = constant_field(0.0);
    auto one = constant_field(1.0);
    fp.comp = {{zero}, {zero}, {zero}, {one}};

    ScalarField h = p.h_field(0);
    auto prof = p;
    ScalarField hp = [prof, h](const JetPoint& q) { return sqrt(prof.y_jet(h(q))); };
    ScalarField hpp = [prof, h](const JetPoint& q) {
        Jet hj = h(q);
        return 0.5 * (4.0 * prof.c1 * powi(hj, 3) - 4.0 * prof.c2 / powi(hj, 5));
    };

    // [E1,E2] = (2h'/h) E3; [E2,E3] = (2/(hh')) E1; [E3,E1] = (2/(hh')) E2;
    // [E4,Ei] = -(h'/h) Ei for i=1,2; [E4,E3] = -((h'^2 + hh'')/(hh')) E3
    fp.brackets.push_back({0, 1, 2, [h, hp](const JetPoint& q) { return 2.0 * hp(q) / h(q); }});
    fp.brackets.push_back({1, 2, 0, [h, hp](const JetPoint& q) { return 2.0 / (h(q) * hp(q)); }});
    fp.brackets.push_back({2, 0, 1, [h, hp](const JetPoint& q) { return 2.0 / (h(q) * hp(q)); }});
    fp.brackets.push_back({3, 0, 0, [h, hp](const JetPoint& q) { return -hp(q) / h(q); }});
    fp.brackets.push_back({3, 1, 1, [h, hp](const JetPoint& q) { return -hp(q) / h(q); }});
    fp.brackets.push_back({3, 2, 2, [h, hp, hpp](const JetPoint& q) {
                               Jet hj = h(q), hpj = hp(q);
                               return -(hpj * hpj + hj * hpp(q)) / (hj * hpj);
                           }});
    return b;
}

/// Coordinate model of the same base: S^3 realized as the unit quaternions,
/// stereographic chart xi in R^3, frame fields the left-invariant
/// L_i, L_j, L_k (which satisfy exactly the bracket data of the abstract
/// patch). Used to cross-validate the two patch kinds on this geometry.
inline BaseAK make_hirzebruch_base_coordinate(const HirzebruchProfile& p) {
    BaseAK b;
    b.preset = BaseAK::Preset::Abstract;
    b.name = "hirzebruch-coordinate";
    FramePatch& fp = b.ak.patch;
    fp.kind = FramePatch::Kind::Coordinate;
    fp.coords = {"t", "a", "b", "c"};
    fp.domain.range = {{0.0, p.l}, {-0.4, 0.4}, {-0.4, 0.4}, {-0.4, 0.4}};
    fp.frame_dim = 4;

    ScalarField h = p.h_field(0);
    auto prof = p;
    ScalarField hp = [prof, h](const JetPoint& q) { return sqrt(prof.y_jet(h(q))); };

    // q(xi) = ((1 - |xi|^2), 2 xi) / (1 + |xi|^2); chart map xi(q) = q_{1:3}/(1 + q_0).
    // Pushforward of v at q: dxi_k(v) = (v_k (1 + q0) - xi_k v_0 (1 + q0)) / (1 + q0)^2
    //                               = (v_k - xi_k v_0) / (1 + q0).
    // Left-invariant fields: L_a(q) = q * a (quaternion product).
    enum { QI = 0, QJ = 1, QK = 2 };
    auto leg = [h, hp](int which, int axis, bool scale_by_hhp) -> ScalarField {
        return [which, axis, h, hp, scale_by_hhp](const JetPoint& q) {
            const Jet &A = q[1], &B = q[2], &C = q[3];
            Jet r2 = A * A + B * B + C * C;
            Jet den = 1.0 + r2;
            Jet q0 = (1.0 - r2) / den;
            Jet q1 = 2.0 * A / den, q2 = 2.0 * B / den, q3 = 2.0 * C / den;
            // v = q * {i, j, k}
            Jet v0, v1, v2, v3;
            if (which == QI) { v0 = -q1; v1 = q0; v2 = q3; v3 = -q2; }
            else if (which == QJ) { v0 = -q2; v1 = -q3; v2 = q0; v3 = q1; }
            else { v0 = -q3; v1 = q2; v2 = -q1; v3 = q0; }
            Jet xi = (axis == 0 ? A : axis == 1 ? B : C);
            Jet vk = (axis == 0 ? v1 : axis == 1 ? v2 : v3);
            Jet comp = (vk - xi * v0) / (1.0 + q0);
            Jet scale = scale_by_hhp ? 1.0 / (h(q) * hp(q)) : 1.0 / h(q);
            return comp * scale;
        };
    };
    auto zero = constant_field(0.0);
    auto one = constant_field(1.0);
    fp.comp = {
        {zero, leg(QI, 0, false), leg(QI, 1, false), leg(QI, 2, false)},  // E1 = L_i / h
        {zero, leg(QJ, 0, false), leg(QJ, 1, false), leg(QJ, 2, false)},  // E2 = L_j / h
        {zero, leg(QK, 0, true), leg(QK, 1, true), leg(QK, 2, true)},     // E3 = L_k / (h h')
        {one, zero, zero, zero},                                          // E4 = d/dt
    };
    return b;
}

/// Total 6-dimensional wave structure over the abstract base, H = H(t).
inline WaveStructure make_hirzebruch_wave(const HirzebruchProfile& p) {
    BaseAK base = make_hirzebruch_base(p);
    // chart of the total abstract patch is (t, theta)
    return build_wave(base, p.H_field(0), "hirzebruch H(t)");
}

struct SceCheck {
    std::vector<double> t, lambda;
    double coeff_spread = 0.0;       // max pairwise deviation of the three r coefficients
    double lambda_form = 0.0;        // max |lambda - 2 h^2 / h0^4|
    double generic_vs_display = 0.0; // generic r against the printed display
    double generic_vs_prop = 0.0;    // generic r against rho_M - H'^2/8 E3^E4 + H'^2/8 dth^dph
    double trace_identity = 0.0;     // |s^H - 6 lambda|
};

/// Second-Chern-Einstein verification for the six-dimensional family, both
/// through the printed coefficient display and through the generic frame
/// machinery on the cohomogeneity-one patch.
inline SceCheck sce_check_dim6(const HirzebruchProfile& p, const std::vector<double>& ts,
                               int generic_samples = 6) {
    SceCheck out;
    for (double t : ts) {
        if (t <= 0.0 || t >= p.l)
            throw precondition_error("interior samples required");
        const double h = p.h_of_t(t);
        const double hp = p.hp_of_t(t);
        const double hpp = 0.5 * p.yp(h);
        const double hppp = 0.5 * p.ypp(h) * hp;
        const double Hp2_8 = (4.0 - 4.0 * hp * hp - 2.0 * h * hpp) / (h * h);
        const double cE12 = (4.0 - 4.0 * hp * hp - 2.0 * h * hpp) / (h * h);
        const double cE34 = -((5.0 * hp * hpp + h * hppp) / (h * hp) + Hp2_8);
        const double cTJT = Hp2_8;
        const double lambda = (cE12 + cE34 + cTJT) / 3.0;
        out.t.push_back(t);
        out.lambda.push_back(lambda);
        out.coeff_spread = std::max({out.coeff_spread, std::abs(cE12 - cE34),
                                     std::abs(cE12 - cTJT), std::abs(cE34 - cTJT)});
        out.lambda_form =
            std::max(out.lambda_form, std::abs(lambda - 2.0 * h * h / std::pow(p.h0, 4)));
    }

    // generic machinery on the abstract frame at a subset of the samples
    WaveStructure w = make_hirzebruch_wave(p);
    BaseAK base = make_hirzebruch_base(p);
    const int step = std::max(1, int(ts.size()) / std::max(1, generic_samples));
    for (std::size_t qi = 0; qi < ts.size(); qi += std::size_t(step)) {
        const double t = ts[qi];
        const double h = p.h_of_t(t);
        const double hp = p.hp_of_t(t);
        const double hpp = 0.5 * p.yp(h);
        const double hppp = 0.5 * p.ypp(h) * hp;
        const double Hp2_8 = (4.0 - 4.0 * hp * hp - 2.0 * h * hpp) / (h * h);

        AKEval e(w.total, {t, 1.234}, 4);
        FrameForm r = e.second_chern_ricci();
        // printed display: coefficients on E1^E2, E3^E4 and dtheta^dphi (the
        // latter evaluates to T^b ^ (JT)^b in the frame)
        const double cE12 = (4.0 - 4.0 * hp * hp - 2.0 * h * hpp) / (h * h);
        const double cE34 = -((5.0 * hp * hpp + h * hppp) / (h * hp) + Hp2_8);
        double worst = std::max({std::abs(r.value({0, 1}) - cE12),
                                 std::abs(r.value({2, 3}) - cE34),
                                 std::abs(r.value({4, 5}) - Hp2_8)});
        for (int i = 0; i < 6; ++i)
            for (int j = i + 1; j < 6; ++j) {
                const bool diag = (i == 0 && j == 1) || (i == 2 && j == 3) || (i == 4 && j == 5);
                if (!diag) worst = std::max(worst, std::abs(r.value({i, j})));
            }
        out.generic_vs_display = std::max(out.generic_vs_display, worst);

        // proposition route: rho_M from the generic machinery on the base
        AKEval ebase(base.ak, {t}, 4);
        FrameForm rho_m = ebase.first_chern_ricci();
        double prop = 0.0;
        for (int i = 0; i < 6; ++i)
            for (int j = i + 1; j < 6; ++j) {
                double expected = (i < 4 && j < 4) ? rho_m.value({i, j}) : 0.0;
                if (i == 2 && j == 3) expected -= Hp2_8;  // -(1/8)H'^2 E3^E4
                if (i == 4 && j == 5) expected += Hp2_8;  // +(1/8)H'^2 dth^dph
                prop = std::max(prop, std::abs(r.value({i, j}) - expected));
            }
        out.generic_vs_prop = std::max(out.generic_vs_prop, prop);

        const double lambda = (cE12 + cE34 + Hp2_8) / 3.0;
        out.trace_identity = std::max(
            out.trace_identity, std::abs(e.hermitian_scalar().value() - 6.0 * lambda));
    }
    return out;
}

}  // namespace wk
