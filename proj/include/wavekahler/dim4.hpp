#pragma once

/// The four-dimensional case: isothermal surface bases, the closed forms for
/// the Chern-Ricci forms of the wave over a surface, the second-Chern-
/// Einstein constraint |grad H|^2 = 2 s^H_Sigma, and the axisymmetric
/// conformal-factor solve on the round sphere.
///
/// Chart layout of the wave over a surface: (theta, phi, x, y) with frame
/// legs {X, JX, T, JT} = {0, 1, 2, 3}.
///
/// Conventions: J acts on 1-forms by (J a)(V) = -a(JV), so J dx = dy,
/// J dy = -dx and -dJdu = -(Laplacian u) dx^dy. The sphere solve uses the
/// positive Laplacian (the curvature of e^{2f} g_0 is e^{-2f}(1 + Lap f));
/// the degree-2 calibration profile pins this choice.

#include <cmath>
#include <string>
#include <vector>

#include "wavekahler/expr.hpp"
#include "wavekahler/wavebuild.hpp"

namespace wk {

struct IsothermalSurface {
    ScalarField u;  // conformal factor over (x, y)
    Box domain;
    std::string name = "isothermal";

    BaseAK base() const { return make_isothermal(u, domain, name); }
};

inline IsothermalSurface round_sphere_surface() {
    return {sphere_conformal_factor(), Box{{{-1.5, 1.5}, {-1.5, 1.5}}}, "sphere"};
}

/// The complementary stereographic chart (projection from the opposite
/// pole). The round conformal factor has the same formula; the transition on
/// the overlap is (x, y) -> (x, -y) / (x^2 + y^2), under which the geometric
/// height flips sign.
inline IsothermalSurface round_sphere_surface_south() {
    IsothermalSurface s = round_sphere_surface();
    s.name = "sphere-south";
    return s;
}

/// Map a north-chart point to the same geometric point in the south chart.
inline std::vector<double> sphere_chart_transition(const std::vector<double>& xy) {
    const double r2 = xy[0] * xy[0] + xy[1] * xy[1];
    if (r2 < 1e-14) throw domain_error("chart transition is singular at the origin");
    return {xy[0] / r2, -xy[1] / r2};
}

/// s^H of the surface, two ways: frame curvature, and -2 e^{-2u} (flat
/// Laplacian of u). For a surface s^H equals the Riemannian scalar
/// curvature, i.e. twice the Gaussian curvature.
inline std::pair<double, double> surface_scalar_two_ways(const IsothermalSurface& surf,
                                                         const std::vector<double>& xy) {
    BaseAK b = surf.base();
    PatchEval pe(b.ak.patch, xy, 3);
    auto R = curvature(pe, levi_civita(pe));
    const double via_frame = scalar_curvature(pe, R).value();
    Jet uj = surf.u(pe.pt);
    const double lap = uj.derivative(0).derivative(0).value() + uj.derivative(1).derivative(1).value();
    const double via_formula = -2.0 * std::exp(-2.0 * uj.value()) * lap;
    return {via_frame, via_formula};
}

/// Coordinate 2-form with jet coefficients, evaluated on the frame legs.
inline FrameForm coord2_to_frame(const PatchEval& pe,
                                 const std::vector<std::tuple<int, int, Jet>>& terms) {
    const int n = pe.frame_dim();
    FrameForm F(2, n, pe.chart_dim(), pe.order);
    F.for_each_sorted([&](const std::vector<int>& ij) {
        const int i = ij[0], j = ij[1];
        Jet acc = Jet::constant(pe.chart_dim(), pe.order, 0.0);
        for (const auto& [a, b, cf] : terms)
            acc += cf * (pe.comp[std::size_t(i)][std::size_t(a)] *
                             pe.comp[std::size_t(j)][std::size_t(b)] -
                         pe.comp[std::size_t(i)][std::size_t(b)] *
                             pe.comp[std::size_t(j)][std::size_t(a)]);
        F.set_sorted(ij, acc);
    });
    return F;
}

/// Closed form of the second-Chern-Ricci form of the wave over a surface,
/// evaluated termwise. One sign in the printed source display (the
/// H H_{x theta} contribution to the dtheta^dy coefficient) is corrected
/// here: the J-invariant-part algebra forces +H H_{x theta}/4, which is also
/// the only choice that keeps r J-invariant; the generic-machinery
/// cross-check confirms it to machine precision.
inline FrameForm closed_form_r(const IsothermalSurface& surf, const WaveStructure& w,
                               const std::vector<double>& x) {
    PatchEval pe(w.total.patch, x, 3);
    Jet hj = w.H(pe.pt);
    JetPoint base_pt(pe.pt.begin() + 2, pe.pt.end());
    Jet uj = surf.u(base_pt);

    const int th = 0, ph = 1, ix = 2, iy = 3;
    Jet H = hj;
    Jet Hxt = hj.derivative(ix).derivative(th);
    Jet Hyt = hj.derivative(iy).derivative(th);
    // uj sits on the total chart, so x and y are slots 2 and 3
    Jet lap_u = uj.derivative(ix).derivative(ix) + uj.derivative(iy).derivative(iy);
    Jet e2u = exp(2.0 * uj);
    // |grad H|^2 in the orthonormal frame: X(H)^2 + (JX H)^2
    Jet snorm = exp(-2.0 * uj) * (hj.derivative(ix) * hj.derivative(ix) +
                                  hj.derivative(iy) * hj.derivative(iy));

    std::vector<std::tuple<int, int, Jet>> terms = {
        {ix, iy, -lap_u - 0.125 * snorm * e2u},
        {th, ix, 0.25 * (Hxt - H * Hyt)},
        {th, iy, 0.25 * (Hyt + H * Hxt)},
        {ph, ix, -0.5 * Hyt},
        {ph, iy, 0.5 * Hxt},
        {th, ph, 0.125 * snorm},
    };
    return coord2_to_frame(pe, terms);
}

/// max component difference between the closed form and the generic r.
inline double closed_form_r_residual(const IsothermalSurface& surf, const WaveStructure& w,
                                     const std::vector<double>& x) {
    AKEval e(w.total, x, 4);
    return (e.second_chern_ricci() - closed_form_r(surf, w, x)).max_abs();
}

/// The torsion 1-forms of the two J-anti-invariant 2-forms of the wave over
/// a surface, the defining residuals d(phi) - tau ^ phi, and the
/// first-Chern-Ricci form reconstructed from them.
struct TauForms {
    std::vector<double> tau_phi;     // coordinate components (theta, phi, x, y)
    std::vector<double> tau_jphi;
    double dphi_residual = 0.0;      // |d phi_aj - tau_phi ^ phi_aj|
    double djphi_residual = 0.0;
    FrameForm rho;                   // -1/2 d(J tau_phi + J tau_jphi)
    double rho_vs_generic = 0.0;
};

/// wedge of a frame 1-form and a frame 2-form
inline FrameForm wedge12(const FrameForm& a, const FrameForm& b, const PatchEval& pe) {
    const int n = a.frame_dim();
    FrameForm out(3, n, pe.chart_dim(), pe.order);
    out.for_each_sorted([&](const std::vector<int>& idx) {
        Jet acc = a.get({idx[0]}) * b.get({idx[1], idx[2]}) -
                  a.get({idx[1]}) * b.get({idx[0], idx[2]}) +
                  a.get({idx[2]}) * b.get({idx[0], idx[1]});
        out.set_sorted(idx, acc);
    });
    return out;
}

inline TauForms tau_forms(const IsothermalSurface& surf, const WaveStructure& w,
                          const std::vector<double>& x) {
    TauForms out;
    AKEval e(w.total, x, 4);
    const PatchEval& pe = e.patch_eval();
    Jet hj = w.H(pe.pt);
    JetPoint base_pt(pe.pt.begin() + 2, pe.pt.end());
    Jet uj = surf.u(base_pt);
    const int th = 0, ix = 2, iy = 3;

    Jet ux = uj.derivative(ix), uy = uj.derivative(iy);
    Jet Hx = hj.derivative(ix), Hy = hj.derivative(iy);

    // tau_phi = du + (Hx - Hy)/2 (dx + dy); tau_jphi = du - (Hx + Hy)/2 (dx - dy)
    Jet tp_x = ux + 0.5 * (Hx - Hy);
    Jet tp_y = uy + 0.5 * (Hx - Hy);
    Jet tj_x = ux - 0.5 * (Hx + Hy);
    Jet tj_y = uy + 0.5 * (Hx + Hy);
    out.tau_phi = {0.0, 0.0, tp_x.value(), tp_y.value()};
    out.tau_jphi = {0.0, 0.0, tj_x.value(), tj_y.value()};

    // the two anti-invariant 2-forms, constant in the frame:
    // phi_aj = X^b ^ T^b - (JX)^b ^ (JT)^b ; jphi_aj = X^b ^ (JT)^b + (JX)^b ^ T^b
    const int n = 4;
    FrameForm phi_aj(2, n, pe.chart_dim(), pe.order), jphi_aj(2, n, pe.chart_dim(), pe.order);
    Jet one = Jet::constant(pe.chart_dim(), pe.order, 1.0);
    phi_aj.set_sorted({0, 2}, one);
    phi_aj.set_sorted({1, 3}, -one);
    jphi_aj.set_sorted({0, 3}, one);
    jphi_aj.set_sorted({1, 2}, one);

    // tau as frame 1-forms via leg components
    auto tau_frame = [&](const Jet& cx, const Jet& cy) {
        FrameForm t(1, n, pe.chart_dim(), pe.order);
        for (int i = 0; i < n; ++i)
            t.set_sorted({i}, cx * pe.comp[std::size_t(i)][std::size_t(ix)] +
                                  cy * pe.comp[std::size_t(i)][std::size_t(iy)]);
        return t;
    };
    FrameForm tau_p = tau_frame(tp_x, tp_y);
    FrameForm tau_j = tau_frame(tj_x, tj_y);

    out.dphi_residual = (exterior_derivative(pe, phi_aj) - wedge12(tau_p, phi_aj, pe)).max_abs();
    out.djphi_residual = (exterior_derivative(pe, jphi_aj) - wedge12(tau_j, jphi_aj, pe)).max_abs();

    // rho = -1/2 d(J tau_phi + J tau_jphi); J(a dx + b dy) = -b dx + a dy.
    // The coordinate d picks up theta-derivatives of the coefficients too.
    Jet Sx = -(tp_y + tj_y);
    Jet Sy = tp_x + tj_x;
    std::vector<std::tuple<int, int, Jet>> dS = {
        {ix, iy, -0.5 * (Sy.derivative(ix) - Sx.derivative(iy))},
        {th, ix, -0.5 * Sx.derivative(th)},
        {th, iy, -0.5 * Sy.derivative(th)},
    };
    out.rho = coord2_to_frame(pe, dS);
    out.rho_vs_generic = (out.rho - e.first_chern_ricci()).max_abs();
    return out;
}

/// |  |grad H|^2_{g_Sigma} - 2 s^H_Sigma  | at a surface point. H lives on
/// the surface, so the ambient and surface gradients agree in norm.
inline double sce_constraint_residual(const IsothermalSurface& surf, const ScalarField& h_base,
                                      const std::vector<double>& xy) {
    BaseAK b = surf.base();
    PatchEval pe(b.ak.patch, xy, 3);
    Jet uj = surf.u(pe.pt);
    Jet hj = h_base(pe.pt);
    const double grad2 = std::exp(-2.0 * uj.value()) *
                         (hj.derivative(0).value() * hj.derivative(0).value() +
                          hj.derivative(1).value() * hj.derivative(1).value());
    auto R = curvature(pe, levi_civita(pe));
    const double sH = scalar_curvature(pe, R).value();
    return std::abs(grad2 - 2.0 * sH);
}

/// Total curvature of the base part of the first-Chern-Ricci form,
/// integrated over the full stereographic chart in polar coordinates
/// (rho = tan psi). For a metric extending over the sphere this is
/// 2 pi * Euler characteristic = 4 pi.
inline double gauss_bonnet_integral(const IsothermalSurface& surf, int n_psi = 96,
                                    int n_alpha = 32) {
    std::vector<double> gx, gw;
    gauss_legendre(n_psi, gx, gw);
    double total = 0.0;
    for (int q = 0; q < n_psi; ++q) {
        const double psi = 0.25 * M_PI * (gx[std::size_t(q)] + 1.0);
        const double wpsi = 0.25 * M_PI * gw[std::size_t(q)];
        const double rho = std::tan(psi);
        const double jac = rho / (std::cos(psi) * std::cos(psi));
        for (int a = 0; a < n_alpha; ++a) {
            const double alpha = 2.0 * M_PI * (a + 0.5) / n_alpha;
            const std::vector<double> xy = {rho * std::cos(alpha), rho * std::sin(alpha)};
            Jet uj = lift(surf.u, xy, 2);
            const double lap = uj.derivative(0).derivative(0).value() +
                               uj.derivative(1).derivative(1).value();
            total += wpsi * (2.0 * M_PI / n_alpha) * (-lap) * jac;
        }
    }
    return total;
}

/// Axisymmetric profile H(zeta) on the round sphere, zeta = z in [-1, 1];
/// either an expression or tabulated samples (natural cubic spline).
class AxisymmetricField {
  public:
    static AxisymmetricField from_expression(const Expr& e) {
        AxisymmetricField f;
        f.field_ = e.bind({"zeta"});
        return f;
    }
    static AxisymmetricField from_expression(const std::string& src) {
        return from_expression(parse_field(src).folded());
    }

    static AxisymmetricField from_table(std::vector<double> z, std::vector<double> h) {
        if (z.size() != h.size() || z.size() < 4)
            throw degenerate_input_error("tabulated profile needs >= 4 (zeta, H) pairs");
        AxisymmetricField f;
        f.tz_ = std::move(z);
        f.th_ = std::move(h);
        f.build_spline();
        return f;
    }

    Jet operator()(const Jet& zjet) const {
        if (field_) {
            JetPoint p = {zjet};
            return field_(p);
        }
        return spline_eval(zjet);
    }

  private:
    ScalarField field_;
    std::vector<double> tz_, th_, m_;  // spline second derivatives

    void build_spline() {
        const std::size_t n = tz_.size();
        m_.assign(n, 0.0);
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
        b[0] = 1.0;
        b[n - 1] = 1.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hp = tz_[i] - tz_[i - 1], hn = tz_[i + 1] - tz_[i];
            a[i] = hp / 6.0;
            b[i] = (hp + hn) / 3.0;
            c[i] = hn / 6.0;
            d[i] = (th_[i + 1] - th_[i]) / hn - (th_[i] - th_[i - 1]) / hp;
        }
        for (std::size_t i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        m_[n - 1] = d[n - 1] / b[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
    }

    Jet spline_eval(const Jet& zjet) const {
        const double z = zjet.value();
        std::size_t lo = 0, hi = tz_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (tz_[mid] <= z ? lo : hi) = mid;
        }
        const double h = tz_[hi] - tz_[lo];
        // cubic on [lo, hi]; Taylor coefficients at z
        const double A = (tz_[hi] - z) / h, B = (z - tz_[lo]) / h;
        const double f0 = A * th_[lo] + B * th_[hi] +
                          ((A * A * A - A) * m_[lo] + (B * B * B - B) * m_[hi]) * h * h / 6.0;
        const double f1 = (th_[hi] - th_[lo]) / h -
                          (3 * A * A - 1) * h * m_[lo] / 6.0 + (3 * B * B - 1) * h * m_[hi] / 6.0;
        const double f2 = A * m_[lo] + B * m_[hi];
        const double f3 = (m_[hi] - m_[lo]) / h;
        std::vector<double> derivs = {f0, f1, f2, f3};
        derivs.resize(std::size_t(zjet.order()) + 1, 0.0);  // the cubic's tail is exact zero
        return compose(zjet, derivs);
    }
};

/// Output of the axisymmetric conformal-factor solve. Grids are indexed by
/// s_j = j pi / grid_n with z_j = -cos(s_j) (Chebyshev-Lobatto in z, which
/// regularizes both poles).
struct SphereSolution {
    int grid_n = 0;
    double scale = 1.0;            // factor applied to H by the normalization
    double solvability_defect = 0; // |integral of psi dA| / (4 pi) after scaling
    std::vector<double> s, z, psi, G, f, fp, fpp, fppp, residual;
    AxisymmetricField h_input;     // the profile as supplied; scaled form is scale * h_input

    double max_residual() const {
        double m = 0.0;
        for (double r : residual) m = std::max(m, std::abs(r));
        return m;
    }

    /// f and derivatives at arbitrary z: grid nodes exactly, between nodes a
    /// quintic Hermite built from (f, f', f'') at the bracketing nodes.
    /// Supports jets of order <= 3.
    Jet f_jet(const Jet& zjet) const {
        const double zv = zjet.value();
        if (zjet.order() > 3)
            throw order_error("solved conformal factor carries derivatives up to order 3");
        // exact node?
        const std::size_t n = z.size();
        std::size_t lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (z[mid] <= zv ? lo : hi) = mid;
        }
        for (std::size_t j : {lo, hi})
            if (std::abs(z[j] - zv) < 1e-13)
                return compose(zjet, {f[j], fp[j], fpp[j], fppp[j]});
        // quintic Hermite on [lo, hi]
        const double h = z[hi] - z[lo];
        const double t = (zv - z[lo]) / h;
        double c[6];
        hermite_quintic_coeffs(f[lo], fp[lo] * h, fpp[lo] * h * h, f[hi], fp[hi] * h,
                               fpp[hi] * h * h, c);
        double d0 = 0, d1 = 0, d2 = 0, d3 = 0;
        for (int k = 5; k >= 0; --k) d0 = d0 * t + c[k];
        for (int k = 5; k >= 1; --k) d1 = d1 * t + k * c[k];
        for (int k = 5; k >= 2; --k) d2 = d2 * t + k * (k - 1) * c[k];
        for (int k = 5; k >= 3; --k) d3 = d3 * t + k * (k - 1) * (k - 2) * c[k];
        return compose(zjet, {d0, d1 / h, d2 / (h * h), d3 / (h * h * h)});
    }

    /// The solved conformal surface: u(x, y) = f(z) + log(2/(1 + rho^2)).
    /// `south_chart` selects the complementary stereographic chart, where the
    /// height reads (1 - rho^2)/(1 + rho^2); checks on the overlap compare
    /// the two through sphere_chart_transition.
    IsothermalSurface surface(bool south_chart = false) const {
        auto self = std::make_shared<SphereSolution>(*this);
        const double sign = south_chart ? -1.0 : 1.0;
        ScalarField u = [self, sign](const JetPoint& p) {
            Jet r2 = p[0] * p[0] + p[1] * p[1];
            Jet zc = sign * (r2 - 1.0) / (r2 + 1.0);
            return self->f_jet(zc) + log(2.0 / (1.0 + r2));
        };
        return {u, Box{{{-3.0, 3.0}, {-3.0, 3.0}}},
                south_chart ? "solved-sphere-south" : "solved-sphere"};
    }

    /// The normalized profile scale * H as a field over the surface chart.
    ScalarField h_base_field() const {
        auto hf = h_input;
        const double k = scale;
        return [hf, k](const JetPoint& p) {
            Jet r2 = p[0] * p[0] + p[1] * p[1];
            Jet zc = (r2 - 1.0) / (r2 + 1.0);
            return k * hf(zc);
        };
    }

  private:
    static void hermite_quintic_coeffs(double f0, double g0, double h0, double f1, double g1,
                                       double h1, double c[6]) {
        // unit-interval quintic matching value/1st/2nd data at t=0,1
        c[0] = f0;
        c[1] = g0;
        c[2] = 0.5 * h0;
        c[3] = 10 * (f1 - f0) - 6 * g0 - 4 * g1 - 1.5 * h0 + 0.5 * h1;
        c[4] = -15 * (f1 - f0) + 8 * g0 + 7 * g1 + 1.5 * h0 - h1;
        c[5] = 6 * (f1 - f0) - 3 * (g0 + g1) - 0.5 * (h0 - h1);
    }
};

/// Solve for f with |grad H|^2_0 = 4 + 4 Lap f on the unit round sphere,
/// after scaling H so the integral of |grad H|^2_0 is 16 pi. Axisymmetric
/// double quadrature on the s-grid; mean-zero gauge.
inline SphereSolution solve_conformal_factor(const AxisymmetricField& H, int grid_n) {
    if (grid_n < 8) throw degenerate_input_error("grid too small for the sphere solve");
    SphereSolution sol;
    sol.grid_n = grid_n;
    const int n = grid_n + 1;
    const double hs = M_PI / grid_n;
    sol.s.resize(static_cast<std::size_t>(n));
    sol.z.resize(static_cast<std::size_t>(n));
    std::vector<double> Hp(static_cast<std::size_t>(n)), Hpp(static_cast<std::size_t>(n)),
        Hppp(static_cast<std::size_t>(n)), Hpppp(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double s = j * hs;
        sol.s[std::size_t(j)] = s;
        sol.z[std::size_t(j)] = -std::cos(s);
        Jet zj = Jet::variable(1, 4, 0, sol.z[std::size_t(j)]);
        Jet hj = H(zj);
        Hp[std::size_t(j)] = partial(hj, {1});
        Hpp[std::size_t(j)] = partial(hj, {2});
        Hppp[std::size_t(j)] = partial(hj, {3});
        Hpppp[std::size_t(j)] = partial(hj, {4});
    }

    // normalization: integral of H'(z)^2 (1-z^2) dA = 2 pi int H'^2 sin^3 s ds
    std::vector<double> integrand(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double sin_s = std::sin(sol.s[std::size_t(j)]);
        integrand[std::size_t(j)] = Hp[std::size_t(j)] * Hp[std::size_t(j)] * sin_s * sin_s * sin_s;
    }
    const double I = 2.0 * M_PI * cumulative_integral(integrand, hs).back();
    if (I < 1e-12)
        throw degenerate_input_error(
            "profile has (numerically) zero gradient; the normalization integral vanishes");
    sol.scale = std::sqrt(16.0 * M_PI / I);
    sol.h_input = H;

    const double k = sol.scale;
    sol.psi.resize(static_cast<std::size_t>(n));
    std::vector<double> psi_p(static_cast<std::size_t>(n));   // psi'
    std::vector<double> psi_pp(static_cast<std::size_t>(n));  // psi''
    std::vector<double> psi_ppp(static_cast<std::size_t>(n)); // psi'''
    for (int j = 0; j < n; ++j) {
        const double z = sol.z[std::size_t(j)];
        const double D = 1.0 - z * z;
        const double hp = k * Hp[std::size_t(j)], hpp = k * Hpp[std::size_t(j)],
                     hppp = k * Hppp[std::size_t(j)], hpppp = k * Hpppp[std::size_t(j)];
        sol.psi[std::size_t(j)] = (hp * hp * D - 4.0) / 4.0;
        psi_p[std::size_t(j)] = (2.0 * hp * hpp * D - 2.0 * z * hp * hp) / 4.0;
        psi_pp[std::size_t(j)] =
            (2.0 * (hpp * hpp + hp * hppp) * D - 8.0 * z * hp * hpp - 2.0 * hp * hp) / 4.0;
        psi_ppp[std::size_t(j)] = (2.0 * (3.0 * hpp * hppp + hp * hpppp) * D -
                                   12.0 * z * (hpp * hpp + hp * hppp) - 12.0 * hp * hpp) / 4.0;
    }

    // G(z_j) = int_{-1}^{z} psi dz = int_0^s psi sin(sigma) d sigma
    std::vector<double> gint(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) gint[std::size_t(j)] = sol.psi[std::size_t(j)] * std::sin(sol.s[std::size_t(j)]);
    sol.G = cumulative_integral(gint, hs);
    sol.solvability_defect = std::abs(sol.G.back());
    if (sol.solvability_defect > 1e-6)
        throw numeric_error("normalization defect above tolerance: " +
                            std::to_string(sol.solvability_defect));

    // f' in z, with pole limits; df/ds = -G / sin s
    sol.fp.resize(static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        if (j == 0 || j == n - 1)
            w[std::size_t(j)] = 0.0;
        else
            w[std::size_t(j)] = -sol.G[std::size_t(j)] / std::sin(sol.s[std::size_t(j)]);
    }
    sol.f = cumulative_integral(w, hs);

    // mean-zero gauge over the sphere: mean = (1/2) int f sin s ds
    std::vector<double> fsin(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) fsin[std::size_t(j)] = sol.f[std::size_t(j)] * std::sin(sol.s[std::size_t(j)]);
    const double mean = 0.5 * cumulative_integral(fsin, hs).back();
    for (double& v : sol.f) v -= mean;

    // Derivatives of f in z. Away from the poles the quadrature reductions
    // f' = -G/D, f'' and f''' by differentiating them are well conditioned;
    // within sigma = 1 -+ z < sigma_cut of a pole the 0/0 structure is
    // resolved by the series in sigma driven by the psi-jet at the pole.
    sol.fpp.resize(static_cast<std::size_t>(n));
    sol.fppp.resize(static_cast<std::size_t>(n));
    const double sigma_cut = 0.05;
    const double p0m = sol.psi[0], p1m = psi_p[0], p2m = psi_pp[0], p3m = psi_ppp[0];
    const double a0 = p0m, a1 = 0.5 * (p1m + p0m), a2 = p2m / 6 + p1m / 4 + p0m / 4,
                 a3 = p3m / 24 + p2m / 12 + p1m / 8 + p0m / 8;
    const double p0p = sol.psi[std::size_t(n - 1)], p1p = psi_p[std::size_t(n - 1)],
                 p2p = psi_pp[std::size_t(n - 1)], p3p = psi_ppp[std::size_t(n - 1)];
    const double b0 = p0p, b1 = 0.5 * (p0p - p1p), b2 = p2p / 6 - p1p / 4 + p0p / 4,
                 b3 = -p3p / 24 + p2p / 12 - p1p / 8 + p0p / 8;
    for (int j = 0; j < n; ++j) {
        const double z = sol.z[std::size_t(j)];
        const double D = 1.0 - z * z;
        if (1.0 + z < sigma_cut) {
            const double sg = 1.0 + z;
            sol.fp[std::size_t(j)] = -0.5 * (a0 + a1 * sg + a2 * sg * sg + a3 * sg * sg * sg);
            sol.fpp[std::size_t(j)] = -0.5 * (a1 + 2 * a2 * sg + 3 * a3 * sg * sg);
            sol.fppp[std::size_t(j)] = -0.5 * (2 * a2 + 6 * a3 * sg);
        } else if (1.0 - z < sigma_cut) {
            const double sg = 1.0 - z;
            sol.fp[std::size_t(j)] = 0.5 * (b0 + b1 * sg + b2 * sg * sg + b3 * sg * sg * sg);
            sol.fpp[std::size_t(j)] = -0.5 * (b1 + 2 * b2 * sg + 3 * b3 * sg * sg);
            sol.fppp[std::size_t(j)] = 0.5 * (2 * b2 + 6 * b3 * sg);
        } else {
            const double ps = sol.psi[std::size_t(j)], ps1 = psi_p[std::size_t(j)],
                         Gj = sol.G[std::size_t(j)];
            sol.fp[std::size_t(j)] = -Gj / D;
            sol.fpp[std::size_t(j)] = -(ps * D + 2.0 * z * Gj) / (D * D);
            sol.fppp[std::size_t(j)] =
                -((ps1 * D + 2.0 * Gj) * D + 4.0 * z * (ps * D + 2.0 * z * Gj)) / (D * D * D);
        }
    }

    // pointwise constraint residual via the discrete f:
    // e^{-2f} | k^2 H'^2 (1-z^2) - 4 - 4 (2z f' - (1-z^2) f'') |
    sol.residual.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double z = sol.z[std::size_t(j)];
        const double D = 1.0 - z * z;
        const double grad2 = k * k * Hp[std::size_t(j)] * Hp[std::size_t(j)] * D;
        const double lap = 2.0 * z * sol.fp[std::size_t(j)] - D * sol.fpp[std::size_t(j)];
        sol.residual[std::size_t(j)] =
            std::exp(-2.0 * sol.f[std::size_t(j)]) * std::abs(grad2 - 4.0 - 4.0 * lap);
    }
    return sol;
}

}  // namespace wk
