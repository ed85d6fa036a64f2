#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hciz.hpp"
#include "lie_data.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "sampler.hpp"

namespace qmarg {

enum class QuadRule { GaussLegendre, Midpoint };

struct QuadratureParams {
    double cutoff = 0;       //!< box half-width in xi; 0 selects automatically
    int nodes_per_axis = 0;  //!< 0 selects automatically
    QuadRule rule = QuadRule::GaussLegendre;
    //! Symmetric node set (the principal-value truncation). When false the
    //! nodes are shifted by a quarter spacing, which breaks the xi <-> -xi pairing.
    bool pv_symmetrization = true;
    AlternantOptions alternant{};
    long long max_nodes = 20000000;
};

namespace detail {

inline double min_gap(Vec const& v) {
    double g = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        for (Eigen::Index j = i + 1; j < v.size(); ++j) g = std::min(g, std::abs(v[i] - v[j]));
    return g;
}

//! Largest |Pi(w lambda)| over permutations, bounded via the sorted pairing.
inline double orbit_radius(WeightSystem const& ws, Vec const& lambda) {
    double s = 0;
    for (auto const& [lo, hi] : factor_extremes(ws, lambda)) {
        double m = std::max(std::abs(lo), std::abs(hi));
        s += m * m;
    }
    return std::sqrt(s) * 2.0;
}

}  // namespace detail

/*!
 * Resolve automatic quadrature parameters.
 *
 * The integrand is bounded by C / prod |<a, xi>|^mult, which decays at
 * least like |xi|^-(l+2) along every line. The cutoff is chosen so that
 * this envelope drops by 1e-6 from its value at |xi| = xi0, with xi0 the
 * inverse of the smallest direction norm, clamped to [8, 80]. Nodes per
 * axis resolve the fastest phase omega * xi with about 1.3 points per
 * radian, and at least 64.
 */
inline QuadratureParams resolve_quadrature(WeightSystem const& ws, Vec const& lambda, QuadratureParams q) {
    if (q.cutoff < 0) throw ValidationError("cutoff must be positive");
    if (q.nodes_per_axis != 0 && q.nodes_per_axis < 8) throw ValidationError("nodes_per_axis must be >= 8");
    if (q.cutoff == 0) {
        double amin = std::numeric_limits<double>::infinity();
        for (auto const& d : ws.directions) amin = std::min(amin, d.vec.norm());
        int l = std::max(0, ell(ws));
        q.cutoff = std::clamp(std::pow(10.0, 6.0 / (l + 2)) / amin, 8.0, 80.0);
    }
    if (q.nodes_per_axis == 0) {
        double omega = detail::orbit_radius(ws, lambda);
        q.nodes_per_axis = std::max(64, static_cast<int>(std::ceil(1.3 * omega * q.cutoff)));
    }
    return q;
}

/*!
 * Quadrature evaluator for the projected orbital density. The kernel is
 * tabulated once on a tensor grid over [-cutoff, cutoff]^r in orthonormal
 * coordinates of t; each point evaluation is a separable contraction.
 */
class QuadDensity {
  public:
    QuadDensity(WeightSystem const& ws, Vec const& lambda, QuadratureParams const& params = {}) : ws_(&ws) {
        check_spectrum(ws, lambda);
        lambda_ = center_spectrum(lambda).values;
        q_ = resolve_quadrature(ws, lambda_, params);
        const int r = ws.r();
        const int n = q_.nodes_per_axis;
        long long total = 1;
        for (int a = 0; a < r; ++a) {
            total *= n;
            if (total > q_.max_nodes) throw CapExceeded("quadrature node count exceeds cap");
        }
        nodes_.resize(n);
        weights_.resize(n);
        const double X = q_.cutoff;
        if (q_.rule == QuadRule::GaussLegendre) {
            auto [x, w] = gauss_legendre(n);
            for (int k = 0; k < n; ++k) {
                nodes_[k] = X * x[k];
                weights_[k] = X * w[k];
            }
        } else {
            double h = 2 * X / n;
            for (int k = 0; k < n; ++k) {
                nodes_[k] = -X + (k + 0.5) * h;
                weights_[k] = h;
            }
        }
        if (!q_.pv_symmetrization) {
            double h = 2 * X / n;
            for (auto& t : nodes_) t += 0.25 * h;
        }
        const int hpow = ws.pos_roots_h % 4;
        const cplx ih = std::pow(cplx(0, 1), hpow);
        table_.resize(total);
        zero_ = detail::min_gap(lambda_) == 0;
        if (!zero_) {
            std::vector<int> idx(r, 0);
            Vec eta(r);
            for (long long t = 0; t < total; ++t) {
                long long rem = t;
                double w = 1;
                for (int a = r - 1; a >= 0; --a) {
                    int k = static_cast<int>(rem % n);
                    rem /= n;
                    eta[a] = nodes_[k];
                    w *= weights_[k];
                }
                Vec xi = from_orthonormal(ws, eta);
                table_[t] = ih * w * hc_sum_kernel(ws, lambda_, xi, q_.alternant);
            }
        }
        prefactor_ = std::exp(ws.log_delta_rho_g - ws.log_delta_rho_h);
    }

    QuadratureParams const& params() const { return q_; }
    Vec const& lambda() const { return lambda_; }
    WeightSystem const& weights() const { return *ws_; }

    /*!
     * The complex truncated integral (2 pi)^-r sum w i^{|Phi_h^+|} K(xi)
     * e^{-i<x, xi>}. Its real part is J_lambda(x).
     */
    cplx integral(Vec const& x) const {
        if (zero_) return 0;
        const int r = ws_->r();
        const int n = q_.nodes_per_axis;
        Vec c = to_orthonormal(*ws_, x);
        std::vector<cplx> cur(table_.begin(), table_.end());
        long long len = static_cast<long long>(cur.size());
        std::vector<cplx> phase(n);
        for (int a = r - 1; a >= 0; --a) {
            for (int k = 0; k < n; ++k) phase[k] = std::polar(1.0, -c[a] * nodes_[k]);
            long long outer = len / n;
            for (long long o = 0; o < outer; ++o) {
                cplx s = 0;
                cplx const* row = &cur[o * n];
                for (int k = 0; k < n; ++k) s += row[k] * phase[k];
                cur[o] = s;
            }
            len = outer;
        }
        return cur[0] / std::pow(2 * kPi, r);
    }

    //! Real part after the imaginary-residue alarm.
    double J(Vec const& x) const {
        cplx v = integral(x);
        if (std::abs(v.imag()) >= 1e-6 * std::abs(v.real()) + 1e-9)
            throw NumericalAlarm("imaginary residue " + std::to_string(v.imag()) + " against real part " +
                                 std::to_string(v.real()) + " (cutoff too small or spectrum near-degenerate)");
        return v.real();
    }

    //! Lebesgue density on t at a chamber point.
    double density(Vec const& x) const {
        double dl = vandermonde(lambda_);
        return prefactor_ * delta_h(*ws_, x) / dl * J(x);
    }

  private:
    WeightSystem const* ws_;
    Vec lambda_;
    QuadratureParams q_;
    std::vector<double> nodes_, weights_;
    std::vector<cplx> table_;
    double prefactor_ = 1;
    bool zero_ = false;
};

inline void check_generic(Vec const& lambda) {
    Vec c = center_spectrum(lambda).values;
    double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    if (detail::min_gap(c) <= 1e-9 * scale)
        throw ValidationError("spectrum has repeated entries; the quadrature formula needs distinct values "
                              "(use the exact spline evaluator for integral spectra)");
}

inline void check_point(WeightSystem const& ws, Vec const& x) {
    if (x.size() != ws.D) throw ValidationError("point has wrong length");
}

inline double density_at(WeightSystem const& ws, Vec const& lambda, Vec const& x, QuadratureParams const& q = {}) {
    check_spectrum(ws, lambda);
    check_generic(lambda);
    check_point(ws, x);
    return QuadDensity(ws, lambda, q).density(center_factors(ws, x));
}

//! J_lambda(x); skew under W_h, zero when lambda has repeated entries.
inline double J_at(WeightSystem const& ws, Vec const& lambda, Vec const& x, QuadratureParams const& q = {}) {
    check_spectrum(ws, lambda);
    check_point(ws, x);
    return QuadDensity(ws, lambda, q).J(center_factors(ws, x));
}

struct DensityGrid {
    HistGrid grid;  //!< values sit at bin centers, in free coordinates
    std::vector<double> values;
    std::vector<double> err;  //!< empty unless an error estimate was requested
    Vec lambda;
    std::string setting;
    QuadratureParams params;
    double min_value = 0;  //!< most negative value seen (truncation artefact)

    //! Density with respect to the free coordinates.
    double at(long long idx) const { return values[idx]; }
};

inline Vec grid_point(WeightSystem const& ws, HistGrid const& g, long long idx) {
    auto cell = g.unflatten(idx);
    Vec f(g.dim());
    for (int a = 0; a < g.dim(); ++a) f[a] = g.center(a, cell[a]);
    return from_free_coords(ws, f);
}

/*!
 * Density in free coordinates at every bin center. Points outside the
 * closed chamber get zero. With error_estimate, a second evaluator at 3/4
 * of the cutoff and node count gives a per-point difference.
 */
inline DensityGrid density_grid(WeightSystem const& ws, Vec const& lambda, HistGrid const& grid,
                                QuadratureParams const& q = {}, int workers = 1, bool error_estimate = false) {
    check_spectrum(ws, lambda);
    check_generic(lambda);
    if (grid.dim() != ws.r()) throw ValidationError("grid dimension must equal r");
    QuadDensity qd(ws, lambda, q);
    std::optional<QuadDensity> coarse;
    if (error_estimate) {
        QuadratureParams qc = qd.params();
        qc.cutoff *= 0.75;
        qc.nodes_per_axis = std::max(8, qc.nodes_per_axis * 3 / 4);
        coarse.emplace(ws, lambda, qc);
    }
    DensityGrid out;
    out.grid = grid;
    out.lambda = lambda;
    out.setting = ws.setting.label();
    out.params = qd.params();
    out.values.assign(grid.size(), 0.0);
    if (error_estimate) out.err.assign(grid.size(), 0.0);
    const double jac = free_coordinate_jacobian(ws);
    parallel_for(grid.size(), workers, [&](long long i) {
        Vec x = grid_point(ws, grid, i);
        if (!in_closed_chamber(ws, x)) return;
        out.values[i] = jac * qd.density(x);
        if (coarse) out.err[i] = std::abs(out.values[i] - jac * coarse->density(x));
    });
    for (double v : out.values) out.min_value = std::min(out.min_value, v);
    return out;
}

//! Mass of the density over the chamber, by the midpoint rule on an auto grid.
inline double normalization_check(WeightSystem const& ws, Vec const& lambda, QuadratureParams const& q = {},
                                  int bins_per_axis = 100, int workers = 1) {
    HistGrid g = auto_grid(ws, lambda, bins_per_axis);
    for (int a = 0; a < g.dim(); ++a)
        if (g.hi[a] <= g.lo[a]) return 0;
    auto dg = density_grid(ws, lambda, g, q, workers);
    double s = 0;
    for (double v : dg.values) s += v;
    return s * g.cell_volume();
}

}  // namespace qmarg
