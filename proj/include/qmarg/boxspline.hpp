#pragma once

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "lie_data.hpp"
#include "multiplicity.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "spline_core.hpp"

namespace qmarg {

//! Centered box spline of the projected weights, in orthonormal coordinates of t.
inline BoxSpline weight_box_spline(WeightSystem const& ws) { return BoxSpline::from_weights(ws); }

/*!
 * J_{lambda + rho_g} for an integral dominant lambda, as the box spline
 * convolved with the skew multiplicity measure M_lambda.
 */
class ExactJ {
  public:
    ExactJ(WeightSystem const& ws, Weight const& lambda, long long pattern_cap = 1000000)
        : ExactJ(ws, restrict_decompose(ws, lambda, pattern_cap)) {}

    ExactJ(WeightSystem const& ws, MultiplicityTable table) : ws_(&ws), table_(std::move(table)), B_(BoxSpline::from_weights(ws)) {
        auto M = build_M(ws, table_);
        for (auto const& a : M.atoms) {
            points_.push_back(to_orthonormal(ws, to_vec(a.point)));
            weights_.push_back(boost::rational_cast<double>(a.weight));
        }
        auto [lo, hi] = B_.bounding_box();
        lo_ = lo;
        hi_ = hi;
        Vec lam(ws.N());
        for (int a = 0; a < ws.N(); ++a) lam[a] = static_cast<double>(table_.lambda[a]);
        shifted_ = Vec(lam.array() - lam.mean()) + ws.rho_g;
    }

    MultiplicityTable const& table() const { return table_; }
    BoxSpline const& spline() const { return B_; }
    //! The spectrum lambda + rho_g, centered.
    Vec const& spectrum() const { return shifted_; }

    double J(Vec const& x) const {
        if (x.size() != ws_->D) throw ValidationError("point has wrong length");
        Vec e = to_orthonormal(*ws_, center_factors(*ws_, x));
        double s = 0;
        for (std::size_t k = 0; k < points_.size(); ++k) {
            Vec y = e - points_[k];
            bool inside = true;
            for (Eigen::Index a = 0; a < y.size(); ++a)
                if (y[a] < lo_[a] - 1e-12 || y[a] > hi_[a] + 1e-12) inside = false;
            if (inside) s += weights_[k] * B_(y);
        }
        return s;
    }

    //! Density of the projected orbit measure of lambda + rho_g at x (any point of t).
    double density(Vec const& x) const {
        const double pre = std::exp(ws_->log_delta_rho_g - ws_->log_delta_rho_h);
        return pre * delta_h(*ws_, center_factors(*ws_, x)) / vandermonde(shifted_) * J(x);
    }

  private:
    WeightSystem const* ws_;
    MultiplicityTable table_;
    BoxSpline B_;
    std::vector<Vec> points_;
    std::vector<double> weights_;
    Vec lo_, hi_, shifted_;
};

inline double J_exact(WeightSystem const& ws, Weight const& lambda, Vec const& x) { return ExactJ(ws, lambda).J(x); }

inline double density_exact(WeightSystem const& ws, Weight const& lambda, Vec const& x) {
    return ExactJ(ws, lambda).density(x);
}

/*!
 * Riemann sum of f over the shifted lattice (1/K) Lambda + s, with Lambda
 * the projected root lattice, times the cell volume. Every weight
 * direction lies in Lambda, so for the box spline (and for densities whose
 * Fourier transform is supported in the same dual cones) the sum equals
 * the integral exactly for every K >= 1 and every shift s.
 */
template<class F>
double lattice_riemann_sum(WeightSystem const& ws, F const& f, int K, Vec const& lo, Vec const& hi, int workers = 1) {
    if (K < 1) throw ValidationError("refinement must be positive");
    auto L = projected_root_lattice(ws);
    const int r = ws.r();
    Vec shift = Vec::Zero(ws.D);
    for (int i = 0; i < r; ++i) shift += (0.1234567 + 0.0731 * i) / K * L.B.col(i);
    TorusLattice fine = L;
    fine.B /= K;
    fine.dual *= K;
    auto pts = detail::lattice_points_in_box(fine, shift, lo, hi);
    std::vector<double> vals(pts.size());
    parallel_for(static_cast<long long>(pts.size()), workers,
                 [&](long long i) { vals[i] = f(Vec(shift + fine.B * pts[i].cast<double>())); });
    double s = 0;
    for (double v : vals) s += v;
    return s * L.covolume / std::pow(K, r);
}

//! Per-coordinate box containing the support of the projected orbit of spectrum.
inline std::pair<Vec, Vec> orbit_box(WeightSystem const& ws, Vec const& spectrum) {
    auto ext = factor_extremes(ws, spectrum);
    Vec lo(ws.D), hi(ws.D);
    for (std::size_t f = 0; f < ws.factors.size(); ++f)
        for (int i = 0; i < ws.factors[f]; ++i) {
            lo[ws.offsets[f] + i] = ext[f].first;
            hi[ws.offsets[f] + i] = ext[f].second;
        }
    return {lo, hi};
}

//! Total mass of the box spline by a lattice Riemann sum.
inline double spline_mass(WeightSystem const& ws, BoxSpline const& B, int K = 1) {
    Vec lo = Vec::Zero(ws.D), hi = Vec::Zero(ws.D);
    for (auto const& d : ws.directions)
        for (int j = 0; j < ws.D; ++j) {
            lo[j] -= 0.5 * d.mult * std::abs(d.vec[j]);
            hi[j] += 0.5 * d.mult * std::abs(d.vec[j]);
        }
    return lattice_riemann_sum(ws, [&](Vec const& x) { return B(to_orthonormal(ws, x)); }, K, lo, hi);
}

//! Mass of the exact density over the chamber (lattice sum over t divided by |W_h|).
inline double exact_mass(WeightSystem const& ws, ExactJ const& ej, int K = 1, int workers = 1) {
    auto [lo, hi] = orbit_box(ws, ej.spectrum());
    double s = lattice_riemann_sum(ws, [&](Vec const& x) { return ej.density(x); }, K, lo, hi, workers);
    return s / static_cast<double>(weyl_group_h(ws).size());
}

}  // namespace qmarg
