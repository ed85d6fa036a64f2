#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "compare.hpp"
#include "density_quad.hpp"
#include "lie_data.hpp"
#include "multiplicity.hpp"
#include "sampler.hpp"

namespace qmarg {

//! Atoms of R_n Xi_{n lambda} in free coordinates, with their probabilities.
struct FreeAtoms {
    std::vector<Vec> points;
    std::vector<double> weights;
};

inline FreeAtoms rescaled_xi(WeightSystem const& ws, Weight const& lambda, long long n, long long pattern_cap = 1000000) {
    if (n < 1) throw ValidationError("scale must be positive");
    Weight nl = lambda;
    for (auto& v : nl) v *= n;
    auto xi = rescale(build_Xi(ws, restrict_decompose(ws, nl, pattern_cap)), Rational(n));
    FreeAtoms out;
    for (auto const& a : xi.atoms) {
        out.points.push_back(free_coords(ws, to_vec(a.point)));
        out.weights.push_back(boost::rational_cast<double>(a.weight));
    }
    return out;
}

//! m^{n lambda}_{n mu} with mu given as a point of t; zero unless n mu is a weight of the table.
inline long long scaled_multiplicity(WeightSystem const& ws, Weight const& lambda, Vec const& mu, long long n,
                                     long long pattern_cap = 1000000) {
    Weight nl = lambda;
    for (auto& v : nl) v *= n;
    auto t = restrict_decompose(ws, nl, pattern_cap);
    Vec target = center_factors(ws, Vec(static_cast<double>(n) * mu));
    for (auto const& [w, m] : t.entries)
        if ((to_vec(center_exact(ws.factors, w)) - target).cwiseAbs().maxCoeff() < 1e-9) return m;
    return 0;
}

struct SemiclassicalReport {
    std::vector<long long> n_list;
    std::vector<double> ks;       //!< KS distance per n
    double ks_noise = 0;          //!< 1/sqrt(samples)
    struct Point {
        Vec mu;
        long long n = 0;
        long long multiplicity = 0;
        double scaled = 0;  //!< n^-d m
        double J = 0;
        double rel_error = 0;
    };
    std::vector<Point> points;
};

/*!
 * (a) n^-d m^{n lambda}_{n mu} against J_lambda(mu) at the largest n, with
 * J from quadrature; (b) KS distance between R_n Xi_{n lambda} and the
 * sampled marginal spectra of lambda, for every n.
 */
inline SemiclassicalReport semiclassical_checks(WeightSystem const& ws, Weight const& lambda_ks,
                                                std::vector<long long> const& n_list, long long samples,
                                                std::uint64_t seed, std::optional<Weight> const& lambda_mult = {},
                                                std::vector<Vec> const& mus = {}, QuadratureParams const& q = {},
                                                int workers = 1) {
    SemiclassicalReport rep;
    rep.n_list = n_list;
    auto spectrum = [&](Weight const& w) {
        Vec v(ws.N());
        for (int a = 0; a < ws.N(); ++a) v[a] = static_cast<double>(w[a]);
        return Vec(v.array() - v.mean());
    };
    if (samples > 0) {
        RunOptions ro;
        ro.workers = workers;
        auto pts = sample_points(ws, spectrum(lambda_ks), samples, seed, ro);
        std::vector<Vec> free;
        free.reserve(pts.size());
        for (auto const& p : pts) free.push_back(free_coords(ws, p));
        rep.ks_noise = 1.0 / std::sqrt(static_cast<double>(samples));
        for (long long n : n_list) {
            auto at = rescaled_xi(ws, lambda_ks, n);
            rep.ks.push_back(ks_distance(at.points, at.weights, free));
        }
    }
    if (lambda_mult && !mus.empty() && !n_list.empty()) {
        long long n = *std::max_element(n_list.begin(), n_list.end());
        QuadDensity qd(ws, spectrum(*lambda_mult), q);
        for (auto const& mu : mus) {
            SemiclassicalReport::Point p;
            p.mu = mu;
            p.n = n;
            p.multiplicity = scaled_multiplicity(ws, *lambda_mult, mu, n);
            p.scaled = static_cast<double>(p.multiplicity) / std::pow(static_cast<double>(n), ws.d);
            p.J = qd.J(center_factors(ws, mu));
            p.rel_error = std::abs(p.scaled - p.J) / std::abs(p.J);
            rep.points.push_back(p);
        }
    }
    return rep;
}

}  // namespace qmarg
