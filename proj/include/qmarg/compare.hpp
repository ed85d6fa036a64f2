#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "boxspline.hpp"
#include "density_quad.hpp"
#include "errors.hpp"
#include "lie_data.hpp"
#include "numeric.hpp"
#include "sampler.hpp"
#include "spline_core.hpp"

namespace qmarg {

//! Discrete kernel on integer bin offsets in [-radius, radius] per axis.
struct GridKernel {
    std::vector<int> radius;
    std::vector<double> weights;  //!< row-major over the offset box, sums to 1
};

/*!
 * Box spline of the weight directions written in free coordinates, scaled
 * so that the shortest direction spans width_bins bins, sampled at integer
 * bin offsets and normalized. width_bins = 0 gives the identity kernel.
 */
inline GridKernel smoothing_kernel(WeightSystem const& ws, HistGrid const& grid, double width_bins) {
    const int r = grid.dim();
    GridKernel k;
    if (width_bins < 0) throw ValidationError("smoothing width must be nonnegative");
    if (width_bins == 0) {
        k.radius.assign(r, 0);
        k.weights = {1.0};
        return k;
    }
    if (r != ws.r()) throw ValidationError("grid dimension must equal r");
    std::vector<Vec> cols;
    for (auto const& d : ws.directions)
        for (int m = 0; m < d.mult; ++m) cols.push_back(free_coords(ws, d.vec));
    double wbar = 1;
    for (int a = 0; a < r; ++a) wbar *= grid.width(a);
    wbar = std::pow(wbar, 1.0 / r);
    // unit: the shortest direction
    double cols_scale = std::numeric_limits<double>::infinity();
    for (auto const& c : cols) cols_scale = std::min(cols_scale, c.norm());
    Mat V(r, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (int a = 0; a < r; ++a) V(a, j) = cols[j][a] / cols_scale;
    BoxSpline B(V);
    auto [lo, hi] = B.bounding_box();
    k.radius.resize(r);
    long long total = 1;
    for (int a = 0; a < r; ++a) {
        double ext = std::max(-lo[a], hi[a]) * width_bins * wbar / grid.width(a);
        ext = std::floor(ext + 1e-9);
        k.radius[a] = static_cast<int>(std::ceil(ext));
        total *= 2 * k.radius[a] + 1;
    }
    k.weights.assign(total, 0.0);
    double s = 0;
    Vec u(r);
    for (long long t = 0; t < total; ++t) {
        long long rem = t;
        for (int a = r - 1; a >= 0; --a) {
            long long n = 2 * k.radius[a] + 1;
            u[a] = static_cast<double>(rem % n - k.radius[a]) * grid.width(a) / (wbar * width_bins);
            rem /= n;
        }
        k.weights[t] = B(u);
        s += k.weights[t];
    }
    for (auto& w : k.weights) w /= s;
    return k;
}

//! Convolution with zero padding outside the grid.
inline std::vector<double> smooth(HistGrid const& grid, std::vector<double> const& values, GridKernel const& k) {
    const int r = grid.dim();
    if (static_cast<long long>(values.size()) != grid.size()) throw ValidationError("values do not match grid");
    if (static_cast<int>(k.radius.size()) != r) throw ValidationError("kernel dimension mismatch");
    std::vector<double> out(values.size(), 0.0);
    std::vector<int> off(r);
    const long long ksize = static_cast<long long>(k.weights.size());
    for (long long i = 0; i < grid.size(); ++i) {
        auto cell = grid.unflatten(i);
        double acc = 0;
        for (long long t = 0; t < ksize; ++t) {
            if (k.weights[t] == 0) continue;
            long long rem = t;
            bool ok = true;
            long long idx = 0;
            for (int a = r - 1; a >= 0; --a) {
                long long n = 2 * k.radius[a] + 1;
                off[a] = static_cast<int>(rem % n - k.radius[a]);
                rem /= n;
            }
            for (int a = 0; a < r && ok; ++a) {
                int c = cell[a] + off[a];
                if (c < 0 || c >= grid.bins[a]) ok = false;
                idx = idx * grid.bins[a] + c;
            }
            if (ok) acc += k.weights[t] * values[idx];
        }
        out[i] = acc;
    }
    return out;
}

struct Discrepancy {
    double sup = 0;       //!< max |a - b|
    double l1 = 0;        //!< sum |a - b| * cell volume
    double peak = 0;      //!< max b
    double sup_rel = 0;   //!< sup / peak
    long long argmax = -1;
};

//! a is the empirical side, b the reference.
inline Discrepancy discrepancy(HistGrid const& grid, std::vector<double> const& a, std::vector<double> const& b) {
    if (a.size() != b.size() || static_cast<long long>(a.size()) != grid.size())
        throw ValidationError("discrepancy: size mismatch");
    Discrepancy d;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double e = std::abs(a[i] - b[i]);
        if (e > d.sup) {
            d.sup = e;
            d.argmax = static_cast<long long>(i);
        }
        d.l1 += e;
        d.peak = std::max(d.peak, b[i]);
    }
    d.l1 *= grid.cell_volume();
    d.sup_rel = d.peak > 0 ? d.sup / d.peak : std::numeric_limits<double>::infinity();
    return d;
}

// ---------------------------------------------------------------------------
// Singular lines of a density on a two-dimensional grid.

struct LineCandidate {
    int a = 0, b = 0;  //!< the line is a * f0 + b * f1 = offset
    double offset = 0;
    int run = 0;       //!< longest run of hits, in cells along the line
};

struct LineDetectorOptions {
    int order = 5;           //!< difference order; one more than the piecewise polynomial degree
    int min_run = 12;        //!< cells of consecutive hits needed along a line
    double rel_height = 0.2; //!< hit threshold, in units of peak * h^2
    double noise_factor = 4; //!< hit threshold, in units of the median difference
    int pad = 6;             //!< extra cells evaluated beyond the grid on every side
};

//! Difference order for a weight system: piecewise degree of the density plus one.
inline int line_detector_order(WeightSystem const& ws) { return ws.expanded_size() - ws.r() + ws.pos_roots_h + 1; }

/*!
 * Field sampled at cell centers of grid extended by pad cells per side.
 * Cells where the evaluator reports nothing (outside the chamber) are NaN.
 */
struct PaddedField {
    HistGrid grid;  //!< the unpadded grid
    int pad = 0;
    int nx = 0, ny = 0;
    std::vector<double> values;  //!< row-major, nx * ny

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * ny + j]; }
    Vec point(int i, int j) const {
        Vec f(2);
        f[0] = grid.lo[0] + (i - pad + 0.5) * grid.width(0);
        f[1] = grid.lo[1] + (j - pad + 0.5) * grid.width(1);
        return f;
    }
};

template<class F>
PaddedField padded_field(HistGrid const& grid, int pad, F const& f, int workers = 1) {
    if (grid.dim() != 2) throw ValidationError("singular-line detection needs a two-dimensional grid");
    PaddedField p;
    p.grid = grid;
    p.pad = pad;
    p.nx = grid.bins[0] + 2 * pad;
    p.ny = grid.bins[1] + 2 * pad;
    p.values.assign(static_cast<std::size_t>(p.nx) * p.ny, 0.0);
    parallel_for(static_cast<long long>(p.values.size()), workers, [&](long long t) {
        int i = static_cast<int>(t / p.ny), j = static_cast<int>(t % p.ny);
        auto v = f(p.point(i, j));
        p.values[t] = v ? *v : std::numeric_limits<double>::quiet_NaN();
    });
    return p;
}

/*!
 * Walls of a piecewise polynomial density on a square-binned 2D grid.
 *
 * For each family normal n in {(1,0), (0,1), (1,1), (1,-1)} (index space)
 * the order-k difference along n vanishes on every polynomial piece of
 * degree < k, so it is nonzero only for stencils that straddle a wall.
 * Stencils straddling a wall parallel to the family line up along the
 * level sets of n; walls of other orientations only produce short runs.
 * A level is flagged when its longest run of hits reaches min_run, and
 * flagged levels within one stencil span merge into one line at their
 * weighted center.
 */
inline std::vector<LineCandidate> detect_singular_lines(PaddedField const& p, LineDetectorOptions const& opt = {}) {
    const double w0 = p.grid.width(0), w1 = p.grid.width(1);
    if (std::abs(w0 - w1) > 1e-9 * std::max(w0, w1)) throw ValidationError("line detection needs square bins");
    if (opt.order < 1) throw ValidationError("difference order must be positive");
    const double h = w0;
    const int k = opt.order;
    std::vector<double> coef(k + 1);
    for (int s = 0; s <= k; ++s) coef[s] = ((k - s) % 2 ? -1.0 : 1.0) * static_cast<double>(binomial(k, s));
    double peak = 0;
    for (double v : p.values)
        if (!std::isnan(v)) peak = std::max(peak, std::abs(v));
    std::vector<LineCandidate> out;
    const int fam[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (auto const& n : fam) {
        const int a = n[0], b = n[1];
        std::vector<double> D(p.values.size(), nan);
        std::vector<double> touched;
        for (int i = 0; i < p.nx; ++i)
            for (int j = 0; j < p.ny; ++j) {
                double s = 0, mag = 0;
                bool ok = true;
                for (int t = 0; t <= k && ok; ++t) {
                    int ii = i + t * a, jj = j + t * b;
                    if (ii < 0 || jj < 0 || ii >= p.nx || jj >= p.ny || std::isnan(p.at(ii, jj))) {
                        ok = false;
                        break;
                    }
                    s += coef[t] * p.at(ii, jj);
                    mag = std::max(mag, std::abs(p.at(ii, jj)));
                }
                if (!ok) continue;
                D[static_cast<std::size_t>(i) * p.ny + j] = std::abs(s);
                if (mag > 1e-3 * peak) touched.push_back(std::abs(s));
            }
        if (touched.empty()) continue;
        std::nth_element(touched.begin(), touched.begin() + touched.size() / 2, touched.end());
        const double eta = std::max(opt.rel_height * peak * h * h, opt.noise_factor * touched[touched.size() / 2]);
        // walk each level set a*i + b*j = L along t = (-b, a)
        const int kmin = std::min(0, a * (p.nx - 1)) + std::min(0, b * (p.ny - 1));
        const int kmax = std::max(0, a * (p.nx - 1)) + std::max(0, b * (p.ny - 1));
        std::vector<int> run(kmax - kmin + 1, 0);
        std::vector<double> mass(kmax - kmin + 1, 0.0);
        for (int i = 0; i < p.nx; ++i)
            for (int j = 0; j < p.ny; ++j) {
                // start of a level walk: predecessor along t lies outside
                int pi = i + b, pj = j - a;
                if (pi >= 0 && pj >= 0 && pi < p.nx && pj < p.ny) continue;
                int cur = 0, best = 0;
                double cm = 0, bm = 0;
                for (int ii = i, jj = j; ii >= 0 && jj >= 0 && ii < p.nx && jj < p.ny; ii -= b, jj += a) {
                    double d = D[static_cast<std::size_t>(ii) * p.ny + jj];
                    if (!std::isnan(d) && d > eta) {
                        ++cur;
                        cm += d;
                        if (cur > best) {
                            best = cur;
                            bm = cm;
                        }
                    } else {
                        cur = 0;
                        cm = 0;
                    }
                }
                int L = a * i + b * j - kmin;
                run[L] = best;
                mass[L] = bm;
            }
        for (std::size_t L = 0; L < run.size();) {
            if (run[L] < opt.min_run) {
                ++L;
                continue;
            }
            // merge flagged levels closer than one stencil span
            const std::size_t span = static_cast<std::size_t>(k * (a * a + b * b));
            double wsum = 0, lsum = 0;
            int best = 0;
            std::size_t e = L, last = L;
            while (e < run.size() && e <= last + span) {
                if (run[e] >= opt.min_run) {
                    wsum += mass[e];
                    lsum += mass[e] * static_cast<double>(e);
                    best = std::max(best, run[e]);
                    last = e;
                }
                ++e;
            }
            e = last + 1;
            // stencil center sits k |n|^2 / 2 levels past its start
            double level = lsum / wsum + kmin + 0.5 * k * (a * a + b * b);
            double offset = level * h + a * (p.grid.lo[0] + (0.5 - p.pad) * h) + b * (p.grid.lo[1] + (0.5 - p.pad) * h);
            out.push_back({a, b, offset, best});
            L = e;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov distance between a weighted atomic measure and samples.

/*!
 * sup over p of |F(p) - G(p)| with F, G the lower-orthant distribution
 * functions. The supremum is taken over the product of per-axis candidate
 * values: every atom coordinate, a point just below it, and
 * `quantiles` empirical quantiles of the samples per axis.
 */
inline double ks_distance(std::vector<Vec> const& atoms, std::vector<double> const& weights,
                          std::vector<Vec> const& samples, int quantiles = 256) {
    if (atoms.empty() || samples.empty()) throw ValidationError("ks_distance needs atoms and samples");
    const int r = static_cast<int>(atoms.front().size());
    std::vector<std::vector<double>> cand(r);
    for (int a = 0; a < r; ++a) {
        std::vector<double> col;
        for (auto const& s : samples) col.push_back(s[a]);
        std::sort(col.begin(), col.end());
        for (int q = 0; q < quantiles; ++q) cand[a].push_back(col[col.size() * q / quantiles]);
        cand[a].push_back(col.back());
        for (auto const& p : atoms) {
            cand[a].push_back(p[a]);
            cand[a].push_back(std::nextafter(p[a], -std::numeric_limits<double>::infinity()));
        }
        std::sort(cand[a].begin(), cand[a].end());
        cand[a].erase(std::unique(cand[a].begin(), cand[a].end()), cand[a].end());
    }
    long long total = 1;
    for (int a = 0; a < r; ++a) {
        total *= static_cast<long long>(cand[a].size()) + 1;
        if (total > 50000000) throw CapExceeded("KS candidate grid too large");
    }
    // cell c_a = first candidate index with value >= x_a; index size() means beyond all candidates
    auto cell_of = [&](Vec const& x) {
        long long idx = 0;
        for (int a = 0; a < r; ++a) {
            long long c = std::lower_bound(cand[a].begin(), cand[a].end(), x[a]) - cand[a].begin();
            idx = idx * (static_cast<long long>(cand[a].size()) + 1) + c;
        }
        return idx;
    };
    std::vector<double> diff(total, 0.0);
    double wsum = 0;
    for (double w : weights) wsum += w;
    for (std::size_t k = 0; k < atoms.size(); ++k) diff[cell_of(atoms[k])] += weights[k] / wsum;
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (auto const& s : samples) diff[cell_of(s)] -= inv;
    // prefix sums along every axis
    long long stride = 1;
    for (int a = r - 1; a >= 0; --a) {
        long long n = static_cast<long long>(cand[a].size()) + 1;
        for (long long t = 0; t < total; ++t)
            if ((t / stride) % n != 0) diff[t] += diff[t - stride];
        stride *= n;
    }
    double best = 0;
    for (double v : diff) best = std::max(best, std::abs(v));
    return best;
}

// ---------------------------------------------------------------------------
// Comparison harness.

enum class Evaluator { Quad, Exact };

//! lambda - rho_g as a dominant integral weight, if it is one (up to the all-ones shift).
inline std::optional<Weight> integral_part(WeightSystem const& ws, Vec const& lambda, double tol = 1e-9) {
    if (lambda.size() != ws.N()) return std::nullopt;
    Vec v = Vec(lambda.array() - lambda.mean()) - ws.rho_g;
    Weight w(ws.N());
    for (int a = 0; a < ws.N(); ++a) {
        double d = v[a] - v[ws.N() - 1];
        double r = std::round(d);
        if (std::abs(d - r) > tol) return std::nullopt;
        w[a] = static_cast<long long>(r);
    }
    for (int a = 0; a + 1 < ws.N(); ++a)
        if (w[a] < w[a + 1]) return std::nullopt;
    return w;
}

/*!
 * Density in free coordinates from either evaluator, as a callable that
 * returns nothing outside the closed chamber.
 */
class DensityEvaluator {
  public:
    DensityEvaluator(WeightSystem const& ws, Vec const& lambda, Evaluator kind, QuadratureParams const& q = {})
        : ws_(&ws), kind_(kind), jac_(free_coordinate_jacobian(ws)) {
        check_spectrum(ws, lambda);
        if (kind == Evaluator::Quad) {
            check_generic(lambda);
            quad_.emplace(ws, lambda, q);
        } else {
            auto w = integral_part(ws, lambda);
            if (!w) throw ValidationError("the exact evaluator needs lambda = rho_g + a dominant integral weight");
            exact_.emplace(ws, *w);
        }
    }

    std::optional<double> operator()(Vec const& free) const {
        Vec x = from_free_coords(*ws_, free);
        if (!in_closed_chamber(*ws_, x, 1e-12)) return std::nullopt;
        return jac_ * (quad_ ? quad_->density(x) : exact_->density(x));
    }

    Evaluator kind() const { return kind_; }
    std::optional<QuadDensity> const& quad() const { return quad_; }

  private:
    WeightSystem const* ws_;
    Evaluator kind_;
    double jac_;
    std::optional<QuadDensity> quad_;
    std::optional<ExactJ> exact_;
};

struct CompareOptions {
    long long samples = 1000000;
    std::uint64_t seed = 1;
    int bins = 50;
    Evaluator evaluator = Evaluator::Quad;
    QuadratureParams quad{};
    double smoothing_bins = 2;
    double tolerance = 0.05;  //!< on sup discrepancy relative to peak
    int workers = 1;
    LineDetectorOptions lines{0};  //!< order 0 selects line_detector_order
};

struct CompareReport {
    HistGrid grid;
    std::vector<double> histogram;  //!< empirical density
    std::vector<double> density;    //!< analytic density at bin centers
    std::vector<double> smoothed_histogram, smoothed_density;
    Discrepancy disc;
    std::vector<LineCandidate> lines;  //!< only for r = 2
    long long overflow = 0;
    bool pass = false;
};

inline CompareReport run_comparison(WeightSystem const& ws, Vec const& lambda, CompareOptions const& opt) {
    check_spectrum(ws, lambda);
    DensityEvaluator ev(ws, lambda, opt.evaluator, opt.quad);
    CompareReport rep;
    rep.grid = auto_grid(ws, lambda, opt.bins);
    RunOptions ro;
    ro.workers = opt.workers;
    Histogram h = run_histogram(ws, lambda, opt.samples, rep.grid, opt.seed, ro);
    rep.overflow = h.overflow;
    rep.histogram.resize(rep.grid.size());
    for (long long i = 0; i < rep.grid.size(); ++i) rep.histogram[i] = h.density(i);
    rep.density.assign(rep.grid.size(), 0.0);
    parallel_for(rep.grid.size(), opt.workers, [&](long long i) {
        auto cell = rep.grid.unflatten(i);
        Vec f(rep.grid.dim());
        for (int a = 0; a < rep.grid.dim(); ++a) f[a] = rep.grid.center(a, cell[a]);
        rep.density[i] = ev(f).value_or(0.0);
    });
    auto k = smoothing_kernel(ws, rep.grid, opt.smoothing_bins);
    rep.smoothed_histogram = smooth(rep.grid, rep.histogram, k);
    rep.smoothed_density = smooth(rep.grid, rep.density, k);
    rep.disc = discrepancy(rep.grid, rep.smoothed_histogram, rep.smoothed_density);
    if (rep.grid.dim() == 2 && std::abs(rep.grid.width(0) - rep.grid.width(1)) < 1e-9 * rep.grid.width(0)) {
        auto field = padded_field(rep.grid, opt.lines.pad, ev, opt.workers);
        LineDetectorOptions lo = opt.lines;
        if (lo.order == 0) lo.order = line_detector_order(ws);
        rep.lines = detect_singular_lines(field, lo);
    }
    rep.pass = rep.disc.sup_rel < opt.tolerance;
    return rep;
}

}  // namespace qmarg
