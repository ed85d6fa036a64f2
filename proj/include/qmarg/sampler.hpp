#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "lie_data.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace qmarg {

//! Centered copy of a spectrum together with the applied shift.
struct CenteredSpectrum {
    Vec values;
    double shift = 0;
};

inline CenteredSpectrum center_spectrum(Vec const& lambda) {
    CenteredSpectrum c;
    c.shift = lambda.size() ? lambda.mean() : 0.0;
    c.values = lambda.array() - c.shift;
    return c;
}

inline void check_spectrum(WeightSystem const& ws, Vec const& lambda) {
    if (lambda.size() != ws.N())
        throw ValidationError("spectrum has length " + std::to_string(lambda.size()) + ", setting needs " +
                              std::to_string(ws.N()));
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (!std::isfinite(lambda[i])) throw ValidationError("spectrum entries must be finite");
}

inline CMat conjugate_diag(CMat const& U, Vec const& lambda) {
    return U * lambda.cast<cplx>().asDiagonal() * U.adjoint();
}

template<class Rng>
CMat orbit_point(Vec const& lambda, Rng& rng) {
    CMat U = haar_unitary(static_cast<int>(lambda.size()), rng);
    return conjugate_diag(U, lambda);
}

//! Partial traces onto each tensor factor (row-major multi-index, last fastest).
inline std::vector<CMat> marginals_distinguishable(CMat const& M, std::vector<int> const& dims) {
    long long N = 1;
    for (int n : dims) N *= n;
    if (M.rows() != N || M.cols() != N) throw ValidationError("marginals: matrix size does not match dims");
    const int m = static_cast<int>(dims.size());
    std::vector<long long> stride(m, 1);
    for (int j = m - 2; j >= 0; --j) stride[j] = stride[j + 1] * dims[j + 1];
    std::vector<CMat> out;
    for (int j = 0; j < m; ++j) {
        const int nj = dims[j];
        CMat P = CMat::Zero(nj, nj);
        // rest enumerates all indices with digit j zeroed
        for (long long rest = 0; rest < N; ++rest) {
            if ((rest / stride[j]) % nj != 0) continue;
            for (int a = 0; a < nj; ++a)
                for (int b = 0; b < nj; ++b) P(a, b) += M(rest + a * stride[j], rest + b * stride[j]);
        }
        out.push_back(P);
    }
    return out;
}

inline Vec sorted_eigenvalues(CMat const& H) {
    Eigen::SelfAdjointEigenSolver<CMat> es(H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalAlarm("eigensolver failed");
    Vec ev = es.eigenvalues().reverse();
    return ev;
}

/*!
 * Action of gl(n) on the occupation-number basis of Sym^k or Wedge^k,
 * in the same basis order as the weight rows.
 */
class SymmetricRep {
  public:
    explicit SymmetricRep(WeightSystem const& ws) : n_(ws.setting.dims[0]), N_(ws.N()) {
        if (ws.setting.kind == Kind::Distinguishable) throw ValidationError("SymmetricRep needs bosons or fermions");
        const bool fermi = ws.setting.kind == Kind::Fermions;
        std::map<std::vector<long long>, int> index;
        std::vector<std::vector<long long>> states;
        for (int a = 0; a < N_; ++a) {
            std::vector<long long> s(n_);
            for (int i = 0; i < n_; ++i) s[i] = ws.int_rows(a, i);
            index[s] = a;
            states.push_back(s);
        }
        E_.assign(n_ * n_, Mat::Zero(N_, N_));
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                Mat& R = E_[i * n_ + j];
                for (int a = 0; a < N_; ++a) {
                    auto s = states[a];
                    if (s[j] == 0) continue;
                    double coef;
                    if (!fermi) {
                        coef = (i == j) ? double(s[j]) : std::sqrt(double(s[j]) * double(s[i] + 1));
                        s[j] -= 1;
                        s[i] += 1;
                    } else {
                        if (i != j && s[i] == 1) continue;
                        int before = 0;
                        for (int l = 0; l < j; ++l) before += int(s[l]);
                        s[j] = 0;
                        for (int l = 0; l < i; ++l) before += int(s[l]);
                        s[i] = 1;
                        coef = before % 2 ? -1.0 : 1.0;
                    }
                    R(index.at(s), a) += coef;
                }
            }
        basis_ = gell_mann(n_);
        const int q = static_cast<int>(basis_.size());
        images_.resize(q);
        for (int a = 0; a < q; ++a) images_[a] = rep(basis_[a]);
        gram_ = Mat(q, q);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) gram_(a, b) = (images_[a] * images_[b]).trace().real();
        gram_llt_.compute(gram_);
        if (gram_llt_.info() != Eigen::Success) throw InternalError("singular Gram matrix for symmetric representation");
    }

    int n() const { return n_; }
    int N() const { return N_; }

    //! Image of X in gl(N) under the induced Lie algebra action.
    CMat rep(CMat const& X) const {
        CMat out = CMat::Zero(N_, N_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (X(i, j) != cplx(0)) out += X(i, j) * E_[i * n_ + j].cast<cplx>();
        return out;
    }

    //! Adjoint of rep under the trace pairings: Tr(adjoint(M) X) = Tr(M rep(X)).
    CMat adjoint(CMat const& M) const {
        CMat out(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) out(j, i) = (M * E_[i * n_ + j].cast<cplx>()).trace();
        return out;
    }

    //! Frobenius-nearest point of rep(Her(n)_0) to M, returned as X in Her(n)_0.
    CMat project(CMat const& M) const {
        CMat Mc = M;
        Mc.diagonal().array() -= M.trace() / double(N_);
        const int q = static_cast<int>(basis_.size());
        Vec rhs(q);
        for (int a = 0; a < q; ++a) rhs[a] = (Mc * images_[a]).trace().real();
        Vec c = gram_llt_.solve(rhs);
        CMat X = CMat::Zero(n_, n_);
        for (int a = 0; a < q; ++a) X += c[a] * basis_[a];
        return X;
    }

    Mat const& gram() const { return gram_; }
    std::vector<CMat> const& basis() const { return basis_; }

    //! Generalized Gell-Mann matrices, orthonormal for Tr(AB)/2.
    static std::vector<CMat> gell_mann(int n) {
        std::vector<CMat> out;
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                CMat s = CMat::Zero(n, n);
                s(j, k) = s(k, j) = 1;
                out.push_back(s);
                CMat a = CMat::Zero(n, n);
                a(j, k) = cplx(0, -1);
                a(k, j) = cplx(0, 1);
                out.push_back(a);
            }
        for (int l = 1; l < n; ++l) {
            CMat d = CMat::Zero(n, n);
            double s = std::sqrt(2.0 / (l * (l + 1.0)));
            for (int j = 0; j < l; ++j) d(j, j) = s;
            d(l, l) = -l * s;
            out.push_back(d);
        }
        return out;
    }

  private:
    int n_;
    int N_;
    std::vector<Mat> E_;
    std::vector<CMat> basis_;
    std::vector<CMat> images_;
    Mat gram_;
    Eigen::LLT<Mat> gram_llt_;
};

inline CMat project_symmetric(CMat const& M, SymmetricRep const& rep) { return rep.project(M); }

/*!
 * Draws chamber points of t (length-D vectors) for a fixed setting and
 * spectrum. Bosons and fermions report the spectrum of the adjoint image
 * of the sample, which is the coordinate the density formulae use.
 */
class Sampler {
  public:
    Sampler(WeightSystem const& ws, Vec const& lambda) : ws_(&ws) {
        check_spectrum(ws, lambda);
        auto c = center_spectrum(lambda);
        lambda_ = c.values;
        shift_ = c.shift;
        if (ws.setting.kind != Kind::Distinguishable) rep_.emplace(ws);
    }

    Vec const& lambda() const { return lambda_; }
    double shift() const { return shift_; }

    //! One sample; with check set, also verifies unitarity and spectrum.
    template<class Rng>
    Vec sample(Rng& rng, bool check = false) const {
        CMat U = haar_unitary(ws_->N(), rng);
        CMat M = conjugate_diag(U, lambda_);
        if (check) verify(U, M);
        return reduce(M);
    }

    //! Chamber point of a fixed orbit element.
    Vec reduce(CMat const& M) const {
        Vec x(ws_->D);
        if (!rep_) {
            auto marg = marginals_distinguishable(M, ws_->setting.dims);
            for (std::size_t f = 0; f < marg.size(); ++f) {
                Vec ev = sorted_eigenvalues(marg[f]);
                ev.array() -= ev.mean();
                x.segment(ws_->offsets[f], ev.size()) = ev;
            }
        } else {
            Vec ev = sorted_eigenvalues(rep_->adjoint(M));
            ev.array() -= ev.mean();
            x = ev;
        }
        return x;
    }

    SymmetricRep const* rep() const { return rep_ ? &*rep_ : nullptr; }

  private:
    void verify(CMat const& U, CMat const& M) const {
        const int N = ws_->N();
        double unit = (U.adjoint() * U - CMat::Identity(N, N)).norm();
        if (unit > 1e-10) throw NumericalAlarm("unitarity residual " + std::to_string(unit));
        Vec ev = sorted_eigenvalues(M);
        Vec lam = lambda_;
        std::sort(lam.data(), lam.data() + N, std::greater<double>());
        double spec = (ev - lam).cwiseAbs().maxCoeff();
        if (spec > 1e-10 * std::max(1.0, lam.cwiseAbs().maxCoeff()))
            throw NumericalAlarm("spectrum residual " + std::to_string(spec));
    }

    WeightSystem const* ws_;
    Vec lambda_;
    double shift_ = 0;
    std::optional<SymmetricRep> rep_;
};

template<class Rng>
Vec sample_spectrum(WeightSystem const& ws, Vec const& lambda, Rng& rng) {
    return Sampler(ws, lambda).sample(rng);
}

//! Rectangular grid over the free chamber coordinates.
struct HistGrid {
    std::vector<double> lo, hi;
    std::vector<int> bins;

    int dim() const { return static_cast<int>(bins.size()); }
    long long size() const {
        long long s = 1;
        for (int b : bins) s *= b;
        return s;
    }
    double width(int a) const { return (hi[a] - lo[a]) / bins[a]; }
    double cell_volume() const {
        double v = 1;
        for (int a = 0; a < dim(); ++a) v *= width(a);
        return v;
    }
    double center(int a, int i) const { return lo[a] + (i + 0.5) * width(a); }

    //! Flat bin index, or -1 outside the grid. The upper edge is closed.
    long long locate(Vec const& f) const {
        long long idx = 0;
        for (int a = 0; a < dim(); ++a) {
            double t = (f[a] - lo[a]) / (hi[a] - lo[a]);
            if (!(t >= 0 && t <= 1)) return -1;
            int i = std::min(bins[a] - 1, static_cast<int>(t * bins[a]));
            idx = idx * bins[a] + i;
        }
        return idx;
    }

    std::vector<int> unflatten(long long idx) const {
        std::vector<int> out(dim());
        for (int a = dim() - 1; a >= 0; --a) {
            out[a] = static_cast<int>(idx % bins[a]);
            idx /= bins[a];
        }
        return out;
    }

    bool operator==(HistGrid const& o) const { return lo == o.lo && hi == o.hi && bins == o.bins; }
};

/*!
 * Grid covering the support: the first free coordinate of each factor is
 * nonnegative on the chamber, the rest lie between the factor extremes.
 */
inline HistGrid auto_grid(WeightSystem const& ws, Vec const& lambda, int bins_per_axis) {
    if (bins_per_axis < 1) throw ValidationError("grid needs at least one bin per axis");
    auto ext = factor_extremes(ws, lambda);
    HistGrid g;
    for (std::size_t f = 0; f < ws.factors.size(); ++f)
        for (int i = 0; i + 1 < ws.factors[f]; ++i) {
            g.lo.push_back(i == 0 ? 0.0 : ext[f].first);
            g.hi.push_back(ext[f].second);
            g.bins.push_back(bins_per_axis);
        }
    for (int a = 0; a < g.dim(); ++a)
        if (!(g.hi[a] > g.lo[a])) g.hi[a] = g.lo[a] + 1.0;
    return g;
}

struct Histogram {
    HistGrid grid;
    std::vector<long long> counts;
    long long total = 0;
    long long overflow = 0;
    std::string setting;
    Vec lambda;
    std::uint64_t seed = 0;

    Histogram() = default;
    explicit Histogram(HistGrid g) : grid(std::move(g)), counts(grid.size(), 0) {}

    void add(Vec const& free) {
        ++total;
        long long i = grid.locate(free);
        if (i < 0)
            ++overflow;
        else
            ++counts[i];
    }

    void merge(Histogram const& o) {
        if (!(grid == o.grid)) throw ValidationError("cannot merge histograms with different grids");
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
        total += o.total;
        overflow += o.overflow;
    }

    //! Empirical density per unit volume of free coordinates.
    double density(long long idx) const {
        return total ? counts[idx] / (double(total) * grid.cell_volume()) : 0.0;
    }
};

struct RunOptions {
    int workers = 1;
    int check_every = 100;  //!< verify unitarity/spectrum on this fraction of draws
};

/*!
 * Runs samples [0, count) split into contiguous chunks, one per worker.
 * Sample i always uses stream i of the seed, so the result does not depend
 * on the worker count. Points are returned in index order.
 */
inline std::vector<Vec> sample_points(WeightSystem const& ws, Vec const& lambda, long long count, std::uint64_t seed,
                                      RunOptions const& opt = {}) {
    if (count < 1) throw ValidationError("sample count must be >= 1");
    Sampler sampler(ws, lambda);
    std::vector<Vec> out(count);
    parallel_for(count, opt.workers, [&](long long i) {
        Philox rng(seed, static_cast<std::uint64_t>(i));
        out[i] = sampler.sample(rng, opt.check_every > 0 && i % opt.check_every == 0);
    });
    return out;
}

inline Histogram run_histogram(WeightSystem const& ws, Vec const& lambda, long long count, HistGrid const& grid,
                               std::uint64_t seed, RunOptions const& opt = {}) {
    if (count < 1) throw ValidationError("sample count must be >= 1");
    if (grid.dim() != ws.r()) throw ValidationError("grid dimension must equal r");
    Sampler sampler(ws, lambda);
    int workers = std::max(1, opt.workers);
    std::vector<Histogram> parts(workers, Histogram(grid));
    std::vector<std::exception_ptr> errs(workers);
    auto job = [&](int w) {
        try {
            long long b = count * w / workers, e = count * (w + 1) / workers;
            for (long long i = b; i < e; ++i) {
                Philox rng(seed, static_cast<std::uint64_t>(i));
                Vec x = sampler.sample(rng, opt.check_every > 0 && i % opt.check_every == 0);
                parts[w].add(free_coords(ws, x));
            }
        } catch (...) {
            errs[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        job(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(job, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    Histogram h(grid);
    for (auto const& p : parts) h.merge(p);
    h.setting = ws.setting.label();
    h.lambda = lambda;
    h.seed = seed;
    return h;
}

}  // namespace qmarg
