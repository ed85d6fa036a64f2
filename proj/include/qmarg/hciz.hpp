#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "lie_data.hpp"
#include "numeric.hpp"
#include "random.hpp"

namespace qmarg {

struct AlternantOptions {
    //! Nodes closer than this are treated as one confluent cluster.
    double gap_threshold = 1e-3;
};

namespace detail {

template<class T>
std::vector<std::vector<int>> cluster_nodes(std::vector<T> const& v, double thr) {
    const int n = static_cast<int>(v.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(v[i] - v[j]) < thr) parent[find(i)] = find(j);
    std::vector<std::vector<int>> groups;
    std::vector<int> slot(n, -1);
    for (int i = 0; i < n; ++i) {
        int root = find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[slot[root]].push_back(i);
    }
    return groups;
}

/*!
 * Bivariate divided differences of exp(s*t): entry (j,k) is
 * f[x_0..x_j; y_0..y_k], read off the first column of exp(Zx (x) Zy) with
 * Zx, Zy lower bidiagonal (nodes on the diagonal, ones below). The action
 * on E_00 is computed by a scaled Taylor series.
 */
inline CMat exp_divided_differences(std::vector<double> const& xs, std::vector<cplx> const& ys) {
    const int m = static_cast<int>(xs.size());
    const int n = static_cast<int>(ys.size());
    double xmax = 0, ymax = 0;
    for (double v : xs) xmax = std::max(xmax, std::abs(v));
    for (cplx v : ys) ymax = std::max(ymax, std::abs(v));
    const int steps = std::max(1, static_cast<int>(std::ceil((xmax + 1) * (ymax + 1))));
    auto apply = [&](CMat const& V) {
        CMat W(m, n);
        for (int i = 0; i < m; ++i) {
            W.row(i) = xs[i] * V.row(i);
            if (i > 0) W.row(i) += V.row(i - 1);
        }
        CMat U(m, n);
        for (int k = 0; k < n; ++k) {
            U.col(k) = ys[k] * W.col(k);
            if (k > 0) U.col(k) += W.col(k - 1);
        }
        return U;
    };
    CMat V = CMat::Zero(m, n);
    V(0, 0) = 1;
    for (int s = 0; s < steps; ++s) {
        CMat term = V, sum = V;
        int small = 0;
        for (int p = 1; p < 400 && small < 2; ++p) {
            term = apply(term) / (double(steps) * p);
            sum += term;
            small = term.norm() <= 1e-18 * sum.norm() ? small + 1 : 0;
        }
        V = sum;
    }
    return V;
}

}  // namespace detail

/*!
 * det[exp(x_j y_k)] / (Delta(x) Delta(y)) as an entire function.
 * Nodes are grouped into clusters of near-coincident values; inside a
 * cluster the rows (columns) are replaced by divided differences, which
 * removes the vanishing factors of Delta exactly. Well separated nodes
 * take the plain determinant path.
 */
inline cplx alternant_ratio(Vec const& x, CVec const& y, AlternantOptions const& opt = {}) {
    const int N = static_cast<int>(x.size());
    if (y.size() != N) throw ValidationError("alternant_ratio: length mismatch");
    if (N == 0) return 1;
    if (N == 1) return std::exp(x[0] * y[0]);
    std::vector<double> xv(x.data(), x.data() + N);
    std::vector<cplx> yv(y.data(), y.data() + N);
    auto gx = detail::cluster_nodes(xv, opt.gap_threshold);
    auto gy = detail::cluster_nodes(yv, opt.gap_threshold);

    int pairs = 0;
    std::vector<double> xo;
    std::vector<int> xg;
    for (std::size_t c = 0; c < gx.size(); ++c) {
        pairs += static_cast<int>(gx[c].size() * (gx[c].size() - 1) / 2);
        for (int i : gx[c]) {
            xo.push_back(xv[i]);
            xg.push_back(static_cast<int>(c));
        }
    }
    std::vector<cplx> yo;
    std::vector<int> yg;
    for (std::size_t c = 0; c < gy.size(); ++c) {
        pairs += static_cast<int>(gy[c].size() * (gy[c].size() - 1) / 2);
        for (int i : gy[c]) {
            yo.push_back(yv[i]);
            yg.push_back(static_cast<int>(c));
        }
    }

    CMat F(N, N);
    int row = 0;
    for (auto const& cx : gx) {
        std::vector<double> xs;
        for (int i : cx) xs.push_back(xv[i]);
        int col = 0;
        for (auto const& cy : gy) {
            std::vector<cplx> ys;
            for (int i : cy) ys.push_back(yv[i]);
            if (xs.size() == 1 && ys.size() == 1)
                F(row, col) = std::exp(xs[0] * ys[0]);
            else
                F.block(row, col, xs.size(), ys.size()) = detail::exp_divided_differences(xs, ys);
            col += static_cast<int>(ys.size());
        }
        row += static_cast<int>(xs.size());
    }

    cplx denom = 1;
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k) {
            if (xg[j] != xg[k]) denom *= (xo[j] - xo[k]);
            if (yg[j] != yg[k]) denom *= (yo[j] - yo[k]);
        }
    cplx det = F.partialPivLu().determinant();
    return (pairs % 2 ? -1.0 : 1.0) * det / denom;
}

//! Plain determinant ratio; undefined on confluent nodes.
inline cplx alternant_ratio_naive(Vec const& x, CVec const& y) {
    const int N = static_cast<int>(x.size());
    CMat F(N, N);
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) F(j, k) = std::exp(x[j] * y[k]);
    return F.partialPivLu().determinant() / (vandermonde(x) * vandermonde(y));
}

//! HCIZ integral: Haar average of exp(Tr(A U B U^*)) for A, B diagonal.
inline double hciz_value(Vec const& a, Vec const& b) {
    if (a.size() != b.size()) throw ValidationError("hciz: length mismatch");
    const int N = static_cast<int>(a.size());
    return std::exp(log_superfactorial(N)) * alternant_ratio(a, b.cast<cplx>()).real();
}

struct McEstimate {
    double mean = 0;
    double std_error = 0;
    long long count = 0;
};

inline McEstimate mc_hciz(Vec const& a, Vec const& b, long long count, std::uint64_t seed) {
    if (a.size() != b.size()) throw ValidationError("hciz: length mismatch");
    if (count < 2) throw ValidationError("mc_hciz needs at least two samples");
    const int N = static_cast<int>(a.size());
    double s = 0, s2 = 0;
    for (long long i = 0; i < count; ++i) {
        Philox rng(seed, static_cast<std::uint64_t>(i));
        CMat U = haar_unitary(N, rng);
        double tr = 0;
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k) tr += a[j] * b[k] * std::norm(U(j, k));
        double v = std::exp(tr);
        s += v;
        s2 += v * v;
    }
    McEstimate e;
    e.count = count;
    e.mean = s / count;
    e.std_error = std::sqrt(std::max(0.0, s2 / count - e.mean * e.mean) / (count - 1));
    return e;
}

/*!
 * Delta_h(xi) * Delta_N(lambda) * alternant_ratio(lambda, i L(xi)).
 * Equals i^{-|Phi_g^+|} (Delta_h(xi) / Delta_N(L xi)) sum_w eps(w) e^{i<w lambda, L xi>}
 * and is finite everywhere.
 */
inline cplx hc_sum_kernel(WeightSystem const& ws, Vec const& lambda, Vec const& xi, AlternantOptions const& opt = {}) {
    CVec iy = cplx(0, 1) * weight_map(ws, xi).cast<cplx>();
    return delta_h(ws, xi) * vandermonde(lambda) * alternant_ratio(lambda, iy, opt);
}

}  // namespace qmarg
