#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace qmarg {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using IVec = Eigen::Matrix<long long, Eigen::Dynamic, 1>;
using IMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kPi = 3.14159265358979323846;

//! Product of (v_i - v_j) over i < j.
template<class V>
auto vandermonde(V const& v) {
    using T = std::decay_t<decltype(v[0])>;
    T p(1);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        for (Eigen::Index j = i + 1; j < v.size(); ++j)
            p *= (v[i] - v[j]);
    return p;
}

//! log of prod_{l=1}^{n-1} l!
inline double log_superfactorial(int n) {
    double s = 0;
    for (int l = 1; l < n; ++l)
        s += std::lgamma(l + 1.0);
    return s;
}

inline long long binomial(long long n, long long k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long long r = 1;
    for (long long i = 1; i <= k; ++i) {
        if (r > (std::numeric_limits<long long>::max() / (n - k + i)))
            throw CapExceeded("binomial overflow");
        r = r * (n - k + i) / i;
    }
    return r;
}

//! Fraction-free Gaussian elimination determinant.
inline long long bareiss_det(IMat m) {
    auto n = m.rows();
    if (n == 0) return 1;
    long long sign = 1, prev = 1;
    for (Eigen::Index k = 0; k < n - 1; ++k) {
        if (m(k, k) == 0) {
            Eigen::Index s = k + 1;
            while (s < n && m(s, k) == 0) ++s;
            if (s == n) return 0;
            m.row(k).swap(m.row(s));
            sign = -sign;
        }
        for (Eigen::Index i = k + 1; i < n; ++i)
            for (Eigen::Index j = k + 1; j < n; ++j)
                m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
        prev = m(k, k);
    }
    return sign * m(n - 1, n - 1);
}

//! Row-reduce integer generators to a basis of the lattice they span.
inline std::vector<IVec> integer_lattice_basis(std::vector<IVec> rows) {
    if (rows.empty()) return {};
    auto ncol = rows.front().size();
    std::size_t piv = 0;
    for (Eigen::Index col = 0; col < ncol && piv < rows.size(); ++col) {
        for (std::size_t i = piv + 1; i < rows.size(); ++i) {
            while (rows[i][col] != 0) {
                long long q = rows[piv][col] / rows[i][col];
                rows[piv] -= q * rows[i];
                std::swap(rows[piv], rows[i]);
            }
        }
        if (rows[piv][col] == 0) continue;
        if (rows[piv][col] < 0) rows[piv] = -rows[piv];
        ++piv;
    }
    rows.resize(piv);
    return rows;
}

//! Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1, p1 = z;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
    }
    if (n % 2 == 1) x[n / 2] = 0;
    return {x, w};
}

//! Numerical rank via column-pivoted QR on unit-normalized columns.
inline int numerical_rank(Mat cols, double threshold = 1e-10) {
    if (cols.cols() == 0) return 0;
    for (Eigen::Index j = 0; j < cols.cols(); ++j) {
        double nrm = cols.col(j).norm();
        if (nrm > 0) cols.col(j) /= nrm;
    }
    Eigen::ColPivHouseholderQR<Mat> qr(cols);
    qr.setThreshold(threshold);
    return static_cast<int>(qr.rank());
}

//! Iterate over all k-subsets of {0..n-1}; callback returns false to stop.
template<class F>
bool for_each_subset(int n, int k, F&& f) {
    if (k > n || k < 0) return true;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        if (!f(idx)) return false;
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return true;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace qmarg
