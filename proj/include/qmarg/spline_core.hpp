#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <cstdint>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "lie_data.hpp"
#include "numeric.hpp"

namespace qmarg {

/*!
 * Box spline of a multiset of vectors in R^r: the density of
 * sum_j t_j v_j with t_j independent and uniform on [-1/2, 1/2].
 *
 * Evaluation uses the de Boor recurrence
 *   (m - r) M_X(y) = sum_j t_j M_{X\j}(y) + (1 - t_j) M_{X\j}(y - v_j),
 * with t the least-norm solution of y = sum t_j v_j, on the uncentered
 * spline M_X, memoized over (remaining set, applied shifts). Terms whose
 * remaining set does not span are zero almost everywhere and are dropped.
 * Points on knot hyperplanes are evaluated as the linear extrapolation
 * 2 B(x + h d) - B(x + 2h d), h = 2^-30 scale, d = normalized (1, 1/pi, 1/pi^2, ...),
 * which is exact for splines that are C^1 across the plane and gives the
 * one-sided limit otherwise.
 */
class BoxSpline {
  public:
    //! Columns of V are the vectors; gram (optional) is an exact integer Gram matrix.
    explicit BoxSpline(Mat V, std::optional<IMat> gram = std::nullopt) : V_(std::move(V)), gram_(std::move(gram)) {
        r_ = static_cast<int>(V_.rows());
        m_ = static_cast<int>(V_.cols());
        if (m_ > 63) throw CapExceeded("box spline supports at most 63 vectors");
        if (m_ < r_ || numerical_rank(V_) < r_) throw ValidationError("box spline vectors do not span");
        if (!gram_) {
            bool integral = true;
            for (Eigen::Index i = 0; i < V_.size(); ++i)
                if (V_.data()[i] != std::round(V_.data()[i]) || std::abs(V_.data()[i]) > 1e6) integral = false;
            if (integral) {
                IMat A = V_.unaryExpr([](double v) { return static_cast<long long>(std::llround(v)); }).cast<long long>();
                gram_ = A.transpose() * A;
            }
        }
        half_sum_ = 0.5 * V_.rowwise().sum();
        double hw = 0;
        for (int j = 0; j < m_; ++j) hw += 0.5 * V_.col(j).norm();
        scale_ = std::max(1.0, hw);
        dir_ = Vec(r_);
        for (int a = 0; a < r_; ++a) dir_[a] = std::pow(kPi, -a);
        dir_.normalize();
        build_knots();
    }

    //! From a weight system: the multiplicity-expanded directions in orthonormal t coordinates.
    static BoxSpline from_weights(WeightSystem const& ws) {
        std::vector<IVec> cols;
        for (auto const& d : ws.directions)
            for (int k = 0; k < d.mult; ++k) cols.push_back(d.ivec);
        Mat V(ws.r(), cols.size());
        IMat A(ws.D, cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) {
            V.col(j) = to_orthonormal(ws, cols[j].cast<double>());
            A.col(j) = cols[j];
        }
        return BoxSpline(V, IMat(A.transpose() * A));
    }

    BoxSpline(BoxSpline const& o)
        : V_(o.V_), gram_(o.gram_), r_(o.r_), m_(o.m_), half_sum_(o.half_sum_), scale_(o.scale_), dir_(o.dir_),
          knots_(o.knots_) {}
    BoxSpline(BoxSpline&&) = default;
    BoxSpline& operator=(BoxSpline o) {
        std::swap(V_, o.V_);
        std::swap(gram_, o.gram_);
        r_ = o.r_;
        m_ = o.m_;
        std::swap(half_sum_, o.half_sum_);
        scale_ = o.scale_;
        std::swap(dir_, o.dir_);
        std::swap(knots_, o.knots_);
        subsets_.clear();
        return *this;
    }

    int r() const { return r_; }
    int size() const { return m_; }
    Mat const& vectors() const { return V_; }

    //! Centered box spline at x (orthonormal coordinates).
    double operator()(Vec const& x) const {
        if (x.size() != r_) throw ValidationError("box spline: point has wrong dimension");
        if (!on_knot(x)) return raw(x + half_sum_);
        const double h = std::ldexp(1.0, std::ilogb(scale_) - 30);  // dyadic, about 1e-9 * scale
        Vec x1 = x + h * dir_, x2 = x + 2 * h * dir_;
        return 2 * raw(x1 + half_sum_) - raw(x2 + half_sum_);
    }

    //! True if x lies on a knot hyperplane, to relative tolerance tol.
    bool on_knot(Vec const& x, double tol = 1e-12) const {
        Vec y = x + half_sum_;
        for (auto const& k : knots_) {
            double p = k.normal.dot(y);
            auto it = std::lower_bound(k.sums.begin(), k.sums.end(), p);
            double best = std::numeric_limits<double>::infinity();
            if (it != k.sums.end()) best = std::min(best, *it - p);
            if (it != k.sums.begin()) best = std::min(best, p - *(it - 1));
            if (best <= tol * scale_) return true;
        }
        return false;
    }

    //! Componentwise bounds of the centered support.
    std::pair<Vec, Vec> bounding_box() const {
        Vec lo = Vec::Zero(r_), hi = Vec::Zero(r_);
        for (int j = 0; j < m_; ++j)
            for (int a = 0; a < r_; ++a) {
                lo[a] -= 0.5 * std::abs(V_(a, j));
                hi[a] += 0.5 * std::abs(V_(a, j));
            }
        return {lo, hi};
    }

  private:
    struct SubsetData {
        bool spans = false;
        Mat pinv;         //!< k x r least-norm solve
        double inv_det = 0;  //!< 1/|det| when k == r
        Vec lo, hi;       //!< zonotope bounding box of the subset (uncentered)
    };

    struct Knot {
        Vec normal;
        std::vector<double> sums;
    };

    using Key = std::pair<std::uint64_t, std::uint64_t>;
    struct KeyHash {
        std::size_t operator()(Key const& k) const noexcept { return std::hash<std::uint64_t>()(k.first * 0x9E3779B97F4A7C15ull ^ k.second); }
    };

    SubsetData const& subset(std::uint64_t mask) const {
        std::lock_guard<std::mutex> lock(*mu_);
        auto it = subsets_.find(mask);
        if (it != subsets_.end()) return it->second;
        std::vector<int> idx;
        for (int j = 0; j < m_; ++j)
            if (mask >> j & 1) idx.push_back(j);
        Mat A(r_, idx.size());
        for (std::size_t c = 0; c < idx.size(); ++c) A.col(c) = V_.col(idx[c]);
        SubsetData s;
        s.lo = Vec::Zero(r_);
        s.hi = Vec::Zero(r_);
        for (std::size_t c = 0; c < idx.size(); ++c)
            for (int a = 0; a < r_; ++a) {
                s.lo[a] += std::min(0.0, A(a, c));
                s.hi[a] += std::max(0.0, A(a, c));
            }
        s.spans = static_cast<int>(idx.size()) >= r_ && numerical_rank(A) == r_;
        if (s.spans) {
            // least-norm solve A^T (A A^T)^-1; exact for small integer vectors
            s.pinv = A.transpose() * (A * A.transpose()).inverse();
            if (static_cast<int>(idx.size()) == r_) {
                double det;
                if (gram_) {
                    IMat G(r_, r_);
                    for (int i = 0; i < r_; ++i)
                        for (int j = 0; j < r_; ++j) G(i, j) = (*gram_)(idx[i], idx[j]);
                    det = std::sqrt(static_cast<double>(bareiss_det(G)));
                } else {
                    det = std::abs(A.determinant());
                }
                s.inv_det = 1.0 / det;
            }
        }
        return subsets_.emplace(mask, std::move(s)).first->second;
    }

    double raw(Vec const& y) const {
        std::unordered_map<Key, double, KeyHash> memo;
        const std::uint64_t full = m_ == 64 ? ~0ull : ((1ull << m_) - 1);
        return rec(full, 0, y, memo);
    }

    double rec(std::uint64_t mask, std::uint64_t shifted, Vec const& y0,
               std::unordered_map<Key, double, KeyHash>& memo) const {
        Key key{mask, shifted};
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        Vec y = y0;
        for (int j = 0; j < m_; ++j)
            if (shifted >> j & 1) y -= V_.col(j);
        SubsetData const& s = subset(mask);
        double val = 0;
        const double eps = 1e-13 * scale_;
        bool inside = true;
        for (int a = 0; a < r_; ++a)
            if (y[a] < s.lo[a] - eps || y[a] > s.hi[a] + eps) inside = false;
        if (inside && s.spans) {
            const int k = std::popcount(mask);
            Vec t = s.pinv * y;
            if (k == r_) {
                bool in = true;
                for (int c = 0; c < k; ++c)
                    if (!(t[c] >= 0 && t[c] < 1)) in = false;
                val = in ? s.inv_det : 0.0;
            } else {
                int c = 0;
                double acc = 0;
                for (int j = 0; j < m_; ++j) {
                    if (!(mask >> j & 1)) continue;
                    const double tj = t[c++];
                    const std::uint64_t sub = mask & ~(1ull << j);
                    if (!subset(sub).spans) continue;
                    if (tj != 0) acc += tj * rec(sub, shifted, y0, memo);
                    if (tj != 1) acc += (1 - tj) * rec(sub, shifted | (1ull << j), y0, memo);
                }
                val = acc / (k - r_);
            }
        }
        memo.emplace(key, val);
        return val;
    }

    void build_knots() {
        // distinct directions up to scaling decide the hyperplanes
        std::vector<int> distinct;
        for (int j = 0; j < m_; ++j) {
            bool dup = false;
            for (int i : distinct) {
                Mat p(r_, 2);
                p << V_.col(i), V_.col(j);
                if (numerical_rank(p) < 2) dup = true;
            }
            if (!dup) distinct.push_back(j);
        }
        std::vector<Vec> normals;
        auto add_normal = [&](Vec n) {
            n.normalize();
            for (auto const& o : normals)
                if (std::abs(std::abs(o.dot(n)) - 1) < 1e-12) return;
            normals.push_back(n);
        };
        if (r_ == 1) {
            add_normal(Vec::Ones(1));
        } else {
            for_each_subset(static_cast<int>(distinct.size()), r_ - 1, [&](std::vector<int> const& idx) {
                Mat A(r_, r_ - 1);
                for (int c = 0; c < r_ - 1; ++c) A.col(c) = V_.col(distinct[idx[c]]);
                Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU);
                auto sv = svd.singularValues();
                if (sv[r_ - 2] > 1e-10 * std::max(1.0, sv[0])) add_normal(svd.matrixU().col(r_ - 1));
                return true;
            });
        }
        for (auto const& n : normals) {
            Knot k;
            k.normal = n;
            std::vector<double> sums{0.0};
            for (int j = 0; j < m_; ++j) {
                double p = n.dot(V_.col(j));
                if (std::abs(p) < 1e-12 * scale_) continue;
                std::vector<double> next;
                next.reserve(sums.size() * 2);
                for (double s : sums) {
                    next.push_back(s);
                    next.push_back(s + p);
                }
                std::sort(next.begin(), next.end());
                sums.clear();
                for (double v : next)
                    if (sums.empty() || v - sums.back() > 1e-12 * scale_) sums.push_back(v);
            }
            k.sums = std::move(sums);
            knots_.push_back(std::move(k));
        }
    }

    Mat V_;
    std::optional<IMat> gram_;
    int r_ = 0, m_ = 0;
    Vec half_sum_;
    double scale_ = 1;
    Vec dir_;
    std::vector<Knot> knots_;
    mutable std::unordered_map<std::uint64_t, SubsetData> subsets_;
    std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
};

}  // namespace qmarg
