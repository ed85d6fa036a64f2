#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace qmarg {

enum class Kind { Distinguishable, Bosons, Fermions };

//! Size guards. Not constants of the mathematics.
struct Limits {
    int max_N = 64;
    int max_expanded_directions = 40;
};

struct Setting {
    Kind kind = Kind::Distinguishable;
    std::vector<int> dims;  //!< tensor factors, or {n} for bosons/fermions
    int k = 0;              //!< particle number for bosons/fermions
    int N = 0;              //!< orbit dimension
    int r = 0;              //!< dim of the torus t

    int ambient() const { return std::accumulate(dims.begin(), dims.end(), 0); }

    std::string label() const {
        std::ostringstream os;
        switch (kind) {
            case Kind::Distinguishable:
                os << "dst:";
                for (std::size_t i = 0; i < dims.size(); ++i)
                    os << (i ? "," : "") << dims[i];
                break;
            case Kind::Bosons: os << "bos:" << dims[0] << "," << k; break;
            case Kind::Fermions: os << "fer:" << dims[0] << "," << k; break;
        }
        return os.str();
    }
};

inline Setting distinguishable(std::vector<int> dims) {
    if (dims.size() < 2)
        throw ValidationError("distinguishable setting needs at least two factors");
    long long N = 1;
    int r = 0;
    for (int n : dims) {
        if (n < 2) throw ValidationError("factor dimensions must be >= 2");
        N *= n;
        if (N > (1LL << 30)) throw CapExceeded("N overflow");
        r += n - 1;
    }
    return Setting{Kind::Distinguishable, std::move(dims), 0, static_cast<int>(N), r};
}

inline Setting bosons(int n, int k) {
    if (n < 2 || k < 2) throw ValidationError("bosons need n >= 2 and k >= 2");
    return Setting{Kind::Bosons, {n}, k, static_cast<int>(binomial(n + k - 1, k)), n - 1};
}

inline Setting fermions(int n, int k) {
    if (!(k > 1 && k < n - 1))
        throw ValidationError("fermions need 1 < k < n-1");
    return Setting{Kind::Fermions, {n}, k, static_cast<int>(binomial(n, k)), n - 1};
}

//! Parse "dst:2,2", "bos:2,2", "fer:4,2".
inline Setting parse_setting(std::string const& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw ValidationError("setting must look like kind:a,b");
    std::string kind = text.substr(0, colon);
    std::vector<int> nums;
    std::stringstream ss(text.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            int v = std::stoi(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            nums.push_back(v);
        } catch (std::exception const&) {
            throw ValidationError("bad integer in setting: '" + tok + "'");
        }
    }
    if (kind == "dst") return distinguishable(nums);
    if (nums.size() != 2) throw ValidationError(kind + " setting needs exactly n,k");
    if (kind == "bos") return bosons(nums[0], nums[1]);
    if (kind == "fer") return fermions(nums[0], nums[1]);
    throw ValidationError("unknown setting kind '" + kind + "'");
}

struct Direction {
    IVec ivec;  //!< integer coordinates in the ambient space
    Vec vec;
    int mult = 1;
};

//! Element of the Weyl group of H: one permutation per factor.
struct WeylElement {
    std::vector<std::vector<int>> perms;
    int sign = 1;
};

/*!
 * Weight data for a setting. Points of t are stored as length-D vectors
 * (D = sum of factor sizes) whose per-factor blocks sum to zero.
 */
struct WeightSystem {
    Setting setting;
    std::vector<int> factors;
    std::vector<int> offsets;
    int D = 0;
    IMat int_rows;  //!< N x D integer weights
    Mat rows;       //!< N x D weights projected into t
    std::vector<Direction> directions;
    int gh_sign = 1;  //!< Delta_{g/h} = gh_sign * prod <a,x>^mult
    std::vector<IVec> h_roots;
    Vec rho_h;
    Vec rho_g;
    Vec rho_g_pullback;
    Mat basis;  //!< D x r orthonormal basis of t
    int pos_roots_g = 0;
    int pos_roots_h = 0;
    int d = 0;  //!< |Phi_g^+| - |Phi_h^+| - r
    double log_delta_rho_g = 0;
    double log_delta_rho_h = 0;

    int N() const { return setting.N; }
    int r() const { return setting.r; }
    int expanded_size() const {
        int s = 0;
        for (auto const& d : directions) s += d.mult;
        return s;
    }
};

//! Subtract the per-factor mean.
inline Vec center_factors(std::vector<int> const& factors, Vec x) {
    int off = 0;
    for (int n : factors) {
        x.segment(off, n).array() -= x.segment(off, n).mean();
        off += n;
    }
    return x;
}

inline Vec center_factors(WeightSystem const& ws, Vec x) { return center_factors(ws.factors, std::move(x)); }

//! Sort each factor block in non-increasing order.
inline Vec to_chamber(WeightSystem const& ws, Vec x) {
    int off = 0;
    for (int n : ws.factors) {
        std::stable_sort(x.data() + off, x.data() + off + n, std::greater<double>());
        off += n;
    }
    return x;
}

inline bool in_closed_chamber(WeightSystem const& ws, Vec const& x, double tol = 0) {
    int off = 0;
    for (int n : ws.factors) {
        for (int i = 0; i + 1 < n; ++i)
            if (x[off + i] < x[off + i + 1] - tol) return false;
        off += n;
    }
    return true;
}

template<class Scalar>
Scalar delta_h(WeightSystem const& ws, Eigen::Matrix<Scalar, Eigen::Dynamic, 1> const& x) {
    Scalar p(1);
    int off = 0;
    for (int n : ws.factors) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                p *= x[off + i] - x[off + j];
        off += n;
    }
    return p;
}

inline double delta_h(WeightSystem const& ws, Vec const& x) { return delta_h<double>(ws, x); }

inline double delta_gh(WeightSystem const& ws, Vec const& x) {
    double p = ws.gh_sign;
    for (auto const& d : ws.directions)
        p *= std::pow(d.vec.dot(x), d.mult);
    return p;
}

//! L(x): the N embedded eigenvalues of x.
inline Vec weight_map(WeightSystem const& ws, Vec const& x) { return ws.rows * x; }

//! Adjoint of L: <Pi(nu), x> = <nu, L(x)>.
inline Vec project_to_t(WeightSystem const& ws, Vec const& nu) { return ws.rows.transpose() * nu; }

inline Vec to_orthonormal(WeightSystem const& ws, Vec const& x) { return ws.basis.transpose() * x; }
inline Vec from_orthonormal(WeightSystem const& ws, Vec const& eta) { return ws.basis * eta; }

//! Free chamber coordinates: all but the last entry of each factor.
inline Vec free_coords(WeightSystem const& ws, Vec const& x) {
    Vec f(ws.r());
    int off = 0, j = 0;
    for (int n : ws.factors) {
        for (int i = 0; i + 1 < n; ++i) f[j++] = x[off + i];
        off += n;
    }
    return f;
}

inline Vec from_free_coords(WeightSystem const& ws, Vec const& f) {
    Vec x(ws.D);
    int off = 0, j = 0;
    for (int n : ws.factors) {
        double s = 0;
        for (int i = 0; i + 1 < n; ++i) {
            x[off + i] = f[j++];
            s += x[off + i];
        }
        x[off + n - 1] = -s;
        off += n;
    }
    return x;
}

//! Lebesgue density on t times this factor gives density in free coordinates.
inline double free_coordinate_jacobian(WeightSystem const& ws) {
    double j = 1;
    for (int n : ws.factors) j *= std::sqrt(static_cast<double>(n));
    return j;
}

inline std::vector<WeylElement> weyl_group_h(WeightSystem const& ws) {
    std::vector<WeylElement> out{WeylElement{{}, 1}};
    for (int n : ws.factors) {
        std::vector<int> p(n);
        std::iota(p.begin(), p.end(), 0);
        std::vector<std::pair<std::vector<int>, int>> perms;
        do {
            int inv = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (p[i] > p[j]) ++inv;
            perms.emplace_back(p, inv % 2 ? -1 : 1);
        } while (std::next_permutation(p.begin(), p.end()));
        std::vector<WeylElement> next;
        for (auto const& w : out)
            for (auto const& [perm, s] : perms) {
                WeylElement e = w;
                e.perms.push_back(perm);
                e.sign *= s;
                next.push_back(std::move(e));
            }
        out = std::move(next);
    }
    return out;
}

template<class V>
V weyl_apply(WeightSystem const& ws, WeylElement const& w, V const& x) {
    V y = x;
    int off = 0;
    for (std::size_t f = 0; f < ws.factors.size(); ++f) {
        for (int i = 0; i < ws.factors[f]; ++i)
            y[off + i] = x[off + w.perms[f][i]];
        off += ws.factors[f];
    }
    return y;
}

namespace detail {

inline Mat helmert_basis(std::vector<int> const& factors) {
    int D = std::accumulate(factors.begin(), factors.end(), 0);
    int r = 0;
    for (int n : factors) r += n - 1;
    Mat E = Mat::Zero(D, r);
    int off = 0, col = 0;
    for (int n : factors) {
        for (int i = 1; i < n; ++i, ++col) {
            double s = 1.0 / std::sqrt(double(i) * (i + 1));
            for (int j = 0; j < i; ++j) E(off + j, col) = s;
            E(off + i, col) = -i * s;
        }
        off += n;
    }
    return E;
}

inline IMat enumerate_rows(Setting const& s) {
    std::vector<std::vector<int>> rows;
    int D = s.ambient();
    if (s.kind == Kind::Distinguishable) {
        std::vector<int> idx(s.dims.size(), 0);
        while (true) {
            std::vector<int> row(D, 0);
            int off = 0;
            for (std::size_t j = 0; j < idx.size(); ++j) {
                row[off + idx[j]] = 1;
                off += s.dims[j];
            }
            rows.push_back(row);
            int j = static_cast<int>(idx.size()) - 1;
            while (j >= 0 && ++idx[j] == s.dims[j]) idx[j--] = 0;
            if (j < 0) break;
        }
    } else {
        int n = s.dims[0];
        int cap = s.kind == Kind::Bosons ? s.k : 1;
        std::vector<int> alpha(n, 0);
        auto rec = [&](auto&& self, int pos, int left) -> void {
            if (pos == n - 1) {
                if (left <= cap) {
                    alpha[pos] = left;
                    rows.push_back(alpha);
                }
                return;
            }
            for (int a = std::min(left, cap); a >= 0; --a) {
                alpha[pos] = a;
                self(self, pos + 1, left - a);
            }
        };
        rec(rec, 0, s.k);
    }
    IMat m(rows.size(), D);
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (int j = 0; j < D; ++j) m(a, j) = rows[a][j];
    return m;
}

}  // namespace detail

/*!
 * Build the weight system for integer weight rows of a representation of
 * U(N) restricted to a product of unitary groups of the given sizes.
 */
inline WeightSystem build_weight_system_from_rows(Setting setting, std::vector<int> factors, IMat const& int_rows,
                                                  Limits const& limits = {}) {
    WeightSystem ws;
    ws.setting = setting;
    ws.factors = factors;
    ws.D = std::accumulate(factors.begin(), factors.end(), 0);
    int off = 0;
    for (int n : factors) {
        ws.offsets.push_back(off);
        off += n;
    }
    const int N = static_cast<int>(int_rows.rows());
    if (N != setting.N) throw InternalError("row count mismatch");
    if (N > limits.max_N) throw CapExceeded("N = " + std::to_string(N) + " exceeds cap " + std::to_string(limits.max_N));
    ws.int_rows = int_rows;
    ws.rows.resize(N, ws.D);
    for (int a = 0; a < N; ++a)
        ws.rows.row(a) = center_factors(factors, int_rows.row(a).cast<double>().transpose()).transpose();

    for (std::size_t f = 0; f < factors.size(); ++f)
        for (int i = 0; i < factors[f]; ++i)
            for (int j = i + 1; j < factors[f]; ++j) {
                IVec h = IVec::Zero(ws.D);
                h[ws.offsets[f] + i] = 1;
                h[ws.offsets[f] + j] = -1;
                ws.h_roots.push_back(h);
            }

    // pairwise differences; divide out one copy of each h-root, tracking sign
    std::vector<IVec> diffs;
    for (int a = 0; a < N; ++a)
        for (int b = a + 1; b < N; ++b) {
            IVec dv = (int_rows.row(a) - int_rows.row(b)).transpose();
            if (dv.isZero()) throw ValidationError("repeated weight rows: Delta_g vanishes on t");
            diffs.push_back(dv);
        }
    int sign = 1;
    for (auto const& h : ws.h_roots) {
        bool found = false;
        for (std::size_t i = 0; i < diffs.size(); ++i) {
            if (diffs[i] == h || diffs[i] == IVec(-h)) {
                if (diffs[i] != h) sign = -sign;
                diffs.erase(diffs.begin() + static_cast<long>(i));
                found = true;
                break;
            }
        }
        if (!found) throw InternalError("h-root not among weight differences");
    }
    std::map<std::vector<long long>, int> grouped;
    for (auto& dv : diffs) {
        Eigen::Index first = 0;
        while (dv[first] == 0) ++first;
        if (dv[first] < 0) {
            dv = -dv;
            sign = -sign;
        }
        grouped[std::vector<long long>(dv.data(), dv.data() + dv.size())] += 1;
    }
    for (auto const& [key, mult] : grouped) {
        Direction d;
        d.ivec = Eigen::Map<const IVec>(key.data(), static_cast<Eigen::Index>(key.size()));
        d.vec = d.ivec.cast<double>();
        d.mult = mult;
        ws.directions.push_back(d);
    }
    ws.gh_sign = sign;

    ws.pos_roots_g = N * (N - 1) / 2;
    ws.pos_roots_h = static_cast<int>(ws.h_roots.size());
    ws.d = ws.pos_roots_g - ws.pos_roots_h - setting.r;
    if (ws.expanded_size() != ws.pos_roots_g - ws.pos_roots_h) throw InternalError("direction count mismatch");

    ws.rho_g.resize(N);
    for (int a = 0; a < N; ++a) ws.rho_g[a] = 0.5 * (N - 1) - a;
    ws.rho_h.resize(ws.D);
    for (std::size_t f = 0; f < factors.size(); ++f)
        for (int i = 0; i < factors[f]; ++i) ws.rho_h[ws.offsets[f] + i] = 0.5 * (factors[f] - 1) - i;
    ws.rho_g_pullback = project_to_t(ws, ws.rho_g);
    ws.basis = detail::helmert_basis(factors);
    ws.log_delta_rho_g = log_superfactorial(N);
    ws.log_delta_rho_h = 0;
    for (int n : factors) ws.log_delta_rho_h += log_superfactorial(n);

    Mat dirs(ws.D, ws.directions.size());
    for (std::size_t i = 0; i < ws.directions.size(); ++i) dirs.col(i) = ws.directions[i].vec;
    if (numerical_rank(dirs) != setting.r) throw ValidationError("directions do not span t");

    std::mt19937_64 gen(0x5eed);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 16; ++trial) {
        Vec x(ws.D);
        for (auto& v : x) v = nd(gen);
        x = center_factors(ws, x);
        double lhs = vandermonde(weight_map(ws, x));
        double rhs = delta_h(ws, x) * delta_gh(ws, x);
        if (std::abs(lhs - rhs) > 1e-9 * std::max(std::abs(lhs), 1e-300))
            throw InternalError("Delta factorization check failed");
    }
    return ws;
}

inline WeightSystem build_weight_system(Setting const& setting, Limits const& limits = {}) {
    if (setting.N > limits.max_N)
        throw CapExceeded("N = " + std::to_string(setting.N) + " exceeds cap " + std::to_string(limits.max_N));
    return build_weight_system_from_rows(setting, setting.dims, detail::enumerate_rows(setting), limits);
}

//! Directions repeated by multiplicity, as columns.
inline Mat expanded_directions(std::vector<Direction> const& dirs) {
    int m = 0;
    for (auto const& d : dirs) m += d.mult;
    Mat out(dirs.empty() ? 0 : dirs.front().vec.size(), m);
    int c = 0;
    for (auto const& d : dirs)
        for (int k = 0; k < d.mult; ++k) out.col(c++) = d.vec;
    return out;
}

namespace detail {

inline void check_expanded_cap(Mat const& ex, Limits const& limits) {
    if (ex.cols() > limits.max_expanded_directions)
        throw CapExceeded("expanded direction count " + std::to_string(ex.cols()) + " exceeds cap " +
                          std::to_string(limits.max_expanded_directions));
}

//! Unit normal (within span) of the hyperplane spanned by the given columns.
inline std::optional<Vec> hyperplane_normal(Mat const& span_basis, Mat const& cols, int r) {
    Mat c = span_basis.transpose() * cols;  // r x (r-1)
    Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeFullU);
    auto sv = svd.singularValues();
    if (sv.size() < r - 1 || (r > 1 && sv[r - 2] < 1e-10 * std::max(1.0, sv[0]))) return std::nullopt;
    Vec y = span_basis * svd.matrixU().col(r - 1);
    return y;
}

inline int count_nonorthogonal(Mat const& ex, Vec const& y) {
    int cnt = 0;
    for (Eigen::Index j = 0; j < ex.cols(); ++j)
        if (std::abs(ex.col(j).normalized().dot(y.normalized())) > 1e-10) ++cnt;
    return cnt;
}

}  // namespace detail

/*!
 * Largest l such that deleting any l+1 directions (with multiplicity)
 * leaves a spanning set. Explicit enumeration of deletion sets, in
 * increasing size, stopping at the first non-spanning complement.
 */
inline int ell_by_deletion(std::vector<Direction> const& dirs, int r, Limits const& limits = {}) {
    Mat ex = expanded_directions(dirs);
    detail::check_expanded_cap(ex, limits);
    const int m = static_cast<int>(ex.cols());
    if (numerical_rank(ex) < r) throw ValidationError("directions do not span");
    for (int k = 1; k <= m; ++k) {
        bool broke = false;
        for_each_subset(m, k, [&](std::vector<int> const& del) {
            Mat rest(ex.rows(), m - k);
            int c = 0, di = 0;
            for (int j = 0; j < m; ++j) {
                if (di < k && del[di] == j) { ++di; continue; }
                rest.col(c++) = ex.col(j);
            }
            if (numerical_rank(rest) < r) { broke = true; return false; }
            return true;
        });
        if (broke) return k - 2;
    }
    throw InternalError("unreachable in ell_by_deletion");
}

/*!
 * Same quantity, enumerating the candidate non-spanning complements
 * directly: a maximal non-spanning sub-multiset is everything lying in a
 * hyperplane spanned by r-1 of the directions. Exhaustive over those
 * hyperplanes, so it scales to systems where subset enumeration does not.
 */
inline int ell(std::vector<Direction> const& dirs, int r, Limits const& limits = {}) {
    Mat ex = expanded_directions(dirs);
    detail::check_expanded_cap(ex, limits);
    const int m = static_cast<int>(ex.cols());
    if (numerical_rank(ex) < r) throw ValidationError("directions do not span");
    if (r == 1) return m - 2;
    // an orthonormal basis for the span (the ambient may be larger than r)
    Eigen::JacobiSVD<Mat> svd(ex, Eigen::ComputeThinU);
    Mat span = svd.matrixU().leftCols(r);
    Mat distinct(ex.rows(), dirs.size());
    for (std::size_t i = 0; i < dirs.size(); ++i) distinct.col(i) = dirs[i].vec;
    int best = m;
    for_each_subset(static_cast<int>(dirs.size()), r - 1, [&](std::vector<int> const& idx) {
        Mat cols(ex.rows(), r - 1);
        for (int j = 0; j < r - 1; ++j) cols.col(j) = distinct.col(idx[j]);
        if (auto y = detail::hyperplane_normal(span, cols, r)) best = std::min(best, detail::count_nonorthogonal(ex, *y));
        return true;
    });
    return best - 2;
}

inline int ell(WeightSystem const& ws, Limits const& limits = {}) { return ell(ws.directions, ws.r(), limits); }

/*!
 * Minimum over lines of the number of directions not orthogonal to the
 * line. Candidate lines: normals of hyperplanes spanned by r-1 expanded
 * directions, plus random lines.
 */
template<class Rng>
int min_line_degree(WeightSystem const& ws, int trials, Rng& rng, Limits const& limits = {}) {
    Mat ex = expanded_directions(ws.directions);
    detail::check_expanded_cap(ex, limits);
    const int r = ws.r();
    const int m = static_cast<int>(ex.cols());
    int best = m;
    std::normal_distribution<double> nd;
    for (int t = 0; t < trials; ++t) {
        Vec eta(r);
        for (auto& v : eta) v = nd(rng);
        int c = detail::count_nonorthogonal(ex, from_orthonormal(ws, eta));
        if (c > 0) best = std::min(best, c);
    }
    if (r > 1) {
        for_each_subset(m, r - 1, [&](std::vector<int> const& idx) {
            Mat cols(ws.D, r - 1);
            for (int j = 0; j < r - 1; ++j) cols.col(j) = ex.col(idx[j]);
            if (auto y = detail::hyperplane_normal(ws.basis, cols, r)) {
                int c = detail::count_nonorthogonal(ex, *y);
                if (c > 0) best = std::min(best, c);
            }
            return true;
        });
    }
    return best;
}

/*!
 * Degree of Delta_{g/h} in the first coordinate x_1 (bosons/fermions):
 * the number of expanded directions with a nonzero first entry.
 */
inline int first_coordinate_degree(WeightSystem const& ws) {
    int c = 0;
    for (auto const& d : ws.directions)
        if (d.ivec[0] != 0) c += d.mult;
    return c;
}

struct DegreeBounds {
    int max_local_degree = 0;
    std::optional<int> continuity_closed_form;
    bool conjectural = false;
};

inline DegreeBounds degree_bounds(Setting const& s) {
    DegreeBounds b;
    const long long N = s.N;
    if (s.kind == Kind::Distinguishable) {
        long long h = 0;
        for (int n : s.dims) h += n * (n - 1) / 2;
        b.max_local_degree = static_cast<int>(N * (N - 1) / 2 + h - s.r);
        if (s.dims.size() == 2) {
            long long m = std::min(s.dims[0], s.dims[1]);
            long long n = std::max(s.dims[0], s.dims[1]);
            b.continuity_closed_form = static_cast<int>((m * m - 1) * (n - 1) - 2);
            b.max_local_degree = static_cast<int>((m * n * (m * n - 1) + (m - 1) * (m - 2) + (n - 1) * (n - 2)) / 2);
        }
        return b;
    }
    const long long n = s.dims[0], k = s.k;
    b.max_local_degree = static_cast<int>((N * (N - 1) + (n - 1) * (n - 2)) / 2);
    b.conjectural = true;
    if (s.kind == Kind::Bosons) {
        long long sum = 0;
        for (long long i = 0; i <= k - 1; ++i) {
            // C(n+k-i-2, k-i) * (n+k-i-2)! / ((n-1)! (k-i-1)!)
            // the multinomial factor equals C(n+k-i-2, n-1)
            sum += binomial(n + k - i - 2, k - i) * binomial(n + k - i - 2, n - 1);
        }
        b.continuity_closed_form = static_cast<int>(sum - n - 1);
    } else {
        b.continuity_closed_form = static_cast<int>(binomial(n - 1, k) * binomial(n - 1, k - 1) - n - 1);
    }
    return b;
}

//! Per-factor coordinate range of Pi(w lambda) over all permutations w.
inline std::vector<std::pair<double, double>> factor_extremes(WeightSystem const& ws, Vec const& lambda) {
    std::vector<double> lam(lambda.data(), lambda.data() + lambda.size());
    double mean = lambda.mean();
    for (auto& v : lam) v -= mean;
    std::sort(lam.begin(), lam.end(), std::greater<double>());
    std::vector<std::pair<double, double>> out;
    for (std::size_t f = 0; f < ws.factors.size(); ++f) {
        std::vector<double> c(ws.N());
        for (int a = 0; a < ws.N(); ++a) c[a] = ws.rows(a, ws.offsets[f]);
        std::sort(c.begin(), c.end(), std::greater<double>());
        double hi = 0, lo = 0;
        for (int a = 0; a < ws.N(); ++a) {
            hi += lam[a] * c[a];
            lo += lam[a] * c[ws.N() - 1 - a];
        }
        out.emplace_back(lo, hi);
    }
    return out;
}

}  // namespace qmarg
