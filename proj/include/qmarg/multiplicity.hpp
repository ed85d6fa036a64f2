#pragma once

#include <boost/rational.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lie_data.hpp"
#include "numeric.hpp"
#include "spline_core.hpp"

namespace qmarg {

using Rational = boost::rational<long long>;
using Weight = std::vector<long long>;

//! Dimension of the U(n) irrep with non-increasing highest weight lam (Weyl formula, exact).
inline long long weyl_dim(Weight const& lam) {
    const int n = static_cast<int>(lam.size());
    for (int i = 0; i + 1 < n; ++i)
        if (lam[i] < lam[i + 1]) throw ValidationError("weyl_dim: weight must be non-increasing");
    std::vector<long long> num, den;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            num.push_back(lam[i] - lam[j] + j - i);
            den.push_back(j - i);
        }
    for (long long d : den) {
        for (auto& a : num) {
            if (d == 1) break;
            long long g = std::gcd(a, d);
            a /= g;
            d /= g;
        }
        if (d != 1) throw InternalError("weyl_dim: non-integral quotient");
    }
    __int128 p = 1;
    for (long long a : num) {
        p *= a;
        if (p > static_cast<__int128>(std::numeric_limits<long long>::max())) throw CapExceeded("dimension overflow");
    }
    return static_cast<long long>(p);
}

//! Product of per-factor Weyl dimensions for a concatenated H-weight.
inline long long weyl_dim(std::vector<int> const& factors, Weight const& mu) {
    long long d = 1;
    int off = 0;
    for (int n : factors) {
        d *= weyl_dim(Weight(mu.begin() + off, mu.begin() + off + n));
        off += n;
    }
    return d;
}

/*!
 * Weight multiplicities of the U(n) irrep with highest weight lam, counted
 * over Gelfand-Tsetlin patterns. Row counts are memoized, so the cost is
 * governed by the number of distinct rows rather than patterns.
 */
class GTCounter {
  public:
    using Table = std::map<Weight, long long>;

    explicit GTCounter(long long pattern_cap = 1000000) : cap_(pattern_cap) {}

    Table const& weights(Weight const& lam) {
        if (lam.empty()) throw ValidationError("empty weight");
        if (weyl_dim(lam) > cap_) throw CapExceeded("pattern count exceeds cap");
        return row(lam);
    }

  private:
    Table const& row(Weight const& lam) {
        auto it = memo_.find(lam);
        if (it != memo_.end()) return it->second;
        Table out;
        const long long total = std::accumulate(lam.begin(), lam.end(), 0LL);
        if (lam.size() == 1) {
            out[{lam[0]}] = 1;
        } else {
            const std::size_t k = lam.size() - 1;
            Weight mu(k);
            auto rec = [&](auto&& self, std::size_t i) -> void {
                if (i == k) {
                    long long s = std::accumulate(mu.begin(), mu.end(), 0LL);
                    for (auto const& [w, c] : row(mu)) {
                        Weight ww = w;
                        ww.push_back(total - s);
                        out[ww] += c;
                    }
                    return;
                }
                for (long long v = lam[i]; v >= lam[i + 1]; --v) {
                    mu[i] = v;
                    self(self, i + 1);
                }
            };
            rec(rec, 0);
        }
        return memo_.emplace(lam, std::move(out)).first->second;
    }

    long long cap_;
    std::map<Weight, Table> memo_;
};

inline std::map<Weight, long long> weight_multiplicities(Weight const& lam, long long pattern_cap = 1000000) {
    GTCounter gt(pattern_cap);
    return gt.weights(lam);
}

//! Subtract the per-factor minimum, so that every factor ends in 0.
inline Weight normalize_per_factor(std::vector<int> const& factors, Weight w) {
    int off = 0;
    for (int n : factors) {
        long long m = *std::min_element(w.begin() + off, w.begin() + off + n);
        for (int i = 0; i < n; ++i) w[off + i] -= m;
        off += n;
    }
    return w;
}

inline bool dominant_per_factor(std::vector<int> const& factors, Weight const& w) {
    int off = 0;
    for (int n : factors) {
        for (int i = 0; i + 1 < n; ++i)
            if (w[off + i] < w[off + i + 1]) return false;
        off += n;
    }
    return true;
}

struct MultiplicityTable {
    std::string setting;
    Weight lambda;
    long long dim_g = 0;
    std::map<Weight, long long> entries;  //!< dominant H-weight (uncentered) -> multiplicity

    //! Entries keyed by per-factor normalized weights.
    std::map<Weight, long long> normalized(std::vector<int> const& factors) const {
        std::map<Weight, long long> out;
        for (auto const& [mu, m] : entries) out[normalize_per_factor(factors, mu)] += m;
        return out;
    }
};

inline Weight to_weight(IVec const& v) { return Weight(v.data(), v.data() + v.size()); }

inline void check_dominant_integral(WeightSystem const& ws, Weight const& lam) {
    if (static_cast<int>(lam.size()) != ws.N())
        throw ValidationError("highest weight has length " + std::to_string(lam.size()) + ", setting needs " +
                              std::to_string(ws.N()));
    for (std::size_t i = 0; i + 1 < lam.size(); ++i)
        if (lam[i] < lam[i + 1]) throw ValidationError("highest weight must be non-increasing");
}

/*!
 * Decompose the restriction of V_lambda to H: accumulate the H-character
 * of all G-weights, then repeatedly peel off the lexicographically highest
 * weight (which is dominant) with its irreducible H-character.
 */
inline MultiplicityTable restrict_decompose(WeightSystem const& ws, Weight const& lam, long long pattern_cap = 1000000) {
    check_dominant_integral(ws, lam);
    GTCounter gt(pattern_cap);
    std::map<Weight, long long> chr;
    for (auto const& [nu, c] : gt.weights(lam)) {
        Weight h(ws.D, 0);
        for (int a = 0; a < ws.N(); ++a)
            if (nu[a] != 0)
                for (int j = 0; j < ws.D; ++j) h[j] += nu[a] * ws.int_rows(a, j);
        chr[h] += c;
    }
    MultiplicityTable t;
    t.setting = ws.setting.label();
    t.lambda = lam;
    t.dim_g = weyl_dim(lam);
    std::vector<GTCounter> per_factor(ws.factors.size(), GTCounter(pattern_cap));
    while (!chr.empty()) {
        auto top = std::prev(chr.end());
        if (top->second == 0) {
            chr.erase(top);
            continue;
        }
        Weight mu = top->first;
        long long m = top->second;
        if (m < 0) throw InternalError("negative multiplicity in restriction");
        if (!dominant_per_factor(ws.factors, mu)) throw InternalError("highest remaining weight is not dominant");
        t.entries[mu] = m;
        // subtract m times the product of per-factor characters
        std::vector<std::vector<std::pair<Weight, long long>>> parts;
        int off = 0;
        for (std::size_t f = 0; f < ws.factors.size(); ++f) {
            int n = ws.factors[f];
            auto const& tab = per_factor[f].weights(Weight(mu.begin() + off, mu.begin() + off + n));
            parts.emplace_back(tab.begin(), tab.end());
            off += n;
        }
        Weight key(ws.D);
        auto rec = [&](auto&& self, std::size_t f, int o, long long c) -> void {
            if (f == parts.size()) {
                auto it = chr.find(key);
                if (it == chr.end()) throw InternalError("H-character term missing from restriction");
                it->second -= m * c;
                if (it->second == 0) chr.erase(it);
                return;
            }
            for (auto const& [w, cw] : parts[f]) {
                std::copy(w.begin(), w.end(), key.begin() + o);
                self(self, f + 1, o + static_cast<int>(w.size()), c * cw);
            }
        };
        rec(rec, 0, 0, 1);
    }
    long long total = 0;
    for (auto const& [mu, m] : t.entries) total += m * weyl_dim(ws.factors, mu);
    if (total != t.dim_g) throw InternalError("dimension bookkeeping failed");
    return t;
}

// ---------------------------------------------------------------------------
// Signed atomic measures with exact rational atoms.

using RVec = std::vector<Rational>;

struct Atom {
    RVec point;
    Rational weight;
};

struct AtomicMeasure {
    std::vector<Atom> atoms;

    //! Merge coincident atoms, drop zero weights, sort by point.
    AtomicMeasure& canonicalize() {
        std::map<RVec, Rational> acc;
        for (auto const& a : atoms) acc[a.point] += a.weight;
        atoms.clear();
        for (auto const& [p, w] : acc)
            if (w != Rational(0)) atoms.push_back({p, w});
        return *this;
    }

    Rational mass() const {
        Rational s = 0;
        for (auto const& a : atoms) s += a.weight;
        return s;
    }

    bool operator==(AtomicMeasure const& o) const {
        AtomicMeasure a = *this, b = o;
        a.canonicalize();
        b.canonicalize();
        if (a.atoms.size() != b.atoms.size()) return false;
        for (std::size_t i = 0; i < a.atoms.size(); ++i)
            if (a.atoms[i].point != b.atoms[i].point || a.atoms[i].weight != b.atoms[i].weight) return false;
        return true;
    }
};

inline Vec to_vec(RVec const& p) {
    Vec v(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) v[i] = boost::rational_cast<double>(p[i]);
    return v;
}

//! Per-factor centered copy of an integer weight, as exact rationals.
inline RVec center_exact(std::vector<int> const& factors, Weight const& w) {
    RVec out(w.size());
    int off = 0;
    for (int n : factors) {
        long long s = 0;
        for (int i = 0; i < n; ++i) s += w[off + i];
        for (int i = 0; i < n; ++i) out[off + i] = Rational(w[off + i]) - Rational(s, n);
        off += n;
    }
    return out;
}

//! R_s: (R_s M)(E) = M(sE), i.e. atoms move from p to p / s.
inline AtomicMeasure rescale(AtomicMeasure m, Rational s) {
    if (s <= Rational(0)) throw ValidationError("rescale factor must be positive");
    for (auto& a : m.atoms)
        for (auto& c : a.point) c /= s;
    return m;
}

//! T_v: (T_v M)(E) = M(E - v), i.e. atoms move from p to p + v.
inline AtomicMeasure translate(AtomicMeasure m, RVec const& v) {
    for (auto& a : m.atoms) {
        if (a.point.size() != v.size()) throw ValidationError("translate: dimension mismatch");
        for (std::size_t i = 0; i < v.size(); ++i) a.point[i] += v[i];
    }
    return m;
}

//! Skew extension over W_h of a measure supported in the closed chamber.
inline AtomicMeasure skew_extend(WeightSystem const& ws, AtomicMeasure const& m) {
    AtomicMeasure out;
    auto W = weyl_group_h(ws);
    for (auto const& a : m.atoms)
        for (auto const& w : W) out.atoms.push_back({weyl_apply(ws, w, a.point), Rational(w.sign) * a.weight});
    return out.canonicalize();
}

//! R_s on a density: (R_s f)(x) = s^r f(s x).
template<class F>
auto rescale_function(F f, double s, int r) {
    if (!(s > 0)) throw ValidationError("rescale factor must be positive");
    return [f = std::move(f), s, r](Vec const& x) { return std::pow(s, r) * f(Vec(s * x)); };
}

inline RVec rho_h_exact(WeightSystem const& ws) {
    RVec out(ws.D);
    int off = 0;
    for (int n : ws.factors) {
        for (int i = 0; i < n; ++i) out[off + i] = Rational(n - 1 - 2 * i, 2);
        off += n;
    }
    return out;
}

//! sum_mu m_mu sum_w eps(w) delta_{w(mu + rho_h)}.
inline AtomicMeasure build_M(WeightSystem const& ws, MultiplicityTable const& t) {
    AtomicMeasure base;
    RVec rho = rho_h_exact(ws);
    for (auto const& [mu, m] : t.entries) {
        RVec p = center_exact(ws.factors, mu);
        for (int i = 0; i < ws.D; ++i) p[i] += rho[i];
        base.atoms.push_back({p, Rational(m)});
    }
    return skew_extend(ws, base);
}

//! sum_mu (m_mu dim V_mu / dim V_lambda) delta_mu; a probability measure.
inline AtomicMeasure build_Xi(WeightSystem const& ws, MultiplicityTable const& t) {
    AtomicMeasure out;
    for (auto const& [mu, m] : t.entries)
        out.atoms.push_back({center_exact(ws.factors, mu), Rational(m * weyl_dim(ws.factors, mu), t.dim_g)});
    return out.canonicalize();
}

// ---------------------------------------------------------------------------
// The projected root lattice and the torus-integral recovery.

struct TorusLattice {
    std::vector<IVec> basis;  //!< r integer vectors in t
    Mat B;                    //!< D x r
    Mat dual;                 //!< D x r, <dual_i, basis_j> = delta_ij
    double covolume = 0;      //!< volume of a fundamental domain in t
};

inline TorusLattice projected_root_lattice(WeightSystem const& ws) {
    std::vector<IVec> gens;
    for (int a = 0; a + 1 < ws.N(); ++a) gens.push_back((ws.int_rows.row(a) - ws.int_rows.row(a + 1)).transpose());
    TorusLattice L;
    L.basis = integer_lattice_basis(gens);
    if (static_cast<int>(L.basis.size()) != ws.r()) throw InternalError("projected root lattice has wrong rank");
    const int r = ws.r();
    L.B.resize(ws.D, r);
    IMat A(ws.D, r);
    for (int i = 0; i < r; ++i) {
        L.B.col(i) = L.basis[i].cast<double>();
        A.col(i) = L.basis[i];
    }
    L.dual = L.B * (L.B.transpose() * L.B).inverse();
    L.covolume = std::sqrt(static_cast<double>(bareiss_det(IMat(A.transpose() * A))));
    return L;
}

//! Lattice coordinates of v, or nothing if v is not a lattice vector.
inline std::optional<IVec> lattice_coords(TorusLattice const& L, Vec const& v, double tol = 1e-9) {
    Vec c = L.dual.transpose() * v;
    IVec out(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        double r = std::round(c[i]);
        if (std::abs(c[i] - r) > tol) return std::nullopt;
        out[i] = static_cast<long long>(r);
    }
    if ((L.B * out.cast<double>() - v).norm() > tol * std::max(1.0, v.norm())) return std::nullopt;
    return out;
}

struct RecoveryProblem {
    TorusLattice lattice;
    Vec lambda_proj;                //!< Pi(lambda), centered
    std::vector<Vec> points;        //!< nu + rho_h at which J_{lambda+rho_g} is needed
    std::vector<IVec> coords;       //!< lattice coordinates of nu - Pi(lambda)
    std::vector<IVec> r_coords;     //!< lattice vectors with B(nu) != 0
    std::vector<double> r_values;   //!< B at those vectors
};

namespace detail {

//! Integer boxes of lattice coordinates covering a per-coordinate box in t.
inline std::vector<IVec> lattice_points_in_box(TorusLattice const& L, Vec const& origin, Vec const& lo, Vec const& hi) {
    const int r = static_cast<int>(L.B.cols());
    std::vector<long long> cmin(r), cmax(r);
    for (int i = 0; i < r; ++i) {
        double a = -origin.dot(L.dual.col(i)), b = a;
        for (Eigen::Index j = 0; j < lo.size(); ++j) {
            double d = L.dual(j, i);
            a += d * (d > 0 ? lo[j] : hi[j]);
            b += d * (d > 0 ? hi[j] : lo[j]);
        }
        cmin[i] = static_cast<long long>(std::floor(a - 1e-9));
        cmax[i] = static_cast<long long>(std::ceil(b + 1e-9));
    }
    std::vector<IVec> out;
    IVec c(r);
    auto rec = [&](auto&& self, int i) -> void {
        if (i == r) {
            Vec p = origin + L.B * c.cast<double>();
            for (Eigen::Index j = 0; j < p.size(); ++j)
                if (p[j] < lo[j] - 1e-9 || p[j] > hi[j] + 1e-9) return;
            out.push_back(c);
            return;
        }
        for (long long v = cmin[i]; v <= cmax[i]; ++v) {
            c[i] = v;
            self(self, i + 1);
        }
    };
    rec(rec, 0);
    return out;
}

}  // namespace detail

/*!
 * Lattice points nu + rho_h, nu in Pi(lambda + Q_G), inside a box that
 * contains the support of J_{lambda + rho_g}, and the nonzero values of
 * the box spline on Pi(Q_G).
 */
inline RecoveryProblem recovery_problem(WeightSystem const& ws, Weight const& lam, BoxSpline const& bs) {
    check_dominant_integral(ws, lam);
    RecoveryProblem P;
    P.lattice = projected_root_lattice(ws);
    Vec lamv(ws.N());
    for (int a = 0; a < ws.N(); ++a) lamv[a] = static_cast<double>(lam[a]);
    P.lambda_proj = project_to_t(ws, lamv.array() - lamv.mean());
    Vec shifted = lamv.array() - lamv.mean();
    shifted += ws.rho_g;
    auto ext = factor_extremes(ws, shifted);
    Vec lo(ws.D), hi(ws.D);
    for (std::size_t f = 0; f < ws.factors.size(); ++f)
        for (int i = 0; i < ws.factors[f]; ++i) {
            lo[ws.offsets[f] + i] = ext[f].first;
            hi[ws.offsets[f] + i] = ext[f].second;
        }
    Vec origin = P.lambda_proj + ws.rho_h;
    for (auto const& c : detail::lattice_points_in_box(P.lattice, origin, lo, hi)) {
        P.points.push_back(origin + P.lattice.B * c.cast<double>());
        P.coords.push_back(c);
    }
    Vec zlo = Vec::Zero(ws.D), zhi = Vec::Zero(ws.D);
    for (auto const& d : ws.directions)
        for (int j = 0; j < ws.D; ++j) {
            zlo[j] -= 0.5 * d.mult * std::abs(d.vec[j]);
            zhi[j] += 0.5 * d.mult * std::abs(d.vec[j]);
        }
    for (auto const& c : detail::lattice_points_in_box(P.lattice, Vec::Zero(ws.D), zlo, zhi)) {
        double b = bs(to_orthonormal(ws, P.lattice.B * c.cast<double>()));
        if (std::abs(b) > 1e-12) {  // knot values are exactly zero up to rounding
            P.r_coords.push_back(c);
            P.r_values.push_back(b);
        }
    }
    return P;
}

struct RecoveryResult {
    long long value = 0;
    double raw = 0;
    double imag = 0;
    double residual = 0;
    long long skipped = 0;
    int grid = 0;
};

/*!
 * Torus-integral recovery of m^lambda_mu from J_{lambda+rho_g} at the
 * problem's points. The integrand is a trigonometric polynomial wherever
 * R does not vanish, so an offset midpoint grid with more nodes than its
 * frequency span integrates it exactly; grid 0 picks that size.
 */
inline RecoveryResult recover_multiplicity(WeightSystem const& ws, RecoveryProblem const& P, std::vector<double> const& J,
                                           Weight const& mu, int grid = 0, double tau = 1e-8) {
    if (J.size() != P.points.size()) throw ValidationError("J values must match the recovery points");
    if (static_cast<int>(mu.size()) != ws.D) throw ValidationError("H-weight has wrong length");
    RecoveryResult res;
    Vec muc = to_vec(center_exact(ws.factors, mu));
    auto cm = lattice_coords(P.lattice, muc - P.lambda_proj);
    if (!cm) return res;  // mu outside Pi(lambda + Q_G): multiplicity zero
    const int r = ws.r();
    if (grid <= 0) {
        long long span = 0;
        for (auto const& c : P.coords) span = std::max(span, (c - *cm).cwiseAbs().maxCoeff());
        for (auto const& c : P.r_coords) span = std::max(span, c.cwiseAbs().maxCoeff());
        grid = static_cast<int>(4 * span + 8);
    }
    res.grid = grid;
    const double shift = 0.5 + 0.2937;
    long long total = 1;
    for (int i = 0; i < r; ++i) total *= grid;
    std::complex<double> acc = 0;
    long long kept = 0;
    Vec s(r);
    for (long long node = 0; node < total; ++node) {
        long long rem = node;
        for (int i = r - 1; i >= 0; --i) {
            s[i] = (static_cast<double>(rem % grid) + shift) / grid;
            rem /= grid;
        }
        double R = 0;
        for (std::size_t k = 0; k < P.r_coords.size(); ++k)
            R += P.r_values[k] * std::cos(2 * kPi * P.r_coords[k].cast<double>().dot(s));
        if (std::abs(R) < tau) {
            ++res.skipped;
            continue;
        }
        std::complex<double> num = 0;
        for (std::size_t k = 0; k < P.points.size(); ++k) {
            if (J[k] == 0) continue;
            num += J[k] * std::polar(1.0, 2 * kPi * (P.coords[k] - *cm).cast<double>().dot(s));
        }
        acc += num / R;
        ++kept;
    }
    if (kept == 0) throw NumericalAlarm("every torus node was skipped");
    acc /= static_cast<double>(kept);
    res.raw = acc.real();
    res.imag = acc.imag();
    res.value = std::llround(res.raw);
    res.residual = std::abs(res.raw - static_cast<double>(res.value));
    if (res.residual > 0.4)
        throw NumericalAlarm("recovery residual " + std::to_string(res.residual) +
                             " too large to round (grid too small or inaccurate J values)");
    return res;
}

}  // namespace qmarg
