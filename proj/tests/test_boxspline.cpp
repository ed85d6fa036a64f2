#include <gtest/gtest.h>

#include <random>

#include <qmarg/boxspline.hpp>
#include <qmarg/density_quad.hpp>

using namespace qmarg;

namespace {

Mat cols(std::initializer_list<std::initializer_list<double>> vs) {
    const auto m = static_cast<Eigen::Index>(vs.size());
    const auto r = static_cast<Eigen::Index>(vs.begin()->size());
    Mat V(r, m);
    Eigen::Index j = 0;
    for (auto const& v : vs) {
        Eigen::Index i = 0;
        for (double c : v) V(i++, j) = c;
        ++j;
    }
    return V;
}

// Three-direction spline {e1, e2, e1+e2}: length of {t in [-1/2,1/2] : x - t(1,1) in the centered unit square}.
double courant(double x, double y) {
    double lo = std::max({-0.5, x - 0.5, y - 0.5}), hi = std::min({0.5, x + 0.5, y + 0.5});
    return std::max(0.0, hi - lo);
}

// Adds direction (1,-1) by the convolution recurrence, Simpson rule on each smooth piece.
double zp_by_recurrence(double x, double y) {
    const int n = 4000;
    double s = 0;
    for (int k = 0; k <= n; ++k) {
        double t = -0.5 + double(k) / n;
        double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
        s += w * courant(x - t, y + t);
    }
    return s / (3.0 * n);
}

Vec dst_point(double mu, double nu) {
    Vec x(4);
    x << mu, -mu, nu, -nu;
    return x;
}

}  // namespace

TEST(BoxSpline, OneDirection) {
    BoxSpline b(cols({{1}}));
    EXPECT_DOUBLE_EQ(b(Vec::Zero(1)), 1);
    EXPECT_DOUBLE_EQ(b(Vec::Constant(1, 0.25)), 1);
    EXPECT_DOUBLE_EQ(b(Vec::Constant(1, 0.75)), 0);
}

TEST(BoxSpline, HatFunction) {
    BoxSpline b(cols({{1}, {1}}));
    EXPECT_EQ(b(Vec::Zero(1)), 1);
    EXPECT_EQ(b(Vec::Constant(1, 0.5)), 0.5);
    EXPECT_EQ(b(Vec::Constant(1, -0.5)), 0.5);
    EXPECT_EQ(b(Vec::Constant(1, 0.25)), 0.75);
    EXPECT_NEAR(b(Vec::Constant(1, 0.2)), 0.8, 1e-15);
    EXPECT_EQ(b(Vec::Constant(1, 1.5)), 0);
}

TEST(BoxSpline, CourantElement) {
    BoxSpline b(cols({{1, 0}, {0, 1}, {1, 1}}));
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int t = 0; t < 50; ++t) {
        Vec x(2);
        x << u(g), u(g);
        EXPECT_NEAR(b(x), courant(x[0], x[1]), 1e-12);
    }
}

TEST(BoxSpline, FourDirectionsMatchesRecurrence) {
    BoxSpline b(cols({{1, 0}, {0, 1}, {1, 1}, {1, -1}}));
    EXPECT_NEAR(b(Vec::Zero(2)), 0.5, 1e-12);
    std::mt19937_64 g(2);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int t = 0; t < 30; ++t) {
        Vec x(2);
        x << u(g), u(g);
        EXPECT_NEAR(b(x), zp_by_recurrence(x[0], x[1]), 1e-7);  // Simpson error at the kinks
    }
}

TEST(WeightSpline, DistinguishableTwoTwo) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    BoxSpline b = weight_box_spline(ws);
    EXPECT_NEAR(b(Vec::Zero(2)), 0.25, 1e-12);
    EXPECT_NEAR(spline_mass(ws, b, 1), 1, 1e-12);
    EXPECT_NEAR(spline_mass(ws, b, 3), 1, 1e-12);
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int t = 0; t < 20; ++t) {
        Vec x(2);
        x << u(g), u(g);
        EXPECT_NEAR(b(x), b(Vec(-x)), 1e-13);
    }
}

TEST(WeightSpline, UnitMassEverywhere) {
    for (auto [s, K] : std::vector<std::pair<const char*, int>>{{"bos:2,2", 2}, {"fer:4,2", 2}, {"dst:2,3", 1}, {"bos:3,2", 1}}) {
        auto ws = build_weight_system(parse_setting(s));
        EXPECT_NEAR(spline_mass(ws, weight_box_spline(ws), K), 1, 1e-10) << s;
    }
}

TEST(ExactJ, AgreesWithQuadrature) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    ExactJ ej(ws, Weight{2, 1, 1, 0});
    QuadDensity qd(ws, ej.spectrum());
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> u(0.05, 2.4);
    int used = 0;
    while (used < 8) {
        Vec x = dst_point(u(g), u(g));
        double e = ej.J(x);
        if (std::abs(e) < 1e-2) continue;
        EXPECT_LT(std::abs(qd.J(x) - e), 1e-3 * std::abs(e));
        ++used;
    }
}

TEST(ExactJ, SkewAndCompactSupport) {
    auto ws = build_weight_system(parse_setting("dst:2,3"));
    ExactJ ej(ws, Weight{3, 2, 1, 1, 0, 0});
    std::mt19937_64 g(5);
    std::normal_distribution<double> nd;
    Vec x(5);
    for (auto& v : x) v = 0.7 * nd(g);
    Vec p = center_factors(ws, x);
    for (auto const& w : weyl_group_h(ws)) EXPECT_NEAR(ej.J(weyl_apply(ws, w, p)), w.sign * ej.J(p), 1e-12);
    Vec far = p;
    far[0] += 40;
    far[1] -= 40;
    EXPECT_EQ(ej.J(far), 0);
}

TEST(ExactJ, DensityVanishesOnWalls) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    ExactJ ej(ws, Weight{2, 1, 1, 0});
    for (double v : {0.3, 0.9, 1.7}) {
        EXPECT_EQ(ej.density(dst_point(0, v)), 0);
        EXPECT_EQ(ej.density(dst_point(v, 0)), 0);
    }
}

TEST(ExactJ, UnitMass) {
    for (auto [s, lam] : std::vector<std::pair<const char*, Weight>>{
             {"dst:2,2", {2, 1, 1, 0}}, {"dst:2,2", {3, 2, 1, 0}}, {"bos:2,2", {2, 1, 0}}, {"dst:2,3", {2, 1, 1, 0, 0, 0}}}) {
        auto ws = build_weight_system(parse_setting(s));
        ExactJ ej(ws, lam);
        EXPECT_NEAR(exact_mass(ws, ej), 1, 1e-8) << s;
    }
}

namespace {

// Largest change of the numerical derivative between scan points spaced by step.
double derivative_jump(std::function<double(double)> const& f, double a, double b, double step) {
    const double h = 1e-6;
    double worst = 0, prev = NAN;
    for (double t = a; t <= b; t += step) {
        double d = (f(t + h) - f(t - h)) / (2 * h);
        if (!std::isnan(prev)) worst = std::max(worst, std::abs(d - prev));
        prev = d;
    }
    return worst;
}

}  // namespace

TEST(ExactJ, SmoothnessMatchesEll) {
    // C^1 when ell = 1: derivative changes shrink with the scan step; C^0 when ell = 0: they do not.
    auto dst = build_weight_system(parse_setting("dst:2,2"));
    ExactJ ej(dst, Weight{2, 1, 1, 0});
    auto fd = [&](double t) { return ej.J(dst_point(t, 0.613)); };
    double coarse = derivative_jump(fd, -3.3, 3.3, 1e-2), fine = derivative_jump(fd, -3.3, 3.3, 1e-3);
    EXPECT_LT(fine, 0.3 * coarse);

    auto bos = build_weight_system(parse_setting("bos:2,2"));
    ExactJ eb(bos, Weight{2, 1, 0});
    auto fb = [&](double t) {
        Vec x(2);
        x << t, -t;
        return eb.J(x);
    };
    double bc = derivative_jump(fb, -3.1, 3.1, 1e-2), bf = derivative_jump(fb, -3.1, 3.1, 1e-3);
    EXPECT_GT(bf, 0.5 * bc);
    EXPECT_EQ(ell(dst), 1);
    EXPECT_EQ(ell(bos), 0);
}
