#include <gtest/gtest.h>

#include <qmarg/compare.hpp>
#include <qmarg/semiclassical.hpp>

using namespace qmarg;

namespace {

Vec fig_lambda() {
    Vec l(4);
    l << 1.5, 0.5, -0.5, -1.5;
    return l;
}

double sum(std::vector<double> const& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(Smoothing, KernelIsNormalizedAndSymmetric) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    HistGrid g = auto_grid(ws, fig_lambda(), 50);
    for (double w : {1.0, 2.0, 3.5}) {
        auto k = smoothing_kernel(ws, g, w);
        EXPECT_NEAR(sum(k.weights), 1, 1e-12);
        for (std::size_t i = 0; i < k.weights.size(); ++i) EXPECT_NEAR(k.weights[i], k.weights[k.weights.size() - 1 - i], 1e-14);
    }
    auto id = smoothing_kernel(ws, g, 0);
    EXPECT_EQ(id.weights, std::vector<double>{1.0});
    EXPECT_THROW(smoothing_kernel(ws, g, -1), ValidationError);
}

TEST(Smoothing, PreservesInteriorMass) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    HistGrid g{{0, 0}, {1, 1}, {20, 20}};
    std::vector<double> v(g.size(), 0.0);
    v[10 * 20 + 10] = 1;
    auto k = smoothing_kernel(ws, g, 2);
    auto s = smooth(g, v, k);
    EXPECT_NEAR(sum(s), 1, 1e-12);
    EXPECT_LT(s[10 * 20 + 10], 1);
    auto same = smooth(g, v, smoothing_kernel(ws, g, 0));
    EXPECT_EQ(same, v);
}

TEST(Discrepancy, Example) {
    HistGrid g{{0}, {1}, {4}};
    auto d = discrepancy(g, {1, 2, 3, 4}, {1, 2.5, 3, 5});
    EXPECT_DOUBLE_EQ(d.sup, 1);
    EXPECT_EQ(d.argmax, 3);
    EXPECT_DOUBLE_EQ(d.peak, 5);
    EXPECT_DOUBLE_EQ(d.sup_rel, 0.2);
    EXPECT_DOUBLE_EQ(d.l1, 1.5 * 0.25);
    EXPECT_THROW(discrepancy(g, {1}, {1}), ValidationError);
}

TEST(KS, IdenticalAndDisjoint) {
    std::vector<Vec> pts;
    for (int i = 0; i < 10; ++i) {
        Vec p(2);
        p << i, 9 - i;
        pts.push_back(p);
    }
    EXPECT_NEAR(ks_distance(pts, std::vector<double>(10, 1.0), pts), 0, 1e-12);
    Vec far = Vec::Constant(2, 100);
    EXPECT_NEAR(ks_distance({far}, {1.0}, pts), 1, 1e-12);
    // half the samples on one atom
    std::vector<Vec> half(pts.begin(), pts.begin() + 5);
    EXPECT_NEAR(ks_distance({pts[0]}, {1.0}, {pts[0], pts[9]}), 0.5, 1e-12);
    EXPECT_THROW(ks_distance({}, {}, pts), ValidationError);
}

TEST(Evaluator, ExactAndQuadratureAgree) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    Vec lam(4);
    lam << 2.5, 0.5, -0.5, -2.5;  // rho_g + (2,1,1,0)
    ASSERT_TRUE(integral_part(ws, lam).has_value());
    EXPECT_EQ(*integral_part(ws, lam), (Weight{2, 1, 1, 0}));
    DensityEvaluator ex(ws, lam, Evaluator::Exact), qu(ws, lam, Evaluator::Quad);
    for (auto [a, b] : std::vector<std::pair<double, double>>{{0.6, 0.9}, {1.3, 0.4}, {2.1, 1.7}, {0.2, 2.3}}) {
        Vec f(2);
        f << a, b;
        double e = *ex(f), q = *qu(f);
        EXPECT_NEAR(q, e, 1e-3 * std::abs(e) + 1e-7);
    }
    Vec out(2);
    out << -0.3, 0.5;
    EXPECT_FALSE(ex(out).has_value());
    Vec off = lam;
    off[0] += 0.3;
    EXPECT_FALSE(integral_part(ws, off).has_value());
    EXPECT_THROW(DensityEvaluator(ws, off, Evaluator::Exact), ValidationError);
}

TEST(LineDetector, SyntheticKink) {
    // smooth bump plus a kink along f0 + f1 = 1.1
    HistGrid g{{0, 0}, {2, 2}, {40, 40}};
    auto f = [](Vec const& x) -> std::optional<double> {
        double s = x[0] + x[1] - 1.1;
        return 1 + 0.1 * x[0] * x[1] + std::max(0.0, s) * s;
    };
    auto p = padded_field(g, 6, f);
    LineDetectorOptions opt;
    opt.order = 3;
    auto lines = detect_singular_lines(p, opt);
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_EQ(lines[0].a, 1);
    EXPECT_EQ(lines[0].b, 1);
    EXPECT_NEAR(lines[0].offset, 1.1, 2 * g.width(0));
}

TEST(LineDetector, PolynomialHasNoLines) {
    HistGrid g{{0, 0}, {2, 2}, {40, 40}};
    auto f = [](Vec const& x) -> std::optional<double> { return 1 + x[0] * x[0] * x[1] - 0.3 * x[1] * x[1]; };
    LineDetectorOptions opt;
    opt.order = 4;
    EXPECT_TRUE(detect_singular_lines(padded_field(g, 6, f), opt).empty());
}

TEST(LineDetector, ExactFieldContainsTheWallLines) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    DensityEvaluator ev(ws, fig_lambda(), Evaluator::Exact);
    HistGrid g = auto_grid(ws, fig_lambda(), 50);
    LineDetectorOptions opt;
    opt.order = line_detector_order(ws);
    auto lines = detect_singular_lines(padded_field(g, opt.pad, ev), opt);
    struct L {
        int a, b;
        double c;
    };
    for (auto want : std::vector<L>{{1, 0, 1}, {1, 0, 2}, {0, 1, 1}, {0, 1, 2}, {1, 1, 1}, {1, 1, 2}, {1, 1, 3}}) {
        bool found = false;
        for (auto const& l : lines)
            if (l.a == want.a && l.b == want.b && std::abs(l.offset - want.c) <= g.width(0) * (std::abs(l.a) + std::abs(l.b)))
                found = true;
        EXPECT_TRUE(found) << want.a << "," << want.b << " = " << want.c;
    }
}

TEST(Compare, SmallRunIsConsistent) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    CompareOptions o;
    o.samples = 20000;
    o.bins = 20;
    o.evaluator = Evaluator::Exact;
    auto rep = run_comparison(ws, fig_lambda(), o);
    EXPECT_EQ(rep.overflow, 0);
    EXPECT_NEAR(sum(rep.histogram) * rep.grid.cell_volume(), 1, 1e-12);
    EXPECT_NEAR(sum(rep.density) * rep.grid.cell_volume(), 1, 0.05);
    EXPECT_LT(rep.disc.sup_rel, 0.3);
}

TEST(Semiclassical, RescaledXiIsAProbability) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    for (long long n : {1, 2, 4}) {
        auto at = rescaled_xi(ws, {3, 2, 1, 0}, n);
        EXPECT_NEAR(sum(at.weights), 1, 1e-12);
        for (auto const& p : at.points) {
            EXPECT_GE(p[0], -1e-12);
            EXPECT_GE(p[1], -1e-12);
        }
    }
    EXPECT_THROW(rescaled_xi(ws, {3, 2, 1, 0}, 0), ValidationError);
}

TEST(Semiclassical, ScaledMultiplicityAtScaleOne) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    Vec mu(4);
    mu << 1, -1, 1, -1;
    EXPECT_EQ(scaled_multiplicity(ws, {2, 1, 1, 0}, mu, 1), 1);
    mu << 0.5, -0.5, 1, -1;
    EXPECT_EQ(scaled_multiplicity(ws, {2, 1, 1, 0}, mu, 1), 0);
}
