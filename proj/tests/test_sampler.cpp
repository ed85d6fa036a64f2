#include <gtest/gtest.h>

#include <qmarg/sampler.hpp>

using namespace qmarg;

namespace {

Vec fig_lambda() {
    Vec l(4);
    l << 1.5, 0.5, -0.5, -1.5;
    return l;
}

CMat kron(CMat const& A, CMat const& B) {
    CMat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

CMat random_hermitian(int n, Philox& rng) {
    std::normal_distribution<double> nd;
    CMat G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = cplx(nd(rng), nd(rng));
    return (G + G.adjoint()) / 2.0;
}

}  // namespace

TEST(Haar, OneByOneIsAPhase) {
    Philox rng(1, 0);
    CMat U = haar_unitary(1, rng);
    EXPECT_NEAR(std::abs(U(0, 0)), 1, 1e-15);
}

TEST(Haar, Unitarity) {
    Philox rng(2, 0);
    CMat U = haar_unitary(16, rng);
    EXPECT_LT((U.adjoint() * U - CMat::Identity(16, 16)).norm(), 1e-12);
}

TEST(Haar, SecondMoment) {
    double s = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        Philox rng(3, i);
        s += std::norm(haar_unitary(4, rng)(0, 0));
    }
    EXPECT_NEAR(s / n, 0.25, 0.01);
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
    Philox a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    auto x = a(), y = b();
    EXPECT_EQ(x, y);
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
}

TEST(OrbitPoint, Examples) {
    Philox rng(4, 0);
    EXPECT_EQ(orbit_point(Vec::Zero(4), rng).norm(), 0);
    Vec e = Vec::Zero(4);
    e[0] = 1;
    CMat P = orbit_point(e, rng);
    EXPECT_NEAR(P.trace().real(), 1, 1e-12);
    EXPECT_LT((P * P - P).norm(), 1e-12);
    CMat M = orbit_point(fig_lambda(), rng);
    EXPECT_LT((M - M.adjoint()).norm(), 1e-12);
    EXPECT_LT((sorted_eigenvalues(M) - fig_lambda()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Marginals, ProductAndIdentity) {
    Philox rng(5, 0);
    CMat A = random_hermitian(2, rng), B = random_hermitian(3, rng);
    B /= B.trace();
    auto m = marginals_distinguishable(kron(A, B), {2, 3});
    EXPECT_LT((m[0] - A).norm(), 1e-12);
    auto id = marginals_distinguishable(CMat::Identity(6, 6), {2, 3});
    EXPECT_LT((id[0] - 3.0 * CMat::Identity(2, 2)).norm(), 1e-14);
    EXPECT_LT((id[1] - 2.0 * CMat::Identity(3, 3)).norm(), 1e-14);
    EXPECT_THROW(marginals_distinguishable(CMat::Identity(5, 5), {2, 3}), ValidationError);
}

TEST(Marginals, TraceIdentity) {
    for (int t = 0; t < 20; ++t) {
        Philox rng(6, t);
        CMat M = random_hermitian(8, rng);
        // direct summation oracle for the first factor of (2,2,2)
        CMat P = CMat::Zero(2, 2);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int rest = 0; rest < 4; ++rest) P(a, b) += M(4 * a + rest, 4 * b + rest);
        auto m = marginals_distinguishable(M, {2, 2, 2});
        EXPECT_LT((m[0] - P).norm(), 1e-12);
        for (auto const& x : m) EXPECT_NEAR(std::abs(x.trace() - M.trace()), 0, 1e-12);
    }
}

TEST(ProjectSymmetric, BosonExamples) {
    auto ws = build_weight_system(parse_setting("bos:2,2"));
    SymmetricRep rep(ws);
    CMat X = CMat::Zero(2, 2);
    X(0, 0) = 1;
    X(1, 1) = -1;
    CMat R = rep.rep(X);
    EXPECT_LT((project_symmetric(R, rep) - X).norm(), 1e-12);
    Vec ev = sorted_eigenvalues(R);
    EXPECT_NEAR(ev[0], 2, 1e-12);
    EXPECT_NEAR(ev[1], 0, 1e-12);
    EXPECT_NEAR(ev[2], -2, 1e-12);
    // traceless diagonal orthogonal to the diagonal of rep(diag(1,-1)) = diag(2,0,-2)
    CMat M = CMat::Zero(3, 3);
    M(0, 0) = 1;
    M(1, 1) = -2;
    M(2, 2) = 1;
    EXPECT_LT(project_symmetric(M, rep).norm(), 1e-12);
}

TEST(ProjectSymmetric, RoundTrip) {
    for (auto s : {"bos:2,2", "bos:3,2", "fer:4,2", "fer:5,2"}) {
        auto ws = build_weight_system(parse_setting(s));
        SymmetricRep rep(ws);
        const int n = ws.setting.dims[0];
        for (int t = 0; t < 5; ++t) {
            Philox rng(7, t);
            CMat X = random_hermitian(n, rng);
            X -= X.trace() / double(n) * CMat::Identity(n, n);
            EXPECT_LT((project_symmetric(rep.rep(X), rep) - X).norm(), 1e-10) << s;
        }
    }
}

TEST(SampleSpectrum, ZeroSpectrumGivesOrigin) {
    for (auto s : {"dst:2,2", "bos:2,2", "fer:4,2"}) {
        auto ws = build_weight_system(parse_setting(s));
        Philox rng(8, 0);
        EXPECT_LT(sample_spectrum(ws, Vec::Zero(ws.N()), rng).norm(), 1e-12) << s;
    }
}

TEST(SampleSpectrum, FigureLambdaBounds) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    Sampler smp(ws, fig_lambda());
    for (int i = 0; i < 2000; ++i) {
        Philox rng(9, i);
        Vec x = smp.sample(rng, true);
        EXPECT_NEAR(x[0], -x[1], 1e-12);
        EXPECT_NEAR(x[2], -x[3], 1e-12);
        EXPECT_GE(x[0], 0);
        EXPECT_GE(x[2], 0);
        EXPECT_LE(x[0], 2 + 1e-12);
        EXPECT_LE(x[2], 2 + 1e-12);
    }
}

TEST(SampleSpectrum, CenteringIsATranslation) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    Vec shifted = fig_lambda().array() + 3.25;
    Sampler a(ws, fig_lambda()), b(ws, shifted);
    EXPECT_DOUBLE_EQ(b.shift(), 3.25);
    Philox r1(10, 0), r2(10, 0);
    EXPECT_LT((a.sample(r1) - b.sample(r2)).norm(), 1e-12);
}

TEST(SampleSpectrum, WrongLengthRejected) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    EXPECT_THROW(Sampler(ws, Vec::Zero(3)), ValidationError);
}

TEST(Histogram, CountsAndMerge) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    HistGrid g = auto_grid(ws, fig_lambda(), 10);
    EXPECT_THROW(run_histogram(ws, fig_lambda(), 0, g, 1), ValidationError);
    auto one = run_histogram(ws, fig_lambda(), 1, g, 1);
    EXPECT_EQ(one.total, 1);
    auto h1 = run_histogram(ws, fig_lambda(), 500, g, 1);
    auto h2 = run_histogram(ws, fig_lambda(), 700, g, 2);
    Histogram m = h1;
    m.merge(h2);
    EXPECT_EQ(m.total, h1.total + h2.total);
    long long sum = m.overflow;
    for (auto c : m.counts) sum += c;
    EXPECT_EQ(sum, m.total);
    EXPECT_THROW(m.merge(Histogram(auto_grid(ws, fig_lambda(), 5))), ValidationError);
}

TEST(Histogram, WorkerCountDoesNotChangeCounts) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    HistGrid g = auto_grid(ws, fig_lambda(), 20);
    RunOptions one, three;
    three.workers = 3;
    auto a = run_histogram(ws, fig_lambda(), 5000, g, 42, one);
    auto b = run_histogram(ws, fig_lambda(), 5000, g, 42, three);
    EXPECT_EQ(a.counts, b.counts);
}

TEST(Histogram, SeedsAgreeWithinPoissonBounds) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    HistGrid g = auto_grid(ws, fig_lambda(), 20);
    auto a = run_histogram(ws, fig_lambda(), 100000, g, 1);
    auto b = run_histogram(ws, fig_lambda(), 100000, g, 2);
    EXPECT_NE(a.counts, b.counts);
    for (std::size_t i = 0; i < a.counts.size(); ++i)
        EXPECT_LE(std::abs(a.counts[i] - b.counts[i]), 5 * std::sqrt(double(a.counts[i] + b.counts[i])) + 1e-9);
}

TEST(Histogram, NothingOutsideSupportBox) {
    for (auto [s, l] : std::vector<std::pair<const char*, std::vector<double>>>{
             {"dst:2,2", {1.5, 0.5, -0.5, -1.5}}, {"bos:2,2", {1, 0, -1}}, {"dst:2,3", {3, 2, 1, 0, -1, -2}}}) {
        auto ws = build_weight_system(parse_setting(s));
        Vec lam = Eigen::Map<Vec>(l.data(), l.size());
        auto h = run_histogram(ws, lam, 20000, auto_grid(ws, lam, 8), 5);
        EXPECT_EQ(h.overflow, 0) << s;
    }
}

TEST(Histogram, SmallGridRecordsOverflow) {
    auto ws = build_weight_system(parse_setting("dst:2,2"));
    HistGrid g{{0, 0}, {0.5, 0.5}, {4, 4}};
    auto h = run_histogram(ws, fig_lambda(), 2000, g, 3);
    EXPECT_GT(h.overflow, 0);
    long long in = 0;
    for (auto c : h.counts) in += c;
    EXPECT_EQ(in + h.overflow, 2000);
}
