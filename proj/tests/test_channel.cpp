#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "ocsim/channel.hpp"

using namespace ocsim;

TEST_SUITE_BEGIN("channel");

TEST_CASE("unit correlation freezes the trace") {
    FadingParams p;
    p.alpha = 1.0;
    p.n_r = 2;
    p.sigma2 = 0.01;
    Rng rng(1);
    const ChannelTrace tr = evolve_channel(p, 64, rng);
    for (int k = 1; k < 64; ++k)
        CHECK((tr.h.row(k) - tr.h.row(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lag-one sample autocorrelation approaches alpha") {
    FadingParams p;
    p.alpha = 0.99;
    p.n_r = 1;
    p.sigma2 = 0.01;
    Rng rng(2);
    const int n = 100000;
    const ChannelTrace tr = evolve_channel(p, n, rng);
    cxd num(0, 0);
    double den = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
        num += tr.h(k + 1, 0) * std::conj(tr.h(k, 0));
        den += std::norm(tr.h(k, 0));
    }
    const double est = (num / den).real();
    // three Monte Carlo standard errors of a lag-one AR estimate
    const double se = std::sqrt((1.0 - p.alpha * p.alpha) / n);
    CHECK(std::abs(est - p.alpha) < 3.0 * se);
}

TEST_CASE("stationary power stays at the configured variance") {
    FadingParams p;
    p.alpha = 0.97;
    p.n_r = 2;
    p.sigma2 = 0.01;
    Rng rng(3);
    const int trials = 10000;
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
        const ChannelTrace tr = evolve_channel(p, 5, rng);
        acc += tr.h.row(4).squaredNorm();
    }
    const double mean = acc / trials;
    const double se = std::sqrt(2.0 * p.n_r / static_cast<double>(trials));
    CHECK(std::abs(mean - p.n_r * p.sigma_h2) < 3.0 * se);
}

TEST_CASE("frame layout formula") {
    FrameLayout two;
    two.n_p = 2;
    two.n_d = 0;
    CHECK(two.frame_length() == 2);
    Rng rng(4);
    const auto seq = generate_frame(two, rng);
    CHECK(seq.size() == 2);
    CHECK(seq[0] == two.pilot_value(0));
    CHECK(seq[1] == two.pilot_value(1));

    FrameLayout paper;
    paper.n_p = 51;
    paper.n_d = 3;
    CHECK(paper.frame_length() == 201);

    FrameLayout sparse;
    sparse.n_p = 51;
    sparse.n_d = 9;
    CHECK(sparse.frame_length() == 501);
}

TEST_CASE("frame symbols are unit modulus with pilots in place") {
    FrameLayout layout;
    layout.n_p = 5;
    layout.n_d = 3;
    Rng rng(5);
    const auto seq = generate_frame(layout, rng);
    REQUIRE(static_cast<int>(seq.size()) == layout.frame_length());
    for (int k = 0; k < layout.frame_length(); ++k) {
        CHECK(std::abs(std::abs(seq[k]) - 1.0) < 1e-12);
        if (layout.is_pilot(k)) CHECK(seq[k] == cxd(1.0, 0.0));
    }
}

TEST_CASE("pilot-stride correlation matches the stride power of alpha") {
    FadingParams p;
    p.alpha = 0.99;
    p.n_r = 1;
    p.sigma2 = 0.01;
    const int n_d = 3;
    const double alpha_p = std::pow(p.alpha, n_d + 1);
    Rng rng(6);
    const int n = 40000;  // ~10k pilot pairs at stride n_d + 1
    const ChannelTrace tr = evolve_channel(p, n, rng);
    cxd num(0, 0);
    double den = 0.0;
    int pairs = 0;
    for (int k = 0; k + n_d + 1 < n; k += n_d + 1) {
        num += tr.h(k + n_d + 1, 0) * std::conj(tr.h(k, 0));
        den += std::norm(tr.h(k, 0));
        ++pairs;
    }
    const double est = (num / den).real();
    const double se = std::sqrt((1.0 - alpha_p * alpha_p) / pairs);
    CHECK(std::abs(est - alpha_p) < 3.0 * se);
}

TEST_CASE("noiseless observations recover the channel exactly") {
    FrameLayout layout;
    layout.n_p = 3;
    layout.n_d = 2;
    FadingParams p;
    p.alpha = 0.95;
    p.n_r = 2;
    p.sigma2 = 1.0;  // noise is not drawn when synthesizing with sigma2 = 0
    Rng rng(7);
    const ChannelTrace tr = evolve_channel(p, layout.frame_length(), rng);
    const auto seq = generate_frame(layout, rng);
    const FrameObservation obs = synthesize_observations(seq, tr, {}, VectorXcd(), 0.0, rng);
    for (int k = 0; k < layout.frame_length(); ++k) {
        const VectorXcd back = obs.y.row(k).transpose() / seq[k];
        CHECK((back - tr.h.row(k).transpose()).cwiseAbs().maxCoeff() < 1e-14);
    }
    CHECK(obs.interference_free());
}

TEST_CASE("doubling the coupling shifts observations by the interference term") {
    Rng rng_a(8);
    testing::FrameSetup fa = testing::make_frame(5, 3, 0.99, 20.0, 0.0, rng_a);
    // replay the identical randomness but alter only the coupling vector
    FrameLayout layout = fa.obs.layout;
    Rng rng(8);
    testing::FrameSetup fb = fa;
    {
        // regenerate with scaled coupling and identical draws
        InterferenceSource src;
        src.power_scale = fa.src.power_scale;
        src.h_i.resize(2);
        for (int r = 0; r < 2; ++r)
            src.h_i(r) = std::exp(cxd(0.0, 2.0 * M_PI * rng.uniform()));
        src.symbols.resize(fa.src.symbols.size());
        for (auto& b : src.symbols) b = rng.qpsk();
        const int K = layout.frame_length();
        std::vector<MatrixXcd> B(K);
        for (int k = 0; k < K; ++k) B[k] = build_interference_matrix(src, k, 4, 2);
        FadingParams fp = fa.fading;
        const ChannelTrace tr = evolve_channel(fp, K, rng);
        const auto seq = generate_frame(layout, rng);
        fb.obs = synthesize_observations(seq, tr, B, 2.0 * fa.eic.c, fp.sigma2, rng);
        fb.obs.layout = layout;
    }
    for (int k = 0; k < layout.frame_length(); ++k) {
        const VectorXcd diff = (fb.obs.y.row(k) - fa.obs.y.row(k)).transpose();
        const VectorXcd expect = fa.obs.B[k] * fa.eic.c;
        CHECK((diff - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("identical seeds replay identical frames") {
    Rng ra(99), rb(99);
    testing::FrameSetup a = testing::make_frame(5, 3, 0.99, 15.0, 0.0, ra);
    testing::FrameSetup b = testing::make_frame(5, 3, 0.99, 15.0, 0.0, rb);
    CHECK((a.obs.y - b.obs.y).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.obs.trace.h - b.obs.trace.h).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t k = 0; k < a.obs.x_true.size(); ++k)
        CHECK(a.obs.x_true[k] == b.obs.x_true[k]);
}

TEST_CASE("synthesized noise variance is calibrated") {
    FrameLayout layout;
    layout.n_p = 2;
    layout.n_d = 0;
    FadingParams p;
    p.alpha = 0.9;
    p.n_r = 1;
    const double sigma2 = 0.04;
    Rng rng(10);
    double acc = 0.0;
    long count = 0;
    for (int t = 0; t < 50000; ++t) {
        const ChannelTrace tr = evolve_channel(p, 2, rng);
        const auto seq = generate_frame(layout, rng);
        const FrameObservation obs =
            synthesize_observations(seq, tr, {}, VectorXcd(), sigma2, rng);
        for (int k = 0; k < 2; ++k) {
            acc += std::norm(obs.y(k, 0) - tr.h(k, 0) * seq[k]);
            ++count;
        }
    }
    const double mean = acc / count;
    CHECK(std::abs(mean - sigma2) / sigma2 < 0.02);
}

TEST_CASE("frame dump is valid-looking JSON with both parts") {
    Rng rng(11);
    testing::FrameSetup fs = testing::make_frame(3, 1, 0.99, 20.0, 0.0, rng);
    const std::string js = fs.obs.to_json();
    CHECK(js.find("\"y\":[[[") != std::string::npos);
    CHECK(js.find("\"n_p\":3") != std::string::npos);
}

TEST_SUITE_END();
