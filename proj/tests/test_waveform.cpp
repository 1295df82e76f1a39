#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "ocsim/waveform.hpp"

using namespace ocsim;
using namespace ocsim::testing;

TEST_SUITE_BEGIN("waveform");

TEST_CASE("rectangular pulse is one on its support") {
    PulseShape rect{PulseKind::Rectangular, 0.0, 1.0, 1};
    CHECK(eval_pulse(rect, 0.3) == 1.0);
    CHECK(eval_pulse(rect, -0.3) == 1.0);
    CHECK(eval_pulse(rect, 0.51) == 0.0);
    CHECK(eval_pulse(rect, 2.0) == 0.0);
}

TEST_CASE("root-raised-cosine peak is normalized to one") {
    PulseShape rrc{PulseKind::RootRaisedCosine, 0.25, 1.0, 8};
    CHECK(eval_pulse(rrc, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("root-raised-cosine matches its spectrum inverse transform") {
    PulseShape rrc{PulseKind::RootRaisedCosine, 0.25, 1.0, 8};
    for (double t : {0.5, 0.25, 1.3, 2.0}) {
        CHECK(eval_pulse(rrc, t) ==
              doctest::Approx(rrc_from_spectrum(t, 0.25, 1.0)).epsilon(1e-6));
    }
    // the closed form's removable singularity at T / (4 roll_off)
    CHECK(eval_pulse(rrc, 1.0) ==
          doctest::Approx(rrc_from_spectrum(1.0, 0.25, 1.0)).epsilon(1e-6));
    CHECK(eval_pulse(rrc, std::nextafter(1.0, 2.0)) ==
          doctest::Approx(eval_pulse(rrc, 1.0)).epsilon(1e-6));
}

TEST_CASE("pulses are even symmetric") {
    PulseShape rrc{PulseKind::RootRaisedCosine, 0.35, 2.0, 8};
    PulseShape rect{PulseKind::Rectangular, 0.0, 2.0, 1};
    for (double t : {0.1, 0.77, 1.9, 3.3}) {
        CHECK(eval_pulse(rrc, t) == eval_pulse(rrc, -t));
        CHECK(eval_pulse(rect, t) == eval_pulse(rect, -t));
    }
}

namespace {

AlignmentConfig aligned_rects_cfg() {
    AlignmentConfig cfg;
    cfg.bandwidth_ratio = 1;
    cfg.interferer_span = 1;
    return cfg;
}

}  // namespace

TEST_CASE("aligned unit rectangles overlap to the symbol period") {
    PulseShape rect{PulseKind::Rectangular, 0.0, 1.0, 1};
    AlignmentConfig cfg = aligned_rects_cfg();
    cfg.time_offset = -1.0;  // puts the single interferer symbol at the sample time
    const EicVector eic = compute_eic(rect, rect, cfg);
    REQUIRE(eic.size() == 1);
    CHECK(eic.c(0).real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(eic.c(0).imag()) < 1e-12);
}

TEST_CASE("zero offsets and phases give a real coupling vector") {
    PulseShape p_d{PulseKind::RootRaisedCosine, 0.25, 1.0, 8};
    PulseShape p_i{PulseKind::RootRaisedCosine, 0.25, 0.5, 8};
    AlignmentConfig cfg;
    cfg.bandwidth_ratio = 2;
    cfg.interferer_span = 4;
    cfg.time_offset = -1.0;
    const EicVector eic = compute_eic(p_d, p_i, cfg);
    for (int l = 0; l < eic.size(); ++l) CHECK(std::abs(eic.c(l).imag()) < 1e-9);
}

TEST_CASE("quadrature matches a ten-times finer Riemann sum") {
    PulseShape p_d{PulseKind::RootRaisedCosine, 0.25, 1.0, 8};
    PulseShape p_i{PulseKind::RootRaisedCosine, 0.25, 0.5, 8};
    AlignmentConfig cfg;
    cfg.bandwidth_ratio = 2;
    cfg.interferer_span = 4;
    cfg.freq_offset = 1.0;  // freq_offset * T_d = 1
    cfg.time_offset = -1.0;
    const EicVector eic = compute_eic(p_d, p_i, cfg);
    for (int l = 0; l < eic.size(); ++l) {
        const cxd ref = riemann_eic_entry(p_d, p_i, cfg, l + 1, 1.0 / 5120.0);
        CHECK(std::abs(eic.c(l) - ref) < 1e-8);
    }
}

TEST_CASE("coupling vector does not depend on the symbol index") {
    Rng rng(2024);
    for (int rep = 0; rep < 5; ++rep) {
        PulseShape p_d{PulseKind::RootRaisedCosine, 0.15 + 0.15 * rep, 1.0, 6};
        const int M = 1 + static_cast<int>(rng.below(3));
        PulseShape p_i{PulseKind::RootRaisedCosine, 0.25, 1.0 / M, 6};
        AlignmentConfig cfg;
        cfg.bandwidth_ratio = M;
        cfg.interferer_span = 2 * M;
        cfg.freq_offset = static_cast<double>(rng.below(3));  // integer times 1/T_d
        cfg.time_offset = rng.uniform() - 1.0;
        cfg.sample_offset = 0.2 * rng.uniform();
        cfg.phase_desired = rng.uniform();
        cfg.phase_interf = rng.uniform();
        const EicVector at0 = compute_eic(p_d, p_i, cfg, 0);
        const EicVector shifted = compute_eic(p_d, p_i, cfg, 3);
        for (int l = 0; l < at0.size(); ++l)
            CHECK(std::abs(at0.c(l) - shifted.c(l)) < 1e-7);
    }
}

TEST_CASE("negating the carrier offset and both phases conjugates the vector") {
    PulseShape p_d{PulseKind::RootRaisedCosine, 0.25, 1.0, 8};
    PulseShape p_i{PulseKind::RootRaisedCosine, 0.3, 0.5, 8};
    AlignmentConfig cfg;
    cfg.bandwidth_ratio = 2;
    cfg.interferer_span = 4;
    cfg.freq_offset = 0.7;
    cfg.time_offset = -0.8;
    cfg.phase_desired = 0.4;
    cfg.phase_interf = 1.1;
    AlignmentConfig mirrored = cfg;
    mirrored.freq_offset = -cfg.freq_offset;
    mirrored.phase_desired = -cfg.phase_desired;
    mirrored.phase_interf = -cfg.phase_interf;
    const EicVector a = compute_eic(p_d, p_i, cfg);
    const EicVector b = compute_eic(p_d, p_i, mirrored);
    for (int l = 0; l < a.size(); ++l)
        CHECK(std::abs(a.c(l) - std::conj(b.c(l))) < 1e-9);
}

TEST_CASE("halving the quadrature step moves no entry beyond tolerance") {
    PulseShape p_d{PulseKind::RootRaisedCosine, 0.25, 1.0, 8};
    PulseShape p_i{PulseKind::RootRaisedCosine, 0.25, 0.5, 8};
    AlignmentConfig cfg;
    cfg.bandwidth_ratio = 2;
    cfg.interferer_span = 4;
    cfg.freq_offset = 1.0;
    cfg.time_offset = -1.0;
    QuadratureOptions coarse;
    QuadratureOptions fine;
    fine.initial_step_divisor = 1024.0;
    const EicVector a = compute_eic(p_d, p_i, cfg, 0, coarse);
    const EicVector b = compute_eic(p_d, p_i, cfg, 0, fine);
    for (int l = 0; l < a.size(); ++l)
        CHECK(std::abs(std::abs(a.c(l)) - std::abs(b.c(l))) < 1e-8);
}

TEST_CASE("interference matrix columns carry channel times symbol") {
    InterferenceSource src;
    src.h_i = VectorXcd(2);
    src.h_i << cxd(1, 0), cxd(0, 1);
    src.symbols = {cxd(-1, 0), cxd(1, 0), cxd(1, 0), cxd(1, 0)};
    src.power_scale = 1.0;

    const MatrixXcd B = build_interference_matrix(src, 0, 4, 1);
    CHECK(B(0, 0) == cxd(-1, 0));
    CHECK(B(1, 0) == cxd(0, -1));
    CHECK(B(0, 1) == cxd(1, 0));

    src.power_scale = 0.0;
    const MatrixXcd Z = build_interference_matrix(src, 0, 4, 1);
    CHECK(Z.cwiseAbs().maxCoeff() == 0.0);

    SUBCASE("all-ones stream on one antenna gives an all-ones row") {
        InterferenceSource ones;
        ones.h_i = VectorXcd::Ones(1);
        ones.symbols.assign(8, cxd(1, 0));
        const MatrixXcd R = build_interference_matrix(ones, 1, 4, 1);
        for (int l = 0; l < 4; ++l) CHECK(R(0, l) == cxd(1, 0));
    }

    CHECK_THROWS_AS(build_interference_matrix(src, 5, 4, 1), SymbolStreamExhausted);
}

TEST_CASE("interference synthesis is the matrix-vector product") {
    Rng rng(7);
    MatrixXcd B(3, 4);
    for (int r = 0; r < 3; ++r)
        for (int l = 0; l < 4; ++l) B(r, l) = rng.cnormal();
    EicVector c;
    c.c = rng.cnormal_vector(4);

    const VectorXcd got = synthesize_interference(B, c);
    for (int r = 0; r < 3; ++r) {
        cxd acc(0, 0);
        for (int l = 0; l < 4; ++l) acc += B(r, l) * c.c(l);
        CHECK(std::abs(got(r) - acc) < 1e-14);
    }

    SUBCASE("zero coupling gives the zero vector") {
        c.c.setZero();
        CHECK(synthesize_interference(B, c).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("single column passes through") {
        MatrixXcd col(2, 1);
        col << cxd(1, 0), cxd(0, 0);
        EicVector c1;
        c1.c = VectorXcd(1);
        c1.c << cxd(0.3, -0.4);
        const VectorXcd out = synthesize_interference(col, c1);
        CHECK(out(0) == cxd(0.3, -0.4));
        CHECK(out(1) == cxd(0, 0));
    }
    SUBCASE("dimension mismatch throws") {
        EicVector bad;
        bad.c = VectorXcd::Zero(3);
        CHECK_THROWS_AS(synthesize_interference(B, bad), DimensionMismatch);
    }
    SUBCASE("superposition is exact") {
        EicVector c2;
        c2.c = rng.cnormal_vector(4);
        EicVector csum;
        csum.c = c.c + c2.c;
        const VectorXcd lhs = synthesize_interference(B, csum);
        const VectorXcd rhs =
            synthesize_interference(B, c) + synthesize_interference(B, c2);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("coupling vector serializes to JSON") {
    PulseShape rect{PulseKind::Rectangular, 0.0, 1.0, 1};
    AlignmentConfig cfg = aligned_rects_cfg();
    cfg.time_offset = -1.0;
    const EicVector eic = compute_eic(rect, rect, cfg);
    const std::string js = eic.to_json();
    CHECK(js.find("\"c\":[[") != std::string::npos);
    CHECK(js.find("config_hash") != std::string::npos);
}

TEST_SUITE_END();
