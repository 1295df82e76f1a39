#pragma once

// Test-only reference implementations. Each one reaches the quantity under
// test through a different route than the library (plain Riemann sums,
// generic Gaussian conditioning, dense joint precision matrices) so that
// agreement is meaningful.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ocsim/channel.hpp"
#include "ocsim/estimator.hpp"
#include "ocsim/rng.hpp"
#include "ocsim/types.hpp"
#include "ocsim/waveform.hpp"

namespace ocsim::testing {

/// Plain midpoint Riemann sum of the pulse cross-correlation integral.
inline cxd riemann_eic_entry(const PulseShape& p_d, const PulseShape& p_i,
                             const AlignmentConfig& cfg, int l, double step,
                             int symbol_index = 0) {
    const double T_d = p_d.symbol_period;
    const double T_i = p_i.symbol_period;
    const int k = symbol_index;
    const double sample_time = k * T_d + cfg.sample_offset;
    const double center_i = (cfg.bandwidth_ratio * k + l) * T_i + cfg.time_offset;
    const double lo = std::max(sample_time - p_d.span * T_d, center_i - p_i.span * T_i);
    const double hi = std::min(sample_time + p_d.span * T_d, center_i + p_i.span * T_i);
    if (lo >= hi) return cxd(0.0, 0.0);
    const long n = std::lround(std::ceil((hi - lo) / step));
    const double h = (hi - lo) / n;
    cxd acc(0.0, 0.0);
    for (long m = 0; m < n; ++m) {
        const double tau = lo + (m + 0.5) * h;
        acc += eval_pulse(p_d, sample_time - tau) * eval_pulse(p_i, tau - center_i) *
               std::exp(cxd(0.0, -2.0 * M_PI * cfg.freq_offset * tau +
                                     cfg.phase_interf + cfg.phase_desired));
    }
    return acc * h;
}

/// Root-raised-cosine impulse response via numerical inversion of its
/// frequency-domain mask, normalized to unity at t = 0.
inline double rrc_from_spectrum(double t, double beta, double T) {
    auto mask = [&](double f) {
        const double f1 = (1.0 - beta) / (2.0 * T);
        const double f2 = (1.0 + beta) / (2.0 * T);
        const double af = std::abs(f);
        if (af <= f1) return std::sqrt(T);
        if (af >= f2) return 0.0;
        const double c = 0.5 * (1.0 + std::cos(M_PI * T / beta * (af - f1)));
        return std::sqrt(T * c);
    };
    auto inverse_at = [&](double tt) {
        const double fmax = (1.0 + beta) / (2.0 * T);
        const int n = 200000;
        const double h = fmax / n;
        double acc = 0.0;
        for (int m = 0; m < n; ++m) {
            const double f = (m + 0.5) * h;
            acc += mask(f) * std::cos(2.0 * M_PI * f * tt);
        }
        return 2.0 * acc * h;
    };
    return inverse_at(t) / inverse_at(0.0);
}

/// Joint log likelihood of (h at pilot n, all pilot observations) assembled
/// by generic bivariate Gaussian conditioning on the neighbor toward n,
/// with the covariances taken straight from the channel recursion.
inline double oracle_pilot_loglik(const PilotBlock& block, int n, const VectorXcd& h,
                                  const VectorXcd& c) {
    const int n_p = block.n_p();
    const double s2 = block.sigma2;
    const double sh2 = block.sigma_h2;
    const double ap = block.alpha_p;
    const bool with_b = !block.interference_free();

    double ll = -h.squaredNorm() / sh2;
    for (int i = 0; i < n_p; ++i) {
        const int d = std::abs(n - i);
        if (d == 0) {
            VectorXcd mu = h * block.x[i];
            if (with_b) mu += block.B[i] * c;
            ll -= (block.y[i] - mu).squaredNorm() / s2;
            continue;
        }
        const int nbr = i < n ? i + 1 : i - 1;
        VectorXcd mu_i = std::pow(ap, d) * block.x[i] * h;
        VectorXcd mu_nbr = std::pow(ap, d - 1) * block.x[nbr] * h;
        if (with_b) {
            mu_i += block.B[i] * c;
            mu_nbr += block.B[nbr] * c;
        }
        const double var_i = s2 + sh2 * (1.0 - std::pow(ap, 2 * d));
        const double var_nbr = s2 + sh2 * (1.0 - std::pow(ap, 2 * (d - 1)));
        const cxd cov = block.x[i] * std::conj(block.x[nbr]) * sh2 * ap *
                        (1.0 - std::pow(ap, 2 * (d - 1)));
        const VectorXcd mu_cond = mu_i + (cov / var_nbr) * (block.y[nbr] - mu_nbr);
        const double var_cond = var_i - std::norm(cov) / var_nbr;
        ll -= (block.y[i] - mu_cond).squaredNorm() / var_cond;
    }
    return ll;
}

struct GridSearchResult {
    cxd c_best;
    cxd h_best;
    double ll_best;
    double resolution;
};

/// Dense grid search of the joint likelihood for scalar instances
/// (one antenna, one coupling coefficient): outer zoomed grid over c with an
/// inner zoomed grid over h at each candidate.
inline GridSearchResult grid_search_toy(const PilotBlock& block, int n, cxd c_center,
                                        cxd h_center, double half_width) {
    auto profile_h = [&](cxd c, cxd h0, double width) {
        cxd best_h = h0;
        double best = -std::numeric_limits<double>::infinity();
        cxd center = h0;
        double w = width;
        for (int zoom = 0; zoom < 4; ++zoom) {
            const int pts = 21;
            cxd local_best = center;
            for (int a = 0; a < pts; ++a) {
                for (int b = 0; b < pts; ++b) {
                    const cxd h(center.real() - w + 2.0 * w * a / (pts - 1),
                                center.imag() - w + 2.0 * w * b / (pts - 1));
                    VectorXcd hv(1), cv(1);
                    hv << h;
                    cv << c;
                    const double ll = oracle_pilot_loglik(block, n, hv, cv);
                    if (ll > best) {
                        best = ll;
                        local_best = h;
                    }
                }
            }
            center = local_best;
            best_h = local_best;
            w = w * 2.0 / (pts - 1) * 1.5;  // shrink around the winner
        }
        return std::make_pair(best_h, best);
    };

    GridSearchResult out{c_center, h_center, -std::numeric_limits<double>::infinity(), 0.0};
    cxd center = c_center;
    double w = half_width;
    for (int zoom = 0; zoom < 4; ++zoom) {
        const int pts = 21;
        cxd winner = center;
        for (int a = 0; a < pts; ++a) {
            for (int b = 0; b < pts; ++b) {
                const cxd c(center.real() - w + 2.0 * w * a / (pts - 1),
                            center.imag() - w + 2.0 * w * b / (pts - 1));
                const auto [h_best, ll] = profile_h(c, out.h_best, 1.5 * half_width);
                if (ll > out.ll_best) {
                    out.ll_best = ll;
                    out.c_best = c;
                    out.h_best = h_best;
                    winner = c;
                }
            }
        }
        center = winner;
        out.resolution = 2.0 * w / (pts - 1);
        w = w * 2.0 / (pts - 1) * 1.5;
    }
    return out;
}

/// Log of the integral over the interval channels of the sequence
/// posterior, via the dense joint complex Gaussian over all interval
/// positions (tridiagonal precision). Candidate-dependent part only.
inline double dense_sequence_logposterior(const VectorXcd& h_head,
                                          const VectorXcd& h_tail,
                                          const MatrixXcd& y, double alpha,
                                          double sigma2,
                                          const std::vector<cxd>& candidate,
                                          double sigma_h2 = 1.0) {
    const int n_d = static_cast<int>(y.rows());
    const int n_r = static_cast<int>(y.cols());
    const double tau1 = 1.0 / ((1.0 - alpha * alpha) * sigma_h2);
    const double tau2 = alpha * tau1;

    // per-antenna precision is shared; build the scalar tridiagonal system
    MatrixXcd P = MatrixXcd::Zero(n_d, n_d);
    for (int i = 0; i < n_d; ++i) {
        P(i, i) = 1.0 / sigma2 + (1.0 + alpha * alpha) * tau1;
        if (i + 1 < n_d) {
            P(i, i + 1) = -tau2;
            P(i + 1, i) = -tau2;
        }
    }
    Eigen::LDLT<MatrixXcd> solver(P);
    double ll = 0.0;
    for (int r = 0; r < n_r; ++r) {
        VectorXcd q = VectorXcd::Zero(n_d);
        for (int i = 0; i < n_d; ++i) {
            q(i) = std::conj(candidate[i]) * y(i, r) / sigma2;
            if (i == 0) q(i) += tau2 * h_head(r);
            if (i == n_d - 1) q(i) += tau2 * h_tail(r);
        }
        ll += (q.adjoint() * solver.solve(q))(0).real();
    }
    return ll;
}

/// Same marginal evaluated on literal grids (midpoint rule), for anchoring
/// the dense-Gaussian reference. Scalar (one antenna) intervals with two
/// data positions only.
inline double grid_sequence_posterior(cxd h_head, cxd h_tail, cxd y1, cxd y2,
                                      double alpha, double sigma2, cxd x1, cxd x2,
                                      int pts, double radius, double sigma_h2 = 1.0) {
    const double tau1 = 1.0 / ((1.0 - alpha * alpha) * sigma_h2);
    const double step = 2.0 * radius / pts;
    // posterior-mean guesses center the grids
    const cxd c1 = (alpha * h_head + std::conj(x1) * y1 / sigma2 / tau1) /
                   (1.0 + 1.0 / (sigma2 * tau1));
    const cxd c2 = (alpha * h_tail + std::conj(x2) * y2 / sigma2 / tau1) /
                   (1.0 + 1.0 / (sigma2 * tau1));
    double acc = 0.0;
    for (int a1 = 0; a1 < pts; ++a1)
    for (int b1 = 0; b1 < pts; ++b1) {
        const cxd h1(c1.real() - radius + (a1 + 0.5) * step,
                     c1.imag() - radius + (b1 + 0.5) * step);
        const double base1 = -tau1 * std::norm(h1 - alpha * h_head) -
                             std::norm(y1 - h1 * x1) / sigma2;
        double inner = 0.0;
        for (int a2 = 0; a2 < pts; ++a2)
        for (int b2 = 0; b2 < pts; ++b2) {
            const cxd h2(c2.real() - radius + (a2 + 0.5) * step,
                         c2.imag() - radius + (b2 + 0.5) * step);
            inner += std::exp(-tau1 * std::norm(h2 - alpha * h1) -
                              std::norm(y2 - h2 * x2) / sigma2 -
                              tau1 * std::norm(h_tail - alpha * h2) + base1);
        }
        acc += inner;
    }
    return acc * step * step * step * step;
}

/// All QPSK sequences of a given length in lexicographic order.
inline std::vector<std::vector<cxd>> all_candidates(int n_d) {
    const auto& pts = qpsk_constellation();
    std::vector<std::vector<cxd>> out;
    std::vector<int> idx(n_d, 0);
    while (true) {
        std::vector<cxd> cand(n_d);
        for (int i = 0; i < n_d; ++i) cand[i] = pts[idx[i]];
        out.push_back(cand);
        int p = n_d - 1;
        while (p >= 0 && idx[p] == 3) idx[p--] = 0;
        if (p < 0) break;
        ++idx[p];
    }
    return out;
}

/// Synthesize one default interference-present frame for estimator tests.
struct FrameSetup {
    FrameObservation obs;
    EicVector eic;
    InterferenceSource src;
    FadingParams fading;
};

inline FrameSetup make_frame(int n_p, int n_d, double alpha, double snr_db,
                             double inr_db, Rng& rng, int n_r = 2,
                             const EicVector* cached_eic = nullptr) {
    FrameSetup fs;
    FrameLayout layout;
    layout.n_p = n_p;
    layout.n_d = n_d;

    if (cached_eic) {
        fs.eic = *cached_eic;
    } else {
        PulseShape p_d;
        PulseShape p_i = p_d;
        AlignmentConfig align;
        align.bandwidth_ratio = 2;
        align.interferer_span = 4;
        align.freq_offset = 1.0;
        align.time_offset = -p_d.symbol_period;
        p_i.symbol_period = p_d.symbol_period / 2.0;
        fs.eic = compute_eic(p_d, p_i, align);
    }
    const double inr = std::pow(10.0, inr_db / 10.0);
    fs.src.power_scale = std::sqrt(inr / fs.eic.c.squaredNorm());
    fs.src.h_i.resize(n_r);
    for (int r = 0; r < n_r; ++r)
        fs.src.h_i(r) = std::exp(cxd(0.0, 2.0 * M_PI * rng.uniform()));

    fs.fading.alpha = alpha;
    fs.fading.n_r = n_r;
    fs.fading.sigma2 = std::pow(10.0, -snr_db / 10.0);

    const int K = layout.frame_length();
    const int M = 2, L = 4;
    fs.src.symbols.resize(static_cast<std::size_t>(M) * (K - 1) + L);
    for (auto& b : fs.src.symbols) b = rng.qpsk();
    std::vector<MatrixXcd> B(K);
    for (int k = 0; k < K; ++k) B[k] = build_interference_matrix(fs.src, k, L, M);

    const ChannelTrace trace = evolve_channel(fs.fading, K, rng);
    const std::vector<cxd> symbols = generate_frame(layout, rng);
    fs.obs = synthesize_observations(symbols, trace, B, fs.eic.c, fs.fading.sigma2, rng);
    fs.obs.layout = layout;
    return fs;
}

}  // namespace ocsim::testing
