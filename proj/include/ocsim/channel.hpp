#pragma once

#include <cstdint>
#include <vector>

#include "ocsim/errors.hpp"
#include "ocsim/rng.hpp"
#include "ocsim/types.hpp"

namespace ocsim {

/// First-order Gauss-Markov fading parameters. The stationary per-antenna
/// channel variance is sigma_h2 (fixed to 1 by convention) and the SNR is
/// rho = sigma_h2 / sigma2.
struct FadingParams {
    double alpha = 0.99;    // correlation coefficient, in (0, 1]
    double sigma_h2 = 1.0;  // stationary channel variance per antenna
    int n_r = 2;            // receive antennas
    double sigma2 = 0.01;   // AWGN variance per complex dimension

    double rho() const { return sigma_h2 / sigma2; }
    void validate() const;
};

/// Scattered-pilot frame: pilots at positions 0, n_d+1, 2(n_d+1), ... with
/// n_d data symbols between consecutive pilots.
struct FrameLayout {
    int n_p = 51;
    int n_d = 3;
    std::vector<cxd> pilot_symbols;  // unit modulus; filled with the default
                                     // pilot when left empty

    int frame_length() const { return (n_p - 1) * (n_d + 1) + 1; }
    int pilot_position(int i) const { return i * (n_d + 1); }
    bool is_pilot(int k) const { return k % (n_d + 1) == 0; }
    double alpha_p(double alpha) const;
    cxd pilot_value(int i) const;
    void validate() const;
};

/// Per-symbol channel vectors for one frame; row k holds h_k.
struct ChannelTrace {
    MatrixXcd h;  // frame_length x n_r
    std::uint64_t rng_seed = 0;
};

/// One synthesized frame: observations, ground truth, and everything the
/// receiver is assumed to know (interference matrices, layout).
struct FrameObservation {
    MatrixXcd y;                 // frame_length x n_r
    std::vector<cxd> x_true;     // transmitted desired symbols
    std::vector<MatrixXcd> B;    // per-symbol interference matrices (n_r x L)
    VectorXcd c_true;            // coupling vector used during synthesis
    ChannelTrace trace;
    FrameLayout layout;
    double sigma2 = 0.0;

    bool interference_free() const;
    std::string to_json() const;  // debug dump, [re, im] arrays
};

/// Draw a stationary Gauss-Markov trace: h_0 ~ CSCG(0, sigma_h2 I) and
/// h_{k+1} = alpha h_k + sqrt(1 - alpha^2) Delta_k.
ChannelTrace evolve_channel(const FadingParams& params, int length, Rng& rng);

/// Desired-link symbol sequence: pilots at pilot positions, i.i.d. uniform
/// QPSK at data positions.
std::vector<cxd> generate_frame(const FrameLayout& layout, Rng& rng);

/// y_k = h_k x_k + B_k c + w_k with w_k ~ CSCG(0, sigma2 I).
FrameObservation synthesize_observations(const std::vector<cxd>& symbols,
                                         const ChannelTrace& trace,
                                         const std::vector<MatrixXcd>& B,
                                         const VectorXcd& c, double sigma2,
                                         Rng& rng);

}  // namespace ocsim
