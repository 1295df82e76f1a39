#pragma once

#include <optional>
#include <vector>

#include "ocsim/channel.hpp"
#include "ocsim/errors.hpp"
#include "ocsim/types.hpp"

namespace ocsim {

/// Observations restricted to an (effective) pilot grid, together with the
/// correlation of channel gains between consecutive grid positions. During
/// iterative detection the grid is the whole frame and alpha_p equals alpha.
struct PilotBlock {
    std::vector<VectorXcd> y;
    std::vector<MatrixXcd> B;  // empty when interference-free
    std::vector<cxd> x;        // unit-modulus symbols on the grid
    double alpha_p = 0.0;
    double sigma2 = 0.0;
    double sigma_h2 = 1.0;

    int n_p() const { return static_cast<int>(x.size()); }
    int n_r() const { return static_cast<int>(y.at(0).size()); }
    int L() const { return B.empty() ? 0 : static_cast<int>(B.at(0).cols()); }
    double rho() const { return sigma_h2 / sigma2; }
    bool interference_free() const { return B.empty(); }
    void validate() const;
};

/// Restriction of a frame to its pilot positions.
PilotBlock pilot_block(const FrameObservation& obs, double alpha);

/// Whole frame treated as a pilot grid, with data positions carrying the
/// supplied symbol decisions.
PilotBlock full_frame_block(const FrameObservation& obs, double alpha,
                            const std::vector<cxd>& detected_data);

/// Regression parameters of one observation against its neighbor toward the
/// reference pilot n: weight omega on the reference channel, neighbor
/// coefficient beta (carrying the pilot-product phase), conditional variance
/// sigma2, and the neighbor direction indicator j (+1 below n, -1 above, 0
/// at n).
struct ConditionalParams {
    double omega = 0.0;
    cxd beta = 0.0;
    double sigma2 = 0.0;
    int j = 0;
};

ConditionalParams conditional_params(int n, int i, double alpha_p, double rho,
                                     const std::vector<cxd>& pilots,
                                     double sigma2);

/// Distance-indexed cache of the magnitude parts of ConditionalParams;
/// they depend on |n - i| only.
struct ConditionalTable {
    std::vector<double> omega;     // omega_d, d = 0 .. n_p - 1
    std::vector<double> beta_mag;  // |beta|_d
    std::vector<double> sigma2;    // sigma2_d
    std::vector<double> alpha_pow; // alpha_p^d

    static ConditionalTable build(int n_p, double alpha_p, double rho, double sigma2);
};

struct EstimatorOptions {
    bool scalar_fast_path = true;   // antennas independent: A_n = a_n I
    double max_condition = 1e12;    // guard on the L x L normal matrix
    bool collect_diagnostics = false;
};

/// Per-pilot solver state kept for diagnostics and tests.
struct EstimatorWorkspace {
    double a_n = 0.0;          // scalar form of A_n (independent antennas)
    MatrixXcd A_n;             // matrix form (filled on the general path)
    MatrixXcd D_n;             // L x L Hermitian normal matrix
    double d_min_eig = 0.0;
    double d_max_eig = 0.0;
};

struct EicEstimate {
    VectorXcd c_tilde;                  // frame-level average
    std::vector<VectorXcd> per_pilot;   // c_tilde_n
    double residual_power_estimate = 0.0;  // spread-based proxy, diagnostic only
};

struct ChannelEstimateSet {
    MatrixXcd h_tilde;  // n_p x n_r
};

/// Per-pilot coupling estimate: solves the L x L normal system obtained
/// after profiling out the channel at pilot n.
VectorXcd estimate_eic_per_pilot(const PilotBlock& block, int n,
                                 const EstimatorOptions& opts = {},
                                 EstimatorWorkspace* ws = nullptr);

/// Arithmetic mean of the per-pilot estimates.
EicEstimate average_eic(const std::vector<VectorXcd>& per_pilot);

/// Subtract the estimated interference inside the transformed observations
/// and return the channel estimate at every pilot. Pass a zero-length
/// c_tilde (or an interference-free block) to skip the subtraction.
ChannelEstimateSet cancel_and_estimate_channels(const PilotBlock& block,
                                                const VectorXcd& c_tilde,
                                                const EstimatorOptions& opts = {});

/// Full first phase: per-pilot coupling estimates, their average,
/// interference subtraction, channel estimates at pilots.
struct EstimationResult {
    EicEstimate eic;
    ChannelEstimateSet channels;
    std::vector<EstimatorWorkspace> workspaces;  // filled when requested
};

EstimationResult estimate_frame(const PilotBlock& block,
                                const EstimatorOptions& opts = {});

/// Joint log likelihood of (h_n, observations) for a candidate channel and
/// coupling vector, via the conditional-Gaussian chain around pilot n.
/// This is the objective the two-step estimator maximizes; kept separate
/// from the solver assembly so the audit below is meaningful.
double pilot_joint_loglik(const PilotBlock& block, int n, const VectorXcd& h,
                          const VectorXcd& c);

struct StationarityReport {
    double grad_norm = 0.0;
    double grad_scale = 0.0;
    bool local_max = true;  // likelihood decreased under random perturbations
};

/// First-order optimality audit: finite-difference gradient of the joint
/// log likelihood at (h_tilde_n, c_tilde_n) must be negligible and random
/// small perturbations must decrease the objective. Throws
/// StationarityViolation otherwise.
StationarityReport verify_estimator_stationarity(const PilotBlock& block, int n,
                                                 const VectorXcd& h_tilde,
                                                 const VectorXcd& c_tilde,
                                                 Rng& rng,
                                                 double rel_tol = 1e-6);

}  // namespace ocsim
