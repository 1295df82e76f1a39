#pragma once

#include <string>
#include <vector>

#include "ocsim/errors.hpp"
#include "ocsim/types.hpp"

namespace ocsim {

enum class PulseKind { RootRaisedCosine, Rectangular };

/// Baseband pulse-shaping filter. Pulses are normalized to unity gain at
/// the sampling instant (p(0) = 1) and truncated to +/- span symbol periods.
struct PulseShape {
    PulseKind kind = PulseKind::RootRaisedCosine;
    double roll_off = 0.25;      // in [0, 1]
    double symbol_period = 1.0;  // seconds, > 0
    int span = 8;                // one-sided truncation, in symbol periods

    void validate() const;
};

/// Evaluate the pulse amplitude at time t (seconds). Total on finite inputs;
/// the removable singularities of the root-raised-cosine closed form are
/// handled by their analytic limits.
double eval_pulse(const PulseShape& shape, double t);

/// Relative geometry of the two links. The interfering signal occupies M
/// times the bandwidth of the desired one, so its symbol period is
/// T_i = T_d / M, and L consecutive interfering symbols couple into each
/// desired sample.
struct AlignmentConfig {
    int bandwidth_ratio = 2;      // M >= 1, integer
    int interferer_span = 4;      // L, positive multiple of M
    double freq_offset = 0.0;     // carrier spacing between the links, Hz
    double time_offset = 0.0;     // interferer symbol-clock offset t_i, seconds
    double sample_offset = 0.0;   // desired-link sampling offset, seconds
    double phase_desired = 0.0;   // radians
    double phase_interf = 0.0;    // radians

    void validate() const;
};

/// The L complex coupling coefficients between interfering symbols and one
/// desired-link sample, together with a fingerprint of the configuration
/// that produced them.
struct EicVector {
    VectorXcd c;
    std::string config_hash;

    int size() const { return static_cast<int>(c.size()); }
    std::string to_json() const;
};

struct QuadratureOptions {
    double initial_step_divisor = 512.0;  // step = T_d / divisor
    double tolerance = 1e-8;              // max per-entry change between refinements
    int max_refinements = 10;
};

/// Cross-correlation of the two pulse-shaping filters under carrier offset,
/// evaluated by composite Simpson quadrature over the support intersection
/// with adaptive step halving. The symbol index fixes where along the
/// stream the coefficients are evaluated; for an integer bandwidth ratio
/// and integer freq_offset * T_d the result does not depend on it.
EicVector compute_eic(const PulseShape& p_d, const PulseShape& p_i,
                      const AlignmentConfig& cfg, int symbol_index = 0,
                      const QuadratureOptions& quad = {});

/// The interfering link as seen by the receiver: line-of-sight channel
/// gains (known, constant over a frame), the unit-modulus symbol stream at
/// M times the desired rate, and a linear amplitude multiplier.
struct InterferenceSource {
    VectorXcd h_i;
    std::vector<cxd> symbols;
    double power_scale = 1.0;
};

/// Interference matrix for desired-symbol index k: column l holds
/// h_i * b_{Mk+l} * power_scale. Known at the receiver.
MatrixXcd build_interference_matrix(const InterferenceSource& src, int k, int L, int M);

/// Interference term of one received sample: B_k * c.
VectorXcd synthesize_interference(const MatrixXcd& B_k, const EicVector& c);

}  // namespace ocsim
