#pragma once

#include <string>
#include <vector>

#include "ocsim/channel.hpp"
#include "ocsim/errors.hpp"
#include "ocsim/estimator.hpp"
#include "ocsim/types.hpp"

namespace ocsim {

/// One detection interval: the n_d data observations between two pilots
/// whose channel estimates bracket it. Observations are post-cancellation.
struct DetectionInterval {
    VectorXcd h_head;
    VectorXcd h_tail;
    MatrixXcd y;  // n_d x n_r
    double alpha = 0.99;
    double sigma2 = 0.01;
    double sigma_h2 = 1.0;

    int n_d() const { return static_cast<int>(y.rows()); }
    int n_r() const { return static_cast<int>(y.cols()); }
    void validate() const;
};

enum class DetectorKind { SMap, IMap, Odd, Iterative };
std::string detector_name(DetectorKind kind);

struct DetectedFrame {
    std::vector<cxd> x_hat;  // data-position decisions (constellation points)
    DetectorKind method = DetectorKind::IMap;
    int iterations_used = 0;
    bool converged = true;
    int zero_correlator_flags = 0;
};

/// Score of one candidate data sequence: equals the log posterior of the
/// sequence given the bracketing channels up to a candidate-independent
/// constant (the Gaussian normalizers do not depend on unit-modulus
/// candidates). Larger is better.
double smap_score(const DetectionInterval& interval, const std::vector<cxd>& candidate);

/// Exhaustive maximum-posterior sequence detection over the constellation
/// product space; ties break toward lexicographically earlier candidates.
/// Throws BudgetExceeded when the constellation^n_d enumeration exceeds the
/// budget (default caps QPSK at n_d = 10).
DetectedFrame smap_detect(const DetectionInterval& interval,
                          std::size_t enumeration_budget = 1u << 20);

/// Two-pilot combining vector for individual detection at position i
/// (1-based within the interval). Throws DegenerateAlpha at alpha = 1 where
/// the limit combiner (h_head + h_tail) / 2 applies instead.
VectorXcd imap_combiner(const VectorXcd& h_head, const VectorXcd& h_tail, int i,
                        int n_d, double alpha);

/// Per-symbol correlate-and-slice detection; positions are decided
/// independently so errors do not propagate along the interval.
DetectedFrame imap_detect(const DetectionInterval& interval);

/// Diversity-detection baseline: MMSE smoothing of the raw pilot
/// observations with the exact pilot-stride correlation matrix, Markov
/// interpolation to every data position, then a zero-forcing decision.
/// Interpolation weights depend only on the layout and noise level and are
/// precomputed once per configuration.
class OddDetector {
  public:
    OddDetector(const FrameLayout& layout, double alpha, double sigma2,
                double sigma_h2 = 1.0);

    /// y is the post-cancellation frame (frame_length x n_r).
    DetectedFrame detect(const MatrixXcd& y, const FrameLayout& layout) const;

    /// Interpolated channel estimate at every frame position (for tests).
    MatrixXcd interpolate_channels(const MatrixXcd& y, const FrameLayout& layout) const;

  private:
    MatrixXd weights_;  // frame_length x n_p, real interpolation weights
};

/// Slice a frame into per-interval detection problems, subtracting the
/// estimated interference from the data observations. h_pilots holds one
/// channel estimate per pilot (n_p x n_r); c_tilde may be empty.
std::vector<DetectionInterval> make_intervals(const FrameObservation& obs,
                                              const MatrixXcd& h_pilots,
                                              const VectorXcd& c_tilde,
                                              double alpha);

struct IterativeOptions {
    int max_iters = 10;
    EstimatorOptions estimator;
};

struct IterativeResult {
    DetectedFrame frame;                       // final decisions
    std::vector<std::vector<cxd>> per_iteration;  // data decisions after each pass
                                                  // (index 0 = initial two-phase pass)
    std::vector<EstimationResult> estimates;   // estimate used for each pass
};

/// Alternating interference cancellation, channel estimation, and
/// re-detection: after the initial two-phase pass, every detected symbol is
/// treated as a pilot (grid = whole frame, stride correlation = alpha) and
/// interior symbols are re-detected from their immediate neighbors.
/// Stops when decisions repeat or max_iters is reached (flagged, not thrown).
IterativeResult iterative_detect(const FrameObservation& obs, double alpha,
                                 const IterativeOptions& opts = {});

}  // namespace ocsim
