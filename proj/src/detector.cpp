#include "ocsim/detector.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace ocsim {

std::string detector_name(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::SMap: return "smap";
        case DetectorKind::IMap: return "imap";
        case DetectorKind::Odd: return "odd";
        case DetectorKind::Iterative: return "iterative";
    }
    return "unknown";
}

void DetectionInterval::validate() const {
    if (n_d() < 1) throw ConfigError("detection interval needs at least one symbol");
    if (h_head.size() != y.cols() || h_tail.size() != y.cols())
        throw DimensionMismatch("bracketing channel estimates do not match the antenna count");
    if (!h_head.allFinite() || !h_tail.allFinite())
        throw ConfigError("bracketing channel estimates must be finite");
    if (!(sigma2 > 0.0)) throw ConfigError("detection needs sigma2 > 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
}

namespace {

/// Candidate-independent recursion state for series scoring. With a
/// unit-modulus constellation the per-position Gaussian widths s_i do not
/// depend on the candidate, so their determinants drop out of the argmax.
struct SeriesRecursion {
    double tau1 = 0.0;
    double tau2 = 0.0;
    std::vector<double> s;  // s_i, i = 1..n_d (index 0 unused)

    static SeriesRecursion build(const DetectionInterval& iv) {
        SeriesRecursion r;
        r.tau1 = 1.0 / ((1.0 - iv.alpha * iv.alpha) * iv.sigma_h2);
        r.tau2 = iv.alpha * r.tau1;
        const double diag = 1.0 / iv.sigma2 + (1.0 + iv.alpha * iv.alpha) * r.tau1;
        r.s.assign(iv.n_d() + 1, 0.0);
        for (int i = 1; i <= iv.n_d(); ++i) {
            const double s_inv = diag - (i > 1 ? r.tau2 * r.tau2 * r.s[i - 1] : 0.0);
            if (!(s_inv > 0.0))
                throw RecursionBreakdown("series recursion lost positive definiteness");
            r.s[i] = 1.0 / s_inv;
        }
        return r;
    }
};

/// Exact-match scoring in the alpha = 1 limit: the channel is constant over
/// the interval, so the sequence posterior collapses to a matched filter
/// against the (known) bracketing estimate.
double degenerate_score(const DetectionInterval& iv, const std::vector<cxd>& candidate) {
    const VectorXcd h = (iv.h_head + iv.h_tail) / 2.0;
    double score = 0.0;
    for (int i = 0; i < iv.n_d(); ++i) {
        score -= (iv.y.row(i).transpose() - h * candidate[i]).squaredNorm() / iv.sigma2;
    }
    return score;
}

void check_candidate(const DetectionInterval& iv, const std::vector<cxd>& candidate) {
    if (static_cast<int>(candidate.size()) != iv.n_d())
        throw DimensionMismatch("candidate length does not match the interval");
    for (const cxd& x : candidate) {
        if (std::abs(std::abs(x) - 1.0) > 1e-9)
            throw ConfigError("series scoring requires unit-modulus candidates");
    }
}

}  // namespace

double smap_score(const DetectionInterval& interval, const std::vector<cxd>& candidate) {
    interval.validate();
    check_candidate(interval, candidate);
    if (interval.alpha == 1.0) return degenerate_score(interval, candidate);

    const SeriesRecursion rec = SeriesRecursion::build(interval);
    const int n_d = interval.n_d();
    double score = 0.0;
    VectorXcd v = rec.tau2 * interval.h_head;
    for (int i = 1; i <= n_d; ++i) {
        if (i > 1) v = (rec.tau2 * rec.s[i - 1]) * v;
        v += (std::conj(candidate[i - 1]) / interval.sigma2) *
             interval.y.row(i - 1).transpose();
        if (i == n_d) {
            score += rec.s[i] * (v + rec.tau2 * interval.h_tail).squaredNorm();
        } else {
            score += rec.s[i] * v.squaredNorm();
        }
    }
    return score;
}

DetectedFrame smap_detect(const DetectionInterval& interval, std::size_t enumeration_budget) {
    interval.validate();
    const auto& pts = qpsk_constellation();
    const int n_d = interval.n_d();
    double cand_count = std::pow(static_cast<double>(pts.size()), n_d);
    if (cand_count > static_cast<double>(enumeration_budget))
        throw BudgetExceeded("series enumeration of " + std::to_string(cand_count) +
                             " candidates exceeds the budget; use individual detection");

    DetectedFrame out;
    out.method = DetectorKind::SMap;
    out.x_hat.assign(n_d, pts[0]);

    if (interval.alpha == 1.0) {
        // constant-channel limit: positions decouple, slice independently
        const VectorXcd h = (interval.h_head + interval.h_tail) / 2.0;
        for (int i = 0; i < n_d; ++i) {
            const cxd z = h.dot(interval.y.row(i).transpose());
            out.x_hat[i] = pts[nearest_constellation_index(z, pts)];
        }
        return out;
    }

    const SeriesRecursion rec = SeriesRecursion::build(interval);
    std::vector<cxd> current(n_d);
    double best = -std::numeric_limits<double>::infinity();

    // depth-first enumeration in lexicographic candidate order; the partial
    // state v and score are extended one position at a time, so ties keep
    // the earliest candidate
    std::function<void(int, const VectorXcd&, double)> dfs =
        [&](int i, const VectorXcd& v_prev, double partial) {
            const int idx = i - 1;
            for (const cxd& p : pts) {
                VectorXcd v = (i > 1) ? VectorXcd((rec.tau2 * rec.s[i - 1]) * v_prev)
                                      : v_prev;
                v += (std::conj(p) / interval.sigma2) *
                     interval.y.row(idx).transpose();
                current[idx] = p;
                double term;
                if (i == interval.n_d()) {
                    term = rec.s[i] * (v + rec.tau2 * interval.h_tail).squaredNorm();
                    const double total = partial + term;
                    if (total > best) {
                        best = total;
                        out.x_hat = current;
                    }
                } else {
                    term = rec.s[i] * v.squaredNorm();
                    dfs(i + 1, v, partial + term);
                }
            }
        };
    dfs(1, rec.tau2 * interval.h_head, 0.0);
    return out;
}

VectorXcd imap_combiner(const VectorXcd& h_head, const VectorXcd& h_tail, int i,
                        int n_d, double alpha) {
    if (i < 1 || i > n_d) throw ConfigError("combiner position out of range");
    if (alpha >= 1.0)
        throw DegenerateAlpha("combiner weights diverge at alpha = 1; use the "
                              "averaged-pilot limit");
    const int j = n_d + 1 - i;
    const double wh = std::pow(alpha, i) / (1.0 - std::pow(alpha, 2 * i));
    const double wt = std::pow(alpha, j) / (1.0 - std::pow(alpha, 2 * j));
    return wh * h_head + wt * h_tail;
}

DetectedFrame imap_detect(const DetectionInterval& interval) {
    interval.validate();
    const auto& pts = qpsk_constellation();
    DetectedFrame out;
    out.method = DetectorKind::IMap;
    out.x_hat.resize(interval.n_d());
    for (int i = 1; i <= interval.n_d(); ++i) {
        const VectorXcd h =
            interval.alpha == 1.0
                ? VectorXcd((interval.h_head + interval.h_tail) / 2.0)
                : imap_combiner(interval.h_head, interval.h_tail, i,
                                interval.n_d(), interval.alpha);
        const cxd z = h.dot(interval.y.row(i - 1).transpose());
        if (z == cxd(0.0, 0.0)) {
            out.x_hat[i - 1] = pts[0];
            ++out.zero_correlator_flags;
            continue;
        }
        out.x_hat[i - 1] = pts[nearest_constellation_index(z / std::abs(z), pts)];
    }
    return out;
}

OddDetector::OddDetector(const FrameLayout& layout, double alpha, double sigma2,
                         double sigma_h2) {
    layout.validate();
    const int n_p = layout.n_p;
    const int K = layout.frame_length();
    const double alpha_p = layout.alpha_p(alpha);

    MatrixXd R(n_p, n_p);
    for (int m = 0; m < n_p; ++m)
        for (int k = 0; k < n_p; ++k)
            R(m, k) = sigma_h2 * std::pow(alpha_p, std::abs(m - k));
    R.diagonal().array() += sigma2;

    Eigen::LDLT<MatrixXd> solver(R);
    if (solver.info() != Eigen::Success)
        throw SingularInterpolation("pilot correlation matrix solve failed");

    weights_.resize(K, n_p);
    VectorXd r(n_p);
    for (int t = 0; t < K; ++t) {
        for (int m = 0; m < n_p; ++m)
            r(m) = sigma_h2 * std::pow(alpha, std::abs(t - layout.pilot_position(m)));
        weights_.row(t) = solver.solve(r).transpose();
    }
    if (!weights_.allFinite())
        throw SingularInterpolation("pilot interpolation weights are not finite");
}

MatrixXcd OddDetector::interpolate_channels(const MatrixXcd& y,
                                            const FrameLayout& layout) const {
    const int n_p = layout.n_p;
    const int n_r = static_cast<int>(y.cols());
    if (y.rows() != layout.frame_length())
        throw DimensionMismatch("frame length does not match the layout");
    // rotate pilot observations by the known pilot phases
    MatrixXcd z(n_p, n_r);
    for (int m = 0; m < n_p; ++m)
        z.row(m) = y.row(layout.pilot_position(m)) * std::conj(layout.pilot_value(m));
    return weights_.cast<cxd>() * z;
}

DetectedFrame OddDetector::detect(const MatrixXcd& y, const FrameLayout& layout) const {
    const auto& pts = qpsk_constellation();
    const MatrixXcd h_int = interpolate_channels(y, layout);
    DetectedFrame out;
    out.method = DetectorKind::Odd;
    out.x_hat.reserve(layout.frame_length() - layout.n_p);
    for (int k = 0; k < layout.frame_length(); ++k) {
        if (layout.is_pilot(k)) continue;
        const VectorXcd h = h_int.row(k).transpose();
        const double norm2 = h.squaredNorm();
        const cxd z = h.dot(y.row(k).transpose());
        if (norm2 == 0.0 || z == cxd(0.0, 0.0)) {
            out.x_hat.push_back(pts[0]);
            ++out.zero_correlator_flags;
            continue;
        }
        out.x_hat.push_back(pts[nearest_constellation_index(z / norm2, pts)]);
    }
    return out;
}

std::vector<DetectionInterval> make_intervals(const FrameObservation& obs,
                                              const MatrixXcd& h_pilots,
                                              const VectorXcd& c_tilde,
                                              double alpha) {
    const FrameLayout& layout = obs.layout;
    if (h_pilots.rows() != layout.n_p)
        throw DimensionMismatch("one channel estimate per pilot is required");
    const bool subtract = !obs.B.empty() && c_tilde.size() > 0;
    std::vector<DetectionInterval> out;
    if (layout.n_d == 0) return out;
    out.reserve(layout.n_p - 1);
    for (int p = 0; p + 1 < layout.n_p; ++p) {
        DetectionInterval iv;
        iv.h_head = h_pilots.row(p).transpose();
        iv.h_tail = h_pilots.row(p + 1).transpose();
        iv.alpha = alpha;
        iv.sigma2 = obs.sigma2;
        iv.y.resize(layout.n_d, obs.y.cols());
        const int base = layout.pilot_position(p) + 1;
        for (int i = 0; i < layout.n_d; ++i) {
            VectorXcd row = obs.y.row(base + i).transpose();
            if (subtract) row -= obs.B[base + i] * c_tilde;
            iv.y.row(i) = row.transpose();
        }
        out.push_back(std::move(iv));
    }
    return out;
}

IterativeResult iterative_detect(const FrameObservation& obs, double alpha,
                                 const IterativeOptions& opts) {
    IterativeResult result;
    const FrameLayout& layout = obs.layout;
    const auto& pts = qpsk_constellation();
    const bool with_b = !obs.B.empty();

    // initial two-phase pass: pilot-grid estimation + individual detection
    PilotBlock pblock = pilot_block(obs, alpha);
    EstimationResult est0 = estimate_frame(pblock, opts.estimator);
    std::vector<cxd> detected;
    {
        const auto intervals =
            make_intervals(obs, est0.channels.h_tilde, est0.eic.c_tilde, alpha);
        detected.reserve(intervals.size() * layout.n_d);
        for (const auto& iv : intervals) {
            const DetectedFrame slice = imap_detect(iv);
            detected.insert(detected.end(), slice.x_hat.begin(), slice.x_hat.end());
        }
    }
    result.per_iteration.push_back(detected);
    result.estimates.push_back(std::move(est0));

    bool converged = false;
    int iterations = 0;
    const double prefactor = alpha < 1.0 ? alpha / (1.0 - alpha * alpha) : 0.5;
    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        // every decided symbol now acts as a pilot on a stride-one grid
        PilotBlock whole = full_frame_block(obs, alpha, detected);
        EstimationResult est = estimate_frame(whole, opts.estimator);

        std::vector<cxd> next;
        next.reserve(detected.size());
        for (int k = 0; k < layout.frame_length(); ++k) {
            if (layout.is_pilot(k)) continue;
            VectorXcd h = prefactor * (est.channels.h_tilde.row(k - 1).transpose() +
                                       est.channels.h_tilde.row(k + 1).transpose());
            VectorXcd yk = obs.y.row(k).transpose();
            if (with_b && est.eic.c_tilde.size() > 0) yk -= obs.B[k] * est.eic.c_tilde;
            const cxd z = h.dot(yk);
            next.push_back(pts[nearest_constellation_index(z, pts)]);
        }

        result.per_iteration.push_back(next);
        result.estimates.push_back(std::move(est));
        iterations = iter;
        if (next == detected) {
            converged = true;
            break;
        }
        detected = std::move(next);
    }

    result.frame.method = DetectorKind::Iterative;
    result.frame.x_hat = result.per_iteration.back();
    result.frame.iterations_used = iterations;
    result.frame.converged = converged;
    return result;
}

}  // namespace ocsim
