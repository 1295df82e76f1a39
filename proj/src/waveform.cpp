#include "ocsim/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace ocsim {

namespace {

/// Unnormalized root-raised-cosine impulse response (peak at t = 0 is
/// 1 + roll_off (4/pi - 1)). The two removable singularities are replaced
/// by their analytic limits.
double rrc_raw(double t, double T, double beta) {
    const double x = t / T;
    if (std::abs(x) < 1e-12) {
        return 1.0 + beta * (4.0 / M_PI - 1.0);
    }
    if (beta > 0.0) {
        const double sing = T / (4.0 * beta);
        if (std::abs(std::abs(t) - sing) < 1e-10 * T) {
            const double a = M_PI / (4.0 * beta);
            return (beta / std::sqrt(2.0)) *
                   ((1.0 + 2.0 / M_PI) * std::sin(a) + (1.0 - 2.0 / M_PI) * std::cos(a));
        }
    }
    const double num = std::sin(M_PI * x * (1.0 - beta)) +
                       4.0 * beta * x * std::cos(M_PI * x * (1.0 + beta));
    const double den = M_PI * x * (1.0 - 16.0 * beta * beta * x * x);
    return num / den;
}

}  // namespace

void PulseShape::validate() const {
    if (!(roll_off >= 0.0 && roll_off <= 1.0))
        throw ConfigError("pulse roll_off must lie in [0, 1]");
    if (!(symbol_period > 0.0))
        throw ConfigError("pulse symbol_period must be positive");
    if (span < 1)
        throw ConfigError("pulse span must be at least one symbol period");
}

double eval_pulse(const PulseShape& shape, double t) {
    shape.validate();
    if (!std::isfinite(t)) throw ConfigError("pulse argument must be finite");
    const double T = shape.symbol_period;
    if (std::abs(t) > shape.span * T) return 0.0;
    switch (shape.kind) {
        case PulseKind::Rectangular:
            return std::abs(t) <= 0.5 * T ? 1.0 : 0.0;
        case PulseKind::RootRaisedCosine:
            return rrc_raw(t, T, shape.roll_off) / rrc_raw(0.0, T, shape.roll_off);
    }
    return 0.0;
}

void AlignmentConfig::validate() const {
    if (bandwidth_ratio < 1) throw ConfigError("bandwidth_ratio must be >= 1");
    if (interferer_span < bandwidth_ratio || interferer_span % bandwidth_ratio != 0)
        throw ConfigError("interferer_span must be a positive multiple of bandwidth_ratio");
}

namespace {

std::string eic_config_fingerprint(const PulseShape& p_d, const PulseShape& p_i,
                                   const AlignmentConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << static_cast<int>(p_d.kind) << ',' << p_d.roll_off << ',' << p_d.symbol_period
       << ',' << p_d.span << '|' << static_cast<int>(p_i.kind) << ',' << p_i.roll_off
       << ',' << p_i.symbol_period << ',' << p_i.span << '|' << cfg.bandwidth_ratio
       << ',' << cfg.interferer_span << ',' << cfg.freq_offset << ',' << cfg.time_offset
       << ',' << cfg.sample_offset << ',' << cfg.phase_desired << ',' << cfg.phase_interf;
    std::ostringstream hex;
    hex << std::hex << fnv1a(os.str());
    return hex.str();
}

/// Composite Simpson rule for the complex integrand over [a, b].
cxd simpson(const std::function<cxd(double)>& f, double a, double b, int intervals) {
    const double h = (b - a) / intervals;
    cxd acc = f(a) + f(b);
    for (int j = 1; j < intervals; ++j) {
        acc += f(a + j * h) * (j % 2 == 1 ? 4.0 : 2.0);
    }
    return acc * (h / 3.0);
}

}  // namespace

EicVector compute_eic(const PulseShape& p_d, const PulseShape& p_i,
                      const AlignmentConfig& cfg, int symbol_index,
                      const QuadratureOptions& quad) {
    p_d.validate();
    p_i.validate();
    cfg.validate();

    const int M = cfg.bandwidth_ratio;
    const int L = cfg.interferer_span;
    const double T_d = p_d.symbol_period;
    const double T_i = p_i.symbol_period;
    if (std::abs(T_i * M - T_d) > 1e-9 * T_d)
        throw ConfigError("interferer symbol period must equal T_d / bandwidth_ratio");
    const int k = symbol_index;

    const double sample_time = k * T_d + cfg.sample_offset;
    const double support_d_lo = sample_time - p_d.span * T_d;
    const double support_d_hi = sample_time + p_d.span * T_d;
    const cxd jphase = cxd(0.0, cfg.phase_interf + cfg.phase_desired);
    const double two_pi_df = 2.0 * M_PI * cfg.freq_offset;

    EicVector out;
    out.c = VectorXcd::Zero(L);
    out.config_hash = eic_config_fingerprint(p_d, p_i, cfg);

    for (int l = 1; l <= L; ++l) {
        const double center_i = (M * k + l) * T_i + cfg.time_offset;
        const double lo = std::max(support_d_lo, center_i - p_i.span * T_i);
        const double hi = std::min(support_d_hi, center_i + p_i.span * T_i);
        if (lo >= hi) continue;  // disjoint supports: coefficient is zero

        auto integrand = [&](double tau) -> cxd {
            const double gd = eval_pulse(p_d, sample_time - tau);
            if (gd == 0.0) return cxd(0.0, 0.0);
            const double gi = eval_pulse(p_i, tau - center_i);
            if (gi == 0.0) return cxd(0.0, 0.0);
            return gd * gi * std::exp(cxd(0.0, -two_pi_df * tau) + jphase);
        };

        const double h0 = T_d / quad.initial_step_divisor;
        int intervals = static_cast<int>(std::ceil((hi - lo) / h0));
        intervals += intervals % 2;  // Simpson needs an even count
        intervals = std::max(intervals, 2);

        cxd prev = simpson(integrand, lo, hi, intervals);
        bool converged = false;
        for (int r = 0; r < quad.max_refinements; ++r) {
            intervals *= 2;
            const cxd cur = simpson(integrand, lo, hi, intervals);
            if (std::abs(cur - prev) < quad.tolerance) {
                prev = cur;
                converged = true;
                break;
            }
            prev = cur;
        }
        if (!converged)
            throw QuadratureNonConvergence(
                "coupling-coefficient quadrature did not settle within tolerance");
        out.c(l - 1) = prev;
    }
    if (!out.c.allFinite())
        throw QuadratureNonConvergence("coupling coefficients are not finite");
    return out;
}

std::string EicVector::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"c\":[";
    for (int l = 0; l < c.size(); ++l) {
        if (l) os << ',';
        os << '[' << c(l).real() << ',' << c(l).imag() << ']';
    }
    os << "],\"config_hash\":\"" << config_hash << "\"}";
    return os.str();
}

MatrixXcd build_interference_matrix(const InterferenceSource& src, int k, int L, int M) {
    const long first = static_cast<long>(M) * k;  // stream index of b_{Mk+1}, zero-based
    if (first < 0 || first + L > static_cast<long>(src.symbols.size()))
        throw SymbolStreamExhausted("interfering symbol buffer too short for index " +
                                    std::to_string(k));
    MatrixXcd B(src.h_i.size(), L);
    for (int l = 0; l < L; ++l) {
        B.col(l) = src.h_i * (src.symbols[first + l] * src.power_scale);
    }
    return B;
}

VectorXcd synthesize_interference(const MatrixXcd& B_k, const EicVector& c) {
    if (B_k.cols() != c.c.size())
        throw DimensionMismatch("interference matrix has " + std::to_string(B_k.cols()) +
                                " columns but the coupling vector has " +
                                std::to_string(c.c.size()) + " entries");
    return B_k * c.c;
}

}  // namespace ocsim
