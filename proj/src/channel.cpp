#include "ocsim/channel.hpp"

#include <cmath>
#include <sstream>

namespace ocsim {

void FadingParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("alpha must lie in (0, 1]");
    if (!(sigma_h2 > 0.0)) throw ConfigError("sigma_h2 must be positive");
    if (n_r < 1) throw ConfigError("n_r must be at least 1");
    if (!(sigma2 >= 0.0)) throw ConfigError("sigma2 must be nonnegative");
}

double FrameLayout::alpha_p(double alpha) const {
    return std::pow(alpha, n_d + 1);
}

cxd FrameLayout::pilot_value(int i) const {
    if (pilot_symbols.empty()) return cxd(1.0, 0.0);
    return pilot_symbols.at(i);
}

void FrameLayout::validate() const {
    if (n_p < 2) throw ConfigError("a frame needs at least two pilots");
    if (n_d < 0) throw ConfigError("n_d must be nonnegative");
    if (!pilot_symbols.empty()) {
        if (static_cast<int>(pilot_symbols.size()) != n_p)
            throw ConfigError("pilot_symbols must have n_p entries");
        for (const cxd& p : pilot_symbols) {
            if (std::abs(std::abs(p) - 1.0) > 1e-12)
                throw ConfigError("pilot symbols must have unit modulus");
        }
    }
}

bool FrameObservation::interference_free() const {
    if (B.empty()) return true;
    for (const auto& m : B) {
        if (m.size() != 0 && m.cwiseAbs().maxCoeff() > 0.0) return false;
    }
    return true;
}

ChannelTrace evolve_channel(const FadingParams& params, int length, Rng& rng) {
    params.validate();
    if (length < 1) throw ConfigError("trace length must be at least 1");
    ChannelTrace trace;
    trace.h.resize(length, params.n_r);
    trace.h.row(0) = rng.cnormal_vector(params.n_r, params.sigma_h2).transpose();
    const double w = std::sqrt(1.0 - params.alpha * params.alpha);
    for (int k = 1; k < length; ++k) {
        // stationary update keeps the per-antenna variance at sigma_h2
        trace.h.row(k) = params.alpha * trace.h.row(k - 1) +
                         w * rng.cnormal_vector(params.n_r, params.sigma_h2).transpose();
    }
    return trace;
}

std::vector<cxd> generate_frame(const FrameLayout& layout, Rng& rng) {
    layout.validate();
    std::vector<cxd> x(layout.frame_length());
    int pilot_index = 0;
    for (int k = 0; k < layout.frame_length(); ++k) {
        if (layout.is_pilot(k)) {
            x[k] = layout.pilot_value(pilot_index++);
        } else {
            x[k] = rng.qpsk();
        }
    }
    return x;
}

FrameObservation synthesize_observations(const std::vector<cxd>& symbols,
                                         const ChannelTrace& trace,
                                         const std::vector<MatrixXcd>& B,
                                         const VectorXcd& c, double sigma2,
                                         Rng& rng) {
    const int K = static_cast<int>(symbols.size());
    if (trace.h.rows() != K)
        throw DimensionMismatch("channel trace length does not match the frame");
    if (!B.empty() && static_cast<int>(B.size()) != K)
        throw DimensionMismatch("interference matrix count does not match the frame");
    const int n_r = static_cast<int>(trace.h.cols());

    FrameObservation obs;
    obs.y.resize(K, n_r);
    obs.x_true = symbols;
    obs.B = B;
    obs.c_true = c;
    obs.trace = trace;
    obs.sigma2 = sigma2;
    for (int k = 0; k < K; ++k) {
        VectorXcd yk = trace.h.row(k).transpose() * symbols[k];
        if (!B.empty()) {
            if (B[k].cols() != c.size())
                throw DimensionMismatch("interference matrix/coupling size mismatch");
            yk += B[k] * c;
        }
        yk += rng.cnormal_vector(n_r, sigma2);
        obs.y.row(k) = yk.transpose();
    }
    return obs;
}

std::string FrameObservation::to_json() const {
    std::ostringstream os;
    os.precision(17);
    auto emit_vec = [&os](const VectorXcd& v) {
        os << '[';
        for (int i = 0; i < v.size(); ++i) {
            if (i) os << ',';
            os << '[' << v(i).real() << ',' << v(i).imag() << ']';
        }
        os << ']';
    };
    os << "{\"y\":[";
    for (int k = 0; k < y.rows(); ++k) {
        if (k) os << ',';
        VectorXcd row = y.row(k).transpose();
        emit_vec(row);
    }
    os << "],\"x_true\":";
    VectorXcd xt = Eigen::Map<const VectorXcd>(x_true.data(), x_true.size());
    emit_vec(xt);
    os << ",\"c\":";
    emit_vec(c_true);
    os << ",\"n_p\":" << layout.n_p << ",\"n_d\":" << layout.n_d
       << ",\"sigma2\":" << sigma2 << '}';
    return os.str();
}

}  // namespace ocsim
