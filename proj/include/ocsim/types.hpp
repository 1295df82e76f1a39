#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ocsim {

using cxd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// QPSK constellation {1, j, -1, -j}, indexed counterclockwise from the
/// positive real axis. All points have unit modulus.
inline const std::vector<cxd>& qpsk_constellation() {
    static const std::vector<cxd> pts = {
        cxd(1.0, 0.0), cxd(0.0, 1.0), cxd(-1.0, 0.0), cxd(0.0, -1.0)};
    return pts;
}

/// Nearest constellation point by maximum correlation Re(z * conj(p)).
/// Ties resolve to the lowest constellation index.
inline int nearest_constellation_index(cxd z, const std::vector<cxd>& pts) {
    int best = 0;
    double best_metric = std::real(z * std::conj(pts[0]));
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double m = std::real(z * std::conj(pts[i]));
        if (m > best_metric + 1e-15 * (1.0 + std::abs(best_metric))) {
            best_metric = m;
            best = static_cast<int>(i);
        }
    }
    return best;
}

/// FNV-1a over a byte string; used for config fingerprints.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace ocsim
