#include "ocsim/estimator.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace ocsim {

void PilotBlock::validate() const {
    if (x.size() < 2) throw ConfigError("pilot block needs at least two positions");
    if (y.size() != x.size())
        throw DimensionMismatch("pilot block observation/symbol count mismatch");
    if (!B.empty() && B.size() != x.size())
        throw DimensionMismatch("pilot block interference-matrix count mismatch");
    if (!(alpha_p > 0.0 && alpha_p <= 1.0))
        throw ConfigError("alpha_p must lie in (0, 1]");
    if (!(sigma2 > 0.0)) throw ConfigError("pilot block needs sigma2 > 0");
    for (const cxd& xi : x) {
        if (std::abs(std::abs(xi) - 1.0) > 1e-9)
            throw ConfigError("pilot-grid symbols must have unit modulus");
    }
}

PilotBlock pilot_block(const FrameObservation& obs, double alpha) {
    PilotBlock block;
    block.alpha_p = obs.layout.alpha_p(alpha);
    block.sigma2 = obs.sigma2;
    block.y.reserve(obs.layout.n_p);
    block.x.reserve(obs.layout.n_p);
    const bool with_b = !obs.B.empty();
    for (int i = 0; i < obs.layout.n_p; ++i) {
        const int k = obs.layout.pilot_position(i);
        block.y.push_back(obs.y.row(k).transpose());
        block.x.push_back(obs.x_true.at(k));
        if (with_b) block.B.push_back(obs.B.at(k));
    }
    return block;
}

PilotBlock full_frame_block(const FrameObservation& obs, double alpha,
                            const std::vector<cxd>& detected_data) {
    PilotBlock block;
    block.alpha_p = alpha;  // consecutive symbols, stride one
    block.sigma2 = obs.sigma2;
    const int K = obs.layout.frame_length();
    block.y.reserve(K);
    block.x.reserve(K);
    const bool with_b = !obs.B.empty();
    std::size_t data_idx = 0;
    for (int k = 0; k < K; ++k) {
        block.y.push_back(obs.y.row(k).transpose());
        if (obs.layout.is_pilot(k)) {
            block.x.push_back(obs.x_true.at(k));
        } else {
            block.x.push_back(detected_data.at(data_idx++));
        }
        if (with_b) block.B.push_back(obs.B.at(k));
    }
    if (data_idx != detected_data.size())
        throw DimensionMismatch("detected-symbol count does not match the frame layout");
    return block;
}

ConditionalTable ConditionalTable::build(int n_p, double alpha_p, double rho,
                                         double sigma2) {
    ConditionalTable t;
    t.omega.resize(n_p);
    t.beta_mag.resize(n_p);
    t.sigma2.resize(n_p);
    t.alpha_pow.resize(n_p + 1);
    t.alpha_pow[0] = 1.0;
    for (int d = 1; d <= n_p; ++d) t.alpha_pow[d] = t.alpha_pow[d - 1] * alpha_p;
    t.omega[0] = 1.0;
    t.beta_mag[0] = 0.0;
    t.sigma2[0] = sigma2;
    for (int d = 1; d < n_p; ++d) {
        const double g = 1.0 - t.alpha_pow[d - 1] * t.alpha_pow[d - 1];  // 1 - alpha_p^{2(d-1)}
        const double gd = 1.0 - t.alpha_pow[d] * t.alpha_pow[d];         // 1 - alpha_p^{2d}
        const double denom = 1.0 + rho * g;
        t.omega[d] = t.alpha_pow[d] / denom;
        t.beta_mag[d] = rho * alpha_p * g / denom;
        t.sigma2[d] = sigma2 * (1.0 + rho * gd - rho * rho * alpha_p * alpha_p * g * g / denom);
    }
    return t;
}

ConditionalParams conditional_params(int n, int i, double alpha_p, double rho,
                                     const std::vector<cxd>& pilots,
                                     double sigma2) {
    const int n_p = static_cast<int>(pilots.size());
    if (n < 0 || n >= n_p || i < 0 || i >= n_p)
        throw ConfigError("pilot index out of range");
    const ConditionalTable t = ConditionalTable::build(n_p, alpha_p, rho, sigma2);
    ConditionalParams p;
    const int d = std::abs(n - i);
    p.j = (i < n) ? 1 : (i > n ? -1 : 0);
    p.omega = t.omega[d];
    p.sigma2 = t.sigma2[d];
    p.beta = (d == 0) ? cxd(0.0, 0.0)
                      : pilots[i] * std::conj(pilots[i + p.j]) * t.beta_mag[d];
    return p;
}

namespace {

/// Everything the per-pilot solvers need, accumulated in one sweep over the
/// grid. The scalar path expands A_n = a_n I; the general path keeps the
/// matrix form.
struct Assembly {
    double a_n = 0.0;        // scalar A_n
    MatrixXcd A;             // matrix A_n (general path only)
    VectorXcd v0;            // sum x*_{i,n} Sigma^{-1} y_{i,n}
    MatrixXcd M;             // sum x*_{i,n} Sigma^{-1} B_{i,n}
    MatrixXcd Dsum;          // sum B^H Sigma^{-1} B
    VectorXcd w;             // sum B^H Sigma^{-1} y
};

Assembly assemble(const PilotBlock& block, int n, const ConditionalTable& t,
                  bool general_path) {
    const int n_p = block.n_p();
    const int n_r = block.n_r();
    const int L = block.L();
    const bool with_b = !block.interference_free();

    Assembly a;
    a.a_n = 1.0 / block.sigma_h2;
    a.v0 = VectorXcd::Zero(n_r);
    if (with_b) {
        a.M = MatrixXcd::Zero(n_r, L);
        a.Dsum = MatrixXcd::Zero(L, L);
        a.w = VectorXcd::Zero(L);
    }
    if (general_path) a.A = MatrixXcd::Identity(n_r, n_r) / block.sigma_h2;

    VectorXcd y_in(n_r);
    MatrixXcd B_in;
    if (with_b) B_in.resize(n_r, L);

    for (int i = 0; i < n_p; ++i) {
        const int d = std::abs(n - i);
        const int j = (i < n) ? 1 : (i > n ? -1 : 0);
        const double omega = t.omega[d];
        const double inv_s2 = 1.0 / t.sigma2[d];
        if (d == 0) {
            y_in = block.y[i];
            if (with_b) B_in = block.B[i];
        } else {
            const cxd beta = block.x[i] * std::conj(block.x[i + j]) * t.beta_mag[d];
            y_in = block.y[i] - beta * block.y[i + j];
            if (with_b) B_in = block.B[i] - beta * block.B[i + j];
        }
        const cxd coef = std::conj(omega * block.x[i]) * inv_s2;
        a.a_n += omega * omega * inv_s2;
        a.v0.noalias() += coef * y_in;
        if (general_path)
            a.A.diagonal().array() += omega * omega * inv_s2;
        if (with_b) {
            a.M.noalias() += coef * B_in;
            a.Dsum.noalias() += inv_s2 * (B_in.adjoint() * B_in);
            a.w.noalias() += inv_s2 * (B_in.adjoint() * y_in);
        }
    }
    return a;
}

void check_conditioning(const MatrixXcd& D, const EstimatorOptions& opts,
                        EstimatorWorkspace* ws) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(D, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (ws) {
        ws->d_min_eig = lmin;
        ws->d_max_eig = lmax;
    }
    if (!(lmin > 0.0) || lmax / lmin > opts.max_condition)
        throw IllConditioned("degenerate interference geometry: normal-matrix "
                             "condition beyond " +
                             std::to_string(opts.max_condition));
}

}  // namespace

VectorXcd estimate_eic_per_pilot(const PilotBlock& block, int n,
                                 const EstimatorOptions& opts,
                                 EstimatorWorkspace* ws) {
    block.validate();
    if (block.interference_free())
        throw ConfigError("coupling estimation needs interference matrices");
    const ConditionalTable t =
        ConditionalTable::build(block.n_p(), block.alpha_p, block.rho(), block.sigma2);
    const Assembly a = assemble(block, n, t, !opts.scalar_fast_path);

    MatrixXcd D;
    VectorXcd rhs;
    if (opts.scalar_fast_path) {
        D = a.Dsum - (a.M.adjoint() * a.M) / a.a_n;
        rhs = a.w - (a.M.adjoint() * a.v0) / a.a_n;
    } else {
        Eigen::LDLT<MatrixXcd> a_solver(a.A);
        D = a.Dsum - a.M.adjoint() * a_solver.solve(a.M);
        rhs = a.w - a.M.adjoint() * a_solver.solve(a.v0);
    }
    D = ((D + D.adjoint()) / 2.0).eval();  // keep the solver input Hermitian

    if (ws) {
        ws->a_n = a.a_n;
        if (!opts.scalar_fast_path) ws->A_n = a.A;
        ws->D_n = D;
    }
    check_conditioning(D, opts, ws);
    return Eigen::LDLT<MatrixXcd>(D).solve(rhs);
}

EicEstimate average_eic(const std::vector<VectorXcd>& per_pilot) {
    if (per_pilot.empty()) throw ConfigError("no per-pilot estimates to average");
    EicEstimate est;
    est.per_pilot = per_pilot;
    est.c_tilde = VectorXcd::Zero(per_pilot[0].size());
    for (const auto& c : per_pilot) est.c_tilde += c;
    est.c_tilde /= static_cast<double>(per_pilot.size());
    const std::size_t n = per_pilot.size();
    if (n > 1) {
        double spread = 0.0;
        for (const auto& c : per_pilot) spread += (c - est.c_tilde).squaredNorm();
        est.residual_power_estimate = spread / (static_cast<double>(n) *
                                                static_cast<double>(n - 1));
    }
    return est;
}

ChannelEstimateSet cancel_and_estimate_channels(const PilotBlock& block,
                                                const VectorXcd& c_tilde,
                                                const EstimatorOptions& opts) {
    block.validate();
    const bool subtract = !block.interference_free() && c_tilde.size() > 0;
    const ConditionalTable t =
        ConditionalTable::build(block.n_p(), block.alpha_p, block.rho(), block.sigma2);

    ChannelEstimateSet set;
    set.h_tilde.resize(block.n_p(), block.n_r());
    for (int n = 0; n < block.n_p(); ++n) {
        const Assembly a = assemble(block, n, t, !opts.scalar_fast_path);
        VectorXcd num = a.v0;
        if (subtract) num -= a.M * c_tilde;
        if (opts.scalar_fast_path) {
            set.h_tilde.row(n) = (num / a.a_n).transpose();
        } else {
            set.h_tilde.row(n) = Eigen::LDLT<MatrixXcd>(a.A).solve(num).transpose();
        }
    }
    if (!set.h_tilde.allFinite())
        throw IllConditioned("channel estimate is not finite");
    return set;
}

EstimationResult estimate_frame(const PilotBlock& block, const EstimatorOptions& opts) {
    block.validate();
    EstimationResult result;
    const ConditionalTable t =
        ConditionalTable::build(block.n_p(), block.alpha_p, block.rho(), block.sigma2);
    const bool with_b = !block.interference_free();
    const int n_p = block.n_p();

    std::vector<double> a_n(n_p);
    std::vector<VectorXcd> v0(n_p);
    std::vector<MatrixXcd> M(n_p);
    std::vector<VectorXcd> per_pilot;
    if (opts.collect_diagnostics) result.workspaces.resize(n_p);

    for (int n = 0; n < n_p; ++n) {
        Assembly a = assemble(block, n, t, !opts.scalar_fast_path);
        a_n[n] = a.a_n;
        v0[n] = std::move(a.v0);
        if (with_b) {
            MatrixXcd D;
            VectorXcd rhs;
            if (opts.scalar_fast_path) {
                D = a.Dsum - (a.M.adjoint() * a.M) / a.a_n;
                rhs = a.w - (a.M.adjoint() * v0[n]) / a.a_n;
            } else {
                Eigen::LDLT<MatrixXcd> a_solver(a.A);
                D = a.Dsum - a.M.adjoint() * a_solver.solve(a.M);
                rhs = a.w - a.M.adjoint() * a_solver.solve(v0[n]);
            }
            D = ((D + D.adjoint()) / 2.0).eval();
            EstimatorWorkspace* ws =
                opts.collect_diagnostics ? &result.workspaces[n] : nullptr;
            if (ws) {
                ws->a_n = a.a_n;
                ws->D_n = D;
            }
            check_conditioning(D, opts, ws);
            per_pilot.push_back(Eigen::LDLT<MatrixXcd>(D).solve(rhs));
            M[n] = std::move(a.M);
        }
    }

    if (with_b) result.eic = average_eic(per_pilot);

    result.channels.h_tilde.resize(n_p, block.n_r());
    for (int n = 0; n < n_p; ++n) {
        VectorXcd num = v0[n];
        if (with_b) num -= M[n] * result.eic.c_tilde;
        result.channels.h_tilde.row(n) = (num / a_n[n]).transpose();
    }
    if (!result.channels.h_tilde.allFinite())
        throw IllConditioned("channel estimate is not finite");
    return result;
}

double pilot_joint_loglik(const PilotBlock& block, int n, const VectorXcd& h,
                          const VectorXcd& c) {
    const int n_p = block.n_p();
    const bool with_b = !block.interference_free();
    const ConditionalTable t =
        ConditionalTable::build(n_p, block.alpha_p, block.rho(), block.sigma2);

    double ll = -h.squaredNorm() / block.sigma_h2;
    for (int i = 0; i < n_p; ++i) {
        const int d = std::abs(n - i);
        const int j = (i < n) ? 1 : (i > n ? -1 : 0);
        VectorXcd mu = t.alpha_pow[d] * block.x[i] * h;
        if (with_b) mu += block.B[i] * c;
        if (d > 0) {
            const cxd beta = block.x[i] * std::conj(block.x[i + j]) * t.beta_mag[d];
            VectorXcd nbr = block.y[i + j] - t.alpha_pow[d - 1] * block.x[i + j] * h;
            if (with_b) nbr -= block.B[i + j] * c;
            mu += beta * nbr;
        }
        ll -= (block.y[i] - mu).squaredNorm() / t.sigma2[d];
    }
    return ll;
}

StationarityReport verify_estimator_stationarity(const PilotBlock& block, int n,
                                                 const VectorXcd& h_tilde,
                                                 const VectorXcd& c_tilde,
                                                 Rng& rng, double rel_tol) {
    const int n_r = static_cast<int>(h_tilde.size());
    const int L = static_cast<int>(c_tilde.size());
    const int dim = 2 * (n_r + L);

    auto eval = [&](const VectorXd& theta) {
        VectorXcd h(n_r), c(L);
        for (int r = 0; r < n_r; ++r) h(r) = cxd(theta(2 * r), theta(2 * r + 1));
        for (int l = 0; l < L; ++l)
            c(l) = cxd(theta(2 * n_r + 2 * l), theta(2 * n_r + 2 * l + 1));
        return pilot_joint_loglik(block, n, h, c);
    };
    auto pack = [&](const VectorXcd& h, const VectorXcd& c) {
        VectorXd theta(dim);
        for (int r = 0; r < n_r; ++r) {
            theta(2 * r) = h(r).real();
            theta(2 * r + 1) = h(r).imag();
        }
        for (int l = 0; l < L; ++l) {
            theta(2 * n_r + 2 * l) = c(l).real();
            theta(2 * n_r + 2 * l + 1) = c(l).imag();
        }
        return theta;
    };
    auto fd_gradient = [&](const VectorXd& theta) {
        VectorXd g(dim);
        for (int q = 0; q < dim; ++q) {
            const double step = 1e-6 * (1.0 + std::abs(theta(q)));
            VectorXd tp = theta, tm = theta;
            tp(q) += step;
            tm(q) -= step;
            g(q) = (eval(tp) - eval(tm)) / (2.0 * step);
        }
        return g;
    };

    const VectorXd at_opt = pack(h_tilde, c_tilde);
    StationarityReport report;
    report.grad_norm = fd_gradient(at_opt).norm();
    // reference gradient magnitude a fixed distance away from the candidate
    VectorXd displaced = at_opt;
    displaced.array() += 0.1;
    report.grad_scale = fd_gradient(displaced).norm() + 1.0;

    const double ll_opt = eval(at_opt);
    for (int trial = 0; trial < 20; ++trial) {
        VectorXd dir(dim);
        for (int q = 0; q < dim; ++q) dir(q) = rng.normal();
        dir *= 1e-3 / dir.norm();
        if (eval(at_opt + dir) >= ll_opt) {
            report.local_max = false;
            break;
        }
    }

    if (report.grad_norm > rel_tol * report.grad_scale || !report.local_max)
        throw StationarityViolation(
            "estimator output is not a stationary maximum of the joint likelihood");
    return report;
}

}  // namespace ocsim
