// SPDX-License-Identifier: Apache-2.0

#include "hmasim/link_optimizer.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "hmasim/rng.hpp"

namespace hmasim {

namespace {

constexpr double kFreeSpaceImpedance = 377.0;  // ohm
constexpr double kLog2E = std::numbers::log2e;

double log2_1p(double x) { return std::log1p(x) * kLog2E; }

}  // namespace

Eigen::VectorXd per_cell_incident_power(const ChannelRealization& chan,
                                        double p_t, double a_uc) {
  const double scale = p_t * a_uc / (2.0 * kFreeSpaceImpedance);
  Eigen::VectorXd p_in(chan.h.rows());
  for (Eigen::Index n = 0; n < chan.h.rows(); ++n) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < chan.h.cols(); ++k) {
      acc += std::norm(chan.h(n, k));
    }
    p_in[n] = scale * acc;
  }
  return p_in;
}

Eigen::VectorXd combined_sinr(const Eigen::MatrixXcd& total_combiner,
                              const Eigen::MatrixXcd& h,
                              const Eigen::MatrixXd& sigma_rx, double rho,
                              double sigma2_ant, double sigma2_port,
                              const Eigen::MatrixXcd& w_d,
                              double sigma2_chain) {
  const Eigen::Index k_users = h.cols();
  if (total_combiner.cols() != h.rows() || total_combiner.rows() != k_users ||
      w_d.rows() != k_users) {
    throw std::invalid_argument("combined_sinr: dimension mismatch");
  }
  const Eigen::MatrixXcd effective = total_combiner * h;  // K x K
  Eigen::VectorXd gamma(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    const double signal = rho * std::norm(effective(k, k));
    double interference = 0.0;
    for (Eigen::Index j = 0; j < k_users; ++j) {
      if (j != k) interference += rho * std::norm(effective(k, j));
    }
    const Eigen::RowVectorXcd row = total_combiner.row(k);
    const double colored =
        sigma2_ant * (row * sigma_rx * row.adjoint()).value().real();
    const double port_white = sigma2_port * row.squaredNorm();
    const double chain_white = sigma2_chain * w_d.row(k).squaredNorm();
    const double denom = interference + colored + port_white + chain_white;
    if (denom <= 0.0) {
      throw std::runtime_error("combined_sinr: degenerate combiner row");
    }
    gamma[k] = signal / denom;
  }
  return gamma;
}

Eigen::VectorXd evaluate_sinr(const LinkState& state) {
  if (state.hma == nullptr || state.chan == nullptr || state.noise == nullptr) {
    throw std::invalid_argument("evaluate_sinr: incomplete link state");
  }
  const Eigen::MatrixXcd g_total = state.w_d * rwd_combiner(*state.hma);
  return combined_sinr(g_total, state.chan->h, state.chan->sigma_rx, state.p_t,
                       state.noise->sigma2_ant, 0.0, state.w_d,
                       state.noise->sigma2_rf);
}

double sum_rate(const Eigen::VectorXd& sinr) {
  double rate = 0.0;
  for (Eigen::Index k = 0; k < sinr.size(); ++k) {
    if (sinr[k] < 0.0) {
      throw std::domain_error("sum_rate: negative SINR");
    }
    rate += log2_1p(sinr[k]);
  }
  return rate;
}

double fp_auxiliary_update(double a_k, double b_k) {
  if (b_k <= 0.0) {
    throw std::domain_error("fp_auxiliary_update: denominator must be positive");
  }
  if (a_k < 0.0) {
    throw std::domain_error("fp_auxiliary_update: numerator must be nonnegative");
  }
  return std::sqrt(a_k) / b_k;
}

double fp_surrogate_sinr(double v_k, double a_k, double b_k) {
  return 2.0 * v_k * std::sqrt(a_k) - v_k * v_k * b_k;
}

FpProblem::FpProblem(const HmaModel& hma, const ChannelRealization& chan,
                     const NoiseModel& noise, double p_t) {
  n_ = static_cast<int>(hma.p_hms.cols());
  k_ = chan.n_users();
  const int m = static_cast<int>(hma.p_hms.rows());
  if (m != k_) {
    throw std::invalid_argument("FpProblem: requires M = K RF chains");
  }
  if (chan.h.rows() != n_) {
    throw std::invalid_argument("FpProblem: channel rows must match unit-cells");
  }
  pt_t_ = p_t * hma.t_loss;
  sigma2_ant_t_ = noise.sigma2_ant * hma.t_loss;
  sigma2_rf_ = noise.sigma2_rf;
  p_in_ = per_cell_incident_power(chan, p_t, hma.layout.unit_cell_area);
  p_in_total_ = p_in_.sum();

  mix_.reserve(k_);
  qrow_.reserve(k_);
  for (int k = 0; k < k_; ++k) {
    const Eigen::VectorXcd p_row = hma.p_hms.row(k).transpose();
    Eigen::MatrixXcd mk(n_, k_);
    for (int j = 0; j < k_; ++j) {
      mk.col(j) = p_row.cwiseProduct(chan.h.col(j));
    }
    mix_.push_back(std::move(mk));
    // Hermitian form of the colored antenna noise seen by chain k:
    // t^H Q t = u^H Sigma u with u = diag(P_k) t.
    const Eigen::MatrixXcd dk = p_row.asDiagonal();
    qrow_.push_back(dk.adjoint() * chan.sigma_rx * dk);
  }
}

void FpProblem::ratio_terms(const Eigen::VectorXcd& t, Eigen::VectorXd& a_out,
                            Eigen::VectorXd& b_out) const {
  a_out.resize(k_);
  b_out.resize(k_);
  for (int k = 0; k < k_; ++k) {
    const Eigen::VectorXcd coupled = mix_[k].transpose() * t;  // a_{k,j}
    a_out[k] = pt_t_ * std::norm(coupled[k]);
    double interference = 0.0;
    for (int j = 0; j < k_; ++j) {
      if (j != k) interference += pt_t_ * std::norm(coupled[j]);
    }
    const double colored =
        sigma2_ant_t_ * (t.adjoint() * qrow_[k] * t).value().real();
    b_out[k] = interference + colored + sigma2_rf_;
  }
}

double FpProblem::true_rate(const Eigen::VectorXcd& t) const {
  Eigen::VectorXd a, b;
  ratio_terms(t, a, b);
  double rate = 0.0;
  for (int k = 0; k < k_; ++k) rate += log2_1p(a[k] / b[k]);
  return rate;
}

double FpProblem::surrogate(const Eigen::VectorXcd& t,
                            const Eigen::VectorXd& v) const {
  Eigen::VectorXd a, b;
  ratio_terms(t, a, b);
  double obj = 0.0;
  for (int k = 0; k < k_; ++k) {
    const double s = fp_surrogate_sinr(v[k], a[k], b[k]);
    if (s <= -1.0) return -std::numeric_limits<double>::infinity();
    obj += log2_1p(s);
  }
  return obj;
}

Eigen::VectorXcd FpProblem::surrogate_gradient(const Eigen::VectorXcd& t,
                                               const Eigen::VectorXd& v) const {
  Eigen::VectorXcd grad = Eigen::VectorXcd::Zero(n_);
  for (int k = 0; k < k_; ++k) {
    const Eigen::VectorXcd coupled = mix_[k].transpose() * t;
    const double a_k = pt_t_ * std::norm(coupled[k]);
    double interference = 0.0;
    for (int j = 0; j < k_; ++j) {
      if (j != k) interference += pt_t_ * std::norm(coupled[j]);
    }
    const Eigen::VectorXcd qt = qrow_[k] * t;
    const double colored = sigma2_ant_t_ * (t.dot(qt)).real();
    const double b_k = interference + colored + sigma2_rf_;

    const double s = fp_surrogate_sinr(v[k], a_k, b_k);
    const double weight = kLog2E / (1.0 + s);

    // d sqrt(A_k) = sqrt(pt_t) * d |a_kk|
    Eigen::VectorXcd ds = Eigen::VectorXcd::Zero(n_);
    const double mag = std::abs(coupled[k]);
    if (mag > 0.0) {
      ds += v[k] * std::sqrt(pt_t_) * (coupled[k] / mag) *
            mix_[k].col(k).conjugate();
    }
    Eigen::VectorXcd db = sigma2_ant_t_ * qt;
    for (int j = 0; j < k_; ++j) {
      if (j != k) db += pt_t_ * coupled[j] * mix_[k].col(j).conjugate();
    }
    grad += weight * (ds - v[k] * v[k] * db);
  }
  return grad;
}

Eigen::VectorXcd FpProblem::scale_to_boundary(const Eigen::VectorXcd& t) const {
  double through = 0.0;
  for (int n = 0; n < n_; ++n) through += std::norm(t[n]) * p_in_[n];
  if (through <= 0.0) {
    throw std::runtime_error("FpProblem: zero power through the surface");
  }
  return t * std::sqrt(p_in_total_ / through);
}

CombinerSolution optimize_rwd_fp(const HmaModel& hma,
                                 const ChannelRealization& chan,
                                 const NoiseModel& noise, double p_t,
                                 const SolverOptions& opts) {
  FpProblem prob(hma, chan, noise, p_t);
  const int n = prob.n_cells();
  const int k_users = prob.n_users();

  Rng rng(opts.init_seed);
  Eigen::VectorXcd t(n);
  for (int i = 0; i < n; ++i) t[i] = rng.cnormal();
  t = prob.scale_to_boundary(t);

  std::vector<double> trace;
  trace.push_back(prob.true_rate(t));
  if (!std::isfinite(trace.back())) {
    throw SolverFailure("optimize_rwd_fp: non-finite objective at init", trace);
  }

  Eigen::VectorXd v = Eigen::VectorXd::Zero(k_users);
  Eigen::VectorXd a_terms, b_terms;
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    prob.ratio_terms(t, a_terms, b_terms);
    for (int k = 0; k < k_users; ++k) {
      v[k] = fp_auxiliary_update(a_terms[k], b_terms[k]);
    }

    const int budget = (outer == 0) ? opts.inner_first : opts.inner_rest;
    double f_cur = prob.surrogate(t, v);
    double step = opts.init_step;
    for (int it = 0; it < budget; ++it) {
      const Eigen::VectorXcd grad = prob.surrogate_gradient(t, v);
      // Ascent direction tangent to the constraint surface; the radial
      // rescale below only has to absorb the second-order drift.
      const Eigen::VectorXcd normal = prob.p_in().asDiagonal() * t;
      Eigen::VectorXcd dir = grad;
      const double normal_sq = normal.squaredNorm();
      if (normal_sq > 0.0) {
        dir -= (normal.dot(grad).real() / normal_sq) * normal;
      }
      const double dnorm = dir.norm();
      if (!(dnorm > 0.0)) break;
      dir *= t.norm() / dnorm;
      // First-order change per unit step along dir (real inner product).
      const double slope = 2.0 * grad.dot(dir).real();

      bool improved = false;
      while (step >= opts.min_step) {
        const Eigen::VectorXcd cand = prob.scale_to_boundary(t + step * dir);
        const double f_cand = prob.surrogate(cand, v);
        if (f_cand >= f_cur + opts.armijo_c * step * slope && f_cand > f_cur) {
          t = cand;
          f_cur = f_cand;
          step = std::min(2.0 * step, 1.0);
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;  // stationary for this auxiliary vector
    }

    const double rate = prob.true_rate(t);
    if (!std::isfinite(rate)) {
      throw SolverFailure("optimize_rwd_fp: non-finite objective", trace);
    }
    const double prev = trace.back();
    trace.push_back(rate);
    if (std::abs(rate - prev) <=
        opts.outer_tol * std::max(std::abs(prev), 1e-12)) {
      break;
    }
  }

  CombinerSolution sol;
  sol.t_hms = t;
  sol.w_d = Eigen::MatrixXcd::Identity(k_users, k_users);
  sol.v = v;
  sol.trace = std::move(trace);

  HmaModel tuned = hma;
  tuned.t_hms = sol.t_hms;
  LinkState state{&tuned, &chan, &noise, p_t, sol.w_d};
  sol.sinr = evaluate_sinr(state);
  sol.sum_rate = sum_rate(sol.sinr);
  return sol;
}

Eigen::MatrixXcd zf_digital_combiner(const HmaModel& hma,
                                     const ChannelRealization& chan) {
  const Eigen::MatrixXcd h_eq = rwd_combiner(hma) * chan.h;  // M x K
  if (h_eq.rows() != h_eq.cols()) {
    throw std::invalid_argument("zf_digital_combiner: equivalent channel not square");
  }
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h_eq);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > 1e12) {
    throw std::runtime_error("zf_digital_combiner: singular equivalent channel");
  }
  Eigen::MatrixXcd w = h_eq.partialPivLu().inverse();
  // One refinement step keeps the nulling residual at machine precision.
  w += w * (Eigen::MatrixXcd::Identity(h_eq.rows(), h_eq.cols()) - h_eq * w);
  return w;
}

Eigen::VectorXcd smp_combiner(const HmaModel& hma,
                              const ChannelRealization& chan) {
  if (chan.n_users() != 1 || hma.p_hms.rows() != 1) {
    throw std::invalid_argument("smp_combiner: requires K = 1 and M = 1");
  }
  const int n = static_cast<int>(hma.p_hms.cols());
  Eigen::VectorXcd t(n);
  for (int i = 0; i < n; ++i) {
    const std::complex<double> p = hma.p_hms(0, i);
    const double h_phase = std::arg(std::conj(chan.h(i, 0)));
    // Zero propagation entries contribute nothing; align with the channel only.
    const double p_phase = (p == std::complex<double>(0.0, 0.0)) ? 0.0 : std::arg(p);
    t[i] = std::polar(1.0, h_phase - p_phase);
  }
  return t;
}

CombinerSolution solve_multiuser(const HmaModel& hma,
                                 const ChannelRealization& chan,
                                 const NoiseModel& noise, double p_t,
                                 const SolverOptions& opts) {
  CombinerSolution sol = optimize_rwd_fp(hma, chan, noise, p_t, opts);

  HmaModel tuned = hma;
  tuned.t_hms = sol.t_hms;
  try {
    sol.w_d = zf_digital_combiner(tuned, chan);
  } catch (const std::runtime_error&) {
    sol.w_d = Eigen::MatrixXcd::Identity(chan.n_users(), chan.n_users());
    sol.zf_fallback = true;
  }

  LinkState state{&tuned, &chan, &noise, p_t, sol.w_d};
  sol.sinr = evaluate_sinr(state);
  sol.sum_rate = sum_rate(sol.sinr);
  return sol;
}

}  // namespace hmasim
