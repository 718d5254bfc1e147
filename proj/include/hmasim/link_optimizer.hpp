// SPDX-License-Identifier: Apache-2.0
//
// Uplink link evaluation (per-user SINR, sum rate) and combiner design: the
// fractional-programming algorithm for the wave-domain combiner, the
// zero-forcing digital combiner, and the single-user phase-alignment scheme.

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "hmasim/channel.hpp"
#include "hmasim/em_model.hpp"

namespace hmasim {

struct LinkState {
  const HmaModel* hma = nullptr;
  const ChannelRealization* chan = nullptr;
  const NoiseModel* noise = nullptr;
  double p_t = 0.0;          // per-user transmit power density, W/m^2
  Eigen::MatrixXcd w_d;      // K x M digital combiner
};

struct SolverOptions {
  int max_outer = 30;        // outer (auxiliary-update) rounds
  int inner_first = 100;     // ascent steps in the first outer round
  int inner_rest = 20;       // ascent steps in later rounds
  double outer_tol = 1e-5;   // relative objective change stopping rule
  double init_step = 0.25;   // first trial step, as a fraction of ||t||
  double min_step = 1e-14;   // line-search floor
  double armijo_c = 1e-4;    // sufficient-increase coefficient
  std::uint64_t init_seed = 1;
};

struct CombinerSolution {
  Eigen::VectorXcd t_hms;
  Eigen::MatrixXcd w_d;
  Eigen::VectorXd v;          // auxiliary variables at the last update
  Eigen::VectorXd sinr;       // linear, per user
  double sum_rate = 0.0;      // bits/s/Hz
  std::vector<double> trace;  // sum rate after init and each outer round
  bool zf_fallback = false;   // digital ZF was singular; W^D = I used instead
};

// Thrown when the objective turns non-finite; carries the trace so far.
struct SolverFailure : std::runtime_error {
  SolverFailure(const std::string& what, std::vector<double> trace_so_far)
      : std::runtime_error(what), trace(std::move(trace_so_far)) {}
  std::vector<double> trace;
};

// Total signal power incident on each unit-cell, summed over users:
//   p_in[n] = (p_t * a_uc / (2 * eta0)) * sum_k |h_{n,k}|^2,  eta0 = 377 ohm.
Eigen::VectorXd per_cell_incident_power(const ChannelRealization& chan,
                                        double p_t, double a_uc);

// Generalized per-user SINR for y = W^D (g1 * T (sqrt(rho) H s + z_ant + z_1) + z_2)
// with T the K x N total combiner seen from the antenna ports:
//   gamma_k = rho |T_k h_k|^2 / ( sum_{j != k} rho |T_k h_j|^2
//             + s2_ant T_k Sigma T_k^H + s2_port ||T_k||^2 + s2_chain ||W^D_k||^2 ).
Eigen::VectorXd combined_sinr(const Eigen::MatrixXcd& total_combiner,
                              const Eigen::MatrixXcd& h,
                              const Eigen::MatrixXd& sigma_rx, double rho,
                              double sigma2_ant, double sigma2_port,
                              const Eigen::MatrixXcd& w_d, double sigma2_chain);

// SINR of the metasurface uplink with G = W^D * rwd_combiner(hma).
Eigen::VectorXd evaluate_sinr(const LinkState& state);

// sum_k log2(1 + gamma_k); negative SINRs are a domain error.
double sum_rate(const Eigen::VectorXd& sinr);

// Optimal auxiliary variable sqrt(a) / b for the quadratic transform.
double fp_auxiliary_update(double a_k, double b_k);

// Transformed ratio 2 v sqrt(a) - v^2 b; tight (= a/b) at v = sqrt(a)/b.
double fp_surrogate_sinr(double v_k, double a_k, double b_k);

// Ratio terms, surrogate objective, and Wirtinger gradient of the
// wave-domain problem at W^D = I. Exposed so tests can check gradients
// against finite differences and grid searches.
class FpProblem {
 public:
  FpProblem(const HmaModel& hma, const ChannelRealization& chan,
            const NoiseModel& noise, double p_t);

  int n_users() const { return k_; }
  int n_cells() const { return n_; }
  const Eigen::VectorXd& p_in() const { return p_in_; }
  double p_in_total() const { return p_in_total_; }

  // A_k and B_k of the per-user SINR ratio at W^D = I.
  void ratio_terms(const Eigen::VectorXcd& t, Eigen::VectorXd& a_out,
                   Eigen::VectorXd& b_out) const;

  // sum_k log2(1 + A_k/B_k)
  double true_rate(const Eigen::VectorXcd& t) const;

  // sum_k log2(1 + 2 v_k sqrt(A_k) - v_k^2 B_k); -inf when any term <= -1.
  double surrogate(const Eigen::VectorXcd& t, const Eigen::VectorXd& v) const;

  // d(surrogate)/d(conj t). For a real objective f and step dt, the first
  // order change is 2 Re(grad^H dt).
  Eigen::VectorXcd surrogate_gradient(const Eigen::VectorXcd& t,
                                      const Eigen::VectorXd& v) const;

  // Radial rescaling onto the power-conservation boundary
  // t^H diag(p_in) t = sum(p_in).
  Eigen::VectorXcd scale_to_boundary(const Eigen::VectorXcd& t) const;

 private:
  int k_ = 0;
  int n_ = 0;
  double pt_t_ = 0.0;         // p_t * t_loss
  double sigma2_ant_t_ = 0.0; // sigma2_ant * t_loss
  double sigma2_rf_ = 0.0;
  Eigen::VectorXd p_in_;
  double p_in_total_ = 0.0;
  std::vector<Eigen::MatrixXcd> mix_;   // K entries, N x K; column j = P_k .* H_j
  std::vector<Eigen::MatrixXcd> qrow_;  // K entries, N x N Hermitian noise forms
};

// Two-phase wave-domain design, phase one: alternate the auxiliary update
// with projected gradient ascent of the surrogate sum rate over the
// power-conservation boundary, at W^D = I (requires M = K).
CombinerSolution optimize_rwd_fp(const HmaModel& hma,
                                 const ChannelRealization& chan,
                                 const NoiseModel& noise, double p_t,
                                 const SolverOptions& opts);

// Inverse of the equivalent channel H_eq = rwd_combiner(hma) * H. Throws
// std::runtime_error when H_eq is not square or its condition number
// exceeds 1e12.
Eigen::MatrixXcd zf_digital_combiner(const HmaModel& hma,
                                     const ChannelRealization& chan);

// Single-user phase-alignment combiner t_n = exp(j(angle(conj(h_n)) -
// angle(p_n))); unit modulus, so the power-conservation gap is exactly zero.
Eigen::VectorXcd smp_combiner(const HmaModel& hma,
                              const ChannelRealization& chan);

// Phase one (FP) followed by digital zero-forcing and a final SINR/rate
// evaluation. Falls back to W^D = I (flagged) if the equivalent channel is
// singular after phase one.
CombinerSolution solve_multiuser(const HmaModel& hma,
                                 const ChannelRealization& chan,
                                 const NoiseModel& noise, double p_t,
                                 const SolverOptions& opts);

}  // namespace hmasim
