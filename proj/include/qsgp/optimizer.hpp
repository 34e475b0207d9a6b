#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qsgp/chevron.hpp"
#include "qsgp/common.hpp"
#include "qsgp/control_variates.hpp"
#include "qsgp/estimators.hpp"
#include "qsgp/features.hpp"
#include "qsgp/sites.hpp"

namespace qsgp {

// Variational parameters: the mean and the chevron factor of
// q(w) = N(mu, C C'). The version counter moves once per applied step and
// keys the control-variate staleness checks.
struct VariationalState {
  VectorXd mu;
  ChevronCholesky C;
  std::uint64_t version = 0;

  VariationalState(Index m, Index k) : mu(VectorXd::Zero(m)), C(m, k) {}
};

// Per-basis prior precisions for relevance-vector training, log-domain.
// Bases with exp(log_s) >= prune_threshold are considered pruned.
struct RvmState {
  VectorXd log_s;
  double prune_threshold = 1e4;
};

struct TrainConfig {
  Index m_tilde = 10000;
  Index n_tilde = 500;
  Index n_bar = 500;  // control-variate rank; 0 disables
  Index chevron_k = 0;
  Index iterations = 100000;
  double lr_variational = 0.1;
  double lr_hyper = 1e-5;
  // Learning rates decay exponentially by this total factor over the run.
  double lr_decay_total = 100.0;
  Index hyper_freeze_iters = -1;  // -1: iterations / 10
  Likelihood likelihood = Likelihood::kGaussian;
  int quad_points = 101;
  std::uint64_t seed = 0;
  Index log_every = 100;
  Index diag_refresh = 0;  // closed-form diagonal refresh period; 0 disables
  bool learn_hyper = false;
  bool rvm = false;
  double rvm_prune_threshold = 1e4;
  // Adam-style rate for the log precisions (they are hyperparameters); the
  // relevance-vector runs publish no value. Constant, not decayed: the
  // precision growth of pruned bases must not stall late in the run.
  double lr_rvm = 0.5;
  bool enumerate_batches = false;  // full-batch mode, needs m~ = m, n~ = n
  bool use_linear_cv = false;
  Index init_rows = 256;  // row subsample for column norms at init

  Index effective_freeze() const {
    return hyper_freeze_iters >= 0 ? hyper_freeze_iters : iterations / 10;
  }
  void validate(Index n, Index m) const;
};

struct MetricsRow {
  Index iteration = 0;
  double elbo_estimate = 0;
  double l_mu_est = 0;
  double l_sigma_est = 0;
  double l_const_est = 0;
  double lr_v = 0;
  double lr_h = 0;
  double step_wall_ms = 0;
};

struct TrainResult {
  VariationalState state;
  Hyperparameters hyper;
  std::optional<RvmState> rvm;
  std::vector<MetricsRow> metrics;
  Index rejected_steps = 0;
  bool interrupted = false;
  std::string error;
};

// Closed-form per-column optimum of the diagonalized covariance objective
// (phi'phi/s2 + s) c^2 - 2 log c:  c_rr = sqrt(s2 / (phi'phi + s2 s_rr)).
double closed_form_crr(double phi_sq_norm, double sigma_sq, double s_rr);

// mu = 0; dense off-diagonals 0; every diagonal from closed_form_crr with
// phi_r'phi_r estimated by row subsampling (scaled n / n_init) when n exceeds
// config.init_rows.
VariationalState init_state(const BasisExpansion& ex, const MatrixXd& X,
                            const TrainConfig& config);

// Model after relevance-vector pruning: surviving basis indices with mu, C
// and the dictionary compacted onto them. When nothing survives the
// threshold, empty_model is set and the compacted fields are absent.
struct PrunedModel {
  std::vector<Index> kept;
  VectorXd mu;
  std::optional<ChevronCholesky> C;
  VectorXd log_s;
  std::optional<BasisExpansion> expansion;
  bool empty_model = false;
};

PrunedModel rvm_prune(const RvmState& rvm, const VariationalState& state,
                      const BasisExpansion& ex);

// Owns one training run: variational state, sparse AdaGrad accumulators,
// Adam moments for the hyperparameters and the control-variate state.
// Single logical writer; snapshots handed out are value copies.
class Trainer {
 public:
  Trainer(BasisExpansion ex, MatrixXd X, VectorXd y, TrainConfig config);

  // One SGD iteration with rng key (seed, t).
  MetricsRow step(Index t);

  // Full loop; on an exception from step() returns the partial result with
  // interrupted set instead of unwinding, so a checkpoint can be written.
  TrainResult run();

  const VariationalState& state() const { return state_; }
  const Hyperparameters& hyper() const { return hyper_; }
  const BasisExpansion& expansion() const { return ex_current_; }
  const std::optional<RvmState>& rvm_state() const { return rvm_; }
  Index rejected_steps() const { return rejected_; }

 private:
  struct StepGrads {
    std::unordered_map<Index, double> mu;
    std::unordered_map<std::uint64_t, double> c_slots;
    std::unordered_map<Index, double> log_s;
    HyperGrad hyper;
    bool has_hyper = false;
  };

  double lr_at(double base, Index t) const;
  StepGrads assemble_gaussian(const IndexBatch& batch, MetricsRow& row);
  StepGrads assemble_site_bound(const IndexBatch& batch, MetricsRow& row);
  void apply_updates(const StepGrads& grads, Index t);
  bool grads_finite(const StepGrads& grads);
  void refresh_diagonal();

  BasisExpansion ex_base_;     // initial hyperparameters (frozen features)
  BasisExpansion ex_current_;  // tracks hyperparameter learning
  MatrixXd X_;
  VectorXd y_;
  TrainConfig config_;
  Hyperparameters hyper_;
  VariationalState state_;
  std::optional<SiteProjection> sites_;
  std::optional<RvmState> rvm_;
  std::optional<ControlVariateState> cv_;
  std::optional<LinearCvState> linear_cv_;
  double const_l_const_ = 0.0;  // cached exact L_const when the prior is fixed
  bool has_const_l_const_ = false;
  double log_det_s_ = 0.0;  // for the dense-prior KL constant
  std::vector<Index> tracked_cols_;
  std::optional<VectorXd> cached_col_norms_;

  // sparse AdaGrad accumulators and per-coordinate rate scales
  std::unordered_map<Index, double> acc_mu_;
  std::unordered_map<std::uint64_t, double> acc_c_;
  std::unordered_map<Index, double> scale_mu_;
  std::unordered_map<std::uint64_t, double> scale_c_;
  std::unordered_map<Index, double> scale_log_s_;
  // lazy per-coordinate Adam state for the log precisions
  struct LazyAdam {
    double m = 0.0, v = 0.0;
    Index t = 0;
  };
  std::unordered_map<Index, LazyAdam> adam_log_s_;

  // Adam state for the kernel/likelihood hyperparameters
  VectorXd adam_m_, adam_v_;
  Index adam_t_ = 0;
  double scale_hyper_ = 1.0;

  Index rejected_ = 0;
};

// Runs the loop over a fresh Trainer.
TrainResult train(const BasisExpansion& ex, const MatrixXd& X,
                  const VectorXd& y, const TrainConfig& config);

}  // namespace qsgp
