// SPDX-License-Identifier: Apache-2.0
#include "gssbl/micro_sbl.hpp"

#include <cmath>

namespace gssbl {

void SblPriors::validate() const {
  if (!(a >= 0.0) || !(b >= 0.0)) {
    throw UsageError("SBL priors a and b must be >= 0");
  }
  if (!(beta_init > 0.0)) {
    throw UsageError("SBL beta_init must be > 0");
  }
  if (!(alpha_init >= 0.0)) {
    throw UsageError("SBL alpha_init must be >= 0");
  }
  if (max_iters < 1) {
    throw UsageError("SBL max_iters must be >= 1");
  }
  if (!(tol >= 0.0)) {
    throw UsageError("SBL tol must be >= 0");
  }
}

MicroSblState run_micro_sbl(const Eigen::Ref<const Eigen::VectorXd>& column,
                            const Eigen::Ref<const Eigen::VectorXd>& target,
                            const SblPriors& priors) {
  priors.validate();
  const Eigen::Index m = column.size();
  if (m < 1 || target.size() != m) {
    throw NumericError("run_micro_sbl: column/target dimension mismatch");
  }
  if (!target.allFinite()) {
    throw NumericError("run_micro_sbl: target must be finite");
  }
  const double column_scale = column.norm();
  if (!(column_scale > 0.0) || !std::isfinite(column_scale)) {
    throw NumericError("run_micro_sbl: degenerate zero-norm column");
  }

  // Solve on unit-norm copies; scalar SBL is exactly scale-covariant, so the
  // back-mapped state is identical in exact arithmetic while the loop itself
  // never sees Watt-scale magnitudes that would let the Gamma floors (2b)
  // swamp the hyperparameter updates.
  double target_scale = target.norm();
  if (target_scale == 0.0) {
    target_scale = 1.0;
  }
  const Eigen::VectorXd c = column / column_scale;
  const Eigen::VectorXd t = target / target_scale;
  const double cc = c.squaredNorm();
  const double ct = c.dot(t);
  const double mu_back = target_scale / column_scale;

  double alpha = priors.alpha_init;
  double beta = priors.beta_init;
  double mu = 0.0;
  double sigma = 0.0;
  double mu_prev = 0.0;  // previous posterior mean, caller scale
  int iters = 0;

  for (int k = 1; k <= priors.max_iters; ++k) {
    iters = k;
    sigma = 1.0 / (beta * cc + alpha);
    mu = beta * sigma * ct;

    const double mu_scaled = mu * mu_back;
    if (k > 1 && std::abs(mu_scaled - mu_prev) <= priors.tol * std::max(1.0, std::abs(mu_prev))) {
      break;
    }
    mu_prev = mu_scaled;

    if (k < priors.max_iters) {
      const double rss = (t - mu * c).squaredNorm();
      alpha = (1.0 + 2.0 * priors.a) / (mu * mu + sigma + 2.0 * priors.b);
      beta = (static_cast<double>(m) + 2.0 * priors.a) / (rss + sigma * cc + 2.0 * priors.b);
    }
  }

  MicroSblState state;
  state.mu = mu * mu_back;
  state.sigma = sigma * mu_back * mu_back;
  state.alpha = alpha / (mu_back * mu_back);
  state.beta = beta / (target_scale * target_scale);
  state.iters_run = iters;
  return state;
}

CandidateScore score_candidate(const Eigen::Ref<const Eigen::VectorXd>& column,
                               const Eigen::Ref<const Eigen::VectorXd>& target,
                               const SblPriors& priors) {
  const MicroSblState state = run_micro_sbl(column, target, priors);
  CandidateScore score;
  score.mu = state.mu;
  if (!(state.mu > 0.0)) {
    score.error = target.squaredNorm();  // no improvement; cannot win selection
  } else {
    score.error = (target - state.mu * column).squaredNorm();
  }
  return score;
}

}  // namespace gssbl
