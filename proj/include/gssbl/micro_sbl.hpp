// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include "gssbl/errors.hpp"

namespace gssbl {

// Hyperparameters of the hierarchical Gaussian/Gamma prior and the iteration
// policy of the single-source loop.
struct SblPriors {
  double a = 0.05;          // Gamma shape
  double b = 0.05;          // Gamma rate
  double beta_init = 1e3;   // initial noise precision
  double alpha_init = 0.0;  // initial source precision (0 = flat prior)
  int max_iters = 10;       // fixed iteration limit I
  double tol = 1e-8;        // relative convergence tolerance on mu

  // Throws UsageError unless a, b >= 0, beta_init > 0, alpha_init >= 0,
  // max_iters >= 1, tol >= 0.
  void validate() const;
};

// Scalar Bayesian state of one candidate. At return the posterior identities
//   sigma == 1 / (beta * ||phi||^2 + alpha)
//   mu    == beta * sigma * (phi^T target)
// hold to better than 1e-12 relative.
struct MicroSblState {
  double alpha = 0.0;  // source precision
  double beta = 0.0;   // noise precision
  double mu = 0.0;     // posterior mean power [W]
  double sigma = 0.0;  // posterior variance [W^2]
  int iters_run = 0;   // posterior updates performed
};

// Runs up to priors.max_iters iterations of (1) scalar posterior update,
// (2) EM hyperparameter updates
//   alpha <- (1 + 2a) / (mu^2 + sigma + 2b)
//   beta  <- (M + 2a) / (||target - mu*phi||^2 + sigma*||phi||^2 + 2b)
// stopping early when |mu_new - mu_old| <= tol * max(1, |mu_old|). The
// hyperparameter update is skipped after the final posterior update so that
// the returned state is mutually consistent.
//
// Internally the problem is solved on unit-norm column/target copies and the
// state is mapped back exactly; scalar SBL is scale-covariant, so this
// changes nothing mathematically but keeps the loop well-conditioned for
// Watt-scale targets (~1e-9) where the Gamma floors would otherwise dominate.
//
// Throws NumericError for a zero-norm column, a non-finite target, or a
// dimension mismatch.
MicroSblState run_micro_sbl(const Eigen::Ref<const Eigen::VectorXd>& column,
                            const Eigen::Ref<const Eigen::VectorXd>& target,
                            const SblPriors& priors);

struct CandidateScore {
  double mu = 0.0;     // posterior mean power [W]
  double error = 0.0;  // ||target - mu*column||^2, or ||target||^2 when mu <= 0
};

// Fit error of one candidate. A candidate whose posterior mean is <= 0 is
// scored as no-improvement (error = ||target||^2) so it can never win the
// greedy argmin.
CandidateScore score_candidate(const Eigen::Ref<const Eigen::VectorXd>& column,
                               const Eigen::Ref<const Eigen::VectorXd>& target,
                               const SblPriors& priors);

}  // namespace gssbl
