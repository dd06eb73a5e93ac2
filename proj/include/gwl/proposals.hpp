#ifndef GWL_PROPOSALS_HPP
#define GWL_PROPOSALS_HPP

#include <functional>

#include "gwl/config_space.hpp"
#include "gwl/entropy_interp.hpp"
#include "gwl/random.hpp"

namespace gwl {

// A single-site move together with the log-probabilities of proposing it
// and of proposing its reverse from the candidate.
struct ProposalOutcome {
  Config candidate;
  std::size_t changed_site = 0;
  int old_value = 0;
  int new_value = 0;
  double log_q_forward = 0;
  double log_q_reverse = 0;
};

// Uniform site, then a uniform value different from the current one.
ProposalOutcome propose_random(const Config& x, const ConfigSpace& space, Rng& rng);

// (grad[i][v] - grad[i][x_i]) / 2, with -inf on the current value of every
// site. Throws NumericError on a non-finite gradient entry.
SiteMatrix gwg_category_scores(const SiteMatrix& f_grad, const Config& x);

double log_sum_exp(const std::vector<double>& xs);

// Gradient of the target -S(z(x)) through the interpolated entropy:
// -slope(z) * dz/d onehot.
SiteMatrix entropy_target_grad(const InterpView& entropy, double z, const SiteMatrix& model_grad);

using TargetGradFn = std::function<SiteMatrix(const Config&)>;

// Draws (i, v) from softmax(gwg_category_scores(f_grad, x)). The reverse
// probability needs the target gradient at the candidate, which is obtained
// from grad_at.
ProposalOutcome propose_gwg(const Config& x, const SiteMatrix& f_grad, const TargetGradFn& grad_at, Rng& rng);

}  // namespace gwl

#endif  // GWL_PROPOSALS_HPP
