#include "gwl/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gwl/errors.hpp"

namespace gwl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

ProposalOutcome propose_random(const Config& x, const ConfigSpace& space, Rng& rng) {
  if (space.values < 2) throw InvalidArgument("random proposal needs V >= 2");
  ProposalOutcome out;
  out.changed_site = static_cast<std::size_t>(rng.below(space.sites));
  out.old_value = x[out.changed_site];
  int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(space.values - 1)));
  if (v >= out.old_value) ++v;
  out.new_value = v;
  out.candidate = x;
  out.candidate[out.changed_site] = v;
  const double lq = -std::log(static_cast<double>(space.sites) * static_cast<double>(space.values - 1));
  out.log_q_forward = lq;
  out.log_q_reverse = lq;
  return out;
}

SiteMatrix gwg_category_scores(const SiteMatrix& f_grad, const Config& x) {
  if (f_grad.sites() != x.size())
    throw DimensionMismatch("gradient has " + std::to_string(f_grad.sites()) + " sites, config has " +
                            std::to_string(x.size()));
  SiteMatrix scores(f_grad.sites(), f_grad.values());
  for (std::size_t i = 0; i < f_grad.sites(); ++i) {
    const int cur = x[i];
    for (int v = 0; v < f_grad.values(); ++v)
      if (!std::isfinite(f_grad(i, v)))
        throw NumericError("non-finite target gradient at (" + std::to_string(i) + ", " + std::to_string(v) + ")");
    const double base = f_grad(i, cur);
    for (int v = 0; v < f_grad.values(); ++v) scores(i, v) = v == cur ? kNegInf : (f_grad(i, v) - base) / 2;
  }
  return scores;
}

double log_sum_exp(const std::vector<double>& xs) {
  double m = kNegInf;
  for (double v : xs) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double total = 0;
  for (double v : xs) total += std::exp(v - m);
  return m + std::log(total);
}

SiteMatrix entropy_target_grad(const InterpView& entropy, double z, const SiteMatrix& model_grad) {
  SiteMatrix g = model_grad;
  g *= -entropy.at(z).slope;
  return g;
}

ProposalOutcome propose_gwg(const Config& x, const SiteMatrix& f_grad, const TargetGradFn& grad_at, Rng& rng) {
  const SiteMatrix scores = gwg_category_scores(f_grad, x);
  const auto& s = scores.data();
  const double lse = log_sum_exp(s);

  // Inverse-CDF draw over exp(score - lse).
  const double u = rng.uniform();
  double acc = 0;
  std::size_t pick = s.size();
  std::size_t last_finite = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == kNegInf) continue;
    last_finite = k;
    acc += std::exp(s[k] - lse);
    if (u < acc) {
      pick = k;
      break;
    }
  }
  if (pick == s.size()) pick = last_finite;  // u landed in the rounding slack

  const auto V = static_cast<std::size_t>(scores.values());
  ProposalOutcome out;
  out.changed_site = pick / V;
  out.new_value = static_cast<int>(pick % V);
  out.old_value = x[out.changed_site];
  out.candidate = x;
  out.candidate[out.changed_site] = out.new_value;
  out.log_q_forward = s[pick] - lse;

  const SiteMatrix back = gwg_category_scores(grad_at(out.candidate), out.candidate);
  out.log_q_reverse = back(out.changed_site, out.old_value) - log_sum_exp(back.data());
  return out;
}

}  // namespace gwl
