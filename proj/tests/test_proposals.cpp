#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "gwl/energy_models.hpp"
#include "gwl/errors.hpp"
#include "gwl/proposals.hpp"
#include "support.hpp"

using namespace gwl;
using gwl::test::random_config;

namespace {

std::size_t hamming(const Config& a, const Config& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

SiteMatrix random_matrix(std::size_t d, int v, Rng& rng, double scale) {
  SiteMatrix m(d, v);
  for (auto& e : m.data()) e = scale * (2 * rng.uniform() - 1);
  return m;
}

// exp(score - lse) for every move, -inf at the current values.
std::vector<double> move_log_probs(const SiteMatrix& f_grad, const Config& x) {
  const SiteMatrix s = gwg_category_scores(f_grad, x);
  const double lse = log_sum_exp(s.data());
  std::vector<double> out;
  for (double v : s.data()) out.push_back(v - lse);
  return out;
}

}  // namespace

TEST_SUITE("proposals") {

TEST_CASE("random proposal probabilities") {
  const ConfigSpace space = ConfigSpace::flat(4, 2);
  Rng rng(1);
  const Config x = random_config(space, rng);
  for (int k = 0; k < 50; ++k) {
    const ProposalOutcome p = propose_random(x, space, rng);
    CHECK(p.log_q_forward == doctest::Approx(-1.386294).epsilon(1e-6));
    CHECK(p.log_q_forward == -std::log(4.0));
    CHECK(p.log_q_reverse == p.log_q_forward);
    CHECK(hamming(x, p.candidate) == 1);
    CHECK(p.candidate[p.changed_site] == p.new_value);
    CHECK(p.old_value == x[p.changed_site]);
    CHECK(p.new_value != p.old_value);
  }
}

TEST_CASE("random proposal covers every move evenly") {
  const ConfigSpace space = ConfigSpace::flat(3, 3);
  Rng rng(2);
  const Config x(std::vector<int>{0, 2, 1});
  std::map<std::pair<std::size_t, int>, int> seen;
  const int n = 60000;
  for (int k = 0; k < n; ++k) {
    const auto p = propose_random(x, space, rng);
    ++seen[{p.changed_site, p.new_value}];
  }
  CHECK(seen.size() == 6);
  for (const auto& [move, count] : seen) CHECK(std::abs(count - n / 6) < 500);
}

TEST_CASE("category scores") {
  const Config x(std::vector<int>{0, 1});
  SiteMatrix zero(2, 3);
  const SiteMatrix s0 = gwg_category_scores(zero, x);
  CHECK(s0(0, 0) == -std::numeric_limits<double>::infinity());
  CHECK(s0(1, 1) == -std::numeric_limits<double>::infinity());
  CHECK(s0(0, 1) == 0.0);
  CHECK(s0(0, 2) == 0.0);
  CHECK(s0(1, 0) == 0.0);

  SiteMatrix g(2, 3);
  g(0, 0) = 1.0;
  g(0, 1) = 5.0;
  CHECK(gwg_category_scores(g, x)(0, 1) == 2.0);

  SiteMatrix doubled = g;
  doubled *= 2;
  CHECK(gwg_category_scores(doubled, x)(0, 1) == 4.0);

  SiteMatrix bad(2, 3);
  bad(1, 2) = std::nan("");
  CHECK_THROWS_WITH_AS(gwg_category_scores(bad, x), "non-finite target gradient at (1, 2)", NumericError);
  bad(1, 2) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(gwg_category_scores(bad, x), NumericError);
}

TEST_CASE("zero gradient gives the random proposal") {
  for (std::size_t d = 1; d <= 4; ++d)
    for (int v = 2; v <= 3; ++v) {
      const ConfigSpace space = ConfigSpace::flat(d, v);
      Rng rng(d * 10 + static_cast<std::uint64_t>(v));
      const Config x = random_config(space, rng);
      const SiteMatrix zero(d, v);
      const double lq = -std::log(static_cast<double>(d) * (v - 1));
      for (double p : move_log_probs(zero, x))
        if (std::isfinite(p)) CHECK(p == lq);
      for (int k = 0; k < 20; ++k) {
        const auto p = propose_gwg(x, zero, [&](const Config&) { return zero; }, rng);
        CHECK(p.log_q_forward == lq);
        CHECK(p.log_q_reverse == lq);
        CHECK(p.log_q_forward == propose_random(x, space, rng).log_q_forward);
      }
    }
}

TEST_CASE("forward probabilities sum to one over all moves") {
  Rng rng(40);
  for (std::size_t d = 1; d <= 4; ++d)
    for (int v = 2; v <= 3; ++v)
      for (double scale : {0.1, 3.0, 40.0}) {
        const ConfigSpace space = ConfigSpace::flat(d, v);
        const Config x = random_config(space, rng);
        const SiteMatrix g = random_matrix(d, v, rng, scale);
        double total = 0;
        std::size_t finite = 0;
        for (double p : move_log_probs(g, x))
          if (std::isfinite(p)) {
            total += std::exp(p);
            ++finite;
          }
        CHECK(finite == d * static_cast<std::size_t>(v - 1));
        CHECK(std::abs(total - 1.0) < 1e-12);
      }
}

TEST_CASE("reported log probabilities match the enumerated ones") {
  // A model whose gradient depends on x, so forward and reverse differ.
  const IsingModel ising(2);
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const Config x = random_config(ising.space(), rng);
    const SiteMatrix g = ising.grad_onehot(x);
    const auto p = propose_gwg(x, g, [&](const Config& c) { return ising.grad_onehot(c); }, rng);
    CHECK(hamming(x, p.candidate) == 1);
    const std::size_t at = p.changed_site * 2 + static_cast<std::size_t>(p.new_value);
    CHECK(p.log_q_forward == move_log_probs(g, x)[at]);
    const std::size_t back = p.changed_site * 2 + static_cast<std::size_t>(p.old_value);
    CHECK(p.log_q_reverse == move_log_probs(ising.grad_onehot(p.candidate), p.candidate)[back]);
  }
}

TEST_CASE("draws follow the softmax") {
  const ConfigSpace space = ConfigSpace::flat(3, 3);
  Rng rng(42);
  const Config x(std::vector<int>{1, 0, 2});
  const SiteMatrix g = random_matrix(3, 3, rng, 2.0);
  const auto lp = move_log_probs(g, x);
  std::vector<int> seen(lp.size(), 0);
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const auto p = propose_gwg(x, g, [&](const Config&) { return g; }, rng);
    ++seen[p.changed_site * 3 + static_cast<std::size_t>(p.new_value)];
  }
  for (std::size_t k = 0; k < lp.size(); ++k) {
    if (!std::isfinite(lp[k])) {
      CHECK(seen[k] == 0);
      continue;
    }
    const double want = n * std::exp(lp[k]);
    CHECK(std::abs(seen[k] - want) < 5 * std::sqrt(want) + 1);
  }
}

TEST_CASE("doubling the target sharpens the proposal") {
  const Config x(std::vector<int>{0, 0, 0});
  SiteMatrix g(3, 2);
  g(0, 1) = 1.0;
  g(1, 1) = 0.5;
  SiteMatrix g2 = g;
  g2 *= 2;
  const auto p1 = move_log_probs(g, x);
  const auto p2 = move_log_probs(g2, x);
  CHECK(p2[1] > p1[1]);
  CHECK(p2[5] < p1[5]);
}

TEST_CASE("entropy target gradient is minus slope times model gradient") {
  const std::vector<double> c{0, 1, 2}, v{0, 3, 4};
  const InterpView view(c, v);
  SiteMatrix mg(2, 2);
  mg(0, 0) = 1;
  mg(0, 1) = -2;
  mg(1, 1) = 0.5;
  const SiteMatrix f = entropy_target_grad(view, 0.5, mg);
  CHECK(f(0, 0) == -3.0);
  CHECK(f(0, 1) == 6.0);
  CHECK(f(1, 1) == -1.5);
  const SiteMatrix f2 = entropy_target_grad(view, 1.5, mg);
  CHECK(f2(0, 1) == 2.0);
}

TEST_CASE("log_sum_exp") {
  CHECK(log_sum_exp({0.0, 0.0}) == doctest::Approx(std::log(2.0)));
  CHECK(log_sum_exp({1000.0, 1000.0}) == doctest::Approx(1000 + std::log(2.0)));
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp({ninf, 3.0}) == 3.0);
  CHECK(log_sum_exp({ninf}) == ninf);
}

}  // TEST_SUITE
