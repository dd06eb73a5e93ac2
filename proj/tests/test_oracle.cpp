#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gwl/energy_models.hpp"
#include "gwl/errors.hpp"
#include "gwl/oracle.hpp"
#include "gwl/wl_engine.hpp"

using namespace gwl;

TEST_SUITE("oracle") {

TEST_CASE("ising 2x2 density of states") {
  const IsingModel m(2);
  const ExactDos d = enumerate_dos(m, BinSpec::make(-10, 10, 1));
  CHECK(d.total == 16);
  CHECK(d.counts[2] == 2);
  CHECK(d.counts[10] == 12);
  CHECK(d.counts[18] == 2);
  CHECK(std::accumulate(d.counts.begin(), d.counts.end(), std::uint64_t{0}) == 16);
}

TEST_CASE("ising 4x4 density of states") {
  const IsingModel m(4);
  const ExactDos d = enumerate_dos(m, BinSpec::make(-40, 40, 1));
  // Known exact counts for the periodic 4x4 lattice.
  CHECK(d.counts[40 - 32] == 2);
  CHECK(d.counts[40 - 24] == 32);
  CHECK(d.counts[40 - 20] == 64);
  CHECK(d.counts[40 - 16] == 424);
  CHECK(d.counts[40 + 0] == 20524);
  CHECK(d.total == 65536);
}

TEST_CASE("constant model puts everything in one bin") {
  const ConstantModel m(ConfigSpace::flat(3, 2), 0.0);
  const ExactDos d = enumerate_dos(m, BinSpec::make(-2, 2, 1));
  CHECK(d.counts[2] == 8);
  std::size_t nonzero = 0;
  for (auto c : d.counts) nonzero += c != 0;
  CHECK(nonzero == 1);
}

TEST_CASE("conservation with overflow") {
  const auto m = make_model("tinycnn:H=3,W=3,seed=3,scale=40,bias=0.2");
  const ExactDos d = enumerate_dos(*m, BinSpec::make(-2, 2, 1));
  CHECK(d.total == 512);
  const auto in_range = std::accumulate(d.counts.begin(), d.counts.end(), std::uint64_t{0});
  CHECK(in_range + d.overflow_low + d.overflow_high == 512);
  CHECK(d.overflow_low + d.overflow_high > 0);
}

TEST_CASE("site order and threads do not change the counts") {
  const auto m = make_model("tinycnn:H=3,W=3,seed=5,scale=10");
  const BinSpec spec = BinSpec::make(-30, 30, 1);
  const ExactDos base = enumerate_dos(*m, spec);
  EnumerateOptions opts;
  opts.site_order = {8, 3, 1, 0, 7, 2, 6, 5, 4};
  CHECK(enumerate_dos(*m, spec, opts).counts == base.counts);
  opts.site_order.clear();
  opts.threads = 3;
  CHECK(enumerate_dos(*m, spec, opts).counts == base.counts);
  opts.site_order = {0, 1, 2};
  CHECK_THROWS_AS(enumerate_dos(*m, spec, opts), InvalidArgument);
}

TEST_CASE("budget") {
  const IsingModel m(6);
  CHECK(describe_state_count(m.space()) == "2^36 = 68719476736 states");
  try {
    enumerate_dos(m, BinSpec::make(-80, 80, 1));
    FAIL("expected the budget to be exceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.required() == "2^36 = 68719476736 states");
  }
  EnumerateOptions small;
  small.budget = 15;
  CHECK_THROWS_AS(enumerate_dos(IsingModel(2), BinSpec::make(-10, 10, 1), small), BudgetExceeded);
  CHECK_FALSE(state_count(ConfigSpace::flat(65, 2)).has_value());
  CHECK(state_count(ConfigSpace::flat(3, 5)) == 125u);
}

TEST_CASE("histogram error alignment") {
  const IsingModel m(2);
  const ExactDos d = enumerate_dos(m, BinSpec::make(-10, 10, 1));
  DosHistogram est = exact_as_histogram(d);
  const HistogramError same = histogram_error(d, est);
  CHECK(same.mean_abs == 0.0);
  CHECK(same.max_abs == 0.0);
  CHECK(same.offset == 0.0);
  CHECK(same.defects.empty());

  for (auto& s : est.s) s += 7.0;
  const HistogramError shifted = histogram_error(d, est);
  CHECK(shifted.mean_abs == doctest::Approx(0.0));
  CHECK(shifted.offset == doctest::Approx(-7.0));
}

TEST_CASE("one bad bin among ten") {
  EntropyTable ref, est;
  ref.spec = est.spec = BinSpec::make(0, 10, 1);
  ref.s.assign(10, 0);
  ref.present.assign(10, true);
  ref.counts.assign(10, 1);
  for (std::size_t b = 0; b < 10; ++b) ref.s[b] = 0.3 * static_cast<double>(b);
  est = ref;
  est.s[4] += 1.0;
  const HistogramError e = compare_entropy(ref, est);
  CHECK(e.mean_abs == doctest::Approx(0.1));
  CHECK(e.max_abs == doctest::Approx(1.0));
  CHECK(e.offset == 0.0);
  CHECK(e.shared_bins == 10);
}

TEST_CASE("coverage defects are reported separately") {
  EntropyTable ref, est;
  ref.spec = est.spec = BinSpec::make(0, 4, 1);
  ref.s = {1, 2, 3, 0};
  ref.present = {true, true, true, false};
  ref.counts = {3, 7, 20, 0};
  est.s = {1, 2, 0, 5};
  est.present = {true, true, false, true};
  est.counts = {1, 1, 0, 1};
  const HistogramError e = compare_entropy(ref, est);
  CHECK(e.shared_bins == 2);
  CHECK(e.mean_abs == 0.0);
  REQUIRE(e.defects.size() == 2);
  CHECK(e.defects[0].bin == 2);
  CHECK(e.defects[0].in_reference);
  CHECK(e.defects[0].reference_count == 20);
  CHECK(e.defects[1].bin == 3);
  CHECK_FALSE(e.defects[1].in_reference);
  CHECK(e.missed_bins(8) == 1);
  CHECK(e.missed_bins(21) == 0);

  EntropyTable other = est;
  other.spec = BinSpec::make(0, 8, 2);
  CHECK_THROWS_AS(compare_entropy(ref, other), SpecMismatch);
}

TEST_CASE("wang-landau on 2x2 Ising matches enumeration") {
  const IsingModel m(2);
  const BinSpec spec = BinSpec::make(-10, 10, 1);
  RunConfig cfg;
  cfg.bins = spec;
  cfg.iterations = 12;
  cfg.seed = 42;
  cfg.init = Config::zeros(m.space());
  const RunResult r = run(m, cfg);
  const HistogramError e = histogram_error(enumerate_dos(m, spec), r.hist);
  CHECK(e.mean_abs <= 0.1);
  CHECK(e.defects.empty());
}

}  // TEST_SUITE
