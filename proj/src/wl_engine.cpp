#include "gwl/wl_engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "gwl/entropy_interp.hpp"
#include "gwl/proposals.hpp"

namespace gwl {

std::string_view to_string(ProposalKind kind) { return kind == ProposalKind::gwg ? "gwg" : "random"; }

ProposalKind proposal_kind_from_string(std::string_view name) {
  if (name == "random") return ProposalKind::random;
  if (name == "gwg") return ProposalKind::gwg;
  throw InvalidArgument("unknown proposal '" + std::string(name) + "' (expected random or gwg)");
}

std::int64_t RepresentativeStore::group_of(double z) const {
  return static_cast<std::int64_t>(std::floor(z / group_width));
}

void RepresentativeStore::offer(const Config& x, double z, std::uint64_t step) {
  auto& list = groups[group_of(z)];
  if (list.size() < cap) list.push_back({x, z, step});
}

std::size_t RepresentativeStore::total() const {
  std::size_t n = 0;
  for (const auto& [key, list] : groups) n += list.size();
  return n;
}

double acceptance_log_ratio(double s_x, double s_xp, double log_q_fwd, double log_q_rev) {
  if (s_xp == std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
  return std::min(0.0, (s_x - s_xp) + log_q_rev - log_q_fwd);
}

Walker::Walker(const EnergyModel& model, WalkerState state, EngineOptions opts, Config init)
    : model_(&model), state_(std::move(state)), opts_(opts), init_(std::move(init)) {
  if (opts_.flatness_stride == 0) throw InvalidArgument("flatness check stride must be positive");
  if (opts_.sample_stride == 0) throw InvalidArgument("sample stride must be positive");
  if (!(opts_.group_width > 0)) throw InvalidArgument("group width must be positive");
  if (!(opts_.uniform_mix >= 0 && opts_.uniform_mix <= 1)) throw InvalidArgument("uniform mix must lie in [0, 1]");
  if (!(state_.sched.ln_f0 > 0)) throw InvalidArgument("ln f0 must be positive");
  if (state_.hist.size() != state_.hist.spec.count()) throw InvalidArgument("histogram does not match its bin spec");
  if (state_.hist.size() < 2) throw InvalidArgument("the sampler needs at least two bins");
  check_config(model.space(), state_.config);
  samples_.group_width = opts_.group_width;
  samples_.stride = opts_.sample_stride;
  samples_.cap = opts_.group_cap;
  centers_ = bin_centers(state_.hist.spec);
  refresh_cache();
}

Walker Walker::start(const EnergyModel& model, const BinSpec& bins, ProposalKind proposal, std::uint64_t seed,
                     const Config& init, double ln_f0, EngineOptions opts) {
  WalkerState st;
  st.config = init;
  st.hist = DosHistogram(bins);
  st.sched = ModificationSchedule{ln_f0, 0};
  st.rng = Rng(seed);
  st.proposal = proposal;
  return Walker(model, std::move(st), opts, init);
}

void Walker::refresh_cache() {
  if (state_.proposal == ProposalKind::gwg)
    state_.energy = model_->energy_and_grad(state_.config, grad_);
  else
    state_.energy = model_->energy(state_.config);
  if (!bin_index(state_.hist.spec, state_.energy).in_range())
    throw InvalidArgument("initial config has output " + std::to_string(state_.energy) +
                          " outside the bin range");
}

StepRecord Walker::step() {
  auto& st = state_;
  auto& hist = st.hist;
  StepRecord rec;
  rec.from = bin_index(hist.spec, st.energy);

  ProposalOutcome prop;
  double cand_z = 0;
  SiteMatrix cand_grad;
  const bool gwg = st.proposal == ProposalKind::gwg;
  const bool use_gwg = gwg && (opts_.uniform_mix <= 0 || st.rng.uniform() >= opts_.uniform_mix);
  if (use_gwg) {
    const InterpView entropy(centers_, hist.s);
    const SiteMatrix f_grad = entropy_target_grad(entropy, st.energy, grad_);
    prop = propose_gwg(
        st.config, f_grad,
        [&](const Config& cand) {
          cand_z = model_->energy_and_grad(cand, cand_grad);
          return entropy_target_grad(entropy, cand_z, cand_grad);
        },
        st.rng);
  } else {
    prop = propose_random(st.config, model_->space(), st.rng);
    cand_z = gwg ? model_->energy_and_grad(prop.candidate, cand_grad) : model_->energy(prop.candidate);
  }

  rec.candidate = bin_index(hist.spec, cand_z);
  const double s_x = hist.s[rec.from.bin];
  const double s_c = rec.candidate.in_range() ? hist.s[rec.candidate.bin] : std::numeric_limits<double>::infinity();
  if (!rec.candidate.in_range()) {
    if (rec.candidate.kind == BinIndex::Kind::low)
      ++hist.overflow_low;
    else
      ++hist.overflow_high;
  }
  rec.log_accept = acceptance_log_ratio(s_x, s_c, prop.log_q_forward, prop.log_q_reverse);
  const double u = st.rng.uniform();
  rec.accepted = u < std::exp(rec.log_accept);
  if (rec.accepted) {
    st.config = std::move(prop.candidate);
    st.energy = cand_z;
    if (gwg) grad_ = std::move(cand_grad);
  }

  rec.visited = rec.accepted ? rec.candidate : rec.from;
  if (opts_.update_entropy)
    hist.record_visit(rec.visited, st.sched.ln_f());
  else
    hist.count_visit(rec.visited);

  ++st.step_count;
  ++st.iteration_steps;
  if (st.step_count % samples_.stride == 0) samples_.offer(st.config, st.energy, st.step_count);
  return rec;
}

std::uint64_t Walker::run_iteration() {
  std::uint64_t taken = 0;
  for (;;) {
    if (state_.iteration_steps >= opts_.max_iteration_steps)
      throw IterationTimeout("iteration " + std::to_string(state_.sched.iteration) + " not flat after " +
                                 std::to_string(state_.iteration_steps) + " steps",
                             state_);
    step();
    ++taken;
    if (state_.iteration_steps % opts_.flatness_stride == 0 && state_.hist.is_flat()) return taken;
  }
}

void Walker::advance() {
  advance_iteration(state_.hist, state_.sched);
  state_.iteration_steps = 0;
  if (opts_.restart_each_iteration) {
    state_.config = init_;
    refresh_cache();
  }
}

RunReport continue_run(Walker& walker, std::uint64_t iterations) {
  RunReport report;
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t first_step = walker.state().step_count;
  while (walker.state().sched.iteration < iterations) {
    IterationReport it;
    it.iteration = walker.state().sched.iteration;
    it.ln_f = walker.state().sched.ln_f();
    walker.run_iteration();
    it.steps = walker.state().iteration_steps;
    it.visited_bins = walker.state().hist.current_visited_count();
    report.iterations.push_back(it);
    walker.advance();
  }
  report.overflow_low = walker.state().hist.overflow_low;
  report.overflow_high = walker.state().hist.overflow_high;
  report.total_steps = walker.state().step_count - first_step;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

RunResult run(const EnergyModel& model, const RunConfig& cfg) {
  if (cfg.iterations < 1) throw InvalidArgument("need at least one iteration");
  Walker walker = Walker::start(model, cfg.bins, cfg.proposal, cfg.seed, cfg.init, cfg.ln_f0, cfg.engine);
  RunReport report = continue_run(walker, cfg.iterations);
  return RunResult{walker.state().hist, walker.state().sched, walker.samples(), std::move(report)};
}

}  // namespace gwl
