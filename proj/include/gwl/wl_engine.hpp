#ifndef GWL_WL_ENGINE_HPP
#define GWL_WL_ENGINE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gwl/config_space.hpp"
#include "gwl/dos_histogram.hpp"
#include "gwl/energy_models.hpp"
#include "gwl/errors.hpp"
#include "gwl/random.hpp"

namespace gwl {

enum class ProposalKind { random, gwg };

std::string_view to_string(ProposalKind kind);
ProposalKind proposal_kind_from_string(std::string_view name);

struct WalkerState {
  Config config;
  double energy = 0;  // cached model energy of config
  DosHistogram hist;
  ModificationSchedule sched;
  std::uint64_t step_count = 0;
  std::uint64_t iteration_steps = 0;  // steps since the current iteration began
  Rng rng;
  ProposalKind proposal = ProposalKind::random;
};

struct RepresentativeSample {
  Config config;
  double energy = 0;
  std::uint64_t step = 0;

  friend bool operator==(const RepresentativeSample&, const RepresentativeSample&) = default;
};

// Configs captured every `stride` engine steps, filed by
// floor(energy / group_width) and capped per group (first come first kept).
struct RepresentativeStore {
  double group_width = 5.0;
  std::uint64_t stride = 50000;
  std::size_t cap = 200;
  std::map<std::int64_t, std::vector<RepresentativeSample>> groups;

  std::int64_t group_of(double z) const;
  void offer(const Config& x, double z, std::uint64_t step);
  std::size_t total() const;

  friend bool operator==(const RepresentativeStore&, const RepresentativeStore&) = default;
};

struct EngineOptions {
  std::uint64_t flatness_stride = 10000;
  std::uint64_t max_iteration_steps = 100000000;
  bool update_entropy = true;  // false: s frozen, h still counts visits
  bool restart_each_iteration = false;
  // Under ProposalKind::gwg, the share of steps that use a uniform
  // single-site move instead of the gradient proposal. Both kernels are
  // accepted against the same binned entropy.
  double uniform_mix = 0.5;
  double group_width = 5.0;
  std::uint64_t sample_stride = 50000;
  std::size_t group_cap = 200;
};

// ln A = min(0, (s_x - s_x') + log_q_rev - log_q_fwd); s_x' = +inf gives -inf.
double acceptance_log_ratio(double s_x, double s_xp, double log_q_fwd, double log_q_rev);

struct StepRecord {
  bool accepted = false;
  BinIndex from;       // bin of the config before the step
  BinIndex candidate;  // bin of the proposed config (may be out of range)
  BinIndex visited;    // bin updated after the decision
  double log_accept = 0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

class IterationTimeout : public Error {
 public:
  IterationTimeout(const std::string& what, WalkerState partial)
      : Error(what), partial_(std::move(partial)) {}

  const WalkerState& partial() const { return partial_; }

 private:
  WalkerState partial_;
};

// One Wang-Landau chain. Owns its state; the model is borrowed and must
// outlive the walker.
class Walker {
 public:
  Walker(const EnergyModel& model, WalkerState state, EngineOptions opts, Config init);

  static Walker start(const EnergyModel& model, const BinSpec& bins, ProposalKind proposal, std::uint64_t seed,
                      const Config& init, double ln_f0 = 1.0, EngineOptions opts = {});

  StepRecord step();

  // Steps until the visit histogram is flat at a check point. Returns the
  // number of steps taken by this call. Throws IterationTimeout once the
  // iteration exceeds max_iteration_steps.
  std::uint64_t run_iteration();

  // Resets h, halves ln f, optionally restarts from the initial config.
  void advance();

  const WalkerState& state() const { return state_; }
  WalkerState& mutable_state() { return state_; }
  const RepresentativeStore& samples() const { return samples_; }
  RepresentativeStore& samples() { return samples_; }
  const EngineOptions& options() const { return opts_; }
  const Config& init() const { return init_; }
  const EnergyModel& model() const { return *model_; }

 private:
  void refresh_cache();

  const EnergyModel* model_;
  WalkerState state_;
  EngineOptions opts_;
  Config init_;
  RepresentativeStore samples_;
  std::vector<double> centers_;
  SiteMatrix grad_;  // dz/d onehot at state_.config, GWG only
};

struct RunConfig {
  BinSpec bins;
  std::uint64_t iterations = 1;
  ProposalKind proposal = ProposalKind::random;
  std::uint64_t seed = 0;
  double ln_f0 = 1.0;
  Config init;
  EngineOptions engine;
};

struct IterationReport {
  std::uint64_t iteration = 0;
  std::uint64_t steps = 0;
  double ln_f = 0;
  std::size_t visited_bins = 0;
};

struct RunReport {
  std::vector<IterationReport> iterations;
  std::uint64_t overflow_low = 0;
  std::uint64_t overflow_high = 0;
  std::uint64_t total_steps = 0;
  double wall_seconds = 0;
};

struct RunResult {
  DosHistogram hist;
  ModificationSchedule sched;
  RepresentativeStore samples;
  RunReport report;
};

// Runs iterations until sched.iteration reaches `iterations`. Timeouts
// propagate with the walker left at the point of failure.
RunReport continue_run(Walker& walker, std::uint64_t iterations);

RunResult run(const EnergyModel& model, const RunConfig& cfg);

// Checkpoint (wlck-v1) of a walker: histogram, schedule, counters, rng,
// config and representative store.
std::string snapshot(const Walker& walker);

class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Throws CheckpointError on a format or model-name mismatch.
Walker restore(const std::string& text, const EnergyModel& model, EngineOptions opts = {});

// Model name recorded in a checkpoint.
std::string checkpoint_model_name(const std::string& text);

}  // namespace gwl

#endif  // GWL_WL_ENGINE_HPP
