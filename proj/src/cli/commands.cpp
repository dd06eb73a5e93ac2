#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwl/cli.hpp"
#include "gwl/dataset.hpp"
#include "gwl/energy_models.hpp"
#include "gwl/histogram_io.hpp"
#include "gwl/oracle.hpp"
#include "gwl/svg_plot.hpp"
#include "gwl/wl_engine.hpp"

namespace gwl::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Raised inside a command to leave with a specific exit code.
struct Exit {
  int code;
  std::string message;
};

BinSpec parse_bins(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
  if (b == std::string::npos || text.find(':', b + 1) != std::string::npos)
    throw Exit{kUsage, "malformed --bins '" + text + "', expected LO:HI:WIDTH"};
  double lo, hi, width;
  try {
    std::size_t used = 0;
    const std::string parts[3] = {text.substr(0, a), text.substr(a + 1, b - a - 1), text.substr(b + 1)};
    double* dst[3] = {&lo, &hi, &width};
    for (int k = 0; k < 3; ++k) {
      *dst[k] = std::stod(parts[k], &used);
      if (used != parts[k].size()) throw std::invalid_argument("trailing");
    }
  } catch (const std::exception&) {
    throw Exit{kUsage, "malformed --bins '" + text + "', expected LO:HI:WIDTH"};
  }
  try {
    return BinSpec::make(lo, hi, width);
  } catch (const InvalidArgument& e) {
    throw Exit{kUsage, e.what()};
  }
}

std::unique_ptr<EnergyModel> load_model(const std::string& name) {
  try {
    return make_model(name);
  } catch (const UnknownModel& e) {
    throw Exit{kUsage, e.what()};
  } catch (const FormatError& e) {
    throw Exit{kUsage, "cannot load model '" + name + "': " + e.what()};
  } catch (const IoError& e) {
    throw Exit{kUsage, "cannot load model '" + name + "': " + e.what()};
  }
}

// nn:<file> models are pinned by the git blob hash of their weight file.
std::string weight_hash(const std::string& model) {
  if (model.rfind("nn:", 0) != 0) return "";
  return git_blob_hash(read_text(model.substr(3)));
}

Config read_init(const std::string& spec, const ConfigSpace& space) {
  if (spec == "zeros") return Config::zeros(space);
  std::string text;
  try {
    text = read_text(spec);
  } catch (const IoError& e) {
    throw Exit{kUsage, std::string("cannot read --init: ") + e.what()};
  }
  for (char& c : text)
    if (c == ',' || c == '[' || c == ']') c = ' ';
  std::istringstream in(text);
  std::vector<int> values;
  int v;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw Exit{kUsage, "--init file " + spec + " must hold integers"};
  Config x(std::move(values));
  try {
    check_config(space, x);
  } catch (const DimensionMismatch& e) {
    throw Exit{kUsage, std::string("--init does not fit the model: ") + e.what()};
  }
  return x;
}

fs::path with_suffix(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  return fs::path(p.string() + suffix);
}

fs::path walker_path(const fs::path& out, std::size_t walker, std::size_t walkers) {
  if (walkers <= 1) return out;
  fs::path p = out;
  const std::string ext = p.extension().string();
  p.replace_extension();
  return fs::path(p.string() + ".w" + std::to_string(walker) + ext);
}

Json samples_json(const RepresentativeStore& store) {
  Json groups = Json::array();
  for (const auto& [key, list] : store.groups) {
    Json items = Json::array();
    for (const auto& s : list) items.push_back({{"energy", s.energy}, {"step", s.step}, {"config", s.config.values}});
    groups.push_back({{"group", key},
                      {"lo", static_cast<double>(key) * store.group_width},
                      {"hi", static_cast<double>(key + 1) * store.group_width},
                      {"samples", std::move(items)}});
  }
  return Json{{"group_width", store.group_width}, {"stride", store.stride}, {"cap", store.cap},
              {"groups", std::move(groups)}};
}

Json report_json(const RunReport& report) {
  Json its = Json::array();
  for (const auto& it : report.iterations)
    its.push_back({{"iteration", it.iteration}, {"steps", it.steps}, {"ln_f", it.ln_f}, {"visited_bins", it.visited_bins}});
  return Json{{"iterations", std::move(its)},
              {"total_steps", report.total_steps},
              {"overflow_low", report.overflow_low},
              {"overflow_high", report.overflow_high},
              {"wall_seconds", report.wall_seconds}};
}

std::string command_line(const std::vector<std::string>& args) {
  std::string out;
  for (const auto& a : args) {
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out;
}

struct SampleFlags {
  std::string model;
  std::string proposal = "gwg";
  std::string bins = "-300:100:1";
  std::uint64_t iters = 10;
  double lnf0 = 1.0;
  std::uint64_t seed = 0;
  std::string out = "dos.csv";
  std::string checkpoint;
  std::string resume;
  std::uint64_t sample_stride = 50000;
  double group_width = 5.0;
  std::size_t group_cap = 200;
  std::string init = "zeros";
  std::uint64_t flatness_stride = 10000;
  std::uint64_t max_iteration_steps = 100000000;
  bool restart = false;
  double uniform_mix = 0.5;
  std::size_t walkers = 1;
};

struct WalkerOutcome {
  int code = kOk;
  std::string message;
};

void write_outputs(const Walker& walker, const fs::path& csv, const fs::path& ckpt) {
  const auto& st = walker.state();
  write_text(csv, histogram_csv(st.hist));
  write_text(with_suffix(csv, ".json"), histogram_json(st.hist, st.sched));
  write_text(with_suffix(csv, ".samples.json"), samples_json(walker.samples()).dump() + "\n");
  write_text(ckpt, snapshot(walker));
}

WalkerOutcome run_walker(const SampleFlags& f, const std::vector<std::string>& args, const EnergyModel& model,
                         const BinSpec& bins, std::size_t k, std::ostream& out) {
  const fs::path csv = walker_path(f.out, k, f.walkers);
  const fs::path ckpt =
      f.checkpoint.empty() ? with_suffix(csv, ".ckpt.json") : walker_path(f.checkpoint, k, f.walkers);
  const std::uint64_t seed = f.seed + k;
  const std::string started = utc_timestamp();

  EngineOptions opts;
  opts.flatness_stride = f.flatness_stride;
  opts.max_iteration_steps = f.max_iteration_steps;
  opts.restart_each_iteration = f.restart;
  opts.uniform_mix = f.uniform_mix;
  opts.group_width = f.group_width;
  opts.sample_stride = f.sample_stride;
  opts.group_cap = f.group_cap;

  std::optional<Walker> walker;
  if (!f.resume.empty()) {
    const fs::path from = walker_path(f.resume, k, f.walkers);
    std::string text;
    try {
      text = read_text(from);
    } catch (const IoError& e) {
      return {kIoError, e.what()};
    }
    try {
      walker.emplace(restore(text, model, opts));
    } catch (const CheckpointError& e) {
      return {kUsage, e.what()};
    }
    if (walker->state().sched.iteration >= f.iters) {
      out << "notice: " << from.string() << " already completed " << walker->state().sched.iteration
          << " iterations; nothing to do\n";
      return {};
    }
    if (!(walker->state().hist.spec == bins))
      out << "notice: using the bin grid stored in the checkpoint\n";
  } else {
    try {
      walker.emplace(Walker::start(model, bins, proposal_kind_from_string(f.proposal), seed,
                                   read_init(f.init, model.space()), f.lnf0, opts));
    } catch (const InvalidArgument& e) {
      return {kUsage, e.what()};
    }
  }

  WalkerOutcome outcome;
  RunReport report;
  try {
    report = continue_run(*walker, f.iters);
  } catch (const IterationTimeout& e) {
    outcome = {kTimeout, e.what()};
  }

  try {
    write_outputs(*walker, csv, ckpt);
    Json manifest;
    manifest["command_line"] = command_line(args);
    manifest["seed"] = seed;
    manifest["model"] = model.name();
    manifest["weights_git_hash"] = weight_hash(model.name());
    const auto& spec = walker->state().hist.spec;
    manifest["bins"] = {{"lo", spec.lo}, {"hi", spec.hi}, {"width", spec.width}};
    manifest["proposal"] = std::string(to_string(walker->state().proposal));
    manifest["uniform_mix"] = walker->options().uniform_mix;
    manifest["iterations"] = f.iters;
    manifest["ln_f0"] = walker->state().sched.ln_f0;
    manifest["resumed_from"] = f.resume;
    manifest["status"] = outcome.code == kOk ? "complete" : "timeout";
    manifest["report"] = report_json(report);
    manifest["outputs"] = {{"histogram_csv", csv.string()},
                           {"histogram_json", with_suffix(csv, ".json").string()},
                           {"samples", with_suffix(csv, ".samples.json").string()},
                           {"checkpoint", ckpt.string()}};
    manifest["started"] = started;
    manifest["finished"] = utc_timestamp();
    write_text(with_suffix(csv, ".manifest.json"), manifest.dump(2) + "\n");
  } catch (const IoError& e) {
    return {kIoError, e.what()};
  }
  if (outcome.code == kOk) {
    const auto& st = walker->state();
    out << csv.string() << ": " << st.hist.visited_count() << " bins visited, " << st.step_count << " steps, ln f "
        << st.sched.ln_f() << "\n";
  }
  return outcome;
}

int cmd_sample(const SampleFlags& f, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const BinSpec bins = parse_bins(f.bins);
  if (f.iters < 1) throw Exit{kUsage, "--iters must be at least 1"};
  if (!(f.lnf0 > 0)) throw Exit{kUsage, "--lnf0 must be positive"};
  if (f.walkers < 1) throw Exit{kUsage, "--walkers must be at least 1"};
  auto model = load_model(f.model);

  std::vector<WalkerOutcome> outcomes(f.walkers);
  if (f.walkers == 1) {
    outcomes[0] = run_walker(f, args, *model, bins, 0, out);
  } else {
    // Independent chains, one histogram each; never merged.
    std::vector<std::ostringstream> logs(f.walkers);
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < f.walkers; ++k)
      pool.emplace_back([&, k] { outcomes[k] = run_walker(f, args, *model, bins, k, logs[k]); });
    for (auto& t : pool) t.join();
    for (auto& l : logs) out << l.str();
  }
  int code = kOk;
  for (const auto& o : outcomes) {
    if (o.code == kOk) continue;
    err << "error: " << o.message << "\n";
    code = std::max(code, o.code);
  }
  return code;
}

struct EnumerateFlags {
  std::string model;
  std::string bins = "-300:100:1";
  std::string out;
  unsigned threads = 1;
};

std::uint64_t budget_from_env() {
  const char* env = std::getenv("GWL_ENUM_BUDGET");
  if (!env || !*env) return kDefaultEnumerationBudget;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || v == 0) throw Exit{kUsage, std::string("GWL_ENUM_BUDGET must be a positive integer, got '") + env + "'"};
  return v;
}

int cmd_enumerate(const EnumerateFlags& f, std::ostream& out) {
  const BinSpec bins = parse_bins(f.bins);
  auto model = load_model(f.model);
  EnumerateOptions opts;
  opts.budget = budget_from_env();
  opts.threads = std::max(1u, f.threads);
  const auto total = state_count(model->space());
  if (!total || *total > opts.budget)
    throw Exit{kBudget, "enumeration needs " + describe_state_count(model->space()) + ", budget is " +
                            std::to_string(opts.budget) + " (set GWL_ENUM_BUDGET to raise it)"};

  // Fail on an unwritable destination before spending time enumerating.
  std::ofstream probe(f.out, std::ios::binary | std::ios::app);
  if (!probe) throw Exit{kIoError, "cannot open " + f.out + " for writing"};
  probe.close();

  const ExactDos exact = enumerate_dos(*model, bins, opts);
  try {
    write_text(f.out, histogram_csv(exact));
  } catch (const IoError& e) {
    throw Exit{kIoError, e.what()};
  }
  std::size_t nonzero = 0;
  for (auto c : exact.counts) nonzero += c > 0;
  out << f.out << ": " << exact.total << " states, " << nonzero << " non-empty bins, overflow " << exact.overflow_low
      << "/" << exact.overflow_high << "\n";
  return kOk;
}

struct CompareFlags {
  std::string reference;
  std::string estimate;
  double tolerance = 0.1;
  std::optional<double> max_tolerance;
  std::optional<std::uint64_t> coverage_min_count;
};

EntropyTable load_table(const std::string& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const IoError& e) {
    throw Exit{kIoError, e.what()};
  }
  try {
    return parse_histogram_csv(text);
  } catch (const FormatError& e) {
    throw Exit{kUsage, path + ": " + e.what()};
  }
}

int cmd_compare(const CompareFlags& f, std::ostream& out) {
  const EntropyTable ref = load_table(f.reference);
  const EntropyTable est = load_table(f.estimate);
  HistogramError e;
  try {
    e = compare_entropy(ref, est);
  } catch (const SpecMismatch& ex) {
    throw Exit{kUsage, ex.what()};
  }
  Json defects = Json::array();
  std::size_t missed = 0, extra = 0;
  for (const auto& d : e.defects) {
    (d.in_reference ? missed : extra) += 1;
    defects.push_back({{"bin_lo", d.center}, {"side", d.in_reference ? "reference" : "estimate"},
                       {"reference_count", d.reference_count}});
  }
  Json report;
  report["mean_abs"] = e.mean_abs;
  report["max_abs"] = e.max_abs;
  report["offset"] = e.offset;
  report["max_aligned_mean_abs"] = e.max_aligned_mean_abs;
  report["max_aligned_max_abs"] = e.max_aligned_max_abs;
  report["max_aligned_offset"] = e.max_aligned_offset;
  report["shared_bins"] = e.shared_bins;
  report["coverage_defects"] = e.defects.size();
  report["missed_reference_bins"] = missed;
  report["extra_estimate_bins"] = extra;
  report["defects"] = std::move(defects);
  bool pass = e.shared_bins > 0 && e.mean_abs <= f.tolerance;
  if (f.max_tolerance) pass = pass && e.max_abs <= *f.max_tolerance;
  if (f.coverage_min_count) {
    const std::size_t serious = e.missed_bins(*f.coverage_min_count);
    report["missed_bins_at_min_count"] = serious;
    pass = pass && serious == 0;
  }
  report["pass"] = pass;
  out << report.dump() << "\n";
  return pass ? kOk : kFailed;
}

struct TrainFlags {
  std::string images;
  std::string labels;
  std::size_t side = 5;
  std::size_t epochs = 10;
  double lr = 0.1;
  std::uint64_t seed = 0;
  std::size_t batch_size = 16;
  int c1 = 3;
  int c2 = 8;
  std::string out;
  std::string toy_csv;
};

int cmd_train(const TrainFlags& f, std::ostream& out) {
  IdxImages images;
  IdxLabels labels;
  try {
    images = parse_idx_images(read_binary(f.images));
    labels = parse_idx_labels(read_binary(f.labels));
  } catch (const Error& e) {
    throw Exit{kUsage, e.what()};
  }
  std::vector<LabelledConfig> data;
  try {
    data = derive_toy(images, labels, f.side);
  } catch (const InvalidArgument& e) {
    throw Exit{kUsage, e.what()};
  }
  if (data.empty()) throw Exit{kUsage, "no samples labelled 0 or 1"};
  if (!f.toy_csv.empty()) {
    try {
      write_text(f.toy_csv, toy_csv(data));
    } catch (const IoError& e) {
      throw Exit{kIoError, e.what()};
    }
  }

  Network net;
  try {
    net = Network::tiny_cnn(ConfigSpace::grid(f.side, f.side, 2), f.c1, f.c2);
  } catch (const InvalidArgument& e) {
    throw Exit{kUsage, e.what()};
  }
  Rng init_rng(f.seed);
  net.init_glorot(init_rng);
  TrainOptions opts;
  opts.epochs = f.epochs;
  opts.lr = f.lr;
  opts.seed = f.seed;
  opts.batch_size = f.batch_size;
  if (f.epochs > 0) train(net, data, opts);

  const std::string text = serialize_weights(net);
  try {
    write_text(f.out, text);
  } catch (const IoError& e) {
    throw Exit{kIoError, e.what()};
  }
  out << "samples " << data.size() << ", train accuracy " << accuracy(net, data) << ", mean loss "
      << mean_loss(net, data) << ", weights " << f.out << " (" << git_blob_hash(text) << ")\n";
  return kOk;
}

struct PlotFlags {
  std::string in;
  std::vector<std::string> overlay;
  std::string out;
  std::string title = "entropy histogram";
};

int cmd_plot(const PlotFlags& f, std::ostream& out) {
  std::vector<PlotSeries> series;
  series.push_back(series_from_table(load_table(f.in), fs::path(f.in).filename().string()));
  for (const auto& o : f.overlay) series.push_back(series_from_table(load_table(o), fs::path(o).filename().string()));
  std::string svg;
  try {
    svg = render_svg(series, f.title);
  } catch (const InvalidArgument&) {
    throw Exit{kFailed, "nothing to plot"};
  }
  try {
    write_text(f.out, svg);
  } catch (const IoError& e) {
    throw Exit{kIoError, e.what()};
  }
  out << f.out << "\n";
  return kOk;
}

// CLI11 reads a value starting with '-' as a flag, so glue range values
// like "--bins -40:40:1" into "--bins=-40:40:1".
std::vector<std::string> normalize_args(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--bins" && i + 1 < args.size()) {
      out.push_back("--bins=" + args[i + 1]);
      ++i;
    } else {
      out.push_back(args[i]);
    }
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> args = normalize_args(raw_args);
  CLI::App app{"Density-of-states estimation with Wang-Landau and gradient Wang-Landau sampling", "gwl"};
  app.require_subcommand(1);

  SampleFlags sf;
  auto* sample = app.add_subcommand("sample", "Run a Wang-Landau chain and write the entropy histogram");
  sample->add_option("--model", sf.model, "ising:L=<n>, nn:<weights>, tinycnn:H=..,W=..,seed=..,scale=..")->required();
  sample->add_option("--proposal", sf.proposal, "random or gwg")->check(CLI::IsMember({"random", "gwg"}));
  sample->add_option("--bins", sf.bins, "LO:HI:WIDTH");
  sample->add_option("--iters", sf.iters, "Number of iterations (halvings of ln f)");
  sample->add_option("--lnf0", sf.lnf0, "Initial ln f");
  sample->add_option("--seed", sf.seed);
  sample->add_option("--out", sf.out, "Histogram CSV; .json, .samples.json and .manifest.json are written beside it");
  sample->add_option("--checkpoint", sf.checkpoint, "Checkpoint path (default <out>.ckpt.json)");
  sample->add_option("--resume", sf.resume, "Continue from a checkpoint");
  sample->add_option("--sample-stride", sf.sample_stride, "Steps between representative captures");
  sample->add_option("--group-width", sf.group_width, "Output width of a representative group");
  sample->add_option("--group-cap", sf.group_cap, "Representatives kept per group");
  sample->add_option("--init", sf.init, "zeros or a file of integers");
  sample->add_option("--flatness-stride", sf.flatness_stride, "Steps between flatness checks");
  sample->add_option("--max-iteration-steps", sf.max_iteration_steps, "Step guard per iteration");
  sample->add_flag("--restart", sf.restart, "Restart from the initial config at every iteration");
  sample->add_option("--uniform-mix", sf.uniform_mix, "Share of gwg steps drawn from the uniform proposal")
      ->check(CLI::Range(0.0, 1.0));
  sample->add_option("--walkers", sf.walkers, "Independent seeded walkers (seed, seed+1, ...)");

  EnumerateFlags ef;
  auto* enumerate = app.add_subcommand("enumerate", "Exact density of states by exhaustive enumeration");
  enumerate->add_option("--model", ef.model)->required();
  enumerate->add_option("--bins", ef.bins, "LO:HI:WIDTH");
  enumerate->add_option("--out", ef.out)->required();
  enumerate->add_option("--threads", ef.threads);

  CompareFlags cf;
  auto* compare = app.add_subcommand("compare", "Aligned entropy error between two histogram CSVs");
  compare->add_option("reference", cf.reference, "Reference CSV (e.g. from enumerate)")->required();
  compare->add_option("estimate", cf.estimate, "Estimated CSV")->required();
  compare->add_option("--tolerance", cf.tolerance, "Pass if mean abs error <= tolerance");
  compare->add_option("--max-tolerance", cf.max_tolerance, "Also require max abs error <= this");
  compare->add_option("--coverage-min-count", cf.coverage_min_count,
                      "Also require every reference bin with at least this count to be visited");

  TrainFlags tf;
  auto* trainc = app.add_subcommand("train", "Train a TinyCNN on the binarised toy set derived from IDX files");
  trainc->add_option("--idx-images", tf.images)->required();
  trainc->add_option("--idx-labels", tf.labels)->required();
  trainc->add_option("--side", tf.side)->check(CLI::IsMember({4, 5}));
  trainc->add_option("--epochs", tf.epochs);
  trainc->add_option("--lr", tf.lr);
  trainc->add_option("--seed", tf.seed);
  trainc->add_option("--batch-size", tf.batch_size);
  trainc->add_option("--channels1", tf.c1);
  trainc->add_option("--channels2", tf.c2);
  trainc->add_option("--out", tf.out)->required();
  trainc->add_option("--toy-csv", tf.toy_csv, "Also export the derived toy set");

  PlotFlags pf;
  auto* plot = app.add_subcommand("plot", "Render histogram CSVs as an SVG line chart");
  plot->add_option("--in", pf.in)->required();
  plot->add_option("--overlay", pf.overlay);
  plot->add_option("--out", pf.out)->required();
  plot->add_option("--title", pf.title);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sample) return cmd_sample(sf, raw_args, out, err);
    if (*enumerate) return cmd_enumerate(ef, out);
    if (*compare) return cmd_compare(cf, out);
    if (*trainc) return cmd_train(tf, out);
    if (*plot) return cmd_plot(pf, out);
  } catch (const Exit& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace gwl::cli
