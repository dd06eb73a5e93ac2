#include <json.hpp>

#include "gwl/wl_engine.hpp"

namespace gwl {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kCheckpointFormat = "wlck-v1";

Json config_json(const Config& x) { return Json(x.values); }

Config config_from(const Json& j) { return Config(j.get<std::vector<int>>()); }

Json parse_checkpoint(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format") || doc["format"] != kCheckpointFormat)
    throw CheckpointError("checkpoint format must be '" + std::string(kCheckpointFormat) + "'");
  return doc;
}

}  // namespace

std::string snapshot(const Walker& walker) {
  const WalkerState& st = walker.state();
  Json doc;
  doc["format"] = kCheckpointFormat;
  doc["model"] = walker.model().name();
  doc["bins"] = {{"lo", st.hist.spec.lo}, {"hi", st.hist.spec.hi}, {"width", st.hist.spec.width}};
  doc["s"] = st.hist.s;
  doc["h"] = st.hist.h;
  Json visited = Json::array();
  for (bool v : st.hist.visited) visited.push_back(v);
  doc["visited"] = std::move(visited);
  doc["overflow_low"] = st.hist.overflow_low;
  doc["overflow_high"] = st.hist.overflow_high;
  doc["ln_f0"] = st.sched.ln_f0;
  doc["iteration"] = st.sched.iteration;
  doc["step_count"] = st.step_count;
  doc["iteration_steps"] = st.iteration_steps;
  doc["rng"] = st.rng.to_hex();
  doc["config"] = config_json(st.config);
  doc["init"] = config_json(walker.init());
  doc["proposal"] = std::string(to_string(st.proposal));
  doc["restart_each_iteration"] = walker.options().restart_each_iteration;
  doc["uniform_mix"] = walker.options().uniform_mix;

  const RepresentativeStore& store = walker.samples();
  Json groups = Json::array();
  for (const auto& [key, list] : store.groups) {
    Json items = Json::array();
    for (const auto& sample : list)
      items.push_back({{"energy", sample.energy}, {"step", sample.step}, {"config", config_json(sample.config)}});
    groups.push_back({{"group", key}, {"samples", std::move(items)}});
  }
  doc["samples"] = {{"group_width", store.group_width},
                    {"stride", store.stride},
                    {"cap", store.cap},
                    {"groups", std::move(groups)}};
  return doc.dump() + "\n";
}

std::string checkpoint_model_name(const std::string& text) {
  const Json doc = parse_checkpoint(text);
  try {
    return doc.at("model").get<std::string>();
  } catch (const Json::exception& e) {
    throw CheckpointError(std::string("checkpoint is malformed: ") + e.what());
  }
}

Walker restore(const std::string& text, const EnergyModel& model, EngineOptions opts) {
  const Json doc = parse_checkpoint(text);
  try {
    const auto name = doc.at("model").get<std::string>();
    if (name != model.name())
      throw CheckpointError("checkpoint was written for model '" + name + "', not '" + model.name() + "'");

    WalkerState st;
    const auto& bins = doc.at("bins");
    st.hist = DosHistogram(
        BinSpec::make(bins.at("lo").get<double>(), bins.at("hi").get<double>(), bins.at("width").get<double>()));
    auto s = doc.at("s").get<std::vector<double>>();
    auto h = doc.at("h").get<std::vector<std::uint64_t>>();
    auto visited = doc.at("visited").get<std::vector<bool>>();
    if (s.size() != st.hist.size() || h.size() != st.hist.size() || visited.size() != st.hist.size())
      throw CheckpointError("checkpoint histogram length does not match its bins");
    st.hist.s = std::move(s);
    st.hist.h = std::move(h);
    st.hist.visited = std::move(visited);
    st.hist.overflow_low = doc.value("overflow_low", std::uint64_t{0});
    st.hist.overflow_high = doc.value("overflow_high", std::uint64_t{0});
    st.sched.ln_f0 = doc.at("ln_f0").get<double>();
    st.sched.iteration = doc.at("iteration").get<std::uint64_t>();
    st.step_count = doc.at("step_count").get<std::uint64_t>();
    st.iteration_steps = doc.value("iteration_steps", std::uint64_t{0});
    st.rng = Rng::from_hex(doc.at("rng").get<std::string>());
    st.config = config_from(doc.at("config"));
    st.proposal = proposal_kind_from_string(doc.at("proposal").get<std::string>());
    Config init = doc.contains("init") ? config_from(doc["init"]) : st.config;
    opts.restart_each_iteration = doc.value("restart_each_iteration", opts.restart_each_iteration);
    opts.uniform_mix = doc.value("uniform_mix", opts.uniform_mix);

    RepresentativeStore store;
    if (doc.contains("samples")) {
      const auto& js = doc["samples"];
      store.group_width = js.at("group_width").get<double>();
      store.stride = js.at("stride").get<std::uint64_t>();
      store.cap = js.at("cap").get<std::size_t>();
      for (const auto& g : js.at("groups")) {
        auto& list = store.groups[g.at("group").get<std::int64_t>()];
        for (const auto& item : g.at("samples"))
          list.push_back({config_from(item.at("config")), item.at("energy").get<double>(),
                          item.at("step").get<std::uint64_t>()});
      }
      opts.group_width = store.group_width;
      opts.sample_stride = store.stride;
      opts.group_cap = store.cap;
    }

    check_config(model.space(), init);
    Walker walker(model, std::move(st), opts, std::move(init));
    if (doc.contains("samples")) walker.samples() = std::move(store);
    return walker;
  } catch (const Json::exception& e) {
    throw CheckpointError(std::string("checkpoint is malformed: ") + e.what());
  } catch (const DimensionMismatch& e) {
    throw CheckpointError(std::string("checkpoint config does not fit the model: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw CheckpointError(std::string("checkpoint is inconsistent: ") + e.what());
  }
}

}  // namespace gwl
