/*
 *
 * Copyright 2026 shedcep authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include "shedcep/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "shedcep/model_io.hpp"
#include "shedcep/stream_io.hpp"

namespace shedcep {

void CostModel::validate() const {
  if (!(per_event > 0.0)) throw ConfigError("load.cost.per_event_ms must be positive");
  for (double c : per_type)
    if (!(c > 0.0)) throw ConfigError("load.cost.per_type_ms values must be positive");
  if (shed_cost < 0.0) throw ConfigError("load.cost.shed_cost_ms must be non-negative");
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::size_t non_negative(ConfigObject& o, const std::string& key, std::int64_t fallback) {
  const auto v = o.integer_or(key, fallback);
  if (v < 0) throw ConfigError(o.key_path(key) + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

void parse_dataset(ConfigObject d, ExperimentConfig& cfg, const std::filesystem::path& base) {
  if (d.has("file")) {
    const auto file = d.string("file");
    cfg.stream_file = resolve(base, file);
    cfg.file_schema = schema_from_json(d.object("schema"));
    d.finish();
    cfg.dataset_identity = OrderedJson{{"file", file}, {"schema", schema_to_json(cfg.file_schema)}};
    return;
  }
  const auto total = static_cast<std::uint64_t>(cfg.training_events + cfg.evaluation_events);
  SyntheticSpec spec;
  const auto seed = static_cast<std::uint64_t>(d.integer_or("seed", 1));
  const auto count = static_cast<std::uint64_t>(d.integer_or("count", static_cast<std::int64_t>(total)));
  if (d.has("preset")) {
    spec = dataset_preset(d.string("preset"), count, seed);
  } else {
    spec.types = d.strings("types");
    spec.mean_interarrival = d.numbers("mean_interarrival");
    spec.count = count;
    spec.seed = seed;
  }
  if (d.has("attributes")) {
    spec.attributes.clear();
    const Json& list = d.raw("attributes");
    if (!list.is_array()) throw ConfigError(d.key_path("attributes") + ": expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      ConfigObject a(list[i], d.key_path("attributes") + "[" + std::to_string(i) + "]");
      UniformIntAttribute u;
      u.name = a.string_or("name", u.name);
      u.low = static_cast<int>(a.integer_or("low", u.low));
      u.high = static_cast<int>(a.integer_or("high", u.high));
      u.bin_size = a.number_or("bin_size", u.bin_size);
      a.finish();
      spec.attributes.push_back(u);
    }
  }
  d.finish();
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(d.path() + ": " + e.what());
  }
  OrderedJson attrs = OrderedJson::array();
  for (const auto& a : spec.attributes)
    attrs.push_back({{"name", a.name}, {"low", a.low}, {"high", a.high}, {"bin_size", a.bin_size}});
  cfg.dataset_identity = OrderedJson{{"types", spec.types},
                                     {"mean_interarrival", spec.mean_interarrival},
                                     {"attributes", attrs},
                                     {"count", *spec.count},
                                     {"seed", spec.seed}};
  cfg.stream_seed = seed;
  cfg.synthetic = std::move(spec);
}

StreamSchema config_schema(const ExperimentConfig& cfg) {
  return cfg.synthetic ? cfg.synthetic->schema() : cfg.file_schema;
}

}  // namespace

ExperimentConfig parse_experiment(const Json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig cfg;
  ConfigObject root(doc, "");
  cfg.name = root.string_or("name", cfg.name);

  if (auto ev = root.optional_object("evaluation")) {
    cfg.evaluation_events = non_negative(*ev, "events", static_cast<std::int64_t>(cfg.evaluation_events));
    ev->finish();
  }

  std::optional<std::string> model_path;
  std::optional<ConfigObject> pane_node;
  if (auto tr = root.optional_object("training")) {
    cfg.training_events = non_negative(*tr, "events", static_cast<std::int64_t>(cfg.training_events));
    if (tr->has("pane")) cfg.train.pane = pane_from_json(tr->object("pane"));
    cfg.train.default_utility = parse_default_utility(tr->string_or("default_utility", "mean"));
    cfg.train.zobrist_seed = static_cast<std::uint64_t>(tr->integer_or("zobrist_seed", 7));
    cfg.train.forest_seed = static_cast<std::uint64_t>(tr->integer_or("forest_seed", 11));
    if (auto tree = tr->optional_object("tree")) {
      cfg.train.tree.max_depth = static_cast<int>(tree->integer_or("max_depth", cfg.train.tree.max_depth));
      cfg.train.tree.min_samples_split =
          static_cast<int>(tree->integer_or("min_samples_split", cfg.train.tree.min_samples_split));
      cfg.train.tree.max_features = static_cast<int>(tree->integer_or("max_features", cfg.train.tree.max_features));
      tree->finish();
    }
    cfg.train.forest_trees = static_cast<int>(tr->integer_or("forest_trees", cfg.train.forest_trees));
    cfg.train.espice_position_bin = static_cast<int>(tr->integer_or("espice_position_bin", 5));
    cfg.train_model = tr->boolean_or("train", true);
    if (tr->has("model")) model_path = tr->string("model");
    cfg.retrain_interval = non_negative(*tr, "retrain_interval", 0);
    tr->finish();
  }
  if (model_path) cfg.model_file = resolve(base_dir, *model_path);
  if (!cfg.train_model && !cfg.model_file) throw ConfigError("training.model: required when training.train is false");
  if (cfg.training_events == 0) throw ConfigError("training.events: must be at least 1");
  if (cfg.evaluation_events == 0) throw ConfigError("evaluation.events: must be at least 1");

  parse_dataset(root.object("dataset"), cfg, base_dir);

  const Json& q = root.raw("queries");
  if (q.is_string()) cfg.queries = load_json_file(resolve(base_dir, q.get<std::string>()));
  else if (q.is_object()) cfg.queries = q;
  else throw ConfigError("queries: expected a file path or an object");

  if (auto sh = root.optional_object("shedder")) {
    cfg.shedder.kind = parse_shedder_kind(sh->string_or("kind", "none"));
    cfg.shedder.latency_bound = sh->number_or("latency_bound_ms", 1000.0) / 1000.0;
    cfg.shedder.safety_fraction = sh->number_or("safety_fraction", 0.8);
    cfg.shedder.off_fraction = sh->number_or("off_fraction", 0.5);
    cfg.shedder.drop_interval = sh->number_or("drop_interval", 0.0);
    cfg.shedder.rho_max = sh->number_or("rho_max", 0.95);
    cfg.shedder.ewma_alpha = sh->number_or("ewma_alpha", 0.3);
    cfg.shedder.seed = static_cast<std::uint64_t>(sh->integer_or("seed", 5));
    sh->finish();
    if (!(cfg.shedder.latency_bound > 0.0)) throw ConfigError("shedder.latency_bound_ms: must be positive");
    if (!(cfg.shedder.ewma_alpha > 0.0 && cfg.shedder.ewma_alpha <= 1.0))
      throw ConfigError("shedder.ewma_alpha: must be in (0, 1]");
    if (!(cfg.shedder.rho_max >= 0.0 && cfg.shedder.rho_max <= 1.0))
      throw ConfigError("shedder.rho_max: must be in [0, 1]");
    if (!(cfg.shedder.off_fraction >= 0.0 && cfg.shedder.off_fraction < cfg.shedder.safety_fraction &&
          cfg.shedder.safety_fraction <= 1.0))
      throw ConfigError("shedder.safety_fraction: need 0 <= off_fraction < safety_fraction <= 1");
  }
  cfg.train.kind = cfg.shedder.kind;

  const StreamSchema schema = config_schema(cfg);
  if (auto ld = root.optional_object("load")) {
    cfg.rate_multiplier = ld->number_or("rate_multiplier", cfg.rate_multiplier);
    if (!(cfg.rate_multiplier > 0.0)) throw ConfigError("load.rate_multiplier: must be positive");
    const auto clock = ld->string_or("clock", "simulated");
    if (clock == "simulated") cfg.clock = ClockMode::Simulated;
    else if (clock == "wall") cfg.clock = ClockMode::WallClock;
    else throw ConfigError("load.clock: expected 'simulated' or 'wall'");
    cfg.queue_capacity = non_negative(*ld, "queue_capacity", static_cast<std::int64_t>(cfg.queue_capacity));
    if (cfg.queue_capacity == 0) throw ConfigError("load.queue_capacity: must be at least 1");
    if (auto c = ld->optional_object("cost")) {
      cfg.cost.per_event = c->number_or("per_event_ms", 2.0) / 1000.0;
      cfg.cost.shed_cost = c->number_or("shed_cost_ms", 0.0) / 1000.0;
      if (c->has("per_type_ms")) {
        const Json& m = c->raw("per_type_ms");
        if (!m.is_object()) throw ConfigError(c->key_path("per_type_ms") + ": expected an object");
        cfg.cost.per_type.assign(schema.type_count(), cfg.cost.per_event);
        for (const auto& [name, value] : m.items()) {
          auto id = schema.find_type(name);
          if (!id) throw ConfigError(c->key_path("per_type_ms") + "." + name + ": unknown event type");
          if (!value.is_number()) throw ConfigError(c->key_path("per_type_ms") + "." + name + ": expected a number");
          cfg.cost.per_type[*id] = value.get<double>() / 1000.0;
        }
      }
      c->finish();
    }
    ld->finish();
  }
  cfg.cost.validate();

  if (auto en = root.optional_object("engine")) {
    cfg.engine.negation_kills_all = en->boolean_or("negation_kills_all", true);
    en->finish();
  }
  root.finish();
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  Json doc = load_json_file(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_experiment(doc, path.parent_path());
}

ExperimentData load_experiment_data(const ExperimentConfig& config) {
  ExperimentData data;
  if (config.synthetic) {
    data.schema = config.synthetic->schema();
    data.events = generate_synthetic(*config.synthetic);
  } else if (config.stream_file) {
    data.schema = config.file_schema;
    data.events = read_stream(*config.stream_file, data.schema);
  } else {
    throw ConfigError("dataset: no stream source configured");
  }
  data.patterns = load_patterns(config.queries, data.schema);
  if (data.patterns.empty()) throw ConfigError("queries: no patterns defined");
  const std::size_t need = config.training_events + config.evaluation_events;
  if (data.events.size() < need)
    throw ConfigError("dataset: " + std::to_string(data.events.size()) + " events, but training.events + " +
                      "evaluation.events needs " + std::to_string(need));
  return data;
}

// ---------------------------------------------------------------------------
// Training and ground truth

TrainingOutcome train_on_prefix(const ExperimentConfig& config, const ExperimentData& data) {
  const std::vector<Event> prefix(data.events.begin(),
                                  data.events.begin() + static_cast<std::ptrdiff_t>(config.training_events));
  EngineOptions opts = config.engine;
  opts.record_notifications = false;
  opts.track_contributions = true;
  Engine engine(data.patterns, opts);
  StatsCollector stats(data.schema, config.train.pane);
  StepResult step;
  for (const auto& e : prefix) {
    stats.observe(e);
    engine.process(e, step);
    step.clear();
  }
  engine.flush(step);
  stats.attach_credits(engine.contributions());

  TrainingData td{&data.schema, &data.patterns, &prefix, &stats.observations()};
  TrainOptions options = config.train;
  options.kind = config.shedder.kind;
  TrainingOutcome out;
  out.model = train_shedder(td, options);
  out.groups = aggregate(stats.observations());
  return out;
}

std::vector<ComplexEvent> ground_truth(const std::vector<Pattern>& patterns, const std::vector<Event>& events,
                                       EngineOptions options) {
  options.record_notifications = false;
  options.track_contributions = false;
  return detect_all(patterns, events, options);
}

// ---------------------------------------------------------------------------
// Replay

namespace {

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
  return sorted[std::min(sorted.size(), std::max<std::size_t>(rank, 1)) - 1];
}

/// Training-tail events that shape the pane and window positions at the
/// start of the evaluation segment.
std::size_t warm_start(const ExperimentConfig& cfg, const ExperimentData& data) {
  const std::size_t end = cfg.training_events;
  double horizon = cfg.train.pane.mode == PaneMode::Time ? cfg.train.pane.seconds : 0.0;
  for (const auto& p : data.patterns) horizon = std::max(horizon, p.window_size);
  const double t0 = data.events[end].ts;
  std::size_t begin = end;
  while (begin > 0 && data.events[begin - 1].ts > t0 - horizon) --begin;
  const std::size_t by_count = end > cfg.train.pane.length ? end - cfg.train.pane.length : 0;
  return std::min(begin, by_count);
}

/// Incremental retraining from processed events whose windows have closed.
class Retrainer {
 public:
  Retrainer(const ExperimentConfig& cfg, const ExperimentData& data)
      : cfg_(cfg), data_(data), tracker_(data.schema, cfg.train.pane) {
    for (const auto& p : data.patterns) max_window_ = std::max(max_window_, p.window_size);
  }

  void observe(const Event& e, bool processed) {
    FeatureKey key = tracker_.features_for(e);
    tracker_.commit(e);
    if (!processed) return;
    buffer_.push_back({e, std::move(key)});
    if (buffer_.size() > cfg_.training_events) buffer_.pop_front();
  }

  std::shared_ptr<const ShedderModel> retrain(double now, const ContributionLedger& ledger) {
    std::vector<Event> events;
    std::vector<Observation> obs;
    for (const auto& [e, key] : buffer_) {
      if (e.ts >= now - max_window_) break;
      Observation ob;
      ob.seq = e.seq;
      ob.key = key;
      if (auto* credits = ledger.find(e.seq))
        for (const auto& c : *credits) ob.credits.push_back(c.weight);
      events.push_back(e);
      obs.push_back(std::move(ob));
    }
    if (obs.empty()) return nullptr;
    TrainingData td{&data_.schema, &data_.patterns, &events, &obs};
    TrainOptions options = cfg_.train;
    options.kind = cfg_.shedder.kind;
    return std::make_shared<const ShedderModel>(train_shedder(td, options));
  }

 private:
  struct Entry {
    Event event;
    FeatureKey key;
  };
  const ExperimentConfig& cfg_;
  const ExperimentData& data_;
  FeatureTracker tracker_;
  std::deque<Entry> buffer_;
  double max_window_ = 0.0;
};

/// Bounded FIFO between the producer and consumer threads.
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}
  void push(std::size_t v) {
    std::unique_lock lock(m_);
    not_full_.wait(lock, [&] { return q_.size() < capacity_; });
    q_.push_back(v);
    not_empty_.notify_one();
  }
  void close() {
    std::lock_guard lock(m_);
    closed_ = true;
    not_empty_.notify_all();
  }
  std::optional<std::size_t> pop(std::size_t& remaining) {
    std::unique_lock lock(m_);
    not_empty_.wait(lock, [&] { return !q_.empty() || closed_; });
    if (q_.empty()) return std::nullopt;
    const std::size_t v = q_.front();
    q_.pop_front();
    remaining = q_.size();
    not_full_.notify_one();
    return v;
  }

 private:
  std::size_t capacity_;
  std::mutex m_;
  std::condition_variable not_empty_, not_full_;
  std::deque<std::size_t> q_;
  bool closed_ = false;
};

struct RunState {
  std::vector<ComplexEvent> detected;
  std::vector<double> latencies;
  std::uint64_t violations = 0;
  double queue_latency_sum = 0.0;
  double steady_queue_latency_sum = 0.0;
  std::uint64_t steady_events = 0;
  std::uint64_t steady_dropped = 0;
  std::optional<std::uint64_t> first_activation;
};

}  // namespace

QoRReport run_with_model(const ExperimentConfig& cfg, const ExperimentData& data,
                         std::shared_ptr<const ShedderModel> model) {
  const auto first = data.events.begin() + static_cast<std::ptrdiff_t>(cfg.training_events);
  const std::vector<Event> eval(first, first + static_cast<std::ptrdiff_t>(cfg.evaluation_events));
  const std::size_t n = eval.size();

  const auto truth = ground_truth(data.patterns, eval, cfg.engine);

  // Arrival clock: stream timestamps compressed so the mean arrival rate is
  // rate_multiplier * mu.
  double total_cost = 0.0;
  for (const auto& e : eval) total_cost += cfg.cost.cost(e.type);
  const double mu = static_cast<double>(n) / total_cost;
  const double span = eval.back().ts - eval.front().ts;
  const double stream_rate = n > 1 && span > 0.0 ? static_cast<double>(n - 1) / span : 1.0;
  const double scale = stream_rate / (cfg.rate_multiplier * mu);
  std::vector<double> arrival(n);
  for (std::size_t i = 0; i < n; ++i) arrival[i] = (eval[i].ts - eval.front().ts) * scale;

  const double stream_interval = cfg.shedder.drop_interval > 0.0 ? cfg.shedder.drop_interval : data.patterns.front().slide;
  if (cfg.shedder.kind == ShedderKind::None) model = nullptr;
  Shedder shedder(cfg.shedder, model, stream_interval * scale);
  const bool shedding = cfg.shedder.kind != ShedderKind::None;
  const bool retraining = shedding && cfg.retrain_interval > 0;
  std::optional<Retrainer> retrainer;
  if (retraining) retrainer.emplace(cfg, data);
  for (std::size_t i = warm_start(cfg, data); i < cfg.training_events; ++i) {
    shedder.warm(data.events[i]);
    if (retrainer) retrainer->observe(data.events[i], false);
  }

  EngineOptions opts = cfg.engine;
  opts.record_notifications = false;
  opts.track_contributions = retraining;
  Engine engine(data.patterns, opts);
  StepResult step;
  RunState st;
  std::uint64_t processed = 0;

  // One dequeue: decide, process, account. Returns the completion time.
  auto handle = [&](std::size_t i, double now, std::size_t queue_length, auto&& serve) {
    const Event& e = eval[i];
    const double lq = now - arrival[i];
    const bool drop = shedder.on_event(e, {now, arrival[i], queue_length});
    if (!st.first_activation && shedder.counters().activations > 0) st.first_activation = i;
    st.queue_latency_sum += lq;
    if (st.first_activation) {
      ++st.steady_events;
      st.steady_queue_latency_sum += lq;
      if (drop) ++st.steady_dropped;
    }
    double t = now + (shedding ? cfg.cost.shed_cost : 0.0);
    if (retrainer) retrainer->observe(e, !drop);
    if (drop) return t;
    engine.process(e, step);
    for (auto& ce : step.complex_events) st.detected.push_back(std::move(ce));
    step.clear();
    const double c = cfg.cost.cost(e.type);
    t = serve(t, c);
    shedder.record_service(c);
    const double latency = t - arrival[i];
    st.latencies.push_back(latency);
    if (latency > cfg.shedder.latency_bound) ++st.violations;
    ++processed;
    if (retrainer && processed % cfg.retrain_interval == 0)
      if (auto m = retrainer->retrain(e.ts, engine.contributions())) shedder.swap_model(std::move(m));
    return t;
  };

  if (cfg.clock == ClockMode::Simulated) {
    double t_free = 0.0;
    std::size_t arrived = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double now = std::max(arrival[i], t_free);
      while (arrived < n && arrival[arrived] <= now) ++arrived;
      t_free = handle(i, now, arrived - i - 1, [](double t, double c) { return t + c; });
    }
  } else {
    using Clock = std::chrono::steady_clock;
    BoundedQueue queue(cfg.queue_capacity);
    const auto start = Clock::now();
    auto seconds_since = [&](Clock::time_point t) { return std::chrono::duration<double>(t - start).count(); };
    std::thread producer([&] {
      for (std::size_t i = 0; i < n; ++i) {
        std::this_thread::sleep_until(start + std::chrono::duration_cast<Clock::duration>(
                                                  std::chrono::duration<double>(arrival[i])));
        queue.push(i);
      }
      queue.close();
    });
    std::size_t remaining = 0;
    while (auto i = queue.pop(remaining)) {
      handle(*i, seconds_since(Clock::now()), remaining, [&](double, double c) {
        // The engine's own work counts towards the service cost; spin for the rest.
        const auto until = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(c));
        while (Clock::now() < until) {
        }
        return seconds_since(Clock::now());
      });
    }
    producer.join();
  }
  engine.flush(step);
  for (auto& ce : step.complex_events) st.detected.push_back(std::move(ce));
  std::sort(st.detected.begin(), st.detected.end());

  QoRReport r;
  r.name = cfg.name;
  OrderedJson ids = OrderedJson::array();
  for (const auto& p : data.patterns) ids.push_back(p.id);
  // Sorted keys so a report reloaded from disk compares equal.
  r.identity = Json(OrderedJson{{"dataset", cfg.dataset_identity},
                                {"queries", ids},
                                {"training_events", cfg.training_events},
                                {"evaluation_events", cfg.evaluation_events}});
  r.shedder = to_string(cfg.shedder.kind);
  r.rate_multiplier = cfg.rate_multiplier;
  r.latency_bound = cfg.shedder.latency_bound;
  r.clock = cfg.clock == ClockMode::Simulated ? "simulated" : "wall";
  r.patterns = score_detections(data.patterns, truth, st.detected);
  r.events = n;
  r.dropped = shedder.counters().dropped;
  r.activations = shedder.counters().activations;
  r.first_activation = st.first_activation;
  r.steady_events = st.steady_events;
  r.steady_dropped = st.steady_dropped;
  r.mean_queue_latency = n ? st.queue_latency_sum / static_cast<double>(n) : 0.0;
  r.steady_queue_latency = st.steady_events ? st.steady_queue_latency_sum / static_cast<double>(st.steady_events) : 0.0;
  std::sort(st.latencies.begin(), st.latencies.end());
  r.latency_p50 = percentile(st.latencies, 0.50);
  r.latency_p99 = percentile(st.latencies, 0.99);
  r.latency_max = st.latencies.empty() ? 0.0 : st.latencies.back();
  r.violations = st.violations;
  return r;
}

QoRReport run_experiment(const ExperimentConfig& config) {
  const ExperimentData data = load_experiment_data(config);
  std::shared_ptr<const ShedderModel> model;
  if (config.shedder.kind != ShedderKind::None) {
    if (config.train_model) {
      model = std::make_shared<const ShedderModel>(train_on_prefix(config, data).model);
    } else {
      model = std::make_shared<const ShedderModel>(load_model(*config.model_file));
      if (!(model->schema == data.schema)) throw ConfigError("training.model: schema differs from the dataset");
    }
  }
  return run_with_model(config, data, std::move(model));
}

}  // namespace shedcep
