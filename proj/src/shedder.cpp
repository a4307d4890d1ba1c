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

#include "shedcep/shedder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shedcep {

ShedderKind parse_shedder_kind(const std::string& name) {
  if (name == "none") return ShedderKind::None;
  if (name == "gspice-h") return ShedderKind::GspiceH;
  if (name == "gspice-t") return ShedderKind::GspiceT;
  if (name == "gspice-f") return ShedderKind::GspiceF;
  if (name == "espice") return ShedderKind::Espice;
  if (name == "bl") return ShedderKind::Bl;
  throw ConfigError("shedder must be one of gspice-h, gspice-t, gspice-f, espice, bl, none (got '" +
                    name + "')");
}

std::string to_string(ShedderKind kind) {
  switch (kind) {
    case ShedderKind::None: return "none";
    case ShedderKind::GspiceH: return "gspice-h";
    case ShedderKind::GspiceT: return "gspice-t";
    case ShedderKind::GspiceF: return "gspice-f";
    case ShedderKind::Espice: return "espice";
    case ShedderKind::Bl: return "bl";
  }
  return "none";
}

bool uses_utility_model(ShedderKind kind) {
  return kind == ShedderKind::GspiceH || kind == ShedderKind::GspiceT || kind == ShedderKind::GspiceF;
}

// ---------------------------------------------------------------------------
// Threshold selection

std::int64_t UtilityHistogram::quantize(double u) {
  return static_cast<std::int64_t>(std::llround(u / kResolution));
}

void UtilityHistogram::add(double utility, std::uint64_t count) { add_quantum(quantize(utility), count); }

void UtilityHistogram::add_quantum(std::int64_t quantum, std::uint64_t count) {
  if (count == 0) return;
  counts_[quantum] += count;
  total_ += count;
}

double UtilityHistogram::cumulative(std::int64_t quantum) const {
  if (total_ == 0) return 0.0;
  std::uint64_t below = 0;
  for (const auto& [q, n] : counts_) {
    if (q > quantum) break;
    below += n;
  }
  return static_cast<double>(below) / static_cast<double>(total_);
}

UtilityThreshold select_threshold(const UtilityHistogram& hist, double rho) {
  if (hist.empty()) throw ConfigError("select_threshold: empty utility histogram");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("select_threshold: rho outside [0, 1]");
  if (rho == 0.0) return {};
  // Compare counts, not rounded fractions: cum / N >= rho  <=>  cum >= rho * N.
  // The relative slack absorbs representation error of decimal rho values
  // (0.9 * 10 must reach 9, not 9 + 1 ulp).
  const double needed = rho * static_cast<double>(hist.total());
  const double slack = needed * 1e-12;
  std::uint64_t cum = 0;
  for (const auto& [q, n] : hist.counts()) {
    cum += n;
    if (static_cast<double>(cum) + slack >= needed) return {q};
  }
  return {hist.counts().rbegin()->first};
}

double estimate_rho(double lambda, double mu, double queue_len, double interval, double rho_max) {
  if (lambda <= 0.0 || interval <= 0.0) return 0.0;
  const double rho = 1.0 - mu / lambda + queue_len / (lambda * interval);
  return std::clamp(rho, 0.0, rho_max);
}

OverloadDetector::OverloadDetector(double latency_bound, double on_fraction, double off_fraction)
    : on_(on_fraction * latency_bound), off_(off_fraction * latency_bound) {
  if (latency_bound <= 0.0) throw ConfigError("latency_bound_ms must be positive");
  if (!(off_fraction >= 0.0 && off_fraction < on_fraction && on_fraction <= 1.0))
    throw ConfigError("need 0 <= off_fraction < safety_fraction <= 1");
}

bool OverloadDetector::update(double queue_latency) {
  if (!overloaded_ && queue_latency >= on_) overloaded_ = true;
  else if (overloaded_ && queue_latency <= off_) overloaded_ = false;
  return overloaded_;
}

// ---------------------------------------------------------------------------
// Baselines

double EspiceModel::lookup(TypeId type, std::size_t position) const {
  const auto bin = static_cast<std::size_t>(bin_of(position));
  const auto& row = utility[type];
  if (bin < row.size() && !std::isnan(row[bin])) return row[bin];
  return default_utility[type];
}

WindowPositionTracker::WindowPositionTracker(double window_size, double slide)
    : size_(window_size), slide_(slide) {
  if (size_ <= 0.0 || slide_ <= 0.0) throw ConfigError("position tracker: window size and slide must be positive");
}

std::size_t WindowPositionTracker::position(double ts) const {
  if (!first_start_) return 0;
  // Oldest window [k*slide, k*slide + size) that still contains ts.
  double start = (std::floor((ts - size_) / slide_) + 1.0) * slide_;
  start = std::max(start, *first_start_);
  auto it = std::lower_bound(recent_.begin(), recent_.end(), start);
  return static_cast<std::size_t>(recent_.end() - it);
}

void WindowPositionTracker::push(double ts) {
  if (!first_start_) first_start_ = std::floor(ts / slide_) * slide_;
  recent_.push_back(ts);
  while (!recent_.empty() && recent_.front() <= ts - size_) recent_.pop_front();
}

std::vector<double> BlModel::drop_probabilities(double rho) const {
  std::vector<double> p(score.size(), 0.0);
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  double remaining = rho;
  for (std::size_t t : order) {
    if (remaining <= 0.0) break;
    if (share[t] <= 0.0) continue;
    p[t] = std::min(1.0, remaining / share[t]);
    remaining -= p[t] * share[t];
  }
  return p;
}

// ---------------------------------------------------------------------------
// Training

namespace {

double credit_sum(const Observation& ob) {
  return std::accumulate(ob.credits.begin(), ob.credits.end(), 0.0);
}

const Pattern& widest_pattern(const std::vector<Pattern>& patterns) {
  if (patterns.empty()) throw ConfigError("training needs at least one pattern");
  return *std::max_element(patterns.begin(), patterns.end(), [](const Pattern& a, const Pattern& b) {
    return a.window_size < b.window_size;
  });
}

EspiceModel train_espice(const TrainingData& data, int position_bin, UtilityHistogram& hist) {
  if (position_bin < 1) throw ConfigError("espice position_bin must be >= 1");
  const auto& pattern = widest_pattern(*data.patterns);
  const std::size_t types = data.schema->type_count();
  EspiceModel m;
  m.window_size = pattern.window_size;
  m.slide = pattern.slide;
  m.position_bin = position_bin;
  m.type_count = types;

  const auto& events = *data.events;
  const auto& obs = *data.observations;
  if (obs.size() != events.size()) throw ConfigError("training: observations do not match events");
  std::vector<std::vector<double>> mass(types), count(types);
  std::vector<int> bins(events.size());
  WindowPositionTracker tracker(m.window_size, m.slide);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const auto bin = static_cast<std::size_t>(m.bin_of(tracker.position(e.ts)));
    tracker.push(e.ts);
    bins[i] = static_cast<int>(bin);
    if (mass[e.type].size() <= bin) {
      mass[e.type].resize(bin + 1, 0.0);
      count[e.type].resize(bin + 1, 0.0);
    }
    mass[e.type][bin] += credit_sum(obs[i]);
    count[e.type][bin] += 1.0;
  }
  double all_mass = 0.0, all_count = 0.0;
  m.utility.resize(types);
  m.default_utility.resize(types);
  for (std::size_t t = 0; t < types; ++t) {
    double tm = 0.0, tc = 0.0;
    for (std::size_t b = 0; b < mass[t].size(); ++b) {
      m.utility[t].push_back(count[t][b] > 0.0 ? mass[t][b] / count[t][b] : std::nan(""));
      tm += mass[t][b];
      tc += count[t][b];
    }
    m.default_utility[t] = tc > 0.0 ? tm / tc : std::nan("");
    all_mass += tm;
    all_count += tc;
  }
  const double global = all_count > 0.0 ? all_mass / all_count : 0.0;
  for (auto& d : m.default_utility)
    if (std::isnan(d)) d = global;
  for (std::size_t i = 0; i < events.size(); ++i)
    hist.add(m.utility[events[i].type][static_cast<std::size_t>(bins[i])]);
  return m;
}

BlModel train_bl(const TrainingData& data) {
  const std::size_t types = data.schema->type_count();
  BlModel m;
  std::vector<double> repetition(types, 0.0);
  for (const auto& p : *data.patterns)
    for (const auto& alt : p.alternatives)
      for (const auto& el : alt.elements)
        for (TypeId t : el.types) repetition[t] += p.weight;

  const auto& events = *data.events;
  std::vector<double> counts(types, 0.0);
  for (const auto& e : events) counts[e.type] += 1.0;
  const double total = static_cast<double>(events.size());
  double per_window = 0.0;
  if (events.size() >= 2 && events.back().ts > events.front().ts)
    per_window = total * widest_pattern(*data.patterns).window_size / (events.back().ts - events.front().ts);
  m.share.resize(types);
  m.score.resize(types);
  for (std::size_t t = 0; t < types; ++t) {
    m.share[t] = total > 0.0 ? counts[t] / total : 0.0;
    m.score[t] = repetition[t] * m.share[t] * per_window;
  }
  return m;
}

}  // namespace

ShedderModel train_shedder(const TrainingData& data, const TrainOptions& options) {
  if (!data.schema || !data.patterns || !data.events || !data.observations)
    throw ConfigError("training data incomplete");
  options.pane.validate();
  ShedderModel model;
  model.kind = options.kind;
  model.schema = *data.schema;
  model.pane = options.pane;
  const auto& obs = *data.observations;

  switch (options.kind) {
    case ShedderKind::None: break;
    case ShedderKind::GspiceH:
    case ShedderKind::GspiceT:
    case ShedderKind::GspiceF: {
      const auto groups = aggregate(obs);
      if (groups.empty()) throw ConfigError("training produced no observations");
      if (options.kind == ShedderKind::GspiceH) {
        model.utility = std::make_shared<UtilityTable>(UtilityTable::build(
            groups, make_zobrist_keys(*data.schema, options.pane, options.zobrist_seed),
            options.default_utility));
      } else {
        const FeatureLayout layout{data.schema->type_count(), data.schema->attribute_count()};
        const auto set = make_training_set(groups, layout);
        if (options.kind == ShedderKind::GspiceT)
          model.utility = std::make_shared<RegressionTree>(RegressionTree::fit(set, options.tree, options.forest_seed));
        else
          model.utility = std::make_shared<RandomForest>(
              RandomForest::fit(set, options.tree, options.forest_seed, options.forest_trees));
      }
      for (const auto& g : groups) model.histogram.add(model.utility->predict(g.key), g.O);
      break;
    }
    case ShedderKind::Espice:
      model.espice = train_espice(data, options.espice_position_bin, model.histogram);
      break;
    case ShedderKind::Bl: model.bl = train_bl(data); break;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Shedder

Shedder::Shedder(ShedderConfig config, std::shared_ptr<const ShedderModel> model, double interval)
    : config_(config),
      interval_(interval),
      detector_(config.latency_bound, config.safety_fraction, config.off_fraction),
      lambda_(config.ewma_alpha),
      mu_(config.ewma_alpha),
      rng_(config.seed) {
  if (interval_ <= 0.0) throw ConfigError("drop_interval must be positive");
  if (!(config_.ewma_alpha > 0.0 && config_.ewma_alpha <= 1.0)) throw ConfigError("ewma_alpha must be in (0, 1]");
  if (!(config_.rho_max >= 0.0 && config_.rho_max <= 1.0)) throw ConfigError("rho_max must be in [0, 1]");
  if (config_.kind != ShedderKind::None) {
    if (!model) throw ConfigError("shedder '" + to_string(config_.kind) + "' needs a trained model");
    if (model->kind != config_.kind)
      throw ConfigError("model was trained for '" + to_string(model->kind) + "', shedder is '" +
                        to_string(config_.kind) + "'");
  }
  model_ = std::move(model);
  if (uses_utility_model(config_.kind)) {
    pane_.emplace(model_->schema.type_count(), model_->pane);
    attr_bins_.resize(model_->schema.attribute_count());
    if (config_.kind == ShedderKind::GspiceH) {
      const auto& table = static_cast<const UtilityTable&>(*model_->utility);
      pane_key_.emplace(table.keys(), model_->pane);
    }
  }
  if (config_.kind == ShedderKind::Espice)
    positions_.emplace(model_->espice.window_size, model_->espice.slide);
}

void Shedder::swap_model(std::shared_ptr<const ShedderModel> model) {
  if (!model || model->kind != config_.kind) throw ConfigError("swap_model: model kind mismatch");
  if (!(model->schema == model_->schema) || model->pane.mode != model_->pane.mode ||
      model->pane.length != model_->pane.length || model->pane.seconds != model_->pane.seconds)
    throw ConfigError("swap_model: schema or pane differs");
  model_ = std::move(model);
  if (config_.kind == ShedderKind::GspiceH) {
    const auto& table = static_cast<const UtilityTable&>(*model_->utility);
    pane_key_.emplace(table.keys(), model_->pane);
    pane_key_->reset(pane_->frequencies());
  }
  if (detector_.overloaded()) set_rho(rho_);
}

std::optional<double> Shedder::lambda() const {
  if (lambda_.seeded()) return lambda_.value();
  return std::nullopt;
}

std::optional<double> Shedder::mu() const {
  if (mu_.seeded()) return mu_.value();
  return std::nullopt;
}

void Shedder::set_rho(double rho) {
  rho_ = std::clamp(rho, 0.0, 1.0);
  ++counters_.rho_updates;
  switch (config_.kind) {
    case ShedderKind::GspiceH:
    case ShedderKind::GspiceT:
    case ShedderKind::GspiceF:
    case ShedderKind::Espice: threshold_ = select_threshold(model_->histogram, rho_); break;
    case ShedderKind::Bl: bl_probabilities_ = model_->bl.drop_probabilities(rho_); break;
    case ShedderKind::None: break;
  }
}

void Shedder::force_overload(bool on, double rho) {
  // Drive the detector through its thresholds so the state stays consistent.
  detector_.update(on ? std::numeric_limits<double>::infinity() : -1.0);
  if (on) set_rho(rho);
}

void Shedder::record_service(double cost) {
  ++interval_processed_;
  interval_service_ += cost;
}

void Shedder::maybe_update_rho(const Event&, std::size_t queue_length) {
  auto current = [&](const Ewma& ewma, double fallback) { return ewma.seeded() ? ewma.value() : fallback; };
  const double span = last_arrival_ - *interval_first_arrival_;
  const double lambda_now = span > 0.0 ? static_cast<double>(interval_arrivals_) / span : 0.0;
  const double mu_now =
      interval_service_ > 0.0 ? static_cast<double>(interval_processed_) / interval_service_ : 0.0;
  const double lambda = current(lambda_, lambda_now);
  const double mu = current(mu_, mu_now);
  if (lambda > 0.0 && mu > 0.0)
    set_rho(estimate_rho(lambda, mu, static_cast<double>(queue_length), interval_, config_.rho_max));
  else
    set_rho(config_.rho_max);
}

bool Shedder::on_event(const Event& e, const LoadSample& load) {
  ++counters_.seen;
  if (config_.kind == ShedderKind::None) return false;

  // Interval bookkeeping on the arrival clock.
  bool boundary = false;
  if (!interval_end_) {
    interval_end_ = load.arrival + interval_;
    interval_first_arrival_ = load.arrival;
  } else if (load.arrival >= *interval_end_) {
    const double start = *interval_end_ - interval_;
    const double steps = std::floor((load.arrival - start) / interval_);
    const double end = start + steps * interval_;
    lambda_.add(static_cast<double>(interval_arrivals_) / (end - start));
    if (interval_processed_ > 0 && interval_service_ > 0.0)
      mu_.add(static_cast<double>(interval_processed_) / interval_service_);
    interval_arrivals_ = 0;
    interval_processed_ = 0;
    interval_service_ = 0.0;
    interval_first_arrival_ = end;
    interval_end_ = end + interval_;
    boundary = true;
  }
  ++interval_arrivals_;
  last_arrival_ = load.arrival;

  const bool was = detector_.overloaded();
  const bool now = detector_.update(load.now - load.arrival);
  if (now && !was) ++counters_.activations;
  if (now && (!was || boundary)) maybe_update_rho(e, load.queue_length);

  if (pane_ && model_->pane.mode == PaneMode::Time) {
    auto expired = pane_->expire(e.ts);
    if (pane_key_) pane_key_->apply(expired, &tally_);
  }
  const bool dropped = drop(e);
  advance_pane(e);
  if (dropped) ++counters_.dropped;
  return dropped;
}

void Shedder::warm(const Event& e) {
  if (pane_ && model_->pane.mode == PaneMode::Time) {
    auto expired = pane_->expire(e.ts);
    if (pane_key_) pane_key_->apply(expired);
  }
  if (pane_) {
    auto changes = pane_->push(e.type, e.ts);
    if (pane_key_) pane_key_->apply(changes);
  }
  if (positions_) positions_->push(e.ts);
}

void Shedder::advance_pane(const Event& e) {
  if (pane_) {
    auto changes = pane_->push(e.type, e.ts);
    if (pane_key_) pane_key_->apply(changes, &tally_);
  }
  if (positions_) positions_->push(e.ts);
}

double Shedder::utility_of(const Event& e) {
  const auto& schema = model_->schema;
  switch (config_.kind) {
    case ShedderKind::GspiceH: {
      schema.bin_attributes(e, attr_bins_);
      const auto& table = static_cast<const UtilityTable&>(*model_->utility);
      return table.lookup(e.type, table.keys().key(pane_key_->k1(), attr_bins_, &tally_));
    }
    case ShedderKind::GspiceT:
    case ShedderKind::GspiceF: {
      FeatureKey key;
      key.type = e.type;
      const auto& f = pane_->frequencies();
      key.freq.resize(f.size());
      for (std::size_t t = 0; t < f.size(); ++t) key.freq[t] = model_->pane.bin_frequency(f[t]);
      key.attrs.resize(schema.attribute_count());
      schema.bin_attributes(e, key.attrs);
      return model_->utility->predict(key);
    }
    case ShedderKind::Espice: return model_->espice.lookup(e.type, positions_->position(e.ts));
    case ShedderKind::Bl:
    case ShedderKind::None: break;
  }
  return 0.0;
}

bool Shedder::drop(const Event& e) {
  if (!detector_.overloaded()) return false;
  switch (config_.kind) {
    case ShedderKind::None: return false;
    case ShedderKind::Bl: {
      const double p = e.type < bl_probabilities_.size() ? bl_probabilities_[e.type] : 0.0;
      if (p <= 0.0) return false;
      if (p >= 1.0) return true;
      return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p;
    }
    default: return threshold_.drops(utility_of(e));
  }
}

}  // namespace shedcep
