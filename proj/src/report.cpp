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

#include <algorithm>
#include <sstream>

#include "shedcep/harness.hpp"
#include "shedcep/stream_io.hpp"

namespace shedcep {

double PatternQoR::fn_percent() const {
  return ground_truth ? 100.0 * static_cast<double>(false_negatives) / static_cast<double>(ground_truth) : 0.0;
}

double PatternQoR::fp_percent() const {
  return ground_truth ? 100.0 * static_cast<double>(false_positives) / static_cast<double>(ground_truth) : 0.0;
}

std::uint64_t QoRReport::total_ground_truth() const {
  std::uint64_t n = 0;
  for (const auto& p : patterns) n += p.ground_truth;
  return n;
}

std::uint64_t QoRReport::total_false_negatives() const {
  std::uint64_t n = 0;
  for (const auto& p : patterns) n += p.false_negatives;
  return n;
}

std::uint64_t QoRReport::total_false_positives() const {
  std::uint64_t n = 0;
  for (const auto& p : patterns) n += p.false_positives;
  return n;
}

double QoRReport::weighted_objective() const {
  double fp = 0.0, fn = 0.0;
  for (const auto& p : patterns) {
    fp += p.weight * static_cast<double>(p.false_positives);
    fn += p.weight * static_cast<double>(p.false_negatives);
  }
  return fp + fn;
}

double QoRReport::drop_ratio() const {
  return events ? static_cast<double>(dropped) / static_cast<double>(events) : 0.0;
}

double QoRReport::steady_drop_ratio() const {
  return steady_events ? static_cast<double>(steady_dropped) / static_cast<double>(steady_events) : 0.0;
}

std::vector<PatternQoR> score_detections(const std::vector<Pattern>& patterns,
                                         const std::vector<ComplexEvent>& truth,
                                         const std::vector<ComplexEvent>& detected) {
  std::vector<PatternQoR> out(patterns.size());
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    out[i].id = patterns[i].id;
    out[i].weight = patterns[i].weight;
  }
  for (const auto& ce : truth) ++out.at(ce.pattern).ground_truth;
  for (const auto& ce : detected) ++out.at(ce.pattern).detected;
  std::vector<ComplexEvent> missed, spurious;
  std::set_difference(truth.begin(), truth.end(), detected.begin(), detected.end(), std::back_inserter(missed));
  std::set_difference(detected.begin(), detected.end(), truth.begin(), truth.end(), std::back_inserter(spurious));
  for (const auto& ce : missed) ++out[ce.pattern].false_negatives;
  for (const auto& ce : spurious) ++out[ce.pattern].false_positives;
  return out;
}

OrderedJson QoRReport::to_json() const {
  OrderedJson j;
  j["schema"] = kReportSchema;
  j["name"] = name;
  j["identity"] = identity;
  j["shedder"] = shedder;
  j["rate_multiplier"] = rate_multiplier;
  j["latency_bound_s"] = latency_bound;
  j["clock"] = clock;
  OrderedJson ps = OrderedJson::array();
  for (const auto& p : patterns) {
    ps.push_back({{"id", p.id},
                  {"weight", p.weight},
                  {"ground_truth", p.ground_truth},
                  {"detected", p.detected},
                  {"false_negatives", p.false_negatives},
                  {"false_positives", p.false_positives},
                  {"fn_percent", p.fn_percent()},
                  {"fp_percent", p.fp_percent()}});
  }
  j["patterns"] = ps;
  j["totals"] = {{"ground_truth", total_ground_truth()},
                 {"false_negatives", total_false_negatives()},
                 {"false_positives", total_false_positives()},
                 {"weighted_objective", weighted_objective()}};
  j["load"] = {{"events", events},
               {"dropped", dropped},
               {"drop_ratio", drop_ratio()},
               {"activations", activations},
               {"first_activation", first_activation ? OrderedJson(*first_activation) : OrderedJson(nullptr)},
               {"steady_events", steady_events},
               {"steady_dropped", steady_dropped},
               {"steady_drop_ratio", steady_drop_ratio()},
               {"mean_queue_latency_s", mean_queue_latency},
               {"steady_queue_latency_s", steady_queue_latency}};
  j["latency"] = {{"p50_s", latency_p50}, {"p99_s", latency_p99}, {"max_s", latency_max}, {"violations", violations}};
  return j;
}

QoRReport QoRReport::from_json(const Json& doc) {
  try {
    if (!doc.is_object() || doc.value("schema", "") != kReportSchema)
      throw ConfigError("not a report with schema " + std::string(kReportSchema));
    QoRReport r;
    r.name = doc.at("name").get<std::string>();
    r.identity = doc.at("identity");
    r.shedder = doc.at("shedder").get<std::string>();
    r.rate_multiplier = doc.at("rate_multiplier").get<double>();
    r.latency_bound = doc.at("latency_bound_s").get<double>();
    r.clock = doc.at("clock").get<std::string>();
    for (const auto& p : doc.at("patterns")) {
      PatternQoR q;
      q.id = p.at("id").get<std::string>();
      q.weight = p.at("weight").get<double>();
      q.ground_truth = p.at("ground_truth").get<std::uint64_t>();
      q.detected = p.at("detected").get<std::uint64_t>();
      q.false_negatives = p.at("false_negatives").get<std::uint64_t>();
      q.false_positives = p.at("false_positives").get<std::uint64_t>();
      r.patterns.push_back(q);
    }
    const auto& load = doc.at("load");
    r.events = load.at("events").get<std::uint64_t>();
    r.dropped = load.at("dropped").get<std::uint64_t>();
    r.activations = load.at("activations").get<std::uint64_t>();
    if (!load.at("first_activation").is_null()) r.first_activation = load.at("first_activation").get<std::uint64_t>();
    r.steady_events = load.at("steady_events").get<std::uint64_t>();
    r.steady_dropped = load.at("steady_dropped").get<std::uint64_t>();
    r.mean_queue_latency = load.at("mean_queue_latency_s").get<double>();
    r.steady_queue_latency = load.at("steady_queue_latency_s").get<double>();
    const auto& lat = doc.at("latency");
    r.latency_p50 = lat.at("p50_s").get<double>();
    r.latency_p99 = lat.at("p99_s").get<double>();
    r.latency_max = lat.at("max_s").get<double>();
    r.violations = lat.at("violations").get<std::uint64_t>();
    return r;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

std::string QoRReport::to_csv() const {
  std::ostringstream os;
  os << "name,shedder,rate_multiplier,pattern,weight,ground_truth,detected,false_negatives,false_positives,"
        "fn_percent,fp_percent,weighted_objective,drop_ratio,steady_drop_ratio,latency_p50_s,latency_p99_s,latency_max_s,violations\n";
  auto tail = [&] {
    os << ',' << format_double(drop_ratio()) << ',' << format_double(steady_drop_ratio()) << ','
       << format_double(latency_p50) << ',' << format_double(latency_p99) << ',' << format_double(latency_max) << ','
       << violations << '\n';
  };
  for (const auto& p : patterns) {
    os << name << ',' << shedder << ',' << format_double(rate_multiplier) << ',' << p.id << ','
       << format_double(p.weight) << ',' << p.ground_truth << ',' << p.detected << ',' << p.false_negatives << ','
       << p.false_positives << ',' << format_double(p.fn_percent()) << ',' << format_double(p.fp_percent()) << ','
       << format_double(p.weight * static_cast<double>(p.false_negatives + p.false_positives));
    tail();
  }
  const auto gt = total_ground_truth();
  const double fn_pct = gt ? 100.0 * static_cast<double>(total_false_negatives()) / static_cast<double>(gt) : 0.0;
  const double fp_pct = gt ? 100.0 * static_cast<double>(total_false_positives()) / static_cast<double>(gt) : 0.0;
  std::uint64_t detected = 0;
  for (const auto& p : patterns) detected += p.detected;
  os << name << ',' << shedder << ',' << format_double(rate_multiplier) << ",ALL,," << gt << ',' << detected << ',' << total_false_negatives() << ',' << total_false_positives() << ','
     << format_double(fn_pct) << ',' << format_double(fp_pct) << ',' << format_double(weighted_objective());
  tail();
  return os.str();
}

std::string compare_reports(const std::vector<QoRReport>& reports, TableFormat format) {
  if (reports.size() < 2) throw ConfigError("compare needs at least two reports");
  for (const auto& r : reports)
    if (r.identity != reports.front().identity)
      throw ConfigError("report '" + r.name + "' has a different experiment identity than '" +
                        reports.front().name + "'");
  struct Row {
    const QoRReport* r;
    double fn_pct, fp_pct;
  };
  std::vector<Row> rows;
  for (const auto& r : reports) {
    const auto gt = r.total_ground_truth();
    const double denom = gt ? static_cast<double>(gt) : 1.0;
    rows.push_back({&r, gt ? 100.0 * static_cast<double>(r.total_false_negatives()) / denom : 0.0,
                    gt ? 100.0 * static_cast<double>(r.total_false_positives()) / denom : 0.0});
  }
  if (format == TableFormat::Json) {
    OrderedJson j;
    j["schema"] = "shedcep-compare/1";
    j["identity"] = reports.front().identity;
    OrderedJson out = OrderedJson::array();
    for (const auto& row : rows) {
      const auto& r = *row.r;
      out.push_back({{"name", r.name},
                     {"shedder", r.shedder},
                     {"rate_multiplier", r.rate_multiplier},
                     {"fn_percent", row.fn_pct},
                     {"fp_percent", row.fp_pct},
                     {"weighted_objective", r.weighted_objective()},
                     {"drop_ratio", r.drop_ratio()},
                     {"steady_drop_ratio", r.steady_drop_ratio()},
                     {"latency_p50_s", r.latency_p50},
                     {"latency_p99_s", r.latency_p99},
                     {"latency_max_s", r.latency_max},
                     {"violations", r.violations}});
    }
    j["rows"] = out;
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "name,shedder,rate_multiplier,fn_percent,fp_percent,weighted_objective,drop_ratio,steady_drop_ratio,"
        "latency_p50_s,latency_p99_s,latency_max_s,violations\n";
  for (const auto& row : rows) {
    const auto& r = *row.r;
    os << r.name << ',' << r.shedder << ',' << format_double(r.rate_multiplier) << ',' << format_double(row.fn_pct)
       << ',' << format_double(row.fp_pct) << ',' << format_double(r.weighted_objective()) << ','
       << format_double(r.drop_ratio()) << ',' << format_double(r.steady_drop_ratio()) << ','
       << format_double(r.latency_p50) << ',' << format_double(r.latency_p99) << ','
       << format_double(r.latency_max) << ',' << r.violations << '\n';
  }
  return os.str();
}

}  // namespace shedcep
