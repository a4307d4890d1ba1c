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

#include "shedcep/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "shedcep/stream_io.hpp"

namespace shedcep {

OrderedJson schema_to_json(const StreamSchema& schema) {
  OrderedJson j;
  j["types"] = OrderedJson::array();
  for (const auto& t : schema.types()) j["types"].push_back(t.name);
  j["attributes"] = OrderedJson::array();
  for (const auto& a : schema.attributes())
    j["attributes"].push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}, {"bin_size", a.bin_size}});
  return j;
}

StreamSchema schema_from_json(ConfigObject node) {
  auto types = node.strings("types");
  std::vector<AttributeDecl> attrs;
  if (node.has("attributes")) {
    const Json& list = node.raw("attributes");
    if (!list.is_array()) throw ConfigError(node.key_path("attributes") + ": expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      ConfigObject a(list[i], node.key_path("attributes") + "[" + std::to_string(i) + "]");
      AttributeDecl d;
      d.name = a.string("name");
      d.min = a.number("min");
      d.max = a.number("max");
      d.bin_size = a.number_or("bin_size", 1.0);
      a.finish();
      attrs.push_back(d);
    }
  }
  node.finish();
  return StreamSchema(std::move(types), std::move(attrs));
}

OrderedJson pane_to_json(const PaneConfig& pane) {
  OrderedJson j;
  j["mode"] = pane.mode == PaneMode::Count ? "count" : "time";
  j["length"] = pane.length;
  j["seconds"] = pane.seconds;
  j["max_frequency"] = pane.max_frequency;
  j["frequency_bin_size"] = pane.frequency_bin_size;
  return j;
}

PaneConfig pane_from_json(ConfigObject node) {
  PaneConfig p;
  const auto mode = node.string_or("mode", "count");
  if (mode == "count") p.mode = PaneMode::Count;
  else if (mode == "time") p.mode = PaneMode::Time;
  else throw ConfigError(node.key_path("mode") + ": expected 'count' or 'time'");
  const auto length = node.integer_or("length", 10);
  if (length < 0) throw ConfigError(node.key_path("length") + ": must be non-negative");
  p.length = static_cast<std::size_t>(length);
  p.seconds = node.number_or("seconds", 0.0);
  p.max_frequency = static_cast<int>(node.integer_or("max_frequency", 0));
  p.frequency_bin_size = static_cast<int>(node.integer_or("frequency_bin_size", 1));
  node.finish();
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(node.path() + ": " + e.what());
  }
  return p;
}

namespace {

OrderedJson nodes_to_json(const RegressionTree& tree) {
  OrderedJson nodes = OrderedJson::array();
  for (const auto& n : tree.nodes()) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return nodes;
}

RegressionTree tree_from_json(const Json& nodes, FeatureLayout layout) {
  std::vector<TreeNode> out;
  for (const auto& n : nodes) {
    if (!n.is_array() || n.size() != 5) throw ConfigError("model: malformed tree node");
    out.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(), n[3].get<int>(), n[4].get<double>()});
  }
  return RegressionTree::from_nodes(layout, std::move(out));
}

OrderedJson nullable(double v) { return std::isnan(v) ? OrderedJson(nullptr) : OrderedJson(v); }
double from_nullable(const Json& v) { return v.is_null() ? std::nan("") : v.get<double>(); }

}  // namespace

OrderedJson model_to_json(const ShedderModel& model) {
  OrderedJson j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = to_string(model.kind);
  j["schema"] = schema_to_json(model.schema);
  j["pane"] = pane_to_json(model.pane);
  OrderedJson hist = OrderedJson::array();
  for (const auto& [q, n] : model.histogram.counts()) hist.push_back({q, n});
  j["histogram"] = hist;

  switch (model.kind) {
    case ShedderKind::GspiceH: {
      const auto& t = static_cast<const UtilityTable&>(*model.utility);
      OrderedJson table;
      table["zobrist_seed"] = t.keys().seed();
      table["default_policy"] = to_string(t.default_policy());
      OrderedJson defaults = OrderedJson::array(), entries = OrderedJson::array();
      for (std::size_t type = 0; type < t.type_count(); ++type) {
        defaults.push_back(t.default_utility(static_cast<TypeId>(type)));
        std::vector<std::pair<std::uint64_t, double>> sorted(t.tables()[type].begin(), t.tables()[type].end());
        std::sort(sorted.begin(), sorted.end());
        OrderedJson rows = OrderedJson::array();
        for (const auto& [k, u] : sorted) rows.push_back({k, u});
        entries.push_back(rows);
      }
      table["defaults"] = defaults;
      table["entries"] = entries;
      j["table"] = table;
      break;
    }
    case ShedderKind::GspiceT:
      j["tree"] = nodes_to_json(static_cast<const RegressionTree&>(*model.utility));
      break;
    case ShedderKind::GspiceF: {
      OrderedJson trees = OrderedJson::array();
      for (const auto& t : static_cast<const RandomForest&>(*model.utility).trees()) trees.push_back(nodes_to_json(t));
      j["forest"] = trees;
      break;
    }
    case ShedderKind::Espice: {
      const auto& e = model.espice;
      OrderedJson util = OrderedJson::array();
      for (const auto& row : e.utility) {
        OrderedJson r = OrderedJson::array();
        for (double u : row) r.push_back(nullable(u));
        util.push_back(r);
      }
      j["espice"] = {{"window_size", e.window_size}, {"slide", e.slide}, {"position_bin", e.position_bin},
                     {"utility", util}, {"defaults", e.default_utility}};
      break;
    }
    case ShedderKind::Bl: j["bl"] = {{"score", model.bl.score}, {"share", model.bl.share}}; break;
    case ShedderKind::None: break;
  }
  return j;
}

ShedderModel model_from_json(const Json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != kModelFormat)
      throw ConfigError("not a shedcep model file");
    if (doc.at("version").get<int>() != kModelVersion)
      throw ConfigError("unsupported model version " + doc.at("version").dump());
    ShedderModel m;
    m.kind = parse_shedder_kind(doc.at("kind").get<std::string>());
    m.schema = schema_from_json(ConfigObject(doc.at("schema"), "schema"));
    m.pane = pane_from_json(ConfigObject(doc.at("pane"), "pane"));
    for (const auto& row : doc.at("histogram"))
      m.histogram.add_quantum(row.at(0).get<std::int64_t>(), row.at(1).get<std::uint64_t>());
    const FeatureLayout layout{m.schema.type_count(), m.schema.attribute_count()};

    switch (m.kind) {
      case ShedderKind::GspiceH: {
        const auto& t = doc.at("table");
        auto keys = make_zobrist_keys(m.schema, m.pane, t.at("zobrist_seed").get<std::uint64_t>());
        std::vector<std::unordered_map<std::uint64_t, double>> tables;
        for (const auto& rows : t.at("entries")) {
          auto& table = tables.emplace_back();
          for (const auto& r : rows) table[r.at(0).get<std::uint64_t>()] = r.at(1).get<double>();
        }
        m.utility = std::make_shared<UtilityTable>(UtilityTable::from_parts(
            std::move(keys), parse_default_utility(t.at("default_policy").get<std::string>()), std::move(tables),
            t.at("defaults").get<std::vector<double>>()));
        break;
      }
      case ShedderKind::GspiceT:
        m.utility = std::make_shared<RegressionTree>(tree_from_json(doc.at("tree"), layout));
        break;
      case ShedderKind::GspiceF: {
        std::vector<RegressionTree> trees;
        for (const auto& nodes : doc.at("forest")) trees.push_back(tree_from_json(nodes, layout));
        m.utility = std::make_shared<RandomForest>(RandomForest::from_trees(std::move(trees)));
        break;
      }
      case ShedderKind::Espice: {
        const auto& e = doc.at("espice");
        m.espice.window_size = e.at("window_size").get<double>();
        m.espice.slide = e.at("slide").get<double>();
        m.espice.position_bin = e.at("position_bin").get<int>();
        m.espice.type_count = m.schema.type_count();
        for (const auto& row : e.at("utility")) {
          auto& r = m.espice.utility.emplace_back();
          for (const auto& u : row) r.push_back(from_nullable(u));
        }
        m.espice.default_utility = e.at("defaults").get<std::vector<double>>();
        if (m.espice.utility.size() != m.schema.type_count() ||
            m.espice.default_utility.size() != m.schema.type_count())
          throw ConfigError("espice tables do not match the schema");
        break;
      }
      case ShedderKind::Bl:
        m.bl.score = doc.at("bl").at("score").get<std::vector<double>>();
        m.bl.share = doc.at("bl").at("share").get<std::vector<double>>();
        if (m.bl.score.size() != m.schema.type_count() || m.bl.share.size() != m.schema.type_count())
          throw ConfigError("bl tables do not match the schema");
        break;
      case ShedderKind::None: break;
    }
    return m;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ShedderModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file " + path.string());
  out << model_to_json(model).dump(1) << '\n';
}

ShedderModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("model file not found: " + path.string());
  return model_from_json(load_json_file(path));
}

std::string describe_model(const ShedderModel& model) {
  std::ostringstream os;
  os << "kind: " << to_string(model.kind) << '\n';
  os << "types: " << model.schema.type_count() << ", attributes: " << model.schema.attribute_count() << '\n';
  os << "pane: " << (model.pane.mode == PaneMode::Count ? "count" : "time") << ", length "
     << model.pane.length << ", frequency bins " << model.pane.frequency_bins() << '\n';
  if (!model.histogram.empty())
    os << "histogram: " << model.histogram.total() << " occurrences, " << model.histogram.counts().size()
       << " distinct utilities in [" << UtilityHistogram::value_of(model.histogram.counts().begin()->first) << ", "
       << UtilityHistogram::value_of(model.histogram.counts().rbegin()->first) << "]\n";
  switch (model.kind) {
    case ShedderKind::GspiceH: {
      const auto& t = static_cast<const UtilityTable&>(*model.utility);
      os << "table entries: " << t.size() << " (default " << to_string(t.default_policy()) << ")\n";
      for (std::size_t type = 0; type < t.type_count(); ++type)
        os << "  " << model.schema.type(static_cast<TypeId>(type)).name << ": " << t.size(static_cast<TypeId>(type))
           << " keys, default " << t.default_utility(static_cast<TypeId>(type)) << '\n';
      break;
    }
    case ShedderKind::GspiceT: {
      const auto& t = static_cast<const RegressionTree&>(*model.utility);
      os << "tree: depth " << t.depth() << ", nodes " << t.node_count() << '\n';
      break;
    }
    case ShedderKind::GspiceF: {
      const auto& f = static_cast<const RandomForest&>(*model.utility);
      os << "forest: " << f.trees().size() << " trees\n";
      for (std::size_t i = 0; i < f.trees().size(); ++i)
        os << "  tree " << i << ": depth " << f.trees()[i].depth() << ", nodes " << f.trees()[i].node_count() << '\n';
      break;
    }
    case ShedderKind::Espice:
      os << "espice: window " << model.espice.window_size << ", slide " << model.espice.slide << ", position bin "
         << model.espice.position_bin << '\n';
      for (std::size_t type = 0; type < model.espice.utility.size(); ++type)
        os << "  " << model.schema.type(static_cast<TypeId>(type)).name << ": " << model.espice.utility[type].size()
           << " bins\n";
      break;
    case ShedderKind::Bl:
      for (std::size_t type = 0; type < model.bl.score.size(); ++type)
        os << "  " << model.schema.type(static_cast<TypeId>(type)).name << ": score " << model.bl.score[type]
           << ", share " << model.bl.share[type] << '\n';
      break;
    case ShedderKind::None: break;
  }
  return os.str();
}

void write_groups_csv(std::span<const AggregatedObservation> groups, const StreamSchema& schema,
                      std::ostream& out) {
  out << "type";
  for (const auto& t : schema.types()) out << ",F_" << t.name;
  for (const auto& a : schema.attributes()) out << ",bin_" << a.name;
  out << ",M,O,U\n";
  for (const auto& g : groups) {
    out << schema.type(g.key.type).name;
    for (int f : g.key.freq) out << ',' << f;
    for (int a : g.key.attrs) out << ',' << a;
    out << ',' << format_double(g.M) << ',' << g.O << ',' << format_double(g.M / static_cast<double>(g.O)) << '\n';
  }
}

}  // namespace shedcep
