#include "netdesign/instance_json.hpp"

#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "netdesign/errors.hpp"

namespace netdesign {

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw ParseError(std::string("instance JSON: missing key \"") + key +
                     "\"");
  return *it;
}

std::vector<double> double_array(const nlohmann::json& j, const char* key) {
  const nlohmann::json& v = field(j, key);
  if (!v.is_array())
    throw ParseError(std::string("instance JSON: \"") + key +
                     "\" must be an array");
  return v.get<std::vector<double>>();
}

std::vector<int> int_array(const nlohmann::json& j, const char* key) {
  const nlohmann::json& v = field(j, key);
  if (!v.is_array())
    throw ParseError(std::string("instance JSON: \"") + key +
                     "\" must be an array");
  return v.get<std::vector<int>>();
}

}  // namespace

nlohmann::ordered_json instance_to_json(const NetworkInstance& inst) {
  nlohmann::ordered_json j;
  j["format"] = kInstanceFormatName;
  j["version"] = kInstanceFormatVersion;
  j["node_count"] = inst.node_count;

  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const Edge& e : inst.edges)
    edges.push_back(nlohmann::ordered_json::array({e.tail + 1, e.head + 1}));
  j["edges"] = std::move(edges);

  j["alpha"] = inst.alpha;
  j["beta"] = inst.beta;
  j["gamma"] = inst.gamma;
  j["rho"] = inst.rho;

  nlohmann::ordered_json zones = nlohmann::ordered_json::array();
  for (int z : inst.zones) zones.push_back(z + 1);
  j["zones"] = std::move(zones);
  nlohmann::ordered_json origins = nlohmann::ordered_json::array();
  for (int o : inst.origins) origins.push_back(o + 1);
  j["origins"] = std::move(origins);

  j["removable"] = inst.removable;
  j["prices"] = inst.prices;

  nlohmann::ordered_json scenarios = nlohmann::ordered_json::array();
  for (const DemandTable& t : inst.scenarios) {
    nlohmann::ordered_json s;
    s["probability"] = t.probability;
    s["demand"] = t.demand;
    s["zone_total"] = t.zone_total;
    scenarios.push_back(std::move(s));
  }
  j["scenarios"] = std::move(scenarios);
  return j;
}

NetworkInstance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("instance JSON: not an object");
  if (field(j, "format") != kInstanceFormatName)
    throw ParseError("instance JSON: format is not \"" +
                     std::string(kInstanceFormatName) + "\"");
  if (!field(j, "version").is_number_integer() ||
      field(j, "version").get<int>() != kInstanceFormatVersion)
    throw ParseError("instance JSON: unsupported version (expected " +
                     std::to_string(kInstanceFormatVersion) + ")");

  NetworkInstance inst;
  inst.node_count = field(j, "node_count").get<int>();

  const nlohmann::json& edges = field(j, "edges");
  if (!edges.is_array())
    throw ParseError("instance JSON: \"edges\" must be an array");
  for (const nlohmann::json& e : edges) {
    if (!e.is_array() || e.size() != 2)
      throw ParseError("instance JSON: each edge must be a [tail, head] pair");
    inst.edges.push_back({e[0].get<int>() - 1, e[1].get<int>() - 1});
  }

  inst.alpha = double_array(j, "alpha");
  inst.beta = double_array(j, "beta");
  inst.gamma = double_array(j, "gamma");
  inst.rho = double_array(j, "rho");

  for (int z : int_array(j, "zones")) inst.zones.push_back(z - 1);
  for (int o : int_array(j, "origins")) inst.origins.push_back(o - 1);

  inst.removable = int_array(j, "removable");
  inst.prices = double_array(j, "prices");

  const nlohmann::json& scenarios = field(j, "scenarios");
  if (!scenarios.is_array() || scenarios.empty())
    throw ParseError(
        "instance JSON: \"scenarios\" must be a nonempty array");
  for (const nlohmann::json& s : scenarios) {
    DemandTable t;
    t.probability = field(s, "probability").get<double>();
    t.demand = double_array(s, "demand");
    t.zone_total = double_array(s, "zone_total");
    inst.scenarios.push_back(std::move(t));
  }

  inst.finalize();  // full structural validation, big-M totals included
  return inst;
}

std::string write_instance(const NetworkInstance& inst) {
  return instance_to_json(inst).dump(2) + "\n";
}

NetworkInstance read_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError(std::string("instance JSON: ") + err.what());
  }
  return instance_from_json(j);
}

void save_instance_file(const NetworkInstance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << write_instance(inst);
  if (!out) throw ParseError("failed while writing: " + path);
}

NetworkInstance load_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return read_instance(buffer.str());
}

}  // namespace netdesign
