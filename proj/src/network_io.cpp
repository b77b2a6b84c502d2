#include "bpsim/network_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bpsim/errors.hpp"

namespace bpsim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("network: " + where + ": " + what);
}

// Unknown keys are rejected so typos never silently change a run.
void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      fail(where, "unknown key \"" + it.key() + "\"");
}

const json& require(const json& obj, const char* key,
                    const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key \"") + key + "\"");
  return *it;
}

double number_field(const json& v, const char* key, const std::string& where) {
  if (!v.is_number()) fail(where, std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

std::int32_t int_field(const json& v, const char* key,
                       const std::string& where) {
  if (!v.is_number_integer())
    fail(where, std::string("\"") + key + "\" must be an integer");
  return v.get<std::int32_t>();
}

bool bool_field(const json& v, const char* key, const std::string& where) {
  if (!v.is_boolean())
    fail(where, std::string("\"") + key + "\" must be a boolean");
  return v.get<bool>();
}

Movement parse_movement(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
      !v[1].is_number_integer())
    fail(where, "movement must be a [from, to] pair of link ids");
  return Movement{v[0].get<LinkId>(), v[1].get<LinkId>()};
}

}  // namespace

Network load_network(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("network: JSON parse failed: ") + e.what());
  }
  if (!doc.is_object()) fail("top level", "document must be a JSON object");
  check_keys(doc, {"links", "junctions"}, "top level");

  Network net;

  const json& links = require(doc, "links", "top level");
  if (!links.is_array()) fail("top level", "\"links\" must be an array");
  for (const auto& lj : links) {
    const std::string where =
        "link[" + std::to_string(net.links.size()) + "]";
    if (!lj.is_object()) fail(where, "must be an object");
    check_keys(lj, {"id", "capacity", "entry", "exit"}, where);
    Link l;
    l.id = int_field(require(lj, "id", where), "id", where);
    const json& cap = require(lj, "capacity", where);
    if (cap.is_null())
      l.capacity = kUnboundedCapacity;
    else
      l.capacity = number_field(cap, "capacity", where);
    l.is_entry = bool_field(require(lj, "entry", where), "entry", where);
    l.is_exit = bool_field(require(lj, "exit", where), "exit", where);
    net.links.push_back(l);
  }

  const json& junctions = require(doc, "junctions", "top level");
  if (!junctions.is_array()) fail("top level", "\"junctions\" must be an array");
  for (const auto& jj : junctions) {
    const std::string jwhere =
        "junction[" + std::to_string(net.junctions.size()) + "]";
    if (!jj.is_object()) fail(jwhere, "must be an object");
    check_keys(jj,
               {"id", "movements", "phases", "states", "rates",
                "default_saturation"},
               jwhere);
    Junction jn;
    jn.id = int_field(require(jj, "id", jwhere), "id", jwhere);

    const json& movs = require(jj, "movements", jwhere);
    if (!movs.is_array()) fail(jwhere, "\"movements\" must be an array");
    for (const auto& mj : movs)
      jn.movements.push_back(parse_movement(mj, jwhere + ".movements"));

    const json& phases = require(jj, "phases", jwhere);
    if (!phases.is_array()) fail(jwhere, "\"phases\" must be an array");
    for (const auto& pj : phases) {
      const std::string pwhere =
          jwhere + ".phase[" + std::to_string(jn.phases.size()) + "]";
      if (!pj.is_object()) fail(pwhere, "must be an object");
      check_keys(pj, {"id", "movements"}, pwhere);
      Phase ph;
      ph.id = int_field(require(pj, "id", pwhere), "id", pwhere);
      const json& pms = require(pj, "movements", pwhere);
      if (!pms.is_array()) fail(pwhere, "\"movements\" must be an array");
      for (const auto& ij : pms) {
        if (!ij.is_number_integer())
          fail(pwhere, "phase movements are indices into the junction's "
                       "movement list");
        const int k = ij.get<int>();
        if (k < 0 || k >= static_cast<int>(jn.movements.size()))
          fail(pwhere, "movement index " + std::to_string(k) +
                           " out of range");
        ph.movements.push_back(jn.movements[k]);
      }
      jn.phases.push_back(std::move(ph));
    }

    const json& states = require(jj, "states", jwhere);
    if (!states.is_array()) fail(jwhere, "\"states\" must be an array");
    for (const auto& sj : states) {
      if (sj.is_number_integer()) {
        jn.states.push_back({sj.get<StateId>(), ""});
      } else if (sj.is_object()) {
        check_keys(sj, {"id", "label"}, jwhere + ".states");
        TrafficState ts;
        ts.id = int_field(require(sj, "id", jwhere), "id", jwhere + ".states");
        if (auto it = sj.find("label"); it != sj.end()) {
          if (!it->is_string())
            fail(jwhere + ".states", "\"label\" must be a string");
          ts.label = it->get<std::string>();
        }
        jn.states.push_back(std::move(ts));
      } else {
        fail(jwhere, "states are ids or {id, label} objects");
      }
    }

    if (auto it = jj.find("default_saturation"); it != jj.end())
      jn.rates.default_saturation =
          number_field(*it, "default_saturation", jwhere);

    if (auto it = jj.find("rates"); it != jj.end()) {
      if (!it->is_array()) fail(jwhere, "\"rates\" must be an array");
      for (const auto& rj : *it) {
        const std::string rwhere = jwhere + ".rates";
        if (!rj.is_object()) fail(rwhere, "must be an object");
        check_keys(rj, {"phase", "movement", "state", "rate"}, rwhere);
        RateTable::Key key;
        key.phase = int_field(require(rj, "phase", rwhere), "phase", rwhere);
        key.movement = parse_movement(require(rj, "movement", rwhere), rwhere);
        key.state = int_field(require(rj, "state", rwhere), "state", rwhere);
        const double r =
            number_field(require(rj, "rate", rwhere), "rate", rwhere);
        if (!jn.rates.entries.emplace(key, r).second)
          fail(rwhere, "duplicate rate entry");
      }
    }

    net.junctions.push_back(std::move(jn));
  }

  ValidationReport rep = validate_network(net);
  if (!rep.ok()) throw ConfigError("network: invalid:\n" + rep.summary());
  return net;
}

Network load_network_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("network: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_network(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string save_network(const Network& net) {
  json doc;
  doc["links"] = json::array();
  for (const auto& l : net.links) {
    json lj;
    lj["id"] = l.id;
    if (l.bounded())
      lj["capacity"] = l.capacity;
    else
      lj["capacity"] = nullptr;
    lj["entry"] = l.is_entry;
    lj["exit"] = l.is_exit;
    doc["links"].push_back(std::move(lj));
  }
  doc["junctions"] = json::array();
  for (const auto& jn : net.junctions) {
    json jj;
    jj["id"] = jn.id;
    jj["movements"] = json::array();
    for (const auto& m : jn.movements)
      jj["movements"].push_back(json::array({m.from, m.to}));
    jj["phases"] = json::array();
    for (const auto& ph : jn.phases) {
      json pj;
      pj["id"] = ph.id;
      pj["movements"] = json::array();
      for (const auto& m : ph.movements) {
        int k = -1;
        for (int i = 0; i < static_cast<int>(jn.movements.size()); ++i)
          if (jn.movements[i] == m) {
            k = i;
            break;
          }
        pj["movements"].push_back(k);
      }
      jj["phases"].push_back(std::move(pj));
    }
    jj["states"] = json::array();
    for (const auto& s : jn.states) {
      if (s.label.empty())
        jj["states"].push_back(s.id);
      else
        jj["states"].push_back(json{{"id", s.id}, {"label", s.label}});
    }
    jj["default_saturation"] = jn.rates.default_saturation;
    if (!jn.rates.entries.empty()) {
      jj["rates"] = json::array();
      for (const auto& [key, r] : jn.rates.entries) {
        json rj;
        rj["phase"] = key.phase;
        rj["movement"] = json::array({key.movement.from, key.movement.to});
        rj["state"] = key.state;
        rj["rate"] = r;
        jj["rates"].push_back(std::move(rj));
      }
    }
    doc["junctions"].push_back(std::move(jj));
  }
  return doc.dump(2) + "\n";
}

}  // namespace bpsim
