#include "bzeta/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bzeta {

using nlohmann::json;

namespace {

std::string where(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw InputError(path + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(path + "." + key + " is missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw InputError(path + " must be a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw InputError(path + " must be an integer");
  return v.get<int>();
}

std::string text_of(const json& v, const std::string& path) {
  if (!v.is_string()) throw InputError(path + " must be a string");
  return v.get<std::string>();
}

void only_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& path) {
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw InputError(path + " has unknown key \"" + it.key() + "\"");
}

VertexSpec parse_variable(const json& v, const std::string& path) {
  std::string kind = text_of(field(v, "kind", path), path + ".kind");
  if (kind == "binary") {
    only_keys(v, {"id", "kind"}, path);
    return VertexSpec::binary();
  }
  if (kind == "multinomial") {
    only_keys(v, {"id", "kind", "states"}, path);
    int n = integer(field(v, "states", path), path + ".states");
    if (n < 2) throw InputError(path + ".states must be at least 2");
    return VertexSpec::multinomial(n);
  }
  if (kind == "gaussian") {
    only_keys(v, {"id", "kind"}, path);
    return VertexSpec::gaussian();
  }
  if (kind == "gaussian_fixed_mean") {
    only_keys(v, {"id", "kind", "mean"}, path);
    return VertexSpec::fixed_mean(v.contains("mean") ? number(v["mean"], path + ".mean") : 0.0);
  }
  throw InputError(path + ".kind \"" + kind + "\" is not one of binary, multinomial, gaussian, gaussian_fixed_mean");
}

ModelSpec parse_explicit(const json& doc) {
  const json& vars = field(doc, "variables", "$");
  const json& facs = field(doc, "factors", "$");
  if (!vars.is_array() || vars.empty()) throw InputError("$.variables must be a non-empty array");
  if (!facs.is_array()) throw InputError("$.factors must be an array");
  std::vector<std::string> ids;
  std::vector<VertexSpec> specs;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    std::string path = "$.variables[" + std::to_string(k) + "]";
    ids.push_back(text_of(field(vars[k], "id", path), path + ".id"));
    if (ids.back().empty() || ids.back().find_first_of("*=^") != std::string::npos)
      throw InputError(path + ".id must be non-empty and free of '*', '=', '^'");
    specs.push_back(parse_variable(vars[k], path));
  }
  std::vector<std::vector<std::string>> members;
  std::set<std::string> fids;
  for (std::size_t a = 0; a < facs.size(); ++a) {
    std::string path = "$.factors[" + std::to_string(a) + "]";
    only_keys(facs[a], {"id", "members", "parameters"}, path);
    if (facs[a].contains("id") && !fids.insert(text_of(facs[a]["id"], path + ".id")).second)
      throw InputError(path + ".id is duplicated");
    const json& mem = field(facs[a], "members", path);
    if (!mem.is_array()) throw InputError(path + ".members must be an array");
    std::vector<std::string> m;
    for (std::size_t p = 0; p < mem.size(); ++p) m.push_back(text_of(mem[p], path + ".members[" + std::to_string(p) + "]"));
    members.push_back(m);
  }
  FactorGraph g;
  try {
    g = FactorGraph::from_labels(ids, members);
  } catch (const InputError& e) {
    throw InputError(std::string("$.factors: ") + e.what());
  }
  FamilySpec fam(g, specs);
  std::vector<Vec> theta;
  for (std::size_t a = 0; a < facs.size(); ++a) {
    std::string path = "$.factors[" + std::to_string(a) + "].parameters";
    const auto& f = fam.factor_family(static_cast<int>(a));
    Vec t = Vec::Zero(f.dim());
    if (facs[a].contains("parameters")) {
      const json& params = facs[a]["parameters"];
      if (!params.is_object()) throw InputError(path + " must be an object");
      for (auto it = params.begin(); it != params.end(); ++it) {
        int idx = f.statistic_index(it.key());
        if (idx < 0) {
          std::string valid;
          for (const auto& n : f.statistic_names()) valid += (valid.empty() ? "" : ", ") + n;
          throw InputError(path + " has unknown statistic \"" + it.key() + "\" (valid: " + valid + ")");
        }
        t(idx) = number(it.value(), path + "." + it.key());
      }
    }
    theta.push_back(t);
  }
  return ModelSpec(g, specs, theta);
}

FactorGraph parse_graph(const json& gdoc, const std::string& path) {
  std::string type = text_of(field(gdoc, "type", path), path + ".type");
  auto num = [&](const char* k) { return integer(field(gdoc, k, path), path + "." + k); };
  auto positive = [&](const char* k, int lo) {
    int v = num(k);
    if (v < lo) throw InputError(path + "." + k + " must be at least " + std::to_string(lo));
    return v;
  };
  if (type == "path") return path_graph(positive("n", 2));
  if (type == "cycle") return cycle_graph(positive("n", 3));
  if (type == "complete") return complete_graph(positive("n", 2));
  if (type == "star") return star_graph(positive("leaves", 1));
  if (type == "complete_bipartite") return complete_bipartite_graph(positive("m", 1), positive("n", 1));
  if (type == "torus") return torus_graph(positive("rows", 2), positive("cols", 2));
  if (type == "edges") {
    const json& v = field(gdoc, "vertices", path);
    const json& e = field(gdoc, "edges", path);
    if (!v.is_array() || !e.is_array()) throw InputError(path + ".vertices and .edges must be arrays");
    std::vector<std::string> ids;
    for (std::size_t k = 0; k < v.size(); ++k) ids.push_back(text_of(v[k], path + ".vertices[" + std::to_string(k) + "]"));
    std::vector<std::vector<std::string>> edges;
    for (std::size_t k = 0; k < e.size(); ++k) {
      std::string ep = path + ".edges[" + std::to_string(k) + "]";
      if (!e[k].is_array() || e[k].size() != 2) throw InputError(ep + " must be a pair of vertex ids");
      edges.push_back({text_of(e[k][0], ep), text_of(e[k][1], ep)});
    }
    return FactorGraph::from_labels(ids, edges);
  }
  throw InputError(path + ".type \"" + type + "\" is not a known graph generator");
}

Vec per_item(const json& doc, const char* key, int n, double dflt, const std::string& path) {
  if (!doc.contains(key)) return Vec::Constant(n, dflt);
  const json& v = doc[key];
  if (v.is_number()) return Vec::Constant(n, v.get<double>());
  if (!v.is_array() || static_cast<int>(v.size()) != n)
    throw InputError(path + "." + key + " must be a number or an array of length " + std::to_string(n));
  Vec out(n);
  for (int k = 0; k < n; ++k) out(k) = number(v[k], path + "." + key + "[" + std::to_string(k) + "]");
  return out;
}

ModelSpec parse_generator(const json& gen) {
  const std::string path = "$.generator";
  std::string kind = text_of(field(gen, "kind", path), path + ".kind");
  if (kind == "grid") {
    only_keys(gen, {"kind", "rows", "cols", "K", "J"}, path);
    int rows = integer(field(gen, "rows", path), path + ".rows"), cols = integer(field(gen, "cols", path), path + ".cols");
    if (rows < 2 || cols < 2) throw InputError(path + " grid needs rows, cols >= 2");
    return grid_model(rows, cols, number(field(gen, "K", path), path + ".K"), number(field(gen, "J", path), path + ".J"));
  }
  if (kind == "triple") {
    only_keys(gen, {"kind", "K", "c"}, path);
    return triple_factor_model(number(field(gen, "K", path), path + ".K"), number(field(gen, "c", path), path + ".c"));
  }
  if (kind == "pairwise") {
    only_keys(gen, {"kind", "graph", "family", "J", "h", "diag"}, path);
    FactorGraph g = parse_graph(field(gen, "graph", path), path + ".graph");
    std::string family = gen.contains("family") ? text_of(gen["family"], path + ".family") : "binary";
    Vec J = per_item(gen, "J", g.num_factors(), 0.0, path);
    Vec h = per_item(gen, "h", g.num_vertices(), 0.0, path);
    double diag = gen.contains("diag") ? number(gen["diag"], path + ".diag") : 1.0;
    if (family == "binary") {
      if (gen.contains("diag")) throw InputError(path + ".diag applies to gaussian families only");
      return binary_pairwise_model(g, J, h);
    }
    if (family == "gaussian_fixed_mean") {
      if (gen.contains("h")) throw InputError(path + ".h does not apply to fixed-mean gaussians");
      return fixed_mean_gaussian_model(g, J, diag);
    }
    if (family == "gaussian") return gaussian_model(g, J, h, diag);
    throw InputError(path + ".family \"" + family + "\" is not one of binary, gaussian, gaussian_fixed_mean");
  }
  throw InputError(path + ".kind \"" + kind + "\" is not one of pairwise, grid, triple");
}

std::string kind_name(VertexKind k) {
  switch (k) {
    case VertexKind::binary: return "binary";
    case VertexKind::multinomial: return "multinomial";
    case VertexKind::gaussian: return "gaussian";
    case VertexKind::gaussian_fixed_mean: return "gaussian_fixed_mean";
  }
  return "";
}

}  // namespace

ModelSpec parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    auto cut = msg.find("syntax error");
    throw InputError("parse error at " + where(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                     (cut == std::string::npos ? msg : msg.substr(cut)));
  }
  if (!doc.is_object()) throw InputError("model document must be a JSON object");
  const json& ver = field(doc, "schema_version", "$");
  if (integer(ver, "$.schema_version") != kSchemaVersion)
    throw InputError("$.schema_version " + ver.dump() + " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
  try {
    if (doc.contains("generator")) {
      only_keys(doc, {"schema_version", "generator", "description"}, "$");
      return parse_generator(doc["generator"]);
    }
    only_keys(doc, {"schema_version", "variables", "factors", "description"}, "$");
    return parse_explicit(doc);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model document: ") + e.what());
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string serialize_model(const ModelSpec& model) {
  const auto& g = model.graph();
  json doc;
  doc["schema_version"] = kSchemaVersion;
  json vars = json::array();
  for (int i = 0; i < g.num_vertices(); ++i) {
    const VertexSpec& s = model.family().vertex_spec(i);
    json v{{"id", g.vertex_label(i)}, {"kind", kind_name(s.kind)}};
    if (s.kind == VertexKind::multinomial) v["states"] = s.states;
    if (s.kind == VertexKind::gaussian_fixed_mean) v["mean"] = s.mean;
    vars.push_back(v);
  }
  json facs = json::array();
  for (int a = 0; a < g.num_factors(); ++a) {
    json mem = json::array();
    for (int i : g.members(a)) mem.push_back(g.vertex_label(i));
    json params = json::object();
    const auto& names = model.family().factor_family(a).statistic_names();
    for (std::size_t k = 0; k < names.size(); ++k) params[names[k]] = model.theta_bar(a)(static_cast<int>(k));
    facs.push_back(json{{"id", "f" + std::to_string(a + 1)}, {"members", mem}, {"parameters", params}});
  }
  doc["variables"] = vars;
  doc["factors"] = facs;
  return doc.dump(2) + "\n";
}

void save_model(const ModelSpec& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write model file " + path);
  out << serialize_model(model);
}

}  // namespace bzeta
