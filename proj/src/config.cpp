#include "npcac/config.hpp"

#include "npcac/presets.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace npcac {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

const json& field(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(where + ": missing key '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

double number_or(const json& j, const std::string& key, const std::string& where, double fallback) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

long integer(const json& j, const std::string& key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<long>();
}

long integer_or(const json& j, const std::string& key, const std::string& where, long fallback) {
  return j.contains(key) ? integer(j, key, where) : fallback;
}

Eigen::VectorXd vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

CoefficientFn coefficient_from_json(const json& j, const std::string& where) {
  require_object(j, where);
  const json& type = field(j, "type", where);
  if (!type.is_string()) throw ConfigError(where + ".type: expected a string");
  const auto t = type.get<std::string>();
  if (t == "linear") {
    reject_unknown(j, where, {"type", "c"});
    return Linear{number(j, "c", where)};
  }
  if (t == "atan_affine" || t == "sin_affine") {
    reject_unknown(j, where, {"type", "c0", "c1"});
    const double c0 = number(j, "c0", where), c1 = number(j, "c1", where);
    if (t == "atan_affine") return AtanAffine{c0, c1};
    return SinAffine{c0, c1};
  }
  throw ConfigError(where + ": unknown coefficient type '" + t + "'");
}

json coefficient_to_json(const CoefficientFn& fn) {
  if (const auto* l = std::get_if<Linear>(&fn)) return {{"type", "linear"}, {"c", l->c}};
  if (const auto* a = std::get_if<AtanAffine>(&fn)) return {{"type", "atan_affine"}, {"c0", a->c0}, {"c1", a->c1}};
  const auto& s = std::get<SinAffine>(fn);
  return {{"type", "sin_affine"}, {"c0", s.c0}, {"c1", s.c1}};
}

// A single dictionary is shared by every lag; an array gives one per lag.
std::vector<BasisSpec> per_lag_bases(const json& j, int order, const std::string& where) {
  std::vector<BasisSpec> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(basis_from_json(j[i]));
    if (static_cast<int>(out.size()) != order)
      throw ConfigError(where + ": expected " + std::to_string(order) + " dictionaries, got " +
                        std::to_string(out.size()));
  } else {
    out.assign(static_cast<std::size_t>(order), basis_from_json(j));
  }
  return out;
}

std::vector<CoefficientFn> per_lag_coefficients(const json& j, int order, const std::string& where) {
  std::vector<CoefficientFn> out;
  if (!j.is_array()) throw ConfigError(where + ": expected an array with one entry per lag");
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(coefficient_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  if (static_cast<int>(out.size()) != order)
    throw ConfigError(where + ": expected " + std::to_string(order) + " entries, got " + std::to_string(out.size()));
  return out;
}

}  // namespace

BasisSpec basis_from_json(const json& j) {
  const std::string where = "basis";
  require_object(j, where);
  const json& fam = field(j, "family", where);
  if (!fam.is_string()) throw ConfigError("basis.family: expected a string");
  const auto f = fam.get<std::string>();
  BasisSpec spec;
  if (f == "polynomial") {
    reject_unknown(j, where, {"family", "degree"});
    spec = Polynomial{static_cast<int>(integer(j, "degree", where))};
  } else if (f == "fourier") {
    reject_unknown(j, where, {"family", "harmonics", "half_period"});
    spec = Fourier{static_cast<int>(integer(j, "harmonics", where)), number(j, "half_period", where)};
  } else if (f == "spline") {
    reject_unknown(j, where, {"family", "interior_nodes", "lo", "hi"});
    spec = CubicHermiteSpline{static_cast<int>(integer(j, "interior_nodes", where)), number(j, "lo", where),
                              number(j, "hi", where)};
  } else if (f == "constant" || f == "zero" || f == "atan" || f == "sin") {
    reject_unknown(j, where, {"family"});
    if (f == "constant") spec = Constant{};
    else if (f == "zero") spec = Zero{};
    else if (f == "atan") spec = AtanPair{};
    else spec = SinPair{};
  } else {
    throw ConfigError("basis: unknown family '" + f + "'");
  }
  try {
    validate_basis(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("basis: ") + e.what());
  }
  return spec;
}

json basis_to_json(const BasisSpec& spec) {
  if (const auto* p = std::get_if<Polynomial>(&spec)) return {{"family", "polynomial"}, {"degree", p->degree}};
  if (const auto* f = std::get_if<Fourier>(&spec))
    return {{"family", "fourier"}, {"harmonics", f->harmonics}, {"half_period", f->half_period}};
  if (const auto* s = std::get_if<CubicHermiteSpline>(&spec))
    return {{"family", "spline"}, {"interior_nodes", s->interior_nodes}, {"lo", s->domain_lo}, {"hi", s->domain_hi}};
  if (std::holds_alternative<Constant>(spec)) return {{"family", "constant"}};
  if (std::holds_alternative<Zero>(spec)) return {{"family", "zero"}};
  if (std::holds_alternative<AtanPair>(spec)) return {{"family", "atan"}};
  return {{"family", "sin"}};
}

ConfigDocument parse_config(const json& doc) {
  require_object(doc, "config");
  reject_unknown(doc, "config", {"schema", "name", "plant", "model", "rls", "mpc", "sim", "command", "output"});
  if (doc.contains("schema") && doc["schema"] != kConfigSchema)
    throw ConfigError("config.schema: expected '" + std::string(kConfigSchema) + "'");

  ConfigDocument out;
  SimConfig& c = out.sim;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ConfigError("config.name: expected a string");
    c.name = doc["name"].get<std::string>();
  }

  {
    const json& p = field(doc, "plant", "config");
    require_object(p, "plant");
    reject_unknown(p, "plant", {"order", "F", "G"});
    c.plant.order = static_cast<int>(integer(p, "order", "plant"));
    if (c.plant.order < 1) throw ConfigError("plant.order: must be >= 1");
    c.plant.F = per_lag_coefficients(field(p, "F", "plant"), c.plant.order, "plant.F");
    c.plant.G = per_lag_coefficients(field(p, "G", "plant"), c.plant.order, "plant.G");
  }
  {
    const json& m = field(doc, "model", "config");
    require_object(m, "model");
    reject_unknown(m, "model", {"order", "f", "g", "h"});
    c.model.order = static_cast<int>(integer(m, "order", "model"));
    if (c.model.order < 1) throw ConfigError("model.order: must be >= 1");
    c.model.f_specs = per_lag_bases(field(m, "f", "model"), c.model.order, "model.f");
    c.model.g_specs = per_lag_bases(field(m, "g", "model"), c.model.order, "model.g");
    if (m.contains("h") && !m["h"].is_null()) c.model.h_spec = basis_from_json(m["h"]);
  }
  {
    const json& r = field(doc, "rls", "config");
    require_object(r, "rls");
    reject_unknown(r, "rls", {"theta0", "R0", "lambda", "epsilon"});
    c.rls.theta0 = vector(field(r, "theta0", "rls"), "rls.theta0");
    const json& r0 = field(r, "R0", "rls");
    if (r0.is_number()) {
      c.rls.r0_scale = r0.get<double>();
    } else if (r0.is_array()) {
      const auto n = static_cast<Eigen::Index>(r0.size());
      c.rls.r0_matrix.resize(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd row = vector(r0[static_cast<std::size_t>(i)], "rls.R0");
        if (row.size() != n) throw ConfigError("rls.R0: matrix must be square");
        c.rls.r0_matrix.row(i) = row.transpose();
      }
    } else {
      throw ConfigError("rls.R0: expected a number or a square matrix");
    }
    c.rls.lambda = number(r, "lambda", "rls");
    c.rls.epsilon = number_or(r, "epsilon", "rls", 1e-4);
  }
  {
    const json& m = field(doc, "mpc", "config");
    require_object(m, "mpc");
    reject_unknown(m, "mpc", {"horizon", "subiterations", "Q", "R", "bounds", "broyden_tol"});
    c.mpc.horizon = static_cast<int>(integer(m, "horizon", "mpc"));
    c.mpc.subiterations = static_cast<int>(integer_or(m, "subiterations", "mpc", 1));
    c.mpc.Q = number(m, "Q", "mpc");
    c.mpc.R = number(m, "R", "mpc");
    c.mpc.broyden_tol = number_or(m, "broyden_tol", "mpc", 1e-9);
    if (m.contains("bounds") && !m["bounds"].is_null()) {
      const Eigen::VectorXd b = vector(m["bounds"], "mpc.bounds");
      if (b.size() != 2) throw ConfigError("mpc.bounds: expected [u_min, u_max]");
      c.mpc.bounds = Bounds{b[0], b[1]};
    }
  }
  {
    const json& s = field(doc, "sim", "config");
    require_object(s, "sim");
    reject_unknown(s, "sim", {"steps", "y0", "u0", "sigma_u", "seed", "u_a"});
    c.steps = integer(s, "steps", "sim");
    c.y0 = number(s, "y0", "sim");
    c.u0 = number(s, "u0", "sim");
    c.sigma_u = number(s, "sigma_u", "sim");
    const json& seed = field(s, "seed", "sim");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
      throw ConfigError("sim.seed: expected a non-negative integer");
    c.seed = seed.get<std::uint64_t>();
    c.u_a = number_or(s, "u_a", "sim", 0.1);
  }
  {
    const json& cmd = field(doc, "command", "config");
    require_object(cmd, "command");
    reject_unknown(cmd, "command", {"amplitude", "rate"});
    c.command = CommandSpec{number(cmd, "amplitude", "command"), number(cmd, "rate", "command")};
  }
  if (doc.contains("output")) {
    const json& o = doc["output"];
    require_object(o, "output");
    reject_unknown(o, "output", {"snapshot_step", "grid", "theta_every", "windows"});
    OutputConfig& oc = out.output;
    oc.snapshot_step = integer_or(o, "snapshot_step", "output", oc.snapshot_step);
    oc.theta_every = integer_or(o, "theta_every", "output", 0);
    if (o.contains("grid")) {
      const json& g = o["grid"];
      require_object(g, "output.grid");
      reject_unknown(g, "output.grid", {"lo", "hi", "points"});
      oc.grid.lo = number_or(g, "lo", "output.grid", oc.grid.lo);
      oc.grid.hi = number_or(g, "hi", "output.grid", oc.grid.hi);
      oc.grid.points = static_cast<int>(integer_or(g, "points", "output.grid", oc.grid.points));
      if (oc.grid.points < 2 || !(oc.grid.lo < oc.grid.hi)) throw ConfigError("output.grid: need lo < hi, points >= 2");
    }
    if (o.contains("windows")) {
      oc.windows.clear();
      if (!o["windows"].is_array()) throw ConfigError("output.windows: expected [[first, last], ...]");
      for (const auto& w : o["windows"]) {
        if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() || !w[1].is_number_integer())
          throw ConfigError("output.windows: expected [[first, last], ...]");
        oc.windows.push_back(Window{w[0].get<long>(), w[1].get<long>()});
        if (oc.windows.back().first < 1 || oc.windows.back().last < oc.windows.back().first)
          throw ConfigError("output.windows: need 1 <= first <= last");
      }
    }
    if (oc.theta_every < 0) throw ConfigError("output.theta_every: must be >= 0");
  }

  c.validate();
  return out;
}

ConfigDocument load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ConfigDocument& doc) {
  const SimConfig& c = doc.sim;
  json j;
  j["schema"] = kConfigSchema;
  j["name"] = c.name;

  json F = json::array(), G = json::array();
  for (const auto& f : c.plant.F) F.push_back(coefficient_to_json(f));
  for (const auto& g : c.plant.G) G.push_back(coefficient_to_json(g));
  j["plant"] = {{"order", c.plant.order}, {"F", F}, {"G", G}};

  json fs = json::array(), gs = json::array();
  for (const auto& s : c.model.f_specs) fs.push_back(basis_to_json(s));
  for (const auto& s : c.model.g_specs) gs.push_back(basis_to_json(s));
  j["model"] = {{"order", c.model.order},
                {"f", fs},
                {"g", gs},
                {"h", c.model.h_spec ? basis_to_json(*c.model.h_spec) : json(nullptr)}};

  json r0;
  if (c.rls.r0_scale) {
    r0 = *c.rls.r0_scale;
  } else {
    r0 = json::array();
    for (Eigen::Index i = 0; i < c.rls.r0_matrix.rows(); ++i)
      r0.push_back(vector_json(c.rls.r0_matrix.row(i).transpose()));
  }
  j["rls"] = {{"theta0", vector_json(c.rls.theta0)}, {"R0", r0}, {"lambda", c.rls.lambda},
              {"epsilon", c.rls.epsilon}};

  j["mpc"] = {{"horizon", c.mpc.horizon},
              {"subiterations", c.mpc.subiterations},
              {"Q", c.mpc.Q},
              {"R", c.mpc.R},
              {"bounds", c.mpc.bounds ? json::array({c.mpc.bounds->lower, c.mpc.bounds->upper}) : json(nullptr)},
              {"broyden_tol", c.mpc.broyden_tol}};
  j["sim"] = {{"steps", c.steps}, {"y0", c.y0}, {"u0", c.u0}, {"sigma_u", c.sigma_u}, {"seed", c.seed}, {"u_a", c.u_a}};
  j["command"] = {{"amplitude", c.command.amplitude}, {"rate", c.command.rate}};

  json windows = json::array();
  for (const auto& w : doc.output.windows) windows.push_back(json::array({w.first, w.last}));
  j["output"] = {{"snapshot_step", doc.output.snapshot_step},
                 {"grid", {{"lo", doc.output.grid.lo}, {"hi", doc.output.grid.hi}, {"points", doc.output.grid.points}}},
                 {"theta_every", doc.output.theta_every},
                 {"windows", windows}};
  return j;
}

ConfigDocument preset_document(const std::string& name) {
  ConfigDocument doc;
  doc.sim = preset(name);
  return doc;
}

}  // namespace npcac
