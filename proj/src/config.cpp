#include "wegnerlab/config.hpp"

#include <algorithm>
#include <fstream>

#include "wegnerlab/errors.hpp"

namespace wegnerlab {

namespace {

void reject_unknown(const nlohmann::json& doc,
                    std::initializer_list<const char*> allowed,
                    const char* where) {
  if (!doc.is_object())
    throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return key == k;
        }) == allowed.end())
      throw ConfigError(std::string("unknown key \"") + key + "\" in " +
                        where);
  }
}

double positive(const nlohmann::json& v, const char* what) {
  const double x = v.get<double>();
  if (!(x > 0.0)) throw ConfigError(std::string(what) + " must be positive");
  return x;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  reject_unknown(doc,
                 {"model", "lattice", "boundary_conditions", "energies",
                  "n_realizations", "master_seed", "output_dir", "quadrature",
                  "certificate_grid", "lags", "windows", "overrides",
                  "dump_fields", "fields_dir"},
                 "config");
  ExperimentConfig cfg;
  if (!doc.contains("model"))
    throw ConfigError("config requires a \"model\" section");
  cfg.model_doc = doc["model"];
  CovarianceModel::from_json(cfg.model_doc);  // validate eagerly

  if (doc.contains("lattice")) {
    const auto& lat = doc["lattice"];
    reject_unknown(lat, {"dimension", "half_side", "half_sides", "step"},
                   "lattice");
    if (!lat.contains("step"))
      throw ConfigError("lattice requires a \"step\"");
    cfg.lattice_step = positive(lat["step"], "lattice step");
    cfg.lattice_dimension = lat.value("dimension", 1);
    if (lat.contains("half_side") && lat.contains("half_sides"))
      throw ConfigError("lattice: give either half_side or half_sides");
    if (lat.contains("half_side"))
      cfg.half_sides = {positive(lat["half_side"], "half_side")};
    else if (lat.contains("half_sides")) {
      for (const auto& v : lat["half_sides"])
        cfg.half_sides.push_back(positive(v, "half_side"));
      if (cfg.half_sides.empty())
        throw ConfigError("half_sides must not be empty");
    } else {
      throw ConfigError("lattice requires half_side or half_sides");
    }
  }

  if (doc.contains("boundary_conditions")) {
    cfg.bcs.clear();
    for (const auto& v : doc["boundary_conditions"])
      cfg.bcs.push_back(bc_from_string(v.get<std::string>()));
    if (cfg.bcs.empty())
      throw ConfigError("boundary_conditions must not be empty");
  }

  if (doc.contains("energies")) {
    const auto& en = doc["energies"];
    reject_unknown(en, {"min", "max", "count"}, "energies");
    EnergyGridSpec spec;
    if (!en.contains("max"))
      throw ConfigError("energies requires \"max\"");
    spec.max = en["max"].get<double>();
    if (en.contains("min")) {
      spec.min = en["min"].get<double>();
      if (!(*spec.min < spec.max))
        throw ConfigError("energies: min must be below max");
    }
    spec.count = en.value("count", 200);
    if (spec.count < 2) throw ConfigError("energies: count must be >= 2");
    cfg.energies = spec;
  }

  if (doc.contains("n_realizations")) {
    cfg.n_realizations = doc["n_realizations"].get<int>();
    if (cfg.n_realizations < 1)
      throw ConfigError("n_realizations must be >= 1");
  }
  if (doc.contains("master_seed"))
    cfg.master_seed = doc["master_seed"].get<std::uint64_t>();
  if (doc.contains("output_dir")) {
    cfg.output_dir = doc["output_dir"].get<std::string>();
    if (cfg.output_dir.empty())
      throw ConfigError("output_dir must not be empty");
  }

  if (doc.contains("quadrature")) {
    const auto& q = doc["quadrature"];
    reject_unknown(q, {"step", "truncation_radius"}, "quadrature");
    if (q.contains("step"))
      cfg.quadrature.step = positive(q["step"], "quadrature step");
    if (q.contains("truncation_radius"))
      cfg.quadrature.truncation_radius =
          positive(q["truncation_radius"], "truncation radius");
  }

  if (doc.contains("certificate_grid")) {
    const auto& g = doc["certificate_grid"];
    reject_unknown(g, {"x_step", "z_step", "x_max", "tail_epsilon",
                       "gamma_step"},
                   "certificate_grid");
    if (g.contains("x_step"))
      cfg.certificate_grid.x_step = positive(g["x_step"], "x_step");
    if (g.contains("z_step"))
      cfg.certificate_grid.z_step = positive(g["z_step"], "z_step");
    if (g.contains("x_max"))
      cfg.certificate_grid.x_max = positive(g["x_max"], "x_max");
    if (g.contains("tail_epsilon"))
      cfg.certificate_grid.tail_epsilon =
          positive(g["tail_epsilon"], "tail_epsilon");
    if (g.contains("gamma_step"))
      cfg.certificate_grid.gamma_step =
          positive(g["gamma_step"], "gamma_step");
  }

  if (doc.contains("lags")) {
    for (const auto& v : doc["lags"]) {
      const double lag = v.get<double>();
      if (lag < 0.0) throw ConfigError("lags must be nonnegative");
      cfg.lags.push_back(lag);
    }
  }

  if (doc.contains("windows")) {
    for (const auto& v : doc["windows"]) {
      if (!v.is_array() || v.size() != 2)
        throw ConfigError("windows must be [e1, e2] pairs");
      EnergyWindow w{v[0].get<double>(), v[1].get<double>()};
      if (!(w.e1 < w.e2)) throw ConfigError("window requires e1 < e2");
      cfg.windows.push_back(w);
    }
  }

  if (doc.contains("overrides")) {
    const auto& ov = doc["overrides"];
    reject_unknown(
        ov, {"b_factor", "dense_limit", "pad", "threads", "mesh_refinement"},
        "overrides");
    if (ov.contains("b_factor")) {
      cfg.overrides.b_factor = ov["b_factor"].get<double>();
      if (!(cfg.overrides.b_factor > 0.0) || cfg.overrides.b_factor > 1.0)
        throw ConfigError("b_factor must lie in (0, 1]");
    }
    if (ov.contains("dense_limit"))
      cfg.overrides.dense_limit = ov["dense_limit"].get<std::size_t>();
    if (ov.contains("pad"))
      cfg.overrides.pad = positive(ov["pad"], "pad");
    if (ov.contains("threads")) {
      cfg.overrides.threads = ov["threads"].get<int>();
      if (cfg.overrides.threads < 1)
        throw ConfigError("threads must be >= 1");
    }
    if (ov.contains("mesh_refinement"))
      cfg.overrides.mesh_refinement = ov["mesh_refinement"].get<bool>();
  }

  if (doc.contains("dump_fields")) {
    cfg.dump_fields = doc["dump_fields"].get<int>();
    if (cfg.dump_fields < 0)
      throw ConfigError("dump_fields must be >= 0");
  }
  if (doc.contains("fields_dir"))
    cfg.fields_dir = doc["fields_dir"].get<std::string>();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed JSON: ") + ex.what());
  }
  try {
    return from_json(doc);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed config: ") + ex.what());
  }
}

CovarianceModel ExperimentConfig::model() const {
  return CovarianceModel::from_json(model_doc);
}

LatticeSpec ExperimentConfig::lattice(double half_side) const {
  require_lattice();
  LatticeSpec lat;
  lat.dimension = lattice_dimension.value();
  lat.half_side = half_side;
  lat.step = lattice_step;
  lat.validate();
  return lat;
}

void ExperimentConfig::require_lattice() const {
  if (!lattice_dimension.has_value() || half_sides.empty())
    throw ConfigError("this command requires a \"lattice\" section");
}

nlohmann::json ExperimentConfig::snapshot() const {
  nlohmann::json doc;
  doc["model"] = model_doc;
  if (lattice_dimension.has_value()) {
    doc["lattice"] = {{"dimension", *lattice_dimension},
                      {"half_sides", half_sides},
                      {"step", lattice_step}};
  }
  nlohmann::json bc_list = nlohmann::json::array();
  for (auto bc : bcs) bc_list.push_back(to_string(bc));
  doc["boundary_conditions"] = bc_list;
  if (energies.has_value()) {
    nlohmann::json en;
    if (energies->min.has_value()) en["min"] = *energies->min;
    en["max"] = energies->max;
    en["count"] = energies->count;
    doc["energies"] = en;
  }
  if (n_realizations > 0) doc["n_realizations"] = n_realizations;
  doc["master_seed"] = master_seed;
  doc["output_dir"] = output_dir;
  doc["overrides"] = {{"b_factor", overrides.b_factor},
                      {"dense_limit", overrides.dense_limit},
                      {"pad", overrides.pad},
                      {"threads", overrides.threads},
                      {"mesh_refinement", overrides.mesh_refinement}};
  if (!lags.empty()) doc["lags"] = lags;
  if (!windows.empty()) {
    nlohmann::json ws = nlohmann::json::array();
    for (const auto& w : windows) ws.push_back({w.e1, w.e2});
    doc["windows"] = ws;
  }
  return doc;
}

}  // namespace wegnerlab
