// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include "elastmf/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace emf {

using nlohmann::json;

ModelKind model_from_string(const std::string& s) {
  if (s == "cNH") return ModelKind::cnh;
  if (s == "iNH") return ModelKind::inh;
  if (s == "fiber") return ModelKind::fiber;
  throw ConfigError("unknown model: " + s);
}

Domain domain_from_string(const std::string& s) {
  if (s == "material") return Domain::material;
  if (s == "spatial") return Domain::spatial;
  throw ConfigError("unknown domain: " + s);
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "none") return Strategy::none;
  if (s == "scalar") return Strategy::scalar;
  if (s == "tensor") return Strategy::tensor;
  throw ConfigError("unknown strategy: " + s);
}

Stability stability_from_string(const std::string& s) {
  if (s == "standard") return Stability::standard;
  if (s == "stable") return Stability::stable;
  throw ConfigError("unknown stability: " + s);
}

SweepModel sweep_model_from_string(const std::string& s) {
  if (s == "cNH") return SweepModel::cnh;
  if (s == "iNH") return SweepModel::inh;
  if (s == "fiber") return SweepModel::fiber;
  if (s == "svk") return SweepModel::svk;
  throw ConfigError("unknown sweep model: " + s);
}

SweepQuantity sweep_quantity_from_string(const std::string& s) {
  if (s == "stress") return SweepQuantity::stress;
  if (s == "tangent") return SweepQuantity::tangent;
  throw ConfigError("unknown quantity: " + s);
}

Formulation formulation_from_string(const std::string& s) {
  const auto dash = s.find('-');
  if (dash == std::string::npos)
    throw ConfigError("formulation must look like stable-material: " + s);
  return {stability_from_string(s.substr(0, dash)),
          domain_from_string(s.substr(dash + 1))};
}

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json vec3_to_json(const Vec3d& v) { return json::array({v[0], v[1], v[2]}); }

Vec3d vec3_from_json(const json& j) {
  return Vec3d{{{j.at(0).get<double>(), j.at(1).get<double>(),
                 j.at(2).get<double>()}}};
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig c;
  try {
    get_if(j, "seed", c.seed);
    get_if(j, "threads", c.threads);
    if (j.contains("model")) c.model = model_from_string(j.at("model"));
    if (j.contains("material")) {
      const json& m = j.at("material");
      get_if(m, "mu", c.params.mu);
      get_if(m, "lambda", c.params.lambda);
      get_if(m, "kappa_b", c.params.kappa_b);
      get_if(m, "k1", c.params.k1);
      get_if(m, "k2", c.params.k2);
      get_if(m, "a", c.params.a);
      get_if(m, "b", c.params.b);
      if (m.contains("phi_degrees"))
        c.params.phi = m.at("phi_degrees").get<double>() *
                       3.14159265358979323846 / 180.0;
      if (m.contains("e1")) c.params.e1 = vec3_from_json(m.at("e1"));
      if (m.contains("e2")) c.params.e2 = vec3_from_json(m.at("e2"));
      if (m.contains("e3")) c.params.e3 = vec3_from_json(m.at("e3"));
    }
    if (j.contains("kernels")) {
      const json& k = j.at("kernels");
      get_if(k, "ln_series_terms", c.kernels.ln_series_terms);
      get_if(k, "jpow_newton_steps", c.kernels.jpow_newton_steps);
      if (k.contains("exp_mode"))
        c.kernels.exp_mode = k.at("exp_mode") == "fast" ? ExpMode::fast
                                                        : ExpMode::exact;
      if (k.contains("jpow_mode"))
        c.kernels.jpow_mode = k.at("jpow_mode") == "exact" ? JpowMode::exact
                                                           : JpowMode::newton;
    }
    if (j.contains("stability")) {
      const json& s = j.at("stability");
      get_if(s, "scale_min", c.stability.scale_min);
      get_if(s, "scale_max", c.stability.scale_max);
      get_if(s, "scale_count", c.stability.scale_count);
      get_if(s, "samples_per_scale", c.stability.samples_per_scale);
      if (s.contains("models")) {
        c.stability.models.clear();
        for (const auto& v : s.at("models"))
          c.stability.models.push_back(
              sweep_model_from_string(v.get<std::string>()));
      }
      if (s.contains("formulations")) {
        c.stability.formulations.clear();
        for (const auto& v : s.at("formulations"))
          c.stability.formulations.push_back(
              formulation_from_string(v.get<std::string>()));
      }
      if (s.contains("quantities")) {
        c.stability.quantities.clear();
        for (const auto& v : s.at("quantities"))
          c.stability.quantities.push_back(
              sweep_quantity_from_string(v.get<std::string>()));
      }
    }
    if (j.contains("mesh")) {
      const json& m = j.at("mesh");
      get_if(m, "n0", c.mesh.n0);
      get_if(m, "level", c.mesh.level);
      get_if(m, "degree", c.mesh.degree);
      get_if(m, "extent", c.mesh.extent);
      get_if(m, "deform_amplitude", c.mesh.deform_amplitude);
    }
    if (j.contains("bench")) {
      const json& b = j.at("bench");
      get_if(b, "degrees", c.bench.degrees);
      get_if(b, "operations", c.bench.operations);
      get_if(b, "repetitions_block", c.bench.repetitions_block);
      get_if(b, "min_seconds", c.bench.min_seconds);
      get_if(b, "measurements", c.bench.measurements);
      get_if(b, "average_best", c.bench.average_best);
      get_if(b, "linearization_stretch", c.bench.linearization_stretch);
      if (b.contains("meshes")) {
        c.bench.meshes.clear();
        for (const auto& [key, val] : b.at("meshes").items())
          c.bench.meshes[std::stoi(key)] = {val.at(0).get<int>(),
                                            val.at(1).get<int>()};
      }
      if (b.contains("domains")) {
        c.bench.domains.clear();
        for (const auto& v : b.at("domains"))
          c.bench.domains.push_back(domain_from_string(v.get<std::string>()));
      }
      if (b.contains("strategies")) {
        c.bench.strategies.clear();
        for (const auto& v : b.at("strategies"))
          c.bench.strategies.push_back(
              strategy_from_string(v.get<std::string>()));
      }
    }
    if (j.contains("solve")) {
      const json& s = j.at("solve");
      get_if(s, "pressure", c.solve.pressure);
      get_if(s, "increments", c.solve.increments);
      if (s.contains("domain"))
        c.solve.domain = domain_from_string(s.at("domain"));
      if (s.contains("strategy"))
        c.solve.strategy = strategy_from_string(s.at("strategy"));
      if (s.contains("stability"))
        c.solve.stability = stability_from_string(s.at("stability"));
      get_if(s, "precision", c.solve.precision);
      if (s.contains("newton")) {
        const json& n = s.at("newton");
        get_if(n, "eps_abs", c.solve.newton.eps_abs);
        get_if(n, "eps_rel", c.solve.newton.eps_rel);
        get_if(n, "max_iter", c.solve.newton.max_iter);
      }
      if (s.contains("fgmres")) {
        const json& f = s.at("fgmres");
        get_if(f, "abs_tol", c.solve.fgmres.abs_tol);
        get_if(f, "rel_tol", c.solve.fgmres.rel_tol);
        get_if(f, "restart", c.solve.fgmres.restart);
        get_if(f, "max_restarts", c.solve.fgmres.max_restarts);
      }
      if (s.contains("smoother")) {
        const json& m = s.at("smoother");
        get_if(m, "degree", c.solve.smoother.degree);
        get_if(m, "range_factor", c.solve.smoother.range_factor);
        get_if(m, "safety", c.solve.smoother.safety);
        get_if(m, "eig_iterations", c.solve.smoother.eig_iterations);
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  if (c.solve.precision != "mixed" && c.solve.precision != "double")
    throw ConfigError("solve.precision must be mixed or double");
  if (c.stability.scale_count < 2 || c.stability.scale_min <= 0 ||
      c.stability.scale_max <= c.stability.scale_min)
    throw ConfigError("stability scales invalid");
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["threads"] = threads;
  j["model"] = to_string(model);
  j["material"] = {
      {"mu", params.mu},         {"lambda", params.lambda},
      {"kappa_b", params.kappa_b}, {"k1", params.k1},
      {"k2", params.k2},         {"a", params.a},
      {"b", params.b},
      {"phi_degrees", params.phi * 180.0 / 3.14159265358979323846},
      {"e1", vec3_to_json(params.e1)},
      {"e2", vec3_to_json(params.e2)},
      {"e3", vec3_to_json(params.e3)}};
  j["kernels"] = {
      {"ln_series_terms", kernels.ln_series_terms},
      {"jpow_newton_steps", kernels.jpow_newton_steps},
      {"exp_mode", kernels.exp_mode == ExpMode::fast ? "fast" : "exact"},
      {"jpow_mode",
       kernels.jpow_mode == JpowMode::exact ? "exact" : "newton"}};
  {
    json s;
    s["scale_min"] = stability.scale_min;
    s["scale_max"] = stability.scale_max;
    s["scale_count"] = stability.scale_count;
    s["samples_per_scale"] = stability.samples_per_scale;
    json models = json::array(), forms = json::array(), qs = json::array();
    for (auto m : stability.models) models.push_back(to_string(m));
    for (auto f : stability.formulations)
      forms.push_back(formulation_label(f));
    for (auto q : stability.quantities) qs.push_back(to_string(q));
    s["models"] = models;
    s["formulations"] = forms;
    s["quantities"] = qs;
    j["stability"] = s;
  }
  j["mesh"] = {{"n0", mesh.n0},
               {"level", mesh.level},
               {"degree", mesh.degree},
               {"extent", mesh.extent},
               {"deform_amplitude", mesh.deform_amplitude}};
  {
    json b;
    b["degrees"] = bench.degrees;
    json meshes;
    for (const auto& [p, nl] : bench.meshes)
      meshes[std::to_string(p)] = json::array({nl.first, nl.second});
    b["meshes"] = meshes;
    json doms = json::array(), strats = json::array();
    for (auto d : bench.domains) doms.push_back(to_string(d));
    for (auto s : bench.strategies) strats.push_back(to_string(s));
    b["domains"] = doms;
    b["strategies"] = strats;
    b["operations"] = bench.operations;
    b["repetitions_block"] = bench.repetitions_block;
    b["min_seconds"] = bench.min_seconds;
    b["measurements"] = bench.measurements;
    b["average_best"] = bench.average_best;
    b["linearization_stretch"] = bench.linearization_stretch;
    j["bench"] = b;
  }
  {
    json s;
    s["pressure"] = solve.pressure;
    s["increments"] = solve.increments;
    s["domain"] = to_string(solve.domain);
    s["strategy"] = to_string(solve.strategy);
    s["stability"] = to_string(solve.stability);
    s["precision"] = solve.precision;
    s["newton"] = {{"eps_abs", solve.newton.eps_abs},
                   {"eps_rel", solve.newton.eps_rel},
                   {"max_iter", solve.newton.max_iter}};
    s["fgmres"] = {{"abs_tol", solve.fgmres.abs_tol},
                   {"rel_tol", solve.fgmres.rel_tol},
                   {"restart", solve.fgmres.restart},
                   {"max_restarts", solve.fgmres.max_restarts}};
    s["smoother"] = {{"degree", solve.smoother.degree},
                     {"range_factor", solve.smoother.range_factor},
                     {"safety", solve.smoother.safety},
                     {"eig_iterations", solve.smoother.eig_iterations}};
    j["solve"] = s;
  }
  return j.dump(2) + "\n";
}

}  // namespace emf
