#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavecert/atoms.hpp"
#include "wavecert/builtins.hpp"
#include "wavecert/errors.hpp"
#include "wavecert/frameops.hpp"
#include "wavecert/hardy.hpp"

namespace wavecert::io {

using json = nlohmann::ordered_json;

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

// {"builtin": name, "params": {...}} or {"samples": {"grid": [...],
// "values": [[re, im], ...]}}
inline generators::GeneratorFunction generator_from_json(const json& spec) {
  if (spec.contains("samples")) {
    const auto& s = spec["samples"];
    if (!s.contains("grid") || !s.contains("values"))
      throw ConfigError("tabulated generator needs samples.grid and samples.values");
    std::vector<double> grid = s["grid"].get<std::vector<double>>();
    std::vector<generators::Complex> values;
    for (const auto& v : s["values"]) {
      if (v.is_number()) {
        values.emplace_back(v.get<double>(), 0.0);
      } else {
        if (!v.is_array() || v.size() != 2)
          throw ConfigError("tabulated values must be numbers or [re, im] pairs");
        values.emplace_back(v[0].get<double>(), v[1].get<double>());
      }
    }
    return generators::tabulated(grid, values);
  }
  if (!spec.contains("builtin"))
    throw ConfigError("generator spec needs \"builtin\" or \"samples\"");
  const std::string name = spec["builtin"].get<std::string>();
  const json params = spec.value("params", json::object());
  if (name == "mexican_hat") return generators::mexican_hat();
  if (name == "meyer") return generators::meyer_orthonormal();
  if (name == "zero") return generators::zero_generator();
  if (name == "fourier_bump")
    return generators::fourier_bump(params.value("lo", 0.125), params.value("hi", 0.5),
                                    params.value("amplitude", 1.0));
  throw ConfigError("unknown builtin generator \"" + name + "\"");
}

inline ops::DilationGrid grid_from_json(const json& spec) {
  ops::DilationGrid g;
  g.A = spec.value("A", 2.0);
  g.j_min = spec.value("j_min", -8);
  g.j_max = spec.value("j_max", 4);
  g.k_radius = spec.value("k_radius", 700);
  g.x0 = spec.value("x0", -32.0);
  g.dx = spec.value("dx", 1.0 / 128.0);
  g.n_samples = spec.value("n_samples", static_cast<std::size_t>(8192));
  g.validate();
  return g;
}

// signals as CSV "x,re[,im]" lines or inline JSON values or a named profile
inline ops::SampledSignal signal_from_json(const json& spec,
                                           const ops::DilationGrid& grid) {
  if (spec.contains("builtin")) {
    const std::string name = spec["builtin"].get<std::string>();
    auto prof = [&]() -> std::function<generators::Complex(double)> {
      if (name == "gaussian")
        return [](double x) { return generators::Complex{std::exp(-0.5 * x * x), 0.0}; };
      if (name == "gaussian_derivative")
        return [](double x) {
          return generators::Complex{x * std::exp(-0.5 * x * x), 0.0};
        };
      if (name == "mexican")
        return [](double x) {
          return generators::Complex{(1.0 - x * x) * std::exp(-0.5 * x * x), 0.0};
        };
      throw ConfigError("unknown builtin signal \"" + name + "\"");
    }();
    return ops::sample(grid, prof);
  }
  if (spec.contains("values")) {
    ops::SampledSignal f;
    f.x0 = grid.x0;
    f.dx = grid.dx;
    for (const auto& v : spec["values"]) {
      if (v.is_number())
        f.values.emplace_back(v.get<double>(), 0.0);
      else
        f.values.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    if (f.values.size() != grid.n_samples)
      throw ConfigError("signal values do not match the grid sample count");
    return f;
  }
  if (spec.contains("csv")) {
    std::ifstream in(spec["csv"].get<std::string>());
    if (!in) throw ConfigError("cannot open signal CSV");
    ops::SampledSignal f;
    f.x0 = grid.x0;
    f.dx = grid.dx;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> row;
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
      if (row.size() < 2) throw ConfigError("signal CSV rows need x,value");
      f.values.emplace_back(row[1], row.size() > 2 ? row[2] : 0.0);
    }
    if (f.values.size() != grid.n_samples)
      throw ConfigError("signal CSV length does not match the grid");
    return f;
  }
  throw ConfigError("signal spec needs builtin, values, or csv");
}

// {"A": ..., "entries": [[j, k, re, im], ...]}
inline json coefficients_to_json(const ops::CoefficientArray& c) {
  json out;
  out["A"] = c.A;
  json entries = json::array();
  for (const auto& [jk, v] : c.entries)
    entries.push_back({jk.first, jk.second, v.real(), v.imag()});
  out["entries"] = std::move(entries);
  return out;
}

inline ops::CoefficientArray coefficients_from_json(const json& spec) {
  ops::CoefficientArray c;
  c.A = spec.value("A", 2.0);
  for (const auto& e : spec.at("entries")) {
    if (!e.is_array() || e.size() != 4)
      throw ConfigError("coefficient entries must be [j, k, re, im]");
    c.entries[{e[0].get<int>(), e[1].get<int>()}] =
        generators::Complex{e[2].get<double>(), e[3].get<double>()};
  }
  return c;
}

inline json signal_to_json(const ops::SampledSignal& f) {
  json out;
  out["x0"] = f.x0;
  out["dx"] = f.dx;
  json values = json::array();
  for (const auto& v : f.values) values.push_back({v.real(), v.imag()});
  out["values"] = std::move(values);
  return out;
}

inline json certificate_to_json(const hardy::CertificateReport& rep) {
  json out;
  out["p"] = rep.p;
  out["b"] = rep.b;
  out["n"] = rep.n;
  out["calG"] = rep.calG;
  out["mp_bound"] = rep.mp_bound;
  out["term1"] = {{"zeta", rep.zeta_star}, {"value", rep.term1}};
  out["term2"] = {{"eta", rep.eta_star}, {"value", rep.term2}};
  out["inputs"] = {
      {"u1", rep.inputs.u1},
      {"c1", rep.inputs.c1},
      {"u2", rep.inputs.u2},
      {"c2", rep.inputs.c2},
      {"provenance",
       rep.inputs.provenance == hardy::Provenance::External ? "external" : "computed"},
      {"u_is_empirical", rep.inputs.u_is_empirical}};
  out["certified"] = rep.certified;
  out["neumann_rate"] = rep.neumann_rate;
  if (rep.inputs.u_is_empirical)
    out["note"] =
        "u values are empirical Rayleigh probes (lower-bound style), not rigorous "
        "operator norms; supply external constants for a rigorous certificate";
  return out;
}

} // namespace wavecert::io
