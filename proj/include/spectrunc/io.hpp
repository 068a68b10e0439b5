#pragma once

// File formats:
//   SampledFunction  CSV "z,re,im", one row per grid point, 17 significant digits.
//   ToeplitzRep      CSV "k,re,im" for k = -(n-1)..(n-1).
//   FunctionTuple    JSON manifest {"d", "m", "components": [csv files]}.
//   Dataset          JSON manifest {"N", "d", "m", "inputs": [tuple manifests], "outputs": [csv files]}.
//   KernelSpec       JSON with "family", "n" (integer or "inf"), "q", "spectrum" and
//                    per-family blocks "poly", "prod", "sep".
//   RidgeModel       directory with model.json, training inputs and coefficient CSVs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spectrunc/error.hpp"
#include "spectrunc/kernels.hpp"
#include "spectrunc/regression.hpp"
#include "spectrunc/torus.hpp"
#include "spectrunc/truncation.hpp"

namespace spectrunc::io {

namespace fs = std::filesystem;
using nlohmann::json;

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

inline json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// Splits a CSV body (header skipped) into rows of doubles.
inline std::vector<std::vector<double>> parse_csv_rows(const std::string& text, std::size_t columns,
                                                       const std::string& what) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  if (!std::getline(in, line)) throw ConfigError(what + ": empty file");
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(what + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != columns) throw ConfigError(what + ": expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------

inline std::string to_csv(const SampledFunction& f) {
  std::string s = "z,re,im\n";
  for (std::size_t p = 0; p < f.size(); ++p)
    s += fmt17(f.grid().point(p)) + ',' + fmt17(f[p].real()) + ',' + fmt17(f[p].imag()) + '\n';
  return s;
}

inline SampledFunction sampled_function_from_csv(const std::string& text, const std::string& what = "csv") {
  const auto rows = parse_csv_rows(text, 3, what);
  if (rows.size() < 2) throw ConfigError(what + ": need at least 2 grid points");
  const TorusGrid grid(rows.size());
  std::vector<cplx> v(rows.size());
  for (std::size_t p = 0; p < rows.size(); ++p) {
    if (std::abs(rows[p][0] - grid.point(p)) > 1e-9)
      throw ConfigError(what + ": row " + std::to_string(p) + " is not on the uniform grid");
    v[p] = {rows[p][1], rows[p][2]};
  }
  return SampledFunction(grid, std::move(v));
}

inline void save(const fs::path& path, const SampledFunction& f) { write_text(path, to_csv(f)); }

inline SampledFunction load_function(const fs::path& path) {
  return sampled_function_from_csv(read_text(path), path.string());
}

inline std::string to_csv(const ToeplitzRep& t) {
  std::string s = "k,re,im\n";
  const long n = static_cast<long>(t.n());
  for (long k = -(n - 1); k <= n - 1; ++k)
    s += std::to_string(k) + ',' + fmt17(t.coeff(k).real()) + ',' + fmt17(t.coeff(k).imag()) + '\n';
  return s;
}

inline ToeplitzRep toeplitz_from_csv(const std::string& text) {
  const auto rows = parse_csv_rows(text, 3, "toeplitz csv");
  if (rows.size() % 2 == 0) throw ConfigError("toeplitz csv: need 2n-1 rows");
  const std::size_t n = (rows.size() + 1) / 2;
  std::vector<cplx> c(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<long>(rows[i][0]) != static_cast<long>(i) - static_cast<long>(n - 1))
      throw ConfigError("toeplitz csv: k column out of order");
    c[i] = {rows[i][1], rows[i][2]};
  }
  return ToeplitzRep(n, std::move(c));
}

// ---------------------------------------------------------------------------

/// Writes <stem>_c<i>.csv per component plus <stem>.json; returns the manifest path.
inline fs::path save_tuple(const fs::path& dir, const std::string& stem, const FunctionTuple& x) {
  fs::create_directories(dir);
  json manifest{{"d", x.dim()}, {"m", x.grid().size()}, {"components", json::array()}};
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const std::string name = stem + "_c" + std::to_string(i) + ".csv";
    save(dir / name, x[i]);
    manifest["components"].push_back(name);
  }
  const fs::path mpath = dir / (stem + ".json");
  write_text(mpath, manifest.dump(2) + "\n");
  return mpath;
}

inline FunctionTuple load_tuple(const fs::path& manifest_path) {
  const json j = read_json(manifest_path);
  const fs::path base = manifest_path.parent_path();
  std::vector<SampledFunction> comps;
  try {
    for (const auto& name : j.at("components")) comps.push_back(load_function(base / name.get<std::string>()));
    if (comps.size() != j.at("d").get<std::size_t>()) throw ConfigError(manifest_path.string() + ": d mismatch");
    if (comps.front().size() != j.at("m").get<std::size_t>()) throw ConfigError(manifest_path.string() + ": m mismatch");
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path.string() + ": " + e.what());
  }
  return FunctionTuple(std::move(comps));
}

struct Dataset {
  std::vector<FunctionTuple> inputs;
  std::vector<SampledFunction> outputs;  // may be empty
};

inline void save_dataset(const fs::path& dir, const Dataset& ds) {
  fs::create_directories(dir);
  json manifest{{"N", ds.inputs.size()},
                {"d", ds.inputs.empty() ? 0 : ds.inputs.front().dim()},
                {"m", ds.inputs.empty() ? 0 : ds.inputs.front().grid().size()},
                {"inputs", json::array()},
                {"outputs", json::array()}};
  char stem[32];
  for (std::size_t i = 0; i < ds.inputs.size(); ++i) {
    std::snprintf(stem, sizeof stem, "x_%05zu", i);
    save_tuple(dir, stem, ds.inputs[i]);
    manifest["inputs"].push_back(std::string(stem) + ".json");
  }
  for (std::size_t i = 0; i < ds.outputs.size(); ++i) {
    std::snprintf(stem, sizeof stem, "y_%05zu.csv", i);
    save(dir / stem, ds.outputs[i]);
    manifest["outputs"].push_back(std::string(stem));
  }
  write_text(dir / "dataset.json", manifest.dump(2) + "\n");
}

inline Dataset load_dataset(const fs::path& dir_or_manifest) {
  const fs::path manifest = fs::is_directory(dir_or_manifest) ? dir_or_manifest / "dataset.json" : dir_or_manifest;
  const json j = read_json(manifest);
  const fs::path base = manifest.parent_path();
  Dataset ds;
  try {
    for (const auto& name : j.at("inputs")) ds.inputs.push_back(load_tuple(base / name.get<std::string>()));
    if (j.contains("outputs"))
      for (const auto& name : j.at("outputs")) ds.outputs.push_back(load_function(base / name.get<std::string>()));
  } catch (const json::exception& e) {
    throw ConfigError(manifest.string() + ": " + e.what());
  }
  if (!ds.outputs.empty() && ds.outputs.size() != ds.inputs.size())
    throw ConfigError(manifest.string() + ": inputs and outputs differ in count");
  return ds;
}

// ---------------------------------------------------------------------------
// KernelSpec <-> JSON

inline json to_json(const BaseScalarKernel& k) {
  switch (k.kind) {
    case BaseScalarKernel::Kind::gaussian: return {{"kind", "gaussian"}, {"gamma", k.gamma}};
    case BaseScalarKernel::Kind::linear: return {{"kind", "linear"}};
    case BaseScalarKernel::Kind::polynomial:
      return {{"kind", "polynomial"}, {"degree", k.degree}, {"offset", k.offset}};
  }
  return {};
}

inline BaseScalarKernel base_kernel_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") {
    const double g = j.value("gamma", 1.0);
    if (!(g > 0.0)) throw ConfigError("gaussian base kernel needs gamma > 0");
    return BaseScalarKernel::gaussian(g);
  }
  if (kind == "linear") return BaseScalarKernel::linear();
  if (kind == "polynomial") return BaseScalarKernel::polynomial(j.value("degree", 1u), j.value("offset", 0.0));
  throw ConfigError("unknown base kernel kind '" + kind + "'");
}

inline json to_json(const WeightFunction& w) {
  switch (w.kind) {
    case WeightFunction::Kind::expression: return {{"expr", w.expression}};
    case WeightFunction::Kind::coefficients: {
      json c = json::array();
      for (const auto& [k, v] : w.coefficients) c.push_back({k, v.real(), v.imag()});
      return {{"coeffs", c}};
    }
    case WeightFunction::Kind::samples: {
      // Samples are embedded so the spec stays loadable away from the csv.
      json s = json::array();
      for (const auto& v : w.samples->values()) s.push_back({v.real(), v.imag()});
      json out{{"samples", s}};
      if (!w.source.empty()) out["csv"] = w.source;
      return out;
    }
  }
  return {};
}

inline WeightFunction weight_from_json(const json& j, const fs::path& base) {
  if (j.contains("expr")) return WeightFunction::named(j.at("expr").get<std::string>());
  if (j.contains("coeffs")) {
    std::vector<std::pair<long, cplx>> c;
    for (const auto& row : j.at("coeffs"))
      c.emplace_back(row.at(0).get<long>(), cplx(row.at(1).get<double>(), row.at(2).get<double>()));
    return WeightFunction::trig(std::move(c));
  }
  if (j.contains("samples")) {
    std::vector<cplx> v;
    for (const auto& row : j.at("samples")) v.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    if (v.size() < 2) throw ConfigError("weight samples need at least 2 values");
    const TorusGrid grid(v.size());
    return WeightFunction::sampled(SampledFunction(grid, std::move(v)), j.value("csv", std::string()));
  }
  if (j.contains("csv")) {
    const std::string src = j.at("csv").get<std::string>();
    return WeightFunction::sampled(load_function(base / src), src);
  }
  throw ConfigError("weight function needs one of expr, coeffs, csv, samples");
}

inline json to_json(const KernelSpec& s) {
  json j{{"family", to_string(s.family)},
         {"n", s.n ? json(*s.n) : json("inf")},
         {"q", s.q},
         {"spectrum", to_string(s.spectrum)}};
  switch (s.family) {
    case Family::poly: j["poly"] = {{"alpha", s.alpha}}; break;
    case Family::prod: {
      json k1 = json::array(), k2 = json::array();
      for (const auto& k : s.k1) k1.push_back(to_json(k));
      for (const auto& k : s.k2) k2.push_back(to_json(k));
      j["prod"] = {{"k1", k1},
                   {"k2", k2},
                   {"beta",
                    {{"policy", to_string(s.beta.kind)},
                     {"value", s.beta.value},
                     {"grid_density", s.beta.grid_density},
                     {"seed", s.beta.seed},
                     {"margin", s.beta.margin}}}};
      break;
    }
    case Family::sep: {
      json a = json::array();
      for (const auto& w : s.a) a.push_back(to_json(w));
      j["sep"] = {{"gamma", s.sep_gamma}, {"a", a}};
      break;
    }
  }
  return j;
}

inline KernelSpec kernel_spec_from_json(const json& j, const fs::path& base = {}) {
  KernelSpec s;
  try {
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "poly") s.family = Family::poly;
    else if (fam == "prod") s.family = Family::prod;
    else if (fam == "sep") s.family = Family::sep;
    else throw ConfigError("unknown kernel family '" + fam + "'");

    const json& n = j.at("n");
    if (n.is_string()) {
      if (n.get<std::string>() != "inf") throw ConfigError("kernel n must be a positive integer or \"inf\"");
      s.n.reset();
    } else {
      const long nv = n.get<long>();
      if (nv < 1) throw ConfigError("kernel n must be >= 1");
      s.n = static_cast<std::size_t>(nv);
    }
    const long q = j.value("q", 1L);
    if (q < 1) throw ConfigError("kernel q must be >= 1");
    s.q = static_cast<std::size_t>(q);
    const std::string spectrum = j.value("spectrum", std::string("strict"));
    if (spectrum == "strict") s.spectrum = Spectrum::strict;
    else if (spectrum == "bandlimited") s.spectrum = Spectrum::bandlimited;
    else throw ConfigError("unknown spectrum mode '" + spectrum + "'");

    switch (s.family) {
      case Family::poly:
        s.alpha = j.at("poly").at("alpha").get<std::vector<double>>();
        break;
      case Family::prod: {
        const json& p = j.at("prod");
        s.k1.clear();
        s.k2.clear();
        for (const auto& k : p.at("k1")) s.k1.push_back(base_kernel_from_json(k));
        for (const auto& k : p.at("k2")) s.k2.push_back(base_kernel_from_json(k));
        if (p.contains("beta")) {
          const json& b = p.at("beta");
          const std::string policy = b.value("policy", std::string("manual"));
          if (policy == "manual") s.beta = BetaPolicy::manual(b.value("value", 0.0));
          else if (policy == "min_estimate") s.beta = BetaPolicy::from_minimum();
          else if (policy == "bound") s.beta = BetaPolicy::from_bound();
          else throw ConfigError("unknown beta policy '" + policy + "'");
          s.beta.grid_density = b.value("grid_density", std::size_t{0});
          s.beta.seed = b.value("seed", std::uint64_t{0x5eed});
          s.beta.margin = b.value("margin", 1e-6);
          if (s.beta.value < 0.0) throw ConfigError("beta must be >= 0");
        }
        break;
      }
      case Family::sep: {
        const json& p = j.at("sep");
        s.sep_gamma = p.value("gamma", 1.0);
        s.a.clear();
        for (const auto& w : p.at("a")) s.a.push_back(weight_from_json(w, base));
        break;
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("kernel spec: ") + e.what());
  }
  return s;
}

inline KernelSpec load_kernel_spec(const fs::path& path) {
  return kernel_spec_from_json(read_json(path), path.parent_path());
}

// ---------------------------------------------------------------------------

inline void save_model(const fs::path& dir, const RidgeModel& model) {
  fs::create_directories(dir);
  save_dataset(dir / "train", Dataset{model.inputs, {}});
  json coeffs = json::array();
  char name[32];
  for (std::size_t j = 0; j < model.coefficients.size(); ++j) {
    std::snprintf(name, sizeof name, "c_%05zu.csv", j);
    save(dir / name, model.coefficients[j]);
    coeffs.push_back(name);
  }
  json warnings = json::array();
  for (const auto& w : model.warnings)
    warnings.push_back({{"point", w.point}, {"min_eigenvalue", w.min_eigenvalue}, {"message", w.message}});
  const json manifest{{"kernel", to_json(model.kernel)},
                      {"lambda", model.lambda},
                      {"N", model.inputs.size()},
                      {"m", model.grid().size()},
                      {"train", "train/dataset.json"},
                      {"coefficients", coeffs},
                      {"warnings", warnings}};
  write_text(dir / "model.json", manifest.dump(2) + "\n");
}

inline RidgeModel load_model(const fs::path& dir) {
  const json j = read_json(dir / "model.json");
  RidgeModel model;
  try {
    model.kernel = kernel_spec_from_json(j.at("kernel"), dir);
    model.lambda = j.at("lambda").get<double>();
    model.inputs = load_dataset(dir / j.at("train").get<std::string>()).inputs;
    for (const auto& name : j.at("coefficients")) model.coefficients.push_back(load_function(dir / name.get<std::string>()));
  } catch (const json::exception& e) {
    throw ConfigError("model.json: " + std::string(e.what()));
  }
  if (model.coefficients.size() != model.inputs.size() || model.inputs.empty())
    throw ConfigError("model.json: coefficient count does not match training inputs");
  return model;
}

}  // namespace spectrunc::io
