// Command-line front end. Exit codes: 0 success, 2 configuration error,
// 3 numerical failure, 1 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spectrunc/spectrunc.hpp"

namespace fs = std::filesystem;
using namespace spectrunc;
using io::json;

namespace {

json load_config(const std::string& path) { return path.empty() ? json::object() : io::read_json(path); }

fs::path config_dir(const std::string& path) { return path.empty() ? fs::path{} : fs::path(path).parent_path(); }

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    io::write_text(out, text);
}

std::vector<std::size_t> parse_n_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      const long v = std::stol(tok);
      if (v < 1) throw ConfigError("n values must be >= 1");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw ConfigError("bad n value '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty n list");
  return out;
}

char name_buf[64];
const char* indexed(const char* pattern, std::size_t i) {
  std::snprintf(name_buf, sizeof name_buf, pattern, i);
  return name_buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-truncation kernels for function-valued regression"};
  app.require_subcommand(1);

  std::string config, out, kernel_path, data_path, model_path, x_path, y_path, n_list = "8,16,32,64,128,256";
  std::size_t n = 8, q = 1, density = 0, run = 0;
  std::uint64_t seed = 0x5eed;
  double lambda = 0.01, B = 1.0, L = 1.0, delta = 0.05;
  std::vector<double> ts;
  bool oracle = false;

  auto* gen = app.add_subcommand("gen-synth", "Generate one run of the synthetic train/test data");
  gen->add_option("--config", config, "JSON config");
  gen->add_option("--run", run, "Run index");
  gen->add_option("--out", out, "Output directory")->required();

  auto* rs = app.add_subcommand("run-synth", "Synthetic regression sweep over kernels and runs");
  rs->add_option("--config", config, "JSON config");
  rs->add_option("--out", out, "Output directory")->required();

  auto* eig = app.add_subcommand("eigen-study", "Eigenvalues of the Gram matrix at one grid point across runs");
  eig->add_option("--config", config, "JSON config");
  eig->add_option("--out", out, "Output CSV (default stdout)");

  auto* inp = app.add_subcommand("inpaint", "Image inpainting sweep over n");
  inp->add_option("--config", config, "JSON config");
  inp->add_option("--out", out, "Output directory")->required();

  auto* fej = app.add_subcommand("fejer", "Evaluate the multidimensional Fejer kernel at one point");
  fej->add_option("--n", n)->required();
  fej->add_option("--q", q)->required();
  fej->add_option("--t", ts, "2q coordinates")->required()->delimiter(',');
  fej->add_flag("--oracle", oracle, "Also evaluate by lattice enumeration (n <= 8, q <= 2)");

  auto* fmin = app.add_subcommand("fejer-min", "Estimate the minimum of the Fejer kernel and the induced beta");
  fmin->add_option("--n", n)->required();
  fmin->add_option("--q", q)->required();
  fmin->add_option("--density", density, "Grid density (0 = max(64, 8n))");
  fmin->add_option("--seed", seed);

  auto* conv = app.add_subcommand("converge", "Gap between k_n and its n = inf limit on one pair of inputs");
  conv->add_option("--kernel", kernel_path, "Kernel spec JSON (its n is ignored)")->required();
  conv->add_option("--x", x_path, "Tuple manifest")->required();
  conv->add_option("--y", y_path, "Tuple manifest")->required();
  conv->add_option("--n-list", n_list, "Comma-separated n values");
  conv->add_option("--out", out, "Output CSV (default stdout)");

  auto* cx = app.add_subcommand("complexity", "Complexity terms D(k_n, x) over a dataset");
  cx->add_option("--kernel", kernel_path)->required();
  cx->add_option("--data", data_path)->required();
  cx->add_option("--B", B);
  cx->add_option("--L", L);
  cx->add_option("--delta", delta);
  cx->add_option("--out", out, "Output JSON (default stdout)");

  auto* gram = app.add_subcommand("gram", "Assemble the Gram field and report its smallest eigenvalues");
  gram->add_option("--kernel", kernel_path)->required();
  gram->add_option("--data", data_path)->required();
  gram->add_option("--out", out, "Output CSV (default stdout)");

  auto* fitc = app.add_subcommand("fit", "Fit a kernel ridge regression model");
  fitc->add_option("--kernel", kernel_path)->required();
  fitc->add_option("--data", data_path, "Dataset with outputs")->required();
  fitc->add_option("--lambda", lambda);
  fitc->add_option("--out", out, "Model directory")->required();

  auto* pred = app.add_subcommand("predict", "Predict outputs for a dataset");
  pred->add_option("--model", model_path)->required();
  pred->add_option("--data", data_path)->required();
  pred->add_option("--out", out, "Output directory")->required();

  auto* ev = app.add_subcommand("eval", "Mean L2 test error of a model on a dataset");
  ev->add_option("--model", model_path)->required();
  ev->add_option("--data", data_path, "Dataset with outputs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const auto cfg = synthetic_config_from_json(load_config(config), config_dir(config));
      const auto d = gen_synthetic(cfg, run);
      io::save_dataset(fs::path(out) / "train", {d.train_x, d.train_y});
      io::save_dataset(fs::path(out) / "test", {d.test_x, d.test_y});
    } else if (*rs) {
      const auto cfg = synthetic_config_from_json(load_config(config), config_dir(config));
      const auto cells = run_synthetic(cfg, [](const SweepCell& c) {
        std::cerr << to_string(c.family) << " n=" << n_label(c.n) << " run=" << c.run;
        if (c.error.empty())
          std::cerr << " test_error=" << c.test_error << "\n";
        else
          std::cerr << " FAILED: " << c.error << "\n";
      });
      io::write_text(fs::path(out) / "results.csv", cells_csv(cells));
      io::write_text(fs::path(out) / "summary.csv", summary_csv(summarize(cells)));
    } else if (*eig) {
      const auto cfg = eigen_config_from_json(load_config(config), config_dir(config));
      emit(out, eigen_csv(run_eigen_study(cfg)));
    } else if (*inp) {
      const auto cfg = inpaint_config_from_json(load_config(config), config_dir(config));
      const auto res = run_inpaint(cfg, [](const InpaintRow& r) {
        std::cerr << "n=" << n_label(r.n);
        if (r.error.empty())
          std::cerr << " test_error=" << r.test_error << "\n";
        else
          std::cerr << " FAILED: " << r.error << "\n";
      });
      const fs::path dir(out);
      io::write_text(dir / "errors.csv", inpaint_csv(res));
      for (std::size_t i = 0; i < res.originals.size(); ++i) {
        write_pgm(dir / indexed("original_%02zu.pgm", i), res.originals[i]);
        write_pgm(dir / indexed("masked_%02zu.pgm", i), res.masked[i]);
      }
      for (const auto& row : res.rows)
        for (std::size_t i = 0; i < row.recovered.size(); ++i)
          write_pgm(dir / ("recovered_n" + n_label(row.n) + indexed("_%02zu.pgm", i)), row.recovered[i]);
    } else if (*fej) {
      if (ts.size() != 2 * q) throw ConfigError("--t needs 2q = " + std::to_string(2 * q) + " values");
      json j{{"n", n}, {"q", q}, {"t", ts}, {"value", fejer_multi(n, ts)}, {"peak", fejer_peak(n, q)}};
      if (oracle) j["oracle"] = fejer_multi_oracle(n, q, ts);
      std::cout << j.dump(2) << "\n";
    } else if (*fmin) {
      const auto est = fejer_min_estimate(n, q, density ? density : std::max<std::size_t>(64, 8 * n), seed);
      BetaPolicy policy = BetaPolicy::from_minimum();
      policy.grid_density = density;
      policy.seed = seed;
      const json j{{"n", n}, {"q", q}, {"min", est.value}, {"argmin", est.argmin}, {"beta", policy.resolve(n, q)}};
      std::cout << j.dump(2) << "\n";
    } else if (*conv) {
      const auto spec = io::load_kernel_spec(kernel_path);
      const auto rows = convergence_report({spec}, io::load_tuple(x_path), io::load_tuple(y_path), parse_n_list(n_list));
      emit(out, convergence_csv(rows));
    } else if (*cx) {
      const auto spec = io::load_kernel_spec(kernel_path);
      const auto ds = io::load_dataset(data_path);
      const auto r = complexity_report(spec, ds.inputs, B, L, delta);
      json j{{"family", to_string(r.family)},
             {"n", r.n},
             {"B", r.B},
             {"L", r.L},
             {"delta", r.delta},
             {"d_values", r.d_values},
             {"second_term", r.second_term},
             {"complex_valued", r.complex_valued}};
      for (const auto& w : check_beta_monotone(spec, {r.n, r.n + 1})) std::cerr << "warning: " << w << "\n";
      emit(out, j.dump(2) + "\n");
    } else if (*gram) {
      const auto spec = io::load_kernel_spec(kernel_path);
      const auto ds = io::load_dataset(data_path);
      const auto g = assemble_gram(spec, ds.inputs);
      const auto pd = check_pd(g);
      std::string csv = "p,min_eigenvalue\n";
      for (std::size_t p = 0; p < pd.min_eigenvalue.size(); ++p)
        csv += std::to_string(p) + ',' + io::fmt17(pd.min_eigenvalue[p]) + '\n';
      emit(out, csv);
      std::cerr << "evaluations=" << g.evaluations << " min_eigenvalue=" << pd.global_min << " at p=" << pd.argmin
                << " hermitian_defect=" << g.max_hermitian_defect() << "\n";
    } else if (*fitc) {
      const auto spec = io::load_kernel_spec(kernel_path);
      const auto ds = io::load_dataset(data_path);
      if (ds.outputs.empty()) throw ConfigError("fit: dataset has no outputs");
      io::save_model(out, fit(spec, ds.inputs, ds.outputs, lambda));
    } else if (*pred) {
      const auto model = io::load_model(model_path);
      const auto ds = io::load_dataset(data_path);
      const auto ys = Predictor(model)(ds.inputs);
      for (std::size_t i = 0; i < ys.size(); ++i) io::save(fs::path(out) / indexed("pred_%05zu.csv", i), ys[i]);
    } else if (*ev) {
      const auto model = io::load_model(model_path);
      const auto ds = io::load_dataset(data_path);
      if (ds.outputs.empty()) throw ConfigError("eval: dataset has no outputs");
      std::cout << json{{"test_error", test_error(model, ds.inputs, ds.outputs)}, {"N", ds.inputs.size()}}.dump(2)
                << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::logic_error& e) {
    // AliasingError, GridMismatch and argument checks all come from bad inputs.
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
