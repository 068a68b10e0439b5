#pragma once

// Experiment runners: synthetic regression sweep, Gram eigenvalue study and
// image inpainting. Everything is a deterministic function of its config.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spectrunc/error.hpp"
#include "spectrunc/io.hpp"
#include "spectrunc/kernels.hpp"
#include "spectrunc/regression.hpp"
#include "spectrunc/torus.hpp"

namespace spectrunc {

// ---------------------------------------------------------------------------
// Counter-based noise: every value is a pure function of its key, so a sample
// does not depend on how many others were drawn before it.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct NoiseKey {
  std::uint64_t seed = 0;
  std::uint64_t run = 0;
  std::uint64_t stream = 0;  // data split or image set
  std::uint64_t sample = 0;
  std::uint64_t point = 0;
  std::uint64_t channel = 0;
};

inline std::uint64_t hash_key(const NoiseKey& k, std::uint64_t salt = 0) {
  std::uint64_t h = splitmix64(k.seed);
  for (std::uint64_t v : {k.run, k.stream, k.sample, k.point, k.channel, salt}) h = splitmix64(h ^ v);
  return h;
}

/// Uniform in (0, 1).
inline double uniform01(const NoiseKey& k, std::uint64_t salt = 0) {
  return (static_cast<double>(hash_key(k, salt) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal by Box-Muller on two keyed uniforms.
inline double standard_normal(const NoiseKey& k) {
  const double u1 = uniform01(k, 1);
  const double u2 = uniform01(k, 2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// ---------------------------------------------------------------------------
// Synthetic regression

enum class Split : std::uint64_t { train = 0, test = 1 };

inline std::vector<std::optional<std::size_t>> default_n_sweep() {
  return {8, 16, 32, 64, 128, std::nullopt};
}

/// The three kernels of the synthetic study at truncation n.
inline KernelSpec synthetic_kernel(Family family, std::optional<std::size_t> n, double delta,
                                   Spectrum spectrum) {
  KernelSpec s;
  s.family = family;
  s.n = n;
  s.spectrum = spectrum;
  switch (family) {
    case Family::poly:
      s.q = 1;
      s.alpha = {1.0, 1.0};
      break;
    case Family::prod:
      s.q = 1;
      s.k1 = {BaseScalarKernel::gaussian(1.0)};
      s.k2 = {BaseScalarKernel::gaussian(1.0)};
      s.beta = BetaPolicy::manual(n ? 1.0 : 0.0);
      break;
    case Family::sep:
      s.q = 2;
      s.sep_gamma = 0.1 / (delta * delta);
      s.a = {WeightFunction::named("exp_sin"), WeightFunction::named("exp_sin")};
      break;
  }
  return s;
}

struct SyntheticConfig {
  std::size_t N = 200;
  std::size_t N_test = 200;
  std::size_t m = 30;
  std::uint64_t seed = 20240601;
  double input_noise = 0.01;
  double output_noise = 0.001;
  double delta = kTwoPi / 30.0;
  double lambda = 0.01;
  std::size_t runs = 5;
  std::vector<KernelSpec> kernels;

  /// Sweep of all three families over n, in bandlimited mode so that n may
  /// exceed m/2 on the coarse grid.
  static std::vector<KernelSpec> default_kernels(double delta,
                                                 const std::vector<Family>& families = {Family::poly, Family::prod, Family::sep},
                                                 const std::vector<std::optional<std::size_t>>& ns = default_n_sweep(),
                                                 Spectrum spectrum = Spectrum::bandlimited) {
    std::vector<KernelSpec> out;
    for (Family f : families)
      for (const auto& n : ns) out.push_back(synthetic_kernel(f, n, delta, spectrum));
    return out;
  }
};

struct SyntheticData {
  std::vector<FunctionTuple> train_x, test_x;
  std::vector<SampledFunction> train_y, test_y;
};

/// f(x)(z) = 3 sin(cos(int_{z-D}^{z+D} x_1 + int_{z-D}^{z+D} x_2)).
inline SampledFunction synthetic_target(const FunctionTuple& x, double delta) {
  SampledFunction out(x.grid());
  for (std::size_t p = 0; p < out.size(); ++p) {
    cplx w{0.0, 0.0};
    for (const auto& c : x.components()) w += window_integral(c, x.grid().point(p), delta);
    out[p] = 3.0 * std::sin(std::cos(w));
  }
  return out;
}

/// x^i(z) = [sin(0.01 i z) + s xi, cos(0.01 i z) + s eta], i = 1..count.
inline std::vector<FunctionTuple> synthetic_inputs(const SyntheticConfig& cfg, std::size_t run, Split split,
                                                   std::size_t count) {
  const TorusGrid grid(cfg.m);
  std::vector<FunctionTuple> xs;
  xs.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double i = static_cast<double>(s + 1);
    SampledFunction x1(grid), x2(grid);
    for (std::size_t p = 0; p < cfg.m; ++p) {
      const double z = grid.point(p);
      NoiseKey k{cfg.seed, run, static_cast<std::uint64_t>(split), s, p, 0};
      const double xi = cfg.input_noise == 0.0 ? 0.0 : standard_normal(k);
      k.channel = 1;
      const double eta = cfg.input_noise == 0.0 ? 0.0 : standard_normal(k);
      x1[p] = std::sin(0.01 * i * z) + cfg.input_noise * xi;
      x2[p] = std::cos(0.01 * i * z) + cfg.input_noise * eta;
    }
    xs.emplace_back(std::vector<SampledFunction>{std::move(x1), std::move(x2)});
  }
  return xs;
}

inline std::vector<SampledFunction> synthetic_outputs(const SyntheticConfig& cfg, std::size_t run, Split split,
                                                      const std::vector<FunctionTuple>& xs) {
  std::vector<SampledFunction> ys;
  ys.reserve(xs.size());
  for (std::size_t s = 0; s < xs.size(); ++s) {
    SampledFunction y = synthetic_target(xs[s], cfg.delta);
    if (cfg.output_noise != 0.0)
      for (std::size_t p = 0; p < y.size(); ++p)
        y[p] += cfg.output_noise * standard_normal({cfg.seed, run, static_cast<std::uint64_t>(split), s, p, 2});
    ys.push_back(std::move(y));
  }
  return ys;
}

inline SyntheticData gen_synthetic(const SyntheticConfig& cfg, std::size_t run) {
  if (cfg.N == 0) throw ConfigError("synthetic: N must be positive");
  if (cfg.m < 2) throw ConfigError("synthetic: m must be >= 2");
  if (!(cfg.delta > 0.0 && cfg.delta < std::numbers::pi)) throw ConfigError("synthetic: need 0 < delta < pi");
  SyntheticData d;
  d.train_x = synthetic_inputs(cfg, run, Split::train, cfg.N);
  d.train_y = synthetic_outputs(cfg, run, Split::train, d.train_x);
  d.test_x = synthetic_inputs(cfg, run, Split::test, cfg.N_test);
  d.test_y = synthetic_outputs(cfg, run, Split::test, d.test_x);
  return d;
}

// ---------------------------------------------------------------------------

inline std::string n_label(const std::optional<std::size_t>& n) { return n ? std::to_string(*n) : "inf"; }

struct SweepCell {
  Family family;
  std::optional<std::size_t> n;
  std::size_t run;
  double test_error = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty when the fit succeeded
};

struct SummaryRow {
  Family family;
  std::optional<std::size_t> n;
  std::size_t count;
  double median, q1, q3;
};

/// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& v, double prob) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = prob * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Per (family, n) summary in first-appearance order; failed cells are skipped.
inline std::vector<SummaryRow> summarize(const std::vector<SweepCell>& cells) {
  std::vector<SummaryRow> out;
  std::vector<std::vector<double>> vals;
  for (const auto& c : cells) {
    std::size_t idx = 0;
    while (idx < out.size() && !(out[idx].family == c.family && out[idx].n == c.n)) ++idx;
    if (idx == out.size()) {
      out.push_back({c.family, c.n, 0, 0, 0, 0});
      vals.emplace_back();
    }
    if (c.error.empty() && std::isfinite(c.test_error)) vals[idx].push_back(c.test_error);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::sort(vals[i].begin(), vals[i].end());
    out[i].count = vals[i].size();
    out[i].median = quantile_sorted(vals[i], 0.5);
    out[i].q1 = quantile_sorted(vals[i], 0.25);
    out[i].q3 = quantile_sorted(vals[i], 0.75);
  }
  return out;
}

inline std::string cells_csv(const std::vector<SweepCell>& cells) {
  std::string s = "family,n,run,test_error\n";
  for (const auto& c : cells)
    s += std::string(to_string(c.family)) + ',' + n_label(c.n) + ',' + std::to_string(c.run) + ',' +
         io::fmt17(c.test_error) + '\n';
  return s;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string s = "family,n,count,median,q1,q3\n";
  for (const auto& r : rows)
    s += std::string(to_string(r.family)) + ',' + n_label(r.n) + ',' + std::to_string(r.count) + ',' +
         io::fmt17(r.median) + ',' + io::fmt17(r.q1) + ',' + io::fmt17(r.q3) + '\n';
  return s;
}

using CellCallback = std::function<void(const SweepCell&)>;

/// Cells run one after another; each fit already spreads its per-pair and
/// per-point work over the thread budget. Output order is kernel-major.
inline std::vector<SweepCell> run_synthetic(const SyntheticConfig& cfg, const CellCallback& progress = {}) {
  if (cfg.runs == 0) throw ConfigError("synthetic: runs must be positive");
  const auto kernels = cfg.kernels.empty() ? SyntheticConfig::default_kernels(cfg.delta) : cfg.kernels;
  std::vector<SyntheticData> data;
  for (std::size_t r = 0; r < cfg.runs; ++r) data.push_back(gen_synthetic(cfg, r));

  std::vector<SweepCell> cells;
  for (const auto& spec : kernels)
    for (std::size_t r = 0; r < cfg.runs; ++r) {
      SweepCell cell{spec.family, spec.n, r, std::numeric_limits<double>::quiet_NaN(), {}};
      try {
        const auto model = fit(spec, data[r].train_x, data[r].train_y, cfg.lambda, {1e-8, false});
        cell.test_error = test_error(model, data[r].test_x, data[r].test_y);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      if (progress) progress(cell);
      cells.push_back(std::move(cell));
    }
  return cells;
}

// ---------------------------------------------------------------------------
// Eigenvalues of G(z_p) across runs

struct EigenStudyConfig {
  SyntheticConfig data;
  std::vector<KernelSpec> kernels;
  std::size_t point = 0;
};

struct EigenRow {
  Family family;
  std::optional<std::size_t> n;
  double beta;
  std::size_t index;  // descending order
  double mean, stddev, min;
};

inline std::vector<EigenRow> run_eigen_study(const EigenStudyConfig& cfg) {
  if (cfg.data.runs == 0) throw ConfigError("eigen study: runs must be positive");
  if (cfg.point >= cfg.data.m) throw ConfigError("eigen study: grid point out of range");
  std::vector<std::vector<FunctionTuple>> inputs;
  for (std::size_t r = 0; r < cfg.data.runs; ++r)
    inputs.push_back(synthetic_inputs(cfg.data, r, Split::train, cfg.data.N));

  std::vector<EigenRow> rows;
  for (const auto& spec : cfg.kernels) {
    const KernelEvaluator kernel(spec, TorusGrid(cfg.data.m));
    std::vector<std::vector<double>> ev;
    for (const auto& xs : inputs) {
      auto e = hermitian_eigenvalues(assemble_gram(kernel, xs).matrices[cfg.point]);
      std::sort(e.begin(), e.end(), std::greater<>());
      ev.push_back(std::move(e));
    }
    const std::size_t N = ev.front().size();
    const double R = static_cast<double>(ev.size());
    for (std::size_t i = 0; i < N; ++i) {
      double mean = 0.0, mn = std::numeric_limits<double>::infinity();
      for (const auto& e : ev) {
        mean += e[i];
        mn = std::min(mn, e[i]);
      }
      mean /= R;
      double var = 0.0;
      for (const auto& e : ev) var += (e[i] - mean) * (e[i] - mean);
      rows.push_back({spec.family, spec.n, kernel.beta(), i, mean, std::sqrt(var / R), mn});
    }
  }
  return rows;
}

inline std::string eigen_csv(const std::vector<EigenRow>& rows) {
  std::string s = "family,n,beta,index,mean,std,min\n";
  for (const auto& r : rows)
    s += std::string(to_string(r.family)) + ',' + n_label(r.n) + ',' + io::fmt17(r.beta) + ',' +
         std::to_string(r.index) + ',' + io::fmt17(r.mean) + ',' + io::fmt17(r.stddev) + ',' + io::fmt17(r.min) + '\n';
  return s;
}

// ---------------------------------------------------------------------------
// Grayscale images

struct Image {
  std::size_t height = 0, width = 0;
  std::vector<double> pixels;  // row-major, in [0, 1]

  double& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }
  double at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
};

/// Reads binary (P5) or ASCII (P2) portable graymaps, scaling to [0, 1].
inline Image read_pgm(const std::filesystem::path& path) {
  const std::string data = io::read_text(path);
  std::size_t pos = 0;
  const auto token = [&]() {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (start == pos) throw ConfigError(path.string() + ": truncated PGM header");
    return data.substr(start, pos - start);
  };
  const std::string magic = token();
  if (magic != "P5" && magic != "P2") throw ConfigError(path.string() + ": not a PGM file");
  Image img;
  double maxval = 0.0;
  try {
    img.width = std::stoul(token());
    img.height = std::stoul(token());
    maxval = std::stod(token());
  } catch (const std::exception&) {
    throw ConfigError(path.string() + ": bad PGM header");
  }
  if (img.width == 0 || img.height == 0 || !(maxval > 0.0) || maxval > 65535.0)
    throw ConfigError(path.string() + ": bad PGM header");
  const std::size_t count = img.width * img.height;
  img.pixels.resize(count);
  if (magic == "P5") {
    ++pos;  // single whitespace after maxval
    const std::size_t bytes = maxval < 256.0 ? 1 : 2;
    if (data.size() < pos + count * bytes) throw ConfigError(path.string() + ": truncated PGM data");
    for (std::size_t i = 0; i < count; ++i) {
      unsigned v = static_cast<unsigned char>(data[pos + i * bytes]);
      if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(data[pos + i * bytes + 1]);
      img.pixels[i] = static_cast<double>(v) / maxval;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        img.pixels[i] = std::stod(token()) / maxval;
      } catch (const std::invalid_argument&) {
        throw ConfigError(path.string() + ": bad PGM pixel");
      }
    }
  }
  return img;
}

/// 8-bit binary PGM; values are clamped to [0, 1].
inline std::string pgm_bytes(const Image& img) {
  std::string s = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  for (double v : img.pixels)
    s.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
  return s;
}

inline void write_pgm(const std::filesystem::path& path, const Image& img) { io::write_text(path, pgm_bytes(img)); }

/// One image per CSV line, H*W comma-separated values. Values are divided by
/// 255 when any exceeds 1.
inline std::vector<Image> read_flat_csv(const std::filesystem::path& path, std::size_t height, std::size_t width) {
  std::istringstream in(io::read_text(path));
  std::vector<Image> out;
  std::string line;
  bool byte_scale = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Image img{height, width, {}};
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        img.pixels.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ": bad value '" + cell + "'");
      }
      byte_scale = byte_scale || img.pixels.back() > 1.0;
    }
    if (img.pixels.size() != height * width)
      throw ConfigError(path.string() + ": row with " + std::to_string(img.pixels.size()) + " values, expected " +
                        std::to_string(height * width));
    out.push_back(std::move(img));
  }
  if (byte_scale)
    for (auto& img : out)
      for (auto& v : img.pixels) v /= 255.0;
  return out;
}

/// Smooth synthetic images: 1 to 3 gaussian blobs, rescaled to peak 1.
inline std::vector<Image> blob_images(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed,
                                      std::uint64_t stream = 0) {
  std::vector<Image> out;
  for (std::size_t i = 0; i < count; ++i) {
    NoiseKey key{seed, 0, 100 + stream, i, 0, 0};
    const std::size_t blobs = 1 + static_cast<std::size_t>(hash_key(key) % 3);
    Image img{height, width, std::vector<double>(height * width, 0.0)};
    for (std::size_t b = 0; b < blobs; ++b) {
      key.point = b;
      key.channel = 0;
      const double cy = uniform01(key) * double(height);
      key.channel = 1;
      const double cx = uniform01(key) * double(width);
      key.channel = 2;
      const double sigma = 2.0 + 4.0 * uniform01(key);
      key.channel = 3;
      const double amp = 0.5 + 0.5 * uniform01(key);
      for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
          const double dy = double(r) - cy, dx = double(c) - cx;
          img.at(r, c) += amp * std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
        }
    }
    const double peak = *std::max_element(img.pixels.begin(), img.pixels.end());
    if (peak > 0.0)
      for (auto& v : img.pixels) v /= peak;
    out.push_back(std::move(img));
  }
  return out;
}

struct Mask {
  std::size_t top = 0, left = 0, height = 0, width = 0;

  bool contains(std::size_t r, std::size_t c) const {
    return r >= top && r < top + height && c >= left && c < left + width;
  }

  static Mask centered(std::size_t img_h, std::size_t img_w, std::size_t h, std::size_t w) {
    if (h > img_h || w > img_w) throw ConfigError("mask larger than the image");
    return {(img_h - h) / 2, (img_w - w) / 2, h, w};
  }
};

inline Image apply_mask(Image img, const Mask& mask) {
  for (std::size_t r = 0; r < img.height; ++r)
    for (std::size_t c = 0; c < img.width; ++c)
      if (mask.contains(r, c)) img.at(r, c) = 0.0;
  return img;
}

/// Flattened pixel p sits at z_p = 2 pi p / (H W).
inline SampledFunction image_function(const Image& img) {
  const TorusGrid grid(img.pixels.size());
  return SampledFunction(grid, std::vector<cplx>(img.pixels.begin(), img.pixels.end()));
}

inline Image function_image(const SampledFunction& f, std::size_t height, std::size_t width) {
  if (f.size() != height * width) throw std::invalid_argument("function_image: size mismatch");
  Image img{height, width, std::vector<double>(f.size())};
  for (std::size_t p = 0; p < f.size(); ++p) img.pixels[p] = f[p].real();
  return img;
}

inline KernelSpec inpaint_kernel(std::optional<std::size_t> n, Spectrum spectrum = Spectrum::strict) {
  KernelSpec s;
  s.family = Family::prod;
  s.n = n;
  s.q = 1;
  s.spectrum = spectrum;
  s.k1 = {BaseScalarKernel::gaussian(0.1)};
  s.k2 = {BaseScalarKernel::gaussian(0.1)};
  s.beta = BetaPolicy::manual(n ? 0.01 : 0.0);
  return s;
}

struct InpaintConfig {
  std::size_t height = 28, width = 28;
  std::optional<Mask> mask;  // default: 8x8 centered
  std::size_t N_train = 50, N_test = 20;
  std::vector<std::optional<std::size_t>> n_list{30, 40, 50, 60, 70, 80, std::nullopt};
  KernelSpec kernel = inpaint_kernel(30);  // n is replaced by each sweep entry
  double lambda = 0.01;
  std::string source;  // directory of PGM images or one flat CSV; empty for synthetic blobs
  std::uint64_t seed = 7;
  std::size_t save_images = 4;

  Mask resolved_mask() const { return mask ? *mask : Mask::centered(height, width, 8, 8); }
};

/// N_train + N_test images from the configured source, in sorted file order.
inline std::vector<Image> load_inpaint_images(const InpaintConfig& cfg) {
  const std::size_t need = cfg.N_train + cfg.N_test;
  std::vector<Image> imgs;
  if (cfg.source.empty()) {
    imgs = blob_images(need, cfg.height, cfg.width, cfg.seed);
  } else {
    const std::filesystem::path src(cfg.source);
    if (std::filesystem::is_directory(src)) {
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::directory_iterator(src))
        if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (std::size_t i = 0; i < files.size() && imgs.size() < need; ++i) imgs.push_back(read_pgm(files[i]));
    } else {
      imgs = read_flat_csv(src, cfg.height, cfg.width);
      if (imgs.size() > need) imgs.resize(need);
    }
  }
  if (imgs.size() < need)
    throw ConfigError("inpaint: need " + std::to_string(need) + " images, found " + std::to_string(imgs.size()));
  for (const auto& img : imgs)
    if (img.height != cfg.height || img.width != cfg.width)
      throw ConfigError("inpaint: image of " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                        ", expected " + std::to_string(cfg.height) + "x" + std::to_string(cfg.width));
  return imgs;
}

struct InpaintRow {
  std::optional<std::size_t> n;
  double test_error = std::numeric_limits<double>::quiet_NaN();
  std::string error;
  std::vector<Image> recovered;  // first save_images test predictions
};

struct InpaintResult {
  std::vector<Image> originals, masked;  // first save_images test images
  std::vector<InpaintRow> rows;
};

inline InpaintResult run_inpaint(const InpaintConfig& cfg, const std::function<void(const InpaintRow&)>& progress = {}) {
  const Mask mask = cfg.resolved_mask();
  if (mask.top + mask.height > cfg.height || mask.left + mask.width > cfg.width)
    throw ConfigError("inpaint: mask outside the image");
  const auto imgs = load_inpaint_images(cfg);

  std::vector<FunctionTuple> train_x, test_x;
  std::vector<SampledFunction> train_y, test_y;
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    FunctionTuple x(std::vector<SampledFunction>{image_function(apply_mask(imgs[i], mask))});
    auto y = image_function(imgs[i]);
    if (i < cfg.N_train) {
      train_x.push_back(std::move(x));
      train_y.push_back(std::move(y));
    } else {
      test_x.push_back(std::move(x));
      test_y.push_back(std::move(y));
    }
  }

  InpaintResult res;
  const std::size_t keep = std::min(cfg.save_images, cfg.N_test);
  for (std::size_t i = 0; i < keep; ++i) {
    res.originals.push_back(imgs[cfg.N_train + i]);
    res.masked.push_back(apply_mask(imgs[cfg.N_train + i], mask));
  }
  for (const auto& n : cfg.n_list) {
    InpaintRow row{n, std::numeric_limits<double>::quiet_NaN(), {}, {}};
    KernelSpec spec = cfg.kernel.with_n(n);
    if (!n && spec.family == Family::prod) spec.beta = BetaPolicy::manual(0.0);
    try {
      const auto model = fit(spec, train_x, train_y, cfg.lambda, {1e-8, false});
      const auto pred = Predictor(model)(test_x);
      double err = 0.0;
      for (std::size_t i = 0; i < pred.size(); ++i) err += l2_distance(pred[i], test_y[i]);
      row.test_error = err / static_cast<double>(pred.size());
      for (std::size_t i = 0; i < keep; ++i) row.recovered.push_back(function_image(pred[i], cfg.height, cfg.width));
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    if (progress) progress(row);
    res.rows.push_back(std::move(row));
  }
  return res;
}

inline std::string inpaint_csv(const InpaintResult& res) {
  std::string s = "n,test_error\n";
  for (const auto& r : res.rows) s += n_label(r.n) + ',' + io::fmt17(r.test_error) + '\n';
  return s;
}

// ---------------------------------------------------------------------------
// JSON configs. Unknown keys are ignored; missing keys keep their defaults.

inline std::optional<std::size_t> n_from_json(const io::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "inf") throw ConfigError("n must be a positive integer or \"inf\"");
    return std::nullopt;
  }
  const long v = j.get<long>();
  if (v < 1) throw ConfigError("n must be >= 1");
  return static_cast<std::size_t>(v);
}

inline Spectrum spectrum_from_string(const std::string& s) {
  if (s == "strict") return Spectrum::strict;
  if (s == "bandlimited") return Spectrum::bandlimited;
  throw ConfigError("unknown spectrum mode '" + s + "'");
}

inline Family family_from_string(const std::string& s) {
  if (s == "poly") return Family::poly;
  if (s == "prod") return Family::prod;
  if (s == "sep") return Family::sep;
  throw ConfigError("unknown kernel family '" + s + "'");
}

/// Kernels come from "kernels" (explicit spec list) or from "families" x "n_list".
inline SyntheticConfig synthetic_config_from_json(const io::json& j, const std::filesystem::path& base = {}) {
  SyntheticConfig c;
  try {
    c.N = j.value("N", c.N);
    c.N_test = j.value("N_test", c.N_test);
    c.m = j.value("m", c.m);
    c.seed = j.value("seed", c.seed);
    c.input_noise = j.value("input_noise", c.input_noise);
    c.output_noise = j.value("output_noise", c.output_noise);
    c.delta = j.value("delta", kTwoPi / static_cast<double>(c.m));
    c.lambda = j.value("lambda", c.lambda);
    c.runs = j.value("runs", c.runs);
    if (j.contains("kernels")) {
      for (const auto& k : j.at("kernels")) c.kernels.push_back(io::kernel_spec_from_json(k, base));
    } else {
      std::vector<Family> fams{Family::poly, Family::prod, Family::sep};
      if (j.contains("families")) {
        fams.clear();
        for (const auto& f : j.at("families")) fams.push_back(family_from_string(f.get<std::string>()));
      }
      auto ns = default_n_sweep();
      if (j.contains("n_list")) {
        ns.clear();
        for (const auto& n : j.at("n_list")) ns.push_back(n_from_json(n));
      }
      c.kernels = SyntheticConfig::default_kernels(c.delta, fams, ns,
                                                   spectrum_from_string(j.value("spectrum", std::string("bandlimited"))));
    }
  } catch (const io::json::exception& e) {
    throw ConfigError(std::string("synthetic config: ") + e.what());
  }
  if (c.lambda < 0.0) throw ConfigError("synthetic config: lambda must be >= 0");
  if (c.N == 0 || c.N_test == 0 || c.runs == 0) throw ConfigError("synthetic config: N, N_test and runs must be positive");
  return c;
}

inline EigenStudyConfig eigen_config_from_json(const io::json& j, const std::filesystem::path& base = {}) {
  EigenStudyConfig c;
  io::json data = j.contains("data") ? j.at("data") : io::json::object();
  data["kernels"] = io::json::array();  // the study's kernels are listed separately
  c.data = synthetic_config_from_json(data, base);
  c.data.kernels.clear();
  try {
    c.point = j.value("point", std::size_t{0});
    if (j.contains("kernels"))
      for (const auto& k : j.at("kernels")) c.kernels.push_back(io::kernel_spec_from_json(k, base));
  } catch (const io::json::exception& e) {
    throw ConfigError(std::string("eigen config: ") + e.what());
  }
  if (c.kernels.empty()) {
    c.kernels.push_back(synthetic_kernel(Family::poly, 16, c.data.delta, Spectrum::bandlimited));
    c.kernels.push_back(synthetic_kernel(Family::prod, 16, c.data.delta, Spectrum::bandlimited));
  }
  return c;
}

inline InpaintConfig inpaint_config_from_json(const io::json& j, const std::filesystem::path& base = {}) {
  InpaintConfig c;
  try {
    c.height = j.value("height", c.height);
    c.width = j.value("width", c.width);
    c.N_train = j.value("N_train", c.N_train);
    c.N_test = j.value("N_test", c.N_test);
    c.lambda = j.value("lambda", c.lambda);
    c.seed = j.value("seed", c.seed);
    c.save_images = j.value("save_images", c.save_images);
    if (j.contains("source")) {
      const std::filesystem::path src = j.at("source").get<std::string>();
      c.source = src.empty() || src.is_absolute() ? src.string() : (base / src).string();
    }
    if (j.contains("mask")) {
      const auto& mk = j.at("mask");
      const std::size_t h = mk.value("height", std::size_t{8}), w = mk.value("width", std::size_t{8});
      if (mk.contains("top") || mk.contains("left"))
        c.mask = Mask{mk.value("top", std::size_t{0}), mk.value("left", std::size_t{0}), h, w};
      else
        c.mask = Mask::centered(c.height, c.width, h, w);
    }
    if (j.contains("kernel")) c.kernel = io::kernel_spec_from_json(j.at("kernel"), base);
    if (j.contains("n_list")) {
      c.n_list.clear();
      for (const auto& n : j.at("n_list")) c.n_list.push_back(n_from_json(n));
    }
  } catch (const io::json::exception& e) {
    throw ConfigError(std::string("inpaint config: ") + e.what());
  }
  if (c.lambda < 0.0) throw ConfigError("inpaint config: lambda must be >= 0");
  if (c.N_train == 0 || c.N_test == 0) throw ConfigError("inpaint config: N_train and N_test must be positive");
  return c;
}

}  // namespace spectrunc
