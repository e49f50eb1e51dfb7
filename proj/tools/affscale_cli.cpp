// affscale: command-line front end for the affine scale-space library.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "affscale/affscale.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace affscale;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitVerify = 3;
constexpr int kMaxJsonMatrix = 33;

// Parameters shared by most subcommands. Defaults are the unit isotropic shape
// at scale 1.
struct Common {
  std::string out = ".";
  std::string report;
  bool no_timing = false;
  int threads = 0;
  std::string in;

  std::string path = "fourier";
  double lambda1 = 1.0, lambda2 = 1.0, alpha = 0.0;
  bool isotropic = false;
  double s = 1.0;
  double ds = 0.5;
  int steps = -1;
  int K = 3;
  double rho = 1.0;
  int max_levels = 16;
  double cxxyy = std::numeric_limits<double>::quiet_NaN();
  bool permissive = false;

  double phi = 0.0;
  std::vector<int> order = {0, 0};
  std::string norm = "none";
  std::vector<double> gamma = {1.0};
  double p = 1.0;
};

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
};

void to_json(json& j, const Check& c) {
  j = json{{"name", c.name}, {"passed", c.passed}, {"measured", c.measured}, {"tolerance", c.tolerance}};
}

class RunReport {
 public:
  RunReport(std::string command, std::string subcommand)
      : command_(std::move(command)), subcommand_(std::move(subcommand)) {}

  json& params() { return params_; }
  json& extra() { return extra_; }

  template <class F>
  auto stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
      timing_.push_back(
          {name, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()});
    };
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      finish();
    } else {
      auto r = f();
      finish();
      return r;
    }
  }

  void check(std::string name, double measured, double tolerance, bool passed) {
    checks_.push_back({std::move(name), passed, measured, tolerance});
  }
  // Passes when measured <= tolerance.
  void check_le(std::string name, double measured, double tolerance) {
    check(std::move(name), measured, tolerance, measured <= tolerance);
  }
  void output(const fs::path& p) { outputs_.push_back(p.generic_string()); }

  json to_json(bool with_timing) const {
    json j{{"command", command_}, {"subcommand", subcommand_}, {"parameters", params_},
           {"checks", checks_},   {"outputs", outputs_}};
    if (with_timing) {
      json t = json::object();
      for (const auto& [k, v] : timing_) t[k] = v;
      j["timing_ms"] = t;
    }
    if (!extra_.is_null()) j["result"] = extra_;
    return j;
  }

  bool all_passed() const {
    for (const auto& c : checks_)
      if (!c.passed) return false;
    return true;
  }

 private:
  std::string command_, subcommand_;
  json params_ = json::object();
  json extra_;
  std::vector<Check> checks_;
  std::vector<std::string> outputs_;
  std::vector<std::pair<std::string, double>> timing_;
};

void add_io_options(CLI::App* app, Common& c, bool needs_input) {
  auto* in = app->add_option("--in", c.in, "Input image (PFM, PGM or PPM)");
  if (needs_input) in->required();
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
}

void add_shape_options(CLI::App* app, Common& c) {
  app->add_option("--path", c.path, "Smoothing path")
      ->check(CLI::IsMember({"fourier", "iter3x3", "pyramid"}))
      ->capture_default_str();
  app->add_option("--lambda1", c.lambda1, "Larger covariance eigenvalue")->capture_default_str();
  app->add_option("--lambda2", c.lambda2, "Smaller covariance eigenvalue")->capture_default_str();
  app->add_option("--alpha", c.alpha, "Orientation of the lambda1 eigenvector (radians)")
      ->capture_default_str();
  app->add_flag("--isotropic", c.isotropic, "Set lambda2 = lambda1 and alpha = 0");
  app->add_option("--s", c.s, "Scale multiplier applied to the covariance")->capture_default_str();
  app->add_option("--ds", c.ds, "Scale step of the 3x3 iteration")->capture_default_str();
  app->add_option("--steps", c.steps, "Number of iteration steps; sets --s to steps * ds");
  app->add_option("--K", c.K, "Pyramid subsampling gate parameter")->capture_default_str();
  app->add_option("--rho", c.rho, "Pyramid gate multiplier (reported)")->capture_default_str();
  app->add_option("--max-levels", c.max_levels, "Deepest pyramid level")->capture_default_str();
  app->add_option("--cxxyy", c.cxxyy, "Fourth-order coefficient of the unit shape");
  app->add_flag("--permissive", c.permissive,
                "Compute Fourier kernels outside the non-negative range and tag them");
}

void add_derivative_options(CLI::App* app, Common& c) {
  app->add_option("--phi", c.phi, "Derivative direction (radians)")->capture_default_str();
  app->add_option("--order", c.order, "Derivative orders m,n along phi and its normal")
      ->delimiter(',')
      ->expected(2);
  app->add_option("--norm", c.norm, "Scale normalization")
      ->check(CLI::IsMember({"none", "variance", "lp"}))
      ->capture_default_str();
  app->add_option("--gamma", c.gamma, "Normalization exponent(s): g or g1,g2")
      ->delimiter(',')
      ->expected(1, 2);
  app->add_option("--p", c.p, "Exponent of the lp norm")->capture_default_str();
}

CovarianceSpec unit_spec(const Common& c) {
  if (c.isotropic) return from_eigen(c.lambda1, c.lambda1, 0.0);
  if (c.lambda2 > c.lambda1) throw Error(ErrorKind::InvalidArgument, "--lambda2 exceeds --lambda1");
  return from_eigen(c.lambda1, c.lambda2, c.alpha);
}

double scale_of(const Common& c) {
  if (c.steps >= 0) return c.steps * c.ds;
  if (!(c.s > 0.0)) throw Error(ErrorKind::InvalidArgument, "--s must be positive");
  return c.s;
}

CovarianceSpec total_spec(const Common& c) { return unit_spec(c).scaled(scale_of(c)); }

PathOptions path_options(const Common& c) {
  PathOptions o;
  o.path = parse_path(c.path);
  o.delta_s = c.ds;
  o.K = c.K;
  o.rho = c.rho;
  o.max_levels = c.max_levels;
  o.cxxyy = c.cxxyy;
  return o;
}

NormalizationSpec norm_spec(const Common& c) {
  NormalizationSpec n;
  n.mode = c.norm == "lp" ? NormMode::lp : c.norm == "variance" ? NormMode::variance : NormMode::none;
  if (c.gamma.empty() || c.gamma.size() > 2) throw Error(ErrorKind::InvalidArgument, "--gamma takes one or two values");
  n.gamma1 = c.gamma[0];
  n.gamma2 = c.gamma.size() == 2 ? c.gamma[1] : c.gamma[0];
  n.p = c.p;
  return n;
}

json shape_params(const Common& c) {
  const auto total = total_spec(c);
  json j{{"total", total}, {"eigen", {{"lambda1", total.lambda_max()}, {"lambda2", total.lambda_min()},
                                       {"alpha", total.eigen().alpha}}},
         {"path", path_options(c)}};
  if (c.steps >= 0) j["steps"] = c.steps;
  return j;
}

json derivative_params(const Common& c) {
  const auto n = norm_spec(c);
  return json{{"phi", c.phi},     {"order", c.order}, {"norm", c.norm},
              {"gamma", {n.gamma1, n.gamma2}}, {"p", n.p}};
}

json image_matrix(const RealImage& img) {
  json rows = json::array();
  for (int r = 0; r < img.height(); ++r) {
    json row = json::array();
    for (int c = 0; c < img.width(); ++c) row.push_back(img(c, r));
    rows.push_back(row);
  }
  return rows;
}

json moments_json(const KernelMoments& m) {
  return json{{"mass", m.mass}, {"mean_x", m.mean_x}, {"mean_y", m.mean_y},
              {"cxx", m.cxx},   {"cxy", m.cxy},       {"cyy", m.cyy}};
}

std::vector<RealImage> load(const Common& c) { return io::read_image(c.in); }

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + p.string() + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + p.string() + "'");
}

fs::path prepare_out(const Common& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + c.out + "': " + ec.message());
  return fs::path(c.out);
}

RealImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealImage img(w, h);
  for (double& v : img.data()) v = u(rng);
  return img;
}

// ---------------------------------------------------------------------------

struct KernelArgs {
  int size = 0;
  bool spectrum = false;
};

void cmd_kernel(const Common& c, const KernelArgs& k, RunReport& rep) {
  const auto total = total_spec(c);
  const auto o = path_options(c);
  const auto op = directional_operator(c.phi, c.order.at(0), c.order.at(1));
  // A 3x3 iteration reaches one sample per application.
  const int n = k.size > 0                        ? k.size
                : o.path == SmoothingPath::iter3x3 ? std::max(5, 2 * iteration_plan(total, o).applications() + 1)
                                                   : kernel_grid_side(total);
  rep.params() = shape_params(c);
  rep.params()["size"] = n;
  rep.params()["derivative"] = derivative_params(c);
  const auto dir = prepare_out(c);

  json meta;
  RealImage smooth_kernel;
  switch (o.path) {
    case SmoothingPath::fourier: {
      const auto p = fourier_params(total, o);
      const auto mode = c.permissive ? Feasibility::permissive : Feasibility::strict;
      const auto syn = rep.stage("kernel", [&] { return synthesize_kernel(p, n, n, mode); });
      smooth_kernel = syn.kernel;
      const auto f = cxxyy_feasibility(p.spec);
      meta["feasibility"] = {{"cxxyy", p.cxxyy}, {"lower", f.lower}, {"upper", f.upper},
                             {"feasible", is_feasible(p)}};
      rep.check_le("imaginary-residue", syn.imag_residue, 1e-12);
      if (k.spectrum) {
        const auto psi = transfer_function(p, n, n);
        RealImage logmag(n, n);
        for (int r = 0; r < n; ++r)
          for (int col = 0; col < n; ++col) logmag(col, r) = std::log(psi(col, r));
        io::write_pfm(dir / "spectrum.pfm", circular_shift(logmag, n / 2, n / 2));
        rep.output(dir / "spectrum.pfm");
      }
      break;
    }
    case SmoothingPath::iter3x3: {
      const auto plan = iteration_plan(total, o);
      smooth_kernel = rep.stage("kernel", [&] { return iterate(impulse_image(n, n, n / 2, n / 2), plan); });
      meta["stencil"] = plan.stencil;
      meta["stencil_text"] = stencil_to_text(plan.stencil);
      meta["steps"] = plan.steps;
      meta["residual_ds"] = plan.residual_ds;
      if (plan.residual_ds > 0.0) meta["residual_stencil"] = plan.residual_stencil;
      meta["separable"] = is_separable(plan.stencil);
      break;
    }
    case SmoothingPath::pyramid: {
      const auto cfg = pyramid_config(total, o);
      const auto sched = schedule_for_scale(cfg, split_scale(total).s, n, n);
      smooth_kernel =
          rep.stage("kernel", [&] { return expand_all(cfg, sched, directional_operator(0.0, 0, 0), n, n); });
      meta["config"] = cfg;
      json levels = json::array();
      for (const auto& ls : sched.levels)
        levels.push_back({{"l", ls.level}, {"k", ls.steps}, {"residual_ds", ls.residual_ds}});
      meta["schedule"] = levels;
      break;
    }
  }
  if (smooth_kernel.has_tag(kNonPositiveKernelTag)) meta["tags"] = smooth_kernel.tags();

  const auto m = kernel_moments(smooth_kernel);
  meta["moments"] = moments_json(m);
  const double cov_err = std::max({std::abs(m.cxx - total.cxx()), std::abs(m.cxy - total.cxy()),
                                   std::abs(m.cyy - total.cyy())});
  rep.check_le("mass", std::abs(m.mass - 1.0), 1e-12);
  rep.check_le("covariance", cov_err, 1e-6 * total.lambda_max());
  const double negativity = std::max(0.0, -min_value(smooth_kernel));
  rep.check("negativity", negativity, 1e-12, c.permissive || negativity <= 1e-12);

  // Derivative kernels are the smoothing kernel followed by the operator.
  RealImage out = smooth_kernel;
  if (op.order_m + op.order_n > 0) out = apply(smooth_kernel, op, 1.0);
  if (out.width() <= kMaxJsonMatrix) meta["matrix"] = image_matrix(out);
  io::write_pfm(dir / "kernel.pfm", out);
  rep.output(dir / "kernel.pfm");
  rep.extra() = meta;
  write_json(dir / "kernel.json", json{{"parameters", rep.params()}, {"kernel", meta}});
  rep.output(dir / "kernel.json");
}

struct SmoothArgs {
  double split = 0.0;
};

void cmd_smooth(const Common& c, const SmoothArgs& a, RunReport& rep) {
  const auto total = total_spec(c);
  const auto o = path_options(c);
  rep.params() = shape_params(c);
  rep.params()["in"] = c.in;
  const auto planes = rep.stage("read", [&] { return load(c); });
  const auto dir = prepare_out(c);
  std::vector<RealImage> out;
  SmoothedField last;
  rep.stage("smooth", [&] {
    for (const auto& p : planes) {
      last = smooth_to_scale(p, total, o);
      out.push_back(last.image);
    }
  });
  rep.extra() = {{"level", last.level}, {"spacing_h", last.spacing_h},
                 {"width", out[0].width()}, {"height", out[0].height()}};
  if (a.split > 0.0) {
    if (o.path == SmoothingPath::pyramid) {
      throw Error(ErrorKind::InvalidArgument, "--split needs a full-resolution path");
    }
    const double s = scale_of(c);
    if (!(a.split < s)) throw Error(ErrorKind::InvalidArgument, "--split must lie in (0, s)");
    const auto unit = unit_spec(c);
    const double diff = rep.stage("split", [&] {
      double d = 0.0;
      for (std::size_t i = 0; i < planes.size(); ++i) {
        const auto first = smooth_to_scale(planes[i], unit.scaled(a.split), o).image;
        const auto second = smooth_to_scale(first, unit.scaled(s - a.split), o).image;
        d = std::max(d, max_abs_diff(second, out[i]));
      }
      return d;
    });
    rep.params()["split"] = a.split;
    rep.check_le("semigroup", diff, 1e-10);
  }
  io::write_pfm(dir / "smoothed.pfm", out);
  rep.output(dir / "smoothed.pfm");
}

void cmd_derive(const Common& c, RunReport& rep) {
  const auto total = total_spec(c);
  const auto o = path_options(c);
  const auto n = norm_spec(c);
  rep.params() = shape_params(c);
  rep.params()["in"] = c.in;
  rep.params()["derivative"] = derivative_params(c);
  const auto planes = rep.stage("read", [&] { return load(c); });
  const auto dir = prepare_out(c);
  std::vector<RealImage> out;
  DerivativeResponse last;
  rep.stage("derive", [&] {
    for (const auto& p : planes) {
      last = derive(p, total, c.phi, c.order.at(0), c.order.at(1), n, o);
      out.push_back(last.image);
    }
  });
  json r{{"level", last.level}, {"spacing_h", last.spacing_h}, {"factor", last.factor}};
  if (last.lp) {
    r["lp"] = {{"discrete_norm", last.lp->discrete_norm}, {"continuous_norm", last.lp->continuous_norm},
               {"variance", last.lp->variance},         {"correction", last.lp->correction},
               {"norm_factor", last.lp->norm_factor}};
  }
  rep.extra() = r;
  io::write_pfm(dir / "derived.pfm", out);
  rep.output(dir / "derived.pfm");
}

struct PyramidArgs {
  double ecc = 1.0;
  int levels = 3;
  int size = 256;
  std::uint64_t seed = 42;
};

void cmd_pyramid(const Common& c, const PyramidArgs& a, RunReport& rep) {
  PyramidConfig cfg;
  cfg.K = c.K;
  cfg.delta_s = c.ds;
  cfg.rho = c.rho;
  cfg.max_levels = c.max_levels;
  cfg.cxxyy = c.cxxyy;
  if (!(a.ecc > 0.0 && a.ecc <= 1.0)) throw Error(ErrorKind::InvalidArgument, "--ecc must lie in (0, 1]");
  cfg.spec = from_eigen(1.0, a.ecc, c.alpha);
  validate_config(cfg);
  const RealImage image = c.in.empty() ? random_image(a.size, a.size, a.seed) : load(c).at(0);
  rep.params() = {{"config", cfg}, {"levels", a.levels}, {"ecc", a.ecc}, {"alpha", c.alpha}};
  if (c.in.empty()) {
    rep.params()["synthetic"] = {{"size", a.size}, {"seed", a.seed}};
  } else {
    rep.params()["in"] = c.in;
  }
  const auto dir = prepare_out(c);
  const auto levels = rep.stage("build", [&] { return build_pyramid(image, cfg, a.levels); });
  const int kmax = max_iterations_per_level(cfg);
  json manifest{{"config", cfg}, {"max_iterations_per_level", kmax}, {"levels", json::array()}};
  for (const auto& lv : levels) {
    const auto name = "level_" + std::to_string(lv.level) + ".pfm";
    io::write_pfm(dir / name, lv.image);
    rep.output(dir / name);
    json j = lv;
    j["file"] = name;
    manifest["levels"].push_back(j);
    if (lv.level < a.levels) {
      const double expect = [&] {
        double s = 0.0;
        for (int l = 0; l <= lv.level; ++l) s += kmax * cfg.delta_s * std::ldexp(1.0, 2 * l);
        return s;
      }();
      rep.check_le("level-" + std::to_string(lv.level) + "-scale", std::abs(lv.lambda1_scale - expect),
                   1e-9 * expect);
    }
  }
  write_json(dir / "manifest.json", manifest);
  rep.output(dir / "manifest.json");
  rep.extra() = manifest;
}

struct BankArgs {
  std::string spec_file;
};

void cmd_bank(const Common& c, const BankArgs& a, const CLI::App& app, RunReport& rep) {
  BankSpec b;
  if (!a.spec_file.empty()) {
    std::ifstream in(a.spec_file);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + a.spec_file + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Format, std::string("bank description: ") + e.what());
    }
    b = bank_from_json(j);
  }
  // Command-line flags override the description file.
  if (app.count("--path")) b.path.path = parse_path(c.path);
  if (app.count("--ds")) b.path.delta_s = c.ds;
  if (app.count("--K")) b.path.K = c.K;
  if (app.count("--norm") || app.count("--gamma") || app.count("--p")) b.norm = norm_spec(c);
  check_bank_spec(b);

  const auto planes = rep.stage("read", [&] { return load(c); });
  const auto dir = prepare_out(c);
  rep.params() = {{"in", c.in},
                  {"sizes", b.sizes()},
                  {"eccentricities", b.eccentricities()},
                  {"orientations", b.orientations()},
                  {"orders", b.orders},
                  {"path", b.path},
                  {"norm", {{"mode", b.norm.mode == NormMode::lp         ? "lp"
                                     : b.norm.mode == NormMode::variance ? "variance"
                                                                         : "none"},
                            {"gamma", {b.norm.gamma1, b.norm.gamma2}},
                            {"p", b.norm.p}}}};
  const auto res = rep.stage("bank", [&] { return apply_bank(planes.at(0), b); });
  json index{{"entries", json::array()}, {"skipped", res.skipped}, {"smoothing_passes", res.smoothing_passes}};
  for (const auto& e : enumerate_bank(b)) {
    if (!e.feasible) continue;
    const BankKey key{e.size_index, e.ecc_index, e.orientation_index, e.order_m, e.order_n};
    const auto& r = res.responses.at(key);
    std::ostringstream name;
    name << "bank_s" << e.size_index << "_e" << e.ecc_index << "_o" << e.orientation_index << "_d"
         << e.order_m << e.order_n << ".pfm";
    io::write_pfm(dir / name.str(), r.image);
    json j = e;
    j["file"] = name.str();
    j["level"] = r.level;
    j["factor"] = r.factor;
    index["entries"].push_back(j);
  }
  write_json(dir / "index.json", index);
  rep.output(dir / "index.json");
  rep.extra() = {{"responses", res.responses.size()}, {"skipped", res.skipped.size()},
                 {"smoothing_passes", res.smoothing_passes}};
}

struct VerifyArgs {
  std::string only;
  std::uint64_t seed = 42;
};

bool cmd_verify(const VerifyArgs& a, RunReport& rep) {
  verify::Options opt;
  opt.seed = a.seed;
  opt.only = a.only;
  rep.params() = {{"seed", a.seed}, {"only", a.only}};
  const auto r = rep.stage("verify", [&] { return verify::run(opt); });
  for (const auto& c : r.checks) {
    std::cerr << verify::format_line(c) << "\n";
    rep.check(c.name, c.measured, c.tolerance, c.passed);
  }
  rep.extra() = r;
  return r.all_passed();
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine Gaussian scale space: kernels, smoothing, derivatives, pyramids, banks"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Common c;
  app.add_option("--threads", c.threads, "Worker thread cap (0: hardware concurrency)")
      ->envname("AFFSCALE_THREADS");
  app.add_option("--report", c.report, "Also write the run report to this file");
  app.add_flag("--no-timing", c.no_timing, "Omit wall-clock timings from the report");

  KernelArgs ka;
  auto* kernel = app.add_subcommand("kernel", "Emit a smoothing or derivative kernel as PFM + JSON");
  add_io_options(kernel, c, false);
  add_shape_options(kernel, c);
  add_derivative_options(kernel, c);
  kernel->add_option("--size", ka.size, "Kernel grid side (default: from the covariance)");
  kernel->add_flag("--spectrum", ka.spectrum, "Also write the log transfer function (fourier path)");

  SmoothArgs sa;
  auto* smooth = app.add_subcommand("smooth", "Smooth an image to a covariance");
  add_io_options(smooth, c, true);
  add_shape_options(smooth, c);
  smooth->add_option("--split", sa.split, "Also smooth in two steps split at this scale and compare");

  auto* derive_cmd = app.add_subcommand("derive", "Normalized directional derivative of an image");
  add_io_options(derive_cmd, c, true);
  add_shape_options(derive_cmd, c);
  add_derivative_options(derive_cmd, c);

  PyramidArgs pa;
  auto* pyramid = app.add_subcommand("pyramid", "Build an affine hybrid pyramid");
  add_io_options(pyramid, c, false);
  pyramid->add_option("--K", c.K, "Subsampling gate parameter")->capture_default_str();
  pyramid->add_option("--ds", c.ds, "Scale step per iteration")->capture_default_str();
  pyramid->add_option("--ecc", pa.ecc, "lambda2 / lambda1 of the unit shape")->capture_default_str();
  pyramid->add_option("--alpha", c.alpha, "Orientation (radians)")->capture_default_str();
  pyramid->add_option("--levels", pa.levels, "Completed levels before the last")->capture_default_str();
  pyramid->add_option("--rho", c.rho, "Gate multiplier (reported)")->capture_default_str();
  pyramid->add_option("--max-levels", c.max_levels, "Deepest level")->capture_default_str();
  pyramid->add_option("--cxxyy", c.cxxyy, "Fourth-order coefficient");
  pyramid->add_option("--size", pa.size, "Side of the synthetic image when --in is absent")
      ->capture_default_str();
  pyramid->add_option("--seed", pa.seed, "Seed of the synthetic image")->capture_default_str();

  BankArgs ba;
  auto* bank = app.add_subcommand("bank", "Apply a receptive-field bank");
  add_io_options(bank, c, true);
  bank->add_option("--bank", ba.spec_file, "Bank description JSON");
  bank->add_option("--path", c.path, "Smoothing path")->check(CLI::IsMember({"fourier", "iter3x3", "pyramid"}));
  bank->add_option("--ds", c.ds, "Scale step");
  bank->add_option("--K", c.K, "Pyramid gate parameter");
  bank->add_option("--norm", c.norm, "Scale normalization")->check(CLI::IsMember({"none", "variance", "lp"}));
  bank->add_option("--gamma", c.gamma, "Normalization exponent(s)")->delimiter(',')->expected(1, 2);
  bank->add_option("--p", c.p, "Exponent of the lp norm");

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite");
  verify_cmd->add_option("--only", va.only, "Run one criterion, by name or number");
  verify_cmd->add_option("--seed", va.seed, "Seed of the random suites")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  set_thread_limit(c.threads);
  const auto* sub = app.get_subcommands().front();
  RunReport rep(join_args(argc, argv), sub->get_name());
  int code = kExitOk;
  try {
    if (sub == kernel) {
      cmd_kernel(c, ka, rep);
    } else if (sub == smooth) {
      cmd_smooth(c, sa, rep);
    } else if (sub == derive_cmd) {
      cmd_derive(c, rep);
    } else if (sub == pyramid) {
      cmd_pyramid(c, pa, rep);
    } else if (sub == bank) {
      cmd_bank(c, ba, *bank, rep);
    } else if (sub == verify_cmd) {
      if (!cmd_verify(va, rep)) code = kExitVerify;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Io || e.kind() == ErrorKind::Format ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  const json report = rep.to_json(!c.no_timing);
  std::cout << report.dump(2) << "\n";
  if (!c.report.empty()) {
    try {
      write_json(c.report, report);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitIo;
    }
  }
  return code;
}
