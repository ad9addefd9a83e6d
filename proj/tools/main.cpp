// Experiment runner: loads a config, runs one experiment, writes reports,
// tables and a manifest atomically into the output directory.
//
// Exit codes: 0 success, 2 validation/config error, 3 numerical-guard error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ergolab/model_io.hpp"
#include "ergolab/parallel.hpp"

namespace fs = std::filesystem;
using namespace ergolab;

namespace {

struct RunContext {
  std::string config_path;
  std::string out_dir = "out";
  long seed_override = -1;
  int threads = 1;
  json manifest_params;

  ConfigTable root;
  ModelSpec spec;

  void load() {
    std::ifstream in(config_path);
    if (!in) throw InvalidConfig("cannot open config file '" + config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    root = parse_config(ss.str());
  }

  Model model() {
    ConfigTable& mt = root.table("model");
    spec = model_spec_from_config(mt);
    if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
    return build_model(spec);
  }

  ConfigTable& experiment(const std::string& name) { return root.table(name); }

  void write_atomic(const std::string& name, const std::string& content) const {
    fs::create_directories(out_dir);
    fs::path final_path = fs::path(out_dir) / name;
    fs::path tmp = final_path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << content;
    }
    fs::rename(tmp, final_path);
  }

  void finish(const std::string& experiment_name, const json& report) {
    root.check_consumed();
    json manifest = {{"version", kVersion},
                     {"experiment", experiment_name},
                     {"model", to_json(spec)},
                     {"params", manifest_params},
                     {"seed", spec.seed}};
    write_atomic("manifest.json", manifest.dump(2) + "\n");
    write_atomic("report.json", report.dump(2) + "\n");
  }
};

std::string format_csv_row(const std::vector<double>& vals) {
  std::string row;
  char buf[40];
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", vals[i]);
    if (i) row += ",";
    row += buf;
  }
  return row + "\n";
}

SpherePoint base_point(const Model& m, ConfigTable& exp_cfg) {
  if (exp_cfg.has("x0")) {
    Vec coords = exp_cfg.number_list("x0");
    if (static_cast<int>(coords.size()) != m.ambient_dim())
      throw InvalidConfig("x0 must have d+1 coordinates");
    return sphere_point(std::move(coords));
  }
  RngStream rng = m.stream(0x783030ULL);
  return random_sphere_point(m.dimension(), rng);
}

std::vector<int> word_from_stream(const Model& m, int length, std::uint64_t tag) {
  RngStream rng = m.stream(tag);
  return m.sample_word(length, rng).indices;
}

Observable observable_from_config(ConfigTable& t, int quad_n_theta) {
  std::string kind = t.str("kind");
  Observable obs = Observable::zero();
  if (kind == "coordinate") {
    obs = Observable::coordinate(static_cast<int>(t.integer("index")));
  } else if (kind == "harmonic") {
    obs = Observable::harmonic(static_cast<int>(t.integer("l")),
                               static_cast<int>(t.integer("m")));
  } else if (kind == "zero") {
    obs = Observable::zero();
  } else {
    throw InvalidConfig("unknown observable kind '" + kind + "'");
  }
  if (t.boolean_or("mean_zero", true))
    obs = obs.with_mean_subtracted(make_sphere_quadrature(quad_n_theta));
  return obs;
}

// ---------------------------------------------------------------------------

int run_lyapunov(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("lyapunov");
  long n = cfg.integer_or("n", 100000);
  LyapunovOptions opts;
  opts.k_qr = static_cast<int>(cfg.integer_or("k_qr", 1));
  opts.burn_in_frac = cfg.number_or("burn_in", 0.1);
  SpherePoint x0 = base_point(m, cfg);
  RngStream rng = m.stream(0x6c79ULL);
  LyapunovReport rep = lyapunov_spectrum(m, x0, n, rng, opts);
  ctx.manifest_params = {{"n", n}, {"k_qr", opts.k_qr}, {"burn_in", opts.burn_in_frac},
                         {"x0", x0.x}};
  std::string csv = "exponent\n";
  for (double e : rep.exponents) csv += format_csv_row({e});
  ctx.write_atomic("exponents.csv", csv);
  ctx.finish("lyapunov", to_json(rep));
  return 0;
}

int run_certify_gap(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("certify-gap");
  int n = static_cast<int>(cfg.integer_or("N", m.power()));
  long n_base = cfg.integer_or("n_base", 200);
  long n_words = cfg.integer_or("n_words", 200);
  std::string form_s = cfg.str_or("form", "eq12");
  GapForm form = form_s == "eq11" ? GapForm::eq11 : GapForm::eq12;
  int refine = static_cast<int>(cfg.integer_or("refine_iters", 20));
  GapCertificate cert = gap_estimate(m, n, n_base, n_words, form, ctx.threads, refine);
  ctx.manifest_params = {{"N", n},       {"n_base", n_base},         {"n_words", n_words},
                         {"form", form_s}, {"refine_iters", refine}};
  ctx.finish("certify-gap", to_json(cert));
  return 0;
}

int run_certify_coexp(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("certify-coexp");
  int n = static_cast<int>(cfg.integer_or("N", m.power()));
  long n_base = cfg.integer_or("n_base", 200);
  long n_words = cfg.integer_or("n_words", 200);
  CoexpEstimate est = coexpanding_estimate(m, n, n_base, n_words, ctx.threads);
  ctx.manifest_params = {{"N", n}, {"n_base", n_base}, {"n_words", n_words}};
  ctx.finish("certify-coexp", to_json(est));
  return 0;
}

int run_moment_decay(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("moment-decay");
  double sigma = cfg.number_or("sigma", 0.1);
  std::vector<double> ns = cfg.number_list_or("n_list", {8, 16, 24, 32});
  std::vector<int> n_list(ns.begin(), ns.end());
  long n_samples = cfg.integer_or("n_samples", 400);
  long n_base = cfg.integer_or("n_base", 16);
  MomentDecayReport rep = moment_decay(m, sigma, n_list, n_samples, n_base, ctx.threads);
  ctx.manifest_params = {{"sigma", sigma}, {"n_list", n_list},
                         {"n_samples", n_samples}, {"n_base", n_base}};
  std::string csv = "n,moment\n";
  for (std::size_t i = 0; i < n_list.size(); ++i)
    csv += format_csv_row({static_cast<double>(n_list[i]), rep.moment_values[i]});
  ctx.write_atomic("moments.csv", csv);
  ctx.finish("moment-decay", to_json(rep));
  return 0;
}

int run_stable_dir(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("stable-dir");
  int n = static_cast<int>(cfg.integer_or("n", 200));
  std::string method_s = cfg.str_or("method", "svd");
  StableMethod method = method_s == "graph" ? StableMethod::graph : StableMethod::svd;
  StableOptions opts;
  opts.graph_block_len = static_cast<int>(cfg.integer_or("block_len", 5));
  SpherePoint x = base_point(m, cfg);
  std::vector<int> word = word_from_stream(m, n, 0x7764ULL);
  RngStream rng = m.stream(0x736417ULL);
  StableDirectionResult rep = stable_direction(m, word, x, n, method, &rng, opts);
  ctx.manifest_params = {{"n", n}, {"method", method_s}, {"block_len", opts.graph_block_len},
                         {"x0", x.x}};
  if (!rep.graph_norm_history.empty()) {
    std::string csv = "block,l_norm\n";
    for (std::size_t i = 0; i < rep.graph_norm_history.size(); ++i)
      csv += format_csv_row({static_cast<double>(i), rep.graph_norm_history[i]});
    ctx.write_atomic("graph_norms.csv", csv);
  }
  ctx.finish("stable-dir", to_json(rep));
  return 0;
}

int run_splitting(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("splitting");
  double kappa = cfg.number("kappa");
  double kappa_prime = cfg.number("kappa_prime");
  double eps = cfg.number("eps");
  int n_max = static_cast<int>(cfg.integer_or("n_max", 100));
  SpherePoint x = base_point(m, cfg);
  std::vector<int> word = word_from_stream(m, splitting_direction_horizon(n_max), 0x7764ULL);
  SplittingReport rep = splitting_constant(m, word, x, kappa, kappa_prime, eps, n_max);
  ctx.manifest_params = {{"kappa", kappa}, {"kappa_prime", kappa_prime}, {"eps", eps},
                         {"n_max", n_max}, {"x0", x.x}};
  ctx.finish("splitting", to_json(rep));
  return 0;
}

int run_splitting_tail(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("splitting-tail");
  double kappa = cfg.number("kappa");
  double kappa_prime = cfg.number("kappa_prime");
  double eps = cfg.number("eps");
  int n_max = static_cast<int>(cfg.integer_or("n_max", 100));
  long trials = cfg.integer_or("trials", 2000);
  SpherePoint x = base_point(m, cfg);
  SplittingTailReport rep =
      splitting_tail(m, x, kappa, kappa_prime, eps, n_max, trials, ctx.threads);
  ctx.manifest_params = {{"kappa", kappa}, {"kappa_prime", kappa_prime}, {"eps", eps},
                         {"n_max", n_max}, {"trials", trials}, {"x0", x.x}};
  std::string csv = "c_value\n";
  for (double c : rep.c_values) csv += format_csv_row({c});
  ctx.write_atomic("tail_values.csv", csv);
  ctx.finish("splitting-tail", to_json(rep));
  return 0;
}

int run_angle_tail(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("angle-tail");
  std::vector<double> rho_list = cfg.number_list_or("rho_list", {0.2, 0.1, 0.05, 0.025});
  long trials = cfg.integer_or("trials", 10000);
  int horizon = static_cast<int>(cfg.integer_or("horizon", 100));
  SpherePoint x = base_point(m, cfg);
  RngStream wr = m.stream(0x776eULL);
  Vec w = wr.unit_vector(m.dimension());
  AngleTailReport rep = angle_tail(m, x, w, rho_list, trials, horizon, ctx.threads);
  ctx.manifest_params = {{"rho_list", rho_list}, {"trials", trials}, {"horizon", horizon},
                         {"x0", x.x}, {"w_normal", w}};
  ctx.finish("angle-tail", to_json(rep));
  return 0;
}

int run_det_stats(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("det-stats");
  long trials = cfg.integer_or("trials", 5000);
  int horizon = static_cast<int>(cfg.integer_or("horizon", 100));
  int bootstrap = static_cast<int>(cfg.integer_or("bootstrap", 200));
  SpherePoint x = base_point(m, cfg);
  FrameDetReport rep = frame_det_stats(m, x, trials, horizon, ctx.threads, bootstrap);
  ctx.manifest_params = {{"trials", trials}, {"horizon", horizon}, {"bootstrap", bootstrap},
                         {"x0", x.x}};
  std::string csv = "abs_det\n";
  for (double d : rep.dets) csv += format_csv_row({d});
  ctx.write_atomic("determinants.csv", csv);
  ctx.finish("det-stats", to_json(rep));
  return 0;
}

int run_trace(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("trace");
  double arclen = cfg.number_or("arclen", 0.05);
  double h_arc = cfg.number_or("h_arc", 0.002);
  int horizon = static_cast<int>(cfg.integer_or("dir_horizon", 60));
  SpherePoint x = base_point(m, cfg);
  std::vector<int> word = word_from_stream(m, horizon + 8, 0x7764ULL);
  CurveTrace trace = trace_stable_curve(m, word, x, arclen, h_arc, horizon);
  ctx.manifest_params = {{"arclen", arclen}, {"h_arc", h_arc}, {"dir_horizon", horizon},
                         {"x0", x.x}};
  std::string csv;
  for (int i = 0; i < m.ambient_dim(); ++i) csv += (i ? ",x" : "x") + std::to_string(i);
  csv += "\n";
  for (const SpherePoint& p : trace.points) csv += format_csv_row(p.x);
  ctx.write_atomic("trace.csv", csv);
  ctx.finish("trace", to_json(trace));
  return 0;
}

int run_mixing(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("mixing");
  MixingOptions opts;
  opts.quad_n_theta = static_cast<int>(cfg.integer_or("quad_n_theta", 8));
  opts.threads = ctx.threads;
  long n_mc = cfg.integer_or("n_mc", 10000);
  int n_max = static_cast<int>(cfg.integer_or("n_max", 30));
  std::vector<int> n_list;
  for (int n = 1; n <= n_max; ++n) n_list.push_back(n);
  Observable phi = observable_from_config(cfg.table("phi"), opts.quad_n_theta);
  Observable psi = cfg.has("psi")
                       ? observable_from_config(cfg.table("psi"), opts.quad_n_theta)
                       : phi;
  MixingReport rep = correlation(m, phi, psi, n_list, n_mc, opts);
  ctx.manifest_params = {{"n_mc", n_mc}, {"n_max", n_max},
                         {"quad_n_theta", opts.quad_n_theta}};
  std::string csv = "n,correlation\n";
  for (std::size_t i = 0; i < n_list.size(); ++i)
    csv += format_csv_row({static_cast<double>(n_list[i]), rep.correlations[i]});
  ctx.write_atomic("correlations.csv", csv);
  ctx.finish("mixing", to_json(rep));
  return 0;
}

int run_clt(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("clt");
  CltOptions opts;
  opts.quad_n_theta = static_cast<int>(cfg.integer_or("quad_n_theta", 8));
  opts.n_mc_corr = cfg.integer_or("n_mc_corr", 4000);
  opts.threads = ctx.threads;
  long n = cfg.integer_or("N", 10000);
  long trials = cfg.integer_or("trials", 2000);
  int n_star = static_cast<int>(cfg.integer_or("n_star", 50));
  Observable phi = observable_from_config(cfg.table("phi"), opts.quad_n_theta);
  CltReport rep = clt(m, phi, n, trials, n_star, opts);
  ctx.manifest_params = {{"N", n}, {"trials", trials}, {"n_star", n_star},
                         {"n_mc_corr", opts.n_mc_corr},
                         {"quad_n_theta", opts.quad_n_theta}};
  ctx.finish("clt", to_json(rep));
  return 0;
}

int run_gap_proxy(RunContext& ctx) {
  Model m = ctx.model();
  ConfigTable& cfg = ctx.experiment("gap-proxy");
  int max_l = static_cast<int>(cfg.integer_or("L", 8));
  int quad = static_cast<int>(cfg.integer_or("quadrature_size", 0));
  long n_mc = cfg.integer_or("n_mc", 0);
  GapProxyReport rep = transfer_matrix(m, max_l, quad, n_mc, ctx.threads);
  ctx.manifest_params = {{"L", max_l}, {"quadrature_size", quad}, {"n_mc", n_mc}};
  ctx.finish("gap-proxy", to_json(rep));
  return 0;
}

int run_kakeya(RunContext& ctx) {
  ConfigTable& cfg = ctx.experiment("kakeya");
  std::vector<TubeFamily> families;
  double delta = cfg.number_or("delta", 0.1);
  json family_echo;
  if (cfg.has("family_file")) {
    std::ifstream in(cfg.str("family_file"));
    if (!in) throw InvalidConfig("cannot open family file");
    json j = json::parse(in);
    families = tube_families_from_json(j);
    family_echo = j;
  } else {
    int d = static_cast<int>(cfg.integer_or("d", 2));
    double theta = cfg.number_or("theta", 0.5);
    double curvature = cfg.number_or("curvature", 0.3);
    long seed = cfg.integer_or("family_seed", 1);
    std::vector<double> counts_d = cfg.number_list_or("counts", Vec(d, 12.0));
    std::vector<int> counts(counts_d.begin(), counts_d.end());
    families = make_tube_families(d, theta, curvature, counts, delta,
                                  static_cast<std::uint64_t>(seed));
    family_echo = tube_families_to_json(families);
  }
  std::vector<double> rho_list =
      cfg.number_list_or("rho_list", {delta / 4, delta / 8, delta / 16, delta / 32,
                                      delta / 64});
  double p = cfg.number_or("p", 1.05);
  int grid_n = static_cast<int>(cfg.integer_or("grid_n", 0));
  int grid_factor = static_cast<int>(cfg.integer_or("grid_factor", 1));
  KakeyaScan scan = kakeya_scan(families, delta, rho_list, p, grid_n, grid_factor);
  ctx.spec = ModelSpec{}; // kakeya runs without a dynamics model
  ctx.manifest_params = {{"delta", delta}, {"rho_list", rho_list}, {"p", p},
                         {"grid_n", grid_n}, {"grid_factor", grid_factor}};
  ctx.write_atomic("families.json", family_echo.dump(2) + "\n");
  std::string csv = "rho,lhs,ratio\n";
  for (std::size_t i = 0; i < rho_list.size(); ++i)
    csv += format_csv_row({rho_list[i], scan.lhs_values[i], scan.ratios[i]});
  ctx.write_atomic("scan.csv", csv);
  json rep = to_json(scan);
  FamilyInvariantReport inv = check_family_invariants(
      families, cfg.number_or("b1", 2.0), cfg.number_or("eps0", 0.25),
      cfg.number_or("theta_check", 0.0));
  rep["invariants_ok"] = inv.ok;
  rep["frame_det"] = inv.frame_det;
  ctx.finish("kakeya", rep);
  return 0;
}

GridSet grid_from_config(ConfigTable& cfg) {
  if (cfg.has("bitmap")) {
    std::string path = cfg.str("bitmap");
    // PGM with JSON sidecar
    std::ifstream side(path + ".json");
    if (!side) throw InvalidConfig("missing sidecar '" + path + ".json'");
    json meta = json::parse(side);
    GridSet g = make_grid_set(meta.at("lo").get<Vec>(), meta.at("hi").get<Vec>(),
                              meta.at("resolution").get<double>());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidConfig("cannot open bitmap '" + path + "'");
    std::string magic;
    int w, h, maxv;
    in >> magic >> w >> h >> maxv;
    in.get();
    if (magic != "P5" || w != g.nx || h != g.ny)
      throw InvalidConfig("bitmap does not match the sidecar extent");
    std::vector<char> buf(static_cast<std::size_t>(w) * h);
    in.read(buf.data(), buf.size());
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        g.set(x, y, static_cast<unsigned char>(buf[static_cast<std::size_t>(h - 1 - y) * w + x]) > 127);
    return g;
  }
  std::string shape = cfg.str_or("shape", "disk");
  double res = cfg.number_or("resolution", 128);
  std::vector<double> lo = cfg.number_list_or("lo", {-2.0, -2.0});
  std::vector<double> hi = cfg.number_list_or("hi", {2.0, 2.0});
  if (shape == "disk") {
    double radius = cfg.number_or("radius", 1.0);
    return make_grid_set(lo, hi, res, [radius](double x, double y) {
      return x * x + y * y <= radius * radius;
    });
  }
  if (shape == "halfspace") {
    return make_grid_set(lo, hi, res, [](double x, double) { return x > 0; });
  }
  throw InvalidConfig("unknown shape '" + shape + "'");
}

void write_pgm(const RunContext& ctx, const std::string& name, const GridSet& g) {
  std::string data = "P5\n" + std::to_string(g.nx) + " " + std::to_string(g.ny) + "\n255\n";
  data.reserve(data.size() + static_cast<std::size_t>(g.nx) * g.ny);
  for (int y = g.ny - 1; y >= 0; --y)
    for (int x = 0; x < g.nx; ++x) data += static_cast<char>(g.at(x, y) ? 255 : 0);
  ctx.write_atomic(name, data);
  json meta = {{"lo", g.lo}, {"hi", g.hi}, {"resolution", g.resolution}};
  ctx.write_atomic(name + ".json", meta.dump(2) + "\n");
}

int run_sobolev(RunContext& ctx) {
  ConfigTable& cfg = ctx.experiment("sobolev");
  std::string op = cfg.str_or("op", "seminorm");
  double s = cfg.number_or("s", 0.25);
  GridSet g = grid_from_config(cfg);
  ctx.spec = ModelSpec{};
  json rep;
  HsOptions opts;
  opts.cutoff_radius = cfg.number_or("cutoff", 0.5);
  opts.threads = ctx.threads;
  if (op == "seminorm") {
    double val = hs_seminorm(g, s, opts);
    rep = {{"op", op},
           {"s", s},
           {"cutoff", opts.cutoff_radius},
           {"seminorm", val},
           {"volume", g.volume()},
           {"tail_bound", hs_tail_bound(g, s, opts.cutoff_radius)}};
  } else if (op == "defect") {
    Vec deltas = cfg.number_list_or("delta_list", {0.125, 0.0625, 0.03125});
    ConvolutionDefectReport r = convolution_defect(g, deltas, s, opts);
    rep = to_json(r);
    rep["op"] = op;
    std::string csv = "delta,defect,ratio\n";
    for (std::size_t i = 0; i < deltas.size(); ++i)
      csv += format_csv_row({deltas[i], r.defects[i], r.ratios[i]});
    ctx.write_atomic("defects.csv", csv);
  } else if (op == "density-points") {
    double delta = cfg.number_or("delta", 0.0625);
    double c0 = cfg.number_or("c0", 1.0 - std::pow(delta, s));
    DensityPointsReport r = density_points(g, delta, c0);
    write_pgm(ctx, "density_points.pgm", r.points);
    rep = {{"op", op},
           {"delta", delta},
           {"c0", c0},
           {"complement_measure", r.complement_measure},
           {"density_point_volume", r.points.volume()}};
  } else {
    throw InvalidConfig("unknown sobolev op '" + op + "'");
  }
  ctx.manifest_params = {{"op", op}, {"s", s}};
  ctx.finish("sobolev", rep);
  return 0;
}

int run_density(RunContext& ctx) {
  ConfigTable& cfg = ctx.experiment("density");
  std::string mode = cfg.str_or("mode", "gap-eval");
  ctx.spec = ModelSpec{};
  json rep;
  if (mode == "gap-eval") {
    double kappa = cfg.number_or("kappa", 0.0);
    double delta = cfg.number("delta");
    double p = cfg.number("p");
    double s = cfg.number("s");
    double c_p = cfg.number("c_p");
    int d = static_cast<int>(cfg.integer_or("dim", 2));
    DensityGapEval eval = density_gap_eval(kappa, delta, p, s, c_p, d);
    rep = to_json(eval);
    if (s / (d - 1.0) > density_gap_eps_p(p, s, d))
      rep["delta_star"] = density_gap_delta_star(p, s, c_p, d);
    ctx.manifest_params = {{"mode", mode}, {"kappa", kappa}, {"delta", delta},
                           {"p", p},       {"s", s},         {"c_p", c_p},
                           {"dim", d}};
  } else if (mode == "profile") {
    double delta = cfg.number("delta");
    double s = cfg.number_or("s", 0.25);
    double target = cfg.number_or("target", std::pow(delta, s));
    GridSet g = grid_from_config(cfg);
    ConfigValue* pathv = cfg.find("path");
    if (!pathv) throw InvalidConfig("profile mode requires 'path'");
    cfg.consumed["path"] = true;
    std::vector<Vec> path;
    for (const ConfigValue& pt : std::get<ConfigArray>(pathv->v)) {
      Vec v;
      for (const ConfigValue& c : std::get<ConfigArray>(pt.v)) v.push_back(c.as_number("path"));
      path.push_back(std::move(v));
    }
    int n_samples = static_cast<int>(cfg.integer_or("n_samples", 200));
    DensityProfile prof = density_profile(g, path, delta, target, n_samples);
    std::string csv = "t,q\n";
    for (std::size_t i = 0; i < prof.t.size(); ++i)
      csv += format_csv_row({prof.t[i], prof.q[i]});
    ctx.write_atomic("profile.csv", csv);
    rep = {{"mode", mode}, {"delta", delta}, {"target", target},
           {"t_bar", prof.t_bar}, {"q_bar", prof.q_bar}};
    ctx.manifest_params = {{"mode", mode}, {"delta", delta}, {"target", target},
                           {"n_samples", n_samples}};
  } else {
    throw InvalidConfig("unknown density mode '" + mode + "'");
  }
  ctx.finish("density", rep);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergolab: simulation and certification laboratory for IID random "
               "volume-preserving dynamics on spheres"};
  app.require_subcommand(1);

  RunContext ctx;
  const std::vector<std::pair<std::string, int (*)(RunContext&)>> experiments = {
      {"lyapunov", run_lyapunov},       {"certify-gap", run_certify_gap},
      {"certify-coexp", run_certify_coexp}, {"moment-decay", run_moment_decay},
      {"stable-dir", run_stable_dir},   {"splitting", run_splitting},
      {"splitting-tail", run_splitting_tail}, {"angle-tail", run_angle_tail},
      {"det-stats", run_det_stats},     {"trace", run_trace},
      {"mixing", run_mixing},           {"clt", run_clt},
      {"gap-proxy", run_gap_proxy},     {"kakeya", run_kakeya},
      {"sobolev", run_sobolev},         {"density", run_density}};

  int (*selected)(RunContext&) = nullptr;
  for (const auto& [name, fn] : experiments) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", ctx.config_path, "config file (TOML subset)")->required();
    sub->add_option("--out", ctx.out_dir, "output directory");
    sub->add_option("--seed", ctx.seed_override, "override the model seed");
    sub->add_option("--threads", ctx.threads, "worker threads (does not affect results)");
    int (*fn_copy)(RunContext&) = fn;
    sub->callback([&selected, fn_copy] { selected = fn_copy; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    ctx.load();
    return selected(ctx);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
