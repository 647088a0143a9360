// edgerep command-line runner.
//
//   edgerep <command> --config cfg.json --out dir [--seed N] [--threads N]
//
// Results are staged in memory and written only after the computation succeeds,
// each file via temp-then-rename, followed by manifest.json with SHA-256 digests.
// Exit codes: 0 ok, 2 bad config or arguments, 3 numerical failure, 4 inconclusive gap.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "edgerep/edgerep.hpp"

using namespace edgerep;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Staged {
  std::vector<std::pair<std::string, std::string>> files;
  void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
};

struct Context {
  json config;  // resolved, defaults filled in
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::uint64_t> chain_seeds;
};

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// rejects keys outside the schema
void allow(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || key == k;
    if (!ok) throw InvalidArgument(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  try {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config key '") + key + "': " + e.what());
  }
}

FCSTriple triple_from_config(const json& j) {
  if (!j.contains("triple") || (j.at("triple").is_string() && j.at("triple") == "aklt")) return build_aklt_triple();
  if (j.at("triple").is_object()) return io::fcs_from_json(j.at("triple"), true);
  throw InvalidArgument("triple: expected \"aklt\" or a triple object");
}

std::vector<double> grid_from_config(const json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& g = j.at(key);
  if (g.is_array()) return get_or<std::vector<double>>(j, key, {});
  allow(g, {"min", "max", "points"}, key);
  const double lo = get_or(g, "min", -kPi / 2), hi = get_or(g, "max", kPi / 2);
  const int n = get_or(g, "points", 21);
  if (n < 2 || !(hi > lo)) throw InvalidArgument(std::string(key) + ": need points >= 2 and max > min");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = -10; i <= 10; ++i) g.push_back(i * kPi / 20.0);
  return g;
}

std::string to_json_text(const json& j) { return j.dump(2) + "\n"; }

json content_json(const IrrepContent& c) {
  json out = json::array();
  for (const auto& [two_j, mult] : c.multiplicity) out.push_back({{"spin", 0.5 * two_j}, {"multiplicity", mult}});
  return out;
}

// rows L, distance, g, re, im; re/im is the identity edge element at that L
std::string scan_rows(const FCSTriple& t, const ConvergenceScan& s) {
  std::string out;
  const WindowOp one{Mat::Identity(1, 1), 1};
  for (std::size_t i = 0; i < s.L.size(); ++i) {
    const EdgeElement e = edge_matrix_element(t, s.axis, one, one, s.g, s.L[i]);
    out += std::to_string(s.L[i]) + "," + num(s.distance[i]) + "," + num(s.g) + "," + num(e.finite.real()) + "," +
           num(e.finite.imag()) + "\n";
  }
  return out;
}

json scan_json(const ConvergenceScan& s) {
  return {{"g", s.g},           {"axis", to_string(s.axis)},       {"L", s.L},
          {"distance", s.distance}, {"fitted", s.fitted},         {"slope", s.fit.slope},
          {"intercept", s.fit.intercept}, {"residual", s.fit.residual}, {"slope_ok", s.slope_ok},
          {"residual_ok", s.residual_ok}, {"c1_hat", s.c1_hat}};
}

Staged cmd_edge_rep(Context& ctx) {
  const json& c = ctx.config;
  allow(c, {"triple", "g_grid", "L", "rank_tol", "span_sites", "scan_L", "scan_g"}, "edge-rep");
  const FCSTriple t = triple_from_config(c);
  EdgeRepOptions o;
  o.L = get_or(c, "L", o.L);
  o.rank_tol = get_or(c, "rank_tol", o.rank_tol);
  o.span_sites = get_or(c, "span_sites", o.span_sites);
  o.scan_L = get_or(c, "scan_L", o.scan_L);
  o.scan_g = get_or(c, "scan_g", o.scan_g);
  o.threads = ctx.threads;
  const auto grid = grid_from_config(c, "g_grid", default_grid());
  ctx.config["g_grid"] = grid;
  ctx.config["L"] = o.L;
  ctx.config["rank_tol"] = o.rank_tol;
  ctx.config["span_sites"] = o.span_sites;
  ctx.config["scan_L"] = o.scan_L;
  ctx.config["scan_g"] = o.scan_g;

  const EdgeRepReport rep = edge_representation(t, grid, o);
  json axes = json::array();
  for (const auto& a : rep.axes)
    axes.push_back({{"axis", to_string(a.axis)}, {"group_law_defect", a.group_law_defect}, {"max_deviation", a.max_deviation}});
  json report{{"content", content_json(rep.content)},
              {"content_string", rep.content.to_string()},
              {"expected", content_json(rep.expected)},
              {"content_matches", rep.content_matches},
              {"group_law_defect", rep.group_law_defect},
              {"axes", axes},
              {"generators", io::triple_to_json(rep.generators)},
              {"scan", scan_json(rep.scan)},
              {"lambda_e", t.lambda_e}};
  std::string csv = "L,distance,g,re,im\n";
  for (double g : grid) {
    if (g == 0.0) continue;
    csv += scan_rows(t, convergence_scan(t, Axis::z, g, o.scan_L));
  }
  Staged out;
  out.add("edge_rep.json", to_json_text(report));
  out.add("edge_rep.csv", csv);
  return out;
}

Staged cmd_excess_scan(Context& ctx) {
  const json& c = ctx.config;
  allow(c, {"triple", "axis", "g", "L", "slope_min", "slope_max", "residual_max"}, "excess-scan");
  const FCSTriple t = triple_from_config(c);
  const Axis axis = parse_axis(get_or<std::string>(c, "axis", "z"));
  const auto gs = get_or<std::vector<double>>(c, "g", {0.5, 1.0, 2.0});
  const auto Ls = get_or<std::vector<int>>(c, "L", {4, 8, 16, 32});
  ScanOptions so;
  so.slope_min = get_or(c, "slope_min", so.slope_min);
  so.slope_max = get_or(c, "slope_max", so.slope_max);
  so.residual_max = get_or(c, "residual_max", so.residual_max);
  so.threads = ctx.threads;
  ctx.config["axis"] = to_string(axis);
  ctx.config["g"] = gs;
  ctx.config["L"] = Ls;
  ctx.config["slope_min"] = so.slope_min;
  ctx.config["slope_max"] = so.slope_max;
  ctx.config["residual_max"] = so.residual_max;

  std::string csv = "L,distance,g,re,im\n";
  json scans = json::array();
  for (double g : gs) {
    const ConvergenceScan s = convergence_scan(t, axis, g, Ls, so);
    csv += scan_rows(t, s);
    scans.push_back(scan_json(s));
  }
  Staged out;
  out.add("scan.csv", csv);
  out.add("scan.json", to_json_text({{"scans", scans}}));
  return out;
}

Staged cmd_string_order(Context& ctx) {
  const json& c = ctx.config;
  allow(c, {"triple", "max_separation"}, "string-order");
  const FCSTriple t = triple_from_config(c);
  const int rmax = get_or(c, "max_separation", 40);
  if (rmax < 1) throw InvalidArgument("string-order: max_separation must be positive");
  ctx.config["max_separation"] = rmax;
  std::string csv = "r,string_order,correlator\n";
  double last = 0.0;
  for (int r = 1; r <= rmax; ++r) {
    last = string_order(t, 0, r);
    csv += std::to_string(r) + "," + num(last) + "," + num(string_correlator(t, 0, r)) + "\n";
  }
  Staged out;
  out.add("string_order.csv", csv);
  out.add("string_order.json", to_json_text({{"max_separation", rmax}, {"value", last}, {"lambda_e", t.lambda_e}}));
  return out;
}

Staged cmd_ed(Context& ctx) {
  const json& c = ctx.config;
  allow(c, {"spec", "cluster_tol", "band_size", "max_eigs"}, "ed");
  if (!c.contains("spec")) throw InvalidArgument("ed: missing 'spec'");
  const HamiltonianSpec spec = io::spec_from_json(c.at("spec"));
  GroundSpaceOptions o;
  o.cluster_tol = get_or(c, "cluster_tol", o.cluster_tol);
  o.band_size = get_or(c, "band_size", o.band_size);
  o.max_eigs = get_or(c, "max_eigs", o.max_eigs);
  o.lanczos.seed = ctx.seed;
  ctx.config["spec"] = io::spec_to_json(spec);
  ctx.config["cluster_tol"] = o.cluster_tol;
  ctx.config["band_size"] = o.band_size;
  ctx.config["max_eigs"] = o.max_eigs;

  const SpMat h = build_hamiltonian(spec);
  const SpectralData sd = ground_space(h, o);
  if (sd.inconclusive) throw InconclusiveGap("ed: ground cluster not separated from the rest of the computed spectrum");
  const IrrepContent content = ground_rep_decomposition(h, total_spin(spec.spin, spec.length), sd);
  std::string csv = "index,energy\n";
  for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i) csv += std::to_string(i) + "," + num(sd.eigenvalues[i]) + "\n";
  json report{{"dimension", spec.dimension()},
              {"ground_energy", sd.ground_energy},
              {"degeneracy", sd.degeneracy},
              {"gap", sd.gap ? json(*sd.gap) : json(nullptr)},
              {"splitting", sd.splitting},
              {"content", content_json(content)},
              {"content_string", content.to_string()}};
  Staged out;
  out.add("spectrum.csv", csv);
  out.add("ed.json", to_json_text(report));
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Staged cmd_loop_mc(Context& ctx) {
  const json& c = ctx.config;
  allow(c,
        {"spin", "n_sites", "beta", "spec", "loop_weight", "max_bridges", "n_steps", "burn_in", "thin", "chains", "eps",
         "resume_from"},
        "loop-mc");
  ChainParams p;
  if (c.contains("spec")) {
    // effective inverse temperature of the single-line model -(2S+1) J sum P0
    const HamiltonianSpec spec = io::spec_from_json(c.at("spec"));
    p.beta = single_line_beta(spec, get_or(c, "beta", 1.0));
    p.spin = spec.spin;
    p.n_sites = spec.length;
    if (c.contains("spin") || c.contains("n_sites")) throw InvalidArgument("loop-mc: give either 'spec' or spin/n_sites");
  } else {
    p.spin = TwiceSpin::from_double(get_or(c, "spin", 0.5));
    p.n_sites = get_or(c, "n_sites", p.n_sites);
    p.beta = get_or(c, "beta", p.beta);
  }
  if (c.contains("loop_weight")) p.loop_weight = get_or(c, "loop_weight", 0.0);
  p.max_bridges = get_or(c, "max_bridges", p.max_bridges);
  p.n_steps = get_or(c, "n_steps", p.n_steps);
  p.burn_in = get_or(c, "burn_in", p.burn_in);
  p.thin = get_or(c, "thin", p.thin);
  p.seed = ctx.seed;
  p.validate();
  const int n_chains = get_or(c, "chains", 4);
  if (n_chains < 1) throw InvalidArgument("loop-mc: chains must be positive");
  const auto eps = get_or<std::vector<double>>(c, "eps", {});
  const std::string resume = get_or<std::string>(c, "resume_from", "");
  ctx.config["spin"] = p.spin.value();
  ctx.config["n_sites"] = p.n_sites;
  if (!c.contains("beta")) ctx.config["beta"] = c.contains("spec") ? 1.0 : p.beta;
  ctx.config["effective_beta"] = p.beta;
  ctx.config["loop_weight"] = p.weight();
  ctx.config["max_bridges"] = p.max_bridges;
  ctx.config["n_steps"] = p.n_steps;
  ctx.config["burn_in"] = p.burn_in;
  ctx.config["thin"] = p.thin;
  ctx.config["chains"] = n_chains;
  ctx.config["eps"] = eps;
  if (eps.size() == 1) throw InvalidArgument("loop-mc: eps needs at least two values");
  if (!resume.empty())
    for (int k = 0; k < n_chains; ++k)
      if (!fs::exists(fs::path(resume) / ("chain_" + std::to_string(k) + ".ckpt")))
        throw InvalidArgument("loop-mc: missing checkpoint for chain " + std::to_string(k) + " in " + resume);

  const auto seeds = chain_seeds(p.seed, n_chains);
  ctx.chain_seeds = seeds;
  std::vector<std::vector<LoopDecomposition>> chains(n_chains);
  std::vector<std::string> checkpoints(n_chains);
  std::vector<std::uint64_t> steps(n_chains), accepted(n_chains);
  const fs::path scratch = fs::temp_directory_path() / ("edgerep_ckpt_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  fs::create_directories(scratch);
  try {
    detail::parallel_for(n_chains, ctx.threads, [&](std::size_t k) {
      ChainParams q = p;
      q.seed = seeds[k];
      const std::string name = "chain_" + std::to_string(k) + ".ckpt";
      // a resumed chain is already equilibrated: no burn-in
      LoopChain ch = resume.empty() ? LoopChain(q) : LoopChain::load((fs::path(resume) / name).string(), q);
      if (resume.empty()) ch.run(q.burn_in);
      for (long s = q.burn_in; s + q.thin <= q.n_steps; s += q.thin) {
        ch.run(q.thin);
        chains[k].push_back(trace_loops(ch.config()));
        chains[k].back().drop_segments();
      }
      const fs::path tmp = scratch / name;
      ch.save(tmp.string());
      checkpoints[k] = read_file(tmp);
      steps[k] = ch.steps();
      accepted[k] = ch.accepted();
    });
  } catch (...) {
    fs::remove_all(scratch);
    throw;
  }
  fs::remove_all(scratch);

  std::string corr = "x,y,mean,stderr,stderr_naive,count\n";
  for (int y = 0; y < p.n_sites; ++y) {
    const MCEstimate e = estimate_correlation(chains, p.spin, 0, y);
    corr += "0," + std::to_string(y) + "," + num(e.mean) + "," + num(e.stderr) + "," + num(e.stderr_naive) + "," +
            std::to_string(e.count) + "\n";
  }
  long loops = 0, odd = 0, parity = 0, samples = 0;
  for (const auto& ch : chains)
    for (const auto& d : ch) {
      ++samples;
      loops += d.n_loops;
      odd += odd_crossing_loops(d);
      parity += crossing_parity_violations(d);
    }
  json chain_info = json::array();
  for (int k = 0; k < n_chains; ++k)
    chain_info.push_back({{"seed", seeds[k]}, {"steps", steps[k]}, {"accepted", accepted[k]}, {"samples", chains[k].size()}});
  json report{{"samples", samples},
              {"loops", loops},
              {"odd_crossing_loops", odd},
              {"crossing_parity_violations", parity},
              {"chains", chain_info}};
  Staged out;
  out.add("correlations.csv", corr);
  if (!eps.empty()) {
    const ExcessSpinStats st = excess_spin_stats(chains, p.spin, eps, p.seed);
    std::string csv = "eps,moment,stderr\n";
    for (std::size_t i = 0; i < st.eps.size(); ++i) csv += num(st.eps[i]) + "," + num(st.moments[i].mean) + "," + num(st.moments[i].stderr) + "\n";
    json dist = json::object();
    for (const auto& [tw, q] : st.s_nu_distribution) dist[num(0.5 * tw)] = q;
    json diffs = json::array();
    for (const auto& d : st.differences) diffs.push_back({{"mean", d.mean}, {"stderr", d.stderr}});
    report["excess"] = {{"decreasing", st.decreasing}, {"sigmas", st.sigmas}, {"intercept", st.intercept},
                        {"differences", diffs},        {"s_nu_distribution", dist}};
    out.add("excess.csv", csv);
  }
  out.add("loop_mc.json", to_json_text(report));
  for (int k = 0; k < n_chains; ++k) out.add("chain_" + std::to_string(k) + ".ckpt", checkpoints[k]);
  return out;
}

Staged cmd_flow(Context& ctx) {
  const json& c = ctx.config;
  allow(c,
        {"knots", "interpolation", "n_steps", "filter", "gap_tol", "cluster_tol", "band_size", "halving_check", "g_grid",
         "equivalence"},
        "flow");
  if (get_or<std::string>(c, "interpolation", "linear") != "linear") throw InvalidArgument("flow: only linear interpolation is supported");
  if (!c.contains("knots") || !c.at("knots").is_array()) throw InvalidArgument("flow: 'knots' must be an array");
  FlowPath path;
  json knots = json::array();
  for (const auto& k : c.at("knots")) {
    allow(k, {"s", "spec"}, "flow knot");
    if (!k.contains("s") || !k.contains("spec")) throw InvalidArgument("flow knot: need 's' and 'spec'");
    path.knots.push_back({get_or(k, "s", 0.0), io::spec_from_json(k.at("spec"))});
    knots.push_back({{"s", path.knots.back().s}, {"spec", io::spec_to_json(path.knots.back().spec)}});
  }
  path.validate();
  FlowOptions o;
  o.n_steps = get_or(c, "n_steps", o.n_steps);
  if (c.contains("filter")) {
    const json& f = c.at("filter");
    allow(f, {"type", "gamma", "gamma_fraction"}, "flow filter");
    if (get_or<std::string>(f, "type", "bump") != "bump") throw InvalidArgument("flow filter: only 'bump' is available");
    if (f.contains("gamma") && !f.at("gamma").is_null()) o.gamma = get_or(f, "gamma", 0.0);
    o.gamma_fraction = get_or(f, "gamma_fraction", o.gamma_fraction);
  }
  o.gap_tol = get_or(c, "gap_tol", o.gap_tol);
  o.cluster_tol = get_or(c, "cluster_tol", o.cluster_tol);
  if (c.contains("band_size")) o.band_size = get_or(c, "band_size", 0);
  o.halving_check = get_or(c, "halving_check", o.halving_check);
  o.g_grid = get_or(c, "g_grid", o.g_grid);
  const bool equivalence = get_or(c, "equivalence", true);
  ctx.config["knots"] = knots;
  ctx.config["interpolation"] = "linear";
  ctx.config["n_steps"] = o.n_steps;
  ctx.config["gap_tol"] = o.gap_tol;
  ctx.config["cluster_tol"] = o.cluster_tol;
  ctx.config["halving_check"] = o.halving_check;
  ctx.config["g_grid"] = o.g_grid;
  ctx.config["equivalence"] = equivalence;

  EquivalenceVerdict v;
  if (equivalence) {
    v = edge_rep_equivalence(path, o);
  } else {
    v.flow = flow_integrate(path, o);
  }
  const FlowResult& r = v.flow;
  ctx.config["filter"] = {{"type", "bump"}, {"gamma", r.gamma}, {"gamma_fraction", o.gamma_fraction}};
  ctx.config["band_size"] = r.band_size;

  double cov = 0.0, unit = 0.0;
  for (double d : r.covariance_defect) cov = std::max(cov, d);
  for (double d : r.unitarity_defect) unit = std::max(unit, d);
  auto chars = [&](const std::vector<cplx>& row) {
    json a = json::array();
    for (const auto& z : row) a.push_back({z.real(), z.imag()});
    return a;
  };
  json report{{"filter", {{"type", "bump"}, {"gamma", r.gamma}}},
              {"band_size", r.band_size},
              {"degeneracy", {r.degeneracy_start, r.degeneracy_end}},
              {"min_gap", *std::min_element(r.gap.begin(), r.gap.end())},
              {"final_fidelity", r.final_fidelity},
              {"max_covariance_defect", cov},
              {"max_unitarity_defect", unit},
              {"cocycle_defect", r.cocycle_defect},
              {"halving_defect", r.halving_defect},
              {"norm_defect", r.norm_defect},
              {"max_character_drift", r.max_character_drift},
              {"character_grid", r.character_grid},
              {"characters_start", chars(r.characters.front())},
              {"characters_end", chars(r.characters.back())}};
  if (equivalence) {
    report["equivalent"] = v.equivalent;
    report["content"] = {content_json(v.content_0), content_json(v.content_1)};
    report["character_mismatch"] = v.character_mismatch;
  }
  std::string csv = "s,fidelity,gap,covariance_defect,unitarity_defect\n";
  for (std::size_t i = 0; i < r.s.size(); ++i) {
    csv += num(r.s[i]) + "," + num(r.fidelity[i]) + "," + num(r.gap[i]) + ",";
    if (i > 0) csv += num(r.covariance_defect[i - 1]) + "," + num(r.unitarity_defect[i - 1]);
    else csv += ",";
    csv += "\n";
  }
  Staged out;
  out.add("flow.json", to_json_text(report));
  out.add("fidelity.csv", csv);
  return out;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

int run(const std::string& command, const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
        int threads) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx;
  {
    std::ifstream f(config_path);
    if (!f) throw InvalidArgument("cannot open config " + config_path);
    try {
      ctx.config = json::parse(f);
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
  }
  if (!ctx.config.is_object()) throw InvalidArgument("config must be a JSON object");
  if (ctx.config.contains("seed")) {
    ctx.seed = get_or<std::uint64_t>(ctx.config, "seed", 0);
    ctx.config.erase("seed");
  } else {
    ctx.seed = 12345;
  }
  if (seed) ctx.seed = *seed;
  ctx.threads = threads;

  Staged staged;
  if (command == "edge-rep") staged = cmd_edge_rep(ctx);
  else if (command == "excess-scan") staged = cmd_excess_scan(ctx);
  else if (command == "string-order") staged = cmd_string_order(ctx);
  else if (command == "ed") staged = cmd_ed(ctx);
  else if (command == "loop-mc") staged = cmd_loop_mc(ctx);
  else if (command == "flow") staged = cmd_flow(ctx);
  else throw InvalidArgument("unknown command " + command);

  fs::create_directories(out_dir);
  json outputs = json::object();
  for (const auto& [name, content] : staged.files) {
    write_atomic(fs::path(out_dir) / name, content);
    outputs[name] = {{"sha256", sha256_hex(content)}, {"bytes", content.size()}};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest{{"command", command},
                {"version", kVersion},
                {"config", ctx.config},
                {"seed", ctx.seed},
                {"threads", ctx.threads},
                {"started_utc", utc_now()},
                {"wall_clock_seconds", secs},
                {"outputs", outputs}};
  if (!ctx.chain_seeds.empty()) manifest["chain_seeds"] = ctx.chain_seeds;
  write_atomic(fs::path(out_dir) / "manifest.json", to_json_text(manifest));
  std::cout << command << ": wrote " << staged.files.size() << " files and manifest.json to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edge representations, excess spin, loop Monte Carlo and spectral flow for SU(2) spin chains"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::string config, out = "out";
  std::uint64_t seed_value = 0;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::vector<std::pair<std::string, std::string>> commands{
      {"edge-rep", "reconstruct the edge representation u_g of a symmetric triple"},
      {"excess-scan", "C1/L convergence scan of the ramped rotation"},
      {"string-order", "string order parameter against separation"},
      {"loop-mc", "loop Monte Carlo for the single-line spin chain"},
      {"ed", "exact diagonalization: ground band, gap, representation content"},
      {"flow", "quasi-adiabatic flow along a path of Hamiltonians"}};
  std::vector<CLI::Option*> seed_opts;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory")->capture_default_str();
    seed_opts.push_back(sub->add_option("--seed", seed_value, "random seed (overrides the config)"));
    sub->add_option("--threads", threads, "worker threads")->envname("EDGEREP_THREADS")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  std::optional<std::uint64_t> seed;
  for (auto* o : seed_opts)
    if (o->count() > 0) seed = seed_value;
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, config, out, seed, threads);
  } catch (const InconclusiveGap& e) {
    std::cerr << "inconclusive gap";
    if (!std::isnan(e.where())) std::cerr << " at s = " << e.where();
    std::cerr << ": " << e.what() << "\n";
    return 4;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
