#pragma once

// Random-loop representation of single-line antiferromagnets on an open chain,
//   H = -sum_<xy> Q_{2S}(S^x.S^y) = -(2S+1) sum_<xy> P0(x,y).
// One vertical line per site carries a spin-S value. Bridges are double bars on
// the space-time cylinder {0..n-1} x [0, beta) with periodic time: at a bridge on
// edge (x, x+1) the two lines are joined just below and just above the bridge.
// Configurations are weighted by Poisson(rate 1) x (2S+1)^{#loops}.

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "edgerep/common.hpp"
#include "edgerep/exact_diag.hpp"

namespace edgerep {

struct Bridge {
  double t = 0.0;
  int edge = 0;  // joins sites edge and edge + 1
};

struct BridgeConfig {
  int n_sites = 2;
  TwiceSpin spin{1};
  double beta = 1.0;
  std::vector<Bridge> bridges;  // strictly increasing times

  int n_edges() const { return n_sites - 1; }

  void validate() const {
    if (n_sites < 2) throw InvalidArgument("bridge config: need at least 2 sites");
    if (spin.twice < 1) throw InvalidArgument("bridge config: spin must be at least 1/2");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("bridge config: beta must be positive");
    for (std::size_t i = 0; i < bridges.size(); ++i) {
      const auto& b = bridges[i];
      if (b.edge < 0 || b.edge >= n_edges()) throw InvalidArgument("bridge config: edge out of range");
      if (!(b.t >= 0.0 && b.t < beta)) throw InvalidArgument("bridge config: time outside [0, beta)");
      if (i > 0 && !(bridges[i - 1].t < b.t)) throw InvalidArgument("bridge config: times not strictly increasing");
    }
  }
};

/// Lines of the single-line model: rejects multiline couplings and periodic chains.
/// Returns the effective inverse temperature beta * J_{2S}.
inline double single_line_beta(const HamiltonianSpec& spec, double beta) {
  if (spec.model != ModelKind::af_h) throw InvalidArgument("loop model: needs an af_h Hamiltonian");
  spec.validate();
  if (spec.boundary != Boundary::open) throw InvalidArgument("loop model: only open chains are supported");
  for (int k = 0; k < spec.spin.twice; ++k)
    if (spec.J[k] != 0.0) throw InvalidArgument("loop model: multiline coupling J_" + std::to_string(k) + " != 0");
  if (!(spec.J.back() > 0.0)) throw InvalidArgument("loop model: J_2S must be positive");
  if (!spec.bond_weights.empty()) throw InvalidArgument("loop model: bond weights not supported");
  return beta * spec.J.back();
}

/// Per-loop constant E_nu[sigma^2] for a uniform spin value sigma in {-S..S}.
inline double loop_constant(TwiceSpin s) { return s.casimir() / 3.0; }

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline BridgeConfig sample_bridges(int n_sites, TwiceSpin spin, double beta, std::uint64_t seed) {
  BridgeConfig c;
  c.n_sites = n_sites;
  c.spin = spin;
  c.beta = beta;
  c.validate();
  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> count(beta);
  for (int e = 0; e < c.n_edges(); ++e) {
    const int k = count(rng);
    for (int i = 0; i < k; ++i) c.bridges.push_back({uniform01(rng) * beta, e});
  }
  std::sort(c.bridges.begin(), c.bridges.end(), [](const Bridge& a, const Bridge& b) { return a.t < b.t; });
  c.validate();
  return c;
}

struct LoopInfo {
  std::vector<int> crossings;  // sites x with (x, 0) on the loop, ascending
  int span = 0;                // largest distance between crossings
  bool encircles_cut = false;  // N_(1/2,0): odd number of crossings left of the cut
  int time_winding = 0;        // signed turns around the time circle (from the walker)

  int n_crossings() const { return static_cast<int>(crossings.size()); }
};

struct LoopDecomposition {
  int n_sites = 0;
  int cut = 0;  // between sites cut and cut + 1
  int n_loops = 0;
  std::vector<int> site_loop;  // loop of (x, 0)
  std::vector<LoopInfo> loops;
  std::vector<int> line_offset;   // segments of line x: line_offset[x] .. line_offset[x+1]-1
  std::vector<int> segment_loop;  // segment j of line x covers (tau_{j-1}, tau_j); j = 0 contains t = 0

  bool same_loop(int x, int y) const { return site_loop.at(x) == site_loop.at(y); }
  void drop_segments() {
    line_offset = {};
    segment_loop = {};
  }
};

namespace detail {
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// event lists per line: bridge index and position of each bridge on its two lines
struct LineEvents {
  std::vector<std::vector<int>> events;  // bridge ids per line in time order
  std::vector<int> pos_left, pos_right;  // position of bridge b on lines edge and edge + 1
  std::vector<int> offset;

  explicit LineEvents(const BridgeConfig& c) : events(c.n_sites), offset(c.n_sites + 1, 0) {
    const int nb = static_cast<int>(c.bridges.size());
    pos_left.resize(nb);
    pos_right.resize(nb);
    for (int b = 0; b < nb; ++b) {
      const int e = c.bridges[b].edge;
      pos_left[b] = static_cast<int>(events[e].size());
      events[e].push_back(b);
      pos_right[b] = static_cast<int>(events[e + 1].size());
      events[e + 1].push_back(b);
    }
    for (int x = 0; x < c.n_sites; ++x)
      offset[x + 1] = offset[x] + std::max<int>(1, static_cast<int>(events[x].size()));
  }
  int m(int x) const { return static_cast<int>(events[x].size()); }
  int segments() const { return offset.back(); }
};

inline void join_segments(const BridgeConfig& c, const LineEvents& ev, UnionFind& uf) {
  for (int b = 0; b < static_cast<int>(c.bridges.size()); ++b) {
    const int a = c.bridges[b].edge, d = a + 1;
    const int p = ev.pos_left[b], q = ev.pos_right[b];
    uf.unite(ev.offset[a] + p, ev.offset[d] + q);                          // below
    uf.unite(ev.offset[a] + (p + 1) % ev.m(a), ev.offset[d] + (q + 1) % ev.m(d));  // above
  }
}
}  // namespace detail

/// Number of loops only; used inside the Metropolis step.
inline int count_loops(const BridgeConfig& c) {
  const detail::LineEvents ev(c);
  detail::UnionFind uf(ev.segments());
  detail::join_segments(c, ev, uf);
  int l = 0;
  for (int s = 0; s < ev.segments(); ++s) l += uf.find(s) == s;
  return l;
}

/// Loop partition of the configuration, crossing data at t = 0 and winding flags relative
/// to the cut between sites `cut` and `cut` + 1 (default: the middle bond).
inline LoopDecomposition trace_loops(const BridgeConfig& c, int cut = -1) {
  c.validate();
  if (cut < 0) cut = c.n_sites / 2 - 1;
  if (cut >= c.n_sites - 1) throw InvalidArgument("trace_loops: cut must be an interior bond");
  const detail::LineEvents ev(c);
  const int ns = ev.segments();
  detail::UnionFind uf(ns);
  detail::join_segments(c, ev, uf);

  LoopDecomposition d;
  d.n_sites = c.n_sites;
  d.cut = cut;
  d.line_offset = ev.offset;
  d.segment_loop.assign(ns, -1);
  std::vector<int> label(ns, -1);
  for (int s = 0; s < ns; ++s) {
    const int r = uf.find(s);
    if (label[r] < 0) label[r] = d.n_loops++;
    d.segment_loop[s] = label[r];
  }
  d.loops.resize(d.n_loops);
  d.site_loop.resize(c.n_sites);
  for (int x = 0; x < c.n_sites; ++x) {
    d.site_loop[x] = d.segment_loop[ev.offset[x]];
    d.loops[d.site_loop[x]].crossings.push_back(x);
  }
  for (auto& l : d.loops) {
    if (l.crossings.empty()) continue;
    l.span = l.crossings.back() - l.crossings.front();
    int left = 0;
    for (int x : l.crossings) left += x <= cut;
    l.encircles_cut = left % 2 == 1;
  }

  // walk each loop once to get its time winding; the walk must reproduce the union-find classes
  const double beta = c.beta;
  auto time_of = [&](int x, int j) { return c.bridges[ev.events[x][j]].t; };
  auto seg_len = [&](int x, int j) {
    const int m = ev.m(x);
    if (m == 0) return beta;
    const double top = time_of(x, j), bottom = time_of(x, (j + m - 1) % m);
    return j == 0 ? top + beta - bottom : top - bottom;
  };
  auto partner = [&](int x, int b) {
    const int e = c.bridges[b].edge;
    return x == e ? std::pair{e + 1, ev.pos_right[b]} : std::pair{e, ev.pos_left[b]};
  };
  std::vector<char> seen(ns, 0);
  for (int s0 = 0; s0 < ns; ++s0) {
    if (seen[s0]) continue;
    const int id = d.segment_loop[s0];
    int x = static_cast<int>(std::upper_bound(ev.offset.begin(), ev.offset.end(), s0) - ev.offset.begin()) - 1;
    int j = s0 - ev.offset[x];
    bool up = true;
    double disp = 0.0;
    const int x0 = x, j0 = j;
    do {
      const int s = ev.offset[x] + j;
      if (seen[s]) throw NumericalError("trace_loops: walker revisited a segment");
      if (d.segment_loop[s] != id) throw NumericalError("trace_loops: walker left its union-find class");
      seen[s] = 1;
      disp += up ? seg_len(x, j) : -seg_len(x, j);
      const int m = ev.m(x);
      if (m == 0) break;  // bare vertical circle
      if (up) {
        const auto [y, q] = partner(x, ev.events[x][j]);
        x = y;
        j = q;  // segment of y just below the bridge
        up = false;
      } else {
        const auto [y, q] = partner(x, ev.events[x][(j + m - 1) % m]);
        x = y;
        j = (q + 1) % ev.m(y);  // segment of y just above the bridge
        up = true;
      }
    } while (!(x == x0 && j == j0 && up));
    d.loops[id].time_winding = static_cast<int>(std::lround(disp / beta));
  }
  return d;
}

/// Loops whose number of t = 0 crossings is odd.
inline int odd_crossing_loops(const LoopDecomposition& d) {
  int n = 0;
  for (const auto& l : d.loops) n += l.n_crossings() % 2;
  return n;
}

/// Loops whose crossing parity disagrees with their time winding parity
/// (contractible loops must cross t = 0 an even number of times).
inline int crossing_parity_violations(const LoopDecomposition& d) {
  int n = 0;
  for (const auto& l : d.loops) n += (l.n_crossings() % 2) != (std::abs(l.time_winding) % 2);
  return n;
}

enum class Move { insert, remove };

/// Metropolis acceptance for adding a bridge to (or removing one from) a configuration
/// with n bridges; proposals pick a uniform (edge, time) or a uniform existing bridge.
inline double metropolis_acceptance(Move mv, int n, int n_edges, double beta, double weight, int delta_l) {
  const double w = std::pow(weight, delta_l);
  const double r = mv == Move::insert ? n_edges * beta / (n + 1) * w : n / (n_edges * beta) * w;
  return std::min(1.0, r);
}

struct ChainParams {
  int n_sites = 6;
  TwiceSpin spin{1};
  double beta = 1.0;
  std::optional<double> loop_weight;  // default 2S + 1; 1 gives the bare Poisson measure
  int max_bridges = -1;               // truncation of the state space; -1 = none
  long n_steps = 100000;              // total Metropolis steps including burn-in
  long burn_in = 10000;
  long thin = 10;
  std::uint64_t seed = 1;

  double weight() const { return loop_weight.value_or(spin.dim()); }

  void validate() const {
    if (n_sites < 2) throw InvalidArgument("chain: need at least 2 sites");
    if (spin.twice < 1) throw InvalidArgument("chain: spin must be at least 1/2");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("chain: beta must be positive");
    if (!(weight() > 0.0)) throw InvalidArgument("chain: loop weight must be positive");
    if (burn_in < 0 || thin < 1) throw InvalidArgument("chain: bad burn-in or thinning");
    if (n_steps < burn_in) throw InvalidArgument("chain: n_steps must be at least the burn-in");
  }
};

class LoopChain {
 public:
  explicit LoopChain(const ChainParams& p) : p_(p), rng_(p.seed) {
    p_.validate();
    c_.n_sites = p.n_sites;
    c_.spin = p.spin;
    c_.beta = p.beta;
    loops_ = count_loops(c_);
  }

  void step() {
    const int n = static_cast<int>(c_.bridges.size());
    const int ne = c_.n_edges();
    ++steps_;
    if (uniform01(rng_) < 0.5) {
      const int e = std::min(ne - 1, static_cast<int>(uniform01(rng_) * ne));
      const double t = uniform01(rng_) * c_.beta;
      const double u = uniform01(rng_);
      if (p_.max_bridges >= 0 && n >= p_.max_bridges) return;
      BridgeConfig trial = c_;
      const auto at = std::upper_bound(trial.bridges.begin(), trial.bridges.end(), t,
                                       [](double v, const Bridge& b) { return v < b.t; });
      if (at != trial.bridges.begin() && std::prev(at)->t == t) return;  // measure-zero tie
      trial.bridges.insert(at, Bridge{t, e});
      const int l = count_loops(trial);
      if (u < metropolis_acceptance(Move::insert, n, ne, c_.beta, p_.weight(), l - loops_)) accept(std::move(trial), l);
    } else {
      if (n == 0) return;
      const int k = std::min(n - 1, static_cast<int>(uniform01(rng_) * n));
      const double u = uniform01(rng_);
      BridgeConfig trial = c_;
      trial.bridges.erase(trial.bridges.begin() + k);
      const int l = count_loops(trial);
      if (u < metropolis_acceptance(Move::remove, n, ne, c_.beta, p_.weight(), l - loops_)) accept(std::move(trial), l);
    }
  }

  void run(long steps) {
    for (long i = 0; i < steps; ++i) step();
  }

  const BridgeConfig& config() const { return c_; }
  const ChainParams& params() const { return p_; }
  int n_loops() const { return loops_; }
  std::uint64_t steps() const { return steps_; }
  std::uint64_t accepted() const { return accepted_; }

  // Checkpoint layout, all integers and doubles little-endian:
  //   char[8] "EDGRLMC1"; u32 n_sites; u32 twice_s; f64 beta; f64 loop_weight; i64 max_bridges;
  //   u64 steps; u64 accepted; u32 n_words; u64 rng words (mt19937_64 state, then position);
  //   u64 n_bridges; n_bridges x (f64 t, u32 edge)
  void save(const std::string& path) const;
  static LoopChain load(const std::string& path, const ChainParams& run_params);

 private:
  void accept(BridgeConfig&& c, int l) {
    c_ = std::move(c);
    loops_ = l;
    ++accepted_;
  }

  ChainParams p_;
  std::mt19937_64 rng_;
  BridgeConfig c_;
  int loops_ = 0;
  std::uint64_t steps_ = 0, accepted_ = 0;
};

namespace detail {
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
  const std::string& s;
  std::size_t at = 0;
  std::uint64_t u(int bytes) {
    if (at + bytes > s.size()) throw InvalidArgument("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[at + i])) << (8 * i);
    at += bytes;
    return v;
  }
  double f() { return std::bit_cast<double>(u(8)); }
};
}  // namespace detail

inline void LoopChain::save(const std::string& path) const {
  std::string out = "EDGRLMC1";
  detail::put_u32(out, static_cast<std::uint32_t>(c_.n_sites));
  detail::put_u32(out, static_cast<std::uint32_t>(c_.spin.twice));
  detail::put_f64(out, c_.beta);
  detail::put_f64(out, p_.weight());
  detail::put_u64(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(p_.max_bridges)));
  detail::put_u64(out, steps_);
  detail::put_u64(out, accepted_);
  std::ostringstream os;
  os << rng_;
  std::istringstream is(os.str());
  std::vector<std::uint64_t> words;
  for (std::uint64_t w; is >> w;) words.push_back(w);
  detail::put_u32(out, static_cast<std::uint32_t>(words.size()));
  for (auto w : words) detail::put_u64(out, w);
  detail::put_u64(out, c_.bridges.size());
  for (const auto& b : c_.bridges) {
    detail::put_f64(out, b.t);
    detail::put_u32(out, static_cast<std::uint32_t>(b.edge));
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("checkpoint: cannot write " + tmp);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error("checkpoint: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("checkpoint: cannot rename to " + path);
}

/// Restores a chain; `run_params` supplies the sampling schedule, the model must match the file.
inline LoopChain LoopChain::load(const std::string& path, const ChainParams& run_params) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("checkpoint: cannot open " + path);
  const std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (s.size() < 8 || s.compare(0, 8, "EDGRLMC1") != 0) throw InvalidArgument("checkpoint: bad magic");
  detail::Reader r{s, 8};
  ChainParams p = run_params;
  p.n_sites = static_cast<int>(r.u(4));
  p.spin = TwiceSpin(static_cast<int>(r.u(4)));
  p.beta = r.f();
  p.loop_weight = r.f();
  p.max_bridges = static_cast<int>(static_cast<std::int64_t>(r.u(8)));
  if (p.n_sites != run_params.n_sites || p.spin.twice != run_params.spin.twice || p.beta != run_params.beta ||
      p.weight() != run_params.weight() || p.max_bridges != run_params.max_bridges) {
    throw InvalidArgument("checkpoint: model parameters differ from the requested run");
  }
  LoopChain ch(p);
  ch.steps_ = r.u(8);
  ch.accepted_ = r.u(8);
  const auto nw = r.u(4);
  std::ostringstream os;
  for (std::uint64_t i = 0; i < nw; ++i) os << r.u(8) << ' ';
  std::istringstream is(os.str());
  is >> ch.rng_;
  if (!is) throw InvalidArgument("checkpoint: corrupt generator state");
  const auto nb = r.u(8);
  for (std::uint64_t i = 0; i < nb; ++i) {
    const double t = r.f();
    const int e = static_cast<int>(r.u(4));
    ch.c_.bridges.push_back({t, e});
  }
  if (r.at != s.size()) throw InvalidArgument("checkpoint: trailing bytes");
  ch.c_.validate();
  ch.loops_ = count_loops(ch.c_);
  return ch;
}

/// Runs burn-in then records every `thin`-th configuration's loop decomposition.
inline void mcmc_sample(const ChainParams& p, const std::function<void(const BridgeConfig&, const LoopDecomposition&)>& visit,
                        int cut = -1) {
  LoopChain ch(p);
  ch.run(p.burn_in);
  for (long s = p.burn_in; s + p.thin <= p.n_steps; s += p.thin) {
    ch.run(p.thin);
    visit(ch.config(), trace_loops(ch.config(), cut));
  }
}

inline std::vector<LoopDecomposition> mcmc_sample(const ChainParams& p, int cut = -1) {
  std::vector<LoopDecomposition> out;
  mcmc_sample(
      p,
      [&](const BridgeConfig&, const LoopDecomposition& d) {
        out.push_back(d);
        out.back().drop_segments();
      },
      cut);
  return out;
}

/// Per-chain seeds derived from one master seed.
inline std::vector<std::uint64_t> chain_seeds(std::uint64_t seed, int n_chains) {
  std::seed_seq seq{seed};
  std::vector<std::uint32_t> words(2 * n_chains);
  seq.generate(words.begin(), words.end());
  std::vector<std::uint64_t> out(n_chains);
  for (int c = 0; c < n_chains; ++c) out[c] = (static_cast<std::uint64_t>(words[2 * c]) << 32) | words[2 * c + 1];
  return out;
}

/// Independent chains with seeds derived from p.seed, run on up to `threads` threads.
inline std::vector<std::vector<LoopDecomposition>> run_chains(const ChainParams& p, int n_chains, int threads, int cut = -1) {
  if (n_chains < 1) throw InvalidArgument("run_chains: need at least one chain");
  std::vector<std::vector<LoopDecomposition>> out(n_chains);
  const auto seeds = chain_seeds(p.seed, n_chains);
  detail::parallel_for(n_chains, threads, [&](std::size_t c) {
    ChainParams q = p;
    q.seed = seeds[c];
    out[c] = mcmc_sample(q, cut);
  });
  return out;
}

struct MCEstimate {
  double mean = 0.0;
  double stderr_naive = 0.0;  // i.i.d. assumption
  double stderr = 0.0;        // batch means
  long count = 0;
  std::uint64_t seed = 0;

  /// Batch-means estimate; batches never straddle chains.
  static MCEstimate from_chains(const std::vector<std::vector<double>>& series, std::uint64_t seed, int batches_per_chain = 20) {
    MCEstimate e;
    e.seed = seed;
    double sum = 0.0, sum2 = 0.0;
    std::vector<double> bm;
    for (const auto& s : series) {
      e.count += static_cast<long>(s.size());
      for (double v : s) {
        sum += v;
        sum2 += v * v;
      }
      const std::size_t b = std::max<std::size_t>(1, s.size() / batches_per_chain);
      for (std::size_t i = 0; i + b <= s.size(); i += b) {
        if (s.size() - i < 2 * b && i + b != s.size()) {  // fold the remainder into the last batch
          bm.push_back(std::accumulate(s.begin() + i, s.end(), 0.0) / static_cast<double>(s.size() - i));
          break;
        }
        bm.push_back(std::accumulate(s.begin() + i, s.begin() + i + b, 0.0) / static_cast<double>(b));
      }
    }
    if (e.count == 0) throw InvalidArgument("MCEstimate: no samples");
    e.mean = sum / e.count;
    const double var = std::max(0.0, sum2 / e.count - e.mean * e.mean);
    e.stderr_naive = e.count > 1 ? std::sqrt(var / (e.count - 1)) : 0.0;
    if (bm.size() > 1) {
      double acc = 0.0;
      const double bmean = std::accumulate(bm.begin(), bm.end(), 0.0) / bm.size();
      for (double v : bm) acc += (v - bmean) * (v - bmean);
      e.stderr = std::sqrt(acc / (bm.size() - 1) / bm.size());
    }
    return e;
  }
  static MCEstimate from_series(const std::vector<double>& s, std::uint64_t seed, int batches = 20) {
    return from_chains({s}, seed, batches);
  }
};

/// Estimator of omega_beta(S^3_x S^3_y) = (-1)^{|x-y|} c_S P(x ~ y), per sample.
inline std::vector<double> correlation_series(const std::vector<LoopDecomposition>& samples, TwiceSpin s, int x, int y) {
  std::vector<double> v;
  v.reserve(samples.size());
  const double sign = (std::abs(x - y) % 2 == 0) ? 1.0 : -1.0;
  for (const auto& d : samples) {
    if (x < 0 || y < 0 || x >= d.n_sites || y >= d.n_sites) throw InvalidArgument("estimate_correlation: site out of range");
    v.push_back(d.same_loop(x, y) ? sign * loop_constant(s) : 0.0);
  }
  return v;
}

inline MCEstimate estimate_correlation(const std::vector<std::vector<LoopDecomposition>>& chains, TwiceSpin s, int x, int y,
                                       std::uint64_t seed = 0) {
  std::vector<std::vector<double>> series;
  for (const auto& c : chains) series.push_back(correlation_series(c, s, x, y));
  return MCEstimate::from_chains(series, seed);
}

inline MCEstimate estimate_correlation(const std::vector<LoopDecomposition>& samples, TwiceSpin s, int x, int y,
                                       std::uint64_t seed = 0) {
  return MCEstimate::from_series(correlation_series(samples, s, x, y), seed);
}

/// E_nu[(S^+(eps) - S_nu)^2] for the 3-component, with S^+(eps) = sum_{x > cut} e^{-eps (x - cut)} S^x
/// and S_nu the spin on the right half carried by loops that encircle the cut.
inline double conditional_excess_moment(const LoopDecomposition& d, TwiceSpin s, double eps) {
  std::vector<double> amp(d.n_loops, 0.0);
  for (int x = d.cut + 1; x < d.n_sites; ++x) {
    const int id = d.site_loop[x];
    const double c = std::exp(-eps * (x - d.cut)) - (d.loops[id].encircles_cut ? 1.0 : 0.0);
    amp[id] += (x % 2 == 0 ? 1.0 : -1.0) * c;
  }
  double m = 0.0;
  for (double a : amp) m += a * a;
  return loop_constant(s) * m;
}

/// Exact distribution of the 3-component of S_nu for one configuration, keyed by twice the value.
inline std::map<int, double> excess_spin_distribution(const LoopDecomposition& d, TwiceSpin s) {
  std::vector<int> amp(d.n_loops, 0);
  for (int x = d.cut + 1; x < d.n_sites; ++x) {
    const int id = d.site_loop[x];
    if (d.loops[id].encircles_cut) amp[id] += x % 2 == 0 ? 1 : -1;
  }
  std::map<int, double> dist{{0, 1.0}};
  const double p = 1.0 / s.dim();
  for (int a : amp) {
    if (a == 0) continue;
    std::map<int, double> next;
    for (const auto& [v, q] : dist)
      for (int tm = -s.twice; tm <= s.twice; tm += 2) next[v + a * tm] += q * p;
    dist = std::move(next);
  }
  return dist;
}

struct ExcessSpinStats {
  std::vector<double> eps;
  std::vector<MCEstimate> moments;       // E[(S^+(eps) - S_nu)^2]
  std::vector<MCEstimate> differences;   // paired moments[i] - moments[i+1]
  bool decreasing = false;               // every difference exceeds `sigmas` standard errors
  double sigmas = 3.0;
  double intercept = 0.0;                // least-squares line in eps, evaluated at eps = 0
  std::map<int, double> s_nu_distribution;  // twice the value -> probability
};

inline ExcessSpinStats excess_spin_stats(const std::vector<std::vector<LoopDecomposition>>& chains, TwiceSpin s,
                                         const std::vector<double>& eps, std::uint64_t seed = 0, double sigmas = 3.0) {
  if (eps.size() < 2) throw InvalidArgument("excess_spin_stats: need at least two epsilon values");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || (i > 0 && !(eps[i] < eps[i - 1]))) {
      throw InvalidArgument("excess_spin_stats: epsilon list must be positive and decreasing");
    }
  }
  ExcessSpinStats st;
  st.eps = eps;
  st.sigmas = sigmas;
  const std::size_t ne = eps.size();
  std::vector<std::vector<std::vector<double>>> m(ne, std::vector<std::vector<double>>(chains.size()));
  long total = 0;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (const auto& d : chains[c]) {
      for (std::size_t i = 0; i < ne; ++i) m[i][c].push_back(conditional_excess_moment(d, s, eps[i]));
      for (const auto& [v, q] : excess_spin_distribution(d, s)) st.s_nu_distribution[v] += q;
      ++total;
    }
  }
  if (total == 0) throw InvalidArgument("excess_spin_stats: no samples");
  for (auto& [v, q] : st.s_nu_distribution) q /= total;
  for (std::size_t i = 0; i < ne; ++i) st.moments.push_back(MCEstimate::from_chains(m[i], seed));
  st.decreasing = true;
  for (std::size_t i = 0; i + 1 < ne; ++i) {
    std::vector<std::vector<double>> diff(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c)
      for (std::size_t k = 0; k < m[i][c].size(); ++k) diff[c].push_back(m[i][c][k] - m[i + 1][c][k]);
    st.differences.push_back(MCEstimate::from_chains(diff, seed));
    const auto& d = st.differences.back();
    if (!(d.mean > sigmas * d.stderr)) st.decreasing = false;
  }
  std::vector<double> ys;
  for (const auto& e : st.moments) ys.push_back(e.mean);
  st.intercept = linalg::fit_line(eps, ys).intercept;
  return st;
}

/// Partial sums sum_{r <= R} r^3 |omega(S^x0 S^{x0+r})| from loop estimates.
inline std::vector<double> third_moment_partial_sums(const std::vector<std::vector<LoopDecomposition>>& chains, TwiceSpin s,
                                                     int x0) {
  if (chains.empty() || chains.front().empty()) throw InvalidArgument("third_moment_partial_sums: no samples");
  const int n = chains.front().front().n_sites;
  std::vector<double> out;
  double acc = 0.0;
  for (int r = 0; x0 + r < n; ++r) {
    acc += std::pow(r, 3) * std::abs(estimate_correlation(chains, s, x0, x0 + r).mean);
    out.push_back(acc);
  }
  return out;
}

}  // namespace edgerep
