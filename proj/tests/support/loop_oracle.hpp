#pragma once

// Loop connectivity by flood fill on a fine space-time grid, independent of the
// segment bookkeeping in the library.

#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "edgerep/loop_mc.hpp"

namespace oracle {

struct GridLoops {
  int n_loops = 0;
  std::vector<int> site_loop;  // component of (x, t = 0+)
  std::vector<bool> winds;     // per component: lifted time differs on revisit
};

/// Time is cut into K cells; cell k covers [k, k+1) * beta / K. Bridges sharing a gap must touch disjoint lines.
inline GridLoops grid_loops(const edgerep::BridgeConfig& c, int K = 4096) {
  const int n = c.n_sites;
  // gap after cell k holds the bridges with floor(t K / beta) == k; t = 0 would sit at the wrap gap
  std::vector<std::vector<int>> gap_edges(K);
  for (const auto& b : c.bridges) {
    const int k = static_cast<int>(std::floor(b.t / c.beta * K));
    if (k < 0 || k >= K) throw std::runtime_error("grid_loops: bridge time out of range");
    for (int e : gap_edges[k])
      if (std::abs(e - b.edge) < 2) throw std::runtime_error("grid_loops: grid too coarse");
    gap_edges[k].push_back(b.edge);
  }
  // cell k on the grid sits just after gap k - 1, so bridge in gap k separates cell k from cell k+1
  auto id = [&](int x, int k) { return x * K + k; };
  std::vector<std::vector<std::pair<int, int>>> adj(n * K);  // (neighbour, lift increment)
  auto link = [&](int a, int b, int dh) {
    adj[a].push_back({b, dh});
    adj[b].push_back({a, -dh});
  };
  for (int k = 0; k < K; ++k) {
    const int k1 = (k + 1) % K;
    std::vector<char> cut(n, 0);
    for (int e : gap_edges[k]) {
      cut[e] = cut[e + 1] = 1;
      link(id(e, k), id(e + 1, k), 0);    // below the bridge
      link(id(e, k1), id(e + 1, k1), 0);  // above the bridge
    }
    for (int x = 0; x < n; ++x)
      if (!cut[x]) link(id(x, k), id(x, k1), 1);
  }
  GridLoops g;
  std::vector<int> comp(n * K, -1);
  std::vector<long> lift(n * K, 0);
  for (int s = 0; s < n * K; ++s) {
    if (comp[s] >= 0) continue;
    const int cid = g.n_loops++;
    bool winds = false;
    std::deque<int> q{s};
    comp[s] = cid;
    while (!q.empty()) {
      const int a = q.front();
      q.pop_front();
      for (auto [b, dh] : adj[a]) {
        if (comp[b] < 0) {
          comp[b] = cid;
          lift[b] = lift[a] + dh;
          q.push_back(b);
        } else if (lift[b] != lift[a] + dh) {
          winds = true;
        }
      }
    }
    g.winds.push_back(winds);
  }
  for (int x = 0; x < n; ++x) g.site_loop.push_back(comp[id(x, 0)]);
  return g;
}

}  // namespace oracle
