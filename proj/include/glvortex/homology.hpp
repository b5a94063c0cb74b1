#pragma once

// Homology generators via tree-cotree: a spanning tree of the vertex graph, a
// spanning cotree of the dual graph over the remaining edges, and one cycle
// per leftover edge. On a genus-g closed surface without exclusions this
// yields exactly 2g generators. With excluded vertices every returned cycle
// stays clear of them (used to keep period-integration cycles away from
// vortex cores); cycles that merely encircle an excluded patch may then also
// appear, and callers select the subset they need by period rank.

#include "surface.hpp"

#include <queue>
#include <unordered_map>
#include <vector>

namespace glv {

struct HomologyLoops {
  std::vector<VectorXd> cochain;  // each size ne, entries in {-1, 0, +1}
};

inline HomologyLoops homology_loops(const SurfaceGeometry& g,
                                    const std::vector<int>& avoid = {}) {
  const int nv = g.nv(), ne = g.ne(), nf = g.nf();
  std::vector<char> excluded(nv, 0);
  for (int v : avoid) excluded.at(v) = 1;

  std::vector<std::vector<std::pair<int, int>>> adj(nv);  // (neighbor, edge)
  for (int e = 0; e < ne; ++e) {
    adj[g.E(e, 0)].push_back({g.E(e, 1), e});
    adj[g.E(e, 1)].push_back({g.E(e, 0), e});
  }

  // primal spanning tree over the non-excluded vertices
  std::vector<int> parent_v(nv, -1), parent_e(nv, -1);
  std::vector<char> reached(nv, 0), in_tree(ne, 0);
  int root = -1;
  for (int v = 0; v < nv && root < 0; ++v)
    if (!excluded[v]) root = v;
  if (root < 0) throw std::runtime_error("homology_loops: all vertices excluded");
  std::queue<int> bfs;
  bfs.push(root);
  reached[root] = 1;
  while (!bfs.empty()) {
    const int u = bfs.front();
    bfs.pop();
    for (const auto& [nb, e] : adj[u]) {
      if (excluded[nb] || reached[nb]) continue;
      reached[nb] = 1;
      parent_v[nb] = u;
      parent_e[nb] = e;
      in_tree[e] = 1;
      bfs.push(nb);
    }
  }
  for (int v = 0; v < nv; ++v)
    if (!excluded[v] && !reached[v])
      throw std::runtime_error(
          "homology_loops: exclusions disconnect the vertex graph");

  // dual spanning cotree over edges not in the tree; edges touching excluded
  // vertices are offered first so the cotree consumes them when possible
  std::vector<char> face_seen(nf, 0), in_cotree(ne, 0);
  std::queue<int> dual;
  dual.push(0);
  face_seen[0] = 1;
  while (!dual.empty()) {
    const int f = dual.front();
    dual.pop();
    for (int pass = 0; pass < 2; ++pass) {
      for (int c = 0; c < 3; ++c) {
        const int e = g.FE(f, c);
        if (in_tree[e]) continue;
        const bool blocked = excluded[g.E(e, 0)] || excluded[g.E(e, 1)];
        if ((pass == 0) != blocked) continue;
        const int fn = g.EF(e, 0) == f ? g.EF(e, 1) : g.EF(e, 0);
        if (face_seen[fn]) continue;
        face_seen[fn] = 1;
        in_cotree[e] = 1;
        dual.push(fn);
      }
    }
  }

  const auto add_step = [&](VectorXd& l, int from, int e) {
    l[e] += g.E(e, 0) == from ? 1.0 : -1.0;
  };

  HomologyLoops out;
  for (int estar = 0; estar < ne; ++estar) {
    if (in_tree[estar] || in_cotree[estar]) continue;
    const int tail = g.E(estar, 0), head = g.E(estar, 1);
    // cycles fully inside an excluded patch cannot be closed through the
    // tree; they are null-homotopic boundaries of the patch and are dropped
    if (excluded[tail] || excluded[head]) continue;

    VectorXd l = VectorXd::Zero(ne);
    l[estar] = 1.0;  // traverse tail -> head (canonical orientation)
    // lowest common ancestor of head and tail in the tree
    std::unordered_map<int, char> on_head_chain;
    for (int v = head; v != -1; v = parent_v[v]) on_head_chain[v] = 1;
    int meet = tail;
    while (!on_head_chain.count(meet)) meet = parent_v[meet];
    // head -> meet (up the tree), then meet -> tail (down the tree)
    for (int v = head; v != meet; v = parent_v[v]) add_step(l, v, parent_e[v]);
    std::vector<int> down;
    for (int v = tail; v != meet; v = parent_v[v]) down.push_back(v);
    for (auto it = down.rbegin(); it != down.rend(); ++it)
      add_step(l, parent_v[*it], parent_e[*it]);
    out.cochain.push_back(std::move(l));
  }

  if (avoid.empty() &&
      static_cast<int>(out.cochain.size()) != 2 * g.genus)
    throw std::runtime_error("homology_loops: generator count != 2 genus");
  return out;
}

// Signed sum of a 1-cochain along a cycle.
inline double loop_integral(const VectorXd& cycle, const VectorXd& omega) {
  return cycle.dot(omega);
}

}  // namespace glv
