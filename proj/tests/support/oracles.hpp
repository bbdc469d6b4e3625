#pragma once

// Independent reference computations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "occur/tensor.hpp"

namespace occur::oracle {

inline std::vector<double> random_masses(Rng& rng, std::size_t bins, double zero_probability = 0.2) {
  std::vector<double> m(bins);
  double total = 0.0;
  for (double& v : m) {
    v = rng.uniform01() < zero_probability ? 0.0 : rng.uniform01();
    total += v;
  }
  if (total == 0.0) {
    m[rng.uniform_index(bins)] = 1.0;
    return m;
  }
  for (double& v : m) v /= total;
  // push the rounding residue into the largest entry
  double sum = std::accumulate(m.begin(), m.end(), 0.0);
  *std::max_element(m.begin(), m.end()) += 1.0 - sum;
  return m;
}

/// Minimum transport cost by enumerating basic feasible solutions: every
/// vertex of the transportation polytope is supported on a spanning tree of
/// the complete bipartite graph with 2b-1 edges. Feasible for b <= 5.
inline double transport_by_vertex_enumeration(const std::vector<double>& p, const std::vector<double>& q,
                                              const std::vector<double>& cost) {
  const std::size_t b = p.size();
  const std::size_t edges = b * b;
  const std::size_t pick = 2 * b - 1;
  double best = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> chosen(pick);
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  std::vector<int> parent(2 * b);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
    return x;
  };

  while (true) {
    // spanning-tree test with union-find
    std::iota(parent.begin(), parent.end(), 0);
    bool tree = true;
    for (std::size_t e : chosen) {
      int a = find(static_cast<int>(e / b));
      int c = find(static_cast<int>(b + e % b));
      if (a == c) {
        tree = false;
        break;
      }
      parent[static_cast<std::size_t>(a)] = c;
    }
    if (tree) {
      // peel leaves to recover the unique flow on the tree
      std::vector<double> supply(p), demand(q);
      std::vector<bool> used(pick, false);
      std::vector<double> flow(pick, 0.0);
      bool feasible = true;
      for (std::size_t round = 0; round < pick && feasible; ++round) {
        std::vector<int> degree(2 * b, 0);
        for (std::size_t k = 0; k < pick; ++k) {
          if (used[k]) continue;
          ++degree[chosen[k] / b];
          ++degree[b + chosen[k] % b];
        }
        bool progressed = false;
        for (std::size_t k = 0; k < pick && !progressed; ++k) {
          if (used[k]) continue;
          std::size_t i = chosen[k] / b, j = chosen[k] % b;
          if (degree[i] == 1) {
            flow[k] = supply[i];
          } else if (degree[b + j] == 1) {
            flow[k] = demand[j];
          } else {
            continue;
          }
          supply[i] -= flow[k];
          demand[j] -= flow[k];
          used[k] = true;
          progressed = true;
          if (flow[k] < -1e-12) feasible = false;
        }
        if (!progressed) feasible = false;
      }
      if (feasible) {
        double total = 0.0;
        for (std::size_t k = 0; k < pick; ++k) total += flow[k] * cost[chosen[k]];
        best = std::min(best, total);
      }
    }
    // next combination
    std::size_t i = pick;
    while (i > 0 && chosen[i - 1] == edges - pick + (i - 1)) --i;
    if (i == 0) break;
    ++chosen[i - 1];
    for (std::size_t j = i; j < pick; ++j) chosen[j] = chosen[j - 1] + 1;
  }
  return best;
}

/// Central-difference derivative of f at x along coordinate i.
template <typename F>
double central_difference(F&& f, std::vector<double> x, std::size_t i, double h) {
  double orig = x[i];
  x[i] = orig + h;
  double up = f(x);
  x[i] = orig - h;
  double down = f(x);
  return (up - down) / (2.0 * h);
}

}  // namespace occur::oracle
