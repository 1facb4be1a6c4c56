#pragma once

#include <vector>

#include "ggda/graph.hpp"
#include "ggda/rng.hpp"

namespace testgraphs {

inline ggda::AttributedGraph random_graph(int n, int d, double density, ggda::Rng& rng,
                                          bool labeled = false, int n_classes = 2) {
  ggda::Matrix x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = ggda::standard_normal(rng);
  std::vector<ggda::Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (ggda::uniform01(rng) < density) edges.push_back({u, v});
  std::vector<int> labels;
  if (labeled)
    for (int i = 0; i < n; ++i)
      labels.push_back(static_cast<int>(ggda::uniform_index(rng, static_cast<std::size_t>(n_classes))));
  return ggda::AttributedGraph(x, edges, labels, n_classes);
}

}  // namespace testgraphs
