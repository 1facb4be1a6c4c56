#pragma once

#include <filesystem>

#include "ggda/graph.hpp"

namespace ggda {

struct BundleOptions {
  StructureMode structure = StructureMode::adjacency;
  HistogramMode histogram = HistogramMode::uniform;
};

/// Graph bundle directory layout:
///   meta.txt      n=<int>, d=<int>, classes=<int> (one per line)
///   edges.txt     "u v" per line, 0-indexed, u < v, no duplicates
///   features.f32  little-endian float32, row-major n x d
///   labels.txt    one integer per line, -1 for unlabeled
///
/// Malformed bundles raise DataError with "<file>:<line>: <reason>".
AttributedGraph load_bundle(const std::filesystem::path& dir, const BundleOptions& options = {});

/// Writes `graph` as a bundle, creating `dir` if needed.
void save_bundle(const AttributedGraph& graph, const std::filesystem::path& dir);

/// Raw little-endian float32 matrix dump (row-major), as used for couplings
/// and checkpoints.
void write_f32(const std::filesystem::path& path, const Matrix& m);
Matrix read_f32(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols);

}  // namespace ggda
