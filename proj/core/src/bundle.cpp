#include "ggda/bundle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "ggda/errors.hpp"

namespace ggda {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const fs::path& file, std::size_t line, const std::string& why) {
  std::ostringstream os;
  os << file.filename().string();
  if (line > 0) os << ':' << line;
  os << ": " << why;
  throw DataError(os.str());
}

std::ifstream open_input(const fs::path& file, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(file, mode);
  if (!in) throw DataError("cannot open " + file.string());
  return in;
}

bool parse_int(const std::string& text, long long& out) {
  std::istringstream is(text);
  is >> out;
  if (!is) return false;
  is >> std::ws;
  return is.eof();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

}  // namespace

void write_f32(const fs::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto f = static_cast<float>(m(i, j));
      std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(f));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw DataError("short write to " + path.string());
}

Matrix read_f32(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
  auto in = open_input(path, std::ios::binary);
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::uint64_t>(in.tellg());
  const auto expected = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) * 4u;
  if (bytes != expected) {
    fail(path, 0, "expected " + std::to_string(expected) + " bytes, found " +
                      std::to_string(bytes));
  }
  in.seekg(0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::uint32_t bits = 0;
      in.read(reinterpret_cast<char*>(&bits), sizeof bits);
      const float f = std::bit_cast<float>(to_little(bits));
      if (!std::isfinite(f)) fail(path, 0, "non-finite value at row " + std::to_string(i));
      m(i, j) = f;
    }
  }
  return m;
}

AttributedGraph load_bundle(const fs::path& dir, const BundleOptions& options) {
  if (!fs::is_directory(dir)) throw DataError("bundle directory not found: " + dir.string());

  const fs::path meta_path = dir / "meta.txt";
  std::map<std::string, long long> meta;
  {
    auto in = open_input(meta_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(meta_path, lineno, "expected key=value");
      const std::string key = trim(line.substr(0, eq));
      long long value = 0;
      if (!parse_int(trim(line.substr(eq + 1)), value)) {
        fail(meta_path, lineno, "value of '" + key + "' is not an integer");
      }
      if (key != "n" && key != "d" && key != "classes") {
        fail(meta_path, lineno, "unknown key '" + key + "'");
      }
      if (!meta.emplace(key, value).second) fail(meta_path, lineno, "repeated key '" + key + "'");
    }
  }
  for (const char* key : {"n", "d", "classes"}) {
    if (!meta.count(key)) fail(meta_path, 0, std::string("missing key '") + key + "'");
  }
  const long long n = meta["n"];
  const long long d = meta["d"];
  const long long classes = meta["classes"];
  if (n < 0 || d < 0 || classes < 0) fail(meta_path, 0, "negative size");

  const fs::path edges_path = dir / "edges.txt";
  std::vector<Edge> edges;
  {
    auto in = open_input(edges_path);
    std::set<std::pair<int, int>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = trim(line);
      if (line.empty()) continue;
      std::istringstream is(line);
      long long u = 0;
      long long v = 0;
      if (!(is >> u >> v) || !(is >> std::ws).eof()) fail(edges_path, lineno, "expected 'u v'");
      if (u < 0 || v < 0 || u >= n || v >= n) fail(edges_path, lineno, "vertex id out of range");
      if (u >= v) fail(edges_path, lineno, "edge must satisfy u < v");
      if (!seen.emplace(static_cast<int>(u), static_cast<int>(v)).second) {
        fail(edges_path, lineno, "duplicate edge");
      }
      edges.push_back({static_cast<int>(u), static_cast<int>(v)});
    }
  }

  Matrix features = read_f32(dir / "features.f32", n, d);

  const fs::path labels_path = dir / "labels.txt";
  std::vector<int> labels;
  {
    auto in = open_input(labels_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = trim(line);
      if (line.empty()) continue;
      long long y = 0;
      if (!parse_int(line, y)) fail(labels_path, lineno, "label is not an integer");
      if (y != kUnlabeled && (y < 0 || y >= classes)) {
        fail(labels_path, lineno, "label outside [0, classes) and not -1");
      }
      labels.push_back(static_cast<int>(y));
    }
    if (static_cast<long long>(labels.size()) != n) {
      fail(labels_path, 0, "expected " + std::to_string(n) + " labels, found " +
                               std::to_string(labels.size()));
    }
  }

  try {
    return AttributedGraph(std::move(features), std::move(edges), std::move(labels),
                           static_cast<int>(classes), options.structure, options.histogram);
  } catch (const InvalidArgument& e) {
    throw DataError(dir.string() + ": " + e.what());
  }
}

void save_bundle(const AttributedGraph& graph, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "meta.txt");
    out << "n=" << graph.size() << "\nd=" << graph.dim() << "\nclasses=" << graph.n_classes()
        << '\n';
    if (!out) throw DataError("cannot write " + (dir / "meta.txt").string());
  }
  {
    std::vector<Edge> edges = graph.edges();
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    std::ofstream out(dir / "edges.txt");
    for (const auto& e : edges) out << e.u << ' ' << e.v << '\n';
    if (!out) throw DataError("cannot write " + (dir / "edges.txt").string());
  }
  write_f32(dir / "features.f32", graph.features());
  {
    std::ofstream out(dir / "labels.txt");
    for (int y : graph.labels()) out << y << '\n';
    if (!out) throw DataError("cannot write " + (dir / "labels.txt").string());
  }
}

}  // namespace ggda
