#pragma once

// Benchmark datasets, the closed-form oracle material and invariant-plane grids.
//
// CSV layout (UTF-8, comma separated):
//   # dataset=<name> measure=<nominal|cauchy>
//   path,mode,lambda1[,lambda2|gamma],stress1[,stress2],split
//   <rows>

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "mechanics.hpp"
#include "model.hpp"

namespace gencann {

enum class Split { train, test };

struct DataPoint {
  double lambda1 = 1.0;
  double second = 0.0; ///< lambda2 or gamma depending on the dataset columns
  std::vector<double> stress;
  Split split = Split::train;
};

struct LoadingPath {
  std::string name;
  LoadingKind kind = LoadingKind::uniaxial_tension;
  std::vector<DataPoint> points;

  std::size_t count(Split s) const {
    return std::size_t(std::count_if(points.begin(), points.end(), [&](const auto& p) { return p.split == s; }));
  }
};

enum class SecondColumn { none, lambda2, gamma };

struct Dataset {
  std::string name;
  StressMeasure measure = StressMeasure::nominal;
  SecondColumn second_column = SecondColumn::none;
  int stress_columns = 1;
  std::vector<LoadingPath> paths;

  std::size_t point_count() const {
    std::size_t n = 0;
    for (const auto& p : paths) n += p.points.size();
    return n;
  }
  bool has_test_points() const {
    for (const auto& p : paths)
      if (p.count(Split::test)) return true;
    return false;
  }
};

/// Deformation state of a point on a path.
inline LoadingMode loading_mode(const Dataset& d, const LoadingPath& path, const DataPoint& pt) {
  LoadingMode m;
  m.kind = path.kind;
  m.free_direction = 2;
  switch (path.kind) {
  case LoadingKind::simple_shear:
    m.magnitude = d.second_column == SecondColumn::gamma ? pt.second : pt.lambda1;
    break;
  case LoadingKind::biaxial:
    m.magnitude = pt.lambda1;
    m.second_magnitude = pt.second;
    break;
  default: m.magnitude = pt.lambda1; break;
  }
  return m;
}

/// Column header expected for a dataset layout.
inline std::string column_header(SecondColumn second, int stress_columns) {
  std::string h = "path,mode,lambda1";
  if (second == SecondColumn::lambda2) h += ",lambda2";
  if (second == SecondColumn::gamma) h += ",gamma";
  h += ",stress1";
  if (stress_columns == 2) h += ",stress2";
  return h + ",split";
}

struct DatasetSchema {
  std::string name;
  StressMeasure measure;
  SecondColumn second;
  int stress_columns;
  std::size_t paths;           ///< 0 = unchecked
  std::size_t points_per_path; ///< 0 = unchecked
  std::size_t total_points;    ///< 0 = unchecked
};

inline std::optional<DatasetSchema> known_schema(std::string_view name) {
  if (name == "brain") return DatasetSchema{"brain", StressMeasure::nominal, SecondColumn::gamma, 1, 3, 17, 51};
  if (name == "treloar") return DatasetSchema{"treloar", StressMeasure::nominal, SecondColumn::none, 1, 3, 15, 45};
  if (name == "synthetic_rubber")
    return DatasetSchema{"synthetic_rubber", StressMeasure::nominal, SecondColumn::none, 1, 3, 15, 45};
  if (name == "skin") return DatasetSchema{"skin", StressMeasure::cauchy, SecondColumn::lambda2, 2, 5, 0, 402};
  return std::nullopt;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline double parse_cell(const std::string& cell, long row, const char* column) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw IngestionError(std::string("non-numeric value '") + t + "' in column " + column, row);
  return v;
}

inline std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

} // namespace detail

/// Parse dataset text. `schema_name` overrides the header name for count checks;
/// names without a known schema are accepted with layout-only checks.
inline Dataset parse_dataset(std::istream& in, std::optional<std::string> schema_name = std::nullopt) {
  std::string line;
  long row = 1;
  if (!std::getline(in, line)) throw IngestionError("empty file", row);
  Dataset d;
  {
    std::istringstream meta(line);
    std::string hash, a, b;
    meta >> hash >> a >> b;
    if (hash != "#" || a.rfind("dataset=", 0) != 0 || b.rfind("measure=", 0) != 0)
      throw IngestionError("expected header '# dataset=<name> measure=<nominal|cauchy>'", row);
    d.name = a.substr(8);
    const auto m = stress_measure_from_string(b.substr(8));
    if (!m) throw IngestionError("unknown stress measure '" + b.substr(8) + "'", row);
    d.measure = *m;
  }
  ++row;
  if (!std::getline(in, line)) throw IngestionError("missing column header", row);
  const std::string header = detail::trim(line.back() == '\r' ? line.substr(0, line.size() - 1) : line);
  bool matched = false;
  for (auto sc : {SecondColumn::none, SecondColumn::lambda2, SecondColumn::gamma})
    for (int ns : {1, 2})
      if (header == column_header(sc, ns)) {
        d.second_column = sc;
        d.stress_columns = ns;
        matched = true;
      }
  if (!matched) throw IngestionError("unrecognized column header '" + header + "'", row);

  const std::size_t ncol = 3 + (d.second_column != SecondColumn::none ? 1 : 0) + std::size_t(d.stress_columns) + 1;
  std::map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != ncol)
      throw IngestionError("expected " + std::to_string(ncol) + " columns, found " + std::to_string(cells.size()), row);
    const std::string path = detail::trim(cells[0]);
    if (path.empty()) throw IngestionError("empty path name", row);
    const auto kind = loading_kind_from_string(detail::trim(cells[1]));
    if (!kind) throw IngestionError("unknown loading mode '" + detail::trim(cells[1]) + "'", row);
    DataPoint pt;
    std::size_t c = 2;
    pt.lambda1 = detail::parse_cell(cells[c++], row, "lambda1");
    if (d.second_column != SecondColumn::none)
      pt.second = detail::parse_cell(cells[c++], row, d.second_column == SecondColumn::gamma ? "gamma" : "lambda2");
    for (int s = 0; s < d.stress_columns; ++s)
      pt.stress.push_back(detail::parse_cell(cells[c++], row, s == 0 ? "stress1" : "stress2"));
    const std::string split = detail::trim(cells[c]);
    if (split == "train")
      pt.split = Split::train;
    else if (split == "test")
      pt.split = Split::test;
    else
      throw IngestionError("split must be train or test, found '" + split + "'", row);
    if (*kind == LoadingKind::biaxial && d.second_column != SecondColumn::lambda2)
      throw IngestionError("biaxial rows need a lambda2 column", row);

    auto [it, inserted] = index.emplace(path, d.paths.size());
    if (inserted) d.paths.push_back({path, *kind, {}});
    auto& p = d.paths[it->second];
    if (p.kind != *kind) throw IngestionError("path '" + path + "' mixes loading modes", row);
    p.points.push_back(std::move(pt));
    try {
      const Tensor3 F = deformation_gradient(loading_mode(d, p, p.points.back()));
      if (std::abs(F.determinant() - 1.0) > 1e-12) throw IngestionError("deformation is not isochoric", row);
    } catch (const InvalidInput& e) {
      throw IngestionError(e.what(), row);
    }
  }
  if (d.paths.empty()) throw IngestionError("dataset has no data rows", row);

  const std::string sname = schema_name.value_or(d.name);
  if (const auto schema = known_schema(sname)) {
    if (d.measure != schema->measure)
      throw IngestionError(sname + " data must declare measure=" + std::string(to_string(schema->measure)));
    if (d.second_column != schema->second || d.stress_columns != schema->stress_columns)
      throw IngestionError(sname + " data must use columns '" +
                           column_header(schema->second, schema->stress_columns) + "'");
    if (schema->paths && d.paths.size() != schema->paths)
      throw IngestionError(sname + " data must have " + std::to_string(schema->paths) + " paths, found " +
                           std::to_string(d.paths.size()));
    if (schema->points_per_path)
      for (const auto& p : d.paths)
        if (p.points.size() != schema->points_per_path)
          throw IngestionError("path '" + p.name + "' must have " + std::to_string(schema->points_per_path) +
                               " points, found " + std::to_string(p.points.size()));
    if (schema->total_points && d.point_count() != schema->total_points)
      throw IngestionError(sname + " data must have " + std::to_string(schema->total_points) + " points, found " +
                           std::to_string(d.point_count()));
    if (sname == "skin")
      for (const auto& p : d.paths)
        for (std::size_t k = 1; k < p.points.size(); ++k) {
          auto drive = [](const DataPoint& q) { return std::max(q.lambda1, q.second); };
          if (!(drive(p.points[k]) > drive(p.points[k - 1])))
            throw IngestionError("path '" + p.name + "': applied stretch must increase monotonically");
        }
  }
  return d;
}

inline Dataset load_dataset(const std::string& file, std::optional<std::string> schema_name = std::nullopt) {
  std::ifstream in(file);
  if (!in) throw IngestionError("cannot open dataset '" + file + "'");
  return parse_dataset(in, std::move(schema_name));
}

/// Inverse of parse_dataset; numbers use the shortest round-trip representation.
inline std::string write_dataset(const Dataset& d) {
  std::ostringstream o;
  o << "# dataset=" << d.name << " measure=" << to_string(d.measure) << "\n"
    << column_header(d.second_column, d.stress_columns) << "\n";
  for (const auto& p : d.paths)
    for (const auto& pt : p.points) {
      o << p.name << "," << to_string(p.kind) << "," << detail::shortest(pt.lambda1);
      if (d.second_column != SecondColumn::none) o << "," << detail::shortest(pt.second);
      for (double s : pt.stress) o << "," << detail::shortest(s);
      o << "," << (pt.split == Split::train ? "train" : "test") << "\n";
    }
  return o.str();
}

/// Copy of `d` restricted to the paths accepted by `keep`.
template <class Pred>
Dataset filter_paths(const Dataset& d, Pred keep) {
  Dataset out = d;
  out.paths.clear();
  for (const auto& p : d.paths)
    if (keep(p)) out.paths.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------
// oracle material: Psi = c10 (I1 - 3) + c01 (I2 - 3) + c20 (I1 - 3)^2

struct OracleMaterial {
  double c10 = 0.18;
  double c01 = 0.02;
  double c20 = 0.005;

  double energy(const Tensor3& F) const {
    const auto inv = invariants(right_cauchy_green(F));
    return c10 * (inv.i1 - 3.0) + c01 * (inv.i2 - 3.0) + c20 * (inv.i1 - 3.0) * (inv.i1 - 3.0);
  }

  Tensor3 piola_iso(const Tensor3& F) const {
    const auto inv = invariants(right_cauchy_green(F));
    const auto g = invariant_gradients(F);
    return (c10 + 2.0 * c20 * (inv.i1 - 3.0)) * g.d_i1 + c01 * g.d_i2;
  }
};

inline StressPrediction synthetic_ground_truth(const Tensor3& F, const OracleMaterial& mat, int free_direction,
                                               StressMeasure m = StressMeasure::nominal,
                                               std::vector<Component> components = {{0, 0}}) {
  if (std::abs(F.determinant() - 1.0) > 1e-10) throw InvalidInput("oracle requires det(F) = 1");
  StressPrediction out;
  out.measure = m;
  out.tensor = finish_stress(F, mat.piola_iso(F), free_direction, m);
  for (auto c : components) out.components.emplace_back(component_name(m, c), out.tensor(c.first, c.second));
  return out;
}

/// Noise-free oracle dataset: uniaxial, equibiaxial and pure shear paths, `n` points each up to lambda_max.
inline Dataset oracle_dataset(const OracleMaterial& mat, double lambda_max, int n, std::string name = "oracle") {
  Dataset d;
  d.name = std::move(name);
  d.measure = StressMeasure::nominal;
  for (auto kind : {LoadingKind::uniaxial_tension, LoadingKind::equibiaxial, LoadingKind::pure_shear}) {
    LoadingPath p{std::string(to_string(kind)), kind, {}};
    for (int i = 0; i < n; ++i) {
      DataPoint pt;
      pt.lambda1 = 1.0 + (lambda_max - 1.0) * double(i) / double(n - 1);
      const Tensor3 F = deformation_gradient(loading_mode(d, p, pt));
      pt.stress = {synthetic_ground_truth(F, mat, 2)[0]};
      p.points.push_back(pt);
    }
    d.paths.push_back(std::move(p));
  }
  return d;
}

// ---------------------------------------------------------------------------
// invariant plane

struct GridPoint {
  int row = 0, col = 0; ///< row indexes lambda1, col runs uniaxial (0) -> equibiaxial (n-1)
  double lambda1 = 1.0, lambda2 = 1.0;
  Tensor3 F = Tensor3::Identity();
  double i1 = 3.0, i2 = 3.0;
};

/// Biaxial states diag(l1, l2, 1/(l1 l2)) with l1 in [1, lambda_max] and
/// l2 = l1^t, t in [-1/2, 1]: t = -1/2 is uniaxial tension, t = 1 equibiaxial,
/// t = 0 pure shear (hit exactly when 3 divides n - 1).
inline std::vector<GridPoint> invariant_plane_grid(double lambda_max, int n) {
  if (!(lambda_max > 1.0)) throw InvalidInput("lambda_max must exceed 1");
  if (n < 2) throw InvalidInput("grid needs n >= 2");
  std::vector<GridPoint> g;
  g.reserve(std::size_t(n) * std::size_t(n));
  for (int i = 0; i < n; ++i) {
    const double l1 = 1.0 + (lambda_max - 1.0) * double(i) / double(n - 1);
    for (int j = 0; j < n; ++j) {
      GridPoint p;
      p.row = i;
      p.col = j;
      p.lambda1 = l1;
      const double t = -0.5 + 1.5 * double(j) / double(n - 1);
      p.lambda2 = j == n - 1 ? l1 : (j == 0 ? 1.0 / std::sqrt(l1) : std::pow(l1, t));
      p.F = deformation_gradient(LoadingMode::biaxial(p.lambda1, p.lambda2));
      const auto inv = invariants(right_cauchy_green(p.F));
      p.i1 = inv.i1;
      p.i2 = inv.i2;
      g.push_back(p);
    }
  }
  return g;
}

} // namespace gencann
