// Writes the four benchmark CSVs. The original measurements are not bundled, so
// each file is sampled from a published closed-form law fitted to that material
// class, at the protocols and point counts of the original experiments, with 1%
// seeded multiplicative noise (none for synthetic_rubber, which is the oracle).
//
//   make_datasets [out_dir]

#include <gencann/data.hpp>

#include <Eigen/Eigenvalues>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

using namespace gencann;

namespace {

// Psi = sum_p c_p (l1^a_p + l2^a_p + l3^a_p - 3) over principal stretches.
struct Ogden {
  std::vector<std::pair<double, double>> terms; // (c_p, a_p)

  Tensor3 piola_iso(const Tensor3& F) const {
    Eigen::SelfAdjointEigenSolver<Tensor3> es(F.transpose() * F);
    Tensor3 S = Tensor3::Zero();
    for (int a = 0; a < 3; ++a) {
      const double l = std::sqrt(es.eigenvalues()[a]);
      double dpsi = 0.0;
      for (auto [c, al] : terms) dpsi += c * al * std::pow(l, al - 1.0);
      S += dpsi / l * es.eigenvectors().col(a) * es.eigenvectors().col(a).transpose();
    }
    return F * S;
  }
};

// Psi = mu/2 (I1 - 3) + k1 / (2 k2) (exp(k2 (I4 - 1)^2) - 1)
struct Hgo {
  double mu = 0.05, k1 = 0.2, k2 = 5.0, angle = 0.6;

  Tensor3 piola_iso(const Tensor3& F) const {
    const std::optional<Tensor3> N = FiberDirection{angle}.structure_tensor();
    const auto inv = invariants(right_cauchy_green(F), N);
    const auto g = invariant_gradients(F, N);
    const double e4 = *inv.i4 - 1.0;
    return 0.5 * mu * g.d_i1 + k1 * e4 * std::exp(k2 * e4 * e4) * g.d_i4;
  }
};

class Noise {
public:
  Noise(std::uint64_t seed, double rel) : rng_(seed), rel_(rel) {}
  double operator()(double v) { return rel_ > 0 ? v * (1.0 + rel_ * n_(rng_)) : v; }

private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> n_;
  double rel_;
};

template <class Law>
std::vector<double> stress(const Law& law, const Dataset& d, const LoadingPath& p, const DataPoint& pt) {
  const LoadingMode mode = loading_mode(d, p, pt);
  const Tensor3 F = deformation_gradient(mode);
  const Tensor3 s = finish_stress(F, law.piola_iso(F), mode.free_direction, d.measure);
  std::vector<double> out;
  for (auto c : output_components(mode, d.stress_columns)) out.push_back(s(c.first, c.second));
  return out;
}

// n stretches strictly above 1, evenly spaced up to lmax
double ramp(double lmax, int i, int n) { return 1.0 + (lmax - 1.0) * double(i + 1) / double(n); }

// Treloar-fit three-term Ogden law (mu_p/a_p convention, MPa).
Dataset treloar() {
  const Ogden law{{{0.63 / 1.3, 1.3}, {0.0012 / 5.0, 5.0}, {-0.01 / -2.0, -2.0}}};
  Dataset d;
  d.name = "treloar";
  Noise noise(1001, 0.01);
  const std::pair<LoadingKind, double> protocols[] = {
      {LoadingKind::uniaxial_tension, 7.6}, {LoadingKind::equibiaxial, 4.4}, {LoadingKind::pure_shear, 4.9}};
  for (auto [kind, lmax] : protocols) {
    LoadingPath p{std::string(to_string(kind)), kind, {}};
    for (int i = 0; i < 15; ++i) {
      DataPoint pt;
      pt.lambda1 = ramp(lmax, i, 15);
      pt.split = i % 3 == 2 ? Split::test : Split::train;
      pt.stress = {noise(stress(law, d, p, pt)[0])};
      p.points.push_back(pt);
    }
    d.paths.push_back(p);
  }
  return d;
}

Dataset synthetic_rubber() {
  Dataset d = oracle_dataset(OracleMaterial{}, 3.0, 16, "synthetic_rubber");
  for (auto& p : d.paths) {
    p.points.erase(p.points.begin()); // drop the reference point
    for (std::size_t i = 0; i < p.points.size(); ++i) p.points[i].split = i % 3 == 2 ? Split::test : Split::train;
  }
  return d;
}

// One-term Ogden, Psi = 2 mu / a^2 (sum l^a - 3), mu = 1 kPa, a = -20 (brain tissue range).
Dataset brain() {
  const double mu = 1.0, a = -20.0;
  const Ogden law{{{2.0 * mu / (a * a), a}}};
  Dataset d;
  d.name = "brain";
  d.second_column = SecondColumn::gamma;
  Noise noise(1002, 0.01);
  for (auto kind : {LoadingKind::uniaxial_tension, LoadingKind::uniaxial_compression, LoadingKind::simple_shear}) {
    LoadingPath p{std::string(to_string(kind)), kind, {}};
    for (int i = 0; i < 17; ++i) {
      const double t = double(i) / 16.0;
      DataPoint pt;
      if (kind == LoadingKind::simple_shear) {
        pt.lambda1 = 1.0;
        pt.second = 0.2 * t;
      } else {
        pt.lambda1 = kind == LoadingKind::uniaxial_tension ? 1.0 + 0.1 * t : 1.0 - 0.1 * t;
      }
      pt.stress = {noise(stress(law, d, p, pt)[0])};
      p.points.push_back(pt);
    }
    d.paths.push_back(p);
  }
  return d;
}

// Anisotropic skin law under planar biaxial stretching; Cauchy stresses.
Dataset skin() {
  const Hgo law;
  Dataset d;
  d.name = "skin";
  d.measure = StressMeasure::cauchy;
  d.second_column = SecondColumn::lambda2;
  d.stress_columns = 2;
  Noise noise(1003, 0.01);
  const double lmax = 1.25;
  struct Path {
    const char* name;
    int n;
    std::pair<double, double> (*state)(double);
  };
  const Path paths[] = {
      {"strip_x", 80, [](double l) { return std::pair{l, 1.0}; }},
      {"off_x", 80, [](double l) { return std::pair{l, std::sqrt(l)}; }},
      {"equibiaxial", 81, [](double l) { return std::pair{l, l}; }},
      {"off_y", 80, [](double l) { return std::pair{std::sqrt(l), l}; }},
      {"strip_y", 81, [](double l) { return std::pair{1.0, l}; }},
  };
  for (const auto& spec : paths) {
    LoadingPath p{spec.name, LoadingKind::biaxial, {}};
    for (int i = 0; i < spec.n; ++i) {
      DataPoint pt;
      std::tie(pt.lambda1, pt.second) = spec.state(ramp(lmax, i, spec.n));
      for (double s : stress(law, d, p, pt)) pt.stress.push_back(noise(s));
      p.points.push_back(pt);
    }
    d.paths.push_back(p);
  }
  return d;
}

} // namespace

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(out);
  for (const Dataset& d : {brain(), treloar(), synthetic_rubber(), skin()}) {
    const auto file = out / (d.name + ".csv");
    std::ofstream(file) << write_dataset(d);
    load_dataset(file.string(), d.name); // schema check
    std::cout << file.string() << ": " << d.paths.size() << " paths, " << d.point_count() << " points\n";
  }
}
