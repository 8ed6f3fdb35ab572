#include "pmh/polyroots.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace pmh::poly {

Poly multiply(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Poly add(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Poly scale(const Poly& a, double s) {
  Poly out = a;
  for (double& c : out) c *= s;
  return out;
}

double eval(const Poly& p, double x) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Complex eval(const Poly& p, Complex x) {
  Complex acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Poly trim(const Poly& p, double tol) {
  double scale = 0.0;
  for (double c : p) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return {};
  Poly out = p;
  while (!out.empty() && std::abs(out.back()) < tol * scale) out.pop_back();
  return out;
}

std::vector<Complex> roots(const Poly& p_in) {
  Poly p = trim(p_in, 1e-14);
  const int deg = static_cast<int>(p.size()) - 1;
  if (deg < 1) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -p[i] / p[deg];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  std::vector<Complex> out(deg);
  for (int i = 0; i < deg; ++i) out[i] = solver.eigenvalues()(i);
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

std::vector<RootCluster> cluster_roots(const std::vector<Complex>& rts, double tol_rel) {
  std::vector<RootCluster> clusters;
  std::vector<Complex> sums;
  for (Complex z : rts) {
    bool placed = false;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      const double radius = tol_rel * (1.0 + std::abs(clusters[k].center));
      if (std::abs(z - clusters[k].center) < radius) {
        sums[k] += z;
        clusters[k].multiplicity += 1;
        clusters[k].center = sums[k] / static_cast<double>(clusters[k].multiplicity);
        clusters[k].max_imag = std::max(clusters[k].max_imag, std::abs(z.imag()));
        placed = true;
        break;
      }
    }
    if (!placed) {
      clusters.push_back({z, 1, std::abs(z.imag())});
      sums.push_back(z);
    }
  }
  return clusters;
}

}  // namespace pmh::poly
