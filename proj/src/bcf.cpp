#include "pmh/bcf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pmh {

double ExponentialBCF::amplitude_scale() const {
  double s = 0.0;
  for (int j = 0; j < size(); ++j) s += std::abs(amplitudes(j));
  return s;
}

double ExponentialBCF::hermiticity_defect() const {
  double im = 0.0;
  for (int j = 0; j < size(); ++j) im += amplitudes(j).imag();
  return std::abs(im);
}

namespace {

void check_lambdas(const ComplexVector& lambdas, double separation_tol) {
  const int n = static_cast<int>(lambdas.size());
  for (int j = 0; j < n; ++j) {
    if (!(lambdas(j).real() > 0.0))
      throw Error("decay rate lambda_" + std::to_string(j) + " must have positive real part");
  }
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const double sep = std::abs(lambdas(j) - lambdas(k));
      if (sep < separation_tol * (1.0 + std::abs(lambdas(j))))
        throw DegenerateLambdas("lambda_" + std::to_string(j) + " and lambda_" +
                                std::to_string(k) + " coincide within tolerance");
    }
}

}  // namespace

void ExponentialBCF::validate(double separation_tol, double hermiticity_rtol) const {
  if (lambdas.size() != amplitudes.size())
    throw ShapeMismatch("lambdas and amplitudes must have equal length");
  check_lambdas(lambdas, separation_tol);
  const double scale = amplitude_scale();
  if (scale > 0.0 && hermiticity_defect() > hermiticity_rtol * scale)
    throw HermiticityViolation("sum_j Im(G_j) exceeds hermiticity tolerance");
}

void PositiveParametrization::validate(double separation_tol) const {
  if (lambdas.size() != residues.size())
    throw ShapeMismatch("lambdas and residues must have equal length");
  check_lambdas(lambdas, separation_tol);
}

Complex eval_bcf(const ExponentialBCF& bcf, double tau) {
  if (tau < 0.0) return std::conj(eval_bcf(bcf, -tau));
  Complex acc = 0.0;
  for (int j = 0; j < bcf.size(); ++j)
    acc += bcf.amplitudes(j) * std::exp(-bcf.lambdas(j) * tau);
  return acc;
}

double eval_spectral_density(const ExponentialBCF& bcf, double omega) {
  const double scale = bcf.amplitude_scale();
  if (scale > 0.0 && bcf.hermiticity_defect() > 1e-10 * scale)
    throw HermiticityViolation("spectral density requires sum_j Im(G_j) = 0");
  Complex acc = 0.0;
  for (int j = 0; j < bcf.size(); ++j)
    acc += bcf.amplitudes(j) / (bcf.lambdas(j) - kImag * omega);
  return 2.0 * acc.real();
}

ExponentialBCF amplitudes_from_residues(const PositiveParametrization& p) {
  p.validate();
  const int n = p.size();
  ExponentialBCF out;
  out.lambdas = p.lambdas;
  out.amplitudes = ComplexVector::Zero(n);
  for (int j = 0; j < n; ++j) {
    Complex g = 0.0;
    for (int k = 0; k < n; ++k)
      g += p.residues(j) * std::conj(p.residues(k)) /
           (p.lambdas(j) + std::conj(p.lambdas(k)));
    out.amplitudes(j) = g;
  }
  return out;
}

namespace detail {

poly::Poly spectral_numerator(const ExponentialBCF& bcf) {
  const int n = bcf.size();
  // J = sum_j [G_j/(lambda_j - iw) + c.c.]; over the common denominator
  // Q = prod_j (w^2 - 2 Im(lambda_j) w + |lambda_j|^2) the numerator is
  // sum_j (2 Re(G_j lambda_j^*) - 2 Im(G_j) w) * prod_{k != j} q_k(w).
  poly::Poly num;  // empty == zero polynomial
  for (int j = 0; j < n; ++j) {
    poly::Poly term = {2.0 * (bcf.amplitudes(j) * std::conj(bcf.lambdas(j))).real(),
                       -2.0 * bcf.amplitudes(j).imag()};
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      const poly::Poly q = {std::norm(bcf.lambdas(k)), -2.0 * bcf.lambdas(k).imag(), 1.0};
      term = poly::multiply(term, q);
    }
    num = poly::add(num, term);
  }
  return num;
}

struct GridScan {
  double min_value = 0.0;
  double witness = 0.0;
  double max_value = 0.0;
};

GridScan grid_scan(const ExponentialBCF& bcf, const CertConfig& config) {
  GridScan scan;
  double max_lambda = 0.0;
  for (int j = 0; j < bcf.size(); ++j)
    max_lambda = std::max(max_lambda, std::abs(bcf.lambdas(j)));
  if (max_lambda == 0.0) max_lambda = 1.0;
  const double span = config.grid_span_factor * max_lambda;
  const int m = std::max(config.grid_points, 2);
  scan.min_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const double omega = -span + 2.0 * span * i / (m - 1);
    const double j_val = eval_spectral_density(bcf, omega);
    if (j_val < scan.min_value) {
      scan.min_value = j_val;
      scan.witness = omega;
    }
    scan.max_value = std::max(scan.max_value, j_val);
  }
  return scan;
}

struct RealRootCluster {
  double center = 0.0;
  int multiplicity = 0;
  double max_imag = 0.0;
};

struct RootAnalysis {
  bool physical = false;
  std::vector<RealRootCluster> real_clusters;
  std::vector<poly::RootCluster> complex_clusters;
  poly::Poly numerator;
};

// Magnitude bound sum_k |c_k| |x|^k; the certificate treats |P(x)| below
// 1e-11 of this as numerically unresolved.
double poly_scale_at(const poly::Poly& p, double x) {
  double scale = 0.0, power = 1.0;
  for (double c : p) {
    scale += std::abs(c) * power;
    power *= std::abs(x);
  }
  return scale;
}

RootAnalysis analyze_roots(const ExponentialBCF& bcf, const CertConfig& config) {
  RootAnalysis analysis;
  analysis.numerator = poly::trim(spectral_numerator(bcf), 1e-12);

  // Window-aware trimming: leading coefficients that contribute nothing on
  // the certification window |omega| <= W are construction noise (boundary
  // models drive the 1/omega^2 tail weight |sum_j r_j|^2 towards zero) and
  // would otherwise fabricate far-out roots.
  {
    double max_lambda = 1.0;
    for (int j = 0; j < bcf.size(); ++j)
      max_lambda = std::max(max_lambda, std::abs(bcf.lambdas(j)));
    const double window = config.grid_span_factor * max_lambda;
    auto& p = analysis.numerator;
    while (p.size() > 1) {
      double max_term = 0.0, power = 1.0;
      for (double c : p) {
        max_term = std::max(max_term, std::abs(c) * power);
        power *= window;
      }
      if (std::abs(p.back()) * std::pow(window, p.size() - 1) < 1e-12 * max_term)
        p.pop_back();
      else
        break;
    }
    // An even-degree numerator is structural (hermiticity cancels the odd
    // top term and a non-negative polynomial cannot have odd degree); a
    // surviving odd leading coefficient is rounding residue.
    if (p.size() >= 2 && p.size() % 2 == 0) p.pop_back();
  }

  const poly::Poly& p = analysis.numerator;
  if (p.empty()) {
    analysis.physical = true;  // J identically zero
    return analysis;
  }
  if (p.size() == 1) {
    analysis.physical = p[0] >= 0.0;
    return analysis;
  }
  const auto rts = poly::roots(p);

  // A multiple real root splits under rounding into a conjugate constellation
  // whose spread exceeds the cluster radius, so near-real roots are grouped by
  // their real parts on the coarser real-axis scale before the evenness check.
  std::vector<Complex> near_real, off_axis;
  for (Complex z : rts) {
    if (std::abs(z.imag()) < config.real_axis_rtol * (1.0 + std::abs(z.real())))
      near_real.push_back(z);
    else
      off_axis.push_back(z);
  }
  std::sort(near_real.begin(), near_real.end(),
            [](Complex a, Complex b) { return a.real() < b.real(); });
  for (Complex z : near_real) {
    const double merge_radius =
        std::max(config.cluster_rtol, 2.0 * config.real_axis_rtol) * (1.0 + std::abs(z.real()));
    if (!analysis.real_clusters.empty() &&
        std::abs(z.real() - analysis.real_clusters.back().center) < merge_radius) {
      auto& cluster = analysis.real_clusters.back();
      cluster.center = (cluster.center * cluster.multiplicity + z.real()) /
                       (cluster.multiplicity + 1);
      cluster.multiplicity += 1;
      cluster.max_imag = std::max(cluster.max_imag, std::abs(z.imag()));
    } else {
      analysis.real_clusters.push_back({z.real(), 1, std::abs(z.imag())});
    }
  }
  analysis.complex_clusters = poly::cluster_roots(off_axis, config.cluster_rtol);

  // Odd real clusters pair up (the real root count of a real polynomial is
  // even here since the degree is even and complex roots pair exactly). A
  // boundary-touching double root can split into two simple real roots under
  // rounding, so a pair of odd clusters only counts as a sign change when the
  // polynomial is resolvably negative between them; otherwise the pair merges
  // into one even cluster.
  bool all_real_even = true;
  std::vector<RealRootCluster> merged;
  std::vector<const RealRootCluster*> odd_queue;
  for (const auto& cluster : analysis.real_clusters) {
    if (cluster.multiplicity % 2 == 0) {
      merged.push_back(cluster);
      continue;
    }
    if (cluster.max_imag > 0.01 * config.real_axis_rtol * (1.0 + std::abs(cluster.center)))
      throw NumericallyAmbiguous(
          "odd-multiplicity root cluster within tolerance of the real axis; "
          "tighten tolerances to certify this model");
    odd_queue.push_back(&cluster);
  }
  for (std::size_t i = 0; i + 1 < odd_queue.size(); i += 2) {
    const auto& left = *odd_queue[i];
    const auto& right = *odd_queue[i + 1];
    double resolved_dip = 0.0;
    for (int probe = 1; probe <= 5; ++probe) {
      const double x = left.center + (right.center - left.center) * probe / 6.0;
      const double value = poly::eval(p, x);
      if (value < -1e-11 * poly_scale_at(p, x)) resolved_dip = std::min(resolved_dip, value);
    }
    if (resolved_dip < 0.0) {
      all_real_even = false;
      merged.push_back(left);
      merged.push_back(right);
    } else {
      merged.push_back({0.5 * (left.center + right.center),
                        left.multiplicity + right.multiplicity,
                        std::max(left.max_imag, right.max_imag)});
    }
  }
  if (odd_queue.size() % 2 == 1) {
    // unpaired odd cluster: only a resolved negative value nearby condemns it
    const auto& lone = *odd_queue.back();
    merged.push_back(lone);
    const double span = 1.0 + std::abs(lone.center);
    double resolved_dip = 0.0;
    for (int probe = -3; probe <= 3; ++probe) {
      const double x = lone.center + probe * 1e-5 * span;
      const double value = poly::eval(p, x);
      if (value < -1e-11 * poly_scale_at(p, x)) resolved_dip = std::min(resolved_dip, value);
    }
    if (resolved_dip < 0.0)
      all_real_even = false;
    else
      throw NumericallyAmbiguous(
          "unpaired odd real root without a resolvable sign change; tighten tolerances");
  }
  std::sort(merged.begin(), merged.end(),
            [](const RealRootCluster& a, const RealRootCluster& b) { return a.center < b.center; });
  analysis.real_clusters = std::move(merged);
  analysis.physical = all_real_even && p.back() > 0.0;
  return analysis;
}

}  // namespace detail

PositivityReport certify_positivity(const ExponentialBCF& bcf, const CertConfig& config) {
  bcf.validate(config.separation_tol, config.hermiticity_rtol);
  PositivityReport report;
  const bool want_poly =
      config.method == CertMethod::PolynomialRoots || config.method == CertMethod::Both;
  const bool want_grid = config.method == CertMethod::Grid || config.method == CertMethod::Both;

  if (want_grid || bcf.size() > 0) {
    const auto scan = detail::grid_scan(bcf, config);
    report.min_spectral_value = scan.min_value;
    report.witness_frequency = scan.witness;
    if (want_grid) {
      report.method = "grid";
      report.is_physical =
          scan.min_value >= -config.negativity_rtol * std::max(scan.max_value, 1e-300);
    }
  }
  if (want_poly) {
    const auto analysis = detail::analyze_roots(bcf, config);
    report.method = "polynomial-roots";
    report.is_physical = analysis.physical;
    for (const auto& cluster : analysis.real_clusters)
      report.real_root_multiplicities.push_back(
          {Complex(cluster.center, 0.0), cluster.multiplicity});
  }
  return report;
}

PositiveParametrization spectral_factorization(const ExponentialBCF& bcf,
                                               const CertConfig& config) {
  bcf.validate(config.separation_tol, config.hermiticity_rtol);
  const int n = bcf.size();
  const auto analysis = detail::analyze_roots(bcf, config);
  if (!analysis.physical)
    throw NotPhysical("spectral factorization requires a non-negative spectral density");

  PositiveParametrization out;
  out.lambdas = bcf.lambdas;
  out.residues = ComplexVector::Zero(n);
  if (n == 0) return out;
  if (analysis.numerator.empty()) return out;  // zero BCF -> zero residues

  // Numerator roots of v: half of each real multiplicity, all upper-half
  // clusters. Conjugate partners must pair up within tolerance.
  std::vector<Complex> v_roots;
  for (const auto& cluster : analysis.real_clusters)
    for (int c = 0; c < cluster.multiplicity / 2; ++c)
      v_roots.push_back(Complex(cluster.center, 0.0));
  std::vector<poly::RootCluster> upper, lower;
  for (const auto& cluster : analysis.complex_clusters) {
    if (cluster.center.imag() > 0.0)
      upper.push_back(cluster);
    else
      lower.push_back(cluster);
  }
  for (const auto& up : upper) {
    const auto partner = std::find_if(lower.begin(), lower.end(), [&](const auto& lo) {
      return std::abs(std::conj(lo.center) - up.center) <
                 100.0 * config.cluster_rtol * (1.0 + std::abs(up.center)) &&
             lo.multiplicity == up.multiplicity;
    });
    if (partner == lower.end())
      throw RootPairingFailure("complex numerator roots do not pair into conjugates");
    for (int c = 0; c < up.multiplicity; ++c) v_roots.push_back(up.center);
  }

  // w(omega) = prod (omega - root) / prod_j (lambda_j - i omega); the scale
  // constant is fixed real positive by matching J at the frequency where a
  // coarse scan sees the largest J (guaranteed away from zeros of v).
  auto eval_w_numerator = [&](Complex omega) {
    Complex acc = 1.0;
    for (Complex root : v_roots) acc *= (omega - root);
    return acc;
  };
  double probe = 0.0;
  {
    double best = -std::numeric_limits<double>::infinity();
    double max_lambda = 0.0;
    for (int j = 0; j < n; ++j) max_lambda = std::max(max_lambda, std::abs(bcf.lambdas(j)));
    const double span = config.grid_span_factor * std::max(max_lambda, 1.0);
    const int m = 20001;
    for (int i = 0; i < m; ++i) {
      const double omega = -span + 2.0 * span * i / (m - 1);
      const double value = eval_spectral_density(bcf, omega);
      if (value > best) {
        best = value;
        probe = omega;
      }
    }
  }
  Complex w_probe = eval_w_numerator(Complex(probe, 0.0));
  Complex probe_denom = 1.0;
  for (int j = 0; j < n; ++j) probe_denom *= (bcf.lambdas(j) - kImag * probe);
  w_probe /= probe_denom;
  const double j_probe = eval_spectral_density(bcf, probe);
  if (std::norm(w_probe) == 0.0 || j_probe <= 0.0)
    throw NotPhysical("cannot fix factorization scale: J vanishes at probe frequency");
  const double c_scale = std::sqrt(j_probe / std::norm(w_probe));

  // Residues of v at the simple poles omega = -i lambda_j:
  // r_j = c * Num(-i lambda_j) / prod_{k != j} (lambda_k - lambda_j).
  for (int j = 0; j < n; ++j) {
    const Complex pole = -kImag * bcf.lambdas(j);
    Complex numerator = eval_w_numerator(pole);
    Complex denom = 1.0;
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      denom *= (bcf.lambdas(k) - bcf.lambdas(j));
    }
    out.residues(j) = c_scale * numerator / denom;
  }
  return out;
}

bool chain_feasibility(const PositiveParametrization& p, double tol) {
  p.validate();
  return std::abs(p.residues.sum()) < tol;
}

}  // namespace pmh
