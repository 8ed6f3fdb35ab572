#pragma once

#include <vector>

#include "pmh/types.hpp"

namespace pmh::poly {

// Polynomials are stored as ascending real coefficient vectors:
// p(x) = c[0] + c[1] x + ... + c[n] x^n.
using Poly = std::vector<double>;

Poly multiply(const Poly& a, const Poly& b);
Poly add(const Poly& a, const Poly& b);
Poly scale(const Poly& a, double s);
double eval(const Poly& p, double x);
Complex eval(const Poly& p, Complex x);

// Drops leading coefficients with |c| < tol * max|c|.
Poly trim(const Poly& p, double tol);

// All complex roots via companion-matrix eigenvalues. Degree 0 yields {}.
std::vector<Complex> roots(const Poly& p);

struct RootCluster {
  Complex center;
  int multiplicity = 0;
  double max_imag = 0.0;  // largest |Im| among members, for ambiguity checks
};

// Greedy clustering with radius tol_rel * (1 + |root|).
std::vector<RootCluster> cluster_roots(const std::vector<Complex>& rts, double tol_rel);

}  // namespace pmh::poly
