#pragma once

#include "pmh/bcf.hpp"
#include "pmh/ou.hpp"
#include "pmh/types.hpp"

namespace pmh {

// Interacting-pseudomode Lindblad model: Hermitian mode Hamiltonian h,
// Lindblad coefficient matrix Gamma (L_k = sum_k' Gamma_{kk'} a_k'), coupling
// vector g. Built so that V Lambda V^{-1} = Gamma^+ Gamma / 2 + i h and
// exactly one mode is damped (Gamma has rank one).
struct PseudomodeModel {
  ComplexMatrix h;
  ComplexMatrix gamma;
  ComplexVector g;
  ComplexMatrix v;  // transformation used, kept for diagnostics

  // Construction provenance, needed to enumerate the gauge freedom.
  ComplexMatrix base_transform;  // D^{-1/2} W^dagger
  ComplexVector c;               // diagonal-OU diffusion column
  ComplexVector lambdas;
  ComplexVector coupling_tilde;  // conj(sqrt(G_j))

  int size() const { return static_cast<int>(g.size()); }
  // Effective drift Gamma^+ Gamma / 2 + i h.
  ComplexMatrix effective_drift() const;
};

PseudomodeModel assemble_pseudomode(const PositiveParametrization& p);

// BCF of the pseudomode environment, g^+ exp(-(Gamma^+ Gamma/2 + i h) tau) g,
// via dense scaling-and-squaring matrix exponential.
Complex analytic_bcf(const PseudomodeModel& model, double tau);

// Rebuilds the model with V' = u * D^{-1/2} W^dagger for a caller-supplied
// unitary u (the single-damped-mode rotation is dropped). The resulting model
// reproduces the same BCF. Throws NotUnitary.
PseudomodeModel enumerate_gauge_freedom(const PseudomodeModel& model, const ComplexMatrix& u);

// Residuals of the structural identities every valid model satisfies.
struct ModelVerification {
  double h_hermiticity_defect;     // ||h - h^+|| / ||h||
  double drift_consistency;        // ||V Lambda V^-1 - (Gamma^+ Gamma/2 + i h)||
  double lyapunov_residual;        // ||Mtilde + Mtilde^+ - Gamma^+ Gamma||
  double stationary_identity;      // ||P(Mtilde, Gamma^+) - I||
  double gamma_rank_ratio;         // sigma_2 / sigma_1 of Gamma
  double transform_residual;       // ||(V^+ V)^{-1} - P||
};

ModelVerification verify_model(const PseudomodeModel& model);

}  // namespace pmh
