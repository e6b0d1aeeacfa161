// Chains/cochains with vector coefficients on polyhedral cell complexes,
// boundary/coboundary, inner products, the embedding of C^1(K) into C^1(qK),
// and the dual-pair Hodge star operators.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>

#include "cstorus/polycomplex.hpp"

namespace cstorus {

struct DecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A p-cochain with values in R^coeffDim; under the standard identification
// this doubles as a p-chain.  values is (#p-faces) x coeffDim.
struct Cochain {
  const PolyComplex* complex = nullptr;
  int degree = 0;
  Eigen::MatrixXd values;

  int coeffDim() const { return static_cast<int>(values.cols()); }

  static Cochain zero(const PolyComplex& c, int degree, int coeffDim);
  // Basis cochain delta_alpha (scalar coefficients).
  static Cochain basis(const PolyComplex& c, int degree, int faceIndex);
};

// Counting-measure inner product tensored with the coefficient inner product.
double innerProduct(const Cochain& a, const Cochain& b);

// Signed boundary matrix of degree p (maps p-chains to (p-1)-chains).
Eigen::SparseMatrix<double> boundaryMatrix(const PolyComplex& c, int p);

Cochain boundary(const Cochain& c);     // degree p -> p-1, requires p >= 1
Cochain coboundary(const Cochain& c);   // degree p -> p+1, requires p < dim

// The injective map psi: C^1(K1) (+) C^1(K2) -> C^1(qK) assigning each
// half-edge the value of its parent edge.  `complexSel` picks the summand.
Cochain psiEmbed(const QkComplex& qk, const Cochain& a, int complexSel);

// Hodge stars of a dual pairing as signed permutations, for all degrees.
class HodgeStar {
public:
  HodgeStar(const DualPairing& pair);

  // star_K: C^p(K1) -> C^{2-p}(K2) and star_{K'}: C^p(K2) -> C^{2-p}(K1)
  Cochain starBase(const Cochain& a, const PolyComplex& dualOut) const;
  Cochain starDual(const Cochain& a, const PolyComplex& baseOut) const;

  // signed permutation data
  int baseSign(int p, int i) const { return pair_->starBase[p][i]; }
  int dualSign(int p, int i) const { return pair_->starDual[p][i]; }
  int baseMap(int p, int i) const { return pair_->faceMap[p][i]; }
  int dualMap(int p, int i) const { return pair_->dualFaceMap[p][i]; }

private:
  const DualPairing* pair_;
};

}  // namespace cstorus
