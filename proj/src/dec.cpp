#include "cstorus/dec.hpp"

namespace cstorus {

Cochain Cochain::zero(const PolyComplex& c, int degree, int coeffDim) {
  Cochain out;
  out.complex = &c;
  out.degree = degree;
  out.values = Eigen::MatrixXd::Zero(c.faceCount(degree), coeffDim);
  return out;
}

Cochain Cochain::basis(const PolyComplex& c, int degree, int faceIndex) {
  Cochain out = zero(c, degree, 1);
  out.values(faceIndex, 0) = 1.0;
  return out;
}

double innerProduct(const Cochain& a, const Cochain& b) {
  if (a.complex != b.complex || a.degree != b.degree || a.coeffDim() != b.coeffDim())
    throw DecError("inner product of incompatible cochains");
  return (a.values.array() * b.values.array()).sum();
}

Eigen::SparseMatrix<double> boundaryMatrix(const PolyComplex& c, int p) {
  Eigen::SparseMatrix<double> m(c.faceCount(p - 1), c.faceCount(p));
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& t : c.boundaryTriplets(p)) trip.emplace_back(t.row, t.col, t.val);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Cochain boundary(const Cochain& c) {
  if (c.degree < 1) throw DecError("boundary of a 0-chain");
  Cochain out = Cochain::zero(*c.complex, c.degree - 1, c.coeffDim());
  out.values = boundaryMatrix(*c.complex, c.degree) * c.values;
  return out;
}

Cochain coboundary(const Cochain& c) {
  if (c.degree >= c.complex->dim) throw DecError("coboundary at top degree");
  Cochain out = Cochain::zero(*c.complex, c.degree + 1, c.coeffDim());
  out.values = boundaryMatrix(*c.complex, c.degree + 1).transpose() * c.values;
  return out;
}

Cochain psiEmbed(const QkComplex& qk, const Cochain& a, int complexSel) {
  if (a.degree != 1) throw DecError("psi embeds 1-cochains only");
  if (a.values.rows() != qk.nPrimalEdges)
    throw DecError("psi: cochain does not live on a registered K1/K2 complex");
  Cochain out = Cochain::zero(qk.qk, 1, a.coeffDim());
  for (int e = 0; e < qk.nPrimalEdges; ++e)
    for (int h = 0; h < 2; ++h)
      out.values.row(qk.halfEdge(complexSel, e, h)) = a.values.row(e);
  return out;
}

HodgeStar::HodgeStar(const DualPairing& pair) : pair_(&pair) {}

Cochain HodgeStar::starBase(const Cochain& a, const PolyComplex& dualOut) const {
  int p = a.degree;
  Cochain out = Cochain::zero(dualOut, 2 - p, a.coeffDim());
  for (int i = 0; i < a.values.rows(); ++i)
    out.values.row(pair_->faceMap[p][i]) = pair_->starBase[p][i] * a.values.row(i);
  return out;
}

Cochain HodgeStar::starDual(const Cochain& a, const PolyComplex& baseOut) const {
  int p = a.degree;
  Cochain out = Cochain::zero(baseOut, 2 - p, a.coeffDim());
  for (int i = 0; i < a.values.rows(); ++i)
    out.values.row(pair_->dualFaceMap[p][i]) = pair_->starDual[p][i] * a.values.row(i);
  return out;
}

}  // namespace cstorus
