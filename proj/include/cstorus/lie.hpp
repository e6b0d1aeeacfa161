// Lie-theoretic and level-k quantum data for simply-connected compact simple
// groups, fully wired for SU(2): torus data, alcoves, affine Weyl group,
// the torus-gauge volume density, S-matrix, quantum dimensions, fusion
// coefficients, characters, and the regularized indicator family.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace cstorus {

struct LieError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Complex = std::complex<double>;

// Data of (g, t, <.,.>) in an orthonormal basis of t (tRank coordinates) and
// of k (kDim coordinates).  The inner product is normalized so short real
// coroots have norm^2 = 2.  Roots are stored as linear functionals on t in
// the "lattice" convention: exp(ad(b)) acts on the alpha-eigenplane of k as
// a rotation by angle 2*pi*alpha(b), and the integer lattice I = ker(exp|_t)
// is spanned by the coroots.
//
// Only rank 1 (SU(2)) is constructed; the layout is root-system driven so
// higher ranks slot in without structural changes.
class LieData {
public:
  static LieData su2();

  int rank() const { return rank_; }
  int tDim() const { return rank_; }
  int kDim() const { return kDim_; }
  int gDim() const { return rank_ + kDim_; }
  int dualCoxeter() const { return dualCoxeter_; }

  // positive roots as functionals on orthonormal t-coordinates
  const std::vector<Eigen::VectorXd>& positiveRoots() const { return posRoots_; }
  // coroot lattice basis (= basis of I), orthonormal t-coordinates
  const std::vector<Eigen::VectorXd>& integerLatticeBasis() const { return latticeI_; }
  // weight lattice basis (dual to I)
  const std::vector<Eigen::VectorXd>& weightLatticeBasis() const { return latticeW_; }
  // Weyl vector in orthonormal t-coordinates
  const Eigen::VectorXd& weylVector() const { return rho_; }

  // det(1_k - exp(ad b)|_k); zero exactly on the alcove walls.
  double fpDensity(const Eigen::VectorXd& b) const;

  // Distance from b to the nearest affine wall, measured in the root pairing
  // (for SU(2) with b = x tau this is min_n |x - n pi|).
  double wallDistance(const Eigen::VectorXd& b) const;

  // ad(b)|_k as a kDim x kDim real matrix (orthonormal k-coordinates).
  Eigen::MatrixXd adOnK(const Eigen::VectorXd& b) const;

  // exp(s * ad(b)) restricted to g = t (+) k, block diagonal, (tDim+kDim)^2.
  Eigen::MatrixXd expAdOnG(const Eigen::VectorXd& b, double s) const;

  // Affine Weyl group generators acting on orthonormal t-coordinates:
  // returns w(b) for a word in {reflection, translation} given by `word`
  // (0 = reflection at the origin wall, 1 = basic lattice translation).
  Eigen::VectorXd affineWeylApply(const std::vector<int>& word, const Eigen::VectorXd& b) const;

  // SU(2) helpers: b = x tau <-> orthonormal coordinate beta.
  double alcoveCoordinate(const Eigen::VectorXd& b) const;      // x
  Eigen::VectorXd fromAlcoveCoordinate(double x) const;         // b

  // defining-representation matrix of b in su(2) (2x2 anti-hermitian)
  Eigen::Matrix2cd definingMatrix(const Eigen::VectorXd& tPart,
                                  const Eigen::VectorXd& kPart) const;

private:
  int rank_ = 1;
  int kDim_ = 2;
  int dualCoxeter_ = 2;
  std::vector<Eigen::VectorXd> posRoots_;
  std::vector<Eigen::VectorXd> latticeI_;
  std::vector<Eigen::VectorXd> latticeW_;
  Eigen::VectorXd rho_;
};

// Smooth W_aff-invariant regularization of the indicator of t_reg:
// 1 minus a smoothstep of (s - wallDistance)/s.  Exactly 1 at distance >= s,
// exactly 0 on the walls.
double mollifier(const LieData& lie, double s, const Eigen::VectorXd& b);

// Level-k quantum data.  The level convention is unshifted: q = exp(2 pi i/k)
// and the color set is the weights integrable at level k - dualCoxeter.
class LevelData {
public:
  LevelData(const LieData& lie, int k);

  const LieData& lie() const { return *lie_; }
  int level() const { return k_; }
  int colorCount() const { return static_cast<int>(dims_.size()); }

  const Eigen::MatrixXcd& sMatrix() const { return s_; }
  double quantumDim(int color) const { return dims_[color]; }
  int fusion(int mu, int nu, int lambda) const;   // N^lambda_{mu nu}

  // character of the irrep with highest weight `color` at exp(b)
  Complex character(int color, const Eigen::VectorXd& b) const;

  // <mu, mu + 2 rho> in the normalized form; SU(2): n(n+2)/2
  double weightNormWithRho(int color) const;

private:
  void checkColor(int c) const;
  const LieData* lie_;
  int k_;
  Eigen::MatrixXcd s_;
  std::vector<double> dims_;
  std::vector<int> fusion_;   // dense (mu, nu, lambda)
};

}  // namespace cstorus
