// Oscillatory Gauss-type measures (1/Z) exp(-(i/2) <x-m, S(x-m)>) dx on
// finite-dimensional Euclidean spaces, their improper integrals (kernel
// directions normalized by (eps/pi)^{n/2}), a quadrature oracle for
// validation, and the off-diagonal block reduction used by the outer
// path-integral stage.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cstorus {

struct OscGaussError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Complex = std::complex<double>;

class OscGaussMeasure {
public:
  // z != 0; s symmetric.  Eigenvalues with |lambda| < relTol * max|lambda|
  // count as kernel directions.
  OscGaussMeasure(Complex z, const Eigen::VectorXd& mean, const Eigen::MatrixXd& s,
                  double relTol = 1e-10);

  int dim() const { return static_cast<int>(mean_.size()); }
  Complex normalization() const { return z_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& matrix() const { return s_; }
  bool centered() const { return mean_.isZero(0.0); }
  bool degenerate() const { return kernelDim_ > 0; }

  int kernelDim() const { return kernelDim_; }
  int signature() const { return signature_; }
  const Eigen::VectorXd& eigenvalues() const { return eig_; }
  const Eigen::MatrixXd& eigenvectors() const { return vec_; }
  bool isKernelDirection(int a) const { return kernelFlag_[a]; }

private:
  Complex z_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd s_;
  Eigen::VectorXd eig_;
  Eigen::MatrixXd vec_;
  std::vector<char> kernelFlag_;
  int kernelDim_ = 0;
  int signature_ = 0;
};

// Polynomial of degree <= 2: P(x) = c + l.x + x^T q x (complex coefficients).
struct Quadratic {
  Complex c = 1.0;
  Eigen::VectorXcd l;
  Eigen::MatrixXcd q;

  static Quadratic one(int dim);
  Complex eval(const Eigen::VectorXd& x) const;
};

// Improper integral of P(x) exp(i <j, x>) against the measure.  Throws
// OscGaussError when the limit does not exist (j with a kernel component, or
// a quadratic term along a kernel direction).
Complex improperIntegralExpLinear(const OscGaussMeasure& mu, const Eigen::VectorXd& j,
                                  const Quadratic& p);

// Closed-form improper integral of 1 (the Fresnel normalization).
Complex fresnelNormalization(const OscGaussMeasure& mu);

// --- validation oracle --------------------------------------------------------

struct EpsSchedule {
  std::vector<double> eps = {1e-1, 1e-2, 1e-3};
  double richardsonPower = 1.0;   // model I(eps) = I0 + c eps^p
  double ratioGuard = 0.75;       // successive-difference growth bound
};

// Numerically evaluates (eps/pi)^{n/2} Int f(x) e^{-eps|x|^2} dmu(x) per eps
// by per-direction composite Gauss-Legendre quadrature in the spectral basis
// and Richardson-extrapolates eps -> 0.
//
// Supported integrand classes:
//  * separable products f(x) = prod_a g_a(y_a) in spectral coordinates
//    (any dimension), passed as per-direction callables;
//  * general callables for dim <= 2 (tensor quadrature).
Complex quadratureOracleSeparable(const OscGaussMeasure& mu,
                                  const std::vector<std::function<Complex(double)>>& factors,
                                  const EpsSchedule& sched = {});

Complex quadratureOracleGeneral(const OscGaussMeasure& mu,
                                const std::function<Complex(const Eigen::VectorXd&)>& f,
                                const EpsSchedule& sched = {});

// Oracle for the exp-linear-times-quadratic class: expands P into spectral
// monomials and reuses the separable path (works for dims 1..3).
Complex quadratureOracleExpLinear(const OscGaussMeasure& mu, const Eigen::VectorXd& j,
                                  const Quadratic& p, const EpsSchedule& sched = {});

// --- off-diagonal block reduction ---------------------------------------------

// Exact eps -> 0 reduction of the degenerate measure with pure coupling
// Q(a, B) = <a, C B>: scalar prefactor prod_i (2 pi / sigma_i) over the
// nonzero singular values of C, plus the instruction to integrate the
// remaining integrand over ker C (B-side) with kernel normalization; the
// ker C^T directions on the a-side contribute a factor 1.
struct OffdiagReduction {
  double prefactor = 1.0;
  std::vector<double> singularValues;    // nonzero ones
  Eigen::MatrixXd kernelBasisB;          // orthonormal columns
  Eigen::MatrixXd kernelBasisA;
};

OffdiagReduction offdiagBlockReduce(const Eigen::MatrixXd& c, double relTol = 1e-10);

}  // namespace cstorus
