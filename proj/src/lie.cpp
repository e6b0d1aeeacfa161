#include "cstorus/lie.hpp"

#include <cmath>

namespace cstorus {

namespace {
constexpr double kPi = 3.14159265358979323846;
// tau = diag(i, -i); |tau| = 1/(sqrt(2) pi) in the normalized form, so the
// orthonormal coordinate beta of b = x tau is beta = x |tau| = x/(sqrt(2) pi).
const double kTauNorm = 1.0 / (std::sqrt(2.0) * kPi);
}  // namespace

LieData LieData::su2() {
  LieData d;
  d.rank_ = 1;
  d.kDim_ = 2;
  d.dualCoxeter_ = 2;
  // the single positive root: alpha(x tau) = x/pi, i.e. alpha(beta) =
  // beta/(pi |tau|) = sqrt(2) beta / ... expressed against beta directly:
  Eigen::VectorXd alpha(1);
  alpha(0) = 1.0 / (kPi * kTauNorm);   // alpha(b) = alpha . beta
  d.posRoots_ = {alpha};
  Eigen::VectorXd coroot(1);
  coroot(0) = 2.0 * kPi * kTauNorm;    // 2 pi tau in beta-coordinates, norm sqrt(2)
  d.latticeI_ = {coroot};
  Eigen::VectorXd omega(1);
  omega(0) = kPi * kTauNorm;           // fundamental weight pi tau
  d.latticeW_ = {omega};
  d.rho_ = omega;
  return d;
}

double LieData::fpDensity(const Eigen::VectorXd& b) const {
  double out = 1.0;
  for (const auto& alpha : posRoots_) {
    double a = alpha.dot(b);
    double s = std::sin(kPi * a);
    out *= 4.0 * s * s;
  }
  return out;
}

double LieData::wallDistance(const Eigen::VectorXd& b) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& alpha : posRoots_) {
    double a = alpha.dot(b);
    double frac = a - std::round(a);
    d = std::min(d, std::abs(frac) * kPi);
  }
  return d;
}

Eigen::MatrixXd LieData::adOnK(const Eigen::VectorXd& b) const {
  if (rank_ != 1) throw LieError("adOnK wired for rank 1 only");
  double x = alcoveCoordinate(b);
  Eigen::MatrixXd m(2, 2);
  m << 0.0, -2.0 * x, 2.0 * x, 0.0;
  return m;
}

Eigen::MatrixXd LieData::expAdOnG(const Eigen::VectorXd& b, double s) const {
  if (rank_ != 1) throw LieError("expAdOnG wired for rank 1 only");
  double x = alcoveCoordinate(b);
  double th = 2.0 * s * x;
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(1, 1) = std::cos(th);
  m(1, 2) = -std::sin(th);
  m(2, 1) = std::sin(th);
  m(2, 2) = std::cos(th);
  return m;
}

Eigen::VectorXd LieData::affineWeylApply(const std::vector<int>& word,
                                         const Eigen::VectorXd& b) const {
  Eigen::VectorXd out = b;
  for (int g : word) {
    if (g == 0)
      out = -out;
    else
      out += latticeI_[0];
  }
  return out;
}

double LieData::alcoveCoordinate(const Eigen::VectorXd& b) const {
  return b(0) / kTauNorm;
}

Eigen::VectorXd LieData::fromAlcoveCoordinate(double x) const {
  Eigen::VectorXd b(1);
  b(0) = x * kTauNorm;
  return b;
}

Eigen::Matrix2cd LieData::definingMatrix(const Eigen::VectorXd& tPart,
                                         const Eigen::VectorXd& kPart) const {
  // orthonormal basis: sqrt(2) pi tau, sqrt(2) pi X1, sqrt(2) pi X2 with
  // tau = diag(i,-i), X1 = [[0,-1],[1,0]], X2 = [[0,-i],[-i,0]]
  const double c = std::sqrt(2.0) * kPi;
  Complex i(0, 1);
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  double a = c * tPart(0), u = kPart.size() > 0 ? c * kPart(0) : 0.0,
         v = kPart.size() > 1 ? c * kPart(1) : 0.0;
  m(0, 0) = i * a;
  m(1, 1) = -i * a;
  m(0, 1) = Complex(-u, -v);
  m(1, 0) = Complex(u, -v);
  return m;
}

double mollifier(const LieData& lie, double s, const Eigen::VectorXd& b) {
  if (s <= 0) throw LieError("mollifier scale must be positive");
  double d = lie.wallDistance(b);
  double u = (s - d) / s;
  if (u <= 0) return 1.0;
  if (u >= 1) return 0.0;
  // quintic smootherstep, C^2 at both ends
  double step = u * u * u * (u * (u * 6.0 - 15.0) + 10.0);
  return 1.0 - step;
}

LevelData::LevelData(const LieData& lie, int k) : lie_(&lie), k_(k) {
  if (lie.rank() != 1) throw LieError("LevelData wired for SU(2) only");
  int m = k - lie.dualCoxeter() + 1;   // |Lambda_+^k| = k - 1 for SU(2)
  if (m <= 0) throw LieError("empty color set: k < dual Coxeter number");
  s_.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      s_(a, b) = std::sqrt(2.0 / k) * std::sin(kPi * (a + 1.0) * (b + 1.0) / k);
  dims_.resize(m);
  for (int a = 0; a < m; ++a) dims_[a] = (s_(a, 0) / s_(0, 0)).real();
  for (double d : dims_) {
    if (d <= 0) throw LieError("non-positive quantum dimension");
  }

  // fusion by Verlinde sums, snapped to integers with a guard band
  fusion_.assign(static_cast<size_t>(m) * m * m, 0);
  for (int mu = 0; mu < m; ++mu)
    for (int nu = 0; nu < m; ++nu)
      for (int la = 0; la < m; ++la) {
        Complex acc = 0;
        for (int sg = 0; sg < m; ++sg)
          acc += s_(mu, sg) * s_(nu, sg) * std::conj(s_(la, sg)) / s_(0, sg);
        double re = acc.real();
        long n = std::lround(re);
        if (std::abs(re - n) > 1e-6 || std::abs(acc.imag()) > 1e-6 || n < 0)
          throw LieError("fusion Verlinde sum is not a non-negative integer");
        fusion_[(static_cast<size_t>(mu) * m + nu) * m + la] = static_cast<int>(n);
      }
}

void LevelData::checkColor(int c) const {
  if (c < 0 || c >= colorCount())
    throw LieError("color " + std::to_string(c) + " outside the level-" +
                   std::to_string(k_) + " color set");
}

int LevelData::fusion(int mu, int nu, int lambda) const {
  checkColor(mu);
  checkColor(nu);
  checkColor(lambda);
  int m = colorCount();
  return fusion_[(static_cast<size_t>(mu) * m + nu) * m + lambda];
}

Complex LevelData::character(int color, const Eigen::VectorXd& b) const {
  checkColor(color);
  double x = lie_->alcoveCoordinate(b);
  Complex acc = 0;
  Complex i(0, 1);
  for (int j = 0; j <= color; ++j) acc += std::exp(i * ((color - 2.0 * j) * x));
  return acc;
}

double LevelData::weightNormWithRho(int color) const {
  checkColor(color);
  return color * (color + 2.0) / 2.0;
}

}  // namespace cstorus
