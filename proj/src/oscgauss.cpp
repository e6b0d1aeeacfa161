#include "cstorus/oscgauss.hpp"

#include <cmath>

namespace cstorus {

namespace {
constexpr double kPi = 3.14159265358979323846;

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
const double kGlNodes[16] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
const double kGlWeights[16] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

// Composite Gauss-Legendre over [-r, r] with panel widths adapted to the
// local phase speed |lambda| * |y| + |j| of exp(i(j y - lambda y^2 / 2)).
Complex integrate1d(const std::function<Complex(double)>& g, double r, double lambda,
                    double jfreq) {
  Complex acc = 0;
  double y = -r;
  while (y < r) {
    double speed = std::abs(lambda) * std::max(std::abs(y), std::abs(y) + 2.0) + std::abs(jfreq);
    double h = std::min(2.5 / std::max(speed, 1e-12), 0.5);
    h = std::min(h, r - y);
    double mid = y + h / 2, half = h / 2;
    for (int q = 0; q < 16; ++q) acc += half * kGlWeights[q] * g(mid + half * kGlNodes[q]);
    y += h;
  }
  return acc;
}

double truncationRadius(double eps, double tailLog = 21.0) {
  return std::sqrt(tailLog / eps);
}

Complex richardson(const std::vector<Complex>& vals, const EpsSchedule& sched) {
  const auto& e = sched.eps;
  if (vals.size() == 1) return vals[0];
  if (vals.size() >= 3) {
    double d1 = std::abs(vals[1] - vals[0]);
    double d2 = std::abs(vals[2] - vals[1]);
    double scale = std::abs(vals[2]) + 1e-30;
    if (d2 > sched.ratioGuard * d1 + 1e-9 * scale && d2 > 1e-7 * scale)
      throw OscGaussError("quadrature oracle: eps-extrapolation ratio test failed");
  }
  size_t n = vals.size();
  double p = sched.richardsonPower;
  double w1 = std::pow(e[n - 2], p), w2 = std::pow(e[n - 1], p);
  return (vals[n - 1] * w1 - vals[n - 2] * w2) / (w1 - w2);
}

}  // namespace

OscGaussMeasure::OscGaussMeasure(Complex z, const Eigen::VectorXd& mean,
                                 const Eigen::MatrixXd& s, double relTol)
    : z_(z), mean_(mean), s_(s) {
  if (z == Complex(0, 0)) throw OscGaussError("normalization Z must be nonzero");
  if (s.rows() != mean.size() || s.cols() != mean.size())
    throw OscGaussError("shape mismatch in oscillatory Gauss measure");
  if ((s - s.transpose()).norm() > 1e-12 * (1.0 + s.norm()))
    throw OscGaussError("S must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
  eig_ = es.eigenvalues();
  vec_ = es.eigenvectors();
  double scale = eig_.size() ? eig_.cwiseAbs().maxCoeff() : 0.0;
  double tol = relTol * std::max(scale, 1.0e-300);
  kernelFlag_.assign(dim(), 0);
  for (int a = 0; a < dim(); ++a) {
    if (std::abs(eig_(a)) <= tol || scale == 0.0) {
      kernelFlag_[a] = 1;
      ++kernelDim_;
    } else {
      signature_ += eig_(a) > 0 ? 1 : -1;
    }
  }
}

Quadratic Quadratic::one(int dim) {
  Quadratic p;
  p.c = 1.0;
  p.l = Eigen::VectorXcd::Zero(dim);
  p.q = Eigen::MatrixXcd::Zero(dim, dim);
  return p;
}

Complex Quadratic::eval(const Eigen::VectorXd& x) const {
  Complex out = c;
  if (l.size()) out += l.dot(x.cast<Complex>());
  if (q.size()) out += (x.cast<Complex>().transpose() * q * x.cast<Complex>())(0, 0);
  return out;
}

namespace {

// Shared spectral-coordinate setup for the closed form: returns per-direction
// Fresnel factors and moments of the shifted directions.
struct SpectralForm {
  Complex prefactor;              // product of Fresnel factors / Z, with e^{i j.m}
  Eigen::VectorXd jSpec;          // j in spectral coordinates
  Eigen::VectorXcd firstMoment;   // <y_a>
  Eigen::VectorXd invLambda;      // 1/lambda on nonzero dirs, 0 on kernel
};

SpectralForm spectralForm(const OscGaussMeasure& mu, const Eigen::VectorXd& j) {
  SpectralForm out;
  const int d = mu.dim();
  out.jSpec = mu.eigenvectors().transpose() * j;
  out.firstMoment = Eigen::VectorXcd::Zero(d);
  out.invLambda = Eigen::VectorXd::Zero(d);
  Complex i(0, 1);
  Complex pref = std::exp(i * j.dot(mu.mean())) / mu.normalization();
  for (int a = 0; a < d; ++a) {
    if (mu.isKernelDirection(a)) {
      if (std::abs(out.jSpec(a)) > 1e-12 * (1.0 + j.norm()))
        throw OscGaussError(
            "divergent improper integral: oscillation along a kernel direction of S");
      continue;
    }
    double la = mu.eigenvalues()(a);
    out.invLambda(a) = 1.0 / la;
    double ja = out.jSpec(a);
    pref *= std::sqrt(2.0 * kPi / std::abs(la)) *
            std::exp(i * (-kPi / 4.0 * (la > 0 ? 1.0 : -1.0))) *
            std::exp(i * (ja * ja / (2.0 * la)));
    out.firstMoment(a) = ja / la;
  }
  out.prefactor = pref;
  return out;
}

}  // namespace

Complex improperIntegralExpLinear(const OscGaussMeasure& mu, const Eigen::VectorXd& j,
                                  const Quadratic& p) {
  const int d = mu.dim();
  if (j.size() != d) throw OscGaussError("j has wrong dimension");
  SpectralForm sf = spectralForm(mu, j);

  // transport P to centered spectral coordinates: x = m + V y
  const auto& v = mu.eigenvectors();
  Eigen::VectorXcd meanC = mu.mean().cast<Complex>();
  Complex c = p.c;
  Eigen::VectorXcd l = Eigen::VectorXcd::Zero(d);
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(d, d);
  if (p.l.size()) {
    c += (p.l.array() * meanC.array()).sum();
    l += v.transpose().cast<Complex>() * p.l;
  }
  if (p.q.size()) {
    c += (meanC.transpose() * p.q * meanC)(0, 0);
    l += 2.0 * (v.transpose().cast<Complex>() * (p.q * meanC));
    q = v.transpose().cast<Complex>() * p.q * v.cast<Complex>();
  }

  // kernel-direction admissibility: no quadratic weight along a kernel axis
  for (int a = 0; a < d; ++a)
    if (mu.isKernelDirection(a) && q.size() && std::abs(q(a, a)) > 1e-12)
      throw OscGaussError("divergent improper integral: quadratic term on ker(S)");

  // moments: <y_a> = mu_a, <y_a y_b> = mu_a mu_b - i delta_ab / lambda_a
  Complex i(0, 1);
  Complex poly = c;
  for (int a = 0; a < d; ++a) {
    if (l.size()) poly += l(a) * sf.firstMoment(a);
    if (!q.size()) continue;
    for (int b = 0; b < d; ++b) {
      Complex m2 = sf.firstMoment(a) * sf.firstMoment(b);
      if (a == b && !mu.isKernelDirection(a)) m2 -= i * sf.invLambda(a);
      // kernel-kernel off-diagonal and kernel-regular cross moments vanish
      if (mu.isKernelDirection(a) != mu.isKernelDirection(b)) m2 = 0.0;
      if (a != b && mu.isKernelDirection(a) && mu.isKernelDirection(b)) m2 = 0.0;
      poly += q(a, b) * m2;
    }
  }
  return sf.prefactor * poly;
}

Complex fresnelNormalization(const OscGaussMeasure& mu) {
  return improperIntegralExpLinear(mu, Eigen::VectorXd::Zero(mu.dim()),
                                   Quadratic::one(mu.dim()));
}

Complex quadratureOracleSeparable(const OscGaussMeasure& mu,
                                  const std::vector<std::function<Complex(double)>>& factors,
                                  const EpsSchedule& sched) {
  const int d = mu.dim();
  if (static_cast<int>(factors.size()) != d)
    throw OscGaussError("separable oracle: factor count mismatch");
  // The eps-Gaussian couples coordinates through the mean offset; expand
  // |x|^2 = |m|^2 + 2 m.V y + |y|^2 to keep directions independent.
  const auto& v = mu.eigenvectors();
  Eigen::VectorXd mSpec = v.transpose() * mu.mean();

  std::vector<Complex> vals;
  Complex ic(0, 1);
  for (double eps : sched.eps) {
    Complex total = std::exp(Complex(-eps * mu.mean().squaredNorm(), 0)) / mu.normalization();
    double r = truncationRadius(eps);
    for (int a = 0; a < d; ++a) {
      double la = mu.isKernelDirection(a) ? 0.0 : mu.eigenvalues()(a);
      auto g = [&, a, la](double y) {
        Complex phase = std::exp(ic * (-0.5 * la * y * y));
        double gauss = std::exp(-eps * (y * y + 2.0 * y * mSpec(a)));
        return factors[a](y) * phase * gauss;
      };
      Complex one = integrate1d(g, r, la, 0.0);
      if (mu.isKernelDirection(a)) one *= std::sqrt(eps / kPi);
      total *= one;
    }
    vals.push_back(total);
  }
  return richardson(vals, sched);
}

Complex quadratureOracleGeneral(const OscGaussMeasure& mu,
                                const std::function<Complex(const Eigen::VectorXd&)>& f,
                                const EpsSchedule& sched) {
  const int d = mu.dim();
  if (d > 2) throw OscGaussError("general-callable oracle supports dim <= 2");
  const auto& v = mu.eigenvectors();

  std::vector<Complex> vals;
  Complex ic(0, 1);
  for (double eps : sched.eps) {
    double r = truncationRadius(eps);
    Complex total;
    if (d == 1) {
      double la = mu.isKernelDirection(0) ? 0.0 : mu.eigenvalues()(0);
      auto g = [&](double y) {
        Eigen::VectorXd x = mu.mean() + v.col(0) * y;
        return f(x) * std::exp(ic * (-0.5 * la * y * y)) * std::exp(-eps * x.squaredNorm());
      };
      total = integrate1d(g, r, la, 0.0);
      if (mu.isKernelDirection(0)) total *= std::sqrt(eps / kPi);
    } else {
      double la0 = mu.isKernelDirection(0) ? 0.0 : mu.eigenvalues()(0);
      double la1 = mu.isKernelDirection(1) ? 0.0 : mu.eigenvalues()(1);
      auto outer = [&](double y0) {
        auto inner = [&](double y1) {
          Eigen::VectorXd x = mu.mean() + v.col(0) * y0 + v.col(1) * y1;
          return f(x) * std::exp(ic * (-0.5 * (la0 * y0 * y0 + la1 * y1 * y1))) *
                 std::exp(-eps * x.squaredNorm());
        };
        return integrate1d(inner, r, la1, 0.0);
      };
      total = integrate1d(outer, r, la0, 0.0);
      for (int a = 0; a < 2; ++a)
        if (mu.isKernelDirection(a)) total *= std::sqrt(eps / kPi);
    }
    vals.push_back(total / mu.normalization());
  }
  return richardson(vals, sched);
}

Complex quadratureOracleExpLinear(const OscGaussMeasure& mu, const Eigen::VectorXd& j,
                                  const Quadratic& p, const EpsSchedule& sched) {
  const int d = mu.dim();
  const auto& v = mu.eigenvectors();
  Eigen::VectorXd jSpec = v.transpose() * j;
  Complex ic(0, 1);
  Complex shiftPhase = std::exp(ic * j.dot(mu.mean()));

  // centered spectral-coordinate polynomial (same transport as closed form)
  Eigen::VectorXcd meanC = mu.mean().cast<Complex>();
  Complex c = p.c;
  Eigen::VectorXcd l = Eigen::VectorXcd::Zero(d);
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(d, d);
  if (p.l.size()) {
    c += (p.l.array() * meanC.array()).sum();
    l += v.transpose().cast<Complex>() * p.l;
  }
  if (p.q.size()) {
    c += (meanC.transpose() * p.q * meanC)(0, 0);
    l += 2.0 * (v.transpose().cast<Complex>() * (p.q * meanC));
    q = v.transpose().cast<Complex>() * p.q * v.cast<Complex>();
  }

  // integrate centered monomials y^k e^{i j.y}, direction by direction
  auto monomial = [&](const std::vector<int>& pow) -> Complex {
    std::vector<std::function<Complex(double)>> factors;
    for (int a = 0; a < d; ++a) {
      int k = pow[a];
      double ja = jSpec(a);
      factors.push_back([k, ja, ic](double y) {
        Complex m = std::exp(ic * (ja * y));
        for (int t = 0; t < k; ++t) m *= y;
        return m;
      });
    }
    return quadratureOracleSeparable(mu, factors, sched);
  };

  std::vector<int> pow(d, 0);
  Complex total = c * monomial(pow);
  for (int a = 0; a < d; ++a) {
    if (l.size() && std::abs(l(a)) > 0) {
      pow.assign(d, 0);
      pow[a] = 1;
      total += l(a) * monomial(pow);
    }
    for (int b = 0; b < d; ++b)
      if (q.size() && std::abs(q(a, b)) > 0) {
        pow.assign(d, 0);
        pow[a] += 1;
        pow[b] += 1;
        total += q(a, b) * monomial(pow);
      }
  }
  return shiftPhase * total;
}

OffdiagReduction offdiagBlockReduce(const Eigen::MatrixXd& c, double relTol) {
  OffdiagReduction out;
  if (c.size() == 0) {
    out.kernelBasisB = Eigen::MatrixXd::Identity(c.cols(), c.cols());
    out.kernelBasisA = Eigen::MatrixXd::Identity(c.rows(), c.rows());
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  double tol = relTol * std::max(1e-300, svd.singularValues().size()
                                             ? svd.singularValues()(0)
                                             : 0.0);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++rank;
  for (int i = 0; i < rank; ++i) {
    double s = svd.singularValues()(i);
    out.singularValues.push_back(s);
    out.prefactor *= 2.0 * kPi / s;
  }
  out.kernelBasisB = svd.matrixV().rightCols(c.cols() - rank);
  out.kernelBasisA = svd.matrixU().rightCols(c.rows() - rank);
  return out;
}

}  // namespace cstorus
