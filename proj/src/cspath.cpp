#include "cstorus/cspath.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace cstorus {

namespace {
constexpr double kPi = 3.14159265358979323846;
const double kSqrt2Pi = std::sqrt(2.0) * kPi;

// 16-point Gauss-Legendre rule on [-1, 1]
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

// exp of a traceless anti-hermitian 2x2 (su(2)): M^2 = -det(M) I
Eigen::Matrix2cd expSu2(const Eigen::Matrix2cd& m) {
  Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Complex theta = std::sqrt(det);
  Complex c, s;
  if (std::abs(theta) < 1e-8) {
    c = 1.0 - det / 2.0;
    s = 1.0 - det / 6.0;
  } else {
    c = std::cos(theta);
    s = std::sin(theta) / theta;
  }
  return c * Eigen::Matrix2cd::Identity() + s * m;
}

// Chebyshev U_n and its first two derivatives at a complex argument
struct Cheb {
  Complex u, du, d2u;
};
Cheb chebU(int n, Complex x) {
  Complex um1 = 0, u0 = 1, dm1 = 0, d0 = 0, sm1 = 0, s0 = 0;
  for (int j = 1; j <= n; ++j) {
    Complex u1 = 2.0 * x * u0 - um1;
    Complex d1 = 2.0 * u0 + 2.0 * x * d0 - dm1;
    Complex s1 = 4.0 * d0 + 2.0 * x * s0 - sm1;
    um1 = u0; u0 = u1;
    dm1 = d0; d0 = d1;
    sm1 = s0; s0 = s1;
  }
  return {u0, d0, s0};
}

struct LogComplex {
  double logMag = 0.0;
  double phase = 0.0;
  Complex relTo(double refLogMag) const {
    return std::exp(Complex(logMag - refLogMag, phase));
  }
};

}  // namespace

CsGeometry makeCsGeometry(const PolyComplex& k1, int n) {
  CsGeometry g;
  g.pair = canonicalDual(k1);
  g.qk = buildQk(g.pair);
  g.prod = productWithZn(g.qk.qk, n);
  g.lie = LieData::su2();
  g.n = n;
  return g;
}

// --- construction ---------------------------------------------------------------

CsPathEngine::CsPathEngine(const CsGeometry& geo, int k, int sigma0)
    : geo_(&geo), k_(k), sigma0_(sigma0) {
  if (k < geo.lie.dualCoxeter()) throw CsError("level below the dual Coxeter number");
  if (sigma0 < 0 || sigma0 >= geo.qk.qk.faceCount(0)) throw CsError("sigma0 out of range");
  buildBases();
  buildBSpace();
  buildCoupling();
}

void CsPathEngine::buildBases() {
  const int n = geo_->n;
  const int slots = slotCount();
  // per-slot block: (N-1) zero-mean t-columns and 2N k-columns, orthonormal
  // for the (1/N)-weighted inner product
  Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(n, 1);
  ones.setOnes();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd zeroMean = q.rightCols(n - 1) * std::sqrt(double(n));

  const int perSlot = 3 * n - 1;
  aCheckBasis_ = Eigen::MatrixXd::Zero(aPerpDim(), slots * perSlot);
  for (int s = 0; s < slots; ++s) {
    int col0 = s * perSlot;
    for (int j = 0; j < n - 1; ++j)
      for (int t = 0; t < n; ++t)
        aCheckBasis_(coordIndex(s, t, 0), col0 + j) = zeroMean(t, j);
    for (int t = 0; t < n; ++t)
      for (int l = 1; l <= 2; ++l)
        aCheckBasis_(coordIndex(s, t, l), col0 + (n - 1) + 2 * t + (l - 1)) =
            std::sqrt(double(n));
  }
}

void CsPathEngine::buildBSpace() {
  const QkComplex& qk = geo_->qk;
  const PolyComplex& c = qk.qk;
  const int v = c.faceCount(0);

  std::vector<Eigen::VectorXd> rows;
  // Mod2: on every tetragon [x, mid_out, dual, mid_in]:
  // B(x) + B(dual) - B(mid_out) - B(mid_in) = 0 (diagonal pairs)
  for (int f = 0; f < c.faceCount(2); ++f) {
    auto vs = c.faceVertices(f);
    Eigen::VectorXd row = Eigen::VectorXd::Zero(v);
    row(vs[0]) += 1;
    row(vs[2]) += 1;
    row(vs[1]) -= 1;
    row(vs[3]) -= 1;
    rows.push_back(row);
  }
  // Mod3: B constant on the vertices of the faces containing sigma0
  std::set<int> star;
  for (int f = 0; f < c.faceCount(2); ++f) {
    auto vs = c.faceVertices(f);
    if (std::find(vs.begin(), vs.end(), sigma0_) != vs.end())
      star.insert(vs.begin(), vs.end());
  }
  for (int w : star) {
    if (w == sigma0_) continue;
    Eigen::VectorXd row = Eigen::VectorXd::Zero(v);
    row(w) = 1;
    row(sigma0_) = -1;
    rows.push_back(row);
  }

  Eigen::MatrixXd con(rows.size(), v);
  for (size_t r = 0; r < rows.size(); ++r) con.row(r) = rows[r];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(con);
  lu.setThreshold(1e-10);
  Eigen::MatrixXd kernel = lu.kernel();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(kernel);
  Eigen::MatrixXd thinQ =
      qr.householderQ() * Eigen::MatrixXd::Identity(v, kernel.cols());
  bLoc_ = thinQ;
}

void CsPathEngine::buildCoupling() {
  const QkComplex& qk = geo_->qk;
  const PolyComplex& qc = qk.qk;
  const int e = geo_->primalEdges();
  const int v = qc.faceCount(0);
  const DualPairing& pair = geo_->pair;

  // row alpha (constant t-valued basis on slot alpha): psi(star a) paired
  // against d_qK B
  couplingFull_ = Eigen::MatrixXd::Zero(2 * e, v);
  Eigen::SparseMatrix<double> d1 = boundaryMatrix(qc, 1);  // vertices x edges
  for (int slot = 0; slot < 2 * e; ++slot) {
    int cs = slot / e, pe = slot % e;
    // star_K image: K1 slot -> dual edge with starBase sign, K2 slot ->
    // primal edge with starDual sign
    int imgCs = 1 - cs;
    int imgEdge = (cs == 0) ? pair.faceMap[1][pe] : pair.dualFaceMap[1][pe];
    double sign = (cs == 0) ? pair.starBase[1][pe] : pair.starDual[1][pe];
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(qc.faceCount(1));
    psi(qk.halfEdge(imgCs, imgEdge, 0)) = sign;
    psi(qk.halfEdge(imgCs, imgEdge, 1)) = sign;
    // <psi(star a), d B> = (d^T psi) . B
    couplingFull_.row(slot) = 2.0 * kPi * k_ * (d1 * psi).transpose();
  }
  couplingLoc_ = couplingFull_ * bLoc_;
  reduction_ = offdiagBlockReduce(couplingLoc_);
  kernelPatterns_ = bLoc_ * reduction_.kernelBasisB;
  // deterministic sign: positive value at sigma0
  for (int j = 0; j < kernelPatterns_.cols(); ++j)
    if (kernelPatterns_(sigma0_, j) < 0) kernelPatterns_.col(j) *= -1.0;
}

// --- single-edge operators --------------------------------------------------------

Eigen::MatrixXd CsPathEngine::lhatOp(double bAlcove) const {
  const int n = geo_->n;
  Eigen::VectorXd b = geo_->lie.fromAlcoveCoordinate(bAlcove);
  Eigen::MatrixXd r = geo_->lie.expAdOnG(b, 1.0 / n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (int t = 0; t < n; ++t) {
    int tp = (t + 1) % n;
    for (int a = 0; a < 3; ++a) {
      m(3 * t + a, 3 * t + a) -= n;
      for (int c = 0; c < 3; ++c) m(3 * t + a, 3 * tp + c) += n * r(a, c);
    }
  }
  return m;
}

Eigen::MatrixXd CsPathEngine::lcheckOp(double bAlcove) const {
  const int n = geo_->n;
  Eigen::VectorXd b = geo_->lie.fromAlcoveCoordinate(bAlcove);
  Eigen::MatrixXd r = geo_->lie.expAdOnG(b, -1.0 / n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (int t = 0; t < n; ++t) {
    int tm = (t + n - 1) % n;
    for (int a = 0; a < 3; ++a) {
      m(3 * t + a, 3 * t + a) += n;
      for (int c = 0; c < 3; ++c) m(3 * t + a, 3 * tm + c) -= n * r(a, c);
    }
  }
  return m;
}

Eigen::MatrixXd CsPathEngine::lbarOp(double bAlcove) const {
  if (geo_->n % 2 != 0) throw CsError("symmetric difference operator requires even N");
  return 0.5 * (lhatOp(bAlcove) - lcheckOp(bAlcove)) + Eigen::MatrixXd::Zero(3 * geo_->n, 3 * geo_->n);
}

Eigen::MatrixXd CsPathEngine::naiveForwardDiff() const {
  const int n = geo_->n;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (int t = 0; t < n; ++t) {
    int tp = (t + 1) % n;
    for (int a = 0; a < 3; ++a) {
      m(3 * t + a, 3 * t + a) -= n;
      m(3 * t + a, 3 * tp + a) += n;
    }
  }
  return m;
}

double CsPathEngine::bAlcoveAtMidpoint(const Eigen::VectorXd& bPattern, int primalEdge) const {
  Eigen::VectorXd b(1);
  b(0) = bPattern(geo_->qk.midpointVertex(primalEdge));
  return geo_->lie.alcoveCoordinate(b);
}

Eigen::MatrixXd CsPathEngine::aPerpOperator(const Eigen::VectorXd& bPattern) const {
  const int e = geo_->primalEdges();
  const int n = geo_->n;
  const DualPairing& pair = geo_->pair;
  Eigen::MatrixXd o = Eigen::MatrixXd::Zero(aPerpDim(), aPerpDim());
  for (int pe = 0; pe < e; ++pe) {
    double b = bAlcoveAtMidpoint(bPattern, pe);
    Eigen::MatrixXd lhat = lhatOp(b);
    Eigen::MatrixXd lcheck = lcheckOp(b);
    int s0 = pe, s1 = e + pe;
    double signB = pair.starBase[1][pe];   // star on the K1 block
    double signD = pair.starDual[1][pe];   // star on the K2 block
    int r0 = coordIndex(s0, 0, 0), r1 = coordIndex(s1, 0, 0);
    o.block(r1, r0, 3 * n, 3 * n) += signB * lhat;
    o.block(r0, r1, 3 * n, 3 * n) += signD * lcheck;
  }
  return o;
}

Eigen::MatrixXd CsPathEngine::mCheckBlock(int pairEdge, double bAlcove) const {
  const int n = geo_->n;
  const int perSlot = 3 * n - 1;
  const DualPairing& pair = geo_->pair;
  // per-slot basis block (identical for every slot)
  static thread_local Eigen::MatrixXd w;
  if (w.rows() != 3 * n) {
    Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(n, 1);
    ones.setOnes();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
    Eigen::MatrixXd zeroMean =
        qr.householderQ().rightCols(n - 1) * std::sqrt(double(n));
    w = Eigen::MatrixXd::Zero(3 * n, perSlot);
    for (int j = 0; j < n - 1; ++j)
      for (int t = 0; t < n; ++t) w(3 * t + 0, j) = zeroMean(t, j);
    for (int t = 0; t < n; ++t)
      for (int l = 1; l <= 2; ++l)
        w(3 * t + l, (n - 1) + 2 * t + (l - 1)) = std::sqrt(double(n));
  }
  Eigen::MatrixXd lhat = lhatOp(bAlcove), lcheck = lcheckOp(bAlcove);
  double signB = pair.starBase[1][pairEdge], signD = pair.starDual[1][pairEdge];
  double scale = kPi * k_ / double(n);
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * perSlot, 2 * perSlot);
  block.block(perSlot, 0, perSlot, perSlot) = scale * signB * w.transpose() * lhat * w;
  block.block(0, perSlot, perSlot, perSlot) = scale * signD * w.transpose() * lcheck * w;
  return block;
}

Eigen::MatrixXd CsPathEngine::mCheck(const Eigen::VectorXd& bPattern) const {
  const int e = geo_->primalEdges();
  const int perSlot = 3 * geo_->n - 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(aCheckDim(), aCheckDim());
  for (int pe = 0; pe < e; ++pe) {
    Eigen::MatrixXd block = mCheckBlock(pe, bAlcoveAtMidpoint(bPattern, pe));
    int r0 = pe * perSlot, r1 = (e + pe) * perSlot;
    m.block(r0, r0, perSlot, perSlot) = block.topLeftCorner(perSlot, perSlot);
    m.block(r0, r1, perSlot, perSlot) = block.topRightCorner(perSlot, perSlot);
    m.block(r1, r0, perSlot, perSlot) = block.bottomLeftCorner(perSlot, perSlot);
    m.block(r1, r1, perSlot, perSlot) = block.bottomRightCorner(perSlot, perSlot);
  }
  return m;
}

// --- action ------------------------------------------------------------------------

double CsPathEngine::discActionQuadratic(const Eigen::VectorXd& aCoords,
                                         const Eigen::VectorXd& bPattern) const {
  Eigen::VectorXd oa = aPerpOperator(bPattern) * aCoords;
  return kPi * k_ * (aCoords.dot(oa)) / double(geo_->n);
}

double CsPathEngine::discActionCoupling(const Eigen::VectorXd& aCoords,
                                        const Eigen::VectorXd& bPattern) const {
  // 2 pi k << star_K A, d_qK B >>: only the t-component of the t-mean of A
  // pairs with dB
  const int e = geo_->primalEdges();
  const int n = geo_->n;
  const QkComplex& qk = geo_->qk;
  const DualPairing& pair = geo_->pair;
  double total = 0.0;
  for (int slot = 0; slot < 2 * e; ++slot) {
    double mean = 0.0;
    for (int t = 0; t < n; ++t) mean += aCoords(coordIndex(slot, t, 0));
    mean /= n;
    int cs = slot / e, pe = slot % e;
    int imgCs = 1 - cs;
    int imgEdge = (cs == 0) ? pair.faceMap[1][pe] : pair.dualFaceMap[1][pe];
    double sign = (cs == 0) ? pair.starBase[1][pe] : pair.starDual[1][pe];
    for (int h = 0; h < 2; ++h) {
      int qe = qk.halfEdge(imgCs, imgEdge, h);
      double db = bPattern(qk.qk.edgeDst(qe)) - bPattern(qk.qk.edgeSrc(qe));
      total += sign * mean * db;
    }
  }
  return 2.0 * kPi * k_ * total;
}

double CsPathEngine::discAction(const Eigen::VectorXd& aCoords,
                                const Eigen::VectorXd& bPattern) const {
  return discActionQuadratic(aCoords, bPattern) + discActionCoupling(aCoords, bPattern);
}

double CsPathEngine::detFpMod1(const Eigen::VectorXd& bPattern) const {
  double out = 1.0;
  for (int v = 0; v < bFullDim(); ++v) {
    Eigen::VectorXd b(1);
    b(0) = bPattern(v);
    out *= std::sqrt(std::max(0.0, geo_->lie.fpDensity(b)));
  }
  return out;
}

double CsPathEngine::detFpRaw(const Eigen::VectorXd& bPattern) const {
  double out = 1.0;
  for (int v = 0; v < bFullDim(); ++v) {
    Eigen::VectorXd b(1);
    b(0) = bPattern(v);
    out *= geo_->lie.fpDensity(b);
  }
  return out;
}

// --- holonomy ------------------------------------------------------------------------

std::vector<CsPathEngine::HolonomyStep> CsPathEngine::loopSteps(const SimplicialLoop& l) const {
  const ProductComplex& prod = geo_->prod;
  const QkComplex& qk = geo_->qk;
  std::vector<HolonomyStep> steps;
  for (size_t kk = 0; kk < l.steps.size(); ++kk) {
    HolonomyStep st;
    const GenEdge& g = l.steps[kk];
    int bp = l.basepoints[kk];
    if (!g.empty()) {
      if (prod.isHorizontalEdge(g.edge)) {
        int baseEdge = prod.horizontalBaseEdge(g.edge);
        auto par = qk.edgeParent(baseEdge);
        int slot = par.complexSel * geo_->primalEdges() + par.edge;
        st.aParts.push_back({slot, bp % geo_->n, double(g.sign)});
      } else {
        int baseVertex = prod.verticalEdgeVertex(g.edge);
        st.bParts.push_back({baseVertex, double(g.sign) / double(geo_->n)});
      }
    }
    steps.push_back(st);
  }
  return steps;
}

std::vector<CsPathEngine::HolonomyStep> CsPathEngine::ribbonSteps(
    const SimplicialRibbon& r) const {
  std::vector<HolonomyStep> a = loopSteps(r.loop);
  std::vector<HolonomyStep> b = loopSteps(r.loopPrime);
  std::vector<HolonomyStep> out(a.size());
  for (size_t kk = 0; kk < a.size(); ++kk) {
    for (auto p : a[kk].aParts) {
      p.coeff *= 0.5;
      out[kk].aParts.push_back(p);
    }
    for (auto p : b[kk].aParts) {
      p.coeff *= 0.5;
      out[kk].aParts.push_back(p);
    }
    for (auto p : a[kk].bParts) out[kk].bParts.push_back({p.first, 0.5 * p.second});
    for (auto p : b[kk].bParts) out[kk].bParts.push_back({p.first, 0.5 * p.second});
  }
  return out;
}

Eigen::Matrix2cd CsPathEngine::holonomyMatrix(const std::vector<HolonomyStep>& steps,
                                              const Eigen::VectorXd& aCoords,
                                              const Eigen::VectorXd& bPattern) const {
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  for (const auto& st : steps) {
    Eigen::VectorXd tPart = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd kPart = Eigen::VectorXd::Zero(2);
    for (const auto& ap : st.aParts) {
      tPart(0) += ap.coeff * aCoords(coordIndex(ap.slot, ap.t, 0));
      kPart(0) += ap.coeff * aCoords(coordIndex(ap.slot, ap.t, 1));
      kPart(1) += ap.coeff * aCoords(coordIndex(ap.slot, ap.t, 2));
    }
    for (const auto& bp : st.bParts) tPart(0) += bp.second * bPattern(bp.first);
    u = u * expSu2(geo_->lie.definingMatrix(tPart, kPart));
  }
  return u;
}

Complex CsPathEngine::traceInColor(const Eigen::Matrix2cd& u, int color) const {
  Complex h = 0.5 * (u(0, 0) + u(1, 1));
  return chebU(color, h).u;
}

// --- inner Gaussian --------------------------------------------------------------------

Complex CsPathEngine::fresnelZ(const Eigen::VectorXd& bPattern) const {
  // blockwise log-accumulated Fresnel; callers that need rescaling use the
  // same code path through fresnelZFromBlocks
  return fresnelZFromBlocks(bPattern);
}

Complex CsPathEngine::fresnelZFromBlocks(const Eigen::VectorXd& bPattern) const {
  const int e = geo_->primalEdges();
  double logMag = 0.0, phase = 0.0;
  for (int pe = 0; pe < e; ++pe) {
    Eigen::MatrixXd s = -2.0 * mCheckBlock(pe, bAlcoveAtMidpoint(bPattern, pe));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    for (int a = 0; a < s.rows(); ++a) {
      double la = es.eigenvalues()(a);
      if (std::abs(la) <= 1e-10 * scale)
        throw CsError("degenerate M_check: a midpoint value of B is non-regular");
      logMag += 0.5 * std::log(2.0 * kPi / std::abs(la));
      phase += -kPi / 4.0 * (la > 0 ? 1.0 : -1.0);
    }
  }
  return std::exp(Complex(logMag, phase));
}

struct CsPathEngine::TraceJet {
  Complex t0 = 1.0;
  std::vector<int> support;          // plain A-coordinates
  Eigen::VectorXcd t1;               // d(Tr)/d(coord)
  Eigen::MatrixXcd t2;               // second derivatives
};

CsPathEngine::TraceJet CsPathEngine::traceJet(
    const std::vector<HolonomyStep>& steps, int color, const Eigen::VectorXd& bPattern,
    const Eigen::LDLT<Eigen::MatrixXd>& /*unused*/) const {
  const int n = static_cast<int>(steps.size());

  // support coordinates and per-step coefficient matrices
  std::map<int, int> coordPos;
  struct StepDeriv {
    std::vector<std::pair<int, Eigen::Matrix2cd>> g;  // (support pos, dxi/dcoord)
  };
  std::vector<StepDeriv> deriv(n);
  std::vector<Eigen::Matrix2cd> xi0(n);
  Eigen::VectorXd e0(1), e1(2), e2(2);
  e0 << 1.0;
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  Eigen::Matrix2cd basT = geo_->lie.definingMatrix(e0, Eigen::VectorXd::Zero(2));
  Eigen::Matrix2cd basK1 = geo_->lie.definingMatrix(Eigen::VectorXd::Zero(1), e1);
  Eigen::Matrix2cd basK2 = geo_->lie.definingMatrix(Eigen::VectorXd::Zero(1), e2);
  const Eigen::Matrix2cd bas[3] = {basT, basK1, basK2};

  for (int kk = 0; kk < n; ++kk) {
    Eigen::VectorXd tPart = Eigen::VectorXd::Zero(1);
    for (const auto& bp : steps[kk].bParts) tPart(0) += bp.second * bPattern(bp.first);
    xi0[kk] = geo_->lie.definingMatrix(tPart, Eigen::VectorXd::Zero(2));
    for (const auto& ap : steps[kk].aParts)
      for (int l = 0; l < 3; ++l) {
        int coord = coordIndex(ap.slot, ap.t, l);
        auto [it, fresh] = coordPos.emplace(coord, static_cast<int>(coordPos.size()));
        deriv[kk].g.push_back({it->second, ap.coeff * bas[l]});
      }
  }

  TraceJet jet;
  jet.support.resize(coordPos.size());
  for (const auto& [coord, pos] : coordPos) jet.support[pos] = coord;
  const int ns = static_cast<int>(coordPos.size());

  // exponentials and Frechet derivatives per step
  std::vector<Eigen::Matrix2cd> expXi(n);
  std::vector<bool> flat(n);
  for (int kk = 0; kk < n; ++kk) {
    flat[kk] = xi0[kk].norm() < 1e-14;
    expXi[kk] = flat[kk] ? Eigen::Matrix2cd::Identity() : expSu2(xi0[kk]);
  }
  auto dexp1 = [&](int kk, const Eigen::Matrix2cd& g) -> Eigen::Matrix2cd {
    if (flat[kk]) return g;
    Eigen::Matrix4cd blk = Eigen::Matrix4cd::Zero();
    blk.topLeftCorner<2, 2>() = xi0[kk];
    blk.bottomRightCorner<2, 2>() = xi0[kk];
    blk.topRightCorner<2, 2>() = g;
    Eigen::Matrix4cd e = blk.exp();
    return e.topRightCorner<2, 2>();
  };
  auto dexp2 = [&](int kk, const Eigen::Matrix2cd& g, const Eigen::Matrix2cd& h)
      -> Eigen::Matrix2cd {
    if (flat[kk]) return 0.5 * (g * h + h * g);
    auto ordered = [&](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
      Eigen::Matrix<Complex, 6, 6> blk = Eigen::Matrix<Complex, 6, 6>::Zero();
      blk.block<2, 2>(0, 0) = xi0[kk];
      blk.block<2, 2>(2, 2) = xi0[kk];
      blk.block<2, 2>(4, 4) = xi0[kk];
      blk.block<2, 2>(0, 2) = a;
      blk.block<2, 2>(2, 4) = b;
      Eigen::Matrix<Complex, 6, 6> e = blk.exp();
      return Eigen::Matrix2cd(e.block<2, 2>(0, 4));
    };
    return ordered(g, h) + ordered(h, g);
  };

  // prefix/suffix products
  std::vector<Eigen::Matrix2cd> pre(n + 1), suf(n + 2);
  pre[0] = Eigen::Matrix2cd::Identity();
  for (int kk = 0; kk < n; ++kk) pre[kk + 1] = pre[kk] * expXi[kk];
  suf[n + 1] = suf[n] = Eigen::Matrix2cd::Identity();
  for (int kk = n - 1; kk >= 0; --kk) suf[kk] = expXi[kk] * suf[kk + 1];
  // suf[k] = E_k ... E_n with 0-based steps shifted by one below

  Eigen::Matrix2cd h0m = pre[n];
  Complex h0 = 0.5 * (h0m(0, 0) + h0m(1, 1));
  Cheb cheb = chebU(color, h0);
  jet.t0 = cheb.u;

  // first derivatives of the product
  std::vector<Eigen::Matrix2cd> h1(ns, Eigen::Matrix2cd::Zero());
  for (int kk = 0; kk < n; ++kk)
    for (const auto& [pos, g] : deriv[kk].g)
      h1[pos] += pre[kk] * dexp1(kk, g) * suf[kk + 1];

  jet.t1 = Eigen::VectorXcd::Zero(ns);
  for (int a = 0; a < ns; ++a)
    jet.t1(a) = cheb.du * 0.5 * (h1[a](0, 0) + h1[a](1, 1));

  // second derivatives
  jet.t2 = Eigen::MatrixXcd::Zero(ns, ns);
  std::vector<Eigen::Matrix2cd> h2((size_t)ns * ns, Eigen::Matrix2cd::Zero());
  for (int kk = 0; kk < n; ++kk)
    for (const auto& [pa, ga] : deriv[kk].g)
      for (const auto& [pb, gb] : deriv[kk].g) {
        if (pa > pb) continue;
        Eigen::Matrix2cd d2 = pre[kk] * dexp2(kk, ga, gb) * suf[kk + 1];
        h2[pa * ns + pb] += (pa == pb) ? d2 : d2;
      }
  for (int kk = 0; kk < n; ++kk)
    for (int ll = kk + 1; ll < n; ++ll) {
      Eigen::Matrix2cd mid = Eigen::Matrix2cd::Identity();
      for (int mm = kk + 1; mm < ll; ++mm) mid = mid * expXi[mm];
      for (const auto& [pa, ga] : deriv[kk].g)
        for (const auto& [pb, gb] : deriv[ll].g) {
          Eigen::Matrix2cd term =
              pre[kk] * dexp1(kk, ga) * mid * dexp1(ll, gb) * suf[ll + 1];
          int i = std::min(pa, pb), j = std::max(pa, pb);
          h2[i * ns + j] += term;
        }
    }
  for (int a = 0; a < ns; ++a)
    for (int b = a; b < ns; ++b) {
      Complex trh2 = 0.5 * (h2[a * ns + b](0, 0) + h2[a * ns + b](1, 1));
      Complex trA = 0.5 * (h1[a](0, 0) + h1[a](1, 1));
      Complex trB = 0.5 * (h1[b](0, 0) + h1[b](1, 1));
      Complex val = cheb.d2u * trA * trB + cheb.du * trh2;
      jet.t2(a, b) = val;
      jet.t2(b, a) = val;
    }
  return jet;
}

Complex CsPathEngine::holonomyExpectation(const RibbonLink& link,
                                          const Eigen::VectorXd& bPattern) const {
  if (link.ribbons.empty()) return 1.0;
  bool bOnly = true;
  std::vector<std::vector<HolonomyStep>> allSteps;
  for (const auto& r : link.ribbons) {
    allSteps.push_back(ribbonSteps(r));
    for (const auto& st : allSteps.back())
      if (!st.aParts.empty()) bOnly = false;
  }
  if (bOnly) {
    Complex out = 1.0;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(aPerpDim());
    for (size_t i = 0; i < link.ribbons.size(); ++i)
      out *= traceInColor(holonomyMatrix(allSteps[i], zero, bPattern), link.colors[i]);
    return out;
  }

  // second order in the A-fluctuation about the Gaussian mean
  Eigen::MatrixXd mc = mCheck(bPattern);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(mc);
  if (ldlt.info() != Eigen::Success)
    throw CsError("degenerate M_check in holonomy expectation");

  std::vector<TraceJet> jets;
  for (size_t i = 0; i < link.ribbons.size(); ++i)
    jets.push_back(traceJet(allSteps[i], link.colors[i], bPattern, ldlt));

  // covariance between plain coordinates: (i/2) row_a(U) M^-1 row_b(U)^T
  std::vector<int> global;
  std::vector<std::pair<int, int>> slice;  // (jet, local) per global entry
  for (size_t i = 0; i < jets.size(); ++i)
    for (size_t a = 0; a < jets[i].support.size(); ++a) {
      global.push_back(jets[i].support[a]);
      slice.push_back({static_cast<int>(i), static_cast<int>(a)});
    }
  const int ng = static_cast<int>(global.size());
  Eigen::MatrixXd rows(ng, aCheckDim());
  for (int a = 0; a < ng; ++a) rows.row(a) = aCheckBasis_.row(global[a]);
  Eigen::MatrixXd solved = ldlt.solve(rows.transpose());
  Eigen::MatrixXcd cov = Complex(0, 0.5) * (rows * solved).cast<Complex>();

  // E[prod Tr] to second order; first-order terms vanish (centered measure)
  const size_t m = jets.size();
  Complex prodT0 = 1.0;
  for (const auto& j : jets) prodT0 *= j.t0;
  Complex out = prodT0;
  // self terms
  for (size_t i = 0; i < m; ++i) {
    Complex contr = 0.0;
    int off = 0;
    for (size_t q = 0; q < i; ++q) off += static_cast<int>(jets[q].support.size());
    int sz = static_cast<int>(jets[i].support.size());
    for (int a = 0; a < sz; ++a)
      for (int b = 0; b < sz; ++b)
        contr += 0.5 * cov(off + a, off + b) * jets[i].t2(a, b);
    Complex rest = 1.0;
    for (size_t q = 0; q < m; ++q)
      if (q != i) rest *= jets[q].t0;
    out += contr * rest;
  }
  // cross terms
  for (size_t i = 0; i < m; ++i)
    for (size_t j2 = i + 1; j2 < m; ++j2) {
      int offI = 0, offJ = 0;
      for (size_t q = 0; q < i; ++q) offI += static_cast<int>(jets[q].support.size());
      for (size_t q = 0; q < j2; ++q) offJ += static_cast<int>(jets[q].support.size());
      Complex contr = 0.0;
      for (size_t a = 0; a < jets[i].support.size(); ++a)
        for (size_t b = 0; b < jets[j2].support.size(); ++b)
          contr += cov(offI + static_cast<int>(a), offJ + static_cast<int>(b)) *
                   jets[i].t1(a) * jets[j2].t1(b);
      Complex rest = 1.0;
      for (size_t q = 0; q < m; ++q)
        if (q != i && q != j2) rest *= jets[q].t0;
      out += contr * rest;
    }
  return out;
}

Complex CsPathEngine::innerGaussian(const RibbonLink& link,
                                    const Eigen::VectorXd& bPattern) const {
  return fresnelZ(bPattern) * holonomyExpectation(link, bPattern);
}

Complex CsPathEngine::holonomyExpectationTValued(const RibbonLink& link,
                                                 const Eigen::VectorXd& bPattern) const {
  // A restricted to its t-components: every trace splits into weight terms
  // exp(i w x(A)) whose expectations are Gaussian characteristic functions
  Eigen::MatrixXd mc = mCheck(bPattern);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(mc);

  struct RibbonData {
    Eigen::VectorXd functional;  // x-coordinate functional on ON coords
    double constant;             // B-part x-coordinate
    int color;
  };
  std::vector<RibbonData> rd;
  for (size_t i = 0; i < link.ribbons.size(); ++i) {
    auto steps = ribbonSteps(link.ribbons[i]);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(aPerpDim());
    double cst = 0.0;
    for (const auto& st : steps) {
      for (const auto& ap : st.aParts) w(coordIndex(ap.slot, ap.t, 0)) += ap.coeff;
      for (const auto& bp : st.bParts) cst += bp.second * bPattern(bp.first);
    }
    RibbonData r;
    r.functional = kSqrt2Pi * (aCheckBasis_.transpose() * w);
    r.constant = kSqrt2Pi * cst;
    r.color = link.colors[i];
    rd.push_back(r);
  }

  // sum over weight tuples
  Complex out = 0.0;
  std::vector<int> idx(rd.size(), 0);
  Complex ic(0, 1);
  while (true) {
    Eigen::VectorXd j = Eigen::VectorXd::Zero(aCheckDim());
    double phase0 = 0.0;
    for (size_t i = 0; i < rd.size(); ++i) {
      int wgt = rd[i].color - 2 * idx[i];
      j += wgt * rd[i].functional;
      phase0 += wgt * rd[i].constant;
    }
    // E[e^{i <j, x>}] = e^{-(i/4) j^T M^-1 j} for density e^{i x^T M x}
    Eigen::VectorXd sol = ldlt.solve(j);
    Complex val = std::exp(ic * phase0) * std::exp(Complex(0, -0.25) * j.dot(sol));
    out += val;
    size_t p = 0;
    while (p < rd.size()) {
      if (++idx[p] <= rd[p].color) break;
      idx[p] = 0;
      ++p;
    }
    if (p == rd.size()) break;
  }
  return out;
}

// --- outer integral ---------------------------------------------------------------------

namespace {

struct GridNode {
  double c;        // kernel coefficient (>= 0 half-axis)
  double weight;   // includes the even-reflection factor 2
};

std::vector<GridNode> buildHalfAxisGrid(double r, double panelWidth) {
  std::vector<GridNode> nodes;
  int panels = std::max(1, static_cast<int>(std::ceil(r / panelWidth)));
  double h = r / panels;
  for (int p = 0; p < panels; ++p) {
    double mid = (p + 0.5) * h, half = 0.5 * h;
    for (int q = 0; q < 16; ++q)
      nodes.push_back({mid + half * kGlNodes[q], 2.0 * half * kGlWeights[q]});
  }
  return nodes;
}

}  // namespace

CsPathEngine::OuterValue CsPathEngine::outerIntegral(const RibbonLink& link, YMode mode,
                                                     const OuterOptions& opt) const {
  if (bKernelDim() < 1) throw CsError("empty reduced B-space");
  if (bKernelDim() > 1)
    throw CsError("outer integral implemented for a one-dimensional reduced B-space");

  const Eigen::VectorXd u = kernelPatterns_.col(0);
  // the one-dimensional kernel always contains the constants, so u must be
  // a constant vertex pattern
  double u0 = u.mean();
  if ((u.array() - u0).abs().maxCoeff() > 1e-9)
    throw CsError("reduced B-space is not the constant field");

  const LieData& lie = geo_->lie;
  const int nv = bFullDim();
  const double dxdc = kSqrt2Pi * u0;   // alcove coordinate per unit kernel coeff

  auto patternAt = [&](double x) { return Eigen::VectorXd::Constant(nv, x / kSqrt2Pi); };

  auto integrandBase = [&](double x, double s) -> Complex {
    Eigen::VectorXd pat = patternAt(x);
    Eigen::VectorXd b(1);
    double mol = 1.0;
    for (int v = 0; v < nv; ++v) {
      b(0) = pat(v);
      mol *= mollifier(lie, s, b);
      if (mol == 0.0) return 0.0;
    }
    double fp = opt.mod1Half ? detFpMod1(pat) : detFpRaw(pat);
    if (fp == 0.0) return 0.0;
    Complex z = fresnelZFromBlocks(pat);
    Complex tr = holonomyExpectation(link, pat);
    return mol * fp * z * tr;
  };

  OuterValue out;
  out.prefactor = reduction_.prefactor;
  out.kernelDim = 1;

  if (mode == YMode::Poisson) {
    // resummed y-sum: average over the 2k weight-lattice points per period
    Complex acc = 0.0;
    for (int j = 0; j < 2 * k_; ++j) {
      double x = kPi * j / k_;
      Eigen::VectorXd b(1);
      b(0) = x / kSqrt2Pi;
      if (lie.wallDistance(b) < 1e-12) continue;  // integrand vanishes on walls
      acc += integrandBase(x, opt.s);
    }
    out.value = reduction_.prefactor * acc / double(2 * k_);
    return out;
  }

  // direct mode: (eps/pi)^{1/2} Int g(c) D_Y(x(c)) e^{-eps c^2} dc
  double epsMin = opt.epsSchedule.back();
  double r = std::sqrt(21.0 / epsMin);
  double panelFreq = 2.0 * k_ * (2.0 * opt.yCutoff) * dxdc;      // Dirichlet kernel
  double panelWidth =
      std::min({2.5 / std::max(panelFreq, 1e-6), (opt.s / 3.0) / dxdc, 0.35 / dxdc});
  panelWidth *= opt.panelScale;

  auto evaluate = [&](double width) {
    std::vector<GridNode> grid = buildHalfAxisGrid(r, width);
    std::vector<Complex> g(grid.size());
    std::vector<double> xs(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
      xs[i] = grid[i].c * dxdc;
      g[i] = integrandBase(xs[i], opt.s);
    }
    std::vector<Complex> perEps;
    for (double eps : opt.epsSchedule) {
      Complex acc = 0.0;
      for (size_t i = 0; i < grid.size(); ++i) {
        double dir = 1.0;
        for (int nn = 1; nn <= opt.yCutoff; ++nn) dir += 2.0 * std::cos(2.0 * k_ * nn * xs[i]);
        acc += grid[i].weight * g[i] * dir * std::exp(-eps * grid[i].c * grid[i].c);
      }
      perEps.push_back(std::sqrt(eps / kPi) * acc);
    }
    return perEps;
  };

  std::vector<Complex> coarse = evaluate(panelWidth);
  std::vector<Complex> fine = evaluate(panelWidth / 2.0);
  out.value = reduction_.prefactor * fine.back();
  out.quadError = std::abs(fine.back() - coarse.back()) * reduction_.prefactor;
  out.epsError =
      std::abs(fine.back() - fine[fine.size() - 2]) * reduction_.prefactor;
  return out;
}

WloResult wloRig(const CsPathEngine& engine, const RibbonLink& link, const WloOptions& opt) {
  const CsGeometry& geo = engine.geometry();
  RibbonLink empty = validateLink(geo.prod, geo.qk.qk, {}, {}, link.sigma0);

  WloResult res;
  CsPathEngine::OuterOptions oo;
  oo.yCutoff = opt.yCutoff;
  oo.epsSchedule = opt.epsSchedule;
  oo.mod1Half = opt.mod1Half;

  // direct mode along the s-schedule
  std::vector<Complex> ratios;
  double quadErr = 0.0;
  Complex numLast, denLast;
  for (double s : opt.sSchedule) {
    oo.s = s;
    auto num = engine.outerIntegral(link, CsPathEngine::YMode::Direct, oo);
    auto den = engine.outerIntegral(empty, CsPathEngine::YMode::Direct, oo);
    if (std::abs(den.value) < 1e-12)
      throw CsError("denominator WLO below threshold");
    ratios.push_back(num.value / den.value);
    quadErr = std::max(quadErr, (num.quadError + den.quadError) /
                                    std::max(std::abs(den.value), 1e-300));
    numLast = num.value;
    denLast = den.value;
  }
  // linear Richardson in s on the last two entries
  Complex ratioDirect = ratios.back();
  if (ratios.size() >= 2) {
    size_t n = ratios.size();
    double s1 = opt.sSchedule[n - 2], s2 = opt.sSchedule[n - 1];
    ratioDirect = (ratios[n - 1] * s1 - ratios[n - 2] * s2) / (s1 - s2);
    res.sDrift = std::abs(ratios[n - 1] - ratios[n - 2]);
  }
  res.numerator = numLast;
  res.denominator = denLast;
  res.ratio = ratioDirect;
  res.quadError = quadErr;

  // cutoff stability of the direct ratio
  {
    oo.s = opt.sSchedule.back();
    oo.yCutoff = 2 * opt.yCutoff;
    auto num = engine.outerIntegral(link, CsPathEngine::YMode::Direct, oo);
    auto den = engine.outerIntegral(empty, CsPathEngine::YMode::Direct, oo);
    res.cutoffDrift = std::abs(num.value / den.value - ratios.back());
    oo.yCutoff = opt.yCutoff;
  }

  // Poisson-resummed mode
  oo.s = opt.sSchedule.back();
  auto nump = engine.outerIntegral(link, CsPathEngine::YMode::Poisson, oo);
  auto denp = engine.outerIntegral(empty, CsPathEngine::YMode::Poisson, oo);
  res.numeratorPoisson = nump.value;
  res.denominatorPoisson = denp.value;
  Complex ratioPoisson = nump.value / denp.value;
  res.modeDisagreement = std::abs(ratioDirect - ratioPoisson);
  if (opt.checkModes && res.modeDisagreement > opt.modeAgreementTol)
    throw CsError("cutoff instability: direct and Poisson y-modes disagree by " +
                  std::to_string(res.modeDisagreement));
  return res;
}

}  // namespace cstorus
