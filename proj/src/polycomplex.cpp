#include "cstorus/polycomplex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cstorus {

int PolyComplex::faceCount(int p) const {
  switch (p) {
    case 0: return nVertices;
    case 1: return static_cast<int>(edges.size());
    case 2: return static_cast<int>(faces2.size());
    case 3: return static_cast<int>(cells3.size());
    default: return 0;
  }
}

int PolyComplex::eulerCharacteristic() const {
  int chi = 0;
  for (int p = 0; p <= dim; ++p) chi += (p % 2 == 0 ? 1 : -1) * faceCount(p);
  return chi;
}

std::vector<int> PolyComplex::faceVertices(int f) const {
  std::vector<int> out;
  for (const SignedRef& r : faces2[f]) out.push_back(tail(r));
  return out;
}

std::vector<int> PolyComplex::faceEdges(int f) const {
  std::vector<int> out;
  for (const SignedRef& r : faces2[f]) out.push_back(r.index);
  return out;
}

std::vector<PolyComplex::Triplet> PolyComplex::boundaryTriplets(int p) const {
  std::vector<Triplet> t;
  if (p == 1) {
    for (int e = 0; e < faceCount(1); ++e) {
      t.push_back({edges[e][1], e, +1});
      t.push_back({edges[e][0], e, -1});
    }
  } else if (p == 2) {
    for (int f = 0; f < faceCount(2); ++f)
      for (const SignedRef& r : faces2[f]) t.push_back({r.index, f, r.sign});
  } else if (p == 3) {
    for (int c = 0; c < faceCount(3); ++c)
      for (const SignedRef& r : cells3[c]) t.push_back({r.index, c, r.sign});
  }
  return t;
}

void PolyComplex::validate() const {
  for (int e = 0; e < faceCount(1); ++e) {
    if (edges[e][0] < 0 || edges[e][0] >= nVertices || edges[e][1] < 0 ||
        edges[e][1] >= nVertices)
      throw ComplexError("dangling face reference: edge " + std::to_string(e));
    if (edges[e][0] == edges[e][1])
      throw ComplexError("degenerate edge " + std::to_string(e));
  }
  for (int f = 0; f < faceCount(2); ++f) {
    const auto& cyc = faces2[f];
    if (cyc.size() < 3) throw ComplexError("face " + std::to_string(f) + " has fewer than 3 edges");
    std::set<int> seenV;
    for (size_t k = 0; k < cyc.size(); ++k) {
      if (cyc[k].index < 0 || cyc[k].index >= faceCount(1))
        throw ComplexError("dangling face reference: face " + std::to_string(f));
      const SignedRef& cur = cyc[k];
      const SignedRef& nxt = cyc[(k + 1) % cyc.size()];
      if (head(cur) != tail(nxt))
        throw ComplexError("face " + std::to_string(f) + " boundary is not a closed cycle");
      if (!seenV.insert(tail(cur)).second)
        throw ComplexError("face " + std::to_string(f) + " revisits a vertex");
    }
  }
  for (int c = 0; c < faceCount(3); ++c)
    for (const SignedRef& r : cells3[c])
      if (r.index < 0 || r.index >= faceCount(2))
        throw ComplexError("dangling face reference: cell " + std::to_string(c));

  // boundary-of-boundary on basis chains, exact integers
  for (int p = 2; p <= dim; ++p) {
    std::vector<std::map<int, int>> bd(faceCount(p - 1));
    for (const Triplet& t : boundaryTriplets(p - 1)) bd[t.col][t.row] += t.val;
    for (int f = 0; f < faceCount(p); ++f) {
      std::map<int, int> acc;
      const auto& refs = (p == 2) ? faces2[f] : cells3[f];
      for (const SignedRef& r : refs)
        for (const auto& [row, val] : bd[r.index]) acc[row] += r.sign * val;
      for (const auto& [row, val] : acc)
        if (val != 0)
          throw ComplexError("boundary of boundary nonzero on " + std::to_string(p) +
                             "-face " + std::to_string(f));
    }
  }

  if (closedSurface) {
    if (dim != 2) throw ComplexError("closed_surface flag on non-2-dimensional complex");
    std::vector<int> plus(faceCount(1), 0), minus(faceCount(1), 0);
    for (int f = 0; f < faceCount(2); ++f)
      for (const SignedRef& r : faces2[f]) (r.sign > 0 ? plus : minus)[r.index]++;
    for (int e = 0; e < faceCount(1); ++e) {
      if (plus[e] + minus[e] != 2)
        throw ComplexError("non-surface edge " + std::to_string(e) + ": bounds " +
                           std::to_string(plus[e] + minus[e]) + " faces");
      if (plus[e] != 1 || minus[e] != 1)
        throw ComplexError("incoherent orientation at edge " + std::to_string(e));
    }
  }
}

PolyComplex PolyComplex::flipped() const {
  PolyComplex out = *this;
  out.name = name + "-flipped";
  for (auto& cyc : out.faces2) {
    std::reverse(cyc.begin(), cyc.end());
    for (auto& r : cyc) r.sign = -r.sign;
  }
  out.leftFace_.clear();
  out.rightFace_.clear();
  return out;
}

void PolyComplex::buildEdgeFaceIndex() const {
  leftFace_.assign(faceCount(1), -1);
  rightFace_.assign(faceCount(1), -1);
  for (int f = 0; f < faceCount(2); ++f)
    for (const SignedRef& r : faces2[f])
      (r.sign > 0 ? leftFace_ : rightFace_)[r.index] = f;
}

int PolyComplex::leftFace(int e) const {
  if (leftFace_.empty()) buildEdgeFaceIndex();
  return leftFace_[e];
}

int PolyComplex::rightFace(int e) const {
  if (rightFace_.empty()) buildEdgeFaceIndex();
  return rightFace_[e];
}

// --- construction -----------------------------------------------------------

PolyComplex complexFromFaceCycles(int nVertices,
                                  const std::vector<std::vector<int>>& cycles,
                                  const std::string& name,
                                  bool makeCoherent) {
  PolyComplex c;
  c.dim = 2;
  c.name = name;
  c.nVertices = nVertices;
  c.closedSurface = true;

  std::map<std::pair<int, int>, int> edgeIndex;
  std::vector<std::vector<int>> faceVerts = cycles;
  for (const auto& cyc : faceVerts)
    for (size_t k = 0; k < cyc.size(); ++k) {
      int a = cyc[k], b = cyc[(k + 1) % cyc.size()];
      auto key = std::minmax(a, b);
      edgeIndex.emplace(std::make_pair(key.first, key.second), 0);
    }
  int id = 0;
  for (auto& [key, idx] : edgeIndex) idx = id++;
  c.edges.resize(edgeIndex.size());
  for (const auto& [key, idx] : edgeIndex) c.edges[idx] = {key.first, key.second};

  auto cycleToRefs = [&](const std::vector<int>& cyc) {
    std::vector<SignedRef> refs;
    for (size_t k = 0; k < cyc.size(); ++k) {
      int a = cyc[k], b = cyc[(k + 1) % cyc.size()];
      auto key = std::minmax(a, b);
      int e = edgeIndex.at({key.first, key.second});
      refs.push_back({e, a < b ? +1 : -1});
    }
    return refs;
  };

  if (makeCoherent && !faceVerts.empty()) {
    // Coherence sweep: neighbors across an edge must traverse it oppositely.
    std::map<int, std::vector<int>> edgeFaces;
    std::vector<std::vector<SignedRef>> refs;
    for (const auto& cyc : faceVerts) refs.push_back(cycleToRefs(cyc));
    for (size_t f = 0; f < refs.size(); ++f)
      for (const SignedRef& r : refs[f]) edgeFaces[r.index].push_back(static_cast<int>(f));

    std::vector<int> state(faceVerts.size(), 0);  // 0 unseen, 1 keep, -1 flip
    std::vector<int> queue = {0};
    state[0] = 1;
    while (!queue.empty()) {
      int f = queue.back();
      queue.pop_back();
      for (const SignedRef& r : refs[f]) {
        int sf = r.sign * state[f];
        for (int g : edgeFaces[r.index]) {
          if (g == f) continue;
          int sg = 0;
          for (const SignedRef& rg : refs[g])
            if (rg.index == r.index) sg = rg.sign;
          int want = (sf == sg) ? -1 : 1;  // flip g if it traverses e the same way
          if (state[g] == 0) {
            state[g] = want;
            queue.push_back(g);
          }
        }
      }
    }
    for (size_t f = 0; f < faceVerts.size(); ++f)
      if (state[f] == -1) std::reverse(faceVerts[f].begin(), faceVerts[f].end());
  }

  for (const auto& cyc : faceVerts) c.faces2.push_back(cycleToRefs(cyc));
  c.validate();
  return c;
}

PolyComplex tetrahedronComplex() {
  PolyComplex c = complexFromFaceCycles(
      4, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}}, "tetrahedron", false);
  c.geometry = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  return c;
}

PolyComplex cubeComplex() {
  PolyComplex c = complexFromFaceCycles(8,
                                        {{0, 3, 2, 1},
                                         {4, 5, 6, 7},
                                         {0, 1, 5, 4},
                                         {1, 2, 6, 5},
                                         {2, 3, 7, 6},
                                         {3, 0, 4, 7}},
                                        "cube", false);
  c.geometry = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  return c;
}

PolyComplex icosahedronComplex() {
  // standard vertex/face table; orientations fixed by the coherence sweep
  std::vector<std::vector<int>> f = {
      {0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10},  {0, 10, 11},
      {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6},  {7, 1, 8},
      {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},   {3, 8, 9},
      {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},   {9, 8, 1}};
  PolyComplex c = complexFromFaceCycles(12, f, "icosahedron", true);
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  c.geometry = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  return c;
}

PolyComplex triangularTorusComplex(int n, int m) {
  if (n < 2 || m < 2) throw ComplexError("triangular torus needs n, m >= 2");
  auto vid = [&](int i, int j) { return ((i % n + n) % n) * m + ((j % m + m) % m); };
  std::vector<std::vector<int>> cycles;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      cycles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});   // up
      cycles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});   // down
    }
  return complexFromFaceCycles(n * m, cycles,
                               "tri-torus-" + std::to_string(n) + "x" + std::to_string(m),
                               true);
}

PolyComplex hexagonalTorusComplex(int n, int m) {
  DualPairing pair = canonicalDual(triangularTorusComplex(n, m));
  PolyComplex hex = pair.dual;
  hex.name = "hex-torus-" + std::to_string(n) + "x" + std::to_string(m);
  hex.validate();
  return hex;
}

PolyComplex cyclicComplex(int n) {
  if (n < 2) throw ComplexError("Z_N complex needs N >= 2");
  PolyComplex c;
  c.dim = 1;
  c.name = "Z_" + std::to_string(n);
  c.nVertices = n;
  for (int t = 0; t < n; ++t) c.edges.push_back({t, (t + 1) % n});
  c.validate();
  return c;
}

// --- dual pairing -----------------------------------------------------------

namespace {

// Rotation system of a coherently oriented surface: for each vertex the
// counterclockwise cyclic order of incident darts.  A dart is (edge, dir)
// with dir=+1 pointing src->dst; darts are keyed by their tail vertex.
struct Rotation {
  // at[v] = list of (edge, dirOut) in ccw order
  std::vector<std::vector<std::pair<int, int>>> at;
};

Rotation rotationSystem(const PolyComplex& k) {
  // corner map: for each out-dart at v, the in-dart of the same face corner
  std::map<std::pair<int, int>, std::pair<int, int>> cornerIn;  // outdart -> indart
  for (int f = 0; f < k.faceCount(2); ++f) {
    const auto& cyc = k.faces2[f];
    const size_t sz = cyc.size();
    for (size_t i = 0; i < sz; ++i) {
      const SignedRef& in = cyc[i];
      const SignedRef& out = cyc[(i + 1) % sz];
      cornerIn[{out.index, out.sign}] = {in.index, in.sign};
    }
  }
  Rotation rot;
  rot.at.resize(k.faceCount(0));
  std::vector<char> used(2 * k.faceCount(1), 0);
  auto dartId = [](std::pair<int, int> d) { return 2 * d.first + (d.second > 0 ? 0 : 1); };
  for (int e = 0; e < k.faceCount(1); ++e)
    for (int s : {+1, -1}) {
      std::pair<int, int> d0 = {e, s};
      if (used[dartId(d0)]) continue;
      int v = (s > 0) ? k.edgeSrc(e) : k.edgeDst(e);
      std::pair<int, int> d = d0;
      do {
        rot.at[v].push_back(d);
        used[dartId(d)] = 1;
        // ccw successor of out-dart d: reverse of the in-dart of d's corner
        auto in = cornerIn.at(d);
        d = {in.first, -in.second};
      } while (d != d0);
    }
  return rot;
}

}  // namespace

DualPairing canonicalDual(const PolyComplex& k1) {
  if (!k1.closedSurface) throw ComplexError("canonical dual requires a closed surface complex");
  k1.validate();

  DualPairing pair;
  pair.base = k1;

  const int V = k1.faceCount(0), E = k1.faceCount(1), F = k1.faceCount(2);
  PolyComplex& k2 = pair.dual;
  k2.dim = 2;
  k2.name = k1.name + "-dual";
  k2.nVertices = F;
  k2.closedSurface = true;

  // dual edge e': rightFace(e) -> leftFace(e)
  k2.edges.resize(E);
  for (int e = 0; e < E; ++e) k2.edges[e] = {k1.rightFace(e), k1.leftFace(e)};

  // dual 2-face around vertex v: faces of K1 in ccw order around v
  Rotation rot = rotationSystem(k1);
  k2.faces2.resize(V);
  for (int v = 0; v < V; ++v) {
    std::vector<SignedRef> cyc;
    for (const auto& [e, dirOut] : rot.at[v]) {
      // crossing edge e while rotating ccw around v goes right-of-e to
      // left-of-e iff the dart points out of v
      cyc.push_back({e, dirOut > 0 ? +1 : -1});
    }
    k2.faces2[v] = cyc;
  }
  k2.validate();

  if (!k1.geometry.empty()) {
    k2.geometry.resize(F, {0, 0, 0});
    for (int f = 0; f < F; ++f) {
      auto vs = k1.faceVertices(f);
      for (int v : vs)
        for (int a = 0; a < 3; ++a) k2.geometry[f][a] += k1.geometry[v][a] / vs.size();
    }
  }

  for (int p = 0; p <= 2; ++p) {
    pair.faceMap[p].resize(k1.faceCount(p));
    std::iota(pair.faceMap[p].begin(), pair.faceMap[p].end(), 0);
    pair.dualFaceMap[p].resize(k2.faceCount(p));
    std::iota(pair.dualFaceMap[p].begin(), pair.dualFaceMap[p].end(), 0);
  }

  // Star signs of the induced-orientation rule.  With the storage conventions
  // above (coherent ccw faces, dual edges right->left) the base-direction
  // signs are all +1; the reverse direction carries (-1)^{p(2-p)}.
  for (int p = 0; p <= 2; ++p) {
    pair.starBase[p].assign(k1.faceCount(p), +1);
    pair.starDual[p].assign(k2.faceCount(p), p == 1 ? -1 : +1);
  }

  pair.validate();
  return pair;
}

void DualPairing::validate() const {
  for (int p = 0; p <= 2; ++p) {
    if (static_cast<int>(faceMap[p].size()) != base.faceCount(p))
      throw ComplexError("dual pairing: faceMap size mismatch at p=" + std::to_string(p));
    if (static_cast<int>(dualFaceMap[p].size()) != dual.faceCount(p))
      throw ComplexError("dual pairing: reverse map size mismatch");
    std::vector<char> hit(dual.faceCount(2 - p), 0);
    for (int i = 0; i < base.faceCount(p); ++i) {
      int j = faceMap[p][i];
      if (j < 0 || j >= dual.faceCount(2 - p) || hit[j])
        throw ComplexError("dual pairing: faceMap not a bijection");
      hit[j] = 1;
      if (dualFaceMap[2 - p][j] != i)
        throw ComplexError("dual pairing: maps not mutually inverse");
    }
  }
  // each primal edge must cross exactly its partner: endpoints of the dual
  // edge are the two faces bounding e
  for (int e = 0; e < base.faceCount(1); ++e) {
    int ed = faceMap[1][e];
    int a = dual.edgeSrc(ed), b = dual.edgeDst(ed);
    int l = base.leftFace(e), r = base.rightFace(e);
    if (!((a == l && b == r) || (a == r && b == l)))
      throw ComplexError("dual pairing: edge " + std::to_string(e) +
                         " does not cross its partner");
  }
}

// --- qK ----------------------------------------------------------------------

QkComplex::VertexClass QkComplex::vertexClass(int v) const {
  if (v < nPrimalVertices) return VertexClass::Primal;
  if (v < nPrimalVertices + nPrimalEdges) return VertexClass::Midpoint;
  return VertexClass::Dual;
}

QkComplex::EdgeParent QkComplex::edgeParent(int e) const {
  if (e < 2 * nPrimalEdges) return {0, e / 2, e % 2};
  e -= 2 * nPrimalEdges;
  return {1, e / 2, e % 2};
}

int QkComplex::halfEdge(int complexSel, int primalEdge, int half) const {
  return complexSel * 2 * nPrimalEdges + 2 * primalEdge + half;
}

QkComplex buildQk(const DualPairing& pair) {
  const PolyComplex& k1 = pair.base;
  const int V = k1.faceCount(0), E = k1.faceCount(1), F = k1.faceCount(2);

  QkComplex q;
  q.nPrimalVertices = V;
  q.nPrimalEdges = E;
  q.nPrimalFaces = F;

  PolyComplex& qk = q.qk;
  qk.dim = 2;
  qk.name = k1.name + "-qK";
  qk.nVertices = V + E + F;
  qk.closedSurface = true;

  // halves of K1 edges: src -> mid, mid -> dst
  for (int e = 0; e < E; ++e) {
    qk.edges.push_back({k1.edgeSrc(e), q.midpointVertex(e)});
    qk.edges.push_back({q.midpointVertex(e), k1.edgeDst(e)});
  }
  // halves of K2 edges: rightFace -> mid, mid -> leftFace
  for (int e = 0; e < E; ++e) {
    qk.edges.push_back({q.dualVertex(k1.rightFace(e)), q.midpointVertex(e)});
    qk.edges.push_back({q.midpointVertex(e), q.dualVertex(k1.leftFace(e))});
  }

  // one tetragon per face corner, cycle [x, mid(e_out), dual(F), mid(e_in)]
  for (int f = 0; f < F; ++f) {
    const auto& cyc = k1.faces2[f];
    const size_t sz = cyc.size();
    for (size_t i = 0; i < sz; ++i) {
      const SignedRef& din = cyc[i];
      const SignedRef& dout = cyc[(i + 1) % sz];
      int x = k1.head(din);
      std::vector<SignedRef> tc;
      // x -> mid(e_out)
      tc.push_back(dout.sign > 0 ? SignedRef{q.halfEdge(0, dout.index, 0), +1}
                                 : SignedRef{q.halfEdge(0, dout.index, 1), -1});
      // mid(e_out) -> dual(F): F is left of the out-dart
      tc.push_back(dout.sign > 0 ? SignedRef{q.halfEdge(1, dout.index, 1), +1}
                                 : SignedRef{q.halfEdge(1, dout.index, 0), -1});
      // dual(F) -> mid(e_in): F is left of the in-dart
      tc.push_back(din.sign > 0 ? SignedRef{q.halfEdge(1, din.index, 1), -1}
                                : SignedRef{q.halfEdge(1, din.index, 0), +1});
      // mid(e_in) -> x
      tc.push_back(din.sign > 0 ? SignedRef{q.halfEdge(0, din.index, 1), +1}
                                : SignedRef{q.halfEdge(0, din.index, 0), -1});
      qk.faces2.push_back(tc);
      q.corners.push_back({x, f, din.index, dout.index});
    }
  }

  if (!k1.geometry.empty() && !pair.dual.geometry.empty()) {
    qk.geometry.resize(qk.nVertices, {0, 0, 0});
    for (int v = 0; v < V; ++v) qk.geometry[v] = k1.geometry[v];
    for (int e = 0; e < E; ++e)
      for (int a = 0; a < 3; ++a)
        qk.geometry[q.midpointVertex(e)][a] =
            (k1.geometry[k1.edgeSrc(e)][a] + k1.geometry[k1.edgeDst(e)][a]) / 2;
    for (int f = 0; f < F; ++f) qk.geometry[q.dualVertex(f)] = pair.dual.geometry[f];
  }

  qk.validate();
  return q;
}

// --- products ----------------------------------------------------------------

ProductComplex productWithZn(const PolyComplex& p, int n) {
  if (n < 2) throw ComplexError("product with Z_N needs N >= 2");
  if (p.dim > 2) throw ComplexError("product base must have dimension <= 2");
  p.validate();

  ProductComplex prod;
  prod.n = n;
  for (int q = 0; q <= 3; ++q) prod.baseFaces[q] = p.faceCount(q);

  PolyComplex& c = prod.complex;
  c.dim = p.dim + 1;
  c.name = p.name + "-x-Z" + std::to_string(n);
  c.nVertices = p.faceCount(0) * n;

  // edges: horizontal (base edge, t) then vertical (vertex, t)
  for (int e = 0; e < p.faceCount(1); ++e)
    for (int t = 0; t < n; ++t)
      c.edges.push_back({prod.productVertex(p.edgeSrc(e), t), prod.productVertex(p.edgeDst(e), t)});
  for (int v = 0; v < p.faceCount(0); ++v)
    for (int t = 0; t < n; ++t)
      c.edges.push_back({prod.productVertex(v, t), prod.productVertex(v, (t + 1) % n)});

  // 2-faces: parallel (base 2-face, t) then vertical tetragons (base edge, t)
  for (int f = 0; f < p.faceCount(2); ++f)
    for (int t = 0; t < n; ++t) {
      std::vector<SignedRef> cyc;
      for (const SignedRef& r : p.faces2[f]) cyc.push_back({prod.horizontalEdge(r.index, t), r.sign});
      c.faces2.push_back(cyc);
    }
  for (int e = 0; e < p.faceCount(1); ++e)
    for (int t = 0; t < n; ++t) {
      int t1 = (t + 1) % n;
      // [ (e,t), (dst, t->t+1), -(e,t+1), -(src, t->t+1) ]
      c.faces2.push_back({{prod.horizontalEdge(e, t), +1},
                          {prod.verticalEdge(p.edgeDst(e), t), +1},
                          {prod.horizontalEdge(e, t1), -1},
                          {prod.verticalEdge(p.edgeSrc(e), t), -1}});
    }

  // 3-cells (base 2-face, t): d(F x z) = dF x z - F x dz
  for (int f = 0; f < p.faceCount(2); ++f)
    for (int t = 0; t < n; ++t) {
      int t1 = (t + 1) % n;
      std::vector<SignedRef> bd;
      for (const SignedRef& r : p.faces2[f]) bd.push_back({prod.verticalFace(r.index, t), r.sign});
      bd.push_back({prod.parallelFace(f, t1), -1});
      bd.push_back({prod.parallelFace(f, t), +1});
      c.cells3.push_back(bd);
    }

  c.validate();
  return prod;
}

// --- JSON I/O ----------------------------------------------------------------

PolyComplex complexFromJson(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  PolyComplex c;
  c.dim = j.value("dim", 2);
  c.name = j.value("name", std::string("complex"));
  c.closedSurface = j.value("closed_surface", false);

  std::map<long, int> vIndex;
  std::vector<long> vIds;
  bool haveGeom = false;
  for (const auto& v : j.at("vertices")) {
    long id = v.is_object() ? v.at("id").get<long>() : v.get<long>();
    if (id <= 0) throw ComplexError("vertex ids must be positive");
    if (!vIndex.emplace(id, 0).second) throw ComplexError("duplicate vertex id");
    vIds.push_back(id);
    if (v.is_object() && v.contains("xyz")) haveGeom = true;
  }
  std::sort(vIds.begin(), vIds.end());
  for (size_t i = 0; i < vIds.size(); ++i) vIndex[vIds[i]] = static_cast<int>(i);
  c.nVertices = static_cast<int>(vIds.size());
  if (haveGeom) c.geometry.assign(c.nVertices, {0, 0, 0});
  for (const auto& v : j.at("vertices"))
    if (v.is_object() && v.contains("xyz")) {
      auto xyz = v.at("xyz");
      int i = vIndex.at(v.at("id").get<long>());
      for (int a = 0; a < 3 && a < static_cast<int>(xyz.size()); ++a) c.geometry[i][a] = xyz[a];
    }

  std::map<long, int> eIndex;
  std::vector<std::pair<long, std::array<int, 2>>> edgeRows;
  for (const auto& e : j.at("edges")) {
    long id = e.at("id").get<long>();
    if (id <= 0) throw ComplexError("edge ids must be positive");
    long src = e.at("src").get<long>(), dst = e.at("dst").get<long>();
    if (!vIndex.count(src) || !vIndex.count(dst))
      throw ComplexError("dangling face reference: edge " + std::to_string(id));
    if (!eIndex.emplace(id, 0).second) throw ComplexError("duplicate edge id");
    edgeRows.push_back({id, {vIndex.at(src), vIndex.at(dst)}});
  }
  std::sort(edgeRows.begin(), edgeRows.end());
  for (size_t i = 0; i < edgeRows.size(); ++i) {
    eIndex[edgeRows[i].first] = static_cast<int>(i);
    c.edges.push_back(edgeRows[i].second);
  }

  if (j.contains("faces")) {
    std::vector<std::pair<long, std::vector<SignedRef>>> faceRows;
    for (const auto& f : j.at("faces")) {
      long id = f.at("id").get<long>();
      std::vector<SignedRef> cyc;
      for (const auto& b : f.at("boundary")) {
        long se = b.get<long>();
        long eid = std::abs(se);
        if (se == 0 || !eIndex.count(eid))
          throw ComplexError("dangling face reference: face " + std::to_string(id));
        cyc.push_back({eIndex.at(eid), se > 0 ? +1 : -1});
      }
      faceRows.push_back({id, cyc});
    }
    std::sort(faceRows.begin(), faceRows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [id, cyc] : faceRows) c.faces2.push_back(cyc);
  }

  c.validate();
  return c;
}

PolyComplex complexFromJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ComplexError("cannot open complex file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return complexFromJson(ss.str());
}

std::string complexToJson(const PolyComplex& c) {
  nlohmann::json j;
  j["schema"] = "v1";
  j["dim"] = c.dim;
  j["name"] = c.name;
  j["closed_surface"] = c.closedSurface;
  for (int v = 0; v < c.nVertices; ++v) {
    nlohmann::json jv;
    jv["id"] = v + 1;
    if (!c.geometry.empty()) jv["xyz"] = c.geometry[v];
    j["vertices"].push_back(jv);
  }
  for (int e = 0; e < c.faceCount(1); ++e)
    j["edges"].push_back({{"id", e + 1}, {"src", c.edgeSrc(e) + 1}, {"dst", c.edgeDst(e) + 1}});
  for (int f = 0; f < c.faceCount(2); ++f) {
    std::vector<long> bd;
    for (const SignedRef& r : c.faces2[f]) bd.push_back(r.sign * static_cast<long>(r.index + 1));
    j["faces"].push_back({{"id", f + 1}, {"boundary", bd}});
  }
  return j.dump(2);
}

}  // namespace cstorus
