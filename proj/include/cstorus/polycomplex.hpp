// Oriented polyhedral cell complexes on surfaces and their products with the
// cyclic complex Z_N: storage, validation, canonical duals, the joined
// complex qK, and the built-in generators used by the test suite.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cstorus {

struct ComplexError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Signed reference to a cell one dimension down.
struct SignedRef {
  int index = -1;
  int sign = +1;
};

inline SignedRef operator-(SignedRef r) { return {r.index, -r.sign}; }

// A finite oriented polyhedral cell complex of dimension <= 3.
//
// Storage conventions (fixed once, everything else derives from them):
//  * edges carry (src, dst);
//  * 2-faces store their boundary as an ordered signed edge cycle, head of
//    step k = tail of step k+1 (cyclically);
//  * 3-cells store an unordered signed 2-face list;
//  * for closed oriented surfaces the 2-face cycles are coherent: every edge
//    appears exactly once with + and once with - over all cycles.  With the
//    usual "counterclockwise" reading this means each face keeps its
//    interior on the left while walking its cycle.
class PolyComplex {
public:
  int dim = 0;
  std::string name;

  int nVertices = 0;
  std::vector<std::array<int, 2>> edges;            // (src, dst)
  std::vector<std::vector<SignedRef>> faces2;       // ordered edge cycles
  std::vector<std::vector<SignedRef>> cells3;       // signed 2-face lists
  std::vector<std::array<double, 3>> geometry;      // optional vertex coords
  bool closedSurface = false;

  int faceCount(int p) const;
  int eulerCharacteristic() const;

  int edgeSrc(int e) const { return edges[e][0]; }
  int edgeDst(int e) const { return edges[e][1]; }
  // Endpoint of a signed edge in traversal direction.
  int head(SignedRef r) const { return r.sign > 0 ? edges[r.index][1] : edges[r.index][0]; }
  int tail(SignedRef r) const { return r.sign > 0 ? edges[r.index][0] : edges[r.index][1]; }

  std::vector<int> faceVertices(int f) const;       // cycle order
  std::vector<int> faceEdges(int f) const;          // unsigned, cycle order

  // Signed incidence as triplets (row = (p-1)-face, col = p-face, val).
  struct Triplet {
    int row, col, val;
  };
  std::vector<Triplet> boundaryTriplets(int p) const;

  // Structural validation: dangling references, cycle consistency,
  // boundary-of-boundary = 0, and (when closedSurface) the two-faces-per-edge
  // and coherent-orientation conditions.
  void validate() const;

  // Reverses the global surface orientation (all 2-face cycles).
  PolyComplex flipped() const;

  // In a coherently oriented surface every edge has exactly one face
  // traversing it forward (its "left" face) and one backward ("right").
  int leftFace(int e) const;
  int rightFace(int e) const;

private:
  void buildEdgeFaceIndex() const;
  mutable std::vector<int> leftFace_, rightFace_;
};

// --- construction -----------------------------------------------------------

// Builds a closed-surface complex from face vertex cycles; edges are
// discovered and indexed by sorted (min,max) key.  Face orientations are
// made coherent by flipping along a breadth-first sweep starting from
// face 0 (the input cycles fix orientation only up to this sweep).
PolyComplex complexFromFaceCycles(int nVertices,
                                  const std::vector<std::vector<int>>& cycles,
                                  const std::string& name,
                                  bool makeCoherent);

PolyComplex tetrahedronComplex();
PolyComplex cubeComplex();
PolyComplex icosahedronComplex();
// n x m triangular torus grid (n, m >= 2).
PolyComplex triangularTorusComplex(int n, int m);
// n x m hexagonal torus grid: the canonical dual of the triangular grid.
PolyComplex hexagonalTorusComplex(int n, int m);
// The cyclic 1-complex Z_N: N vertices, N edges t -> t+1 (N >= 2).
PolyComplex cyclicComplex(int n);

// --- dual pairing -----------------------------------------------------------

// A cell decomposition together with its canonical dual.  Index conventions:
// dual vertex i  <-> primal 2-face i, dual edge e <-> primal edge e,
// dual 2-face v <-> primal vertex v.  Dual edges are stored oriented from
// the primal edge's right face to its left face, which makes the Hodge star
// signs below come out as +1 on the canonical construction.
struct DualPairing {
  PolyComplex base;   // K1
  PolyComplex dual;   // K2
  // faceMap[p][i] = index of the (2-p)-face of K2 dual to the p-face i of K1;
  // dualFaceMap[p][j] = index of the (2-p)-face of K1 dual to the p-face j of
  // K2.  The two are mutually inverse per dimension.
  std::array<std::vector<int>, 3> faceMap;
  std::array<std::vector<int>, 3> dualFaceMap;

  // star sign of the induced-orientation rule, per direction and degree:
  // starBase[p][i]: coefficient of (dual face) in star_K(face i), and
  // starDual[p][i] for star_{K'}.
  std::array<std::vector<int>, 3> starBase;
  std::array<std::vector<int>, 3> starDual;

  void validate() const;
};

DualPairing canonicalDual(const PolyComplex& k1);

// --- the joined complex qK --------------------------------------------------

// qK and the provenance needed by the field-space and ribbon machinery.
//
// Vertex layout: [0, V) primal vertices, [V, V+E) edge midpoints (by primal
// edge index), [V+E, V+E+F) dual vertices (by primal face index).
// Edge layout: [0, 2E) halves of K1 edges (2e: src->mid, 2e+1: mid->dst),
// [2E, 4E) halves of K2 edges (2E+2e: rightface->mid, 2E+2e+1: mid->leftface).
// 2-faces: one tetragon per (vertex, face) corner of K1, cycle
// [x, mid(e_out), dual(F), mid(e_in)].
struct QkComplex {
  PolyComplex qk;
  int nPrimalVertices = 0;
  int nPrimalEdges = 0;
  int nPrimalFaces = 0;

  enum class VertexClass { Primal, Midpoint, Dual };
  VertexClass vertexClass(int v) const;
  int midpointVertex(int primalEdge) const { return nPrimalVertices + primalEdge; }
  int dualVertex(int primalFace) const { return nPrimalVertices + nPrimalEdges + primalFace; }

  // Which K-edge a qK edge is half of: (complexSel 0 = K1 / 1 = K2,
  // primal edge index, half 0/1).
  struct EdgeParent {
    int complexSel;
    int edge;
    int half;
  };
  EdgeParent edgeParent(int qkEdge) const;
  int halfEdge(int complexSel, int primalEdge, int half) const;

  // Corner provenance of every tetragon.
  struct Corner {
    int vertex;       // K1 vertex x
    int face;         // K1 face F
    int edgeIn;       // K1 edge arriving at x along F's cycle
    int edgeOut;      // K1 edge leaving x
  };
  std::vector<Corner> corners;
};

QkComplex buildQk(const DualPairing& pair);

// --- products with Z_N ------------------------------------------------------

// P x Z_N with deterministic enumeration: p-faces are blocks (q, r),
// q + r = p, ordered by descending q; within a block index = i * N + t.
struct ProductComplex {
  PolyComplex complex;
  int n = 0;          // Z_N order
  int baseFaces[4] = {0, 0, 0, 0};

  // 2-face provenance.
  bool isParallelFace(int f) const { return f < baseFaces[2] * n; }
  int parallelBaseFace(int f) const { return f / n; }
  int parallelTime(int f) const { return f % n; }
  int verticalBaseEdge(int f) const { return (f - baseFaces[2] * n) / n; }
  int verticalTime(int f) const { return (f - baseFaces[2] * n) % n; }
  int parallelFace(int baseFace, int t) const { return baseFace * n + t; }
  int verticalFace(int baseEdge, int t) const { return baseFaces[2] * n + baseEdge * n + t; }

  // 1-face provenance: horizontal (base edge, t) then vertical (vertex, t).
  bool isHorizontalEdge(int e) const { return e < baseFaces[1] * n; }
  int horizontalBaseEdge(int e) const { return e / n; }
  int horizontalTime(int e) const { return e % n; }
  int verticalEdgeVertex(int e) const { return (e - baseFaces[1] * n) / n; }
  int verticalEdgeTime(int e) const { return (e - baseFaces[1] * n) % n; }
  int horizontalEdge(int baseEdge, int t) const { return baseEdge * n + t; }
  int verticalEdge(int vertex, int t) const { return baseFaces[1] * n + vertex * n + t; }

  int productVertex(int v, int t) const { return v * n + t; }
};

ProductComplex productWithZn(const PolyComplex& p, int n);

// --- JSON I/O ---------------------------------------------------------------

// Schema: {"schema":"v1","dim":2,"vertices":[{"id":..,"xyz":[..]?}...],
//          "edges":[{"id":..,"src":..,"dst":..}...],
//          "faces":[{"id":..,"boundary":[signed edge ids]}...],
//          "closed_surface":true}
// Ids must be positive; faces are indexed sorted by id.
PolyComplex complexFromJson(const std::string& text);
PolyComplex complexFromJsonFile(const std::string& path);
std::string complexToJson(const PolyComplex& c);

}  // namespace cstorus
