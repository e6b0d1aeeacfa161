// Simplicial loops, closed simplicial ribbons, colored ribbon links in
// qK x Z_N, their validation, Sigma-projections, and the region/gleam
// decomposition feeding the shadow state sum.
#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "cstorus/polycomplex.hpp"

namespace cstorus {

struct RibbonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Generalized edge: a signed edge or the empty edge (edge == -1, sign == 0).
struct GenEdge {
  int edge = -1;
  int sign = 0;
  bool empty() const { return edge < 0; }
};

struct SimplicialLoop {
  const PolyComplex* complex = nullptr;
  std::vector<GenEdge> steps;
  std::vector<int> basepoints;   // start vertex of each step

  void validate() const;         // consecutive compatibility
  SimplicialLoop reduced() const;  // empty edges removed
};

struct SimplicialRibbon {
  const PolyComplex* complex = nullptr;
  std::vector<int> faces;            // cyclic 2-face sequence
  std::vector<int> inEdge, outEdge;  // shared edges with the cyclic neighbors
  SimplicialLoop loop;               // first boundary loop l
  SimplicialLoop loopPrime;          // second boundary loop l'
};

// Validates (SR1)/(SR2) (tetragons; consecutive faces meet in a full
// opposite edge, others are disjoint; the two-face case meets in two
// disjoint edges) and extracts the boundary loop pair.
SimplicialRibbon validateRibbon(const PolyComplex& ambient, const std::vector<int>& faces);

// --- ribbons in product complexes ---------------------------------------------

enum class RibbonClass { Generic, Vertical };

struct ProjectedRibbon {
  RibbonClass kind = RibbonClass::Generic;
  int verticalEdge = -1;               // base edge for vertical ribbons
  std::vector<int> parallelFaces;      // base 2-faces of the parallel subsequence
  std::optional<SimplicialRibbon> sigmaRibbon;  // validated projection (generic)
  SimplicialLoop projectedLoop;        // reduced Sigma-projection of l
  SimplicialLoop projectedLoopPrime;   // reduced Sigma-projection of l'
  int winding = 0;                     // S^1-winding of l
};

ProjectedRibbon projectRibbon(const ProductComplex& prod, const PolyComplex& base,
                              const SimplicialRibbon& r);

struct RibbonLink {
  const ProductComplex* ambient = nullptr;
  const PolyComplex* base = nullptr;   // qK
  std::vector<SimplicialRibbon> ribbons;
  std::vector<int> colors;             // one per ribbon
  std::vector<ProjectedRibbon> projections;
  int sigma0 = -1;                     // marked base vertex of qK

  int genericCount() const;
  int verticalCount() const;
};

// Validates the link: pairwise disjoint ribbons, (NCP)' and (NH)' for the
// generic part, vertical edges disjoint from generic projections, sigma0
// off every projection image.
RibbonLink validateLink(const ProductComplex& prod, const PolyComplex& base,
                        const std::vector<std::vector<int>>& ribbonFaces,
                        const std::vector<int>& colors, int sigma0);

// --- regions -------------------------------------------------------------------

struct Region {
  std::vector<int> faces;
  int euler = 0;
  double gleam = 0.0;   // half-integer
};

struct RegionDecomposition {
  std::vector<Region> regions;
  std::vector<int> faceRegion;        // base 2-face -> region id
  struct Adjacency {                  // one entry per generic ribbon
    int ribbon;
    int regionPlus;                   // region on the ribbon (l') side
    int regionMinus;
    int color;
    int winding;
  };
  std::vector<Adjacency> loopEdges;   // E(L)
  std::vector<int> verticalRegion;    // per vertical ribbon (link order), -1 for generic
};

// Flood fill of the base 2-faces over edges not crossed by the projected
// boundary arcs of the generic ribbons; Euler characteristics by interior
// face/edge/vertex counts; gleam(Y) = sum of (side sign) x (winding).
RegionDecomposition regions(const RibbonLink& link);

// --- constructions -------------------------------------------------------------

// The N vertical tetragons over a base edge.
std::vector<int> makeVerticalRibbonFaces(const ProductComplex& prod, int baseEdge);

// Lifts a closed base-complex ribbon to the product at time t0, inserting
// insertAfter[i] vertical faces over the out-edge of base face i (the total
// must be divisible by N; winding = total / N).
std::vector<int> liftRibbonFaces(const ProductComplex& prod, const PolyComplex& base,
                                 const SimplicialRibbon& baseRibbon, int t0,
                                 const std::vector<int>& insertAfter);

// Enumerates the closed orbits of the opposite-edge transfer map
// (face, in-edge) -> (next face, out-edge) on a closed surface complex whose
// 2-faces are tetragons; returns the face cycles that validate as ribbons,
// deduplicated up to rotation and reversal.
std::vector<std::vector<int>> findClosedRibbons(const PolyComplex& ambient);

}  // namespace cstorus
