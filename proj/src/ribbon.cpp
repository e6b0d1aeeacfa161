#include "cstorus/ribbon.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <set>

namespace cstorus {

void SimplicialLoop::validate() const {
  if (steps.size() != basepoints.size()) throw RibbonError("loop: step/basepoint mismatch");
  const size_t n = steps.size();
  if (n == 0) throw RibbonError("loop: empty sequence");
  for (size_t k = 0; k < n; ++k) {
    int here = basepoints[k];
    int next = basepoints[(k + 1) % n];
    const GenEdge& g = steps[k];
    if (g.empty()) {
      if (here != next) throw RibbonError("loop: empty edge moves the basepoint");
    } else {
      SignedRef r{g.edge, g.sign};
      if (complex->tail(r) != here || complex->head(r) != next)
        throw RibbonError("loop: consecutive incompatibility");
    }
  }
}

SimplicialLoop SimplicialLoop::reduced() const {
  SimplicialLoop out;
  out.complex = complex;
  for (size_t k = 0; k < steps.size(); ++k)
    if (!steps[k].empty()) {
      out.steps.push_back(steps[k]);
      out.basepoints.push_back(basepoints[k]);
    }
  return out;
}

namespace {

std::vector<int> sortedFaceVertices(const PolyComplex& c, int f) {
  std::vector<int> v = c.faceVertices(f);
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<int> sharedEdges(const PolyComplex& c, int f, int g) {
  std::vector<int> a = c.faceEdges(f), b = c.faceEdges(g), out;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> sharedVertices(const PolyComplex& c, int f, int g) {
  std::vector<int> a = sortedFaceVertices(c, f), b = sortedFaceVertices(c, g), out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool edgesDisjoint(const PolyComplex& c, int e, int f) {
  return c.edgeSrc(e) != c.edgeSrc(f) && c.edgeSrc(e) != c.edgeDst(f) &&
         c.edgeDst(e) != c.edgeSrc(f) && c.edgeDst(e) != c.edgeDst(f);
}

}  // namespace

SimplicialRibbon validateRibbon(const PolyComplex& ambient, const std::vector<int>& faces) {
  const int n = static_cast<int>(faces.size());
  if (n < 2) throw RibbonError("ribbon needs at least two faces");
  for (int f : faces) {
    if (f < 0 || f >= ambient.faceCount(2)) throw RibbonError("ribbon face out of range");
    if (ambient.faces2[f].size() != 4)
      throw RibbonError("SR1 violated: face " + std::to_string(f) + " is not a tetragon");
  }
  std::set<int> uniq(faces.begin(), faces.end());
  if (static_cast<int>(uniq.size()) != n)
    throw RibbonError("SR2 violated: repeated face in ribbon");

  SimplicialRibbon r;
  r.complex = &ambient;
  r.faces = faces;
  r.inEdge.assign(n, -1);
  r.outEdge.assign(n, -1);

  if (n == 2) {
    auto se = sharedEdges(ambient, faces[0], faces[1]);
    if (se.size() != 2 || !edgesDisjoint(ambient, se[0], se[1]))
      throw RibbonError("SR2 violated: two-face ribbon must meet in two opposite edges");
    auto sv = sharedVertices(ambient, faces[0], faces[1]);
    if (sv.size() != 4)
      throw RibbonError("SR2 violated: two-face ribbon has extra contact");
    r.inEdge[0] = se[0];
    r.outEdge[0] = se[1];
    r.inEdge[1] = se[1];
    r.outEdge[1] = se[0];
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        bool consecutive = (j == i + 1) || (i == 0 && j == n - 1);
        auto sv = sharedVertices(ambient, faces[i], faces[j]);
        if (!consecutive) {
          if (!sv.empty())
            throw RibbonError("SR2 violated: faces " + std::to_string(i) + " and " +
                              std::to_string(j) + " touch");
          continue;
        }
        auto se = sharedEdges(ambient, faces[i], faces[j]);
        if (se.size() != 1 || sv.size() != 2)
          throw RibbonError("SR2 violated: consecutive faces " + std::to_string(i) +
                            "," + std::to_string(j) + " do not meet in a full edge");
        int e = se[0];
        if (j == i + 1) {
          r.outEdge[i] = e;
          r.inEdge[j] = e;
        } else {  // (n-1, 0) pair
          r.outEdge[j] = e;
          r.inEdge[i] = e;
        }
      }
    for (int i = 0; i < n; ++i)
      if (!edgesDisjoint(ambient, r.inEdge[i], r.outEdge[i]))
        throw RibbonError(
            "SR2 violated: entry and exit edges of face " + std::to_string(i) +
            " touch (not opposite)");
  }

  // boundary loops: in each tetragon the two side edges connect the in-edge
  // endpoints to the out-edge endpoints
  auto sideEdges = [&](int f, int in, int out) {
    std::vector<int> sides;
    for (int e : ambient.faceEdges(f))
      if (e != in && e != out) sides.push_back(e);
    if (sides.size() != 2) throw RibbonError("internal: tetragon side extraction");
    return sides;
  };
  auto endpoints = [&](int e) {
    return std::array<int, 2>{ambient.edgeSrc(e), ambient.edgeDst(e)};
  };
  auto sideFrom = [&](int f, int in, int out, int v) {
    for (int s : sideEdges(f, in, out))
      if (ambient.edgeSrc(s) == v || ambient.edgeDst(s) == v) return s;
    throw RibbonError("internal: no side edge at vertex");
  };

  auto traceLoop = [&](int startVertex) {
    SimplicialLoop loop;
    loop.complex = &ambient;
    int v = startVertex;
    for (int i = 0; i < n; ++i) {
      int s = sideFrom(faces[i], r.inEdge[i], r.outEdge[i], v);
      int sign = (ambient.edgeSrc(s) == v) ? +1 : -1;
      loop.steps.push_back({s, sign});
      loop.basepoints.push_back(v);
      v = (sign > 0) ? ambient.edgeDst(s) : ambient.edgeSrc(s);
    }
    if (v != startVertex)
      throw RibbonError("ribbon is one-sided: boundary does not split into two loops");
    loop.validate();
    return loop;
  };

  auto ep0 = endpoints(r.inEdge[0]);
  int va = std::min(ep0[0], ep0[1]);
  int vb = std::max(ep0[0], ep0[1]);
  r.loop = traceLoop(va);
  r.loopPrime = traceLoop(vb);

  // the two boundary loops are disjoint as vertex sets
  std::set<int> la(r.loop.basepoints.begin(), r.loop.basepoints.end());
  for (int v : r.loopPrime.basepoints)
    if (la.count(v)) throw RibbonError("ribbon is one-sided: boundary loops intersect");
  return r;
}

ProjectedRibbon projectRibbon(const ProductComplex& prod, const PolyComplex& base,
                              const SimplicialRibbon& r) {
  ProjectedRibbon out;
  int verticalBase = -1;
  bool allVertical = true;
  for (int f : r.faces) {
    if (prod.isParallelFace(f)) {
      allVertical = false;
      out.parallelFaces.push_back(prod.parallelBaseFace(f));
    } else {
      int e = prod.verticalBaseEdge(f);
      if (verticalBase < 0) verticalBase = e;
      if (e != verticalBase) allVertical = false;
    }
  }

  // Sigma-projections of the boundary loops, reduced
  auto projectLoop = [&](const SimplicialLoop& l) {
    SimplicialLoop p;
    p.complex = &base;
    for (size_t k = 0; k < l.steps.size(); ++k) {
      const GenEdge& g = l.steps[k];
      if (!g.empty() && prod.isHorizontalEdge(g.edge)) {
        p.steps.push_back({prod.horizontalBaseEdge(g.edge), g.sign});
        p.basepoints.push_back(l.basepoints[k] / prod.n);
      }
    }
    return p;
  };
  out.projectedLoop = projectLoop(r.loop);
  out.projectedLoopPrime = projectLoop(r.loopPrime);

  int displacement = 0;
  for (const GenEdge& g : r.loop.steps)
    if (!g.empty() && !prod.isHorizontalEdge(g.edge)) displacement += g.sign;
  if (displacement % prod.n != 0) throw RibbonError("internal: loop does not close in Z_N");
  out.winding = displacement / prod.n;

  if (allVertical) {
    out.kind = RibbonClass::Vertical;
    out.verticalEdge = verticalBase;
    return out;
  }
  out.kind = RibbonClass::Generic;
  out.sigmaRibbon = validateRibbon(base, out.parallelFaces);
  return out;
}

int RibbonLink::genericCount() const {
  int c = 0;
  for (const auto& p : projections) c += (p.kind == RibbonClass::Generic) ? 1 : 0;
  return c;
}

int RibbonLink::verticalCount() const {
  return static_cast<int>(projections.size()) - genericCount();
}

namespace {

std::set<int> projectionVertexSet(const PolyComplex& base, const ProjectedRibbon& p) {
  std::set<int> out;
  if (p.kind == RibbonClass::Vertical) {
    out.insert(base.edgeSrc(p.verticalEdge));
    out.insert(base.edgeDst(p.verticalEdge));
  } else {
    for (int f : p.parallelFaces)
      for (int v : base.faceVertices(f)) out.insert(v);
  }
  return out;
}

// null-homology of a cycle via least squares against the face-boundary matrix
bool nullHomologous(const PolyComplex& base, const SimplicialLoop& reduced) {
  Eigen::VectorXd chain = Eigen::VectorXd::Zero(base.faceCount(1));
  for (const GenEdge& g : reduced.steps) chain(g.edge) += g.sign;
  if (chain.norm() == 0) return true;
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(base.faceCount(1), base.faceCount(2));
  for (const auto& t : base.boundaryTriplets(2)) d2(t.row, t.col) += t.val;
  Eigen::VectorXd sol = d2.colPivHouseholderQr().solve(chain);
  return (d2 * sol - chain).norm() < 1e-8 * (1.0 + chain.norm());
}

}  // namespace

RibbonLink validateLink(const ProductComplex& prod, const PolyComplex& base,
                        const std::vector<std::vector<int>>& ribbonFaces,
                        const std::vector<int>& colors, int sigma0) {
  if (ribbonFaces.size() != colors.size())
    throw RibbonError("link: one color per ribbon required");
  RibbonLink link;
  link.ambient = &prod;
  link.base = &base;
  link.colors = colors;
  link.sigma0 = sigma0;
  for (const auto& faces : ribbonFaces) {
    link.ribbons.push_back(validateRibbon(prod.complex, faces));
    link.projections.push_back(projectRibbon(prod, base, link.ribbons.back()));
  }

  // pairwise disjointness in the ambient complex
  for (size_t i = 0; i < link.ribbons.size(); ++i)
    for (size_t j = i + 1; j < link.ribbons.size(); ++j) {
      std::set<int> vi, vj;
      for (int f : link.ribbons[i].faces)
        for (int v : prod.complex.faceVertices(f)) vi.insert(v);
      for (int f : link.ribbons[j].faces)
        for (int v : prod.complex.faceVertices(f)) vj.insert(v);
      for (int v : vj)
        if (vi.count(v)) throw RibbonError("link: ribbons intersect in the ambient complex");
    }

  // (NCP)': Sigma-projections pairwise disjoint (generic embeddings are
  // guaranteed by the projected ribbon validation)
  std::vector<std::set<int>> pv;
  for (const auto& p : link.projections) pv.push_back(projectionVertexSet(base, p));
  for (size_t i = 0; i < pv.size(); ++i)
    for (size_t j = i + 1; j < pv.size(); ++j)
      for (int v : pv[j])
        if (pv[i].count(v))
          throw RibbonError("(NCP)' violated: Sigma-projections intersect");

  // (NH)': null-homology of the generic projections (null-homotopy is
  // equivalent on genus 0, which is where generic links are admitted)
  for (const auto& p : link.projections)
    if (p.kind == RibbonClass::Generic &&
        !nullHomologous(base, p.projectedLoop.reduced()))
      throw RibbonError("(NH)' violated: projected loop is not null-homologous");

  if (sigma0 < 0 || sigma0 >= base.faceCount(0))
    throw RibbonError("link: sigma0 out of range");
  for (const auto& s : pv)
    if (s.count(sigma0))
      throw RibbonError("link: sigma0 lies on a projected ribbon");
  return link;
}

RegionDecomposition regions(const RibbonLink& link) {
  const PolyComplex& base = *link.base;
  RegionDecomposition out;

  std::set<int> arcEdges, arcVertices;
  for (const auto& p : link.projections) {
    if (p.kind != RibbonClass::Generic) continue;
    SimplicialLoop red = p.projectedLoop.reduced();
    for (const GenEdge& g : red.steps) arcEdges.insert(g.edge);
    for (int v : red.basepoints) arcVertices.insert(v);
  }

  // flood fill across non-arc edges
  out.faceRegion.assign(base.faceCount(2), -1);
  int nRegions = 0;
  for (int seed = 0; seed < base.faceCount(2); ++seed) {
    if (out.faceRegion[seed] >= 0) continue;
    int id = nRegions++;
    std::vector<int> stack = {seed};
    out.faceRegion[seed] = id;
    while (!stack.empty()) {
      int f = stack.back();
      stack.pop_back();
      for (int e : base.faceEdges(f)) {
        if (arcEdges.count(e)) continue;
        for (int g : {base.leftFace(e), base.rightFace(e)}) {
          if (out.faceRegion[g] < 0) {
            out.faceRegion[g] = id;
            stack.push_back(g);
          }
        }
      }
    }
  }
  out.regions.resize(nRegions);
  for (int f = 0; f < base.faceCount(2); ++f)
    out.regions[out.faceRegion[f]].faces.push_back(f);

  // Euler characteristic: interior faces/edges/vertices per region
  std::vector<int> edgeCount(nRegions, 0), vertCount(nRegions, 0);
  for (int e = 0; e < base.faceCount(1); ++e) {
    if (arcEdges.count(e)) continue;
    int rl = out.faceRegion[base.leftFace(e)];
    int rr = out.faceRegion[base.rightFace(e)];
    if (rl != rr) throw RibbonError("internal: non-arc edge between two regions");
    edgeCount[rl]++;
  }
  // vertex -> incident faces via edges
  std::vector<std::set<int>> vertexRegions(base.faceCount(0));
  for (int e = 0; e < base.faceCount(1); ++e) {
    for (int v : {base.edgeSrc(e), base.edgeDst(e)}) {
      vertexRegions[v].insert(out.faceRegion[base.leftFace(e)]);
      vertexRegions[v].insert(out.faceRegion[base.rightFace(e)]);
    }
  }
  for (int v = 0; v < base.faceCount(0); ++v) {
    if (arcVertices.count(v)) continue;
    if (vertexRegions[v].size() != 1)
      throw RibbonError("internal: interior vertex touching several regions");
    vertCount[*vertexRegions[v].begin()]++;
  }
  for (int r = 0; r < nRegions; ++r)
    out.regions[r].euler = static_cast<int>(out.regions[r].faces.size()) - edgeCount[r] +
                           vertCount[r];

  // adjacency and gleams
  out.verticalRegion.assign(link.projections.size(), -1);
  for (size_t i = 0; i < link.projections.size(); ++i) {
    const auto& p = link.projections[i];
    if (p.kind == RibbonClass::Vertical) {
      out.verticalRegion[i] = out.faceRegion[base.leftFace(p.verticalEdge)];
      continue;
    }
    int plus = out.faceRegion[p.parallelFaces.front()];
    for (int f : p.parallelFaces)
      if (out.faceRegion[f] != plus)
        throw RibbonError("internal: ribbon faces split across regions");
    SimplicialLoop red = p.projectedLoop.reduced();
    int minus = -1;
    for (const GenEdge& g : red.steps) {
      for (int f : {base.leftFace(g.edge), base.rightFace(g.edge)}) {
        int r = out.faceRegion[f];
        if (r != plus) {
          if (minus >= 0 && minus != r)
            throw RibbonError("internal: inconsistent far side along the arc");
          minus = r;
        }
      }
    }
    if (minus < 0) throw RibbonError("internal: arc does not separate locally");
    out.loopEdges.push_back({static_cast<int>(i), plus, minus, link.colors[i], p.winding});
    out.regions[plus].gleam += p.winding;
    out.regions[minus].gleam -= p.winding;
  }
  return out;
}

std::vector<int> makeVerticalRibbonFaces(const ProductComplex& prod, int baseEdge) {
  std::vector<int> faces;
  for (int t = 0; t < prod.n; ++t) faces.push_back(prod.verticalFace(baseEdge, t));
  return faces;
}

std::vector<int> liftRibbonFaces(const ProductComplex& prod, const PolyComplex& base,
                                 const SimplicialRibbon& baseRibbon, int t0,
                                 const std::vector<int>& insertAfter) {
  const int n = static_cast<int>(baseRibbon.faces.size());
  if (static_cast<int>(insertAfter.size()) != n)
    throw RibbonError("liftRibbonFaces: insertion count per base face required");
  int total = 0;
  for (int c : insertAfter) {
    if (c < 0) throw RibbonError("liftRibbonFaces: negative insertion count");
    total += c;
  }
  if (total % prod.n != 0)
    throw RibbonError("liftRibbonFaces: total vertical steps must be divisible by N");
  std::vector<int> faces;
  int t = t0;
  for (int i = 0; i < n; ++i) {
    faces.push_back(prod.parallelFace(baseRibbon.faces[i], ((t % prod.n) + prod.n) % prod.n));
    for (int j = 0; j < insertAfter[i]; ++j) {
      faces.push_back(
          prod.verticalFace(baseRibbon.outEdge[i], ((t % prod.n) + prod.n) % prod.n));
      ++t;
    }
  }
  return faces;
}

std::vector<std::vector<int>> findClosedRibbons(const PolyComplex& ambient) {
  std::vector<std::vector<int>> out;
  std::set<std::vector<int>> seen;
  const int nf = ambient.faceCount(2);
  auto oppositeEdge = [&](int f, int e) {
    auto edges = ambient.faceEdges(f);
    for (int cand : edges)
      if (cand != e && edgesDisjoint(ambient, cand, e)) return cand;
    return -1;
  };
  auto otherFace = [&](int f, int e) {
    int l = ambient.leftFace(e), r = ambient.rightFace(e);
    return l == f ? r : l;
  };
  for (int f0 = 0; f0 < nf; ++f0) {
    if (ambient.faces2[f0].size() != 4) continue;
    for (int e0 : ambient.faceEdges(f0)) {
      std::vector<int> cycle;
      int f = f0, e = e0;
      bool ok = true;
      for (int guard = 0; guard <= 4 * nf; ++guard) {
        cycle.push_back(f);
        int out_ = oppositeEdge(f, e);
        if (out_ < 0) {
          ok = false;
          break;
        }
        f = otherFace(f, out_);
        e = out_;
        if (f == f0 && e == e0) break;
        if (guard == 4 * nf) ok = false;
      }
      if (!ok || cycle.size() < 2) continue;
      try {
        validateRibbon(ambient, cycle);
      } catch (const RibbonError&) {
        continue;
      }
      // canonical form up to rotation and reversal
      auto canon = [](std::vector<int> c) {
        std::vector<int> best;
        for (int dir = 0; dir < 2; ++dir) {
          for (size_t s = 0; s < c.size(); ++s) {
            std::vector<int> rot(c.begin() + s, c.end());
            rot.insert(rot.end(), c.begin(), c.begin() + s);
            if (best.empty() || rot < best) best = rot;
          }
          std::reverse(c.begin(), c.end());
        }
        return best;
      };
      std::vector<int> key = canon(cycle);
      if (seen.insert(key).second) out.push_back(cycle);
    }
  }
  return out;
}

}  // namespace cstorus
