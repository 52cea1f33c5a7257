#include "tubespec/mesher.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <unordered_map>
#include <vector>

#include "tubespec/error.hpp"

namespace tubespec {
namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// > 0 when d lies inside the circumcircle of the ccw triangle abc.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const long double adx = a.x() - d.x(), ady = a.y() - d.y();
  const long double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const long double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return static_cast<double>(adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                             ad * (bdx * cdy - bdy * cdx));
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ba = b - a, ca = c - a;
  const double d = 2.0 * (ba.x() * ca.y() - ba.y() * ca.x());
  const double b2 = ba.squaredNorm(), c2 = ca.squaredNorm();
  return a + Vec2((ca.y() * b2 - ba.y() * c2) / d, (ba.x() * c2 - ca.x() * b2) / d);
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> n{-1, -1, -1};  // n[i] is across the edge opposite v[i]
  bool alive = true;
  bool inside = false;
  unsigned gen = 0;
};

struct Seg {
  int a = 0, b = 0;
  int curve = 0;
  double t0 = 0, t1 = 1;
  bool alive = true;
};

struct BoundaryEdge {
  int a, b, outer, owner;
};

class Refiner {
 public:
  Refiner(const PiecewiseBoundary& pb, const MeshOptions& opts) : pb_(pb), opts_(opts) {}

  Mesh run();

 private:
  const PiecewiseBoundary& pb_;
  const MeshOptions& opts_;

  std::vector<Vec2> P_;
  std::vector<Tri> T_;
  std::vector<int> free_;
  std::vector<int> vtri_;
  std::vector<Seg> S_;
  std::unordered_map<std::uint64_t, int> seg_of_;
  std::vector<unsigned> mark_;
  unsigned stamp_ = 0;
  bool refining_ = false;
  std::size_t inside_count_ = 0;
  double min_seg_len_ = 0;
  int last_tri_ = 0;

  std::deque<std::pair<int, unsigned>> bad_;
  std::deque<int> segq_;

  bool is_super(int v) const { return v < 3; }
  int seg_at(int a, int b) const {
    auto it = seg_of_.find(edge_key(a, b));
    return it == seg_of_.end() ? -1 : it->second;
  }

  int add_tri(int a, int b, int c, bool inside) {
    int id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
      const unsigned g = T_[id].gen + 1;
      T_[id] = Tri{};
      T_[id].gen = g;
    } else {
      id = static_cast<int>(T_.size());
      T_.push_back(Tri{});
      mark_.push_back(0);
    }
    T_[id].v = {a, b, c};
    T_[id].alive = true;
    T_[id].inside = inside;
    if (inside) ++inside_count_;
    for (int v : {a, b, c}) vtri_[v] = id;
    return id;
  }

  void kill_tri(int t) {
    if (T_[t].inside) --inside_count_;
    T_[t].alive = false;
    T_[t].gen++;
    free_.push_back(t);
  }

  int locate(const Vec2& p, int t, int* crossed);
  bool cavity(const Vec2& p, int t0, int split_seg, std::vector<int>& cav);
  void insert(int id, std::vector<int>& cav, int split_seg, std::vector<int>* created);
  int add_vertex(const Vec2& p) {
    P_.push_back(p);
    vtri_.push_back(-1);
    return static_cast<int>(P_.size()) - 1;
  }
  int find_edge_tri(int a, int b, int* opp_index) const;
  bool encroached(int s) const;
  bool split_segment(int s);
  void flood_inside();
  bool is_bad(int t, double* hsize) const;
  void discretize_boundary();
  void push_new(const std::vector<int>& created);
  Mesh extract() const;
};

int Refiner::locate(const Vec2& p, int t, int* crossed) {
  if (t < 0 || t >= static_cast<int>(T_.size()) || !T_[t].alive) {
    t = -1;
    for (int i = static_cast<int>(T_.size()) - 1; i >= 0; --i)
      if (T_[i].alive) {
        t = i;
        break;
      }
  }
  unsigned step = 0;
  const std::size_t limit = 4 * T_.size() + 100;
  for (std::size_t it = 0; it < limit; ++it) {
    const Tri& tr = T_[t];
    int next = -1;
    for (int k = 0; k < 3; ++k) {
      const int i = static_cast<int>((k + step) % 3);
      const int a = tr.v[(i + 1) % 3], b = tr.v[(i + 2) % 3];
      if (orient(P_[a], P_[b], p) < 0) {
        next = tr.n[i];
        if (next < 0) return -1;
        if (crossed && *crossed < 0) {
          const int s = seg_at(a, b);
          if (s >= 0) *crossed = s;
        }
        break;
      }
    }
    if (next < 0) return t;
    t = next;
    ++step;
  }
  return -1;
}

bool Refiner::cavity(const Vec2& p, int t0, int split_seg, std::vector<int>& cav) {
  cav.clear();
  ++stamp_;
  cav.push_back(t0);
  mark_[t0] = stamp_;
  for (std::size_t q = 0; q < cav.size(); ++q) {
    const Tri& tr = T_[cav[q]];
    for (int i = 0; i < 3; ++i) {
      const int nb = tr.n[i];
      if (nb < 0 || mark_[nb] == stamp_) continue;
      const int a = tr.v[(i + 1) % 3], b = tr.v[(i + 2) % 3];
      const int s = seg_at(a, b);
      if (s >= 0 && s != split_seg) continue;
      const Tri& o = T_[nb];
      if (incircle(P_[o.v[0]], P_[o.v[1]], P_[o.v[2]], p) > 0) {
        mark_[nb] = stamp_;
        cav.push_back(nb);
      }
    }
  }
  // Shrink until every boundary edge sees p strictly on its left.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t q = 0; q < cav.size() && !changed; ++q) {
      const int t = cav[q];
      const Tri& tr = T_[t];
      for (int i = 0; i < 3; ++i) {
        const int nb = tr.n[i];
        if (nb >= 0 && mark_[nb] == stamp_) continue;
        const int a = tr.v[(i + 1) % 3], b = tr.v[(i + 2) % 3];
        const double o = orient(P_[a], P_[b], p);
        const double scale = (P_[b] - P_[a]).squaredNorm();
        if (o <= 1e-14 * scale) {
          if (t == t0) return false;
          mark_[t] = 0;
          cav.erase(cav.begin() + static_cast<long>(q));
          changed = true;
          break;
        }
      }
    }
  }
  return true;
}

void Refiner::insert(int id, std::vector<int>& cav, int split_seg, std::vector<int>* created) {
  std::vector<BoundaryEdge> be;
  for (int t : cav) {
    const Tri& tr = T_[t];
    for (int i = 0; i < 3; ++i) {
      const int nb = tr.n[i];
      if (nb >= 0 && mark_[nb] == stamp_) continue;
      be.push_back({tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], nb, t});
    }
  }
  std::vector<bool> flag(be.size());
  std::uint64_t split_key = split_seg >= 0 ? edge_key(S_[split_seg].a, S_[split_seg].b) : ~0ull;
  for (std::size_t e = 0; e < be.size(); ++e) {
    bool f = T_[be[e].owner].inside;
    // The chord of a split arc is kept: the sliver it bounds belongs to the side across it.
    if (edge_key(be[e].a, be[e].b) == split_key && be[e].outer >= 0) f = T_[be[e].outer].inside;
    flag[e] = f;
  }
  for (int t : cav) kill_tri(t);

  std::unordered_map<int, int> starts, ends;
  std::vector<int> made;
  made.reserve(be.size());
  for (std::size_t e = 0; e < be.size(); ++e) {
    const int t = add_tri(be[e].a, be[e].b, id, flag[e]);
    made.push_back(t);
    T_[t].n[2] = be[e].outer;
    if (be[e].outer >= 0) {
      Tri& o = T_[be[e].outer];
      for (int i = 0; i < 3; ++i) {
        const int a = o.v[(i + 1) % 3], b = o.v[(i + 2) % 3];
        if (a == be[e].b && b == be[e].a) o.n[i] = t;
      }
    }
    starts[be[e].a] = t;
    ends[be[e].b] = t;
  }
  for (int t : made) {
    Tri& tr = T_[t];
    // opposite v0 = a is edge (b, p): shared with the triangle starting at b
    tr.n[0] = starts.at(tr.v[1]);
    // opposite v1 = b is edge (p, a): shared with the triangle ending at a
    tr.n[1] = ends.at(tr.v[0]);
  }
  last_tri_ = made.front();
  if (created) *created = made;
}

int Refiner::find_edge_tri(int a, int b, int* opp_index) const {
  const int start = vtri_[a];
  if (start < 0) return -1;
  int t = start;
  for (int guard = 0; guard < 10000; ++guard) {
    const Tri& tr = T_[t];
    int ia = 0;
    while (tr.v[ia] != a) ++ia;
    for (int i = 0; i < 3; ++i)
      if (tr.v[i] == b) {
        if (opp_index) *opp_index = 3 - ia - i;
        return t;
      }
    const int next = tr.n[(ia + 2) % 3];
    if (next < 0 || next == start) break;
    t = next;
  }
  // rotate the other way in case the star is open (super vertices)
  t = start;
  for (int guard = 0; guard < 10000; ++guard) {
    const Tri& tr = T_[t];
    int ia = 0;
    while (tr.v[ia] != a) ++ia;
    const int next = tr.n[(ia + 1) % 3];
    if (next < 0 || next == start) break;
    t = next;
    const Tri& tn = T_[t];
    int ja = 0;
    while (tn.v[ja] != a) ++ja;
    for (int i = 0; i < 3; ++i)
      if (tn.v[i] == b) {
        if (opp_index) *opp_index = 3 - ja - i;
        return t;
      }
  }
  return -1;
}

bool Refiner::encroached(int s) const {
  const Seg& sg = S_[s];
  int opp = 0;
  const int t = find_edge_tri(sg.a, sg.b, &opp);
  if (t < 0) return true;
  const Vec2& a = P_[sg.a];
  const Vec2& b = P_[sg.b];
  const double l2 = (b - a).squaredNorm();
  auto enc = [&](int c) {
    if (is_super(c)) return false;
    return (a - P_[c]).dot(b - P_[c]) < -1e-12 * l2;
  };
  if (enc(T_[t].v[opp])) return true;
  const int nb = T_[t].n[opp];
  if (nb >= 0) {
    const Tri& o = T_[nb];
    for (int i = 0; i < 3; ++i)
      if (o.v[i] != sg.a && o.v[i] != sg.b && enc(o.v[i])) return true;
  }
  return false;
}

bool Refiner::split_segment(int s) {
  const Seg sg = S_[s];
  const Curve& cv = pb_.curves[sg.curve];
  if ((P_[sg.b] - P_[sg.a]).norm() < min_seg_len_) return false;
  const double tm = 0.5 * (sg.t0 + sg.t1);
  const Vec2 p = cv.point(tm);
  int opp = 0;
  int start = find_edge_tri(sg.a, sg.b, &opp);
  if (start < 0) start = vtri_[sg.a];
  const int tc = locate(p, start, nullptr);
  if (tc < 0) return false;
  std::vector<int> cav;
  if (!cavity(p, tc, s, cav)) return false;
  std::vector<int> created;
  const int m = add_vertex(p);
  insert(m, cav, s, &created);

  seg_of_.erase(edge_key(sg.a, sg.b));
  S_[s].alive = false;
  const int s1 = static_cast<int>(S_.size());
  S_.push_back({sg.a, m, sg.curve, sg.t0, tm, true});
  S_.push_back({m, sg.b, sg.curve, tm, sg.t1, true});
  seg_of_[edge_key(sg.a, m)] = s1;
  seg_of_[edge_key(m, sg.b)] = s1 + 1;
  segq_.push_back(s1);
  segq_.push_back(s1 + 1);
  push_new(created);
  return true;
}

void Refiner::push_new(const std::vector<int>& created) {
  for (int t : created) {
    const Tri& tr = T_[t];
    const int s = seg_at(tr.v[0], tr.v[1]);
    if (s >= 0) segq_.push_back(s);
    if (refining_ && tr.inside) bad_.push_back({t, tr.gen});
  }
}

void Refiner::flood_inside() {
  std::vector<int> q;
  for (int t = 0; t < static_cast<int>(T_.size()); ++t) {
    if (!T_[t].alive) continue;
    T_[t].inside = true;
  }
  ++stamp_;
  for (int t = 0; t < static_cast<int>(T_.size()); ++t) {
    if (!T_[t].alive) continue;
    const Tri& tr = T_[t];
    if (is_super(tr.v[0]) || is_super(tr.v[1]) || is_super(tr.v[2])) {
      q.push_back(t);
      mark_[t] = stamp_;
    }
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    Tri& tr = T_[q[i]];
    tr.inside = false;
    for (int k = 0; k < 3; ++k) {
      const int nb = tr.n[k];
      if (nb < 0 || mark_[nb] == stamp_) continue;
      const int s = seg_at(tr.v[(k + 1) % 3], tr.v[(k + 2) % 3]);
      if (s >= 0 && !pb_.curves[S_[s].curve].interior) continue;
      mark_[nb] = stamp_;
      q.push_back(nb);
    }
  }
  inside_count_ = 0;
  for (const auto& t : T_)
    if (t.alive && t.inside) ++inside_count_;
}

bool Refiner::is_bad(int t, double* hsize) const {
  const Tri& tr = T_[t];
  const Vec2& a = P_[tr.v[0]];
  const Vec2& b = P_[tr.v[1]];
  const Vec2& c = P_[tr.v[2]];
  const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
  const double area2 = std::abs(orient(a, b, c));
  const double R = la * lb * lc / (2.0 * area2);
  const double lmin = std::min({la, lb, lc});
  double h = opts_.policy.size_at((a + b + c) / 3.0, pb_.anchors);
  for (const Vec2* p : {&a, &b, &c}) h = std::min(h, opts_.policy.size_at(*p, pb_.anchors));
  if (hsize) *hsize = h;
  if (std::max({la, lb, lc}) > h) return true;
  return R / lmin > opts_.min_angle_ratio;
}

void Refiner::discretize_boundary() {
  std::map<std::pair<double, double>, int> vid;
  auto vertex = [&](const Vec2& p) {
    auto key = std::make_pair(p.x(), p.y());
    auto it = vid.find(key);
    if (it != vid.end()) return it->second;
    const int id = add_vertex(p);
    vid[key] = id;
    return id;
  };
  struct Pending {
    int a, b, curve;
    double t0, t1;
  };
  std::vector<Pending> pend;
  double hmin = opts_.policy.h_far;
  for (int ci = 0; ci < static_cast<int>(pb_.curves.size()); ++ci) {
    const Curve& cv = pb_.curves[ci];
    const double len = cv.length();
    const int M = std::max(2000, static_cast<int>(std::ceil(40.0 * len / opts_.policy.h_junction)));
    std::vector<double> cum(M + 1, 0.0);
    auto dens = [&](double t) {
      const double h = opts_.policy.size_at(cv.point(t), pb_.anchors);
      hmin = std::min(hmin, h);
      return len / h;
    };
    double prev = dens(0.0);
    for (int i = 1; i <= M; ++i) {
      const double t = static_cast<double>(i) / M;
      const double cur = dens(t);
      cum[i] = cum[i - 1] + 0.5 * (prev + cur) / M;
      prev = cur;
    }
    int n = std::max(1, static_cast<int>(std::ceil(cum[M] - 1e-9)));
    if (cv.kind == Curve::Kind::Arc)
      n = std::max(n, static_cast<int>(std::ceil(std::abs(cv.phi1 - cv.phi0) / (M_PI / 16))));
    std::vector<double> ts{0.0};
    int j = 0;
    for (int k = 1; k < n; ++k) {
      const double target = cum[M] * k / n;
      while (j < M && cum[j + 1] < target) ++j;
      const double frac = (target - cum[j]) / (cum[j + 1] - cum[j]);
      ts.push_back((j + frac) / M);
    }
    ts.push_back(1.0);
    int prev_v = vertex(cv.a);
    for (std::size_t k = 1; k < ts.size(); ++k) {
      const int v = (k + 1 == ts.size()) ? vertex(cv.b) : vertex(cv.point(ts[k]));
      pend.push_back({prev_v, v, ci, ts[k - 1], ts[k]});
      prev_v = v;
    }
  }
  min_seg_len_ = 1e-3 * hmin;
  for (const auto& p : pend) S_.push_back({p.a, p.b, p.curve, p.t0, p.t1, true});
}

Mesh Refiner::run() {
  opts_.policy.validate();
  if (pb_.curves.empty()) throw Error(ErrorKind::Geometry, "empty boundary");

  // super triangle first so that vertices 0..2 are the super vertices
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& c : pb_.curves)
    for (double t = 0.0; t <= 1.0; t += 1.0 / 64) {
      const Vec2 p = c.point(t);
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  const Vec2 mid = 0.5 * (lo + hi);
  const double L = std::max((hi - lo).maxCoeff(), 1e-12) * 20.0;
  add_vertex(mid + Vec2(0, 2 * L));
  add_vertex(mid + Vec2(-std::sqrt(3.0) * L, -L));
  add_vertex(mid + Vec2(std::sqrt(3.0) * L, -L));
  add_tri(1, 2, 0, false);

  discretize_boundary();
  std::vector<int> cav;
  for (int v = 3; v < static_cast<int>(P_.size()); ++v) {
    const int tc = locate(P_[v], last_tri_, nullptr);
    if (tc < 0 || !cavity(P_[v], tc, -1, cav))
      throw Error(ErrorKind::Geometry, "failed to insert boundary vertex");
    insert(v, cav, -1, nullptr);
  }
  for (int s = 0; s < static_cast<int>(S_.size()); ++s) {
    seg_of_[edge_key(S_[s].a, S_[s].b)] = s;
    segq_.push_back(s);
  }

  const std::size_t budget = opts_.element_budget;
  auto drain_segments = [&]() {
    while (!segq_.empty()) {
      const int s = segq_.front();
      segq_.pop_front();
      if (!S_[s].alive) continue;
      if (encroached(s)) {
        if (!split_segment(s) && find_edge_tri(S_[s].a, S_[s].b, nullptr) < 0)
          throw Error(ErrorKind::Geometry, "failed to recover a boundary segment");
      }
      if (P_.size() > 2 * budget + 16) throw Error(ErrorKind::Budget, "mesh element budget exceeded");
    }
  };
  drain_segments();
  flood_inside();
  refining_ = true;
  for (int t = 0; t < static_cast<int>(T_.size()); ++t)
    if (T_[t].alive && T_[t].inside) bad_.push_back({t, T_[t].gen});

  while (!bad_.empty()) {
    drain_segments();
    if (inside_count_ > budget) throw Error(ErrorKind::Budget, "mesh element budget exceeded");
    if (bad_.empty()) break;
    const auto [t, gen] = bad_.front();
    bad_.pop_front();
    if (!T_[t].alive || T_[t].gen != gen || !T_[t].inside) continue;
    if (!is_bad(t, nullptr)) continue;
    const Tri tr = T_[t];
    const Vec2 c = circumcenter(P_[tr.v[0]], P_[tr.v[1]], P_[tr.v[2]]);
    int crossed = -1;
    const int tc = locate(c, t, &crossed);
    if (tc < 0) continue;
    if (crossed >= 0) {
      if (split_segment(crossed)) bad_.push_back({t, T_[t].gen});
      continue;
    }
    if (!T_[tc].inside) continue;
    if (!cavity(c, tc, -1, cav)) continue;
    std::vector<int> enc;
    for (int q : cav) {
      const Tri& ct = T_[q];
      for (int i = 0; i < 3; ++i) {
        const int nb = ct.n[i];
        if (nb >= 0 && mark_[nb] == stamp_) continue;
        const int a = ct.v[(i + 1) % 3], b = ct.v[(i + 2) % 3];
        const int s = seg_at(a, b);
        if (s >= 0 && (P_[a] - c).dot(P_[b] - c) < 0) enc.push_back(s);
      }
    }
    if (!enc.empty()) {
      bool any = false;
      for (int s : enc)
        if (S_[s].alive && split_segment(s)) any = true;
      if (any && T_[t].alive) bad_.push_back({t, T_[t].gen});
      continue;
    }
    std::vector<int> created;
    const int v = add_vertex(c);
    insert(v, cav, -1, &created);
    push_new(created);
  }

  Mesh mesh = extract();
  mesh.set_order(opts_.order);
  return mesh;
}

Mesh Refiner::extract() const {
  Mesh mesh;
  std::vector<int> remap(P_.size(), -1);
  std::vector<int> tris;
  for (int t = 0; t < static_cast<int>(T_.size()); ++t)
    if (T_[t].alive && T_[t].inside) tris.push_back(t);
  std::vector<bool> used(P_.size(), false);
  for (int t : tris)
    for (int v : T_[t].v) used[v] = true;
  for (int v = 0; v < static_cast<int>(P_.size()); ++v)
    if (used[v]) {
      remap[v] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(P_[v]);
    }
  for (int t : tris) {
    const auto& v = T_[t].v;
    mesh.triangles.push_back({remap[v[0]], remap[v[1]], remap[v[2]]});
  }
  for (const auto& s : S_) {
    if (!s.alive) continue;
    const Curve& cv = pb_.curves[s.curve];
    TaggedEdge e;
    e.a = remap[s.a];
    e.b = remap[s.b];
    if (e.a < 0 || e.b < 0) continue;
    e.tag = cv.tag;
    e.arc_radius = (cv.kind == Curve::Kind::Arc) ? cv.radius : 0.0;
    (cv.interior ? mesh.interface_edges : mesh.boundary_edges).push_back(e);
  }
  return mesh;
}

}  // namespace

Mesh generate_mesh(const PiecewiseBoundary& boundary, const MeshOptions& opts) {
  Refiner r(boundary, opts);
  return r.run();
}

Mesh generate_mesh(const PiecewiseBoundary& boundary, const GradingPolicy& policy, ElementOrder order) {
  MeshOptions opts;
  opts.policy = policy;
  opts.order = order;
  return generate_mesh(boundary, opts);
}

}  // namespace tubespec
