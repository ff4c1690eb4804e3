#include "qslab/rings.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>

#include "qslab/errors.hpp"
#include "qslab/parallel.hpp"

namespace qslab {

namespace {

std::size_t at(Index i) { return static_cast<std::size_t>(i); }

// Open-ball radius around p whose measure first reaches `target`, taken
// halfway to the next distinct distance. Returns (radius, measure).
std::pair<double, double> calibrate(const DiscreteSpace& space, Index p, double target, double lo, double hi) {
  const auto cached = space.nearest(p);
  double reach = cached.empty() ? 2.0 * space.mesh_scale() : 0.0;
  const double limit = 4.0 * space.diameter() + 1.0;
  while (true) {
    std::vector<Neighbor> nbrs;
    if (reach == 0.0) {
      // The cached nearest list is exact up to (excluding) its last distance.
      nbrs.push_back({0.0, p});
      nbrs.insert(nbrs.end(), cached.begin(), cached.end());
      const double last = nbrs.back().distance;
      while (nbrs.size() > 1 && nbrs.back().distance == last) nbrs.pop_back();
      reach = last > 0.0 ? last : space.mesh_scale();
    } else {
      nbrs = space.sorted_neighbors(p, reach);
    }
    double cum = 0.0;
    std::size_t k = 0;
    while (k < nbrs.size()) {
      // Points at equal distance enter an open ball together.
      std::size_t end = k;
      double group = 0.0;
      Index heaviest = nbrs[k].id;
      while (end < nbrs.size() && nbrs[end].distance == nbrs[k].distance) {
        group += space.weight(nbrs[end].id);
        if (space.weight(nbrs[end].id) > space.weight(heaviest)) heaviest = nbrs[end].id;
        ++end;
      }
      const double next_cum = cum + group;
      if (next_cum >= target) {
        if (end == nbrs.size() && reach < limit) break;  // next distance unknown yet
        if (next_cum > hi) {
          if (cum >= lo) return {nbrs[k].distance, cum};
          throw ComputationError("cannot calibrate a cover ball at point " + std::to_string(p) + ": point " +
                                 std::to_string(heaviest) + " is an atom heavier than the measure window");
        }
        const double next_d = end < nbrs.size() ? nbrs[end].distance : nbrs[k].distance * 2.0 + reach;
        return {0.5 * (nbrs[k].distance + next_d), next_cum};
      }
      cum = next_cum;
      k = end;
    }
    if (reach >= limit) {
      throw ComputationError("cannot calibrate a cover ball at point " + std::to_string(p) +
                             ": total mass below the target measure");
    }
    reach *= 2.0;
  }
}

std::vector<char> mask_of(Index n, const std::vector<Index>& ids) {
  std::vector<char> m(at(n), 0);
  for (Index i : ids) m[at(i)] = 1;
  return m;
}

// Complement regions of a ring: component labels of the mesh graph minus the
// removed set, and the label holding the inner witness.
struct Regions {
  std::vector<char> removed;
  std::vector<int> labels;
  int inner = -1;
};

Regions regions_of(const ProximityGraph& mesh, const RingChain& ring) {
  Regions r;
  r.removed = mask_of(mesh.size(), ring.certificate.removed_vertex_set);
  std::vector<char> allowed(r.removed.size());
  for (std::size_t i = 0; i < allowed.size(); ++i) allowed[i] = !r.removed[i];
  r.labels = component_labels(mesh, allowed);
  r.inner = r.labels[at(ring.certificate.inner_witness)];
  return r;
}

enum class Side { inside, outside };

// Where the removed set of `ring` sits relative to `other`'s regions.
Side locate(const RingChain& ring, const Regions& other) {
  bool in = false, out = false;
  for (Index v : ring.certificate.removed_vertex_set) {
    (other.labels[at(v)] == other.inner ? in : out) = true;
  }
  if (in && out) throw ComputationError("ring straddles two components of another ring's complement");
  return in ? Side::inside : Side::outside;
}

bool intersects(const RingChain& a, const Regions& b) {
  return std::any_of(a.certificate.removed_vertex_set.begin(), a.certificate.removed_vertex_set.end(),
                     [&](Index v) { return b.removed[at(v)] != 0; });
}

Nesting classify(const RingChain& a, const Regions& ra, const RingChain& b, const Regions& rb) {
  if (intersects(a, rb)) return Nesting::intersecting;
  const bool a_in = locate(a, rb) == Side::inside;
  const bool b_in = locate(b, ra) == Side::inside;
  if (a_in && b_in) throw ComputationError("each ring lies inside the other; nesting is ambiguous");
  if (a_in) return Nesting::a_inside_b;
  if (b_in) return Nesting::b_inside_a;
  return Nesting::exterior_disjoint;
}

// Runs body(i) for every i, collecting results in order; rethrows the first
// failure by index.
template <class T, class Body>
std::vector<T> map_ordered(std::size_t n, Body&& body) {
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  parallel_for(n, [&](std::size_t i) {
    try {
      slots[i] = body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

bool connected_in_mesh(const ProximityGraph& mesh, const std::vector<Index>& vertices) {
  if (vertices.empty()) return false;
  const auto labels = component_labels(mesh, mask_of(mesh.size(), vertices));
  return std::all_of(vertices.begin(), vertices.end(), [&](Index v) { return labels[at(v)] == labels[at(vertices.front())]; });
}

}  // namespace

RingMultipliers RingMultipliers::strict(double lambda) {
  const int k = smallest_k(lambda);
  return {std::ldexp(1.0, 2 * k), std::ldexp(1.0, 5 * k), std::ldexp(1.0, 7 * k)};
}

int smallest_k(double lambda) {
  if (!(lambda >= 1.0)) throw InputError("lambda must be >= 1");
  int k = 0;
  while (std::ldexp(1.0, k) <= lambda) ++k;
  return k;
}

double RingParams::epsilon_for(const DiscreteSpace& space, double factor) {
  return std::sqrt(factor * space.median_weight());
}

std::vector<CoverBall> measure_calibrated_cover(const DiscreteSpace& space, const Annulus& annulus, double epsilon,
                                                double doubling_constant) {
  space.check_id(annulus.center);
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (!(doubling_constant >= 1.0)) throw InputError("doubling constant must be >= 1");
  if (!(annulus.r_lo >= 0.0 && annulus.r_hi > annulus.r_lo)) throw InputError("annulus radii must satisfy 0 <= lo < hi");

  std::vector<Index> points;
  for (Index p = 0; p < space.size(); ++p) {
    const double d = space.distance(annulus.center, p);
    if (d >= annulus.r_lo && d <= annulus.r_hi) points.push_back(p);
  }
  if (points.size() < 2) throw InputError("annulus holds fewer than 2 sample points; cannot calibrate");

  const double hi = epsilon * epsilon;
  const double lo = hi / (2.0 * doubling_constant);
  // Aim for the middle of the window on a log scale.
  const double target = std::sqrt(lo * hi);
  struct Candidate {
    Index p;
    double radius, measure;
  };
  auto candidates = map_ordered<Candidate>(points.size(), [&](std::size_t i) {
    const auto [radius, measure] = calibrate(space, points[i], target, lo, hi);
    return Candidate{points[i], radius, measure};
  });
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.radius > b.radius || (a.radius == b.radius && a.p < b.p);
  });

  std::vector<CoverBall> kept;
  for (const Candidate& c : candidates) {
    const auto blocker = std::find_if(kept.begin(), kept.end(), [&](const CoverBall& b) {
      return space.distance(b.center, c.p) <= b.radius + c.radius;
    });
    if (blocker == kept.end()) {
      kept.push_back({c.p, c.radius, c.measure, c.radius, 0.0});
    } else {
      blocker->inflated_radius = std::max(blocker->inflated_radius, space.distance(blocker->center, c.p));
    }
  }
  for (CoverBall& b : kept) b.inflated_measure = space.closed_ball_measure(b.center, b.inflated_radius);
  return kept;
}

bool verify_certificate(const ProximityGraph& mesh, const SeparationCertificate& cert) {
  if (cert.inner_witness < 0 || cert.outer_witness < 0) return false;
  // Search from the inner witness; stop as soon as the outer one is reached.
  std::vector<char> seen = mask_of(mesh.size(), cert.removed_vertex_set);
  if (seen[at(cert.inner_witness)] || seen[at(cert.outer_witness)]) return false;
  std::vector<Index> stack{cert.inner_witness};
  seen[at(cert.inner_witness)] = 1;
  while (!stack.empty()) {
    const Index u = stack.back();
    stack.pop_back();
    for (Index v : mesh.adjacency[at(u)]) {
      if (seen[at(v)]) continue;
      if (v == cert.outer_witness) return false;
      seen[at(v)] = 1;
      stack.push_back(v);
    }
  }
  return true;
}

RingContext make_ring_context(const DiscreteSpace& space, double delta) {
  return {&space, mesh_graph(space), build_delta_graph(space, delta, 2.0)};
}

RingChain cheapest_level_ring(const DiscreteSpace& space, const RingParams& params) {
  return cheapest_level_ring(make_ring_context(space, params.delta), params);
}

RingChain cheapest_level_ring(const RingContext& ctx, const RingParams& params) {
  const DiscreteSpace& space = *ctx.space;
  const RingMultipliers& mult = params.multipliers;
  space.check_id(params.center);
  if (!(params.delta > 0.0)) throw InputError("delta must be positive");
  if (params.delta != ctx.chain_graph.delta) throw InputError("ring context was built for a different delta");
  if (!(0.0 < mult.inner && mult.inner < mult.outer && mult.outer < mult.guard)) {
    throw InputError("multipliers must satisfy 0 < inner < outer < guard");
  }
  if (!(params.r >= space.mesh_scale())) throw InputError("ring radius is below the mesh scale");
  if (!(mult.guard * params.r < space.diameter())) throw InputError("guard radius exceeds the space diameter");
  if (!(params.epsilon * params.epsilon >= 5.0 * space.median_weight())) {
    throw InputError("epsilon^2 must be at least 5 median point weights");
  }

  const Index n = space.size();
  const Index c = params.center;
  const double r_in = mult.inner * params.r, r_out = mult.outer * params.r;
  const double link = ctx.mesh.link;
  const auto cover =
      measure_calibrated_cover(space, {c, r_in, r_out}, params.epsilon, params.doubling_constant);
  const auto m = static_cast<Index>(cover.size());

  std::vector<std::vector<Index>> members(at(m));
  std::vector<char> seed(at(m), 0), outer_shell(at(m), 0);
  for (Index b = 0; b < m; ++b) {
    members[at(b)] = space.closed_ball(cover[at(b)].center, cover[at(b)].inflated_radius);
    for (Index p : members[at(b)]) {
      const double d = space.distance(c, p);
      if (d < r_in || d > r_out) continue;
      if (d < r_in + link) seed[at(b)] = 1;
      if (d > r_out - link) outer_shell[at(b)] = 1;
    }
  }
  std::vector<std::vector<Index>> adj(at(m));
  for (Index a = 0; a < m; ++a) {
    for (Index b = a + 1; b < m; ++b) {
      const double gap = space.distance(cover[at(a)].center, cover[at(b)].center);
      if (gap <= cover[at(a)].inflated_radius + cover[at(b)].inflated_radius + link) {
        adj[at(a)].push_back(b);
        adj[at(b)].push_back(a);
      }
    }
  }

  // Counting function u: breadth-first level from the inner shell.
  std::vector<int> level(at(m), 0);
  std::vector<Index> frontier;
  for (Index b = 0; b < m; ++b) {
    if (seed[at(b)]) {
      level[at(b)] = 1;
      frontier.push_back(b);
    }
  }
  if (frontier.empty()) throw ComputationError("no cover ball meets the inner boundary shell");
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const Index a = frontier[head];
    for (Index b : adj[at(a)]) {
      if (level[at(b)] == 0) {
        level[at(b)] = level[at(a)] + 1;
        frontier.push_back(b);
      }
    }
  }
  int depth = 0;
  for (Index b = 0; b < m; ++b) {
    if (outer_shell[at(b)] && level[at(b)] > 0 && (depth == 0 || level[at(b)] < depth)) depth = level[at(b)];
  }
  if (depth == 0) throw ComputationError("the cover does not link the inner and outer shells; use a smaller epsilon");

  std::vector<double> weights(at(depth), 0.0);
  for (Index b = 0; b < m; ++b) {
    if (level[at(b)] >= 1 && level[at(b)] <= depth) {
      weights[at(level[at(b)] - 1)] += std::sqrt(cover[at(b)].inflated_measure);
    }
  }
  const int j = 1 + static_cast<int>(std::min_element(weights.begin(), weights.end()) - weights.begin());

  // Components of level set j in the ball graph.
  std::vector<std::vector<Index>> components;
  std::vector<int> comp(at(m), -1);
  for (Index b = 0; b < m; ++b) {
    if (level[at(b)] != j || comp[at(b)] >= 0) continue;
    components.emplace_back();
    std::vector<Index> stack{b};
    comp[at(b)] = static_cast<int>(components.size() - 1);
    while (!stack.empty()) {
      const Index a = stack.back();
      stack.pop_back();
      components.back().push_back(a);
      for (Index nb : adj[at(a)]) {
        if (level[at(nb)] == j && comp[at(nb)] < 0) {
          comp[at(nb)] = comp[at(b)];
          stack.push_back(nb);
        }
      }
    }
    std::sort(components.back().begin(), components.back().end());
  }
  const auto component_weight = [&](const std::vector<Index>& balls) {
    double w = 0.0;
    for (Index b : balls) w += std::sqrt(cover[at(b)].inflated_measure);
    return w;
  };
  std::stable_sort(components.begin(), components.end(), [&](const auto& a, const auto& b) {
    return component_weight(a) < component_weight(b);
  });

  // Outer witness: farthest point from the center beyond the guard radius.
  Index outer = -1;
  double far = mult.guard * params.r;
  for (Index p = 0; p < n; ++p) {
    const double d = space.distance(c, p);
    if (d > far) {
      far = d;
      outer = p;
    }
  }
  if (outer < 0) throw InputError("no sample point lies beyond the guard radius");

  const auto certify = [&](const std::vector<Index>& balls) {
    std::set<Index> removed;
    for (Index b : balls) removed.insert(members[at(b)].begin(), members[at(b)].end());
    SeparationCertificate cert{{removed.begin(), removed.end()}, c, outer, false};
    cert.verified = verify_certificate(ctx.mesh, cert);
    return cert;
  };
  const auto ball_connected = [&](const std::vector<Index>& balls) {
    std::vector<char> in(at(m), 0), seen(at(m), 0);
    for (Index b : balls) in[at(b)] = 1;
    std::vector<Index> stack{balls.front()};
    seen[at(balls.front())] = 1;
    std::size_t count = 0;
    while (!stack.empty()) {
      const Index a = stack.back();
      stack.pop_back();
      ++count;
      for (Index nb : adj[at(a)]) {
        if (in[at(nb)] && !seen[at(nb)]) {
          seen[at(nb)] = 1;
          stack.push_back(nb);
        }
      }
    }
    return count == balls.size();
  };

  for (auto balls : components) {
    if (!certify(balls).verified) continue;
    // Thin the component: drop balls, outermost first, while it stays
    // connected and separating.
    std::vector<Index> order_out = balls;
    std::sort(order_out.begin(), order_out.end(), [&](Index a, Index b) {
      const double da = space.distance(c, cover[at(a)].center), db = space.distance(c, cover[at(b)].center);
      return da > db || (da == db && cover[at(a)].center < cover[at(b)].center);
    });
    for (Index drop : order_out) {
      if (balls.size() <= 1) break;
      std::vector<Index> trial;
      for (Index b : balls) {
        if (b != drop) trial.push_back(b);
      }
      if (ball_connected(trial) && certify(trial).verified) balls = std::move(trial);
    }
    SeparationCertificate cert = certify(balls);

    RingChain ring;
    ring.level = j;
    ring.depth = depth;
    ring.cover_size = m;
    ring.level_weights = weights;
    ring.center = c;
    ring.r = params.r;
    for (Index b : balls) ring.balls.push_back(cover[at(b)]);

    // Depth-first preorder over the component, smallest center id first.
    std::vector<Index> order;
    std::vector<char> seen(at(m), 0), kept(at(m), 0);
    for (Index b : balls) kept[at(b)] = 1;
    auto by_center = [&](Index a, Index b) { return cover[at(a)].center < cover[at(b)].center; };
    std::vector<Index> roots = balls;
    std::sort(roots.begin(), roots.end(), by_center);
    std::vector<Index> stack{roots.front()};
    while (!stack.empty()) {
      const Index a = stack.back();
      stack.pop_back();
      if (seen[at(a)]) continue;
      seen[at(a)] = 1;
      order.push_back(a);
      std::vector<Index> next;
      for (Index nb : adj[at(a)]) {
        if (kept[at(nb)] && !seen[at(nb)]) next.push_back(nb);
      }
      std::sort(next.begin(), next.end(), by_center);
      for (auto it = next.rbegin(); it != next.rend(); ++it) stack.push_back(*it);
    }

    const auto allowed = mask_of(n, cert.removed_vertex_set);
    ring.chain.push_back(cover[at(order.front())].center);
    for (std::size_t k = 1; k < order.size(); ++k) {
      const Index from = ring.chain.back(), to = cover[at(order[k])].center;
      ChainResult leg = chain_distance_within(ctx.chain_graph, from, to, allowed);
      if (!leg.reachable) leg = chain_distance(ctx.chain_graph, from, to);
      if (!leg.reachable) throw ComputationError("ring ball centers are not joined by a delta-chain; raise delta");
      ring.chain.insert(ring.chain.end(), leg.path.begin() + 1, leg.path.end());
    }
    ring.total_weight = chain_weight(space, ring.chain, 2.0);
    ring.certificate = std::move(cert);
    return ring;
  }
  throw ComputationError("no component of the cheapest level separates; use a smaller epsilon");
}

std::string to_string(Nesting n) {
  switch (n) {
    case Nesting::intersecting:
      return "intersecting";
    case Nesting::a_inside_b:
      return "a_inside_b";
    case Nesting::b_inside_a:
      return "b_inside_a";
    case Nesting::exterior_disjoint:
      return "exterior_disjoint";
  }
  return "intersecting";
}

Nesting nesting_relation(const DiscreteSpace& space, const RingChain& a, const RingChain& b) {
  return nesting_relation(mesh_graph(space), a, b);
}

Nesting nesting_relation(const ProximityGraph& mesh, const RingChain& a, const RingChain& b) {
  if (!a.certificate.verified || !b.certificate.verified) throw InputError("nesting needs verified certificates");
  return classify(a, regions_of(mesh, a), b, regions_of(mesh, b));
}

std::vector<char> maximal_rings(const ProximityGraph& mesh, const std::vector<RingChain>& rings) {
  const auto regions = map_ordered<Regions>(rings.size(), [&](std::size_t i) { return regions_of(mesh, rings[i]); });
  std::vector<char> maximal(rings.size(), 1);
  for (std::size_t a = 0; a < rings.size(); ++a) {
    for (std::size_t b = a + 1; b < rings.size(); ++b) {
      const Nesting rel = classify(rings[a], regions[a], rings[b], regions[b]);
      if (rel == Nesting::a_inside_b) maximal[a] = 0;
      if (rel == Nesting::b_inside_a) maximal[b] = 0;
    }
  }
  return maximal;
}

RingCover ring_cover_of_ball(const DiscreteSpace& space, Index center, double R, const RingCoverParams& params) {
  return ring_cover_of_ball(make_ring_context(space, params.delta), center, R, params);
}

RingCover ring_cover_of_ball(const RingContext& ctx, Index center, double R, const RingCoverParams& params) {
  const DiscreteSpace& space = *ctx.space;
  space.check_id(center);
  if (!(params.L > 1.0)) throw InputError("L must exceed 1");
  if (!(R >= space.mesh_scale())) throw InputError("ball radius is below the mesh scale");
  if (!space.ball_fits(center, R)) throw InputError("ball is not interior to the space");

  RingCover out;
  out.center = center;
  out.radius = R;
  out.L = params.L;
  out.ball_measure = space.ball_measure(center, R);
  const double target = out.ball_measure / params.L;
  if (target < 2.0 * space.median_weight()) {
    throw ComputationError("cover balls would hold less than 2 point weights; lower L");
  }

  // U: the center's component of the mesh graph inside the ball.
  const auto inside = space.ball(center, R);
  const auto labels = component_labels(ctx.mesh, mask_of(space.size(), inside));
  std::vector<Neighbor> U;
  for (Index p : inside) {
    if (labels[at(p)] == labels[at(center)]) U.push_back({space.distance(center, p), p});
  }
  std::sort(U.begin(), U.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  });

  std::vector<char> covered(at(space.size()), 0);
  for (const Neighbor& u : U) {
    if (covered[at(u.id)]) continue;
    // Largest open ball around u with measure <= target.
    double reach = 2.0 * space.mesh_scale();
    double radius = -1.0, measure = 0.0;
    while (radius < 0.0) {
      const auto nbrs = space.sorted_neighbors(u.id, reach);
      double cum = 0.0;
      std::size_t k = 0;
      while (k < nbrs.size()) {
        std::size_t end = k;
        double group = 0.0;
        while (end < nbrs.size() && nbrs[end].distance == nbrs[k].distance) group += space.weight(nbrs[end++].id);
        if (cum + group > target) {
          if (k == 0) throw ComputationError("point " + std::to_string(u.id) + " outweighs the cover target");
          radius = nbrs[k].distance;
          measure = cum;
          break;
        }
        cum += group;
        k = end;
      }
      if (radius < 0.0) {
        if (reach > 4.0 * space.diameter()) throw ComputationError("cover target exceeds the total mass");
        reach *= 2.0;
      }
    }
    out.balls.push_back({u.id, radius, measure, radius, measure});
    for (Index p : space.ball(u.id, radius)) covered[at(p)] = 1;
  }

  const double eps = params.epsilon > 0.0 ? params.epsilon : RingParams::epsilon_for(space, 5.0);
  out.rings = map_ordered<RingChain>(out.balls.size(), [&](std::size_t i) {
    RingParams rp{out.balls[i].center, out.balls[i].radius, params.delta, eps, params.multipliers,
                  params.doubling_constant};
    try {
      return cheapest_level_ring(ctx, rp);
    } catch (const ComputationError& e) {
      throw ComputationError("ring for cover ball " + std::to_string(i) + " (center " +
                             std::to_string(out.balls[i].center) + "): " + e.what());
    } catch (const InputError& e) {
      throw InputError("ring for cover ball " + std::to_string(i) + " (center " +
                       std::to_string(out.balls[i].center) + "): " + e.what());
    }
  });
  out.maximal = maximal_rings(ctx.mesh, out.rings);
  std::set<Index> united;
  for (std::size_t i = 0; i < out.rings.size(); ++i) {
    if (!out.maximal[i]) continue;
    const auto& removed = out.rings[i].certificate.removed_vertex_set;
    united.insert(removed.begin(), removed.end());
  }
  out.union_vertices.assign(united.begin(), united.end());
  out.union_connected = connected_in_mesh(ctx.mesh, out.union_vertices);
  return out;
}

NestedConnectorTrace connect_via_rings(const DiscreteSpace& space, Index x, Index y, const ConnectorParams& params) {
  space.check_id(x);
  space.check_id(y);
  if (x == y) throw InputError("x and y must differ");
  const double dxy = space.distance(x, y);
  if (!(params.delta > 0.0)) throw InputError("delta must be positive");

  NestedConnectorTrace trace;
  trace.x = x;
  trace.y = y;
  trace.delta = params.delta;
  if (dxy <= params.delta) {
    trace.chain = {x, y};
    trace.total_weight = std::sqrt(space.pair_ball_measure(x, y));
    trace.stop_reasons = {"within delta", "within delta"};
    return trace;
  }
  if (dxy < 8.0 * space.mesh_scale()) throw InputError("d(x, y) must be at least 8 mesh scales");
  const RingContext ctx = make_ring_context(space, params.delta);

  const double eps = params.epsilon > 0.0 ? params.epsilon : RingParams::epsilon_for(space, 5.0);
  const RingCoverParams cover_params{params.L, params.delta, eps, params.multipliers, params.doubling_constant};
  const double floor_measure = 2.0 * space.median_weight();

  // B^1 = B(x, inner d(x,y)) is shared by both endpoints.
  const double R1 = params.multipliers.inner * dxy;
  std::vector<RingCover> covers;  // every cover computed, for the final union
  covers.push_back(ring_cover_of_ball(ctx, x, R1, cover_params));
  const RingCover first = covers.front();

  std::vector<char> allowed(at(space.size()), 0);
  allowed[at(x)] = allowed[at(y)] = 1;

  for (const Index z : {x, y}) {
    const RingCover* cover = &first;
    Index ball_center = x;
    double ball_radius = R1;
    double ball_measure = first.ball_measure;
    std::string reason;
    for (int lvl = 1;; ++lvl) {
      // Maximal rings whose inner region holds z.
      std::vector<std::size_t> holders;
      std::optional<std::size_t> own;
      for (std::size_t i = 0; i < cover->rings.size(); ++i) {
        const CoverBall& b = cover->balls[i];
        if (!own && space.distance(b.center, z) < b.radius) own = i;
        if (!cover->maximal[i]) continue;
        const RingChain& ring = cover->rings[i];
        const auto removed = mask_of(space.size(), ring.certificate.removed_vertex_set);
        if (removed[at(z)]) continue;
        std::vector<char> open(removed.size());
        for (std::size_t p = 0; p < open.size(); ++p) open[p] = !removed[p];
        const auto labels = component_labels(ctx.mesh, open);
        if (labels[at(z)] == labels[at(ring.certificate.inner_witness)]) holders.push_back(i);
      }
      bool ambiguous = holders.size() != 1;
      std::size_t chosen;
      if (holders.empty()) {
        if (!own) throw ComputationError("endpoint lies in no cover ball of its level");
        chosen = *own;
      } else if (own && std::find(holders.begin(), holders.end(), *own) != holders.end()) {
        chosen = *own;
      } else {
        chosen = *std::min_element(holders.begin(), holders.end(), [&](std::size_t a, std::size_t b) {
          return cover->balls[a].radius < cover->balls[b].radius ||
                 (cover->balls[a].radius == cover->balls[b].radius && cover->balls[a].center < cover->balls[b].center);
        });
      }
      const RingChain& ring = cover->rings[chosen];
      for (Index v : ring.certificate.removed_vertex_set) allowed[at(v)] = 1;

      const Index next_center = cover->balls[chosen].center;
      const double next_radius = params.multipliers.guard * cover->balls[chosen].radius;
      const double next_measure = space.ball_measure(next_center, next_radius);
      const double decay = next_measure / ball_measure;
      trace.levels.push_back({lvl, z, ball_center, ball_radius, ball_measure, next_center, ring.total_weight, decay,
                              ambiguous});
      trace.tau = std::max(trace.tau, decay);
      if (!(decay < 1.0)) throw ComputationError("nested balls fail to shrink (observed decay >= 1)");

      ball_center = next_center;
      ball_radius = next_radius;
      ball_measure = next_measure;
      if (ball_radius < params.delta / 2.0) {
        reason = "ball radius below delta/2";
        break;
      }
      if (ball_measure / params.L < floor_measure) {
        reason = "cover balls would fall below 2 point weights";
        break;
      }
      // Cover balls of the next level must stay resolvable by a ring.
      RingCover next;
      try {
        next = ring_cover_of_ball(ctx, ball_center, ball_radius, cover_params);
      } catch (const InputError&) {
        reason = "next level falls below the mesh resolution";
        break;
      }
      covers.push_back(std::move(next));
      cover = &covers.back();
    }
    // The innermost ball joins the allowed region.
    for (Index p : space.ball(ball_center, ball_radius)) allowed[at(p)] = 1;
    trace.stop_reasons.push_back(reason);
  }

  // Maximal rings of every recorded cover.
  for (const RingCover& cov : covers) {
    for (std::size_t i = 0; i < cov.rings.size(); ++i) {
      if (!cov.maximal[i]) continue;
      for (Index v : cov.rings[i].certificate.removed_vertex_set) allowed[at(v)] = 1;
    }
  }
  const ChainResult chain = chain_distance_within(ctx.chain_graph, x, y, allowed);
  if (!chain.reachable) throw ComputationError("the recorded rings do not join x to y by a delta-chain");
  trace.chain = chain.path;
  trace.total_weight = chain.total_weight;  // on the chain metric's tick grid
  std::stable_sort(trace.levels.begin(), trace.levels.end(), [&](const ConnectorLevel& a, const ConnectorLevel& b) {
    return a.level < b.level || (a.level == b.level && (a.endpoint == x) > (b.endpoint == x));
  });
  return trace;
}

}  // namespace qslab
