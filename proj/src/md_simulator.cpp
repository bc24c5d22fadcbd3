#include "kinlab/md/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "kinlab/md/collision.hpp"

namespace kinlab::md {
namespace {

constexpr double kTimeTol = 1e-12;       // simultaneity window for event ordering
constexpr double kGrazeTol = 1e-12;      // normal relative speed below this: non-event
constexpr std::uint64_t kEventBudget = 200'000'000;

struct Event {
  double t = 0.0;
  std::uint32_t a = 0, b = 0;
  std::uint64_t ca = 0, cb = 0;
  std::uint8_t kind = 0;  // 0 = pair collision, 1 = cell crossing
  std::uint8_t axis = 0;
  std::int8_t dir = 0;
};

struct EventLater {
  bool operator()(const Event& x, const Event& y) const {
    if (x.t != y.t) return x.t > y.t;
    if (x.kind != y.kind) return x.kind > y.kind;  // collisions before crossings
    if (x.a != y.a) return x.a > y.a;
    return x.b > y.b;
  }
};

}  // namespace

struct EventDrivenSim::Impl {
  TorusGeometry geom;
  double radius;
  double now;
  std::size_t n;

  std::vector<Vec3> x;       // position at local time tloc
  std::vector<Vec3> v;
  std::vector<double> tloc;
  std::vector<std::uint64_t> count;

  // cell list (fast mode); tiny systems fall back to all-pairs predictions
  bool tiny = false;
  int ncell = 1;
  double h = 0.0;  // cell side
  std::vector<int> cx, cy, cz;
  std::vector<int> head, nxt, prv;

  std::priority_queue<Event, std::vector<Event>, EventLater> heap;
  std::uint64_t processed = 0;

  Impl(PhasePoint state, const TorusGeometry& g) : geom(g), radius(state.radius) {
    n = state.size();
    now = state.time;
    x = std::move(state.pos);
    v = std::move(state.vel);
    tloc.assign(n, now);
    count.assign(n, 0);
    for (auto& p : x) p = geom.wrap(p);

    const double side = geom.side;
    int cap = std::max<int>(7, static_cast<int>(std::cbrt(static_cast<double>(n))) + 1);
    int nc = radius > 0.0 ? static_cast<int>(std::floor(side / (2.0 * radius))) : cap;
    nc = std::min(nc, cap);
    if (nc < 3) {
      // too few cells for a meaningful broad phase: all-pairs predictions
      tiny = true;
      ncell = 1;
    } else {
      ncell = nc;
    }
    h = side / ncell;

    cx.assign(n, 0);
    cy.assign(n, 0);
    cz.assign(n, 0);
    head.assign(static_cast<std::size_t>(ncell) * ncell * ncell, -1);
    nxt.assign(n, -1);
    prv.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      cx[i] = cell_of(x[i].x);
      cy[i] = cell_of(x[i].y);
      cz[i] = cell_of(x[i].z);
      link(static_cast<int>(i));
    }
    check_overlap_input();
    for (std::size_t i = 0; i < n; ++i) {
      schedule_crossing(static_cast<std::uint32_t>(i));
      schedule_pairs_init(static_cast<std::uint32_t>(i));
    }
  }

  int cell_of(double coord) const {
    int c = static_cast<int>(std::floor(coord / h));
    if (c < 0) c = 0;
    if (c >= ncell) c = ncell - 1;
    return c;
  }

  int cell_index(int a, int b, int c) const { return (a * ncell + b) * ncell + c; }

  void link(int i) {
    const int idx = cell_index(cx[i], cy[i], cz[i]);
    prv[i] = -1;
    nxt[i] = head[idx];
    if (head[idx] >= 0) prv[head[idx]] = i;
    head[idx] = i;
  }

  void unlink(int i) {
    const int idx = cell_index(cx[i], cy[i], cz[i]);
    if (prv[i] >= 0)
      nxt[prv[i]] = nxt[i];
    else
      head[idx] = nxt[i];
    if (nxt[i] >= 0) prv[nxt[i]] = prv[i];
  }

  void check_overlap_input() const {
    const double lim = 2.0 * radius - 1e-9;
    if (lim <= 0.0) return;
    if (tiny) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (geom.distance(x[i], x[j]) < lim)
            throw OverlapInput("hard-sphere state has overlapping pair " + std::to_string(i) +
                               "," + std::to_string(j));
      return;
    }
    // cell side >= 2r, so overlapping pairs always sit in neighboring cells
    for (std::size_t i = 0; i < n; ++i)
      for (int a = cx[i] - 1; a <= cx[i] + 1; ++a)
        for (int b = cy[i] - 1; b <= cy[i] + 1; ++b)
          for (int c = cz[i] - 1; c <= cz[i] + 1; ++c) {
            const int wa = (a % ncell + ncell) % ncell;
            const int wb = (b % ncell + ncell) % ncell;
            const int wc = (c % ncell + ncell) % ncell;
            for (int j = head[cell_index(wa, wb, wc)]; j >= 0; j = nxt[j])
              if (static_cast<std::size_t>(j) > i && geom.distance(x[i], x[j]) < lim)
                throw OverlapInput("hard-sphere state has overlapping pair " +
                                   std::to_string(i) + "," + std::to_string(j));
          }
  }

  Vec3 pos_at(std::uint32_t i, double t) const { return x[i] + (t - tloc[i]) * v[i]; }

  void advance_particle(std::uint32_t i, double t) {
    x[i] = pos_at(i, t);
    tloc[i] = t;
  }

  // --- scheduling ------------------------------------------------------

  void predict_pair(std::uint32_t i, std::uint32_t j) {
    const double t0 = std::max(tloc[i], tloc[j]);
    const Vec3 di = pos_at(i, t0), dj = pos_at(j, t0);
    const Vec3 d0 = geom.displacement(di, dj);
    const Vec3 u = v[i] - v[j];
    std::optional<double> s;
    if (tiny || ncell < 7)
      // coarse grids: neighboring cells span a large fraction of the torus,
      // so the minimal image can flip before contact; search nearby images
      s = first_image_contact(d0, u, radius, geom.side, tiny ? 2 : 1);
    else {
      // |d0| < side/2 here, and |d(s)| decreases up to the contact root, so
      // the minimal image cannot flip before contact
      const double b = dot(d0, u);
      if (b < 0.0) {
        const double u2 = norm2(u);
        const double disc = b * b - u2 * (norm2(d0) - 4.0 * radius * radius);
        if (disc > 0.0) {
          double root = (-b - std::sqrt(disc)) / u2;
          if (root < 0.0) root = 0.0;
          const Vec3 dc = d0 + root * u;
          const double ndc = norm(dc);
          if (!(ndc > 0.0) || std::fabs(dot(dc, u)) / ndc >= kGrazeTol) s = root;
        }
      }
    }
    if (!s) return;
    Event ev;
    ev.t = std::max(t0 + *s, now);
    ev.a = std::min(i, j);
    ev.b = std::max(i, j);
    ev.ca = count[ev.a];
    ev.cb = count[ev.b];
    ev.kind = 0;
    heap.push(ev);
  }

  template <typename F>
  void for_cell_range(int ax0, int ax1, int ay0, int ay1, int az0, int az1, F&& f) {
    for (int a = ax0; a <= ax1; ++a)
      for (int b = ay0; b <= ay1; ++b)
        for (int c = az0; c <= az1; ++c) {
          const int wa = (a % ncell + ncell) % ncell;
          const int wb = (b % ncell + ncell) % ncell;
          const int wc = (c % ncell + ncell) % ncell;
          for (int j = head[cell_index(wa, wb, wc)]; j >= 0; j = nxt[j]) f(j);
        }
  }

  void schedule_pairs_init(std::uint32_t i) {
    if (tiny) {
      for (std::uint32_t j = i + 1; j < n; ++j) predict_pair(i, j);
      return;
    }
    for_cell_range(cx[i] - 1, cx[i] + 1, cy[i] - 1, cy[i] + 1, cz[i] - 1, cz[i] + 1,
                   [&](int j) {
                     if (static_cast<std::uint32_t>(j) > i) predict_pair(i, j);
                   });
  }

  void schedule_pairs_all(std::uint32_t i) {
    if (tiny) {
      for (std::uint32_t j = 0; j < n; ++j)
        if (j != i) predict_pair(i, j);
      return;
    }
    for_cell_range(cx[i] - 1, cx[i] + 1, cy[i] - 1, cy[i] + 1, cz[i] - 1, cz[i] + 1,
                   [&](int j) {
                     if (static_cast<std::uint32_t>(j) != i) predict_pair(i, j);
                   });
  }

  // pairs in the freshly exposed cell layer after a crossing along `axis`
  void schedule_pairs_layer(std::uint32_t i, int axis, int dir) {
    if (tiny) {
      for (std::uint32_t j = 0; j < n; ++j)
        if (j != i) predict_pair(i, j);
      return;
    }
    int ax0 = cx[i] - 1, ax1 = cx[i] + 1;
    int ay0 = cy[i] - 1, ay1 = cy[i] + 1;
    int az0 = cz[i] - 1, az1 = cz[i] + 1;
    if (axis == 0) ax0 = ax1 = cx[i] + dir;
    if (axis == 1) ay0 = ay1 = cy[i] + dir;
    if (axis == 2) az0 = az1 = cz[i] + dir;
    for_cell_range(ax0, ax1, ay0, ay1, az0, az1, [&](int j) {
      if (static_cast<std::uint32_t>(j) != i) predict_pair(i, j);
    });
  }

  void schedule_crossing(std::uint32_t i) {
    double best = std::numeric_limits<double>::infinity();
    int axis = -1, dir = 0;
    const int cc[3] = {cx[i], cy[i], cz[i]};
    for (int a = 0; a < 3; ++a) {
      const double va = v[i][a];
      if (va == 0.0) continue;
      const double bound = va > 0.0 ? (cc[a] + 1) * h : cc[a] * h;
      double dt = (bound - x[i][a]) / va;
      if (dt < 0.0) dt = 0.0;
      if (dt < best) {
        best = dt;
        axis = a;
        dir = va > 0.0 ? 1 : -1;
      }
    }
    if (axis < 0) return;  // at rest: no crossings
    Event ev;
    ev.t = tloc[i] + best;
    ev.a = i;
    ev.b = i;
    ev.ca = count[i];
    ev.cb = count[i];
    ev.kind = 1;
    ev.axis = static_cast<std::uint8_t>(axis);
    ev.dir = static_cast<std::int8_t>(dir);
    heap.push(ev);
  }

  bool stale(const Event& ev) const {
    return count[ev.a] != ev.ca || (ev.kind == 0 && count[ev.b] != ev.cb);
  }

  // --- event processing --------------------------------------------------

  void process_crossing(const Event& ev) {
    const std::uint32_t i = ev.a;
    advance_particle(i, ev.t);
    unlink(i);
    int* cc = ev.axis == 0 ? &cx[i] : (ev.axis == 1 ? &cy[i] : &cz[i]);
    *cc += ev.dir;
    if (*cc < 0) {
      *cc = ncell - 1;
      x[i][ev.axis] += geom.side;
    } else if (*cc >= ncell) {
      *cc = 0;
      x[i][ev.axis] -= geom.side;
    }
    link(i);
    schedule_crossing(i);
    schedule_pairs_layer(i, ev.axis, ev.dir);
  }

  void process_collision(const Event& ev, EventLog* log) {
    const std::uint32_t i = ev.a, j = ev.b;
    advance_particle(i, ev.t);
    advance_particle(j, ev.t);
    const Vec3 d = geom.displacement(x[i], x[j]);
    const double dist = norm(d);
    const Vec3 u = v[i] - v[j];
    // phantom contact (stale image or drift): drop and re-predict
    if (std::fabs(dist - 2.0 * radius) > 1e-7 * std::max(1.0, 2.0 * radius) ||
        dot(d, u) >= 0.0) {
      predict_pair(i, j);
      return;
    }
    const Vec3 nrm = (1.0 / dist) * d;
    CollisionEvent rec;
    rec.i = i;
    rec.j = j;
    rec.time = ev.t;
    rec.normal = nrm;
    rec.pre_i = v[i];
    rec.pre_j = v[j];
    const auto [vi, vj] = apply_collision(v[i], v[j], nrm);
    v[i] = vi;
    v[j] = vj;
    rec.post_i = vi;
    rec.post_j = vj;
    if (log) log->push_back(rec);
    ++count[i];
    ++count[j];
    schedule_crossing(i);
    schedule_crossing(j);
    schedule_pairs_all(i);
    schedule_pairs_all(j);
  }

  // abort if another valid contact involving ev's particles sits within the
  // simultaneity window (the measure-zero configuration the dynamics excludes)
  void triple_scan(const Event& ev) {
    std::vector<Event> buffer;
    while (!heap.empty() && heap.top().t <= ev.t + kTimeTol) {
      Event e2 = heap.top();
      heap.pop();
      buffer.push_back(e2);
      if (e2.kind != 0 || stale(e2)) continue;
      const bool same_pair = e2.a == ev.a && e2.b == ev.b;
      const bool shares = e2.a == ev.a || e2.a == ev.b || e2.b == ev.a || e2.b == ev.b;
      if (!same_pair && shares)
        throw TripleCollisionAbort("contacts of pairs (" + std::to_string(ev.a) + "," +
                                   std::to_string(ev.b) + ") and (" + std::to_string(e2.a) +
                                   "," + std::to_string(e2.b) + ") within 1e-12 at t=" +
                                   std::to_string(ev.t));
    }
    for (const auto& e2 : buffer) heap.push(e2);
  }

  void run(double t_end, EventLog* log) {
    while (!heap.empty() && heap.top().t <= t_end) {
      Event ev = heap.top();
      heap.pop();
      if (stale(ev)) continue;
      if (++processed > kEventBudget)
        throw std::runtime_error("event budget exceeded (scheduling runaway?)");
      now = std::max(now, ev.t);
      if (ev.kind == 1) {
        process_crossing(ev);
      } else {
        triple_scan(ev);
        process_collision(ev, log);
      }
    }
    for (std::uint32_t i = 0; i < n; ++i) advance_particle(i, t_end);
    now = t_end;
  }

  PhasePoint snapshot() const {
    PhasePoint s;
    s.pos.resize(n);
    s.vel = v;
    s.radius = radius;
    s.time = now;
    for (std::size_t i = 0; i < n; ++i) s.pos[i] = geom.wrap(pos_at(static_cast<std::uint32_t>(i), now));
    return s;
  }

  void validate_final() const {
    const double lim = 2.0 * radius - 1e-9;
    if (lim <= 0.0) return;
    if (tiny) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (geom.distance(pos_at(i, now), pos_at(j, now)) < lim)
            throw OverlapInput("post-evolve overlap between " + std::to_string(i) + "," +
                               std::to_string(j));
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 xi = pos_at(static_cast<std::uint32_t>(i), now);
      for (int a = cx[i] - 1; a <= cx[i] + 1; ++a)
        for (int b = cy[i] - 1; b <= cy[i] + 1; ++b)
          for (int c = cz[i] - 1; c <= cz[i] + 1; ++c) {
            const int wa = (a % ncell + ncell) % ncell;
            const int wb = (b % ncell + ncell) % ncell;
            const int wc = (c % ncell + ncell) % ncell;
            for (int j = head[cell_index(wa, wb, wc)]; j >= 0; j = nxt[j])
              if (static_cast<std::size_t>(j) > i &&
                  geom.distance(xi, pos_at(j, now)) < lim)
                throw OverlapInput("post-evolve overlap between " + std::to_string(i) + "," +
                                   std::to_string(j));
          }
    }
  }
};

EventDrivenSim::EventDrivenSim(PhasePoint state, const TorusGeometry& geom)
    : impl_(new Impl(std::move(state), geom)) {}

EventDrivenSim::~EventDrivenSim() { delete impl_; }

void EventDrivenSim::advance(double horizon, EventLog* log) {
  if (horizon < 0.0) throw std::invalid_argument("evolve: horizon must be >= 0");
  impl_->run(impl_->now + horizon, log);
  impl_->validate_final();
}

PhasePoint EventDrivenSim::state() const { return impl_->snapshot(); }

double EventDrivenSim::time() const { return impl_->now; }

void EventDrivenSim::reverse_velocities() {
  // clears pending predictions via the counters; positions are untouched
  for (std::size_t i = 0; i < impl_->n; ++i) {
    impl_->advance_particle(static_cast<std::uint32_t>(i), impl_->now);
    impl_->v[i] = -impl_->v[i];
    ++impl_->count[i];
  }
  for (std::size_t i = 0; i < impl_->n; ++i) {
    impl_->schedule_crossing(static_cast<std::uint32_t>(i));
    impl_->schedule_pairs_init(static_cast<std::uint32_t>(i));
  }
}

PhasePoint evolve(const PhasePoint& state, double horizon, const TorusGeometry& geom,
                  EventLog* log) {
  EventDrivenSim sim(state, geom);
  sim.advance(horizon, log);
  return sim.state();
}

}  // namespace kinlab::md
