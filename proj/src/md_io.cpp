#include "kinlab/md/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace kinlab::md {
namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_checkpoint(std::ostream& os, const PhasePoint& state, double lambda,
                      std::uint64_t seed) {
  os << "# N=" << state.size() << " r=" << g17(state.radius) << " lambda=" << g17(lambda)
     << " t=" << g17(state.time) << " seed=" << seed << "\n";
  os << "index,x,y,z,vx,vy,vz\n";
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto& p = state.pos[i];
    const auto& v = state.vel[i];
    os << i << ',' << g17(p.x) << ',' << g17(p.y) << ',' << g17(p.z) << ',' << g17(v.x) << ','
       << g17(v.y) << ',' << g17(v.z) << "\n";
  }
}

PhasePoint read_checkpoint(std::istream& is, double* lambda_out, std::uint64_t* seed_out) {
  std::string line;
  if (!std::getline(is, line) || line.empty() || line[0] != '#')
    throw std::runtime_error("checkpoint: missing header line");
  std::size_t n = 0;
  double r = 0.0, lambda = 0.0, t = 0.0;
  unsigned long long seed = 0;
  if (std::sscanf(line.c_str(), "# N=%zu r=%lf lambda=%lf t=%lf seed=%llu", &n, &r, &lambda, &t,
                  &seed) != 5)
    throw std::runtime_error("checkpoint: malformed header");
  if (lambda_out) *lambda_out = lambda;
  if (seed_out) *seed_out = seed;
  std::getline(is, line);  // column header
  PhasePoint s;
  s.radius = r;
  s.time = t;
  s.pos.resize(n);
  s.vel.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("checkpoint: truncated body");
    std::size_t idx;
    Vec3 p, v;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf,%lf,%lf", &idx, &p.x, &p.y, &p.z, &v.x,
                    &v.y, &v.z) != 7)
      throw std::runtime_error("checkpoint: malformed row");
    if (idx >= n) throw std::runtime_error("checkpoint: particle index out of range");
    s.pos[idx] = p;
    s.vel[idx] = v;
  }
  return s;
}

void write_trajectory(std::ostream& os, const EventLog& log) {
  os << "time,i,j,nx,ny,nz,pre_ix,pre_iy,pre_iz,pre_jx,pre_jy,pre_jz,"
        "post_ix,post_iy,post_iz,post_jx,post_jy,post_jz\n";
  for (const auto& e : log) {
    os << g17(e.time) << ',' << e.i << ',' << e.j << ',' << g17(e.normal.x) << ','
       << g17(e.normal.y) << ',' << g17(e.normal.z) << ',' << g17(e.pre_i.x) << ','
       << g17(e.pre_i.y) << ',' << g17(e.pre_i.z) << ',' << g17(e.pre_j.x) << ','
       << g17(e.pre_j.y) << ',' << g17(e.pre_j.z) << ',' << g17(e.post_i.x) << ','
       << g17(e.post_i.y) << ',' << g17(e.post_i.z) << ',' << g17(e.post_j.x) << ','
       << g17(e.post_j.y) << ',' << g17(e.post_j.z) << "\n";
  }
}

}  // namespace kinlab::md
