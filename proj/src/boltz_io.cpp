#include "kinlab/boltz/io.hpp"

#include <cstdio>
#include <ostream>

namespace kinlab::boltz {
namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_kinetic_series_csv(std::ostream& os, std::span<const KineticSeriesRow> rows) {
  os << "t,h,h_stderr,px,py,pz,energy,overflow_mass\n";
  for (const auto& r : rows) {
    os << g17(r.t) << ',' << g17(r.h) << ',' << g17(r.h_stderr) << ',' << g17(r.momentum.x)
       << ',' << g17(r.momentum.y) << ',' << g17(r.momentum.z) << ',' << g17(r.energy) << ','
       << g17(r.overflow_mass) << "\n";
  }
}

void write_jump_paths_csv(std::ostream& os, std::span<const JumpPath> paths) {
  os << "path,time,x,y,z,vx,vy,vz\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const JumpPath& path = paths[p];
    auto row = [&](double t, const Vec3& x, const Vec3& v) {
      os << p << ',' << g17(t) << ',' << g17(x.x) << ',' << g17(x.y) << ',' << g17(x.z) << ','
         << g17(v.x) << ',' << g17(v.y) << ',' << g17(v.z) << "\n";
    };
    row(path.t0, path.x0, path.v0);
    for (const auto& j : path.jumps) row(j.time, j.pos, j.vel);
    row(path.final_time, path.position_at(path.final_time),
        path.velocity_at(path.final_time));
  }
}

}  // namespace kinlab::boltz
