#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

struct SeedRecord {
  std::uint64_t base_seed = 0;
  std::uint64_t replication_id = 0;
};

// Materialized Brownian increments for one replication: n_particles
// idiosyncratic drivers plus one common driver, all on the same grid.
struct BrownianBundle {
  double dt = 0.0;
  int n_steps = 0;
  int n_particles = 0;
  std::vector<double> idio;    // n_steps x n_particles, row-major [step][particle]
  std::vector<double> common;  // n_steps
  SeedRecord seed_record;

  double idio_at(int step, int particle) const {
    return idio[static_cast<std::size_t>(step) * n_particles + particle];
  }
  // Common-noise path W at grid times: n_steps + 1 values, W[0] = 0.
  std::vector<double> common_cumulative() const;
};

// Increments are sqrt(dt) times standard normals addressed by
// (base_seed, replication_id, particle, step), so a prefix of the particles
// is reused verbatim when n grows.
BrownianBundle make_bundle(std::uint64_t base_seed, std::uint64_t replication_id,
                           const TimeGrid& grid, int n_particles);

// Flat binary dump, little-endian. Layout: magic "MFGB1", base_seed u64,
// replication_id u64, n_steps u32, n_particles u32, dt f64, idio array,
// common array.
void dump_bundle(const BrownianBundle& b, const std::string& path);
BrownianBundle load_bundle(const std::string& path);

namespace ref {
// Serial reference, bit-identical to make_bundle.
BrownianBundle make_bundle(std::uint64_t base_seed, std::uint64_t replication_id,
                           const TimeGrid& grid, int n_particles);
}  // namespace ref

}  // namespace mfg
