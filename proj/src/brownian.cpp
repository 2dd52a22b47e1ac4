#include "mfg/brownian.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "mfg/rng.hpp"
#include "mfg/summation.hpp"

namespace mfg {

namespace {

void check_sizes(const TimeGrid& grid, int n_particles) {
  grid.validate();
  if (n_particles < 1) throw std::invalid_argument("make_bundle: n_particles must be >= 1");
}

}  // namespace

std::vector<double> BrownianBundle::common_cumulative() const {
  std::vector<double> w(n_steps + 1, 0.0);
  for (int j = 0; j < n_steps; ++j) w[j + 1] = w[j] + common[j];
  return w;
}

BrownianBundle make_bundle(std::uint64_t base_seed, std::uint64_t replication_id,
                           const TimeGrid& grid, int n_particles) {
  check_sizes(grid, n_particles);
  BrownianBundle b;
  b.dt = grid.dt();
  b.n_steps = grid.n_steps;
  b.n_particles = n_particles;
  b.seed_record = {base_seed, replication_id};
  b.idio.resize(static_cast<std::size_t>(b.n_steps) * n_particles);
  b.common.resize(b.n_steps);
  const std::uint64_t key = rng::stream_key(base_seed, replication_id);
  const double sdt = std::sqrt(b.dt);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < b.n_steps; ++j) {
    double* row = b.idio.data() + static_cast<std::size_t>(j) * n_particles;
    for (int i = 0; i < n_particles; ++i) {
      row[i] = sdt * rng::normal_draw(key, static_cast<std::uint64_t>(i), rng::Stream::idio,
                                      static_cast<std::uint64_t>(j));
    }
    b.common[j] =
        sdt * rng::normal_draw(key, 0, rng::Stream::common, static_cast<std::uint64_t>(j));
  }
  return b;
}

namespace ref {

BrownianBundle make_bundle(std::uint64_t base_seed, std::uint64_t replication_id,
                           const TimeGrid& grid, int n_particles) {
  check_sizes(grid, n_particles);
  BrownianBundle b;
  b.dt = grid.dt();
  b.n_steps = grid.n_steps;
  b.n_particles = n_particles;
  b.seed_record = {base_seed, replication_id};
  b.idio.resize(static_cast<std::size_t>(b.n_steps) * n_particles);
  b.common.resize(b.n_steps);
  const std::uint64_t key = rng::stream_key(base_seed, replication_id);
  const double sdt = std::sqrt(b.dt);
  for (int j = 0; j < b.n_steps; ++j) {
    double* row = b.idio.data() + static_cast<std::size_t>(j) * n_particles;
    for (int i = 0; i < n_particles; ++i) {
      row[i] = sdt * rng::normal_draw(key, static_cast<std::uint64_t>(i), rng::Stream::idio,
                                      static_cast<std::uint64_t>(j));
    }
    b.common[j] =
        sdt * rng::normal_draw(key, 0, rng::Stream::common, static_cast<std::uint64_t>(j));
  }
  return b;
}

}  // namespace ref

namespace {

constexpr char kMagic[5] = {'M', 'F', 'G', 'B', '1'};

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

void write_bytes(std::FILE* f, const void* p, std::size_t n) {
  if (std::fwrite(p, 1, n, f) != n) throw std::runtime_error("dump_bundle: write failed");
}

void read_bytes(std::FILE* f, void* p, std::size_t n) {
  if (std::fread(p, 1, n, f) != n) throw std::runtime_error("load_bundle: truncated file");
}

}  // namespace

void dump_bundle(const BrownianBundle& b, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("dump_bundle: cannot open " + path);
  FileCloser closer{f};
  write_bytes(f, kMagic, sizeof(kMagic));
  const std::uint64_t seed = b.seed_record.base_seed, rep = b.seed_record.replication_id;
  write_bytes(f, &seed, 8);
  write_bytes(f, &rep, 8);
  const std::uint32_t steps = static_cast<std::uint32_t>(b.n_steps);
  const std::uint32_t parts = static_cast<std::uint32_t>(b.n_particles);
  write_bytes(f, &steps, 4);
  write_bytes(f, &parts, 4);
  write_bytes(f, &b.dt, 8);
  write_bytes(f, b.idio.data(), b.idio.size() * 8);
  write_bytes(f, b.common.data(), b.common.size() * 8);
}

BrownianBundle load_bundle(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("load_bundle: cannot open " + path);
  FileCloser closer{f};
  char magic[5];
  read_bytes(f, magic, 5);
  if (std::memcmp(magic, kMagic, 5) != 0) throw std::runtime_error("load_bundle: bad magic");
  BrownianBundle b;
  std::uint64_t seed, rep;
  std::uint32_t steps, parts;
  read_bytes(f, &seed, 8);
  read_bytes(f, &rep, 8);
  read_bytes(f, &steps, 4);
  read_bytes(f, &parts, 4);
  read_bytes(f, &b.dt, 8);
  if (steps == 0 || parts == 0 || !(b.dt > 0.0)) throw std::runtime_error("load_bundle: bad header");
  b.seed_record = {seed, rep};
  b.n_steps = static_cast<int>(steps);
  b.n_particles = static_cast<int>(parts);
  b.idio.resize(static_cast<std::size_t>(steps) * parts);
  b.common.resize(steps);
  read_bytes(f, b.idio.data(), b.idio.size() * 8);
  read_bytes(f, b.common.data(), b.common.size() * 8);
  return b;
}

}  // namespace mfg
