#include "roughhedge/volsim/pathio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <ostream>

#include "roughhedge/mathkit/errors.hpp"
#include "roughhedge/mathkit/format.hpp"

namespace roughhedge {

static_assert(std::endian::native == std::endian::little, "path files are written in host order");

namespace {

constexpr char kMagic[8] = {'R', 'H', 'P', 'A', 'T', 'H', 'S', '1'};

class Fnv1a {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= c[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void f64(double v) { bytes(&v, sizeof v); }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw ValidationError("path file truncated");
  return v;
}

}  // namespace

std::uint64_t model_hash(const VolModel& model) {
  Fnv1a h;
  h.i64(static_cast<std::int64_t>(model.kernel.kind));
  h.f64(model.kernel.hurst);
  h.f64(model.kernel.epsilon);
  h.f64(model.sigma_z);
  h.i64(static_cast<std::int64_t>(model.map));
  h.f64(model.omega);
  h.f64(model.sigma_bar);
  h.f64(model.rho);
  return h.value();
}

void write_path_batch(const PathBatch& batch, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof kMagic);
  put<double>(os, batch.grid.maturity);
  put<std::int64_t>(os, batch.grid.steps);
  put<double>(os, batch.grid.burn_in);
  put<std::int64_t>(os, batch.n_paths);
  put<double>(os, batch.x0);
  put<std::uint64_t>(os, batch.seed);
  put<std::uint64_t>(os, batch.model_hash);
  put<std::int64_t>(os, static_cast<std::int64_t>(batch.sampler.method));
  os.write(reinterpret_cast<const char*>(batch.x.data()), static_cast<std::streamsize>(batch.x.size() * sizeof(double)));
  os.write(reinterpret_cast<const char*>(batch.sigma.data()),
           static_cast<std::streamsize>(batch.sigma.size() * sizeof(double)));
  if (!os) throw ValidationError("write to '" + path + "' failed");
}

PathBatch read_path_batch(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open '" + path + "'");
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw ValidationError("'" + path + "' is not a path file");
  PathBatch b;
  b.grid.maturity = get<double>(is);
  b.grid.steps = static_cast<int>(get<std::int64_t>(is));
  b.grid.burn_in = get<double>(is);
  b.n_paths = get<std::int64_t>(is);
  b.x0 = get<double>(is);
  b.seed = get<std::uint64_t>(is);
  b.model_hash = get<std::uint64_t>(is);
  b.sampler.method = static_cast<SamplerMethod>(get<std::int64_t>(is));
  if (b.n_paths < 1 || b.grid.steps < 2) throw ValidationError("path file header is corrupt");
  b.x.resize(b.n_paths, b.grid.steps + 1);
  b.sigma.resize(b.n_paths, b.grid.steps + 1);
  is.read(reinterpret_cast<char*>(b.x.data()), static_cast<std::streamsize>(b.x.size() * sizeof(double)));
  is.read(reinterpret_cast<char*>(b.sigma.data()), static_cast<std::streamsize>(b.sigma.size() * sizeof(double)));
  if (!is) throw ValidationError("path file truncated");
  return b;
}

void write_path_batch_csv(const PathBatch& batch, std::ostream& out) {
  out << "path_id,step,t,x,sigma\n";
  const double dt = batch.grid.dt();
  for (long p = 0; p < batch.n_paths; ++p) {
    for (long k = 0; k <= batch.grid.steps; ++k) {
      out << p << ',' << k << ',' << format_double(k * dt) << ',' << format_double(batch.x(p, k)) << ','
          << format_double(batch.sigma(p, k)) << '\n';
    }
  }
}

}  // namespace roughhedge
