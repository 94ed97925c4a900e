#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "roughhedge/volsim/market.hpp"
#include "roughhedge/volsim/model.hpp"

namespace roughhedge {

/// FNV-1a hash of every VolModel field (doubles by bit pattern).
std::uint64_t model_hash(const VolModel& model);

/// Binary layout, all little-endian:
///   char[8] "RHPATHS1"
///   f64 maturity, i64 steps, f64 burn_in, i64 n_paths, f64 x0,
///   u64 seed, u64 model_hash, i64 sampler method,
///   f64 x[n_paths][steps + 1], f64 sigma[n_paths][steps + 1]   (path-major)
void write_path_batch(const PathBatch& batch, const std::string& path);
PathBatch read_path_batch(const std::string& path);

/// Long CSV: path_id,step,t,x,sigma. Intended for small batches.
void write_path_batch_csv(const PathBatch& batch, std::ostream& out);

}  // namespace roughhedge
