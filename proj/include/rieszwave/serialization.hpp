#ifndef RIESZWAVE_SERIALIZATION_HPP
#define RIESZWAVE_SERIALIZATION_HPP

// Binary files: a header of little-endian 64-bit fields
//   magic, version, k, d, n_space, n_time, L, dt, beta, master_seed
// (solution fields add model_hash and the containment flag) followed by the
// values as little-endian f64 in the in-memory layout.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rieszwave/noise_field.hpp"
#include "rieszwave/spde_sim.hpp"

namespace rieszwave {

inline constexpr std::uint64_t kNoiseMagic = 0x314553494f4e5752ULL;  // "RWNOISE1"
inline constexpr std::uint64_t kFieldMagic = 0x31444c4549465752ULL;  // "RWFIELD1"
inline constexpr std::uint64_t kFormatVersion = 1;

void write_noise_grid(const std::filesystem::path& path, const NoiseGrid& noise);
NoiseGrid read_noise_grid(const std::filesystem::path& path);

void write_solution_field(const std::filesystem::path& path, const SolutionField& field);
SolutionField read_solution_field(const std::filesystem::path& path);

/// One file per path (path_00000.rwf, ...) plus manifest.json listing the
/// files, their seeds and the model hash. Returns the file names.
std::vector<std::string> write_ensemble(const std::filesystem::path& dir, std::span<const SolutionField> paths,
                                        std::uint64_t master_seed);
std::vector<SolutionField> read_ensemble(const std::filesystem::path& dir);

}  // namespace rieszwave

#endif  // RIESZWAVE_SERIALIZATION_HPP
