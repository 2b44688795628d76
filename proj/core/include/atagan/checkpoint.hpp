#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "atagan/adam.hpp"
#include "atagan/errors.hpp"
#include "atagan/models.hpp"

namespace atagan {

// Binary layout, all integers little-endian:
//   "ATAGAN1"
//   u32 tag length, tag bytes              (architecture tag)
//   u32 parameter count
//   per parameter: u32 name length, name, u32 rank, u64 dims[rank],
//                  raw little-endian float64 values
//   optional "ADAM1" section: u64 step, then for every parameter in order
//                  its first-moment then second-moment values (float64)
// Nothing may follow the last section.
struct Checkpoint {
  std::string arch;
  ParamList params;
  std::optional<AdamState> adam;
};

/// Writes to a sibling temporary and renames into place.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws FormatError on bad magic, truncation, trailing bytes or bad sections.
Checkpoint read_checkpoint(const std::filesystem::path& path);

template <class P>
void save_params(const std::filesystem::path& path, const P& params,
                 const AdamState* adam = nullptr) {
  Checkpoint c{std::string(arch_tag(P::kArch)), params.named(), std::nullopt};
  if (adam) c.adam = *adam;
  write_checkpoint(path, c);
}

/// Loads and checks the architecture tag and parameter layout.
template <class P>
P load_params(const std::filesystem::path& path, AdamState* adam = nullptr) {
  Checkpoint c = read_checkpoint(path);
  if (parse_arch(c.arch) != P::kArch) {
    throw FormatError(path.string() + ": checkpoint holds a '" + c.arch + "', expected '" +
                      std::string(arch_tag(P::kArch)) + "'");
  }
  P p = P::from_named(c.params);
  if (adam) {
    if (!c.adam) throw FormatError(path.string() + ": checkpoint has no optimizer section");
    *adam = std::move(*c.adam);
  }
  return p;
}

}  // namespace atagan
