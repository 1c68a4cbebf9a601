#pragma once

#include <filesystem>
#include <optional>

#include "scribe/model.hpp"
#include "scribe/optim.hpp"

namespace scribe {

// Checkpoint container, version 1:
//
//   bytes 0..7   magic "SCRIBECK"
//   u32          format version (little-endian)
//   u64          header length H in bytes (little-endian)
//   H bytes      JSON header: architecture, head, vocabulary / normalisation /
//                alphabet, optimizer kind, hyperparameters and step count,
//                and the number of parameters and state buffers
//   P x f64      flat parameter vector (little-endian IEEE-754)
//   S x P x f64  optimizer buffers, in the order listed in the header
//
// Vocabulary and alphabet symbols are stored as byte arrays so arbitrary
// byte-level vocabularies survive. Doubles are written bit-for-bit.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    Model model;
    std::optional<Optimizer> optimizer;
};

void save_checkpoint(const std::filesystem::path &path, const Model &model,
                     const Optimizer *optimizer = nullptr);
// Throws std::runtime_error on a missing file, bad magic, unknown version or
// a truncated payload.
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace scribe
