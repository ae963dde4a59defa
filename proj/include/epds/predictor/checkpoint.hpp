#pragma once

#include <filesystem>
#include <iosfwd>
#include <variant>

#include "epds/dataset.hpp"
#include "epds/predictor/model.hpp"

namespace epds::nn {

using AnyModel = std::variant<LstmModel<double>, RnnModel<double>>;

/// A trained model together with the encoder its inputs were fitted with.
struct Checkpoint {
  AnyModel model;
  FeatureEncoder encoder;
};

inline constexpr int kCheckpointVersion = 1;

/// Versioned text dump: shape header, encoder, then every tensor with its
/// dimensions. Doubles are written in shortest round-trip form, so a
/// save/load cycle is bit-exact.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace epds::nn
