#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "guru/robust_loss.hpp"
#include "guru/trainer_kernel.hpp"

// Text model format, version 1. Line oriented, whitespace separated, numbers
// in shortest round-trip decimal so a save/load cycle is lossless:
//
//   guru-model 1
//   algo <name>                    free-form training algorithm tag
//   kind linear|multiclass|kernel
//   sigma <s>
//   dim <d>
//   linear:     w <d values>
//   multiclass: classes <C>, then C lines "w <c> <d values>"
//   kernel:     kernel <spec>, samples <M>, nu <v>, train_hash <16 hex digits>,
//               alpha <M values>, embedded 0|1, and when embedded M lines
//               "x <label> <d values>"
//   end
namespace guru {

inline constexpr int kModelFormatVersion = 1;

using AnyModel = std::variant<LinearModel, MulticlassModel, KernelModel>;

struct SavedModel {
  std::string algo;
  AnyModel model;
};

void write_model(std::ostream& out, const SavedModel& saved, bool embed_samples = true);
/// Kernel models saved without samples need `train`; its content hash must
/// match the stored one.
SavedModel read_model(std::istream& in, const Dataset* train = nullptr);

void save_model(const std::filesystem::path& path, const SavedModel& saved,
                bool embed_samples = true);
SavedModel load_model(const std::filesystem::path& path, const Dataset* train = nullptr);

std::string model_kind(const AnyModel& model);

}  // namespace guru
