#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ifl/tensor.hpp"

namespace ifl {

// Binary formats, all little-endian:
//   ACTV: "ACTV" u32 version=1, u32 N, u32 d, N*d float32 row-major
//   PRED: "PRED" u32 version=1, u32 N, N u16 labels
//   ITNS: "ITNS" u32 version=1, u32 M, u32 N, u32 T, f32 gamma_corr,
//         f32 gamma_data, u64 nnz, nnz x (u32 m, u32 n, u32 t) sorted
// Readers throw FormatError on any structural problem.

ActivationMatrix read_activations(const std::filesystem::path& path, std::string model_id = {});
void write_activations(const std::filesystem::path& path, const ActivationMatrix& act);

std::vector<int> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const std::vector<int>& labels);

InteractionTensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const InteractionTensor& omega);

std::string encode_tensor(const InteractionTensor& omega);
InteractionTensor decode_tensor(const std::string& bytes);

struct ManifestModel {
  std::string id;
  std::filesystem::path activations;
  std::filesystem::path predictions;  // empty when absent
};

/// Relative paths are resolved against the manifest's directory.
struct Manifest {
  std::vector<ManifestModel> models;
  std::filesystem::path labels;  // PRED-format file of true labels; empty when absent
  std::size_t pcs = 50;
  double corr_percentile = 90.0;
  double data_percentile = 90.0;
};

Manifest read_manifest(const std::filesystem::path& path);

/// Writes through a temporary file and renames it into place.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ifl
