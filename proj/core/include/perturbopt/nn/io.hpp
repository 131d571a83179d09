#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "perturbopt/nn/layout.hpp"
#include "perturbopt/nn/model.hpp"

namespace perturbopt::nn {

// ModelSpec <-> {"input_shape": [...], "layers": [...], "loss_head": "..."}.
// Layers: {"type":"dense","in":2,"out":3,"activation":"tanh","bias":true},
//         {"type":"conv2d","in_ch":1,"out_ch":2,"kernel":[3,3],"activation":"relu","bias":true},
//         {"type":"flatten"}.
void to_json(nlohmann::json& j, const ModelSpec& m);
void from_json(const nlohmann::json& j, ModelSpec& m);

/// Binary container: 8-byte magic, u64 little-endian count, then `count`
/// little-endian IEEE-754 doubles.
using Magic = std::array<char, 8>;
inline constexpr Magic kParamMagic{'P', 'V', 'E', 'C', '0', '0', '0', '1'};

void write_container(const std::filesystem::path& path, const Magic& magic, std::span<const double> values);
std::vector<double> read_container(const std::filesystem::path& path, const Magic& magic);

void save_params(const std::filesystem::path& path, const ParamVector& w);
/// Reads a PVEC file and attaches `layout`; the stored length must match.
ParamVector load_params(const std::filesystem::path& path, const FilterLayout& layout);

}  // namespace perturbopt::nn
