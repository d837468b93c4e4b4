#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "uqkit/mlp.hpp"
#include "uqkit/posterior.hpp"

namespace uqkit {

inline constexpr int state_format_version = 1;

struct SavedPosterior {
    MlpConfig model;
    PosteriorState state;
};

nlohmann::ordered_json model_to_json(const MlpConfig& cfg);
/// Throws DataError on missing or ill-typed fields.
MlpConfig model_from_json(const nlohmann::json& j);

/// Versioned document; float arrays are base64 of little-endian IEEE-754 doubles.
nlohmann::ordered_json state_to_json(const SavedPosterior& saved);
SavedPosterior state_from_json(const nlohmann::json& j);

void save_state(const std::filesystem::path& path, const SavedPosterior& saved);
SavedPosterior load_state(const std::filesystem::path& path);

std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(const std::string& text, std::size_t count);

} // namespace uqkit
