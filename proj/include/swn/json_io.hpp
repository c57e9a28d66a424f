#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace swn {

using json = nlohmann::json;

inline constexpr std::string_view kToolVersion = "0.3.0";

// Reproducibility header embedded in every artifact.
json artifact_meta(const json& config);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace swn
