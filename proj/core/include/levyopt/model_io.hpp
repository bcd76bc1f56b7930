#pragma once

#include "levyopt/problem.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace levyopt {

inline constexpr int kModelSchemaVersion = 1;

/// Parses a model file in TOML. Errors are ParseError with the line and dotted field name.
Model parse_model(std::string_view text, std::string_view source_name = "model");
Model load_model(const std::filesystem::path& path);

/// Serializes a model; parse_model(write_model(m)) reproduces every number bit for bit.
/// Custom densities cannot be written and raise DomainError; oracle constraints likewise.
std::string write_model(const Model& model);

}  // namespace levyopt
